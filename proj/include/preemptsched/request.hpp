#pragma once

#include <string>

#include "preemptsched/resources.hpp"

namespace preemptsched {

/// A request for one instance of `flavor`.
struct Request {
  std::string id;
  Flavor flavor;
  InstanceKind kind = InstanceKind::Normal;
  Minutes arrival_time = 0;

  bool is_preemptible() const { return kind == InstanceKind::Preemptible; }
  const ResourceVector& resources() const { return flavor.resources; }
};

}  // namespace preemptsched
