#pragma once

#include <string>
#include <vector>

#include "sx/dataflow.hpp"
#include "sx/workload.hpp"

namespace sx {

std::vector<std::string> workload_preset_names();
std::vector<std::string> hardware_preset_names();

Workload workload_preset(const std::string& name);
HardwareConfig hardware_preset(const std::string& name);

}  // namespace sx
