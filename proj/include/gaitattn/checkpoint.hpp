#pragma once

#include <string>

#include "gaitattn/model.hpp"

namespace gaitattn {

// Model checkpoint container: a short magic, a JSON header describing the
// config and the tensor table, then all parameter values as 64-bit
// little-endian floats. Round-trips are bitwise exact.
void save_checkpoint(const MultiStreamModel& m, const std::string& path);
MultiStreamModel load_checkpoint(const std::string& path);

}  // namespace gaitattn
