#pragma once

#include <spdlog/spdlog.h>

namespace qvc {

// Applies the QVC_LOG environment variable (trace|debug|info|warn|error|off)
// to the default spdlog logger. Safe to call more than once.
void init_logging();

}  // namespace qvc
