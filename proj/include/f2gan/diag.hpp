#pragma once

#include <string>

namespace f2gan {

/// Verbosity from F2GAN_DIAG_LOG: 0 = errors only, 1 = info (default), 2 = debug.
int diag_level();

/// Writes to stderr when diag_level() >= level.
void diag(int level, const std::string& msg);

}  // namespace f2gan
