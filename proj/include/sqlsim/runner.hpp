#pragma once

#include "sqlsim/config.hpp"

namespace sqlsim {

/// Thread cap from SQLSIM_THREADS (0 or unset = all hardware threads).
unsigned threads_from_env();

/// Executes one resolved run: writes the manifest and the mode's outputs under
/// config.out_dir. Identical configs produce byte-identical files at any
/// thread count. Throws ConfigError / NumericalError / IoError.
void run(const RunConfig& config);

}  // namespace sqlsim
