#pragma once

#include <string>
#include <vector>

namespace radauhp {

/// Command-line front end: `solve` runs one configuration, `sweep` runs a
/// tolerance/safety-factor matrix.  Arguments exclude the program name.
/// Returns 0 on success, 2 when a run did not converge, 1 on usage or
/// runtime errors.
int cli_run(std::vector<std::string> args);

}  // namespace radauhp
