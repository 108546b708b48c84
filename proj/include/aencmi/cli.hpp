#ifndef AENCMI_CLI_HPP
#define AENCMI_CLI_HPP

#include <string>
#include <vector>

namespace aencmi::cli {

/// Entry point behind the aencmi binary. `args` excludes the program name.
/// Returns 0 on success, 2 on argument errors, 1 on data or solver errors.
/// Every run writes run_manifest.json (config, dataset hash, tool version)
/// into the output directory.
int run(std::vector<std::string> args);

}  // namespace aencmi::cli

#endif  // AENCMI_CLI_HPP
