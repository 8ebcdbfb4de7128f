#ifndef MRCA_CLI_HPP
#define MRCA_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace mrca::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitStudyFailed = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of `mrca-lab`. `args[0]` is the program name.
/// Returns 0 on success, 1 if any study fails, 2 on usage, config or domain errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mrca::cli

#endif  // MRCA_CLI_HPP
