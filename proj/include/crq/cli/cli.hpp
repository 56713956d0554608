#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crq::cli {

enum ExitCode : int { kOk = 0, kCertificateFailed = 1, kUsage = 2 };

/// Run one subcommand. args excludes the program name. Reports go to `out`
/// (or the --output file), summaries and usage errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crq::cli
