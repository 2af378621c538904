#pragma once
// Command-line surface. run() is the whole program; the binary's main()
// just forwards to it, which keeps every subcommand testable in-process.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error.

#include <iostream>
#include <string>
#include <vector>

namespace reverb::cli {

int run(const std::vector<std::string>& args,
        std::ostream& out = std::cout,
        std::ostream& err = std::cerr);

} // namespace reverb::cli
