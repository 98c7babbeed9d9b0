// Runs every acceptance check at full size and prints one line per check.
// Exit status is nonzero if any check fails.

#include <cstdlib>
#include <iostream>

#include "supersim/checks.hpp"

int main(int argc, char** argv) {
    using namespace supersim::checks;
    CheckOptions opt;
    if (const char* s = std::getenv("SUPERSIM_SEED")) opt.seed = std::strtoull(s, nullptr, 10);
    Context ctx(opt);
    int failed = 0;
    for (const auto& check : registry()) {
        if (argc > 1 && find(argv[1]) != &check) continue;
        const auto result = run(check, ctx);
        std::cout << format_line(check, result) << std::endl;
        failed += !result.passed;
    }
    std::cout << (failed ? "acceptance: " + std::to_string(failed) + " check(s) failed" : std::string("acceptance: all checks passed"))
              << std::endl;
    return failed ? EXIT_FAILURE : EXIT_SUCCESS;
}
