// Runs every acceptance criterion at full budget and prints one line per
// criterion. Exits non-zero when any criterion fails.
#include "vines/scenarios/acceptance.hpp"

#include <cstdlib>
#include <cstring>
#include <fmt/format.h>

int main(int argc, char** argv) {
    vines::scenarios::AcceptanceOptions opts;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--quick") == 0) {
            opts.quick = true;
        } else {
            opts.checks.push_back(std::atoi(argv[i]));
        }
    }
    if (const char* t = std::getenv("VINES_THREADS"); t != nullptr && std::atoi(t) > 0) {
        opts.threads = static_cast<unsigned>(std::atoi(t));
    }

    int failed = 0;
    const auto results = vines::scenarios::run_acceptance(opts, [&failed](const auto& r) {
        failed += r.passed ? 0 : 1;
        fmt::print("[{}] {:2d} {:<28} {:8.2f}s  {}\n", r.passed ? "PASS" : "FAIL", r.id, r.name, r.seconds, r.detail);
        std::fflush(stdout);
    });
    fmt::print("{} of {} criteria passed\n", results.size() - static_cast<std::size_t>(failed), results.size());
    return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
