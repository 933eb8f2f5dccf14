// Acceptance gate: one line per criterion, nonzero exit if any fails.
// With arguments, runs only the named checks (development convenience).

#include <cstdio>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include "wfl/checks.hpp"

int main(int argc, char** argv) {
    using Entry = std::pair<const char*, wfl::CheckResult (*)()>;
    const std::vector<Entry> registry = {
        {"covariance_identity", wfl::check_covariance_identity},
        {"driftless_martingale", wfl::check_driftless_martingale},
        {"exit_time_bound", wfl::check_exit_time_bound},
        {"derivative_flow", wfl::check_derivative_flow},
        {"inversion_residual", wfl::check_inversion_residual},
        {"girsanov_reweighting", wfl::check_girsanov_reweighting},
        {"regularization_exponents", wfl::check_regularization_exponents},
        {"picard_contraction", wfl::check_picard_contraction},
        {"peano_selection", wfl::check_peano_selection},
        {"unitarity_and_pinsker", wfl::check_unitarity_and_pinsker},
    };

    std::vector<Entry> selected;
    if (argc <= 1) {
        selected = registry;
    } else {
        for (int a = 1; a < argc; ++a) {
            bool found = false;
            for (const auto& entry : registry) {
                if (std::strcmp(entry.first, argv[a]) == 0) {
                    selected.push_back(entry);
                    found = true;
                }
            }
            if (!found) {
                std::fprintf(stderr, "unknown check '%s'\n", argv[a]);
                return 2;
            }
        }
    }

    std::size_t passed = 0;
    for (std::size_t i = 0; i < selected.size(); ++i) {
        wfl::CheckResult r;
        try {
            r = selected[i].second();
        } catch (const std::exception& e) {
            r = {selected[i].first, false, std::string("exception: ") + e.what()};
        }
        if (r.pass) ++passed;
        std::printf("[%2zu/%zu] %-26s %s  %s\n", i + 1, selected.size(), r.name.c_str(),
                    r.pass ? "PASS" : "FAIL", r.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("acceptance: %zu/%zu criteria passed\n", passed, selected.size());
    return passed == selected.size() ? 0 : 1;
}
