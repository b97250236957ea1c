#include "mfe/acceptance.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria"};
    std::vector<int> only;
    mfe::AcceptanceConfig cfg;
    app.add_option("ids", only, "Criterion ids to run (default: all)");
    app.add_option("--newton-tol", cfg.newton_tol, "Newton tolerance")->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "Seed for randomized starts");
    CLI11_PARSE(app, argc, argv);

    int failed = 0;
    for (const auto& c : mfe::acceptance_criteria()) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        const mfe::CriterionResult r = mfe::run_criterion(c, cfg);
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %2d %s: %s (%.1f s)\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str(),
                    sec);
        std::fflush(stdout);
        if (!r.passed) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
