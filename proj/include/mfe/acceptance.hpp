#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace mfe {

struct AcceptanceConfig {
    double newton_tol = 1e-10;
    double eig_tol = 1e-8;
    std::uint64_t seed = 42;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    std::map<std::string, double> values;
};

struct Criterion {
    int id = 0;
    std::string name;
    std::function<CriterionResult(const AcceptanceConfig&)> run;
};

/// The sixteen acceptance criteria in order.
const std::vector<Criterion>& acceptance_criteria();

/// Runs one criterion; exceptions become failures with the message as detail.
CriterionResult run_criterion(const Criterion& c, const AcceptanceConfig& cfg);

}  // namespace mfe
