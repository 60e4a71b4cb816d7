#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace plrs::verify {

/// Deliberate faults the suite must be able to detect.
enum class Mutation {
    none,
    zeta_half,           // log-sum coefficient 1/2 instead of 1/4
    zeta_flipped_signs,  // m < k and m > k sums exchanged
    nu_perturbed,        // one off-diagonal entry of nu(x) shifted by 1e-3
};

const char* to_string(Mutation m) noexcept;

struct Options {
    int n_max = 5;
    std::uint64_t seed = 20240601;
    bool strict = false;  // halves every tolerance
    Mutation mutation = Mutation::none;
};

struct PropertyResult {
    std::string module;
    std::string name;
    int criterion = 0;  // acceptance criterion covered, 0 if none
    double worst = 0.0;
    double tolerance = 0.0;
    std::size_t samples = 0;
    bool passed = false;
};

struct Report {
    std::vector<PropertyResult> results;

    bool all_passed() const noexcept;
};

/// Every property of every module. Throws `Error(invalid_argument)` unless 2 <= n_max <= 8.
Report run_suite(const Options& options);

/// Only the properties backing acceptance criterion `id` (1..8).
Report run_criterion(int id, const Options& options);

/// Criterion 9: re-runs the Lax and constraint criteria under each mutation. An entry passes
/// when the mutated run fails.
Report run_mutation_checks(const Options& options);

} // namespace plrs::verify
