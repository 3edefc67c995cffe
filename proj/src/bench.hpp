#ifndef HTNLEARN_BENCH_HPP
#define HTNLEARN_BENCH_HPP

#include "htn.hpp"

#include <string>
#include <vector>

namespace bench {

// built-in STRIPS + typing domains
const std::string &blocks_domain_text();
const std::string &logistics_domain_text();

// Random stacking problem over n blocks: independent initial and goal
// arrangements (goal fixes every block's support), always solvable.
std::string gen_blocks_text(int n_blocks, std::uint64_t seed);

// Random delivery problem; location 0 of every city is its airport. Package
// goals are destinations sampled over all locations.
std::string gen_logistics_text(int cities, int locs_per_city, int packages, int trucks_per_city,
                               int airplanes, std::uint64_t seed);

// Fixed one-package airlift instance: the package sits at the airport of the
// last city, its destination is the airport of city 0, and the airplane
// starts at a third airport. Used to pin down ordering-sensitivity of the
// learner's method count.
std::string airlift_fixture_text();

struct ExperimentConfig {
    std::string domain_name = "blocks"; // "blocks" or "logistics"
    int n_train = 30;
    int n_test = 20;
    int n_trials = 3;
    std::uint64_t seed = 1;
    // generator parameters
    int blocks_min = 3, blocks_max = 5;
    int cities = 3, locs_per_city = 2, packages = 1, trucks_per_city = 1, airplanes = 1;
    search::SearchConfig search;
    htn::HtnConfig htn;
    curricula::GenConfig gen;
    std::string output_dir = "experiment-out";
};

struct MetricsRow {
    int trial = 0;
    int train_count = 0;
    double fraction_solved = 0;
    double avg_plan_length = 0;
    double avg_planning_time_s = 0;
    int method_count = 0;
    double learn_time_landmarks_s = 0;
    double learn_time_plan_s = 0;
    double learn_time_methods_s = 0;
};

struct TrialSummary {
    int trial = 0;
    double total_learn_time_s = 0; // outer wall-clock over all learn phases
    int final_method_count = 0;
    int train_failures = 0;
};

struct ExperimentResult {
    std::vector<MetricsRow> rows;
    std::vector<TrialSummary> trials;
    std::string csv_path;
    std::string library_path;
    std::string summary_path;
};

std::string csv_header();
std::string csv_row(const MetricsRow &r);

ExperimentResult run_experiment(const ExperimentConfig &cfg);

ExperimentConfig config_from_file(const std::string &path);

} // namespace bench

#endif
