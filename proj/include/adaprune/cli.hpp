#pragma once

#include "adaprune/eval.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace adaprune {

// Exit codes: 0 success, 1 usage error, 2 data error, 3 solve budget
// exhausted.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitBudget = 3;

enum class Command { prune, kmm, landmarks, coral, eval, sweep, synth, export_qp };

struct RunConfig {
    Command command = Command::prune;
    std::string source_path;
    std::string target_path;
    std::string output_path;
    std::vector<double> bandwidths;  // empty: standard mixture
    double ratio = 0.7;
    std::string solver = "bb";  // bb | greedy | relax | brute
    std::uint64_t seed = 1;
    int k = 1;
    double box_cap = 1000.0;
    double sum_tolerance = -1.0;  // <0: default (sqrt(N_s)-1)/sqrt(N_s)
    double ridge = 1e-6;
    double threshold = 0.5;
    double cut = 0.5;
    std::uint64_t node_budget = 1000000;
    int threads = 0;  // 0 = auto
    std::string method = "adaprune";
    std::vector<double> ratios;          // sweep grid; empty: default grid
    std::vector<std::uint64_t> seeds;    // sweep seeds; empty: seed..seed+9
    int random_ratios = 0;               // >0: draw this many uniform ratios
    std::string spec_path;               // synth: optional JSON spec
};

/// Dispatches one validated configuration. Never throws; errors are mapped
/// to the exit-code table above with a message on stderr.
int run_command(const RunConfig& config);

/// Full CLI entry point (argument parsing + run_command).
int run_main(int argc, const char* const* argv);

}  // namespace adaprune
