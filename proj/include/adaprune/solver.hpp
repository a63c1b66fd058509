#pragma once

#include "adaprune/mmd.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace adaprune {

enum class SolveStatus { optimal, feasible, budget_exhausted };

std::string to_string(SolveStatus status);

struct SolveResult {
    PruneMask mask;
    double objective = 0.0;    // value of the subset-selection objective
    double mmd = 0.0;          // sqrt(max(objective / N_ss + T, 0))
    double lower_bound = 0.0;  // valid bound on the optimal objective
    std::uint64_t node_count = 0;
    SolveStatus status = SolveStatus::feasible;
};

/// Minimizer of the objective over the capped simplex {0<=u<=1, sum u = N_ss}.
struct FractionalSolution {
    Eigen::VectorXd values;
    double objective = 0.0;
    bool converged = true;
};

struct InstanceTooLargeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Assembles K, c and T for the given subset size.
/// Throws std::invalid_argument if subset_size is outside [1, N_s].
PruneProblem build_problem(const EmbeddingSet& source,
                           const EmbeddingSet& target,
                           const KernelModel& model, Eigen::Index subset_size);

/// Exhaustive enumeration of all masks with popcount N_ss. Ties are broken
/// toward the lexicographically smallest bit vector (index 0 compared first).
/// Throws InstanceTooLargeError when C(N_s, N_ss) > 10^7.
SolveResult solve_brute_force(const PruneProblem& problem);

/// Projected gradient descent on the convex relaxation over the capped
/// simplex. Fixed step 1/L with L = 2*lambda_max(K)/N_ss from 50 power
/// iterations; stops when the projected-gradient norm drops below 1e-9 or
/// after 10000 iterations (converged == false in that case).
FractionalSolution solve_relaxation(const PruneProblem& problem);

/// Rounds the relaxation: the N_ss largest fractional values are set to one
/// (ties toward the lowest index). lower_bound = relaxation objective - 1e-7.
SolveResult solve_relax_round(const PruneProblem& problem);

/// Best-improvement 1-swap local search from `init` (popcount must equal
/// N_ss). Terminates when no swap improves the objective by more than 1e-12.
SolveResult solve_greedy_swap(const PruneProblem& problem,
                              const PruneMask& init);

/// Optional search trace for tests: one (global lower bound, incumbent
/// objective) snapshot per processed node.
struct BranchBoundTrace {
    std::vector<std::pair<double, double>> bound_vs_incumbent;
};

/// Best-first branch and bound fixing one variable per branch. Node bounds
/// come from the capped-simplex relaxation restricted to the free variables;
/// the incumbent starts from solve_greedy_swap(relax_round mask). Returns
/// status optimal when the tree is exhausted within node_budget, otherwise
/// the incumbent with the valid global lower bound and budget_exhausted.
SolveResult solve_branch_bound(const PruneProblem& problem,
                               std::uint64_t node_budget = 1000000,
                               BranchBoundTrace* trace = nullptr);

/// Writes the instance in LP text format with a quadratic objective, one
/// cardinality equality constraint and binary variable declarations.
/// Coefficients carry 17 significant digits; output is byte-deterministic.
void export_qp_text(const PruneProblem& problem, std::ostream& out);

/// Exact Euclidean projection onto {0 <= u <= 1, sum u = total} by bisection
/// on the shift multiplier; |sum - total| <= 1e-12 on return. Exposed for
/// reuse and tests.
Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& y, double total);

/// Exact Euclidean projection onto {0 <= u <= cap, lo <= sum u <= hi}.
Eigen::VectorXd project_box_sum_band(const Eigen::VectorXd& y, double cap,
                                     double lo, double hi);

}  // namespace adaprune
