#include "adaprune/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>

namespace adaprune {

namespace {

constexpr double kPruneTol = 1e-9;
constexpr double kSwapTol = 1e-12;
constexpr double kRelaxBoundSlack = 1e-7;
constexpr int kPowerIterations = 50;
constexpr int kMaxPgdIterations = 10000;
constexpr int kNodePgdIterations = 2500;
constexpr double kPgdStopNorm = 1e-9;
constexpr double kProjectionTol = 1e-12;
constexpr double kJitter = 1e-10;

std::string fmt17(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

double lambda_max_estimate(const Eigen::MatrixXd& m) {
    const Eigen::Index n = m.rows();
    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
    for (int it = 0; it < kPowerIterations; ++it) {
        Eigen::VectorXd w = m * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
    }
    return v.dot(m * v);
}

// lambda_min(K) estimated from power iteration on lambda_max*I - K.
double lambda_min_estimate(const Eigen::MatrixXd& m, double lambda_max) {
    const double shift = std::max(lambda_max, 0.0) + 1.0;
    Eigen::MatrixXd shifted = -m;
    shifted.diagonal().array() += shift;
    return shift - lambda_max_estimate(shifted);
}

double bisect_shift(const Eigen::VectorXd& y, double cap, double target,
                    double lo, double hi) {
    const auto clipped_sum = [&](double tau) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            acc += std::clamp(y(i) - tau, 0.0, cap);
        }
        return acc;
    };
    double tau = 0.0;
    for (int it = 0; it < 500; ++it) {
        tau = 0.5 * (lo + hi);
        const double s = clipped_sum(tau);
        if (std::abs(s - target) <= kProjectionTol) break;
        if (s > target) {
            lo = tau;
        } else {
            hi = tau;
        }
    }
    return tau;
}

bool mask_lex_less(const std::vector<std::uint8_t>& a,
                   const std::vector<std::uint8_t>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Reduced relaxation over the free indices of a node. Minimizes
//   f(v) = (v'Av + 2 q'v + const_quad) / N_ss - (2/N_t)(c'v + const_lin)
// over {0 <= v <= 1, sum v = total} by projected gradient descent, and
// carries a Frank-Wolfe style bound f(v) + min_w grad'(w - v) - slack that
// stays valid for any iterate of the convex objective.
struct ReducedOutcome {
    Eigen::VectorXd values;
    double objective = 0.0;
    double bound = -std::numeric_limits<double>::infinity();
    bool converged = false;
};

class ReducedRelaxation {
public:
    ReducedRelaxation(Eigen::MatrixXd quad, Eigen::VectorXd shift,
                      double const_quad, Eigen::VectorXd lin, double const_lin,
                      double n_ss, double n_t, double total, double slack)
        : quad_(std::move(quad)),
          shift_(std::move(shift)),
          const_quad_(const_quad),
          lin_(std::move(lin)),
          const_lin_(const_lin),
          n_ss_(n_ss),
          n_t_(n_t),
          total_(total),
          slack_(slack) {}

    double objective_at(const Eigen::VectorXd& v) const {
        const double q = v.dot(quad_ * v) + 2.0 * shift_.dot(v) + const_quad_;
        const double l = lin_.dot(v) + const_lin_;
        return q / n_ss_ - 2.0 * l / n_t_;
    }

    Eigen::VectorXd gradient_at(const Eigen::VectorXd& v) const {
        return (2.0 / n_ss_) * (quad_ * v + shift_) - (2.0 / n_t_) * lin_;
    }

    // Linear minorant minimum over the capped simplex: the `total` smallest
    // gradient entries set to one.
    double frank_wolfe_bound(const Eigen::VectorXd& v,
                             const Eigen::VectorXd& grad) const {
        std::vector<double> g(grad.data(), grad.data() + grad.size());
        const auto k = static_cast<std::ptrdiff_t>(total_);
        std::nth_element(g.begin(), g.begin() + (k - 1), g.end());
        double linmin = std::accumulate(g.begin(), g.begin() + k, 0.0);
        return objective_at(v) + (linmin - grad.dot(v)) - slack_;
    }

    // max_iterations < 0 selects the contract defaults (1e-9 gradient stop,
    // 10000 iterations). Node relaxations pass a tighter budget and also stop
    // once the Frank-Wolfe gap certifies near-optimality; the returned bound
    // is valid either way.
    ReducedOutcome solve(const Eigen::VectorXd* warm, double lipschitz,
                         double prune_level, int max_iterations = -1) const {
        const Eigen::Index n = quad_.rows();
        const bool gap_stop = max_iterations >= 0;
        const int iteration_cap =
            max_iterations >= 0 ? max_iterations : kMaxPgdIterations;
        ReducedOutcome out;
        Eigen::VectorXd v = warm != nullptr
                                ? project_capped_simplex(*warm, total_)
                                : Eigen::VectorXd::Constant(n, total_ / double(n));
        const double step = 1.0 / std::max(lipschitz, 1e-12);
        double bound = -std::numeric_limits<double>::infinity();
        for (int it = 0; it < iteration_cap; ++it) {
            const Eigen::VectorXd grad = gradient_at(v);
            Eigen::VectorXd next = project_capped_simplex(v - step * grad, total_);
            const double move = (next - v).norm() * std::max(lipschitz, 1e-12);
            v = std::move(next);
            if (move < kPgdStopNorm) {
                out.converged = true;
                break;
            }
            if ((it + 1) % 25 == 0) {
                const double obj = objective_at(v);
                bound = std::max(bound, frank_wolfe_bound(v, gradient_at(v)));
                if (bound >= prune_level) break;
                if (gap_stop && obj - bound <= 1e-9 * (1.0 + std::abs(obj))) {
                    out.converged = true;
                    break;
                }
            }
        }
        out.values = v;
        out.objective = objective_at(v);
        out.bound = std::max(bound, frank_wolfe_bound(v, gradient_at(v)));
        return out;
    }

private:
    Eigen::MatrixXd quad_;
    Eigen::VectorXd shift_;
    double const_quad_;
    Eigen::VectorXd lin_;
    double const_lin_;
    double n_ss_;
    double n_t_;
    double total_;
    double slack_;
};

// Shared per-problem quantities for the relaxation paths.
struct RelaxContext {
    Eigen::MatrixXd gram;  // jittered when the spectrum estimate dips below 0
    double lambda_max = 0.0;
    double psd_slack = 0.0;   // convexity allowance per unit of free dimension
    double jitter_slack = 0.0;

    explicit RelaxContext(const PruneProblem& problem) {
        gram = problem.gram;
        lambda_max = lambda_max_estimate(gram);
        const double lambda_min = lambda_min_estimate(gram, lambda_max);
        if (lambda_min < 0.0) {
            gram.diagonal().array() += kJitter;
            jitter_slack = kJitter;
        }
        psd_slack = 2.0 * std::max(0.0, -lambda_min) + 1e-12;
    }

    double node_slack(Eigen::Index free_count, double n_ss) const {
        return psd_slack * double(free_count) / n_ss + jitter_slack + 1e-11;
    }
};

PruneMask round_to_cardinality(const Eigen::VectorXd& values,
                               Eigen::Index subset_size) {
    const Eigen::Index n = values.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) {
                         return values(a) > values(b);
                     });
    PruneMask mask{std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0)};
    for (Eigen::Index i = 0; i < subset_size; ++i) {
        mask.bits[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
    }
    return mask;
}

SolveResult make_result(const PruneProblem& problem, PruneMask mask,
                        double lower_bound, std::uint64_t node_count,
                        SolveStatus status) {
    SolveResult result;
    result.objective = iqp_objective(problem, mask);
    result.mask = std::move(mask);
    result.mmd = mmd_from_squared(result.objective / double(problem.subset_size) +
                                  problem.target_term);
    result.lower_bound = std::min(lower_bound, result.objective);
    result.node_count = node_count;
    result.status = status;
    return result;
}

double binomial_guarded(Eigen::Index n, Eigen::Index k, double cap) {
    double count = 1.0;
    const Eigen::Index kk = std::min(k, n - k);
    for (Eigen::Index i = 1; i <= kk; ++i) {
        count *= double(n - kk + i);
        count /= double(i);
        if (count > cap * 8) return count;  // early out, already hopeless
    }
    return count;
}

}  // namespace

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::feasible: return "feasible";
        case SolveStatus::budget_exhausted: return "budget-exhausted";
    }
    return "unknown";
}

Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& y, double total) {
    const Eigen::Index n = y.size();
    if (total <= 0.0) return Eigen::VectorXd::Zero(n);
    if (total >= double(n)) return Eigen::VectorXd::Ones(n);
    const double tau =
        bisect_shift(y, 1.0, total, y.minCoeff() - 1.0, y.maxCoeff());
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = std::clamp(y(i) - tau, 0.0, 1.0);
    return out;
}

Eigen::VectorXd project_box_sum_band(const Eigen::VectorXd& y, double cap,
                                     double lo, double hi) {
    const Eigen::Index n = y.size();
    if (lo >= double(n) * cap - kProjectionTol) {
        return Eigen::VectorXd::Constant(n, cap);
    }
    Eigen::VectorXd out = y.cwiseMax(0.0).cwiseMin(cap);
    const double sum = out.sum();
    double target = 0.0;
    if (sum > hi) {
        target = hi;
    } else if (sum < lo) {
        target = lo;
    } else {
        return out;
    }
    const double tau = bisect_shift(y, cap, target, y.minCoeff() - cap,
                                    std::max(y.maxCoeff(), 0.0));
    for (Eigen::Index i = 0; i < n; ++i) out(i) = std::clamp(y(i) - tau, 0.0, cap);
    return out;
}

PruneProblem build_problem(const EmbeddingSet& source, const EmbeddingSet& target,
                           const KernelModel& model, Eigen::Index subset_size) {
    if (subset_size < 1 || subset_size > source.rows()) {
        throw std::invalid_argument("subset size must lie in [1, N_s]");
    }
    PruneProblem problem;
    problem.gram = gram_source(source, model);
    problem.affinity = cross_affinity(source, target, model);
    problem.target_term = target_self_term(target, model);
    problem.n_source = source.rows();
    problem.n_target = target.rows();
    problem.subset_size = subset_size;
    problem.validate();
    return problem;
}

SolveResult solve_brute_force(const PruneProblem& problem) {
    problem.validate();
    const Eigen::Index n = problem.n_source;
    const Eigen::Index k = problem.subset_size;
    if (binomial_guarded(n, k, 1e7) > 1e7) {
        throw InstanceTooLargeError("brute force guard: C(N_s, N_ss) > 1e7");
    }

    // next_permutation from the ascending start walks bit vectors in
    // lexicographic order, so keeping the first strict minimum implements the
    // lowest-bit-vector tie break.
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = n - k; i < n; ++i) bits[static_cast<std::size_t>(i)] = 1;

    std::vector<std::uint8_t> best_bits;
    double best = std::numeric_limits<double>::infinity();
    std::uint64_t visited = 0;
    do {
        ++visited;
        const double value = iqp_objective(problem, PruneMask{bits});
        if (value < best) {
            best = value;
            best_bits = bits;
        }
    } while (std::next_permutation(bits.begin(), bits.end()));

    return make_result(problem, PruneMask{std::move(best_bits)}, best, visited,
                       SolveStatus::optimal);
}

FractionalSolution solve_relaxation(const PruneProblem& problem) {
    problem.validate();
    const Eigen::Index n = problem.n_source;
    FractionalSolution solution;
    if (problem.subset_size == n) {
        solution.values = Eigen::VectorXd::Ones(n);
        solution.objective =
            iqp_objective(problem, PruneMask::ones(static_cast<std::size_t>(n)));
        solution.converged = true;
        return solution;
    }
    const RelaxContext ctx(problem);
    ReducedRelaxation relax(ctx.gram, Eigen::VectorXd::Zero(n), 0.0,
                            problem.affinity, 0.0, double(problem.subset_size),
                            double(problem.n_target), double(problem.subset_size),
                            ctx.node_slack(n, double(problem.subset_size)));
    const double lipschitz =
        2.0 * std::max(ctx.lambda_max, 0.0) / double(problem.subset_size);
    const ReducedOutcome outcome =
        relax.solve(nullptr, lipschitz, std::numeric_limits<double>::infinity());
    solution.values = outcome.values;
    solution.objective = outcome.objective;
    solution.converged = outcome.converged;
    return solution;
}

SolveResult solve_relax_round(const PruneProblem& problem) {
    const FractionalSolution relaxed = solve_relaxation(problem);
    PruneMask mask = round_to_cardinality(relaxed.values, problem.subset_size);
    return make_result(problem, std::move(mask),
                       relaxed.objective - kRelaxBoundSlack, 0,
                       relaxed.converged ? SolveStatus::feasible
                                         : SolveStatus::budget_exhausted);
}

SolveResult solve_greedy_swap(const PruneProblem& problem, const PruneMask& init) {
    problem.validate();
    if (static_cast<Eigen::Index>(init.size()) != problem.n_source) {
        throw std::invalid_argument("init mask length does not match n_source");
    }
    if (static_cast<Eigen::Index>(init.popcount()) != problem.subset_size) {
        throw std::invalid_argument("init mask popcount must equal subset size");
    }

    const Eigen::Index n = problem.n_source;
    const double n_ss = double(problem.subset_size);
    const double n_t = double(problem.n_target);
    std::vector<std::uint8_t> bits = init.bits;

    // selected_sums(i) = sum over selected j of K_ij, kept incrementally.
    Eigen::VectorXd selected_sums = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (bits[static_cast<std::size_t>(j)]) {
            selected_sums += problem.gram.col(j);
        }
    }

    while (true) {
        double best_delta = 0.0;
        Eigen::Index best_out = -1;
        Eigen::Index best_in = -1;
        for (Eigen::Index a = 0; a < n; ++a) {
            if (!bits[static_cast<std::size_t>(a)]) continue;
            const double remove_quad =
                -2.0 * selected_sums(a) + problem.gram(a, a);
            for (Eigen::Index b = 0; b < n; ++b) {
                if (bits[static_cast<std::size_t>(b)]) continue;
                const double add_quad = 2.0 * (selected_sums(b) - problem.gram(a, b)) +
                                        problem.gram(b, b);
                const double delta =
                    (remove_quad + add_quad) / n_ss -
                    (2.0 / n_t) * (problem.affinity(b) - problem.affinity(a));
                if (delta < best_delta) {
                    best_delta = delta;
                    best_out = a;
                    best_in = b;
                }
            }
        }
        if (best_out < 0 || best_delta >= -kSwapTol) break;
        bits[static_cast<std::size_t>(best_out)] = 0;
        bits[static_cast<std::size_t>(best_in)] = 1;
        selected_sums -= problem.gram.col(best_out);
        selected_sums += problem.gram.col(best_in);
    }

    // Cheap always-valid bound: the quadratic form is PSD up to tolerance, so
    // the objective cannot drop below the best achievable linear term.
    std::vector<double> affinities(problem.affinity.data(),
                                   problem.affinity.data() + n);
    std::nth_element(affinities.begin(),
                     affinities.begin() + (problem.subset_size - 1),
                     affinities.end(), std::greater<double>());
    const double top_sum = std::accumulate(
        affinities.begin(), affinities.begin() + problem.subset_size, 0.0);
    const double bound = -2.0 * top_sum / n_t - 1e-6;
    return make_result(problem, PruneMask{std::move(bits)}, bound, 0,
                       SolveStatus::feasible);
}

namespace {

struct BbNode {
    std::vector<std::int8_t> state;  // 0 fixed-zero, 1 fixed-one, 2 free
    Eigen::VectorXd warm;            // relaxation values over free indices
    double bound = 0.0;
    std::uint64_t id = 0;
};

struct HeapEntry {
    double bound;
    std::uint64_t id;
    std::size_t slot;
};

struct HeapCmp {
    bool operator()(const HeapEntry& a, const HeapEntry& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.id > b.id;
    }
};

std::vector<Eigen::Index> free_indices(const std::vector<std::int8_t>& state) {
    std::vector<Eigen::Index> free;
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (state[i] == 2) free.push_back(static_cast<Eigen::Index>(i));
    }
    return free;
}

PruneMask mask_from_state(const std::vector<std::int8_t>& state,
                          const std::vector<Eigen::Index>& free,
                          const std::vector<std::uint8_t>& free_bits) {
    PruneMask mask{std::vector<std::uint8_t>(state.size(), 0)};
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (state[i] == 1) mask.bits[i] = 1;
    }
    for (std::size_t f = 0; f < free.size(); ++f) {
        if (free_bits[f]) mask.bits[static_cast<std::size_t>(free[f])] = 1;
    }
    return mask;
}

}  // namespace

SolveResult solve_branch_bound(const PruneProblem& problem,
                               std::uint64_t node_budget,
                               BranchBoundTrace* trace) {
    problem.validate();
    if (node_budget < 1) {
        throw std::invalid_argument("node budget must be at least 1");
    }
    const Eigen::Index n = problem.n_source;
    const double n_ss = double(problem.subset_size);
    const double n_t = double(problem.n_target);

    if (problem.subset_size == n) {
        PruneMask ones = PruneMask::ones(static_cast<std::size_t>(n));
        SolveResult result = make_result(problem, std::move(ones), 0.0, 1,
                                         SolveStatus::optimal);
        result.lower_bound = result.objective;
        return result;
    }

    const RelaxContext ctx(problem);
    const double lipschitz = 2.0 * std::max(ctx.lambda_max, 0.0) / n_ss;

    // Root relaxation doubles as the relax-round seed for the incumbent.
    ReducedRelaxation root_relax(
        ctx.gram, Eigen::VectorXd::Zero(n), 0.0, problem.affinity, 0.0, n_ss,
        n_t, n_ss, ctx.node_slack(n, n_ss));
    const ReducedOutcome root = root_relax.solve(
        nullptr, lipschitz, std::numeric_limits<double>::infinity(),
        kNodePgdIterations);
    std::uint64_t node_count = 1;

    PruneMask rounded = round_to_cardinality(root.values, problem.subset_size);
    SolveResult incumbent = solve_greedy_swap(problem, rounded);
    double incumbent_obj = incumbent.objective;
    std::vector<std::uint8_t> incumbent_bits = incumbent.mask.bits;

    const auto offer_incumbent = [&](const PruneMask& mask) {
        const double value = iqp_objective(problem, mask);
        if (value < incumbent_obj ||
            (value == incumbent_obj && mask_lex_less(mask.bits, incumbent_bits))) {
            incumbent_obj = value;
            incumbent_bits = mask.bits;
        }
    };

    std::vector<BbNode> nodes;
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapCmp> frontier;
    std::uint64_t next_id = 0;

    const auto record_trace = [&](double global_lb) {
        if (trace != nullptr) {
            trace->bound_vs_incumbent.emplace_back(global_lb, incumbent_obj);
        }
    };

    const auto frontier_min = [&]() {
        return frontier.empty() ? std::numeric_limits<double>::infinity()
                                : frontier.top().bound;
    };

    const bool root_integral =
        ((root.values.array() - 0.5).abs() >= 0.5 - 1e-9).all();
    offer_incumbent(rounded);
    if (root_integral || root.bound >= incumbent_obj - kPruneTol) {
        record_trace(std::min(root.bound, incumbent_obj));
        return make_result(problem, PruneMask{std::move(incumbent_bits)},
                           incumbent_obj, node_count, SolveStatus::optimal);
    }

    {
        BbNode root_node;
        root_node.state.assign(static_cast<std::size_t>(n), 2);
        root_node.warm = root.values;
        root_node.bound = root.bound;
        root_node.id = next_id++;
        frontier.push({root_node.bound, root_node.id, nodes.size()});
        nodes.push_back(std::move(root_node));
    }
    record_trace(std::min(root.bound, incumbent_obj));

    bool budget_hit = false;
    double budget_lb = root.bound;

    while (!frontier.empty()) {
        const HeapEntry top = frontier.top();
        frontier.pop();
        BbNode node = std::move(nodes[top.slot]);
        if (node.bound >= incumbent_obj - kPruneTol) {
            // Best-first order: nothing left can beat the incumbent.
            while (!frontier.empty()) frontier.pop();
            break;
        }
        if (node_count >= node_budget) {
            budget_hit = true;
            budget_lb = node.bound;
            break;
        }

        const std::vector<Eigen::Index> parent_free = free_indices(node.state);
        // Branch on the free variable with the most fractional relaxed value.
        std::size_t branch_pos = 0;
        double best_gap = std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < parent_free.size(); ++f) {
            const double gap = std::abs(node.warm(static_cast<Eigen::Index>(f)) - 0.5);
            if (gap < best_gap) {
                best_gap = gap;
                branch_pos = f;
            }
        }
        const Eigen::Index branch_var = parent_free[branch_pos];

        for (const std::int8_t fixed_value : {std::int8_t{0}, std::int8_t{1}}) {
            if (node_count >= node_budget) {
                budget_hit = true;
                budget_lb = std::min(budget_lb, node.bound);
                break;
            }
            std::vector<std::int8_t> child_state = node.state;
            child_state[static_cast<std::size_t>(branch_var)] = fixed_value;

            Eigen::Index fixed_ones = 0;
            for (const auto s : child_state) fixed_ones += (s == 1) ? 1 : 0;
            const std::vector<Eigen::Index> free = free_indices(child_state);
            const Eigen::Index want = problem.subset_size - fixed_ones;
            if (want < 0 || want > static_cast<Eigen::Index>(free.size())) {
                continue;  // cardinality bookkeeping: infeasible branch
            }
            if (want == 0 || want == static_cast<Eigen::Index>(free.size())) {
                ++node_count;
                const std::vector<std::uint8_t> free_bits(
                    free.size(), want == 0 ? std::uint8_t{0} : std::uint8_t{1});
                offer_incumbent(mask_from_state(child_state, free, free_bits));
                record_trace(std::min(frontier_min(), incumbent_obj));
                continue;
            }

            // Substitute fixed variables into the reduced objective.
            const auto nf = static_cast<Eigen::Index>(free.size());
            Eigen::MatrixXd quad(nf, nf);
            Eigen::VectorXd shift = Eigen::VectorXd::Zero(nf);
            Eigen::VectorXd lin(nf);
            for (Eigen::Index a = 0; a < nf; ++a) {
                const Eigen::Index ia = free[static_cast<std::size_t>(a)];
                lin(a) = problem.affinity(ia);
                for (Eigen::Index b = 0; b < nf; ++b) {
                    quad(a, b) = ctx.gram(ia, free[static_cast<std::size_t>(b)]);
                }
            }
            double const_quad = 0.0;
            double const_lin = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (child_state[static_cast<std::size_t>(i)] != 1) continue;
                const_lin += problem.affinity(i);
                for (Eigen::Index j = 0; j < n; ++j) {
                    if (child_state[static_cast<std::size_t>(j)] == 1) {
                        const_quad += ctx.gram(i, j);
                    }
                }
                for (Eigen::Index a = 0; a < nf; ++a) {
                    shift(a) += ctx.gram(free[static_cast<std::size_t>(a)], i);
                }
            }

            Eigen::VectorXd warm(nf);
            for (Eigen::Index a = 0; a < nf; ++a) {
                std::size_t parent_pos = 0;
                // parent_free and free differ by the single branched index.
                const Eigen::Index ia = free[static_cast<std::size_t>(a)];
                parent_pos = static_cast<std::size_t>(
                    std::lower_bound(parent_free.begin(), parent_free.end(), ia) -
                    parent_free.begin());
                warm(a) = node.warm(static_cast<Eigen::Index>(parent_pos));
            }

            ReducedRelaxation relax(std::move(quad), std::move(shift), const_quad,
                                    std::move(lin), const_lin, n_ss, n_t,
                                    double(want), ctx.node_slack(nf, n_ss));
            const ReducedOutcome outcome = relax.solve(
                &warm, lipschitz, incumbent_obj - kPruneTol, kNodePgdIterations);
            ++node_count;

            // Rounded candidate keeps the incumbent fresh along the dive.
            {
                PruneMask free_mask = round_to_cardinality(outcome.values, want);
                offer_incumbent(
                    mask_from_state(child_state, free, free_mask.bits));
            }

            const bool integral =
                ((outcome.values.array() - 0.5).abs() >= 0.5 - 1e-9).all();
            if (!integral && outcome.bound < incumbent_obj - kPruneTol) {
                BbNode child;
                child.state = std::move(child_state);
                child.warm = outcome.values;
                child.bound = outcome.bound;
                child.id = next_id++;
                frontier.push({child.bound, child.id, nodes.size()});
                nodes.push_back(std::move(child));
            }
            record_trace(std::min(frontier_min(), incumbent_obj));
        }
        if (budget_hit) break;
    }

    if (budget_hit) {
        const double lb = std::min(budget_lb, frontier_min());
        return make_result(problem, PruneMask{std::move(incumbent_bits)},
                           std::min(lb, incumbent_obj), node_count,
                           SolveStatus::budget_exhausted);
    }
    return make_result(problem, PruneMask{std::move(incumbent_bits)},
                       incumbent_obj, node_count, SolveStatus::optimal);
}

void export_qp_text(const PruneProblem& problem, std::ostream& out) {
    problem.validate();
    const Eigen::Index n = problem.n_source;
    const double n_ss = double(problem.subset_size);
    const double n_t = double(problem.n_target);

    out << "Minimize\n obj: [";
    // The bracketed quadratic block is divided by two per LP convention, so
    // coefficients are doubled (squares) and quadrupled (cross terms).
    std::string line = "";
    const auto emit = [&](const std::string& term) {
        if (line.size() + term.size() > 200) {
            out << line << "\n   ";
            line.clear();
        }
        line += term;
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double coef = (i == j) ? 2.0 * problem.gram(i, i) / n_ss
                                         : 4.0 * problem.gram(i, j) / n_ss;
            std::string term = (i == 0 && j == 0) ? " " : " + ";
            term += fmt17(coef) + " x" + std::to_string(i);
            term += (i == j) ? " ^ 2" : " * x" + std::to_string(j);
            emit(term);
        }
    }
    emit(" ] / 2");
    for (Eigen::Index i = 0; i < n; ++i) {
        const double coef = 2.0 * problem.affinity(i) / n_t;
        emit(" - " + fmt17(coef) + " x" + std::to_string(i));
    }
    out << line << "\n";

    out << "Subject To\n cardinality:";
    line.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
        emit((i == 0 ? std::string(" ") : std::string(" + ")) + "x" +
             std::to_string(i));
    }
    emit(" = " + std::to_string(problem.subset_size));
    out << line << "\n";

    out << "Binary\n";
    line.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
        emit(" x" + std::to_string(i));
    }
    out << line << "\n";
    out << "End\n";
}

}  // namespace adaprune
