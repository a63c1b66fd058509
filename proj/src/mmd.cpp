#include "adaprune/mmd.hpp"

#include <cmath>
#include <stdexcept>

namespace adaprune {

namespace {

// Sum over all ordered pairs (i, j) of kappa(a_i, b_j), parallel over rows of
// `a` with a serial per-row inner loop and a serial final reduction.
double pair_sum(const EmbeddingSet& a, const EmbeddingSet& b,
                const KernelModel& model) {
    const Eigen::Index na = a.rows();
    const Eigen::Index nb = b.rows();
    const Eigen::Index d = a.cols();
    const double* abase = a.data().data();
    const double* bbase = b.data().data();
    Eigen::VectorXd row_sums(na);

#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < na; ++i) {
        const double* row_i = abase + i * d;
        double acc = 0.0;
        for (Eigen::Index j = 0; j < nb; ++j) {
            const double* row_j = bbase + j * d;
            double dist_sq = 0.0;
            for (Eigen::Index k = 0; k < d; ++k) {
                const double diff = row_i[k] - row_j[k];
                dist_sq += diff * diff;
            }
            double value = 0.0;
            for (const double gamma : model.bandwidths) {
                value += std::exp(-gamma * dist_sq);
            }
            acc += value;
        }
        row_sums(i) = acc;
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < na; ++i) total += row_sums(i);
    return total;
}

}  // namespace

std::size_t PruneMask::popcount() const {
    std::size_t count = 0;
    for (const auto bit : bits) count += bit ? 1 : 0;
    return count;
}

PruneMask PruneMask::ones(std::size_t n) {
    return PruneMask{std::vector<std::uint8_t>(n, 1)};
}

void PruneProblem::validate() const {
    if (n_source < 1 || n_target < 1) {
        throw std::invalid_argument("problem needs non-empty source and target");
    }
    if (gram.rows() != n_source || gram.cols() != n_source) {
        throw std::invalid_argument("gram matrix shape does not match n_source");
    }
    if (affinity.size() != n_source) {
        throw std::invalid_argument("affinity length does not match n_source");
    }
    if (subset_size < 1 || subset_size > n_source) {
        throw std::invalid_argument("subset size must lie in [1, n_source]");
    }
    if (!(target_term > 0.0)) {
        throw std::invalid_argument("target self-term must be positive");
    }
}

double mmd_squared(const EmbeddingSet& a, const EmbeddingSet& b,
                   const KernelModel& model) {
    if (a.cols() != b.cols()) {
        throw std::invalid_argument("embedding sets differ in dimension");
    }
    const double na = static_cast<double>(a.rows());
    const double nb = static_cast<double>(b.rows());
    const double saa = pair_sum(a, a, model);
    const double sbb = pair_sum(b, b, model);
    const double sab = pair_sum(a, b, model);
    return saa / (na * na) + sbb / (nb * nb) - 2.0 * sab / (na * nb);
}

namespace {

void check_mask(const PruneProblem& problem, const PruneMask& mask) {
    if (static_cast<Eigen::Index>(mask.size()) != problem.n_source) {
        throw std::invalid_argument("mask length does not match n_source");
    }
    if (mask.popcount() == 0) {
        throw std::invalid_argument("mask must select at least one row");
    }
}

// u'Ku and c'u over the selected indices only.
std::pair<double, double> mask_forms(const PruneProblem& problem,
                                     const PruneMask& mask) {
    std::vector<Eigen::Index> idx;
    idx.reserve(mask.size());
    for (Eigen::Index i = 0; i < problem.n_source; ++i) {
        if (mask.bits[static_cast<std::size_t>(i)]) idx.push_back(i);
    }
    double quad = 0.0;
    double lin = 0.0;
    for (const Eigen::Index i : idx) {
        lin += problem.affinity(i);
        const double* row = problem.gram.data() + i * problem.n_source;
        double acc = 0.0;
        for (const Eigen::Index j : idx) acc += row[j];
        quad += acc;
    }
    return {quad, lin};
}

}  // namespace

double masked_mmd_squared(const PruneProblem& problem, const PruneMask& mask) {
    check_mask(problem, mask);
    const double p = static_cast<double>(mask.popcount());
    const double nt = static_cast<double>(problem.n_target);
    const auto [quad, lin] = mask_forms(problem, mask);
    return quad / (p * p) - 2.0 * lin / (p * nt) + problem.target_term;
}

double iqp_objective(const PruneProblem& problem, const PruneMask& mask) {
    check_mask(problem, mask);
    const double p = static_cast<double>(mask.popcount());
    const double nt = static_cast<double>(problem.n_target);
    const auto [quad, lin] = mask_forms(problem, mask);
    return quad / p - 2.0 * lin / nt;
}

double weighted_mmd_squared(const PruneProblem& problem,
                            const Eigen::VectorXd& weights) {
    if (weights.size() != problem.n_source) {
        throw std::invalid_argument("weight length does not match n_source");
    }
    if ((weights.array() < 0.0).any()) {
        throw std::invalid_argument("weights must be nonnegative");
    }
    const double total = weights.sum();
    if (!(total > 0.0)) {
        throw std::invalid_argument("weights must not all be zero");
    }
    const double nt = static_cast<double>(problem.n_target);
    // Plain left-to-right loops: with 0/1 weights the zero terms contribute
    // exact +0.0, so the result is bit-identical to masked_mmd_squared.
    const Eigen::Index n = problem.n_source;
    double quad = 0.0;
    double lin = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* row = problem.gram.data() + i * n;
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) acc += row[j] * weights(j);
        quad += weights(i) * acc;
        lin += problem.affinity(i) * weights(i);
    }
    return quad / (total * total) - 2.0 * lin / (total * nt) +
           problem.target_term;
}

double mmd_from_squared(double mmd_sq) {
    return std::sqrt(std::max(mmd_sq, 0.0));
}

namespace serial {

double mmd_squared(const EmbeddingSet& a, const EmbeddingSet& b,
                   const KernelModel& model) {
    if (a.cols() != b.cols()) {
        throw std::invalid_argument("embedding sets differ in dimension");
    }
    const double na = static_cast<double>(a.rows());
    const double nb = static_cast<double>(b.rows());
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.rows(); ++j) {
            saa += rbf_mixture(a.data().row(i), a.data().row(j), model);
        }
    }
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            sbb += rbf_mixture(b.data().row(i), b.data().row(j), model);
        }
    }
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            sab += rbf_mixture(a.data().row(i), b.data().row(j), model);
        }
    }
    return saa / (na * na) + sbb / (nb * nb) - 2.0 * sab / (na * nb);
}

}  // namespace serial

}  // namespace adaprune
