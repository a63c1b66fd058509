#pragma once

#include "adaprune/kernel.hpp"

#include <cstdint>
#include <vector>

namespace adaprune {

/// Binary selection vector over source rows.
struct PruneMask {
    std::vector<std::uint8_t> bits;

    std::size_t popcount() const;
    std::size_t size() const { return bits.size(); }

    static PruneMask ones(std::size_t n);
};

/// One subset-selection instance: source Gram matrix K, cross-affinity
/// vector c, target self-term T, and the requested subset size.
struct PruneProblem {
    GramMatrix gram;           // N_s x N_s
    Eigen::VectorXd affinity;  // length N_s
    double target_term = 0.0;  // T > 0
    Eigen::Index n_source = 0;
    Eigen::Index n_target = 0;
    Eigen::Index subset_size = 0;

    void validate() const;  // throws std::invalid_argument on broken invariants
};

/// Nonnegative per-source-example weights with their box cap B and the
/// tolerance eps of the sum constraint |sum(beta)/N_s - 1| <= eps.
struct WeightVector {
    Eigen::VectorXd values;
    double box_cap = 0.0;
    double sum_tolerance = 0.0;
};

/// Biased (V-statistic) squared MMD between two embedding sets:
/// (1/Na^2) sum kaa + (1/Nb^2) sum kbb - (2/(Na*Nb)) sum kab.
double mmd_squared(const EmbeddingSet& a, const EmbeddingSet& b,
                   const KernelModel& model);

/// Squared MMD of the masked source subset against the target, computed from
/// the precomputed problem data:
/// (1/p^2) u'Ku - (2/(p*N_t)) c'u + T with p = popcount(mask).
/// Throws std::invalid_argument on an all-zero or wrong-length mask.
double masked_mmd_squared(const PruneProblem& problem, const PruneMask& mask);

/// The solver objective (1/p) u'Ku - (2/N_t) c'u with p = popcount(mask).
/// Relates to masked_mmd_squared by: masked = objective / p + T.
double iqp_objective(const PruneProblem& problem, const PruneMask& mask);

/// Self-normalized weighted squared MMD: with s = sum(beta),
/// (1/s^2) b'Kb - (2/(s*N_t)) c'b + T. Throws on all-zero weights.
double weighted_mmd_squared(const PruneProblem& problem,
                            const Eigen::VectorXd& weights);

/// Reported MMD value: sqrt(max(mmd_sq, 0)).
double mmd_from_squared(double mmd_sq);

namespace serial {
/// Triple-loop scalar reference for mmd_squared.
double mmd_squared(const EmbeddingSet& a, const EmbeddingSet& b,
                   const KernelModel& model);
}  // namespace serial

}  // namespace adaprune
