#pragma once

#include "adaprune/solver.hpp"

namespace adaprune {

/// Feature-space covariance alignment: whitening by (C_s + ridge*I)^{-1/2}
/// followed by recoloring with (C_t + ridge*I)^{1/2}, both symmetric square
/// roots from eigendecompositions.
struct CoralTransform {
    Eigen::MatrixXd whitening;
    Eigen::MatrixXd recoloring;
    double ridge = 0.0;
};

/// Kernel mean matching: minimizes the weighted-MMD quadratic core
/// (1/N_s^2) b'Kb - (2/(N_s N_t)) c'b over {0 <= b <= box_cap,
/// |sum(b)/N_s - 1| <= sum_tolerance} by projected gradient descent.
/// Defaults per kmm_default_* below. Throws std::invalid_argument when the
/// parameters make the feasible set empty (box_cap < 1 - sum_tolerance).
WeightVector kmm_weights(const EmbeddingSet& source, const EmbeddingSet& target,
                         const KernelModel& model, double box_cap,
                         double sum_tolerance);

double kmm_default_box_cap();
/// (sqrt(N_s) - 1) / sqrt(N_s).
double kmm_default_sum_tolerance(Eigen::Index n_source);

/// Landmark-style selection: solves the fractional relaxation at
/// N_ss = round(threshold * N_s) (clamped to [1, N_s]) and keeps indices with
/// fractional value >= cut. The resulting popcount is not constrained; an
/// empty result falls back to the single largest fractional value.
PruneMask landmark_select(const EmbeddingSet& source, const EmbeddingSet& target,
                          const KernelModel& model, double threshold,
                          double cut = 0.5);

/// Returns the transform and the transformed source set (labels preserved).
/// Requires ridge > 0 and at least two rows on each side.
std::pair<CoralTransform, EmbeddingSet> coral_transform(
    const EmbeddingSet& source, const EmbeddingSet& target, double ridge);

}  // namespace adaprune
