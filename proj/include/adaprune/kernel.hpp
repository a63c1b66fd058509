#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace adaprune {

using RowMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// N_s x N_s matrix of pairwise source kernel values. Built by gram_source;
/// symmetric by construction (upper triangle mirrored), diagonal equal to the
/// number of bandwidths, positive semidefinite up to ~1e-8.
using GramMatrix = RowMatrixXd;

/// RBF mixture kernel: kappa(a, b) = sum_{g in bandwidths} exp(-g * |a-b|^2).
/// Bandwidths are kept sorted in strictly increasing order.
struct KernelModel {
    std::vector<double> bandwidths;

    /// Validates and canonicalizes (sorts ascending). Throws
    /// std::invalid_argument on empty, non-positive, non-finite or duplicate
    /// bandwidths.
    explicit KernelModel(std::vector<double> gammas);

    /// The default mixture {0.001, 0.01, 0.1, 1, 10}.
    static KernelModel standard();

    /// Kernel value at zero distance, i.e. the number of bandwidths.
    double self_value() const { return static_cast<double>(bandwidths.size()); }
};

/// A set of N feature vectors of dimension d, with optional integer labels.
/// All entries must be finite; N >= 1, d >= 1.
class EmbeddingSet {
public:
    explicit EmbeddingSet(RowMatrixXd data);
    EmbeddingSet(RowMatrixXd data, std::vector<int> labels);

    Eigen::Index rows() const { return data_.rows(); }
    Eigen::Index cols() const { return data_.cols(); }
    const RowMatrixXd& data() const { return data_; }

    bool has_labels() const { return labels_.has_value(); }
    const std::vector<int>& labels() const;

private:
    RowMatrixXd data_;
    std::optional<std::vector<int>> labels_;
};

/// Rows of `set` where keep[i] != 0, in input order, labels carried along.
EmbeddingSet select_rows(const EmbeddingSet& set,
                         const std::vector<std::uint8_t>& keep);

/// Kernel value for one pair of vectors. Throws on dimension mismatch.
double rbf_mixture(Eigen::Ref<const Eigen::RowVectorXd> a,
                   Eigen::Ref<const Eigen::RowVectorXd> b,
                   const KernelModel& model);

/// K_ij = kappa(source_i, source_j). Parallel over the upper triangle, then
/// mirrored, so the result is exactly symmetric and independent of the
/// thread count.
GramMatrix gram_source(const EmbeddingSet& source, const KernelModel& model);

/// c_i = sum_j kappa(source_i, target_j). Throws on dimension mismatch.
Eigen::VectorXd cross_affinity(const EmbeddingSet& source,
                               const EmbeddingSet& target,
                               const KernelModel& model);

/// (1/N_t^2) sum_ij kappa(target_i, target_j).
double target_self_term(const EmbeddingSet& target, const KernelModel& model);

// Scalar reference implementations, kept for testing and benchmarking the
// parallel kernels against.
namespace serial {

GramMatrix gram_source(const EmbeddingSet& source, const KernelModel& model);
Eigen::VectorXd cross_affinity(const EmbeddingSet& source,
                               const EmbeddingSet& target,
                               const KernelModel& model);
double target_self_term(const EmbeddingSet& target, const KernelModel& model);

}  // namespace serial

}  // namespace adaprune
