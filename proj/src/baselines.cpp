#include "adaprune/baselines.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace adaprune {

namespace {

constexpr int kMaxPgdIterations = 10000;
constexpr double kPgdStopNorm = 1e-9;

double lambda_max_power(const Eigen::MatrixXd& m) {
    Eigen::VectorXd v =
        Eigen::VectorXd::Constant(m.rows(), 1.0 / std::sqrt(double(m.rows())));
    for (int it = 0; it < 50; ++it) {
        Eigen::VectorXd w = m * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
    }
    return v.dot(m * v);
}

Eigen::MatrixXd covariance(const RowMatrixXd& data) {
    const Eigen::RowVectorXd mean = data.colwise().mean();
    const RowMatrixXd centered = data.rowwise() - mean;
    return centered.transpose() * centered / double(data.rows() - 1);
}

// Symmetric matrix power through the eigendecomposition.
Eigen::MatrixXd symmetric_power(const Eigen::MatrixXd& m, double exponent) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    if (eig.info() != Eigen::Success) {
        throw std::invalid_argument("covariance eigendecomposition failed");
    }
    const Eigen::VectorXd powered =
        eig.eigenvalues().array().pow(exponent).matrix();
    return eig.eigenvectors() * powered.asDiagonal() *
           eig.eigenvectors().transpose();
}

}  // namespace

double kmm_default_box_cap() { return 1000.0; }

double kmm_default_sum_tolerance(Eigen::Index n_source) {
    const double root = std::sqrt(double(n_source));
    return (root - 1.0) / root;
}

WeightVector kmm_weights(const EmbeddingSet& source, const EmbeddingSet& target,
                         const KernelModel& model, double box_cap,
                         double sum_tolerance) {
    if (!(sum_tolerance >= 0.0)) {
        throw std::invalid_argument("sum tolerance must be nonnegative");
    }
    if (!(box_cap > 0.0) || box_cap < 1.0 - sum_tolerance) {
        throw std::invalid_argument(
            "infeasible KMM parameters: box cap below the sum band");
    }
    const Eigen::Index n = source.rows();
    const double ns = double(n);
    const double nt = double(target.rows());
    const double lo = ns * (1.0 - sum_tolerance);
    const double hi = ns * (1.0 + sum_tolerance);

    const GramMatrix gram = gram_source(source, model);
    const Eigen::VectorXd affinity = cross_affinity(source, target, model);

    // Minimize (1/ns^2) b'Kb - (2/(ns*nt)) c'b over the box-and-band set.
    const double lipschitz =
        std::max(2.0 * std::max(lambda_max_power(gram), 0.0) / (ns * ns), 1e-12);
    const double step = 1.0 / lipschitz;

    Eigen::VectorXd beta =
        project_box_sum_band(Eigen::VectorXd::Ones(n), box_cap, lo, hi);
    for (int it = 0; it < kMaxPgdIterations; ++it) {
        const Eigen::VectorXd grad =
            (2.0 / (ns * ns)) * (gram * beta) - (2.0 / (ns * nt)) * affinity;
        Eigen::VectorXd next =
            project_box_sum_band(beta - step * grad, box_cap, lo, hi);
        const double move = (next - beta).norm() * lipschitz;
        beta = std::move(next);
        if (move < kPgdStopNorm) break;
    }
    return WeightVector{std::move(beta), box_cap, sum_tolerance};
}

PruneMask landmark_select(const EmbeddingSet& source, const EmbeddingSet& target,
                          const KernelModel& model, double threshold,
                          double cut) {
    if (!(threshold > 0.0) || !(threshold < 1.0)) {
        throw std::invalid_argument("landmark threshold must lie in (0, 1)");
    }
    const Eigen::Index n = source.rows();
    const auto subset_size = std::clamp<Eigen::Index>(
        static_cast<Eigen::Index>(std::llround(threshold * double(n))), 1, n);
    const PruneProblem problem = build_problem(source, target, model, subset_size);
    const FractionalSolution relaxed = solve_relaxation(problem);

    PruneMask mask{std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0)};
    bool any = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (relaxed.values(i) >= cut) {
            mask.bits[static_cast<std::size_t>(i)] = 1;
            any = true;
        }
    }
    if (!any) {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < n; ++i) {
            if (relaxed.values(i) > relaxed.values(best)) best = i;
        }
        mask.bits[static_cast<std::size_t>(best)] = 1;
    }
    return mask;
}

std::pair<CoralTransform, EmbeddingSet> coral_transform(
    const EmbeddingSet& source, const EmbeddingSet& target, double ridge) {
    if (!(ridge > 0.0)) {
        throw std::invalid_argument("ridge must be positive");
    }
    if (source.rows() < 2 || target.rows() < 2) {
        throw std::invalid_argument("coral needs at least two rows per side");
    }
    if (source.cols() != target.cols()) {
        throw std::invalid_argument("source and target dimensions differ");
    }
    Eigen::MatrixXd cov_s = covariance(source.data());
    Eigen::MatrixXd cov_t = covariance(target.data());
    cov_s.diagonal().array() += ridge;
    cov_t.diagonal().array() += ridge;

    CoralTransform transform;
    transform.whitening = symmetric_power(cov_s, -0.5);
    transform.recoloring = symmetric_power(cov_t, 0.5);
    transform.ridge = ridge;

    RowMatrixXd mapped =
        source.data() * (transform.whitening * transform.recoloring);
    EmbeddingSet out = source.has_labels()
                           ? EmbeddingSet(std::move(mapped), source.labels())
                           : EmbeddingSet(std::move(mapped));
    return {std::move(transform), std::move(out)};
}

}  // namespace adaprune
