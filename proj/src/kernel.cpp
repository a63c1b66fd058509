#include "adaprune/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adaprune {

namespace {

void check_finite(const RowMatrixXd& data) {
    if (!data.allFinite()) {
        throw std::invalid_argument("embedding data contains NaN or Inf");
    }
}

// Squared distance accumulated directly as sum((a-b)^2); the dot-product
// expansion would lose the small-distance digits that the narrow bandwidths
// depend on.
double squared_distance(const double* a, const double* b, Eigen::Index d) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = a[k] - b[k];
        acc += diff * diff;
    }
    return acc;
}

double mixture_value(double dist_sq, const KernelModel& model) {
    double acc = 0.0;
    for (const double gamma : model.bandwidths) {
        acc += std::exp(-gamma * dist_sq);
    }
    return acc;
}

}  // namespace

KernelModel::KernelModel(std::vector<double> gammas) : bandwidths(std::move(gammas)) {
    if (bandwidths.empty()) {
        throw std::invalid_argument("kernel model needs at least one bandwidth");
    }
    std::sort(bandwidths.begin(), bandwidths.end());
    for (std::size_t i = 0; i < bandwidths.size(); ++i) {
        if (!(bandwidths[i] > 0.0) || !std::isfinite(bandwidths[i])) {
            throw std::invalid_argument("bandwidths must be finite and positive");
        }
        if (i > 0 && bandwidths[i] == bandwidths[i - 1]) {
            throw std::invalid_argument("duplicate bandwidth");
        }
    }
}

KernelModel KernelModel::standard() {
    return KernelModel({0.001, 0.01, 0.1, 1.0, 10.0});
}

EmbeddingSet::EmbeddingSet(RowMatrixXd data) : data_(std::move(data)) {
    if (data_.rows() < 1 || data_.cols() < 1) {
        throw std::invalid_argument("embedding set must be at least 1x1");
    }
    check_finite(data_);
}

EmbeddingSet::EmbeddingSet(RowMatrixXd data, std::vector<int> labels)
    : EmbeddingSet(std::move(data)) {
    if (static_cast<Eigen::Index>(labels.size()) != data_.rows()) {
        throw std::invalid_argument("label count does not match row count");
    }
    labels_ = std::move(labels);
}

const std::vector<int>& EmbeddingSet::labels() const {
    if (!labels_) {
        throw std::invalid_argument("embedding set has no labels");
    }
    return *labels_;
}

EmbeddingSet select_rows(const EmbeddingSet& set,
                         const std::vector<std::uint8_t>& keep) {
    if (static_cast<Eigen::Index>(keep.size()) != set.rows()) {
        throw std::invalid_argument("mask length does not match row count");
    }
    Eigen::Index kept = 0;
    for (const auto bit : keep) kept += bit ? 1 : 0;
    if (kept == 0) {
        throw std::invalid_argument("mask selects no rows");
    }
    RowMatrixXd data(kept, set.cols());
    std::vector<int> labels;
    labels.reserve(set.has_labels() ? static_cast<std::size_t>(kept) : 0);
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < set.rows(); ++i) {
        if (!keep[static_cast<std::size_t>(i)]) continue;
        data.row(row++) = set.data().row(i);
        if (set.has_labels()) labels.push_back(set.labels()[static_cast<std::size_t>(i)]);
    }
    if (set.has_labels()) return EmbeddingSet(std::move(data), std::move(labels));
    return EmbeddingSet(std::move(data));
}

double rbf_mixture(Eigen::Ref<const Eigen::RowVectorXd> a,
                   Eigen::Ref<const Eigen::RowVectorXd> b,
                   const KernelModel& model) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("kernel arguments differ in dimension");
    }
    if (!a.allFinite() || !b.allFinite()) {
        throw std::invalid_argument("kernel arguments must be finite");
    }
    return mixture_value(squared_distance(a.data(), b.data(), a.size()), model);
}

GramMatrix gram_source(const EmbeddingSet& source, const KernelModel& model) {
    const Eigen::Index n = source.rows();
    const Eigen::Index d = source.cols();
    const double* base = source.data().data();
    GramMatrix gram(n, n);
    const double diag = model.self_value();

#pragma omp parallel for schedule(dynamic, 8)
    for (Eigen::Index i = 0; i < n; ++i) {
        gram(i, i) = diag;
        const double* row_i = base + i * d;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            gram(i, j) = mixture_value(squared_distance(row_i, base + j * d, d), model);
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            gram(j, i) = gram(i, j);
        }
    }
    return gram;
}

Eigen::VectorXd cross_affinity(const EmbeddingSet& source,
                               const EmbeddingSet& target,
                               const KernelModel& model) {
    if (source.cols() != target.cols()) {
        throw std::invalid_argument("source and target dimensions differ");
    }
    const Eigen::Index ns = source.rows();
    const Eigen::Index nt = target.rows();
    const Eigen::Index d = source.cols();
    const double* sbase = source.data().data();
    const double* tbase = target.data().data();
    Eigen::VectorXd affinity(ns);

#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < ns; ++i) {
        const double* row_i = sbase + i * d;
        double acc = 0.0;
        for (Eigen::Index j = 0; j < nt; ++j) {
            acc += mixture_value(squared_distance(row_i, tbase + j * d, d), model);
        }
        affinity(i) = acc;
    }
    return affinity;
}

double target_self_term(const EmbeddingSet& target, const KernelModel& model) {
    const Eigen::Index n = target.rows();
    const Eigen::Index d = target.cols();
    const double* base = target.data().data();
    Eigen::VectorXd row_sums(n);

#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* row_i = base + i * d;
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            acc += mixture_value(squared_distance(row_i, base + j * d, d), model);
        }
        row_sums(i) = acc;
    }
    // Serial reduction over per-row partials keeps the result identical for
    // every thread count.
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += row_sums(i);
    return total / (static_cast<double>(n) * static_cast<double>(n));
}

namespace serial {

GramMatrix gram_source(const EmbeddingSet& source, const KernelModel& model) {
    const Eigen::Index n = source.rows();
    GramMatrix gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        gram(i, i) = model.self_value();
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double value =
                rbf_mixture(source.data().row(i), source.data().row(j), model);
            gram(i, j) = value;
            gram(j, i) = value;
        }
    }
    return gram;
}

Eigen::VectorXd cross_affinity(const EmbeddingSet& source,
                               const EmbeddingSet& target,
                               const KernelModel& model) {
    if (source.cols() != target.cols()) {
        throw std::invalid_argument("source and target dimensions differ");
    }
    Eigen::VectorXd affinity(source.rows());
    for (Eigen::Index i = 0; i < source.rows(); ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < target.rows(); ++j) {
            acc += rbf_mixture(source.data().row(i), target.data().row(j), model);
        }
        affinity(i) = acc;
    }
    return affinity;
}

double target_self_term(const EmbeddingSet& target, const KernelModel& model) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < target.rows(); ++i) {
        for (Eigen::Index j = 0; j < target.rows(); ++j) {
            total += rbf_mixture(target.data().row(i), target.data().row(j), model);
        }
    }
    const double n = static_cast<double>(target.rows());
    return total / (n * n);
}

}  // namespace serial

}  // namespace adaprune
