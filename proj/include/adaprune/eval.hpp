#pragma once

#include "adaprune/baselines.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace adaprune {

/// Mixture-of-Gaussians domain pair. Per-cluster isotropic sigma and label;
/// separate source/target mixture weights; target support must be contained
/// in source support. Sampling is deterministic in `seed` (see random.hpp).
struct SynthSpec {
    int dimension = 0;
    std::vector<Eigen::VectorXd> means;   // one per cluster
    std::vector<double> sigmas;           // one per cluster
    std::vector<double> source_weights;   // simplex
    std::vector<double> target_weights;   // simplex
    std::vector<int> labels;              // one per cluster
    Eigen::Index samples_source = 0;
    Eigen::Index samples_target = 0;
    std::uint64_t seed = 0;

    std::size_t cluster_count() const { return means.size(); }
    void validate() const;
};

struct EvalReport {
    double mmd_before = 0.0;
    double mmd_after = 0.0;
    double accuracy_before = 0.0;
    double accuracy_after = 0.0;
    double fraction_removed = 0.0;
};

enum class Method { adaprune, kmm, landmarks, coral, none };

Method method_from_string(const std::string& name);
std::string to_string(Method method);

struct PipelineParams {
    double ratio = 0.7;
    int k = 1;
    double box_cap = kmm_default_box_cap();
    double sum_tolerance = -1.0;  // <0: use kmm_default_sum_tolerance(N_s)
    double ridge = 1e-6;
    double threshold = 0.5;
    std::uint64_t node_budget = 1000000;
};

struct SweepRow {
    double ratio = 0.0;
    std::uint64_t seed = 0;
    double mmd = 0.0;
    double accuracy = 0.0;
};

struct PearsonResult {
    double r = 0.0;
    double p = 1.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // sorted by (ratio, seed)
    std::optional<PearsonResult> correlation;  // nullopt if degenerate
};

/// Draws both domains. Cluster sample counts follow largest-remainder
/// apportionment of the mixture weights; rows are laid out cluster-major;
/// each (domain, cluster) pair owns its own generator substream. Identical
/// specs produce bit-identical matrices. Both sets carry labels; target
/// labels are for scoring only and are never consulted by any pruning path.
std::pair<EmbeddingSet, EmbeddingSet> synth_domain_pair(const SynthSpec& spec);

/// k-nearest-neighbor accuracy of `test` under a model "trained" on `train`.
/// Euclidean distances; distance ties resolved toward the lowest training
/// index, vote ties toward the smallest label. Optional per-training-row
/// vote weights (all-ones when empty).
double train_eval_knn(const EmbeddingSet& train, const EmbeddingSet& test,
                      int k, const Eigen::VectorXd& vote_weights = {});

/// Deterministic shuffled split into ceil(ratio*N) / remainder rows.
std::pair<EmbeddingSet, EmbeddingSet> split_train_val(const EmbeddingSet& set,
                                                      double ratio,
                                                      std::uint64_t seed);

/// Sample Pearson correlation with the two-sided p-value of the t statistic
/// t = r * sqrt((n-2)/(1-r^2)) via the regularized incomplete beta function.
/// Throws std::invalid_argument when n < 3 or either vector is constant.
PearsonResult pearson(const std::vector<double>& xs,
                      const std::vector<double>& ys);

/// For every (ratio, seed): generate domains from `spec` with that seed,
/// prune by branch and bound at N_ss = round(ratio*N_s), record post-prune
/// MMD and k-NN target accuracy of the pruned training set. Rows come back
/// sorted by (ratio, seed); the correlation pools all rows.
SweepResult sweep_mmd_accuracy(const SynthSpec& spec,
                               const std::vector<double>& ratios,
                               const std::vector<std::uint64_t>& seeds, int k,
                               std::uint64_t node_budget = 1000000);

/// Applies one adaptation method and reports MMD / k-NN accuracy before and
/// after, plus the fraction of source rows removed (0 for kmm/coral/none).
EvalReport evaluate_pipeline(const EmbeddingSet& source,
                             const EmbeddingSet& target,
                             const KernelModel& model, Method method,
                             const PipelineParams& params);

/// The two-class benchmark with an irrelevant far cluster: relevant region =
/// two unit-sigma clusters (labels 0/1) making up 70% of the source but with
/// source proportions skewed against the balanced target, plus a 30%
/// irrelevant cluster 20 sigma away that the target never draws from.
SynthSpec irrelevant_cluster_benchmark(std::uint64_t seed,
                                       Eigen::Index n_source = 200,
                                       Eigen::Index n_target = 100);

}  // namespace adaprune
