#include "adaprune/cli.hpp"

#include "adaprune/io.hpp"
#include "adaprune/random.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <omp.h>

#include <fstream>
#include <iostream>
#include <sstream>

namespace adaprune {

namespace {

KernelModel model_from_config(const RunConfig& config) {
    if (config.bandwidths.empty()) return KernelModel::standard();
    return KernelModel(config.bandwidths);
}

Eigen::Index subset_size_for(double ratio, Eigen::Index n) {
    const auto rounded = static_cast<Eigen::Index>(std::llround(ratio * double(n)));
    return std::clamp<Eigen::Index>(rounded, 1, n);
}

SynthSpec load_spec_json(const std::string& path, std::uint64_t seed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error(path + ": cannot open spec file");
    }
    nlohmann::json doc = nlohmann::json::parse(in);
    SynthSpec spec;
    spec.dimension = doc.at("dimension").get<int>();
    spec.samples_source = doc.at("samples_source").get<Eigen::Index>();
    spec.samples_target = doc.at("samples_target").get<Eigen::Index>();
    for (const auto& cluster : doc.at("clusters")) {
        const auto mean = cluster.at("mean").get<std::vector<double>>();
        Eigen::VectorXd mu(static_cast<Eigen::Index>(mean.size()));
        for (std::size_t i = 0; i < mean.size(); ++i) {
            mu(static_cast<Eigen::Index>(i)) = mean[i];
        }
        spec.means.push_back(std::move(mu));
        spec.sigmas.push_back(cluster.at("sigma").get<double>());
        spec.labels.push_back(cluster.at("label").get<int>());
        spec.source_weights.push_back(cluster.at("source_weight").get<double>());
        spec.target_weights.push_back(cluster.at("target_weight").get<double>());
    }
    spec.seed = seed;
    spec.validate();
    return spec;
}

SynthSpec spec_from_config(const RunConfig& config) {
    if (!config.spec_path.empty()) {
        return load_spec_json(config.spec_path, config.seed);
    }
    return irrelevant_cluster_benchmark(config.seed);
}

SolveResult dispatch_solver(const RunConfig& config, const PruneProblem& problem) {
    if (config.solver == "bb") {
        return solve_branch_bound(problem, config.node_budget);
    }
    if (config.solver == "greedy") {
        return solve_greedy_swap(problem, solve_relax_round(problem).mask);
    }
    if (config.solver == "relax") {
        return solve_relax_round(problem);
    }
    if (config.solver == "brute") {
        return solve_brute_force(problem);
    }
    throw std::invalid_argument("unknown solver: " + config.solver);
}

std::vector<double> sweep_ratios(const RunConfig& config) {
    if (config.random_ratios > 0) {
        std::mt19937_64 gen(rng::mix64(config.seed ^ 0x52415449u));
        std::vector<double> ratios;
        ratios.reserve(static_cast<std::size_t>(config.random_ratios));
        for (int i = 0; i < config.random_ratios; ++i) {
            ratios.push_back(0.20 + 0.79 * rng::uniform01(gen));
        }
        std::sort(ratios.begin(), ratios.end());
        return ratios;
    }
    if (!config.ratios.empty()) return config.ratios;
    return {0.20, 0.35, 0.50, 0.65, 0.80, 0.99};
}

std::vector<std::uint64_t> sweep_seeds(const RunConfig& config) {
    if (!config.seeds.empty()) return config.seeds;
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 10; ++s) seeds.push_back(config.seed + s);
    return seeds;
}

int run_prune(const RunConfig& config) {
    const EmbeddingSet source = io::load_embeddings(config.source_path);
    const EmbeddingSet target = io::load_embeddings(config.target_path);
    const KernelModel model = model_from_config(config);
    const PruneProblem problem = build_problem(
        source, target, model, subset_size_for(config.ratio, source.rows()));
    const SolveResult result = dispatch_solver(config, problem);
    io::write_mask(config.output_path, result.mask, source.rows());
    std::cout << "N_ss=" << problem.subset_size
              << " objective=" << io::format_double(result.objective)
              << " mmd=" << io::format_double(result.mmd)
              << " status=" << to_string(result.status) << "\n";
    return result.status == SolveStatus::budget_exhausted ? kExitBudget : kExitOk;
}

int run_kmm(const RunConfig& config) {
    const EmbeddingSet source = io::load_embeddings(config.source_path);
    const EmbeddingSet target = io::load_embeddings(config.target_path);
    const KernelModel model = model_from_config(config);
    const double tolerance = config.sum_tolerance >= 0.0
                                 ? config.sum_tolerance
                                 : kmm_default_sum_tolerance(source.rows());
    const WeightVector weights =
        kmm_weights(source, target, model, config.box_cap, tolerance);
    io::write_weights(config.output_path, weights.values);
    const PruneProblem problem =
        build_problem(source, target, model, source.rows());
    const double wmmd =
        mmd_from_squared(weighted_mmd_squared(problem, weights.values));
    std::cout << "sum=" << io::format_double(weights.values.sum())
              << " weighted_mmd=" << io::format_double(wmmd) << "\n";
    return kExitOk;
}

int run_landmarks(const RunConfig& config) {
    const EmbeddingSet source = io::load_embeddings(config.source_path);
    const EmbeddingSet target = io::load_embeddings(config.target_path);
    const KernelModel model = model_from_config(config);
    const PruneMask mask =
        landmark_select(source, target, model, config.threshold, config.cut);
    io::write_mask(config.output_path, mask, source.rows());
    std::cout << "selected=" << mask.popcount() << "\n";
    return kExitOk;
}

int run_coral(const RunConfig& config) {
    const EmbeddingSet source = io::load_embeddings(config.source_path);
    const EmbeddingSet target = io::load_embeddings(config.target_path);
    const auto [transform, mapped] =
        coral_transform(source, target, config.ridge);
    io::write_embeddings(config.output_path, mapped);
    std::cout << "ridge=" << io::format_double(transform.ridge) << "\n";
    return kExitOk;
}

int run_eval(const RunConfig& config) {
    const EmbeddingSet source = io::load_embeddings(config.source_path);
    const EmbeddingSet target = io::load_embeddings(config.target_path);
    const KernelModel model = model_from_config(config);
    PipelineParams params;
    params.ratio = config.ratio;
    params.k = config.k;
    params.box_cap = config.box_cap;
    params.sum_tolerance = config.sum_tolerance;
    params.ridge = config.ridge;
    params.threshold = config.threshold;
    params.node_budget = config.node_budget;
    const EvalReport report = evaluate_pipeline(
        source, target, model, method_from_string(config.method), params);
    const std::string line =
        "mmd_before=" + io::format_double(report.mmd_before) +
        " mmd_after=" + io::format_double(report.mmd_after) +
        " accuracy_before=" + io::format_double(report.accuracy_before) +
        " accuracy_after=" + io::format_double(report.accuracy_after) +
        " fraction_removed=" + io::format_double(report.fraction_removed);
    std::cout << line << "\n";
    if (!config.output_path.empty()) {
        std::ostringstream csv;
        csv << "mmd_before,mmd_after,accuracy_before,accuracy_after,"
               "fraction_removed\n"
            << io::format_double(report.mmd_before) << ","
            << io::format_double(report.mmd_after) << ","
            << io::format_double(report.accuracy_before) << ","
            << io::format_double(report.accuracy_after) << ","
            << io::format_double(report.fraction_removed) << "\n";
        io::atomic_write(config.output_path, csv.str());
    }
    return kExitOk;
}

int run_sweep(const RunConfig& config) {
    const SynthSpec spec = spec_from_config(config);
    const SweepResult result = sweep_mmd_accuracy(
        spec, sweep_ratios(config), sweep_seeds(config), config.k,
        config.node_budget);
    io::write_sweep(config.output_path, result);
    if (result.correlation.has_value()) {
        std::cout << "r=" << io::format_double(result.correlation->r)
                  << " p=" << io::format_double(result.correlation->p)
                  << " n=" << result.rows.size() << "\n";
    } else {
        std::cout << "r=nan p=nan n=" << result.rows.size() << "\n";
    }
    return kExitOk;
}

int run_synth(const RunConfig& config) {
    const SynthSpec spec = spec_from_config(config);
    const auto [source, target] = synth_domain_pair(spec);
    io::write_embeddings(config.source_path, source);
    io::write_embeddings(config.target_path, target);
    std::cout << "source_rows=" << source.rows()
              << " target_rows=" << target.rows() << "\n";
    return kExitOk;
}

int run_export_qp(const RunConfig& config) {
    const EmbeddingSet source = io::load_embeddings(config.source_path);
    const EmbeddingSet target = io::load_embeddings(config.target_path);
    const KernelModel model = model_from_config(config);
    const PruneProblem problem = build_problem(
        source, target, model, subset_size_for(config.ratio, source.rows()));
    std::ostringstream out;
    export_qp_text(problem, out);
    io::atomic_write(config.output_path, out.str());
    std::cout << "variables=" << problem.n_source << "\n";
    return kExitOk;
}

}  // namespace

int run_command(const RunConfig& config) {
    if (config.threads > 0) {
        omp_set_num_threads(config.threads);
    }
    try {
        switch (config.command) {
            case Command::prune: return run_prune(config);
            case Command::kmm: return run_kmm(config);
            case Command::landmarks: return run_landmarks(config);
            case Command::coral: return run_coral(config);
            case Command::eval: return run_eval(config);
            case Command::sweep: return run_sweep(config);
            case Command::synth: return run_synth(config);
            case Command::export_qp: return run_export_qp(config);
        }
        std::cerr << "error: unknown command\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}

int run_main(int argc, const char* const* argv) {
    RunConfig config;
    CLI::App app{
        "Source-data pruning, re-weighting and alignment for unsupervised "
        "domain adaptation, driven by the kernel maximum mean discrepancy"};
    app.require_subcommand(1);

    const auto add_kernel = [&](CLI::App* cmd) {
        cmd->add_option("--bandwidths", config.bandwidths,
                        "RBF mixture bandwidths (default 0.001,0.01,0.1,1,10)")
            ->delimiter(',');
    };
    const auto add_inputs = [&](CLI::App* cmd) {
        cmd->add_option("--source", config.source_path, "source embedding CSV")
            ->required();
        cmd->add_option("--target", config.target_path, "target embedding CSV")
            ->required();
    };
    const auto add_output = [&](CLI::App* cmd) {
        cmd->add_option("--output", config.output_path, "output file")->required();
    };
    const auto add_threads = [&](CLI::App* cmd) {
        cmd->add_option("--threads", config.threads,
                        "worker thread cap (0 = auto)");
    };

    CLI::App* prune = app.add_subcommand(
        "prune", "select the source subset with minimal MMD to the target");
    add_inputs(prune);
    add_output(prune);
    add_kernel(prune);
    add_threads(prune);
    prune->add_option("--ratio", config.ratio, "kept fraction N_ss/N_s")
        ->check(CLI::Range(0.0, 1.0));
    prune->add_option("--solver", config.solver, "bb | greedy | relax | brute")
        ->check(CLI::IsMember({"bb", "greedy", "relax", "brute"}));
    prune->add_option("--node-budget", config.node_budget,
                      "branch-and-bound node budget");
    prune->callback([&] { config.command = Command::prune; });

    CLI::App* kmm = app.add_subcommand(
        "kmm", "kernel mean matching weights for the source set");
    add_inputs(kmm);
    add_output(kmm);
    add_kernel(kmm);
    add_threads(kmm);
    kmm->add_option("--box-cap", config.box_cap, "upper bound B on each weight");
    kmm->add_option("--sum-tolerance", config.sum_tolerance,
                    "sum band epsilon (negative = (sqrt(N_s)-1)/sqrt(N_s))");
    kmm->callback([&] { config.command = Command::kmm; });

    CLI::App* landmarks = app.add_subcommand(
        "landmarks", "threshold the fractional relaxation into a mask");
    add_inputs(landmarks);
    add_output(landmarks);
    add_kernel(landmarks);
    add_threads(landmarks);
    landmarks->add_option("--threshold", config.threshold,
                          "relaxation cardinality fraction");
    landmarks->add_option("--cut", config.cut,
                          "fractional value cut for keeping a row");
    landmarks->callback([&] { config.command = Command::landmarks; });

    CLI::App* coral = app.add_subcommand(
        "coral", "align source covariance to the target covariance");
    add_inputs(coral);
    add_output(coral);
    add_threads(coral);
    coral->add_option("--ridge", config.ridge, "covariance ridge (> 0)");
    coral->callback([&] { config.command = Command::coral; });

    CLI::App* eval = app.add_subcommand(
        "eval", "report MMD and k-NN accuracy before/after one method");
    add_inputs(eval);
    add_kernel(eval);
    add_threads(eval);
    eval->add_option("--output", config.output_path, "optional report CSV");
    eval->add_option("--method", config.method,
                     "adaprune | kmm | landmarks | coral | none")
        ->check(CLI::IsMember({"adaprune", "kmm", "landmarks", "coral", "none"}));
    eval->add_option("--ratio", config.ratio, "kept fraction for adaprune");
    eval->add_option("--k", config.k, "k-NN neighbor count");
    eval->add_option("--box-cap", config.box_cap, "KMM box cap");
    eval->add_option("--sum-tolerance", config.sum_tolerance, "KMM sum band");
    eval->add_option("--ridge", config.ridge, "CORAL ridge");
    eval->add_option("--threshold", config.threshold, "landmark threshold");
    eval->add_option("--node-budget", config.node_budget, "solver node budget");
    eval->callback([&] { config.command = Command::eval; });

    CLI::App* sweep = app.add_subcommand(
        "sweep", "pruning-ratio sweep with the MMD/accuracy correlation");
    add_output(sweep);
    add_threads(sweep);
    sweep->add_option("--spec", config.spec_path, "synthetic benchmark JSON");
    sweep->add_option("--seed", config.seed, "base seed");
    sweep->add_option("--k", config.k, "k-NN neighbor count");
    sweep->add_option("--ratios", config.ratios, "pruning ratio grid")
        ->delimiter(',');
    sweep->add_option("--seeds", config.seeds, "explicit run seeds")
        ->delimiter(',');
    sweep->add_option("--random-ratios", config.random_ratios,
                      "draw this many uniform ratios in [0.20, 0.99]");
    sweep->add_option("--node-budget", config.node_budget, "solver node budget");
    sweep->callback([&] { config.command = Command::sweep; });

    CLI::App* synth = app.add_subcommand(
        "synth", "generate a synthetic source/target embedding pair");
    synth->add_option("--source", config.source_path, "source CSV destination")
        ->required();
    synth->add_option("--target", config.target_path, "target CSV destination")
        ->required();
    synth->add_option("--seed", config.seed, "generator seed");
    synth->add_option("--spec", config.spec_path, "synthetic benchmark JSON");
    synth->callback([&] { config.command = Command::synth; });

    CLI::App* export_qp = app.add_subcommand(
        "export-qp", "write the subset-selection instance in LP text format");
    add_inputs(export_qp);
    add_output(export_qp);
    add_kernel(export_qp);
    export_qp->add_option("--ratio", config.ratio, "kept fraction N_ss/N_s");
    export_qp->callback([&] { config.command = Command::export_qp; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }
    return run_command(config);
}

}  // namespace adaprune
