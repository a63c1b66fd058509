#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "adaprune/mmd.hpp"
#include "adaprune/solver.hpp"
#include "test_support.hpp"

#include <numeric>

using namespace adaprune;
using test_support::oracle_kernel;
using test_support::random_set;
using test_support::standard_gammas;

namespace {

// Direct triple-loop evaluation of the biased estimator, independent of the
// library summation layout.
double oracle_mmd_squared(const EmbeddingSet& a, const EmbeddingSet& b) {
    const auto& gammas = standard_gammas();
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.rows(); ++j)
            saa += oracle_kernel(a.data().row(i), a.data().row(j), gammas);
    for (Eigen::Index i = 0; i < b.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j)
            sbb += oracle_kernel(b.data().row(i), b.data().row(j), gammas);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j)
            sab += oracle_kernel(a.data().row(i), b.data().row(j), gammas);
    const double na = double(a.rows());
    const double nb = double(b.rows());
    return saa / (na * na) + sbb / (nb * nb) - 2.0 * sab / (na * nb);
}

PruneMask random_mask(Eigen::Index n, Eigen::Index popcount, std::uint64_t seed) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 gen(adaprune::rng::mix64(seed));
    adaprune::rng::fisher_yates(order, gen);
    PruneMask mask{std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0)};
    for (Eigen::Index i = 0; i < popcount; ++i) {
        mask.bits[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
    }
    return mask;
}

}  // namespace

TEST_CASE("mmd of a set against itself vanishes") {
    const KernelModel model = KernelModel::standard();
    for (std::uint64_t trial = 0; trial < 5; ++trial) {
        const EmbeddingSet set = random_set(6, 3, 400 + trial);
        const double value = mmd_squared(set, set, model);
        CHECK(std::abs(value) <= 1e-12);
    }
}

TEST_CASE("mmd of two far singletons approaches twice the self value") {
    const KernelModel model = KernelModel::standard();
    RowMatrixXd a(1, 1), b(1, 1);
    a << 0.0;
    b << 1000.0;
    CHECK(mmd_squared(EmbeddingSet(a), EmbeddingSet(b), model) ==
          doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("mmd matches the triple-loop oracle and is symmetric") {
    const KernelModel model = KernelModel::standard();
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        const EmbeddingSet a = random_set(5, 2, 500 + trial);
        const EmbeddingSet b = random_set(4, 2, 600 + trial, 0.5);
        const double value = mmd_squared(a, b, model);
        CHECK(value == doctest::Approx(oracle_mmd_squared(a, b)).epsilon(1e-10));
        CHECK(std::abs(value - mmd_squared(b, a, model)) <= 1e-12);
        CHECK(value >= -1e-12);
        CHECK(value == doctest::Approx(serial::mmd_squared(a, b, model))
                           .epsilon(1e-12));
    }

    const EmbeddingSet a = random_set(3, 2, 1);
    const EmbeddingSet wrong = random_set(3, 4, 2);
    CHECK_THROWS_AS(mmd_squared(a, wrong, model), std::invalid_argument);
}

TEST_CASE("masked mmd: all-ones mask reduces to the full estimator") {
    const KernelModel model = KernelModel::standard();
    const EmbeddingSet source = random_set(7, 3, 700);
    const EmbeddingSet target = random_set(5, 3, 701, 0.3);
    const PruneProblem problem = build_problem(source, target, model, 7);
    const double masked = masked_mmd_squared(problem, PruneMask::ones(7));
    CHECK(masked ==
          doctest::Approx(mmd_squared(source, target, model)).epsilon(1e-10));
}

TEST_CASE("masked mmd: scalar case") {
    const KernelModel model = KernelModel::standard();
    const EmbeddingSet source = random_set(1, 2, 702);
    const EmbeddingSet target = random_set(4, 2, 703);
    const PruneProblem problem = build_problem(source, target, model, 1);
    const double expected = problem.gram(0, 0) -
                            2.0 / double(problem.n_target) * problem.affinity(0) +
                            problem.target_term;
    CHECK(masked_mmd_squared(problem, PruneMask{{1}}) ==
          doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("masked mmd matches the extracted-subset estimator") {
    const KernelModel model = KernelModel::standard();
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        const EmbeddingSet source = random_set(8, 2, 710 + trial);
        const EmbeddingSet target = random_set(5, 2, 720 + trial, 0.4);
        const PruneProblem problem = build_problem(source, target, model, 3);
        const PruneMask mask = random_mask(8, 3, trial);
        const EmbeddingSet subset = select_rows(source, mask.bits);
        CHECK(masked_mmd_squared(problem, mask) ==
              doctest::Approx(mmd_squared(subset, target, model)).epsilon(1e-10));
    }
}

TEST_CASE("masked mmd rejects empty and mismatched masks") {
    const KernelModel model = KernelModel::standard();
    const EmbeddingSet source = random_set(4, 2, 730);
    const EmbeddingSet target = random_set(3, 2, 731);
    const PruneProblem problem = build_problem(source, target, model, 2);
    CHECK_THROWS_AS(masked_mmd_squared(problem, PruneMask{{0, 0, 0, 0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(masked_mmd_squared(problem, PruneMask{{1, 0}}),
                    std::invalid_argument);
}

TEST_CASE("objective identity links the two forms") {
    const KernelModel model = KernelModel::standard();
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 4 + static_cast<Eigen::Index>(trial % 5);
        const EmbeddingSet source = random_set(n, 3, 800 + trial);
        const EmbeddingSet target = random_set(4, 3, 900 + trial, 0.2);
        for (Eigen::Index p = 1; p <= n; ++p) {
            const PruneProblem problem = build_problem(source, target, model, p);
            const PruneMask mask = random_mask(n, p, trial * 31 + p);
            const double masked = masked_mmd_squared(problem, mask);
            const double objective = iqp_objective(problem, mask);
            CHECK(masked == doctest::Approx(objective / double(p) +
                                            problem.target_term)
                                .epsilon(1e-9));
        }
    }
}

TEST_CASE("objective at the all-ones mask") {
    const KernelModel model = KernelModel::standard();
    const EmbeddingSet source = random_set(6, 2, 801);
    const EmbeddingSet target = random_set(5, 2, 802);
    const PruneProblem problem = build_problem(source, target, model, 6);
    const double full = mmd_squared(source, target, model);
    CHECK(iqp_objective(problem, PruneMask::ones(6)) ==
          doctest::Approx(6.0 * (full - problem.target_term)).epsilon(1e-9));
}

TEST_CASE("objective matches direct double-loop evaluation") {
    const KernelModel model = KernelModel::standard();
    const EmbeddingSet source = random_set(7, 2, 810);
    const EmbeddingSet target = random_set(4, 2, 811);
    const PruneProblem problem = build_problem(source, target, model, 3);
    const PruneMask mask = random_mask(7, 3, 99);

    double quad = 0.0, lin = 0.0;
    for (Eigen::Index i = 0; i < 7; ++i) {
        if (!mask.bits[static_cast<std::size_t>(i)]) continue;
        lin += problem.affinity(i);
        for (Eigen::Index j = 0; j < 7; ++j) {
            if (mask.bits[static_cast<std::size_t>(j)]) quad += problem.gram(i, j);
        }
    }
    const double expected = quad / 3.0 - 2.0 * lin / double(problem.n_target);
    CHECK(iqp_objective(problem, mask) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("weighted mmd generalizes masks and uniform weights") {
    const KernelModel model = KernelModel::standard();
    const EmbeddingSet source = random_set(6, 3, 820);
    const EmbeddingSet target = random_set(4, 3, 821, 0.1);
    const PruneProblem problem = build_problem(source, target, model, 3);

    const PruneMask mask = random_mask(6, 3, 7);
    Eigen::VectorXd binary(6);
    for (Eigen::Index i = 0; i < 6; ++i) {
        binary(i) = mask.bits[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    }
    CHECK(weighted_mmd_squared(problem, binary) ==
          masked_mmd_squared(problem, mask));

    CHECK(weighted_mmd_squared(problem, Eigen::VectorXd::Ones(6)) ==
          doctest::Approx(mmd_squared(source, target, model)).epsilon(1e-12));

    CHECK_THROWS_AS(weighted_mmd_squared(problem, Eigen::VectorXd::Zero(6)),
                    std::invalid_argument);
    Eigen::VectorXd negative = Eigen::VectorXd::Ones(6);
    negative(2) = -0.5;
    CHECK_THROWS_AS(weighted_mmd_squared(problem, negative),
                    std::invalid_argument);
}

TEST_CASE("weighted mmd matches a scalar-loop oracle") {
    const KernelModel model = KernelModel::standard();
    const EmbeddingSet source = random_set(5, 2, 830);
    const EmbeddingSet target = random_set(4, 2, 831);
    const PruneProblem problem = build_problem(source, target, model, 2);

    adaprune::rng::NormalSampler sampler(832);
    Eigen::VectorXd beta(5);
    for (Eigen::Index i = 0; i < 5; ++i) beta(i) = std::abs(sampler.next()) + 0.1;

    double quad = 0.0, lin = 0.0;
    for (Eigen::Index i = 0; i < 5; ++i) {
        lin += problem.affinity(i) * beta(i);
        for (Eigen::Index j = 0; j < 5; ++j) {
            quad += beta(i) * problem.gram(i, j) * beta(j);
        }
    }
    const double total = beta.sum();
    const double expected = quad / (total * total) -
                            2.0 * lin / (total * double(problem.n_target)) +
                            problem.target_term;
    CHECK(weighted_mmd_squared(problem, beta) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("identical domains: all-ones mask is optimal at full size") {
    const KernelModel model = KernelModel::standard();
    const EmbeddingSet set = random_set(6, 2, 840);
    const PruneProblem problem = build_problem(set, set, model, 6);
    const SolveResult brute = solve_brute_force(problem);
    CHECK(brute.mask.bits == PruneMask::ones(6).bits);
    CHECK(iqp_objective(problem, PruneMask::ones(6)) ==
          doctest::Approx(brute.objective).epsilon(1e-12));
}

TEST_CASE("reported mmd is the clipped square root") {
    CHECK(mmd_from_squared(4.0) == 2.0);
    CHECK(mmd_from_squared(-1e-13) == 0.0);
    CHECK(mmd_from_squared(0.0) == 0.0);
}
