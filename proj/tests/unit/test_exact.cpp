#include <gtest/gtest.h>

#include <filesystem>

#include "vdpo/common/error.hpp"
#include "vdpo/exact/fixed_point.hpp"
#include "vdpo/exact/sample_complexity.hpp"
#include "vdpo/exact/solvers.hpp"
#include "vdpo/mdp/delayed_mdp.hpp"
#include "vdpo/mdp/mdp_io.hpp"

using namespace vdpo;
using namespace vdpo::mdp;
using namespace vdpo::exact;

namespace {

FiniteMdp hand_mdp() { return load_mdp(std::string(VDPO_TEST_DATA_DIR) + "/hand_2x2.mdp"); }

void expect_all_near(std::span<const double> got, std::initializer_list<double> want, double tol) {
    ASSERT_EQ(got.size(), want.size());
    std::size_t i = 0;
    for (double w : want) EXPECT_NEAR(got[i++], w, tol) << "index " << i - 1;
}

}  // namespace

TEST(FiniteMdp, RejectsMalformedModels) {
    EXPECT_THROW(FiniteMdp(1, 1, {0.5}, {0.0}, 0.9, {1.0}), ModelError);
    EXPECT_THROW(FiniteMdp(1, 1, {1.0}, {0.0}, 1.0, {1.0}), ModelError);
    EXPECT_THROW(FiniteMdp(1, 1, {-1.0}, {0.0}, 0.9, {1.0}), ModelError);
    EXPECT_THROW(FiniteMdp(1, 1, {1.0}, {0.0}, 0.9, {1.0, 0.0}), ModelError);
    EXPECT_NO_THROW(FiniteMdp(1, 1, {1.0}, {0.0}, 0.9, {1.0}));
}

TEST(FiniteMdp, TextRoundTripIsExact) {
    const auto m = random_mdp(0, 3, 2);
    EXPECT_EQ(parse_mdp(format_mdp(m)), m);
    EXPECT_THROW(parse_mdp("2 2 0.9\n1 0"), ModelError);
    const auto path = (std::filesystem::temp_directory_path() / "vdpo_mdp_roundtrip.mdp").string();
    save_mdp(m, path);
    EXPECT_EQ(load_mdp(path), m);
    std::filesystem::remove(path);
}

TEST(FiniteMdp, RandomGeneratorsAreReproducible) {
    EXPECT_EQ(random_mdp(7, 4, 3), random_mdp(7, 4, 3));
    EXPECT_FALSE(random_mdp(7, 4, 3) == random_mdp(8, 4, 3));
    EXPECT_TRUE(random_deterministic_mdp(1, 5, 2).is_deterministic());
    EXPECT_FALSE(random_mdp(1, 5, 2).is_deterministic());
}

TEST(Solvers, HandMdpMatchesIndependentSolution) {
    const auto m = hand_mdp();
    const auto vi = value_iteration(m, 1e-13);
    const auto pi = policy_iteration(m);
    expect_all_near(vi.table.values, {13.698630136986306, 15.068493150684937}, 1e-10);
    expect_all_near(pi.table.values, {13.698630136986306, 15.068493150684937}, 1e-10);
    expect_all_near(pi.table.q, {13.698630136986306, 13.31506849315069, 12.452054794520553, 15.068493150684937},
                    1e-10);
    EXPECT_EQ(pi.policy.mode(0), 0u);
    EXPECT_EQ(pi.policy.mode(1), 1u);
    EXPECT_EQ(vi.policy, pi.policy);
    EXPECT_NEAR(expected_return(m, pi.table.values), 14.383561643835622, 1e-10);
    expect_all_near(occupancy_measure(m, pi.policy), {0.5616438356164384, 0.43835616438356173}, 1e-12);
}

TEST(Solvers, IterationsAgreeOnRandomModels) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto m = random_mdp(seed, 6, 3);
        const auto vi = value_iteration(m, 1e-12);
        const auto pi = policy_iteration(m);
        for (std::size_t s = 0; s < 6; ++s) EXPECT_NEAR(vi.table.values[s], pi.table.values[s], 1e-9);
        const auto eval = policy_evaluation(m, pi.policy);
        for (std::size_t s = 0; s < 6; ++s) EXPECT_NEAR(eval.values[s], pi.table.values[s], 1e-10);
    }
}

TEST(Solvers, PolicyValidationAndShapeChecks) {
    const auto m = hand_mdp();
    EXPECT_THROW(policy_evaluation(m, PolicyTable::uniform(3, 2)), DimensionError);
    PolicyTable bad(2, 2);
    EXPECT_THROW(bad.validate(), ModelError);
    EXPECT_NO_THROW(PolicyTable::uniform(2, 2).validate());
}

TEST(DelayedMdp, IndexingRoundTripsAndShifts) {
    const auto d = build_delayed_mdp(random_mdp(0, 3, 2), 3);
    EXPECT_EQ(d.num_states(), 3u * 8u);
    for (std::size_t x = 0; x < d.num_states(); ++x) EXPECT_EQ(d.index_of(d.state_at(x)), x);
    const AugmentedState x{2, {1, 0, 1}};
    const auto i = d.index_of(x);
    EXPECT_EQ(d.oldest_action(i, 0), 1u);
    EXPECT_EQ(d.state_at(d.shifted_index(i, 0, 0)), (AugmentedState{0, {0, 1, 0}}));
    EXPECT_THROW(d.index_of(AugmentedState{3, {0, 0, 0}}), InvalidStateError);
    EXPECT_THROW(d.index_of(AugmentedState{0, {0, 0}}), InvalidStateError);
}

TEST(DelayedMdp, CapacityIsCheckedBeforeAllocation) {
    DelayedMdpOptions opt;
    opt.capacity = 108;
    EXPECT_THROW(build_delayed_mdp(random_mdp(0, 4, 3), 4, std::nullopt, opt), CapacityError);
    EXPECT_NO_THROW(build_delayed_mdp(random_mdp(0, 4, 3), 3, std::nullopt, opt));
}

TEST(DelayedMdp, BeliefOfHandExample) {
    const auto m = hand_mdp();
    expect_all_near(compute_belief(m, AugmentedState{0, {1, 0}}).probs, {0.86, 0.14}, 1e-15);
    const auto d = build_delayed_mdp(m, 2);
    expect_all_near(d.belief(d.index_of(AugmentedState{0, {1, 0}})).probs, {0.86, 0.14}, 1e-15);
    expect_all_near(compute_belief(m, AugmentedState{1, {}}).probs, {0.0, 1.0}, 0.0);
}

TEST(DelayedMdp, DenseAndLazyBeliefsAgree) {
    const auto m = random_mdp(3, 3, 2);
    DelayedMdpOptions lazy;
    lazy.dense_threshold = 0;
    const auto dense = build_delayed_mdp(m, 3);
    const auto sparse = build_delayed_mdp(m, 3, std::nullopt, lazy);
    EXPECT_TRUE(dense.is_dense());
    EXPECT_FALSE(sparse.is_dense());
    for (std::size_t x = 0; x < dense.num_states(); ++x) {
        for (std::size_t a = 0; a < 2; ++a) EXPECT_NEAR(dense.reward(x, a), sparse.reward(x, a), 1e-15);
    }
}

TEST(DelayedMdp, OneStepDelayMatchesIndependentSolution) {
    const auto d = build_delayed_mdp(hand_mdp(), 1, std::vector<ActionIndex>{0});
    const auto sol = value_iteration(d, 1e-13);
    expect_all_near(sol.table.values,
                    {12.71186440677966, 13.559322033898303, 12.372881355932202, 13.220338983050844}, 1e-10);
    EXPECT_NEAR(expected_return(d, sol.table.values), 12.54237288135593, 1e-10);
}

TEST(DelayedMdp, ZeroDelayIsTheBaseModel) {
    const auto m = hand_mdp();
    const auto d = build_delayed_mdp(m, 0);
    EXPECT_EQ(d.num_states(), 2u);
    EXPECT_NEAR(expected_return(d, value_iteration(d, 1e-13).table.values), 14.383561643835622, 1e-10);
}

TEST(FixedPoint, KlDivergenceBasics) {
    const std::vector<double> p{0.5, 0.5}, q{0.9, 0.1}, z{1.0, 0.0};
    EXPECT_EQ(kl_divergence(p, p), 0.0);
    EXPECT_NEAR(kl_divergence(p, q), 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1), 1e-15);
    EXPECT_TRUE(std::isinf(kl_divergence(p, z)));
    EXPECT_EQ(kl_divergence(z, p), std::log(2.0));
}

TEST(FixedPoint, ExactVdpoIsABeliefMixtureFixedPoint) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto m = random_mdp(seed, 3, 2);
        const auto pi = exact_vdpo(m, 2);
        pi.validate();
        EXPECT_LE(fixed_point_residual(m, 2, pi), 1e-9);
    }
}

TEST(FixedPoint, GridMinimizerMatchesMixture) {
    PolicyTable ref(2, 2);
    ref(0, 0) = 0.8;
    ref(0, 1) = 0.2;
    ref(1, 0) = 0.3;
    ref(1, 1) = 0.7;
    const auto c = state_kl_projection_check(ref, Belief{{0.6, 0.4}}, 1000);
    EXPECT_NEAR(c.mixture[0], 0.6, 1e-15);
    EXPECT_LE(c.gap, 1e-3);
}

TEST(FixedPoint, DelayProfileIsMonotone) {
    const std::vector<std::size_t> delays{0, 1, 2, 3};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto prof = delay_performance_profile(random_mdp(seed, 3, 2), delays);
        for (std::size_t i = 1; i < prof.size(); ++i) EXPECT_LE(prof[i], prof[i - 1] + 1e-9) << "seed " << seed;
    }
}

TEST(SampleComplexity, ReportsAreDeterministicAndWellFormed) {
    const auto m = random_mdp(0, 4, 2);
    const auto [a, b] = sample_complexity_experiment(m, 2, 0.1, 5);
    const auto [c, d] = sample_complexity_experiment(m, 2, 0.1, 5);
    EXPECT_EQ(a.samples, c.samples);
    EXPECT_EQ(b.samples, d.samples);
    EXPECT_NE(a.method, b.method);
    EXPECT_GT(a.samples, 0u);
    EXPECT_EQ(sample_complexity_csv_header(), "seed,delay,epsilon,arm,samples,epsilon_hat,success");
    const auto row = sample_complexity_csv_row(5, 2, a);
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), 6);
}
