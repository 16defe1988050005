#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "../support/gradcheck.hpp"
#include "vdpo/common/error.hpp"
#include "vdpo/nn/checkpoint.hpp"
#include "vdpo/nn/delayed_policy.hpp"
#include "vdpo/nn/sac.hpp"
#include "vdpo/nn/training.hpp"

using namespace vdpo;
using namespace vdpo::nn;

namespace {

ActionScale unit_box(std::size_t dim) {
    return ActionScale::from_bounds(std::vector<double>(dim, -1.0), std::vector<double>(dim, 1.0));
}

TrainConfig tiny_config() {
    TrainConfig c;
    c.hidden = {2};
    c.batch_size = 8;
    c.buffer_capacity = 64;
    c.transformer = {4, 1, 1, 0.0, 2};
    return c;
}

Batch random_batch(Rng& rng, Eigen::Index B, Eigen::Index obs, Eigen::Index act) {
    Batch b{standard_normal(B, obs, rng), Matrix(B, act), standard_normal(B, 1, rng), standard_normal(B, obs, rng),
            Matrix::Zero(B, 1)};
    for (Eigen::Index i = 0; i < b.actions.size(); ++i) b.actions(i) = rng.uniform(-0.9, 0.9);
    b.terminals(0, 0) = 1.0;
    return b;
}

BcBatch random_bc(Rng& rng, std::size_t B, std::size_t delay, std::size_t sd, std::size_t ad) {
    BcBatch b;
    b.size = B;
    b.tokens = standard_normal(static_cast<Eigen::Index>(B * delay), static_cast<Eigen::Index>(sd + ad), rng);
    b.targets = standard_normal(static_cast<Eigen::Index>(B * delay), static_cast<Eigen::Index>(sd), rng);
    return b;
}

}  // namespace

TEST(Gaussian, LogStdStaysWithinBounds) {
    Tape t;
    Matrix raw(1, 3);
    raw << -100.0, 0.0, 100.0;
    const Matrix v = squash_log_std(t.constant(raw)).value();
    EXPECT_NEAR(v(0, 0), kLogStdMin, 1e-12);
    EXPECT_NEAR(v(0, 1), 0.5 * (kLogStdMin + kLogStdMax), 1e-12);
    EXPECT_NEAR(v(0, 2), kLogStdMax, 1e-12);
}

TEST(Gaussian, KlMatchesClosedForm) {
    Tape t;
    auto c = [&](double x) { return t.constant(Matrix::Constant(1, 1, x)); };
    EXPECT_NEAR(gaussian_kl(c(0.3), c(std::log(0.5)), c(-0.2), c(std::log(1.3))).scalar(), 0.6034404391102766, 1e-14);
    EXPECT_NEAR(gaussian_kl(c(1.0), c(0.0), c(0.0), c(0.0)).scalar(), 0.5, 1e-15);
    EXPECT_EQ(gaussian_kl(c(0.7), c(-0.4), c(0.7), c(-0.4)).scalar(), 0.0);
}

TEST(Gaussian, SquashedLogProbMatchesChangeOfVariables) {
    GaussianPolicyParams p{Matrix::Constant(1, 1, 0.2), Matrix::Constant(1, 1, -0.3)};
    const auto box = ActionScale::from_bounds({-2.0}, {2.0});
    EXPECT_NEAR(squashed_log_prob(p, Matrix::Constant(1, 1, 0.9), box)(0), -1.159657504583, 1e-11);
}

TEST(Gaussian, SampleLogProbAgreesWithDensity) {
    Rng rng(5);
    Tape t;
    PolicyHead head{t.constant(standard_normal(6, 2, rng)), t.constant(Matrix::Constant(6, 2, -0.5))};
    const auto box = ActionScale::from_bounds({-2.0, 0.0}, {2.0, 1.0});
    const auto s = sample_squashed(t, head, standard_normal(6, 2, rng), box);
    const auto direct = squashed_log_prob({head.mean.value(), head.log_std.value()}, s.action.value(), box);
    for (Eigen::Index i = 0; i < 6; ++i) EXPECT_NEAR(s.log_prob.value()(i, 0), direct(i), 1e-8);
}

TEST(Gaussian, SquashedDensityIntegratesToOne) {
    // Importance-sampled integral of exp(log p) with a uniform proposal on the box.
    const auto box = ActionScale::from_bounds({-2.0}, {2.0});
    GaussianPolicyParams p{Matrix::Constant(1, 1, 0.4), Matrix::Constant(1, 1, -0.2)};
    Rng rng(11);
    const int n = 100000;
    Matrix actions(n, 1);
    for (int i = 0; i < n; ++i) actions(i, 0) = rng.uniform(-2.0, 2.0);
    GaussianPolicyParams rows{Matrix::Constant(n, 1, 0.4), Matrix::Constant(n, 1, -0.2)};
    const Eigen::ArrayXd weights = 4.0 * squashed_log_prob(rows, actions, box).array().exp();
    const double mean = weights.mean();
    const double se = std::sqrt((weights - mean).square().sum() / (n - 1) / n);
    EXPECT_LE(std::abs(mean - 1.0), 3.0 * se) << mean << " se " << se;
}

TEST(Gaussian, KlInvariantUnderSharedSquashing) {
    // KL estimated in action space from squashed samples equals the pre-squash closed form.
    const auto box = ActionScale::from_bounds({-1.0}, {1.0});
    GaussianPolicyParams p{Matrix::Constant(1, 1, 0.3), Matrix::Constant(1, 1, -0.4)};
    GaussianPolicyParams q{Matrix::Constant(1, 1, -0.1), Matrix::Constant(1, 1, 0.1)};
    Rng rng(2);
    const int n = 100000;
    Matrix a(n, 1);
    for (int i = 0; i < n; ++i) a(i, 0) = std::tanh(0.3 + std::exp(-0.4) * rng.normal());
    GaussianPolicyParams pr{Matrix::Constant(n, 1, 0.3), Matrix::Constant(n, 1, -0.4)};
    GaussianPolicyParams qr{Matrix::Constant(n, 1, -0.1), Matrix::Constant(n, 1, 0.1)};
    const Eigen::ArrayXd diff = squashed_log_prob(pr, a, box).array() - squashed_log_prob(qr, a, box).array();
    Tape t;
    const double closed = gaussian_kl(t.constant(p.mean), t.constant(p.log_std), t.constant(q.mean), t.constant(q.log_std)).scalar();
    const double se = std::sqrt((diff - diff.mean()).square().sum() / (n - 1) / n);
    EXPECT_LE(std::abs(diff.mean() - closed), 4.0 * se);
}

TEST(Sac, SoftTdTargetExamples) {
    EXPECT_NEAR(soft_td_target(1.0, 0.99, false, 2.0, 1.0, -1.0), 3.97, 1e-12);
    EXPECT_EQ(soft_td_target(1.5, 0.99, true, 2.0, 1.0, -1.0), 1.5);
}

TEST(Sac, CriticAndActorGradientsMatchFiniteDifferences) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        auto cfg = tiny_config();
        cfg.twin_critic = seed % 2 == 1;
        SacAgent agent(3, unit_box(2), cfg, rng);
        const auto batch = random_batch(rng, 8, 3, 2);
        const Matrix y = agent.td_targets(batch, standard_normal(8, 2, rng));
        const auto rc = gradcheck::gradient_check(agent.critic_parameters(), [&](Tape& t) { return agent.critic_loss(t, batch, y); });
        EXPECT_LE(rc.relative_error, 1e-4) << "critic seed " << seed;
        const Matrix noise = standard_normal(8, 2, rng);
        const auto ra = gradcheck::gradient_check(agent.actor.parameters(), [&](Tape& t) { return agent.actor_loss(t, batch.obs, noise); });
        EXPECT_LE(ra.relative_error, 1e-4) << "actor seed " << seed;
    }
}

TEST(Sac, ActorLossWithConstantCriticIsEntropyOnly) {
    Rng rng(1);
    SacAgent agent(2, unit_box(1), tiny_config(), rng);
    for (auto& layer : agent.critics[0].net.layers) {
        layer.weight->value.setZero();
        layer.bias->value.setConstant(0.7);
    }
    const Matrix obs = standard_normal(5, 2, rng);
    const Matrix noise = standard_normal(5, 1, rng);
    Eigen::VectorXd logp;
    Tape t;
    const double loss = agent.actor_loss(t, obs, noise, &logp).scalar();
    EXPECT_NEAR(loss, agent.alpha() * logp.mean() - 0.7, 1e-12);
}

TEST(Sac, TerminalTargetsIgnoreBootstrap) {
    Rng rng(2);
    SacAgent agent(3, unit_box(2), tiny_config(), rng);
    auto batch = random_batch(rng, 4, 3, 2);
    batch.terminals.setOnes();
    EXPECT_EQ(agent.td_targets(batch, standard_normal(4, 2, rng)), batch.rewards);
}

TEST(Sac, TemperatureMovesTowardTargetEntropy) {
    Rng rng(3);
    SacAgent agent(2, unit_box(1), tiny_config(), rng);
    Tape t;
    // log pi far above -target entropy means too little entropy: alpha must grow.
    Var loss = agent.alpha_loss(t, Eigen::VectorXd::Constant(4, 5.0));
    agent.log_alpha->zero_grad();
    t.backward(loss);
    EXPECT_LT(agent.log_alpha->grad(0, 0), 0.0);
}

TEST(Sac, BanditPolicyMeanApproachesOptimum) {
    // Single state, terminal after one step, reward -(a - 0.5)^2: the optimum is a = 0.5.
    TrainConfig cfg;
    cfg.hidden = {32, 32};
    cfg.batch_size = 64;
    cfg.buffer_capacity = 2000;
    cfg.actor_frequency = 1;
    cfg.critic_lr = 3e-3;
    cfg.actor_lr = 1e-3;
    Rng rng(0);
    SacAgent agent(1, unit_box(1), cfg, rng);
    ReplayBuffer buf(2000, 1, 1);
    const double s = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const double a = rng.uniform(-1.0, 1.0);
        buf.add(std::span(&s, 1), std::span(&a, 1), -(a - 0.5) * (a - 0.5), std::span(&s, 1), true);
    }
    for (long long step = 1; step <= 10000; ++step) agent.train_step(buf, rng, step);
    const auto dist = agent.actor.distribution(Matrix::Zero(1, 1));
    EXPECT_NEAR(std::tanh(dist.mean(0, 0)), 0.5, 0.1);
}

TEST(ReplayBuffer, RingOverwritesAndSamplesDistinctRows) {
    ReplayBuffer buf(4, 1, 1);
    for (int i = 0; i < 6; ++i) {
        const double v = i;
        buf.add(std::span(&v, 1), std::span(&v, 1), v, std::span(&v, 1), false);
    }
    EXPECT_EQ(buf.size(), 4u);
    Rng rng(0);
    const auto b = buf.sample(4, rng);
    std::vector<double> seen(b.rewards.data(), b.rewards.data() + 4);
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(seen, (std::vector<double>{2, 3, 4, 5}));
    EXPECT_THROW(buf.sample(5, rng), ProtocolError);
}

TEST(Transformer, OutputShapesFollowContract) {
    Rng rng(0);
    TransformerConfig tc{8, 2, 2, 0.1, 4};
    DelayedTransformer net(4, 2, 3, tc, rng);
    Tape t;
    const auto out = net.forward(t, standard_normal(5 * 3, 6, rng), {}, nullptr);
    EXPECT_EQ(out.belief.rows(), 15);
    EXPECT_EQ(out.belief.cols(), 4);
    EXPECT_EQ(out.policy.mean.cols(), 2);
    EXPECT_EQ(out.policy.log_std.cols(), 2);
    EXPECT_THROW(net.forward(t, standard_normal(4, 6, rng), {}, nullptr), ConfigError);
    EXPECT_THROW(net.forward(t, standard_normal(3, 5, rng), {}, nullptr), ConfigError);
}

TEST(Transformer, EvaluationModeIsDeterministic) {
    Rng rng(1);
    DelayedTransformer net(3, 1, 2, TransformerConfig{}, rng);
    const Matrix tokens = standard_normal(4, 4, rng);
    Tape a, b;
    EXPECT_EQ(net.forward(a, tokens, {}, nullptr).belief.value(), net.forward(b, tokens, {}, nullptr).belief.value());
}

TEST(Transformer, CausalMaskIsolatesEarlierPositions) {
    Rng rng(2);
    DelayedTransformer net(3, 2, 4, TransformerConfig{16, 2, 2, 0.0, 4}, rng);
    Matrix tokens = standard_normal(4, 5, rng);
    Tape a;
    const Matrix before = net.forward(a, tokens, {}, nullptr).belief.value();
    tokens(3, 3) += 1.0;  // last buffered action
    Tape b;
    const Matrix after = net.forward(b, tokens, {}, nullptr).belief.value();
    EXPECT_EQ(before.topRows(3), after.topRows(3));
    EXPECT_GT((before.row(3) - after.row(3)).norm(), 1e-6);
}

TEST(DelayedLearner, LossExamples) {
    Rng rng(0);
    auto cfg = tiny_config();
    DelayedLearner learner(1, unit_box(1), 2, cfg, rng);
    for (const auto& p : learner.net.belief_parameters()) p->value.setZero();
    BcBatch batch;
    batch.size = 3;
    batch.tokens = standard_normal(6, 2, rng);
    batch.targets = Matrix::Ones(6, 1);
    Tape t;
    EXPECT_NEAR(learner.belief_loss(t, batch, nullptr).scalar(), 2.0, 1e-15);

    // A reference that always outputs the delayed policy's own distribution gives zero KL.
    GaussianActor reference("ref", 1, 1, {2}, unit_box(1), rng);
    for (auto& l : reference.net.layers) l.weight->value.setZero();
    for (auto& l : learner.net.policy_head.layers) l.weight->value.setZero();
    learner.net.policy_head.layers.back().bias->value = reference.net.layers.back().bias->value;
    learner.net.policy_head.layers.front().bias->value.setZero();
    reference.net.layers.front().bias->value.setZero();
    Tape t2;
    EXPECT_NEAR(learner.policy_loss(t2, batch, reference, nullptr).scalar(), 0.0, 1e-15);
}

TEST(DelayedLearner, BeliefAndKlGradientsMatchFiniteDifferences) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(100 + seed);
        auto cfg = tiny_config();
        cfg.transformer.heads = seed % 2 + 1;
        const std::size_t delay = 1 + seed % 3;
        DelayedLearner learner(2, unit_box(2), delay, cfg, rng);
        GaussianActor reference("ref", 2, 2, {3}, unit_box(2), rng);
        const auto batch = random_bc(rng, 3, delay, 2, 2);
        ParamList belief_params = learner.net.encoder_parameters();
        for (const auto& p : learner.net.belief_parameters()) belief_params.push_back(p);
        const auto rb = gradcheck::gradient_check(belief_params, [&](Tape& t) { return learner.belief_loss(t, batch, nullptr); });
        EXPECT_LE(rb.relative_error, 1e-4) << "belief seed " << seed;
        const auto rk = gradcheck::gradient_check(learner.net.policy_parameters(),
                                                [&](Tape& t) { return learner.policy_loss(t, batch, reference, nullptr); });
        EXPECT_LE(rk.relative_error, 1e-4) << "kl seed " << seed;
    }
}

TEST(DelayedLearner, UpdatesTouchOnlyTheirParameterGroups) {
    Rng rng(4);
    auto cfg = tiny_config();
    cfg.transformer.dropout = 0.1;
    DelayedLearner learner(3, unit_box(1), 2, cfg, rng);
    GaussianActor reference("ref", 3, 1, {4}, unit_box(1), rng);
    const auto batch = random_bc(rng, 4, 2, 3, 1);
    auto snapshot = [](const ParamList& ps) {
        std::vector<Matrix> out;
        for (const auto& p : ps) out.push_back(p->value);
        return out;
    };
    const auto enc = snapshot(learner.net.encoder_parameters());
    const auto bel = snapshot(learner.net.belief_parameters());
    const auto pol = snapshot(learner.net.policy_parameters());
    learner.update_policy(batch, reference, rng, 0);
    EXPECT_EQ(snapshot(learner.net.encoder_parameters()), enc);
    EXPECT_EQ(snapshot(learner.net.belief_parameters()), bel);
    EXPECT_NE(snapshot(learner.net.policy_parameters()), pol);
    const auto pol2 = snapshot(learner.net.policy_parameters());
    learner.update_belief(batch, rng, 0);
    EXPECT_EQ(snapshot(learner.net.policy_parameters()), pol2);
    EXPECT_NE(snapshot(learner.net.encoder_parameters()), enc);
}

TEST(DelayedLearner, NoBeliefRepresentationTrainsEncoderThroughKl) {
    Rng rng(5);
    auto cfg = tiny_config();
    cfg.representation = Representation::no_belief;
    DelayedLearner learner(2, unit_box(1), 2, cfg, rng);
    GaussianActor reference("ref", 2, 1, {4}, unit_box(1), rng);
    const auto batch = random_bc(rng, 4, 2, 2, 1);
    const Matrix before = learner.net.embed.weight->value;
    EXPECT_EQ(learner.update_belief(batch, rng, 0), 0.0);
    EXPECT_EQ(learner.net.embed.weight->value, before);
    learner.update_policy(batch, reference, rng, 0);
    EXPECT_NE(learner.net.embed.weight->value, before);
}

TEST(DelayedLearner, SerializesBcPairsFromStore) {
    envs::TrajectoryStore store(1, 1, 2);
    std::vector<double> s{0.0};
    store.begin_episode(s);
    for (int t = 1; t <= 4; ++t) {
        const double a = 10.0 * t, st = t;
        store.record_step(std::span(&a, 1), 0.0, std::span(&st, 1));
    }
    store.end_episode();
    const auto pairs = envs::bc_pairs(store, 2);
    ASSERT_EQ(pairs.size(), 3u);
    const auto b = make_bc_batch(std::span(pairs).subspan(0, 1));
    // t = 2: x = (s_0, a_0, a_1), targets s_1, s_2
    Matrix tokens(2, 2);
    tokens << 0.0, 10.0, 0.0, 20.0;
    EXPECT_EQ(b.tokens, tokens);
    EXPECT_EQ(b.targets, (Matrix(2, 1) << 1.0, 2.0).finished());
}

TEST(Checkpoint, RoundTripsParametersConfigAndStep) {
    Rng rng(6);
    SacAgent agent(3, unit_box(1), tiny_config(), rng);
    const auto path = (std::filesystem::temp_directory_path() / "vdpo_ckpt_test.bin").string();
    agent.actor.parameters()[0]->adam_m.setConstant(0.5);
    save_checkpoint(path, agent.parameters(), {{"k", "v"}}, 42);
    const auto ckpt = load_checkpoint(path);
    EXPECT_EQ(ckpt.step, 42u);
    EXPECT_EQ(ckpt.config.at("k"), "v");
    Rng other(7);
    SacAgent fresh(3, unit_box(1), tiny_config(), other);
    restore_parameters(ckpt, fresh.parameters());
    for (std::size_t i = 0; i < agent.parameters().size(); ++i) {
        EXPECT_EQ(fresh.parameters()[i]->value, agent.parameters()[i]->value);
        EXPECT_EQ(fresh.parameters()[i]->adam_m, agent.parameters()[i]->adam_m);
    }
    SacAgent wrong(4, unit_box(1), tiny_config(), other);
    EXPECT_THROW(restore_parameters(ckpt, wrong.parameters()), DimensionError);
    std::filesystem::remove(path);
}

TEST(TrainConfig, KeyValueRoundTripAndValidation) {
    TrainConfig c;
    c.set("hidden", "64,32");
    c.set("transformer.embed_dim", "32");
    c.set("target_entropy", "-0.5");
    TrainConfig d;
    for (const auto& [k, v] : c.to_map()) d.set(k, v);
    EXPECT_EQ(d.to_map(), c.to_map());
    EXPECT_THROW(c.set("nope", "1"), ConfigError);
    c.actor_frequency = 0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Training, ZeroStepsLeavesInitialParametersAndNoMetrics) {
    auto cfg = tiny_config();
    cfg.total_steps = 0;
    envs::DelayConfig delay;
    delay.max_delay = 1;
    const auto res = vdpo_train(cfg, "point_mass", delay, 3);
    EXPECT_TRUE(res.records.empty());
    Rng init(mix_seed(3, 11));
    SacAgent fresh(4, unit_box(2), cfg, init);
    EXPECT_EQ(fresh.actor.parameters()[0]->value, res.reference->actor.parameters()[0]->value);
}

TEST(Training, AugmentedSacWithoutDelayIsPlainSac) {
    auto cfg = tiny_config();
    cfg.total_steps = 300;
    cfg.learning_starts = 100;
    cfg.eval_interval = 150;
    cfg.eval_episodes = 1;
    envs::DelayConfig none;
    none.max_delay = 0;
    const auto a = augmented_sac_train(cfg, "point_mass", none, 9);
    const auto b = sac_train(cfg, "point_mass", 9);
    EXPECT_EQ(a.critic_losses, b.critic_losses);
    EXPECT_EQ(a.critic_losses.size(), 200u);
    envs::DelayConfig two;
    two.max_delay = 2;
    const auto c = augmented_sac_train(cfg, "point_mass", two, 9);
    EXPECT_EQ(c.agent->actor.net.in_dim(), 4 + 2 * 2);
}

TEST(Training, IdenticalSeedsGiveIdenticalRecords) {
    auto cfg = tiny_config();
    cfg.total_steps = 400;
    cfg.learning_starts = 100;
    cfg.eval_interval = 200;
    cfg.eval_episodes = 2;
    cfg.policy_decoder_frequency = 100;
    cfg.policy_decoder_iterations = 3;
    cfg.bc_batch_size = 8;
    envs::DelayConfig delay;
    delay.max_delay = 2;
    const auto a = vdpo_train(cfg, "point_mass", delay, 5);
    const auto b = vdpo_train(cfg, "point_mass", delay, 5);
    ASSERT_EQ(a.records.size(), 4u);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ(a.records[i].return_mean, b.records[i].return_mean);
        EXPECT_EQ(a.records[i].diagnostics, b.records[i].diagnostics);
    }
}
