#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ballbot/checkpoint.hpp"
#include "ballbot/ddpg.hpp"

using namespace ballbot;
using ddpg::DdpgAgent;
using ddpg::DdpgHyper;
using ddpg::Mlp;
using ddpg::NoiseProcess;
using ddpg::ReplayBuffer;
using ddpg::Transition;

namespace {

DdpgHyper tiny_hyper() {
    DdpgHyper h;
    h.hidden_sizes = {3, 2};
    h.minibatch = 4;
    h.buffer_capacity = 64;
    h.action_amplitude = 2.0;
    h.actor_final_scale = 1.0;
    h.threads = 1;
    return h;
}

Transition random_transition(Rng& rng, int obs_dim, int act_dim, bool done) {
    Transition tr;
    for (int i = 0; i < obs_dim; ++i) tr.s.push_back(rng.uniform(-1.0, 1.0));
    for (int i = 0; i < act_dim; ++i) tr.a.push_back(rng.uniform(-2.0, 2.0));
    for (int i = 0; i < obs_dim; ++i) tr.s_next.push_back(rng.uniform(-1.0, 1.0));
    tr.r = rng.uniform(-1.0, 1.0);
    tr.done = done;
    return tr;
}

std::vector<const Transition*> as_batch(const std::vector<Transition>& v) {
    std::vector<const Transition*> b;
    for (const auto& t : v) b.push_back(&t);
    return b;
}

void fill_params(Mlp& net, double value) { std::fill(net.params().begin(), net.params().end(), value); }

double gradcheck_rel(double analytic, double fd) {
    return std::abs(analytic - fd) / std::max(1.0, std::abs(analytic) + std::abs(fd));
}

// A one-dimensional task whose optimum is the zero action: every step costs
// the squared action. Observation is a constant.
class QuadraticActionEnv : public ddpg::Environment {
  public:
    int observation_dim() const override { return 1; }
    int action_dim() const override { return 1; }
    std::vector<double> reset(Rng&) override {
        t_ = 0;
        return {1.0};
    }
    StepResult step(const std::vector<double>& a) override {
        ++t_;
        StepResult r;
        r.obs = {1.0};
        r.reward = -a[0] * a[0];
        r.done = false;
        r.episode_end = t_ >= 5;
        return r;
    }

  private:
    int t_ = 0;
};

}  // namespace

TEST_CASE("zero networks give zero outputs") {
    Rng rng(1);
    DdpgAgent agent(3, 2, tiny_hyper(), rng);
    fill_params(agent.actor(), 0.0);
    fill_params(agent.critic(), 0.0);
    const auto a = agent.actor_forward({0.3, -0.5, 0.9});
    CHECK(a[0] == 0.0);
    CHECK(a[1] == 0.0);
    CHECK(agent.critic_forward({0.3, -0.5, 0.9}, {1.0, -1.0}) == 0.0);
}

TEST_CASE("forward passes are deterministic") {
    Rng rng(2);
    DdpgAgent agent(3, 2, tiny_hyper(), rng);
    const std::vector<double> s{0.1, 0.2, -0.7};
    const auto a1 = agent.actor_forward(s);
    const auto a2 = agent.actor_forward(s);
    CHECK(a1 == a2);
    CHECK(agent.critic_forward(s, a1) == agent.critic_forward(s, a1));
}

TEST_CASE("hand-computed single-hidden-unit network") {
    // One normalized hidden unit: its pre-activation normalizes to exactly
    // zero, so only the normalization offset reaches the next layer.
    Mlp net({1, 1, 1}, true, ddpg::Activation::kTanh, ddpg::Activation::kTanh);
    auto& p = net.params();
    // layer 0: w, b, gain, offset ; layer 1: w, b
    p[0] = 0.7;   // w1 (irrelevant by the convention)
    p[1] = 0.3;   // b1 (irrelevant)
    p[2] = 1.4;   // gain (irrelevant: multiplies zero)
    p[3] = 0.6;   // offset
    p[4] = 1.1;   // w2
    p[5] = -0.2;  // b2
    const double expected = std::tanh(1.1 * std::tanh(0.6) - 0.2);
    CHECK(net.forward({0.5})[0] == Catch::Approx(expected).epsilon(1e-15));
    // independent of the input and of the first layer's weight
    CHECK(net.forward({-3.0})[0] == Catch::Approx(expected).epsilon(1e-15));
    p[0] = -5.0;
    p[1] = 2.0;
    CHECK(net.forward({0.5})[0] == Catch::Approx(expected).epsilon(1e-15));
}

TEST_CASE("networks reject mismatched shapes") {
    Rng rng(3);
    DdpgAgent agent(3, 2, tiny_hyper(), rng);
    CHECK_THROWS_AS(agent.actor_forward({1.0, 2.0}), ShapeMismatch);
    CHECK_THROWS_AS(agent.critic_forward({1.0, 2.0, 3.0}, {1.0}), ShapeMismatch);
    std::vector<Transition> bad{Transition{{1.0}, {0.0, 0.0}, 0.0, {1.0}, false}};
    CHECK_THROWS_AS(agent.critic_update(as_batch(bad)), ShapeMismatch);
}

TEST_CASE("critic and actor gradients match finite differences") {
    const double h = 1e-5;
    int seeds_checked = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        DdpgHyper hyper = tiny_hyper();
        DdpgAgent agent(2, 1, hyper, rng);
        std::vector<Transition> batch_data;
        batch_data.push_back(random_transition(rng, 2, 1, false));
        batch_data.push_back(random_transition(rng, 2, 1, true));
        const auto batch = as_batch(batch_data);

        {
            const auto [loss, grad] = agent.critic_loss_gradient(batch);
            auto& params = agent.critic().params();
            for (std::size_t i = 0; i < params.size(); ++i) {
                const double keep = params[i];
                params[i] = keep + h;
                const double lp = agent.critic_loss_gradient(batch).first;
                params[i] = keep - h;
                const double lm = agent.critic_loss_gradient(batch).first;
                params[i] = keep;
                const double fd = (lp - lm) / (2.0 * h);
                REQUIRE(gradcheck_rel(grad[i], fd) < 1e-4);
                if (std::abs(fd) > 1e-3) REQUIRE(std::abs(grad[i] - fd) < 1e-4 * std::abs(fd));
            }
            CHECK(std::isfinite(loss));
        }
        {
            const auto [obj, grad] = agent.actor_objective_gradient(batch);
            auto& params = agent.actor().params();
            for (std::size_t i = 0; i < params.size(); ++i) {
                const double keep = params[i];
                params[i] = keep + h;
                const double jp = agent.actor_objective_gradient(batch).first;
                params[i] = keep - h;
                const double jm = agent.actor_objective_gradient(batch).first;
                params[i] = keep;
                const double fd = (jp - jm) / (2.0 * h);
                REQUIRE(gradcheck_rel(grad[i], fd) < 1e-4);
                if (std::abs(fd) > 1e-3) REQUIRE(std::abs(grad[i] - fd) < 1e-4 * std::abs(fd));
            }
            CHECK(std::isfinite(obj));
        }
        ++seeds_checked;
    }
    CHECK(seeds_checked == 100);
}

TEST_CASE("striped gradients are identical with and without threads") {
    Rng rng_a(77);
    Rng rng_b(77);
    DdpgHyper h1 = tiny_hyper();
    h1.threads = 1;
    DdpgHyper h4 = tiny_hyper();
    h4.threads = 4;
    DdpgAgent a1(2, 1, h1, rng_a);
    DdpgAgent a4(2, 1, h4, rng_b);
    Rng rng(5);
    std::vector<Transition> data;
    for (int i = 0; i < 32; ++i) data.push_back(random_transition(rng, 2, 1, i % 5 == 0));
    const auto batch = as_batch(data);
    const auto [l1, g1] = a1.critic_loss_gradient(batch);
    const auto [l4, g4] = a4.critic_loss_gradient(batch);
    CHECK(l1 == l4);
    CHECK(g1 == g4);
    const auto [j1, ag1] = a1.actor_objective_gradient(batch);
    const auto [j4, ag4] = a4.actor_objective_gradient(batch);
    CHECK(j1 == j4);
    CHECK(ag1 == ag4);
}

TEST_CASE("critic already matching the targets sees zero loss and no movement") {
    Rng rng(6);
    DdpgHyper hyper = tiny_hyper();
    hyper.weight_decay = 0.0;
    DdpgAgent agent(2, 1, hyper, rng);
    fill_params(agent.critic(), 0.0);
    fill_params(agent.critic_target(), 0.0);
    fill_params(agent.actor_target(), 0.0);
    std::vector<Transition> data;
    for (int i = 0; i < 4; ++i) {
        Transition tr = random_transition(rng, 2, 1, false);
        tr.r = 0.0;  // y = 0 + gamma * Q'(s', mu'(s')) = 0 = Q(s, a)
        data.push_back(tr);
    }
    const auto before = agent.critic().params();
    const double loss = agent.critic_update(as_batch(data));
    CHECK(loss == 0.0);
    CHECK(agent.critic().params() == before);
}

TEST_CASE("all-terminal batches ignore the target networks") {
    Rng rng(7);
    DdpgAgent agent(2, 1, tiny_hyper(), rng);
    std::vector<Transition> data;
    for (int i = 0; i < 6; ++i) data.push_back(random_transition(rng, 2, 1, true));
    const auto batch = as_batch(data);
    const auto [loss1, grad1] = agent.critic_loss_gradient(batch);
    // scrambling the targets must change nothing
    Rng scramble(8);
    for (auto& p : agent.critic_target().params()) p = scramble.uniform(-5.0, 5.0);
    for (auto& p : agent.actor_target().params()) p = scramble.uniform(-5.0, 5.0);
    const auto [loss2, grad2] = agent.critic_loss_gradient(batch);
    CHECK(loss1 == loss2);
    CHECK(grad1 == grad2);
}

TEST_CASE("actor update leaves weights alone when the critic ignores the action") {
    Rng rng(9);
    DdpgAgent agent(2, 1, tiny_hyper(), rng);
    // zero the first-layer columns that read the action input
    const auto& l0 = agent.critic().layers()[0];
    auto& cp = agent.critic().params();
    for (int j = 0; j < l0.out; ++j)
        for (int i = 2; i < l0.in; ++i) cp[l0.w_off + static_cast<std::size_t>(j) * l0.in + i] = 0.0;
    const auto before = agent.actor().params();
    agent.actor_update(as_batch({random_transition(rng, 2, 1, false)}));
    CHECK(agent.actor().params() == before);
}

TEST_CASE("ascent against a quadratic action penalty pulls the action toward zero") {
    // Toy critic Q(s, a) = -|a|^2, differentiated by hand; one plain gradient
    // ascent step through the actor must shrink the action.
    Rng rng(10);
    Mlp actor({2, 3, 1}, true, ddpg::Activation::kTanh, ddpg::Activation::kTanh);
    actor.init_uniform_fanin(rng);
    const std::vector<double> s{0.4, -0.2};
    Mlp::Cache cache;
    const double a0 = actor.forward_cached(s, cache)[0];
    std::vector<double> grad(actor.params().size(), 0.0);
    actor.backward(cache, {-2.0 * a0}, &grad, nullptr);  // dQ/da = -2a
    const double lr = 1e-2;
    for (std::size_t i = 0; i < grad.size(); ++i) actor.params()[i] += lr * grad[i];
    const double a1 = actor.forward(s)[0];
    CHECK(std::abs(a1) < std::abs(a0));
}

TEST_CASE("replay buffer evicts FIFO") {
    const std::size_t capacity = 50;
    const int extra = 13;
    ReplayBuffer buffer(capacity);
    for (int i = 0; i < static_cast<int>(capacity) + extra; ++i)
        buffer.push(Transition{{0.0}, {0.0}, static_cast<double>(i), {0.0}, false});
    REQUIRE(buffer.size() == capacity);
    std::multiset<double> contents;
    for (std::size_t i = 0; i < capacity; ++i) contents.insert(buffer.slot(i).r);
    std::multiset<double> expected;
    for (int i = extra; i < static_cast<int>(capacity) + extra; ++i)
        expected.insert(static_cast<double>(i));
    CHECK(contents == expected);
}

TEST_CASE("replay sampling is uniform with replacement") {
    ReplayBuffer buffer(8);
    for (int i = 0; i < 8; ++i)
        buffer.push(Transition{{0.0}, {0.0}, static_cast<double>(i), {0.0}, false});
    Rng rng(11);
    std::array<int, 8> counts{};
    const int draws = 80000;
    int batches = draws / 16;
    for (int b = 0; b < batches; ++b) {
        const auto batch = buffer.sample(rng, 16);
        REQUIRE(batch.size() == 16);
        for (const auto* t : batch) counts[static_cast<int>(t->r)]++;
    }
    for (int c : counts) CHECK(std::abs(c - draws / 8) < draws / 8 / 10);
}

TEST_CASE("soft target updates") {
    Rng rng(12);
    DdpgAgent agent(2, 1, tiny_hyper(), rng);
    Mlp target = agent.actor_target();
    SECTION("tau = 1 copies the online network") {
        DdpgAgent::soft_update(target, agent.actor(), 1.0);
        CHECK(target.params() == agent.actor().params());
    }
    SECTION("tau = 0 is the identity") {
        const auto before = target.params();
        DdpgAgent::soft_update(target, agent.actor(), 0.0);
        CHECK(target.params() == before);
    }
    SECTION("distance to a frozen online net decays geometrically") {
        const double tau = 0.125;
        Rng jitter(99);
        for (auto& p : target.params()) p += jitter.uniform(-0.5, 0.5);
        auto norm_diff = [&] {
            double acc = 0.0;
            for (std::size_t i = 0; i < target.params().size(); ++i) {
                const double d = target.params()[i] - agent.actor().params()[i];
                acc += d * d;
            }
            return std::sqrt(acc);
        };
        const double d0 = norm_diff();
        REQUIRE(d0 > 0.0);
        const int n = 20;
        for (int i = 0; i < n; ++i) DdpgAgent::soft_update(target, agent.actor(), tau);
        CHECK(norm_diff() == Catch::Approx(std::pow(1.0 - tau, n) * d0).epsilon(1e-10));
    }
}

TEST_CASE("adam step matches the hand-unrolled recurrence") {
    // quadratic f(x) = sum c_i x_i^2 / 2, plus coupled L2 decay
    const std::vector<double> c{1.0, 4.0, 0.25};
    std::vector<double> x{1.0, -2.0, 0.5};
    const double lr = 0.01, wd = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ddpg::Adam opt(x.size(), lr, wd, b1, b2, eps);

    std::vector<double> xr = x;
    std::vector<double> m(x.size(), 0.0), v(x.size(), 0.0);
    for (int t = 1; t <= 5; ++t) {
        std::vector<double> grad(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) grad[i] = c[i] * x[i];
        opt.step(x, grad);

        for (std::size_t i = 0; i < xr.size(); ++i) {
            const double g = c[i] * xr[i] + wd * xr[i];
            m[i] = b1 * m[i] + (1.0 - b1) * g;
            v[i] = b2 * v[i] + (1.0 - b2) * g * g;
            const double mh = m[i] / (1.0 - std::pow(b1, t));
            const double vh = v[i] / (1.0 - std::pow(b2, t));
            xr[i] -= lr * mh / (std::sqrt(vh) + eps);
        }
        for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(x[i] == Catch::Approx(xr[i]).margin(1e-12));
    }
}

TEST_CASE("exploration noise") {
    SECTION("zero sigma reduces to the deterministic policy") {
        Rng rng(13);
        DdpgHyper hyper = tiny_hyper();
        DdpgAgent agent(2, 1, hyper, rng);
        NoiseProcess noise(NoiseProcess::Kind::kOrnsteinUhlenbeck, 1, 0.0);
        Rng step_rng(14);
        const std::vector<double> s{0.5, -0.5};
        CHECK(agent.select_action(s, noise, step_rng) == agent.actor_forward(s));
    }
    SECTION("same seed gives the identical sequence") {
        NoiseProcess n1(NoiseProcess::Kind::kOrnsteinUhlenbeck, 2, 0.3);
        NoiseProcess n2(NoiseProcess::Kind::kOrnsteinUhlenbeck, 2, 0.3);
        Rng r1(15), r2(15);
        for (int i = 0; i < 100; ++i) REQUIRE(n1.sample(r1) == n2.sample(r2));
    }
    SECTION("actions are clipped to the amplitude") {
        Rng rng(16);
        DdpgHyper hyper = tiny_hyper();
        DdpgAgent agent(2, 1, hyper, rng);
        NoiseProcess noise(NoiseProcess::Kind::kGaussian, 1, 50.0);
        Rng step_rng(17);
        for (int i = 0; i < 50; ++i) {
            const auto a = agent.select_action({0.1, 0.1}, noise, step_rng);
            REQUIRE(std::abs(a[0]) <= hyper.action_amplitude);
        }
    }
    SECTION("stationary statistics of the OU process") {
        const double theta = 0.15, sigma = 0.2, dt = 0.05;
        NoiseProcess noise(NoiseProcess::Kind::kOrnsteinUhlenbeck, 1, sigma, theta, dt);
        // the discretized stationary variance stays within 1% of the
        // continuous-time sigma^2 / (2 theta)
        const double continuum = sigma * sigma / (2.0 * theta);
        REQUIRE(std::abs(noise.stationary_variance() - continuum) < 0.01 * continuum);

        Rng rng(18);
        const int burn = 20000;
        for (int i = 0; i < burn; ++i) noise.sample(rng);
        const long n = 30000000;
        double sum = 0.0, sumsq = 0.0;
        for (long i = 0; i < n; ++i) {
            const double x = noise.sample(rng)[0];
            sum += x;
            sumsq += x * x;
        }
        const double mean = sum / n;
        const double var = sumsq / n - mean * mean;
        CHECK(std::abs(mean) < 0.01 * std::sqrt(continuum));
        CHECK(std::abs(var - continuum) < 0.01 * continuum);
    }
}

TEST_CASE("training loop") {
    SECTION("zero episodes leave the initial weights untouched") {
        Rng rng(19);
        DdpgAgent agent(1, 1, tiny_hyper(), rng);
        const auto actor_before = agent.actor().params();
        QuadraticActionEnv env;
        ReplayBuffer buffer(64);
        Rng train_rng(20);
        const auto result = ddpg::train(env, agent, buffer, train_rng, 0, 5);
        CHECK(result.curve.empty());
        CHECK(agent.actor().params() == actor_before);
    }
    SECTION("zero learning rates freeze the weights") {
        Rng rng(21);
        DdpgHyper hyper = tiny_hyper();
        hyper.actor_lr = 0.0;
        hyper.critic_lr = 0.0;
        hyper.weight_decay = 0.0;
        DdpgAgent agent(1, 1, hyper, rng);
        const auto actor_before = agent.actor().params();
        const auto critic_before = agent.critic().params();
        QuadraticActionEnv env;
        ReplayBuffer buffer(hyper.buffer_capacity);
        Rng train_rng(22);
        ddpg::train(env, agent, buffer, train_rng, 20, 5);
        CHECK(agent.actor().params() == actor_before);
        CHECK(agent.critic().params() == critic_before);
    }
    SECTION("no updates happen before the buffer can fill a minibatch") {
        Rng rng(23);
        DdpgHyper hyper = tiny_hyper();
        hyper.minibatch = 1000;  // larger than every transition we will see
        DdpgAgent agent(1, 1, hyper, rng);
        const auto actor_before = agent.actor().params();
        QuadraticActionEnv env;
        ReplayBuffer buffer(hyper.buffer_capacity);
        Rng train_rng(24);
        ddpg::train(env, agent, buffer, train_rng, 10, 5);
        CHECK(agent.actor().params() == actor_before);
    }
    SECTION("return improves on the quadratic-action task") {
        Rng rng(25);
        DdpgHyper hyper;
        hyper.hidden_sizes = {8, 8};
        hyper.minibatch = 16;
        hyper.buffer_capacity = 4000;
        hyper.actor_lr = 1e-3;
        hyper.critic_lr = 1e-3;
        hyper.gamma = 0.9;
        hyper.tau_soft = 0.01;
        hyper.action_amplitude = 1.0;
        hyper.actor_final_scale = 1.0;
        hyper.ou_sigma = 0.3;
        hyper.threads = 1;
        DdpgAgent agent(1, 1, hyper, rng);
        QuadraticActionEnv env;
        ReplayBuffer buffer(hyper.buffer_capacity);
        Rng train_rng(26);
        const auto result = ddpg::train(env, agent, buffer, train_rng, 100, 5);
        REQUIRE(result.curve.size() == 100);
        auto mean_ret = [&](int from, int to) {
            double acc = 0.0;
            for (int i = from; i < to; ++i) acc += result.curve[i].ret;
            return acc / (to - from);
        };
        const double early = mean_ret(0, 25);
        const double late = mean_ret(75, 100);
        INFO("early " << early << " late " << late);
        CHECK(late > early);
        // the learned deterministic action sits near the optimum
        CHECK(std::abs(agent.actor_forward({1.0})[0]) < 0.2);
    }
    SECTION("identical seeds give identical curves and weights") {
        auto run = [] {
            Rng rng(27);
            DdpgHyper hyper = tiny_hyper();
            hyper.threads = 4;
            DdpgAgent agent(1, 1, hyper, rng);
            QuadraticActionEnv env;
            ReplayBuffer buffer(hyper.buffer_capacity);
            Rng train_rng(28);
            auto result = ddpg::train(env, agent, buffer, train_rng, 15, 5);
            return std::pair{std::move(agent), std::move(result)};
        };
        auto [agent1, res1] = run();
        auto [agent2, res2] = run();
        REQUIRE(res1.curve.size() == res2.curve.size());
        for (std::size_t i = 0; i < res1.curve.size(); ++i) {
            REQUIRE(res1.curve[i].ret == res2.curve[i].ret);
            REQUIRE(res1.curve[i].mean_critic_loss == res2.curve[i].mean_critic_loss);
        }
        CHECK(agent1.actor().params() == agent2.actor().params());
        CHECK(agent1.critic().params() == agent2.critic().params());
        CHECK(res1.final_rng_state == res2.final_rng_state);
    }
}

TEST_CASE("non-finite parameters surface as NonFiniteLoss") {
    Rng rng(29);
    DdpgAgent agent(2, 1, tiny_hyper(), rng);
    agent.critic().params()[0] = std::numeric_limits<double>::quiet_NaN();
    std::vector<Transition> data{random_transition(rng, 2, 1, false)};
    CHECK_THROWS_AS(agent.critic_update(as_batch(data)), NonFiniteLoss);
}

TEST_CASE("checkpoint round trip preserves the whole learner") {
    Rng rng(30);
    DdpgHyper hyper = tiny_hyper();
    DdpgAgent agent(3, 2, hyper, rng);
    // push the learner away from the initial state first
    std::vector<Transition> data;
    for (int i = 0; i < 8; ++i) data.push_back(random_transition(rng, 3, 2, i % 3 == 0));
    agent.critic_update(as_batch(data));
    agent.actor_update(as_batch(data));
    agent.soft_update_targets();

    const std::string path = "checkpoint_test.json";
    ddpg::save_checkpoint(path, agent, Rng(31).serialize());
    const auto loaded = ddpg::load_checkpoint(path);
    CHECK(loaded.agent.actor().params() == agent.actor().params());
    CHECK(loaded.agent.critic().params() == agent.critic().params());
    CHECK(loaded.agent.actor_target().params() == agent.actor_target().params());
    CHECK(loaded.agent.critic_target().params() == agent.critic_target().params());
    CHECK(loaded.agent.actor_opt().first_moment() == agent.actor_opt().first_moment());
    CHECK(loaded.agent.critic_opt().second_moment() == agent.critic_opt().second_moment());
    CHECK(loaded.agent.critic_opt().step_count() == agent.critic_opt().step_count());
    CHECK(loaded.agent.hyper().minibatch == hyper.minibatch);
    CHECK(loaded.rng_state == Rng(31).serialize());
    // same behavior after reload
    const std::vector<double> s{0.2, -0.4, 0.6};
    CHECK(loaded.agent.actor_forward(s) == agent.actor_forward(s));
    std::remove(path.c_str());
}
