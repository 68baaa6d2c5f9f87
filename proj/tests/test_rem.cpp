#include <doctest.h>

#include <cmath>
#include <functional>

#include "remirl/error.hpp"
#include "remirl/numeric.hpp"
#include "remirl/rem.hpp"
#include "remirl/simulator.hpp"
#include "support.hpp"

using namespace remirl;
using namespace remirl::testing;

namespace {

DyadicEvent ev(std::size_t s, std::size_t r, std::optional<double> t = std::nullopt) {
    return {actor(s), actor(r), 0, t, {}};
}

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::InvalidArgument;
}

// Probability of the observed sequence, built by explicit recursion over the
// prefix tree: P(a_1..a_M) = P(a_1) * P(a_2..a_M | a_1).
double sequence_probability(const std::vector<DyadicEvent>& observed, std::size_t depth,
                            std::vector<DyadicEvent>& prefix, const RemModel& model,
                            const ActionSpace& space) {
    if (depth == observed.size()) return 1.0;
    double total = 0.0;
    double chosen = 0.0;
    for (const auto& a : space.actions()) {
        const double w = rate(a, prefix, model);
        total += w;
        if (a == observed[depth].triple()) chosen = w;
    }
    prefix.push_back(observed[depth]);
    const double rest = sequence_probability(observed, depth + 1, prefix, model, space);
    prefix.pop_back();
    return chosen / total * rest;
}

} // namespace

TEST_CASE("rate examples") {
    const std::vector<DyadicEvent> prefix{ev(0, 1)};
    const RemModel zero{parse_statistic_specs("reciprocity,inertia"), Eigen::Vector2d::Zero()};
    CHECK(rate({actor(1), actor(0), 0}, prefix, zero) == 1.0);

    const RemModel ln3{parse_statistic_specs("reciprocity"), Eigen::VectorXd::Constant(1, std::log(3.0))};
    CHECK(rate({actor(1), actor(0), 0}, prefix, ln3) == doctest::Approx(3.0).epsilon(1e-15));

    const RemModel mixed{parse_statistic_specs("reciprocity,inertia"), Eigen::Vector2d(2.0, -1.0)};
    CHECK(rate({actor(0), actor(2), 0}, prefix, mixed) == 1.0);
}

TEST_CASE("ordinal examples") {
    const auto space = enumerate_action_space(2, 1);
    const RemModel model{parse_statistic_specs("reciprocity"), Eigen::VectorXd::Constant(1, std::log(3.0))};
    // After 0->1, the reciprocal 1->0 has u = 1 and 0->1 has u = 0.
    const auto h = validate_history({ev(0, 1), ev(1, 0)});
    CHECK(ordinal_loglik(h, model, space) == doctest::Approx(std::log(0.5) + std::log(0.75)).epsilon(1e-14));

    CHECK(ordinal_loglik(validate_history({}), model, space) == 0.0);

    const auto big = enumerate_action_space(4, 2);
    const RemModel null{parse_statistic_specs("reciprocity,inertia,sender_activity"), Eigen::Vector3d::Zero()};
    Rng rng(1);
    const auto history = random_history(rng, big, 37);
    CHECK(ordinal_loglik(history, null, big) == doctest::Approx(-37.0 * std::log(24.0)).epsilon(1e-15));
}

TEST_CASE("timestamped examples") {
    const auto space = enumerate_action_space(2, 1);
    const RemModel null{parse_statistic_specs("inertia"), Eigen::VectorXd::Zero(1)};
    CHECK(timestamped_loglik(validate_history({ev(0, 1, 1.0)}, 1.0), null, space) == -2.0);
    // A trailing window adds its survival term.
    CHECK(timestamped_loglik(validate_history({ev(0, 1, 1.0)}, 3.5), null, space) == -7.0);
}

TEST_CASE("timestamp rescaling matches direct recomputation") {
    Rng rng(9);
    const auto space = enumerate_action_space(3, 1);
    for (int trial = 0; trial < 10; ++trial) {
        const RemModel model{random_specs(rng, 2), random_theta(rng, 2)};
        const auto h = random_history(rng, space, 12, true);
        const double c = uniform_real(rng, 0.2, 5.0);
        std::vector<DyadicEvent> scaled = h.events();
        for (auto& e : scaled) e.time = *e.time * c;
        const auto hs = validate_history(scaled, *h.end_time() * c);
        CHECK(timestamped_loglik(hs, model, space) ==
              doctest::Approx(brute_force_timestamped(hs, model, space)).epsilon(1e-12));
        CHECK(timestamped_loglik(h, model, space) ==
              doctest::Approx(brute_force_timestamped(h, model, space)).epsilon(1e-12));
    }
}

TEST_CASE("likelihood errors") {
    const auto space = enumerate_action_space(3, 1);
    const RemModel model{parse_statistic_specs("inertia"), Eigen::VectorXd::Zero(1)};
    CHECK(code_of([&] { ordinal_loglik(validate_history({ev(0, 3)}), model, space); }) ==
          Errc::EventOutsideActionSpace);
    const auto masked = enumerate_action_space(3, 1, pair_permissibility({{actor(0), actor(1)}}));
    CHECK(code_of([&] { ordinal_loglik(validate_history({ev(1, 0)}), model, masked); }) ==
          Errc::EventOutsideActionSpace);
    CHECK(code_of([&] { timestamped_loglik(validate_history({ev(0, 1)}), model, space); }) ==
          Errc::MissingTimestamps);
    CHECK(code_of([&] { timestamped_loglik(validate_history({ev(0, 1, 1.0)}), model, space); }) ==
          Errc::MissingEndTime);
}

TEST_CASE("design likelihood equals the scalar-path oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const auto space = enumerate_action_space(uniform_int(rng, 2, 4), uniform_int(rng, 1, 2));
        const auto d = uniform_int(rng, 1, 3);
        const RemModel model{random_specs(rng, d), random_theta(rng, d)};
        const auto h = random_history(rng, space, uniform_int(rng, 0, 30), true);
        CHECK(ordinal_loglik(h, model, space) ==
              doctest::Approx(brute_force_ordinal(h, model, space)).epsilon(1e-12));
        CHECK(timestamped_loglik(h, model, space) ==
              doctest::Approx(brute_force_timestamped(h, model, space)).epsilon(1e-12));
    }
}

TEST_CASE("small histories match explicit sequence probabilities") {
    Rng rng(12);
    for (int trial = 0; trial < 60; ++trial) {
        const auto space = enumerate_action_space(2, 1);
        const auto three = enumerate_action_space(3, 1, pair_permissibility({{actor(0), actor(1)},
                                                                             {actor(1), actor(2)},
                                                                             {actor(2), actor(0)}}));
        const auto& use = trial % 2 == 0 ? space : three;
        const auto d = uniform_int(rng, 1, 2);
        const RemModel model{random_specs(rng, d), random_theta(rng, d)};
        const auto h = random_history(rng, use, uniform_int(rng, 1, 4));
        std::vector<DyadicEvent> prefix;
        const double p = sequence_probability(h.events(), 0, prefix, model, use);
        CHECK(ordinal_loglik(h, model, use) == doctest::Approx(std::log(p)).epsilon(1e-13));
    }
}

TEST_CASE("gradients match central differences") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const auto space = enumerate_action_space(uniform_int(rng, 2, 4), uniform_int(rng, 1, 2));
        const auto d = uniform_int(rng, 1, 3);
        const RemModel model{random_specs(rng, d), random_theta(rng, d, 1.0)};
        const auto h = random_history(rng, space, uniform_int(rng, 1, 40), true);
        for (auto mode : {LikelihoodMode::Ordinal, LikelihoodMode::Timestamped}) {
            const auto g = loglik_gradient(h, model, space, mode);
            const auto fd = central_difference(
                [&](const Eigen::VectorXd& x) {
                    const RemModel m{model.specs, x};
                    return mode == LikelihoodMode::Ordinal ? brute_force_ordinal(h, m, space)
                                                           : brute_force_timestamped(h, m, space);
                },
                model.theta);
            CHECK((g - fd).lpNorm<Eigen::Infinity>() / std::max(1.0, g.lpNorm<Eigen::Infinity>()) < 1e-6);
        }
    }
}

TEST_CASE("gradient is positive when realized events always maximize the statistic") {
    // Every event reciprocates the one before.
    const auto space = enumerate_action_space(3, 1);
    const auto h = validate_history({ev(0, 1), ev(1, 0), ev(0, 1), ev(1, 0), ev(0, 1)});
    const RemModel model{parse_statistic_specs("reciprocity"), Eigen::VectorXd::Zero(1)};
    CHECK(loglik_gradient(h, model, space, LikelihoodMode::Ordinal)(0) > 0.0);
}

TEST_CASE("per-step shift leaves the ordinal term unchanged") {
    Rng rng(14);
    const auto space = enumerate_action_space(4, 1);
    const auto specs = parse_statistic_specs("reciprocity,inertia,sender_activity");
    const auto h = random_history(rng, space, 20);
    auto design = build_design(h, specs, space);
    const Eigen::Vector3d theta = random_theta(rng, 3);
    const double before = ordinal_loglik(design, theta);
    for (Eigen::Index i = 0; i < design.n_steps; ++i) {
        const Eigen::RowVector3d c = random_theta(rng, 3, 5.0).transpose();
        design.stats.middleRows(i * design.n_actions, design.n_actions).rowwise() += c;
    }
    CHECK(ordinal_loglik(design, theta) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("ordinal step probabilities sum to one and the loglik is non-positive") {
    Rng rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        const auto space = enumerate_action_space(uniform_int(rng, 2, 5), 1);
        const auto specs = random_specs(rng, 2);
        const Eigen::VectorXd theta = random_theta(rng, 2, 4.0);
        const auto design = build_design(random_history(rng, space, 15), specs, space);
        for (Eigen::Index i = 0; i < design.n_steps; ++i) {
            const Eigen::VectorXd scores = design.step(i) * theta;
            CHECK(softmax(scores).sum() == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK(ordinal_loglik(design, theta) <= 0.0);
    }
}

TEST_CASE("large scores stay finite") {
    const auto space = enumerate_action_space(3, 1);
    const auto h = validate_history({ev(0, 1, 1.0), ev(1, 0, 2.0), ev(0, 1, 2.5)}, 3.0);
    const RemModel model{parse_statistic_specs("inertia_count"), Eigen::VectorXd::Constant(1, 400.0)};
    CHECK(std::isfinite(ordinal_loglik(h, model, space)));
}

TEST_SUITE("fit_mle") {
    TEST_CASE("null recovery") {
        const auto space = enumerate_action_space(4, 1);
        SimConfig config;
        config.theta = Eigen::Vector2d::Zero();
        config.specs = parse_statistic_specs("reciprocity,inertia");
        config.n_events = 3000;
        config.seed = 21;
        const auto fit = fit_mle(simulate_rem(space, config), config.specs, space);
        REQUIRE(fit.converged);
        REQUIRE(fit.std_errors);
        CHECK((fit.theta_hat.array().abs() <= 3.0 * fit.std_errors->array()).all());
        CHECK(fit.gradient_norm <= 1e-8);
    }

    TEST_CASE("log-likelihood trace never decreases") {
        Rng rng(22);
        for (int trial = 0; trial < 10; ++trial) {
            const auto space = enumerate_action_space(uniform_int(rng, 3, 5), 1);
            SimConfig config;
            config.specs = random_specs(rng, 2);
            config.theta = random_theta(rng, 2, 1.5);
            config.n_events = 400;
            config.seed = static_cast<std::uint64_t>(trial);
            config.timestamps = true;
            const auto h = simulate_rem(space, config);
            for (auto mode : {LikelihoodMode::Ordinal, LikelihoodMode::Timestamped}) {
                FitConfig fc;
                fc.mode = mode;
                fc.std_errors = false;
                try {
                    const auto fit = fit_mle(h, config.specs, space, fc);
                    for (std::size_t k = 1; k < fit.loglik_trace.size(); ++k) {
                        const double prev = fit.loglik_trace[k - 1];
                        CHECK(fit.loglik_trace[k] >= prev - 1e-12 * std::max(1.0, std::abs(prev)));
                    }
                    if (fit.converged) CHECK(fit.gradient_norm <= fc.tol);
                } catch (const Error& e) {
                    CHECK(e.code() == Errc::DegenerateStatistic);
                }
            }
        }
    }

    TEST_CASE("timestamped fit converges from different starts") {
        const auto space = enumerate_action_space(4, 1);
        SimConfig config;
        config.theta = Eigen::Vector2d(1.0, 0.5);
        config.specs = parse_statistic_specs("reciprocity,inertia");
        config.n_events = 2000;
        config.seed = 5;
        config.timestamps = true;
        const auto design = build_design(simulate_rem(space, config), config.specs, space);
        FitConfig a, b;
        a.mode = b.mode = LikelihoodMode::Timestamped;
        b.init_theta = Eigen::Vector2d(-2.0, 3.0);
        const auto fa = fit_mle(design, a);
        const auto fb = fit_mle(design, b);
        CHECK(fa.converged);
        CHECK(fb.converged);
        CHECK((fa.theta_hat - fb.theta_hat).lpNorm<Eigen::Infinity>() < 1e-6);
    }

    TEST_CASE("degenerate statistic") {
        // With a single event the only step sees an empty prefix.
        const auto space = enumerate_action_space(3, 1);
        const auto h = validate_history({ev(0, 1)});
        CHECK(code_of([&] { fit_mle(h, parse_statistic_specs("inertia"), space); }) ==
              Errc::DegenerateStatistic);
        // A covariate equal for every action cancels out of every softmax.
        const Eigen::MatrixXd cov = Eigen::MatrixXd::Ones(6, 1);
        const auto longer = validate_history({ev(0, 1), ev(1, 2), ev(2, 0)});
        CHECK(code_of([&] { fit_mle(longer, parse_statistic_specs("cov:0"), space, {}, &cov); }) ==
              Errc::DegenerateStatistic);
    }

    TEST_CASE("argument checks") {
        const auto space = enumerate_action_space(3, 1);
        CHECK(code_of([&] { fit_mle(validate_history({}), parse_statistic_specs("inertia"), space); }) ==
              Errc::InvalidArgument);
        FitConfig ts;
        ts.mode = LikelihoodMode::Timestamped;
        CHECK(code_of([&] { fit_mle(validate_history({ev(0, 1), ev(1, 0)}), parse_statistic_specs("reciprocity"), space, ts); }) ==
              Errc::MissingTimestamps);
    }
}
