#include "remirl/irl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "remirl/error.hpp"
#include "remirl/numeric.hpp"
#include "remirl/random.hpp"

namespace remirl {

Eigen::VectorXd RewardModel::state_rewards(const Mdp& mdp) const {
    if (theta.size() != mdp.features.cols()) {
        throw Error(Errc::InvalidArgument, "reward weights do not match the feature dimension");
    }
    return mdp.features * theta;
}

namespace {

void check_reward(const Mdp& mdp, const Eigen::VectorXd& reward) {
    if (reward.size() != mdp.n_states) {
        throw Error(Errc::InvalidArgument, "reward needs one entry per state");
    }
    if (!reward.allFinite()) throw Error(Errc::InvalidArgument, "reward must be finite");
}

} // namespace

SoftPolicy soft_backward_pass(const Mdp& mdp, const Eigen::VectorXd& reward, int horizon) {
    check_reward(mdp, reward);
    if (horizon < 1) throw Error(Errc::InvalidArgument, "horizon must be at least 1");
    Eigen::VectorXd value = Eigen::VectorXd::Zero(mdp.n_states);
    Eigen::MatrixXd q(mdp.n_states, mdp.n_actions);
    for (int t = 0; t < horizon; ++t) {
        const Eigen::VectorXd arrival = reward + value;
        for (Eigen::Index a = 0; a < mdp.n_actions; ++a) {
            q.col(a).noalias() = mdp.transitions[static_cast<std::size_t>(a)] * arrival;
        }
        for (Eigen::Index s = 0; s < mdp.n_states; ++s) value(s) = log_sum_exp(q.row(s));
    }
    SoftPolicy policy;
    policy.probs = (q.colwise() - value).array().exp().matrix();
    // Renormalize away the rounding of exp(q - lse).
    policy.probs.array().colwise() /= policy.probs.rowwise().sum().array();
    return policy;
}

namespace {

// Unnormalized propagation: `start` may carry any total mass.
Eigen::VectorXd propagate_visits(const Mdp& mdp, const SoftPolicy& policy, Eigen::VectorXd current,
                                 int horizon) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(mdp.n_states);
    Eigen::VectorXd next(mdp.n_states);
    for (int t = 0; t < horizon; ++t) {
        total += current;
        if (t + 1 == horizon) break;
        next.setZero();
        for (Eigen::Index a = 0; a < mdp.n_actions; ++a) {
            const Eigen::VectorXd mass = current.cwiseProduct(policy.probs.col(a));
            next.noalias() += mdp.transitions[static_cast<std::size_t>(a)].transpose() * mass;
        }
        current.swap(next);
    }
    return total;
}

} // namespace

Eigen::VectorXd expected_svf(const Mdp& mdp, const SoftPolicy& policy,
                             const Eigen::VectorXd& start_distribution, int horizon) {
    if (start_distribution.size() != mdp.n_states) {
        throw Error(Errc::InvalidArgument, "start distribution needs one entry per state");
    }
    if (std::abs(start_distribution.sum() - 1.0) > 1e-9 || (start_distribution.array() < 0.0).any()) {
        throw Error(Errc::InvalidArgument, "start distribution must be a probability vector");
    }
    if (policy.probs.rows() != mdp.n_states || policy.probs.cols() != mdp.n_actions) {
        throw Error(Errc::InvalidArgument, "policy shape does not match the MDP");
    }
    if (horizon < 0) throw Error(Errc::InvalidArgument, "horizon must be non-negative");
    return propagate_visits(mdp, policy, start_distribution, horizon);
}

namespace {

struct Demonstrations {
    Eigen::VectorXd visits;                        // mean visit counts per trajectory
    std::map<int, Eigen::VectorXd> starts_by_len;  // length -> start mass / n_traj
    int longest = 0;
};

Demonstrations summarize(const Mdp& mdp, std::span<const Trajectory> trajectories) {
    Demonstrations demo;
    demo.visits = Eigen::VectorXd::Zero(mdp.n_states);
    std::size_t used = 0;
    for (const auto& trajectory : trajectories) {
        if (trajectory.empty()) continue;
        ++used;
        const int len = static_cast<int>(trajectory.size());
        auto [it, inserted] = demo.starts_by_len.try_emplace(len, Eigen::VectorXd::Zero(mdp.n_states));
        for (const auto& step : trajectory.steps) {
            if (step.state < 0 || step.state >= mdp.n_states || step.action < 0 ||
                step.action >= mdp.n_actions) {
                throw Error(Errc::InvalidArgument, "trajectory index out of range");
            }
            demo.visits(step.state) += 1.0;
        }
        it->second(trajectory.steps.front().state) += 1.0;
        demo.longest = std::max(demo.longest, len);
    }
    if (used == 0) throw Error(Errc::EmptyDemonstrations, "no non-empty demonstration trajectory");
    const double n = static_cast<double>(used);
    demo.visits /= n;
    for (auto& [len, start] : demo.starts_by_len) start /= n;
    return demo;
}

Eigen::VectorXd gradient_from(const Mdp& mdp, const Demonstrations& demo, const Eigen::VectorXd& theta,
                              int horizon) {
    const Eigen::VectorXd reward = mdp.features * theta;
    const SoftPolicy policy = soft_backward_pass(mdp, reward, horizon);
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(mdp.n_states);
    for (const auto& [len, start] : demo.starts_by_len) {
        expected += propagate_visits(mdp, policy, start, len);
    }
    return mdp.features.transpose() * (demo.visits - expected);
}

int resolve_horizon(int requested, const Demonstrations& demo) {
    if (requested == 0) return demo.longest;
    if (requested < demo.longest) {
        throw Error(Errc::InvalidArgument, "horizon is shorter than the longest demonstration");
    }
    return requested;
}

} // namespace

Eigen::VectorXd maxent_gradient(const Mdp& mdp, std::span<const Trajectory> trajectories,
                                const Eigen::VectorXd& theta, int horizon) {
    const auto demo = summarize(mdp, trajectories);
    if (theta.size() != mdp.features.cols()) {
        throw Error(Errc::InvalidArgument, "theta does not match the feature dimension");
    }
    return gradient_from(mdp, demo, theta, resolve_horizon(horizon, demo));
}

MaxEntResult maxent_irl(const Mdp& mdp, std::span<const Trajectory> trajectories,
                        const MaxEntConfig& config) {
    if (trajectories.empty()) throw Error(Errc::EmptyDemonstrations, "no demonstrations");
    if (mdp.features.cols() == 0) throw Error(Errc::InvalidArgument, "the MDP has no state features");
    if (!(config.learning_rate > 0.0) || !(config.convergence_tol > 0.0) || config.epochs < 0) {
        throw Error(Errc::InvalidArgument, "invalid MaxEnt configuration");
    }
    const auto demo = summarize(mdp, trajectories);
    const int horizon = resolve_horizon(config.horizon, demo);

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(mdp.features.cols());
    if (config.init_scale > 0.0) {
        Rng rng(config.seed);
        for (Eigen::Index j = 0; j < theta.size(); ++j) {
            theta(j) = config.init_scale * (2.0 * rng.uniform() - 1.0);
        }
    }

    MaxEntResult result;
    Eigen::VectorXd gradient = gradient_from(mdp, demo, theta, horizon);
    int epoch = 0;
    for (; epoch < config.epochs; ++epoch) {
        if (inf_norm(gradient) <= config.convergence_tol) break;
        theta += config.learning_rate * gradient;
        gradient = gradient_from(mdp, demo, theta, horizon);
    }
    result.reward.theta = theta;
    result.reward.gamma = 0.0;
    result.gradient_norm = inf_norm(gradient);
    result.epochs = epoch;
    result.converged = result.gradient_norm <= config.convergence_tol;
    return result;
}

double birl_trajectory_loglik(const Trajectory& trajectory, const Eigen::VectorXd& reward,
                              std::span<const std::vector<Eigen::Index>> candidates,
                              BirlNormalization normalization) {
    if (normalization == BirlNormalization::AllStates) {
        const double lse = log_sum_exp(reward);
        double total = 0.0;
        for (const auto& step : trajectory.steps) total += reward(step.state) - lse;
        return total;
    }
    if (candidates.size() != trajectory.size()) {
        throw Error(Errc::InvalidArgument, "one candidate set per step is required");
    }
    double total = 0.0;
    Eigen::VectorXd scores;
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        const auto realized = trajectory.steps[i].state;
        const auto& set = candidates[i];
        if (std::find(set.begin(), set.end(), realized) == set.end()) {
            throw Error(Errc::RealizedStateNotInCandidates,
                        "step " + std::to_string(i) + " lands outside its candidate set");
        }
        scores.resize(static_cast<Eigen::Index>(set.size()));
        for (std::size_t c = 0; c < set.size(); ++c) scores(static_cast<Eigen::Index>(c)) = reward(set[c]);
        total += reward(realized) - log_sum_exp(scores);
    }
    return total;
}

EquivalenceReport rem_birl_equivalence(const EventHistory& history, const RemModel& model,
                                       const ActionSpace& space,
                                       const Eigen::MatrixXd* action_covariates) {
    EquivalenceReport report;
    const RemDesign design = build_design(history, model.specs, space, action_covariates);
    report.rem_ll = ordinal_loglik(design, model.theta);

    // History-as-state view: state (i, a') is the history A_{i-1} extended by a'.
    // Its reward is the statistic vector of a' against A_{i-1}, from the scalar
    // definitions rather than the tracker used above.
    const auto n_actions = static_cast<Eigen::Index>(space.size());
    const auto steps = static_cast<Eigen::Index>(history.size());
    Eigen::VectorXd reward(steps * n_actions);
    Trajectory trajectory;
    std::vector<std::vector<Eigen::Index>> candidates;
    const std::span<const DyadicEvent> events(history.events());
    for (Eigen::Index i = 0; i < steps; ++i) {
        const auto prefix = events.first(static_cast<std::size_t>(i));
        std::vector<Eigen::Index> set;
        for (Eigen::Index a = 0; a < n_actions; ++a) {
            std::span<const double> cov;
            Eigen::VectorXd row_cov;
            if (action_covariates) {
                row_cov = action_covariates->row(a).transpose();
                cov = {row_cov.data(), static_cast<std::size_t>(row_cov.size())};
            }
            const auto state = i * n_actions + a;
            reward(state) = log_rate(space[static_cast<std::size_t>(a)], prefix, model, cov);
            set.push_back(state);
        }
        const auto realized = *space.index_of(events[static_cast<std::size_t>(i)].triple());
        trajectory.steps.push_back({i * n_actions + static_cast<Eigen::Index>(realized),
                                    static_cast<Eigen::Index>(realized)});
        candidates.push_back(std::move(set));
    }
    report.birl_ll = birl_trajectory_loglik(trajectory, reward, candidates);
    report.abs_diff = std::abs(report.rem_ll - report.birl_ll);
    return report;
}

GreedyPolicy optimal_policy(const Mdp& mdp, const Eigen::VectorXd& reward, double gamma,
                            double tol) {
    check_reward(mdp, reward);
    if (!(gamma >= 0.0 && gamma < 1.0)) throw Error(Errc::InvalidArgument, "gamma must lie in [0, 1)");
    GreedyPolicy policy;
    Eigen::VectorXd value = Eigen::VectorXd::Zero(mdp.n_states);
    Eigen::MatrixXd q(mdp.n_states, mdp.n_actions);
    auto backup = [&] {
        const Eigen::VectorXd arrival = reward + gamma * value;
        for (Eigen::Index a = 0; a < mdp.n_actions; ++a) {
            q.col(a).noalias() = mdp.transitions[static_cast<std::size_t>(a)] * arrival;
        }
    };
    constexpr int max_iterations = 1'000'000;
    for (policy.iterations = 1; policy.iterations <= max_iterations; ++policy.iterations) {
        backup();
        const Eigen::VectorXd next = q.rowwise().maxCoeff();
        const double change = inf_norm(next - value);
        value = next;
        if (change <= tol) break;
    }
    backup();
    policy.values = value;
    policy.actions.resize(static_cast<std::size_t>(mdp.n_states));
    for (Eigen::Index s = 0; s < mdp.n_states; ++s) {
        Eigen::Index best = 0;
        for (Eigen::Index a = 1; a < mdp.n_actions; ++a) {
            const double slack = 1e-12 * std::max(1.0, std::abs(q(s, best)));
            if (q(s, a) > q(s, best) + slack) best = a;
        }
        policy.actions[static_cast<std::size_t>(s)] = best;
    }
    return policy;
}

} // namespace remirl
