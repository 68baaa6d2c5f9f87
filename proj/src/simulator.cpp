#include "remirl/simulator.hpp"

#include <cmath>

#include "remirl/error.hpp"
#include "remirl/irl.hpp"
#include "remirl/numeric.hpp"

namespace remirl {

namespace {

void check_config(const SimConfig& config) {
    if (static_cast<std::size_t>(config.theta.size()) != config.specs.size()) {
        throw Error(Errc::InvalidArgument, "theta length does not match the statistic count");
    }
    if (config.specs.empty()) throw Error(Errc::InvalidArgument, "at least one statistic is required");
    if (!config.theta.allFinite()) throw Error(Errc::InvalidArgument, "theta must be finite");
    if (!(config.epsilon >= 0.0 && config.epsilon <= 1.0)) {
        throw Error(Errc::InvalidArgument, "epsilon must lie in [0, 1]");
    }
}

Eigen::Index greedy_choice(const Eigen::VectorXd& scores) {
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < scores.size(); ++a) {
        if (scores(a) > scores(best)) best = a;
    }
    return best;
}

} // namespace

EventHistory simulate_rem(const ActionSpace& space, const SimConfig& config,
                          const Eigen::MatrixXd* action_covariates) {
    check_config(config);
    Rng rng(config.seed);
    StatisticsTracker tracker(space, config.specs, action_covariates);
    const auto n_actions = static_cast<Eigen::Index>(space.size());
    Eigen::MatrixXd stats(n_actions, config.theta.size());
    Eigen::VectorXd scores(n_actions);

    std::vector<DyadicEvent> events;
    events.reserve(config.n_events);
    double clock = 0.0;
    for (std::size_t i = 0; i < config.n_events; ++i) {
        tracker.fill(stats);
        scores.noalias() = stats * config.theta;

        Eigen::Index choice = 0;
        if (config.rule == ChoiceRule::ProbabilityMatching) {
            choice = rng.categorical(softmax(scores));
        } else if (rng.uniform() < config.epsilon) {
            choice = std::min<Eigen::Index>(static_cast<Eigen::Index>(rng.uniform() * n_actions),
                                            n_actions - 1);
        } else {
            choice = greedy_choice(scores);
        }

        const auto& triple = space[static_cast<std::size_t>(choice)];
        DyadicEvent e{triple.sender, triple.receiver, triple.type, std::nullopt, {}};
        if (action_covariates) {
            const auto row = action_covariates->row(choice);
            for (Eigen::Index j = 0; j < row.size(); ++j) e.covariates.push_back(row(j));
        }
        if (config.timestamps) {
            clock += rng.exponential(std::exp(log_sum_exp(scores)));
            e.time = clock;
        }
        tracker.push(e);
        events.push_back(std::move(e));
    }
    std::optional<double> end_time;
    if (config.timestamps) end_time = clock;
    return validate_history(std::move(events), end_time);
}

EventHistory simulate_egreedy(const ActionSpace& space, const SimConfig& config,
                              const Eigen::MatrixXd* action_covariates) {
    SimConfig greedy = config;
    greedy.rule = ChoiceRule::EpsilonGreedy;
    return simulate_rem(space, greedy, action_covariates);
}

std::vector<Trajectory> simulate_mdp(const Mdp& mdp, const Eigen::VectorXd& reward,
                                     std::size_t n_trajectories, int horizon, double temperature,
                                     std::uint64_t seed,
                                     std::optional<Eigen::VectorXd> start_distribution) {
    if (!(temperature > 0.0)) throw Error(Errc::InvalidArgument, "temperature must be positive");
    if (horizon < 1) throw Error(Errc::InvalidArgument, "horizon must be at least 1");
    const Eigen::VectorXd start =
        start_distribution.value_or(Eigen::VectorXd::Constant(mdp.n_states, 1.0 / mdp.n_states));
    if (start.size() != mdp.n_states) {
        throw Error(Errc::InvalidArgument, "start distribution needs one entry per state");
    }
    const SoftPolicy policy = soft_backward_pass(mdp, reward / temperature, horizon);
    const auto dense = dense_transitions(mdp);

    const Rng root(seed);
    std::vector<Trajectory> out(n_trajectories);
    for (std::size_t j = 0; j < n_trajectories; ++j) {
        Rng rng = root.split(j);
        auto& trajectory = out[j];
        trajectory.steps.reserve(static_cast<std::size_t>(horizon));
        Eigen::Index state = rng.categorical(start);
        for (int t = 0; t < horizon; ++t) {
            const Eigen::Index action = rng.categorical(policy.probs.row(state));
            trajectory.steps.push_back({state, action});
            state = rng.categorical(dense[static_cast<std::size_t>(action)].row(state));
        }
    }
    return out;
}

} // namespace remirl
