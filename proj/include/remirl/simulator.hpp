#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "remirl/event_core.hpp"
#include "remirl/mdp.hpp"
#include "remirl/random.hpp"
#include "remirl/statistics.hpp"

namespace remirl {

enum class ChoiceRule { ProbabilityMatching, EpsilonGreedy };

struct SimConfig {
    ChoiceRule rule = ChoiceRule::ProbabilityMatching;
    double epsilon = 0.0;
    Eigen::VectorXd theta;
    std::vector<StatisticSpec> specs;
    std::size_t n_events = 0;
    std::uint64_t seed = 0;
    bool timestamps = false;
};

/// Draws a history event by event from the rates exp(theta . u) given the
/// realized prefix, using the configured choice rule. With timestamps, each
/// waiting time is exponential with the total rate and the observation window
/// ends at the last event.
EventHistory simulate_rem(const ActionSpace& space, const SimConfig& config,
                          const Eigen::MatrixXd* action_covariates = nullptr);

/// Greedy on the rate with probability 1 - epsilon (lowest index on ties),
/// uniform over the action space otherwise.
EventHistory simulate_egreedy(const ActionSpace& space, const SimConfig& config,
                              const Eigen::MatrixXd* action_covariates = nullptr);

/// Trajectories of `horizon` steps under the soft policy for reward / temperature.
/// Trajectory j uses its own sub-stream of `seed`.
std::vector<Trajectory> simulate_mdp(const Mdp& mdp, const Eigen::VectorXd& reward,
                                     std::size_t n_trajectories, int horizon, double temperature,
                                     std::uint64_t seed,
                                     std::optional<Eigen::VectorXd> start_distribution = {});

} // namespace remirl
