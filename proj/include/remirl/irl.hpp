#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "remirl/mdp.hpp"
#include "remirl/rem.hpp"

namespace remirl {

/// Linear state reward R(s) = theta . f(s).
struct RewardModel {
    Eigen::VectorXd theta;
    double gamma = 0.0;

    Eigen::VectorXd state_rewards(const Mdp& mdp) const;
};

/// Row-stochastic n_states x n_actions action probabilities.
struct SoftPolicy {
    Eigen::MatrixXd probs;
};

/// Maximum-entropy policy for `reward` over a finite horizon.
///
/// Backward recursion in the log domain with reward credited on arrival:
///   Q_t(s,a) = sum_s' P_a(s,s') (R(s') + V_{t-1}(s')),  V_t(s) = logsumexp_a Q_t(s,a),
/// starting from V_0 = 0. Returns exp(Q_H - V_H).
SoftPolicy soft_backward_pass(const Mdp& mdp, const Eigen::VectorXd& reward, int horizon);

/// Sum over t < horizon of the state distribution after t transitions.
Eigen::VectorXd expected_svf(const Mdp& mdp, const SoftPolicy& policy,
                             const Eigen::VectorXd& start_distribution, int horizon);

struct MaxEntConfig {
    double learning_rate = 0.01;
    int epochs = 5000;
    int horizon = 0;  // 0: longest demonstration
    double convergence_tol = 1e-6;
    std::uint64_t seed = 0;
    double init_scale = 0.0;  // theta starts uniform in [-init_scale, init_scale]
};

struct MaxEntResult {
    RewardModel reward;
    double gradient_norm = 0.0;
    int epochs = 0;
    bool converged = false;
};

/// Demonstrated minus expected feature counts, both averaged per trajectory.
/// Expected counts propagate each trajectory's start state for its own length.
Eigen::VectorXd maxent_gradient(const Mdp& mdp, std::span<const Trajectory> trajectories,
                                const Eigen::VectorXd& theta, int horizon);

MaxEntResult maxent_irl(const Mdp& mdp, std::span<const Trajectory> trajectories,
                        const MaxEntConfig& config = {});

enum class BirlNormalization { SuccessorSet, AllStates };

/// Sum over steps of R(s_i) - log sum_{s' in candidates_i} exp R(s'), where
/// s_i is the state recorded at step i. With AllStates the candidate lists are
/// ignored and every state competes.
double birl_trajectory_loglik(const Trajectory& trajectory, const Eigen::VectorXd& reward,
                              std::span<const std::vector<Eigen::Index>> candidates,
                              BirlNormalization normalization = BirlNormalization::SuccessorSet);

struct EquivalenceReport {
    double rem_ll = 0.0;
    double birl_ll = 0.0;
    double abs_diff = 0.0;
};

/// Evaluates the ordinal REM likelihood and the zero-discount step-wise IRL
/// likelihood on the history-as-state MDP, where each step's candidates are
/// the |A| one-event extensions of the realized history.
EquivalenceReport rem_birl_equivalence(const EventHistory& history, const RemModel& model,
                                       const ActionSpace& space,
                                       const Eigen::MatrixXd* action_covariates = nullptr);

struct GreedyPolicy {
    std::vector<Eigen::Index> actions;
    Eigen::VectorXd values;
    int iterations = 0;
};

/// Discounted value iteration, reward on arrival; ties go to the lowest action.
GreedyPolicy optimal_policy(const Mdp& mdp, const Eigen::VectorXd& reward, double gamma,
                            double tol = 1e-10);

} // namespace remirl
