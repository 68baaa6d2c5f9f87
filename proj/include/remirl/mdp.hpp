#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "remirl/event_core.hpp"
#include "remirl/statistics.hpp"

namespace remirl {

using TransitionMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using FeatureMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Finite MDP. transitions[a](s, s') = P_a(s, s'); features is n_states x d.
struct Mdp {
    Eigen::Index n_states = 0;
    Eigen::Index n_actions = 0;
    std::vector<TransitionMatrix> transitions;
    FeatureMatrix features;
    std::vector<std::string> state_labels;
    std::vector<std::string> action_labels;
};

/// Dense n_actions-long list of n_states x n_states matrices.
using TransitionTensor = std::vector<Eigen::MatrixXd>;

Mdp make_mdp(const TransitionTensor& transitions, FeatureMatrix features,
             std::vector<std::string> state_labels, std::vector<std::string> action_labels);
TransitionTensor dense_transitions(const Mdp& mdp);

/// Largest |row sum - 1| over all (a, s).
double max_row_sum_error(const Mdp& mdp);

struct Step {
    Eigen::Index state = 0;
    Eigen::Index action = 0;

    friend bool operator==(const Step&, const Step&) = default;
};

struct Trajectory {
    std::vector<Step> steps;

    std::size_t size() const noexcept { return steps.size(); }
    bool empty() const noexcept { return steps.empty(); }
    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

enum class EgoState : Eigen::Index {
    Silence,
    FromOwnDriver,
    FromOtherCaptain,
    OtherCaptainToDriver,
    OtherDriverToCaptain,
};

enum class EgoAction : Eigen::Index { Noop, ToOwnDriver, ToOtherCaptain };

/// The captain-centred view of a two-team radio network.
struct EgoScheme {
    ActorId ego{};
    ActorId own_driver{};
    ActorId other_captain{};
    ActorId other_driver{};

    static constexpr std::size_t n_states = 5;
    static constexpr std::size_t n_actions = 3;
    static const std::array<std::string, n_states> state_labels;
    static const std::array<std::string, n_actions> action_labels;
};

/// One step per event except the last: the state is set by event i, the
/// action by whether (and to whom) the ego sends event i+1.
Trajectory build_ego_trajectory(std::span<const DyadicEvent> events, const EgoScheme& scheme);
Trajectory build_ego_trajectory(const EventHistory& history, const EgoScheme& scheme);

/// (count + smoothing) / (total + smoothing * n_states) per (a, s) row over
/// consecutive steps of each trajectory. With smoothing = 0 every (s, a)
/// must be observed (UnobservedStateAction).
TransitionTensor estimate_transitions(std::span<const Trajectory> trajectories,
                                      Eigen::Index n_states, Eigen::Index n_actions,
                                      double smoothing = 1.0);

FeatureMatrix one_hot_features(Eigen::Index n_states);

/// Ego MDP with estimated transitions and one-hot features.
Mdp build_ego_mdp(std::span<const Trajectory> trajectories, double smoothing = 1.0);

/// States are windows of at most k actions, indexed length-lexicographically
/// with the oldest action as the most significant digit.
class WindowStateSpace {
public:
    WindowStateSpace(std::size_t n_actions, std::size_t k, std::size_t max_states = 1'000'000);

    std::size_t n_states() const noexcept { return n_states_; }
    std::size_t n_actions() const noexcept { return n_actions_; }
    std::size_t k() const noexcept { return k_; }

    std::size_t index(std::span<const std::size_t> window) const;
    std::vector<std::size_t> window(std::size_t state) const;
    std::size_t successor(std::size_t state, std::size_t action) const;

private:
    std::size_t n_actions_;
    std::size_t k_;
    std::vector<std::size_t> offsets_;  // first index of windows of each length
    std::size_t n_states_ = 0;
};

/// Truncated-history MDP over `space` with deterministic transitions and
/// one-hot features. StateSpaceTooLarge beyond `max_states`.
Mdp build_group_mdp(const ActionSpace& space, std::size_t k,
                    std::size_t max_states = 1'000'000);

/// The group MDP whose state features are the statistics of each window's last
/// action evaluated against the rest of the window (zero for the empty window).
Mdp rem_feature_mdp(const ActionSpace& space, std::size_t k,
                    std::span<const StatisticSpec> specs, std::size_t max_states = 1'000'000);

std::string action_label(const ActionTriple& triple);

} // namespace remirl
