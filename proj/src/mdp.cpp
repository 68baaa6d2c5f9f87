#include "remirl/mdp.hpp"

#include <cmath>
#include <limits>

#include "remirl/error.hpp"

namespace remirl {

const std::array<std::string, EgoScheme::n_states> EgoScheme::state_labels = {
    "silence", "fromOwnDriver", "fromOtherCaptain", "otherCaptainToDriver",
    "otherDriverToCaptain"};
const std::array<std::string, EgoScheme::n_actions> EgoScheme::action_labels = {
    "noop", "toOwnDriver", "toOtherCaptain"};

Mdp make_mdp(const TransitionTensor& transitions, FeatureMatrix features,
             std::vector<std::string> state_labels, std::vector<std::string> action_labels) {
    if (transitions.empty()) throw Error(Errc::InvalidArgument, "an MDP needs at least one action");
    Mdp mdp;
    mdp.n_actions = static_cast<Eigen::Index>(transitions.size());
    mdp.n_states = transitions.front().rows();
    for (const auto& p : transitions) {
        if (p.rows() != mdp.n_states || p.cols() != mdp.n_states) {
            throw Error(Errc::InvalidArgument, "transition matrices must be square and equal-sized");
        }
        mdp.transitions.push_back(p.sparseView());
    }
    if (features.rows() != mdp.n_states) {
        throw Error(Errc::InvalidArgument, "feature matrix needs one row per state");
    }
    mdp.features = std::move(features);
    mdp.state_labels = std::move(state_labels);
    mdp.action_labels = std::move(action_labels);
    return mdp;
}

TransitionTensor dense_transitions(const Mdp& mdp) {
    TransitionTensor out;
    for (const auto& p : mdp.transitions) out.emplace_back(Eigen::MatrixXd(p));
    return out;
}

double max_row_sum_error(const Mdp& mdp) {
    double worst = 0.0;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mdp.n_states);
    for (const auto& p : mdp.transitions) {
        worst = std::max(worst, ((p * ones).array() - 1.0).abs().maxCoeff());
    }
    return worst;
}

namespace {

enum class EgoEvent { EgoToOwnDriver, EgoToOtherCaptain, Observed };

struct Classified {
    EgoEvent kind;
    EgoState state;  // state after this event
};

Classified classify(const DyadicEvent& e, const EgoScheme& scheme, std::size_t position) {
    const auto s = e.sender;
    const auto r = e.receiver;
    if (s == scheme.ego && r == scheme.own_driver) return {EgoEvent::EgoToOwnDriver, EgoState::Silence};
    if (s == scheme.ego && r == scheme.other_captain) {
        return {EgoEvent::EgoToOtherCaptain, EgoState::Silence};
    }
    if (s == scheme.own_driver && r == scheme.ego) return {EgoEvent::Observed, EgoState::FromOwnDriver};
    if (s == scheme.other_captain && r == scheme.ego) {
        return {EgoEvent::Observed, EgoState::FromOtherCaptain};
    }
    if (s == scheme.other_captain && r == scheme.other_driver) {
        return {EgoEvent::Observed, EgoState::OtherCaptainToDriver};
    }
    if (s == scheme.other_driver && r == scheme.other_captain) {
        return {EgoEvent::Observed, EgoState::OtherDriverToCaptain};
    }
    throw Error(Errc::UnclassifiableEvent,
                "event " + std::to_string(position) + " does not fit the ego communication roles");
}

} // namespace

Trajectory build_ego_trajectory(std::span<const DyadicEvent> events, const EgoScheme& scheme) {
    std::vector<Classified> classified;
    classified.reserve(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) classified.push_back(classify(events[i], scheme, i));

    Trajectory trajectory;
    for (std::size_t i = 0; i + 1 < classified.size(); ++i) {
        EgoAction action = EgoAction::Noop;
        switch (classified[i + 1].kind) {
            case EgoEvent::EgoToOwnDriver: action = EgoAction::ToOwnDriver; break;
            case EgoEvent::EgoToOtherCaptain: action = EgoAction::ToOtherCaptain; break;
            case EgoEvent::Observed: break;
        }
        trajectory.steps.push_back(
            {static_cast<Eigen::Index>(classified[i].state), static_cast<Eigen::Index>(action)});
    }
    return trajectory;
}

Trajectory build_ego_trajectory(const EventHistory& history, const EgoScheme& scheme) {
    return build_ego_trajectory(std::span<const DyadicEvent>(history.events()), scheme);
}

TransitionTensor estimate_transitions(std::span<const Trajectory> trajectories,
                                      Eigen::Index n_states, Eigen::Index n_actions,
                                      double smoothing) {
    if (smoothing < 0.0 || !std::isfinite(smoothing)) {
        throw Error(Errc::InvalidArgument, "smoothing must be a non-negative number");
    }
    TransitionTensor counts(static_cast<std::size_t>(n_actions),
                            Eigen::MatrixXd::Zero(n_states, n_states));
    for (const auto& trajectory : trajectories) {
        for (std::size_t t = 0; t + 1 < trajectory.size(); ++t) {
            const auto& step = trajectory.steps[t];
            const auto next = trajectory.steps[t + 1].state;
            if (step.state < 0 || step.state >= n_states || next < 0 || next >= n_states ||
                step.action < 0 || step.action >= n_actions) {
                throw Error(Errc::InvalidArgument, "trajectory index out of range");
            }
            counts[static_cast<std::size_t>(step.action)](step.state, next) += 1.0;
        }
    }
    for (Eigen::Index a = 0; a < n_actions; ++a) {
        auto& p = counts[static_cast<std::size_t>(a)];
        for (Eigen::Index s = 0; s < n_states; ++s) {
            const double total = p.row(s).sum() + smoothing * static_cast<double>(n_states);
            if (total == 0.0) {
                throw Error(Errc::UnobservedStateAction,
                            "no observation for state " + std::to_string(s) + " under action " +
                                std::to_string(a));
            }
            p.row(s) = (p.row(s).array() + smoothing) / total;
        }
    }
    return counts;
}

FeatureMatrix one_hot_features(Eigen::Index n_states) {
    FeatureMatrix identity(n_states, n_states);
    identity.setIdentity();
    return identity;
}

Mdp build_ego_mdp(std::span<const Trajectory> trajectories, double smoothing) {
    constexpr auto n_states = static_cast<Eigen::Index>(EgoScheme::n_states);
    constexpr auto n_actions = static_cast<Eigen::Index>(EgoScheme::n_actions);
    return make_mdp(estimate_transitions(trajectories, n_states, n_actions, smoothing),
                    one_hot_features(n_states),
                    {EgoScheme::state_labels.begin(), EgoScheme::state_labels.end()},
                    {EgoScheme::action_labels.begin(), EgoScheme::action_labels.end()});
}

WindowStateSpace::WindowStateSpace(std::size_t n_actions, std::size_t k, std::size_t max_states)
    : n_actions_(n_actions), k_(k) {
    if (n_actions == 0) throw Error(Errc::InvalidArgument, "window states need at least one action");
    const auto too_large = [&] {
        return Error(Errc::StateSpaceTooLarge, "windows of up to " + std::to_string(k) +
                                                   " actions exceed " +
                                                   std::to_string(max_states) + " states");
    };
    std::size_t level = 1;  // number of windows of the current length
    for (std::size_t len = 0; len <= k; ++len) {
        offsets_.push_back(n_states_);
        if (level > max_states || n_states_ > max_states - level) throw too_large();
        n_states_ += level;
        if (len < k) {
            if (level > max_states / n_actions) throw too_large();
            level *= n_actions;
        }
    }
}

std::size_t WindowStateSpace::index(std::span<const std::size_t> window) const {
    if (window.size() > k_) throw Error(Errc::InvalidArgument, "window longer than k");
    std::size_t digits = 0;
    for (auto a : window) {
        if (a >= n_actions_) throw Error(Errc::InvalidArgument, "action index out of range");
        digits = digits * n_actions_ + a;
    }
    return offsets_[window.size()] + digits;
}

std::vector<std::size_t> WindowStateSpace::window(std::size_t state) const {
    if (state >= n_states_) throw Error(Errc::InvalidArgument, "state index out of range");
    std::size_t len = k_;
    while (offsets_[len] > state) --len;
    std::size_t digits = state - offsets_[len];
    std::vector<std::size_t> out(len);
    for (std::size_t i = len; i-- > 0;) {
        out[i] = digits % n_actions_;
        digits /= n_actions_;
    }
    return out;
}

std::size_t WindowStateSpace::successor(std::size_t state, std::size_t action) const {
    auto w = window(state);
    w.push_back(action);
    if (w.size() > k_) w.erase(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(w.size() - k_));
    return index(w);
}

std::string action_label(const ActionTriple& triple) {
    return std::to_string(to_index(triple.sender)) + "->" + std::to_string(to_index(triple.receiver)) +
           "#" + std::to_string(triple.type);
}

namespace {

Mdp window_mdp_skeleton(const ActionSpace& space, const WindowStateSpace& states) {
    Mdp mdp;
    mdp.n_states = static_cast<Eigen::Index>(states.n_states());
    mdp.n_actions = static_cast<Eigen::Index>(space.size());
    for (std::size_t a = 0; a < space.size(); ++a) {
        TransitionMatrix p(mdp.n_states, mdp.n_states);
        p.reserve(Eigen::VectorXi::Constant(mdp.n_states, 1));
        for (std::size_t s = 0; s < states.n_states(); ++s) {
            p.insert(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(states.successor(s, a))) = 1.0;
        }
        p.makeCompressed();
        mdp.transitions.push_back(std::move(p));
        mdp.action_labels.push_back(action_label(space[a]));
    }
    for (std::size_t s = 0; s < states.n_states(); ++s) {
        std::string label = "[";
        for (auto a : states.window(s)) {
            if (label.size() > 1) label += ' ';
            label += mdp.action_labels[a];
        }
        mdp.state_labels.push_back(label + "]");
    }
    return mdp;
}

} // namespace

Mdp build_group_mdp(const ActionSpace& space, std::size_t k, std::size_t max_states) {
    const WindowStateSpace states(space.size(), k, max_states);
    Mdp mdp = window_mdp_skeleton(space, states);
    mdp.features = one_hot_features(mdp.n_states);
    return mdp;
}

Mdp rem_feature_mdp(const ActionSpace& space, std::size_t k, std::span<const StatisticSpec> specs,
                    std::size_t max_states) {
    if (specs.empty()) throw Error(Errc::InvalidArgument, "at least one statistic is required");
    const WindowStateSpace states(space.size(), k, max_states);
    Mdp mdp = window_mdp_skeleton(space, states);

    std::vector<Eigen::Triplet<double>> entries;
    std::vector<DyadicEvent> events;
    for (std::size_t s = 0; s < states.n_states(); ++s) {
        const auto w = states.window(s);
        if (w.empty()) continue;
        events.clear();
        for (auto a : w) {
            const auto& t = space[a];
            events.push_back({t.sender, t.receiver, t.type, std::nullopt, {}});
        }
        const std::span<const DyadicEvent> prefix(events.data(), events.size() - 1);
        for (std::size_t j = 0; j < specs.size(); ++j) {
            const double v = evaluate_statistic(specs[j], space[w.back()], prefix);
            if (v != 0.0) {
                entries.emplace_back(static_cast<int>(s), static_cast<int>(j), v);
            }
        }
    }
    mdp.features.resize(mdp.n_states, static_cast<Eigen::Index>(specs.size()));
    mdp.features.setFromTriplets(entries.begin(), entries.end());
    return mdp;
}

} // namespace remirl
