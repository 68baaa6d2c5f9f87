#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace remirl {

/// Dense index into a roster of actor labels.
enum class ActorId : std::uint32_t {};

constexpr std::size_t to_index(ActorId id) noexcept { return static_cast<std::size_t>(id); }
constexpr ActorId actor(std::size_t index) noexcept { return static_cast<ActorId>(index); }

/// (sender, receiver, type) without time or covariates.
struct ActionTriple {
    ActorId sender{};
    ActorId receiver{};
    std::uint32_t type = 0;

    friend bool operator==(const ActionTriple&, const ActionTriple&) = default;
};

/// One directed interaction.
struct DyadicEvent {
    ActorId sender{};
    ActorId receiver{};
    std::uint32_t type = 0;
    std::optional<double> time;
    std::vector<double> covariates;

    ActionTriple triple() const noexcept { return {sender, receiver, type}; }

    friend bool operator==(const DyadicEvent&, const DyadicEvent&) = default;
};

/// Ordered event sequence with an origin at time zero. Only constructible
/// through validate_history, so every instance satisfies the ordering rules.
class EventHistory {
public:
    EventHistory() = default;

    const std::vector<DyadicEvent>& events() const noexcept { return events_; }
    std::size_t size() const noexcept { return events_.size(); }
    bool empty() const noexcept { return events_.empty(); }
    const DyadicEvent& operator[](std::size_t i) const { return events_[i]; }

    /// True when every event carries a timestamp (vacuously false when empty).
    bool timestamped() const noexcept { return timestamped_; }
    double origin_time() const noexcept { return 0.0; }
    std::optional<double> end_time() const noexcept { return end_time_; }
    std::size_t covariate_dim() const noexcept { return covariate_dim_; }

    friend bool operator==(const EventHistory&, const EventHistory&) = default;

private:
    friend EventHistory validate_history(std::vector<DyadicEvent> events,
                                         std::optional<double> end_time);

    std::vector<DyadicEvent> events_;
    std::optional<double> end_time_;
    bool timestamped_ = false;
    std::size_t covariate_dim_ = 0;
};

/// Checks ordering, self-loops, timestamp presence and the end of the
/// observation window. Equal timestamps are accepted and keep file order.
EventHistory validate_history(std::vector<DyadicEvent> events,
                              std::optional<double> end_time = std::nullopt);

/// The min(k, at_index) events strictly before position at_index, oldest first.
std::span<const DyadicEvent> window(const EventHistory& history, std::size_t k,
                                    std::size_t at_index);
std::span<const DyadicEvent> window(std::span<const DyadicEvent> events, std::size_t k,
                                    std::size_t at_index);

using Permissibility = std::function<bool(const ActionTriple&)>;

/// Enumerated set of legal actions, sender-major then receiver then type.
class ActionSpace {
public:
    std::size_t n_actors() const noexcept { return n_actors_; }
    std::size_t n_types() const noexcept { return n_types_; }
    std::size_t size() const noexcept { return actions_.size(); }
    const std::vector<ActionTriple>& actions() const noexcept { return actions_; }
    const ActionTriple& operator[](std::size_t i) const { return actions_[i]; }

    /// Position of a triple in the enumeration, if it is a member.
    std::optional<std::size_t> index_of(const ActionTriple& triple) const noexcept;
    bool contains(const ActionTriple& triple) const noexcept { return index_of(triple).has_value(); }

    /// Dense key over all N*N*|C| triples, members or not.
    std::size_t key(const ActionTriple& triple) const noexcept {
        return (to_index(triple.sender) * n_actors_ + to_index(triple.receiver)) * n_types_ +
               triple.type;
    }
    bool in_range(const ActionTriple& triple) const noexcept {
        return to_index(triple.sender) < n_actors_ && to_index(triple.receiver) < n_actors_ &&
               triple.type < n_types_;
    }

private:
    friend ActionSpace enumerate_action_space(std::size_t, std::size_t, const Permissibility&);

    std::size_t n_actors_ = 0;
    std::size_t n_types_ = 0;
    std::vector<ActionTriple> actions_;
    std::vector<std::int64_t> lookup_;  // key -> position, -1 when excluded
};

ActionSpace enumerate_action_space(std::size_t n_actors, std::size_t n_types,
                                   const Permissibility& permitted = {});

/// Two teams of captain + driver: drivers talk only to their own captain,
/// captains talk to their own driver and to each other.
Permissibility team_permissibility(ActorId captain1, ActorId driver1, ActorId captain2,
                                   ActorId driver2);

/// Only the listed (sender, receiver) pairs, any type.
Permissibility pair_permissibility(std::vector<std::pair<ActorId, ActorId>> pairs);

/// Interned labels in first-appearance order.
class LabelTable {
public:
    LabelTable() = default;
    explicit LabelTable(std::vector<std::string> labels);

    std::size_t intern(std::string_view label);
    std::optional<std::size_t> find(std::string_view label) const;
    const std::string& operator[](std::size_t i) const { return labels_[i]; }
    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    friend bool operator==(const LabelTable&, const LabelTable&) = default;

private:
    std::vector<std::string> labels_;
};

struct ParsedEvents {
    std::vector<DyadicEvent> events;
    LabelTable actors;
    LabelTable types;
    std::vector<std::string> covariate_names;
    bool has_time = false;
};

/// Reads `time,sender,receiver,type[,cov_*...]` rows. `time` and `type` are
/// optional. Labels are interned after any labels already present in the
/// supplied tables, so a known roster keeps its indices.
ParsedEvents parse_event_csv(std::string_view text, LabelTable actors = {},
                             LabelTable types = {});

/// Inverse of parse_event_csv; numbers are written with 17 significant digits.
std::string serialize_event_csv(const EventHistory& history, const LabelTable& actors,
                                const LabelTable& types,
                                const std::vector<std::string>& covariate_names = {});

} // namespace remirl
