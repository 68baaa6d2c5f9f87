#include "remirl/event_core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "remirl/error.hpp"
#include "remirl/format.hpp"

namespace remirl {

EventHistory validate_history(std::vector<DyadicEvent> events, std::optional<double> end_time) {
    EventHistory history;
    const bool any_time =
        std::any_of(events.begin(), events.end(), [](const auto& e) { return e.time.has_value(); });
    double previous = 0.0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (e.sender == e.receiver) {
            throw Error(Errc::SelfDirectedEvent,
                        "event " + std::to_string(i) + " is sent by an actor to itself");
        }
        if (e.time.has_value() != any_time) {
            throw Error(Errc::MixedTimestampPresence,
                        "event " + std::to_string(i) + " breaks timestamp presence");
        }
        if (e.covariates.size() != events.front().covariates.size()) {
            throw Error(Errc::CovariateDimensionMismatch,
                        "event " + std::to_string(i) + " has " +
                            std::to_string(e.covariates.size()) + " covariates, expected " +
                            std::to_string(events.front().covariates.size()));
        }
        if (e.time) {
            if (!std::isfinite(*e.time) || *e.time < previous) {
                throw Error(Errc::NonMonotoneTimestamps,
                            "event " + std::to_string(i) + " at time " + format_double(*e.time) +
                                " precedes " + format_double(previous));
            }
            previous = *e.time;
        }
    }
    if (end_time) {
        const double last = any_time ? previous : 0.0;
        if (!std::isfinite(*end_time) || *end_time < last) {
            throw Error(Errc::EndTimeBeforeLastEvent,
                        "end time " + format_double(*end_time) + " is before the last event");
        }
    }
    history.timestamped_ = any_time;
    history.covariate_dim_ = events.empty() ? 0 : events.front().covariates.size();
    history.events_ = std::move(events);
    history.end_time_ = end_time;
    return history;
}

std::span<const DyadicEvent> window(std::span<const DyadicEvent> events, std::size_t k,
                                    std::size_t at_index) {
    at_index = std::min(at_index, events.size());
    const std::size_t n = std::min(k, at_index);
    return events.subspan(at_index - n, n);
}

std::span<const DyadicEvent> window(const EventHistory& history, std::size_t k,
                                    std::size_t at_index) {
    return window(std::span<const DyadicEvent>(history.events()), k, at_index);
}

std::optional<std::size_t> ActionSpace::index_of(const ActionTriple& triple) const noexcept {
    if (!in_range(triple)) return std::nullopt;
    const auto pos = lookup_[key(triple)];
    if (pos < 0) return std::nullopt;
    return static_cast<std::size_t>(pos);
}

ActionSpace enumerate_action_space(std::size_t n_actors, std::size_t n_types,
                                   const Permissibility& permitted) {
    if (n_actors < 2 || n_types < 1) {
        throw Error(Errc::InvalidArgument, "an action space needs at least 2 actors and 1 type");
    }
    ActionSpace space;
    space.n_actors_ = n_actors;
    space.n_types_ = n_types;
    space.lookup_.assign(n_actors * n_actors * n_types, -1);
    for (std::size_t s = 0; s < n_actors; ++s) {
        for (std::size_t r = 0; r < n_actors; ++r) {
            if (s == r) continue;
            for (std::size_t c = 0; c < n_types; ++c) {
                const ActionTriple t{actor(s), actor(r), static_cast<std::uint32_t>(c)};
                if (permitted && !permitted(t)) continue;
                space.lookup_[space.key(t)] = static_cast<std::int64_t>(space.actions_.size());
                space.actions_.push_back(t);
            }
        }
    }
    if (space.actions_.empty()) {
        throw Error(Errc::EmptyActionSpace, "the permissibility mask removes every action");
    }
    return space;
}

Permissibility team_permissibility(ActorId captain1, ActorId driver1, ActorId captain2,
                                   ActorId driver2) {
    return pair_permissibility({{driver1, captain1},
                                {captain1, driver1},
                                {captain1, captain2},
                                {captain2, captain1},
                                {captain2, driver2},
                                {driver2, captain2}});
}

Permissibility pair_permissibility(std::vector<std::pair<ActorId, ActorId>> pairs) {
    return [pairs = std::move(pairs)](const ActionTriple& t) {
        return std::find(pairs.begin(), pairs.end(), std::pair{t.sender, t.receiver}) !=
               pairs.end();
    };
}

LabelTable::LabelTable(std::vector<std::string> labels) {
    for (auto& l : labels) intern(l);
}

std::size_t LabelTable::intern(std::string_view label) {
    if (auto found = find(label)) return *found;
    labels_.emplace_back(label);
    return labels_.size() - 1;
}

std::optional<std::size_t> LabelTable::find(std::string_view label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::optional<double> parse_number(std::string_view field) {
    double value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
    return value;
}

enum class Column { Time, Sender, Receiver, Type, Covariate };

} // namespace

ParsedEvents parse_event_csv(std::string_view text, LabelTable actors, LabelTable types) {
    // UTF-8 byte order mark
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

    std::vector<std::string_view> lines;
    for (std::size_t start = 0; start < text.size();) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(start, nl - start);
        if (line.ends_with('\r')) line.remove_suffix(1);
        lines.push_back(line);
        start = nl + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw Error(Errc::EmptyFile, "no header row");

    ParsedEvents parsed;
    std::vector<Column> columns;
    std::optional<std::size_t> sender_col, receiver_col;
    bool has_type = false;
    for (auto name : split_fields(lines.front())) {
        Column col;
        if (name == "time") {
            col = Column::Time;
            if (parsed.has_time) throw Error(Errc::MalformedRow, "duplicate column time", 1);
            parsed.has_time = true;
        } else if (name == "sender") {
            col = Column::Sender;
            if (sender_col) throw Error(Errc::MalformedRow, "duplicate column sender", 1);
            sender_col = columns.size();
        } else if (name == "receiver") {
            col = Column::Receiver;
            if (receiver_col) throw Error(Errc::MalformedRow, "duplicate column receiver", 1);
            receiver_col = columns.size();
        } else if (name == "type") {
            col = Column::Type;
            if (has_type) throw Error(Errc::MalformedRow, "duplicate column type", 1);
            has_type = true;
        } else if (name.starts_with("cov_") && name.size() > 4) {
            col = Column::Covariate;
            parsed.covariate_names.emplace_back(name);
        } else {
            throw Error(Errc::UnknownColumn, "unknown column '" + std::string(name) + "'", 1);
        }
        columns.push_back(col);
    }
    if (!sender_col || !receiver_col) {
        throw Error(Errc::MalformedRow, "header must name sender and receiver columns", 1);
    }
    const auto default_type = has_type ? 0u : static_cast<std::uint32_t>(types.intern("0"));

    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        if (lines[li].empty()) continue;
        const auto fields = split_fields(lines[li]);
        if (fields.size() != columns.size()) {
            throw Error(Errc::MalformedRow,
                        "expected " + std::to_string(columns.size()) + " fields, found " +
                            std::to_string(fields.size()),
                        line_no);
        }
        DyadicEvent e;
        e.type = default_type;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const auto f = fields[c];
            switch (columns[c]) {
                case Column::Time:
                    if (!f.empty()) {
                        e.time = parse_number(f);
                        if (!e.time) throw Error(Errc::MalformedRow, "bad time value", line_no);
                    }
                    break;
                case Column::Sender:
                case Column::Receiver: {
                    if (f.empty()) throw Error(Errc::MalformedRow, "empty actor label", line_no);
                    const auto id = actor(actors.intern(f));
                    (columns[c] == Column::Sender ? e.sender : e.receiver) = id;
                    break;
                }
                case Column::Type:
                    if (f.empty()) throw Error(Errc::MalformedRow, "empty type label", line_no);
                    e.type = static_cast<std::uint32_t>(types.intern(f));
                    break;
                case Column::Covariate: {
                    const auto v = parse_number(f);
                    if (!v) throw Error(Errc::MalformedRow, "bad covariate value", line_no);
                    e.covariates.push_back(*v);
                    break;
                }
            }
        }
        parsed.events.push_back(std::move(e));
    }
    parsed.actors = std::move(actors);
    parsed.types = std::move(types);
    return parsed;
}

std::string serialize_event_csv(const EventHistory& history, const LabelTable& actors,
                                const LabelTable& types,
                                const std::vector<std::string>& covariate_names) {
    std::ostringstream out;
    const bool timed = history.timestamped();
    if (timed) out << "time,";
    out << "sender,receiver,type";
    for (std::size_t j = 0; j < history.covariate_dim(); ++j) {
        out << ','
            << (j < covariate_names.size() ? covariate_names[j] : "cov_" + std::to_string(j));
    }
    out << '\n';
    for (const auto& e : history.events()) {
        if (timed) out << format_double(*e.time) << ',';
        out << actors[to_index(e.sender)] << ',' << actors[to_index(e.receiver)] << ','
            << types[e.type];
        for (double v : e.covariates) out << ',' << format_double(v);
        out << '\n';
    }
    return out.str();
}

} // namespace remirl
