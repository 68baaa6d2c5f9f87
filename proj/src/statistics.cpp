#include "remirl/statistics.hpp"

#include <algorithm>
#include <charconv>

#include "remirl/error.hpp"

namespace remirl {

namespace {

const char* base_name(const StatisticSpec& spec) {
    switch (spec.kind) {
        case StatisticKind::Reciprocity: return "reciprocity";
        case StatisticKind::Inertia: return spec.raw_count ? "inertia_count" : "inertia";
        case StatisticKind::SenderActivity: return "sender_activity";
        case StatisticKind::ReceiverPopularity: return "receiver_popularity";
        case StatisticKind::Covariate: return "cov";
    }
    return "?";
}

std::optional<std::size_t> parse_count(std::string_view text) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
}

void check_window(const StatisticSpec& spec) {
    if (spec.window && *spec.window == 0) {
        throw Error(Errc::InvalidArgument, "statistic window must be at least 1");
    }
}

} // namespace

std::string StatisticSpec::name() const {
    std::string out = base_name(*this);
    if (kind == StatisticKind::Covariate) out += ":" + std::to_string(covariate_index);
    if (window) out += "@" + std::to_string(*window);
    return out;
}

std::vector<StatisticSpec> parse_statistic_specs(std::string_view text) {
    std::vector<StatisticSpec> specs;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        if (comma == std::string_view::npos) comma = text.size();
        auto item = trim(text.substr(start, comma - start));
        start = comma + 1;
        if (item.empty()) throw Error(Errc::InvalidArgument, "empty statistic name");

        StatisticSpec spec;
        if (auto at = item.find('@'); at != std::string_view::npos) {
            spec.window = parse_count(item.substr(at + 1));
            if (!spec.window) {
                throw Error(Errc::InvalidArgument, "bad window in '" + std::string(item) + "'");
            }
            item = item.substr(0, at);
        }
        if (item == "reciprocity") {
            spec.kind = StatisticKind::Reciprocity;
        } else if (item == "inertia") {
            spec.kind = StatisticKind::Inertia;
        } else if (item == "inertia_count") {
            spec.kind = StatisticKind::Inertia;
            spec.raw_count = true;
        } else if (item == "sender_activity") {
            spec.kind = StatisticKind::SenderActivity;
        } else if (item == "receiver_popularity") {
            spec.kind = StatisticKind::ReceiverPopularity;
        } else if (item.starts_with("cov:")) {
            spec.kind = StatisticKind::Covariate;
            auto index = parse_count(item.substr(4));
            if (!index) {
                throw Error(Errc::InvalidArgument, "bad covariate index in '" + std::string(item) + "'");
            }
            spec.covariate_index = *index;
        } else {
            throw Error(Errc::InvalidArgument, "unknown statistic '" + std::string(item) + "'");
        }
        check_window(spec);
        specs.push_back(spec);
        if (comma == text.size()) break;
    }
    return specs;
}

std::string format_statistic_specs(std::span<const StatisticSpec> specs) {
    std::string out;
    for (const auto& s : specs) {
        if (!out.empty()) out += ',';
        out += s.name();
    }
    return out;
}

double reciprocity(const ActionTriple& candidate, std::span<const DyadicEvent> prefix) {
    if (prefix.empty()) return 0.0;
    const auto& last = prefix.back();
    return candidate.sender == last.receiver && candidate.receiver == last.sender ? 1.0 : 0.0;
}

double inertia(const ActionTriple& candidate, std::span<const DyadicEvent> prefix,
               bool raw_count) {
    if (prefix.empty()) return 0.0;
    const auto n = std::count_if(prefix.begin(), prefix.end(),
                                 [&](const DyadicEvent& e) { return e.triple() == candidate; });
    return raw_count ? static_cast<double>(n)
                     : static_cast<double>(n) / static_cast<double>(prefix.size());
}

double sender_activity(const ActionTriple& candidate, std::span<const DyadicEvent> prefix) {
    if (prefix.empty()) return 0.0;
    const auto n = std::count_if(prefix.begin(), prefix.end(),
                                 [&](const DyadicEvent& e) { return e.sender == candidate.sender; });
    return static_cast<double>(n) / static_cast<double>(prefix.size());
}

double receiver_popularity(const ActionTriple& candidate, std::span<const DyadicEvent> prefix) {
    if (prefix.empty()) return 0.0;
    const auto n = std::count_if(prefix.begin(), prefix.end(), [&](const DyadicEvent& e) {
        return e.receiver == candidate.receiver;
    });
    return static_cast<double>(n) / static_cast<double>(prefix.size());
}

double evaluate_statistic(const StatisticSpec& spec, const ActionTriple& candidate,
                          std::span<const DyadicEvent> prefix, std::span<const double> covariates) {
    check_window(spec);
    if (spec.window) prefix = window(prefix, *spec.window, prefix.size());
    switch (spec.kind) {
        case StatisticKind::Reciprocity: return reciprocity(candidate, prefix);
        case StatisticKind::Inertia: return inertia(candidate, prefix, spec.raw_count);
        case StatisticKind::SenderActivity: return sender_activity(candidate, prefix);
        case StatisticKind::ReceiverPopularity: return receiver_popularity(candidate, prefix);
        case StatisticKind::Covariate:
            return spec.covariate_index < covariates.size() ? covariates[spec.covariate_index]
                                                            : 0.0;
    }
    return 0.0;
}

void StatisticsTracker::Memory::add(const ActionTriple& t, const ActionSpace& space, int sign) {
    triple_counts[space.key(t)] += sign;
    sender_counts[to_index(t.sender)] += sign;
    receiver_counts[to_index(t.receiver)] += sign;
}

StatisticsTracker::StatisticsTracker(const ActionSpace& space, std::vector<StatisticSpec> specs,
                                     const Eigen::MatrixXd* action_covariates)
    : space_(&space), specs_(std::move(specs)), covariates_(action_covariates) {
    if (covariates_ && static_cast<std::size_t>(covariates_->rows()) != space.size()) {
        throw Error(Errc::CovariateDimensionMismatch,
                    "action covariates have " + std::to_string(covariates_->rows()) +
                        " rows for " + std::to_string(space.size()) + " actions");
    }
    for (const auto& spec : specs_) {
        check_window(spec);
        if (spec.kind == StatisticKind::Covariate && covariates_ &&
            spec.covariate_index >= static_cast<std::size_t>(covariates_->cols())) {
            throw Error(Errc::CovariateDimensionMismatch,
                        "covariate index " + std::to_string(spec.covariate_index) +
                            " exceeds dimension " + std::to_string(covariates_->cols()));
        }
        spec_memory_.push_back(memory_for(spec.window));
    }
}

std::size_t StatisticsTracker::memory_for(const std::optional<std::size_t>& capacity) {
    for (std::size_t i = 0; i < memories_.size(); ++i) {
        if (memories_[i].capacity == capacity) return i;
    }
    Memory m;
    m.capacity = capacity;
    if (capacity) m.ring.resize(*capacity);
    const auto n = space_->n_actors();
    m.triple_counts.assign(n * n * space_->n_types(), 0.0);
    m.sender_counts.assign(n, 0.0);
    m.receiver_counts.assign(n, 0.0);
    memories_.push_back(std::move(m));
    return memories_.size() - 1;
}

void StatisticsTracker::push(const DyadicEvent& event) {
    const auto t = event.triple();
    if (!space_->in_range(t)) {
        throw Error(Errc::EventOutsideActionSpace, "event references an unknown actor or type");
    }
    for (auto& m : memories_) {
        if (m.capacity && m.size == *m.capacity) {
            m.add(m.ring[m.head], *space_, -1);
            m.ring[m.head] = t;
            m.head = (m.head + 1) % *m.capacity;
        } else {
            if (m.capacity) m.ring[(m.head + m.size) % *m.capacity] = t;
            ++m.size;
        }
        m.add(t, *space_, +1);
    }
    last_ = t;
    ++n_events_;
}

void StatisticsTracker::fill(Eigen::Ref<Eigen::MatrixXd> out) const {
    const auto& actions = space_->actions();
    for (std::size_t j = 0; j < specs_.size(); ++j) {
        const auto& spec = specs_[j];
        const auto& m = memories_[spec_memory_[j]];
        const double denom = m.size == 0 ? 0.0 : static_cast<double>(m.size);
        for (std::size_t r = 0; r < actions.size(); ++r) {
            const auto& a = actions[r];
            double v = 0.0;
            switch (spec.kind) {
                case StatisticKind::Reciprocity:
                    v = last_ && a.sender == last_->receiver && a.receiver == last_->sender;
                    break;
                case StatisticKind::Inertia:
                    if (m.size > 0) {
                        v = m.triple_counts[space_->key(a)];
                        if (!spec.raw_count) v /= denom;
                    }
                    break;
                case StatisticKind::SenderActivity:
                    if (m.size > 0) v = m.sender_counts[to_index(a.sender)] / denom;
                    break;
                case StatisticKind::ReceiverPopularity:
                    if (m.size > 0) v = m.receiver_counts[to_index(a.receiver)] / denom;
                    break;
                case StatisticKind::Covariate:
                    if (covariates_) v = (*covariates_)(r, spec.covariate_index);
                    break;
            }
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = v;
        }
    }
}

Eigen::MatrixXd StatisticsTracker::matrix() const {
    Eigen::MatrixXd out(space_->size(), specs_.size());
    fill(out);
    return out;
}

Eigen::MatrixXd statistics_matrix(const ActionSpace& space, std::span<const DyadicEvent> prefix,
                                  std::span<const StatisticSpec> specs,
                                  const Eigen::MatrixXd* action_covariates) {
    if (specs.empty()) throw Error(Errc::InvalidArgument, "at least one statistic is required");
    StatisticsTracker tracker(space, {specs.begin(), specs.end()}, action_covariates);
    for (const auto& e : prefix) tracker.push(e);
    return tracker.matrix();
}

} // namespace remirl
