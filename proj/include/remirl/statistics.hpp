#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "remirl/event_core.hpp"

namespace remirl {

enum class StatisticKind { Reciprocity, Inertia, SenderActivity, ReceiverPopularity, Covariate };

/// One column of the sufficient-statistic vector.
///
/// `window` limits the statistic's memory to the most recent events (default:
/// the whole prefix). `raw_count` switches inertia from a frequency to a count.
struct StatisticSpec {
    StatisticKind kind = StatisticKind::Reciprocity;
    std::optional<std::size_t> window;
    bool raw_count = false;
    std::size_t covariate_index = 0;

    static StatisticSpec reciprocity() { return {StatisticKind::Reciprocity, {}}; }
    static StatisticSpec inertia(std::optional<std::size_t> window = {}) {
        return {StatisticKind::Inertia, window};
    }
    static StatisticSpec sender_activity() { return {StatisticKind::SenderActivity, {}}; }
    static StatisticSpec receiver_popularity() {
        return {StatisticKind::ReceiverPopularity, {}};
    }
    static StatisticSpec covariate(std::size_t index) {
        return {StatisticKind::Covariate, std::nullopt, false, index};
    }

    /// Textual form accepted by parse_statistic_specs.
    std::string name() const;

    friend bool operator==(const StatisticSpec&, const StatisticSpec&) = default;
};

/// Parses `reciprocity,inertia@50,inertia_count,sender_activity,receiver_popularity,cov:0`.
std::vector<StatisticSpec> parse_statistic_specs(std::string_view text);
std::string format_statistic_specs(std::span<const StatisticSpec> specs);

// Scalar definitions over an explicit prefix (oldest first). These scan the
// prefix directly and serve as the reference for the incremental tracker.

/// 1 when the candidate reverses the most recent event; type is ignored.
double reciprocity(const ActionTriple& candidate, std::span<const DyadicEvent> prefix);
/// Share (or count, with raw_count) of prefix events identical to the candidate.
double inertia(const ActionTriple& candidate, std::span<const DyadicEvent> prefix,
               bool raw_count = false);
double sender_activity(const ActionTriple& candidate, std::span<const DyadicEvent> prefix);
double receiver_popularity(const ActionTriple& candidate, std::span<const DyadicEvent> prefix);

/// One statistic for one candidate, honoring the spec's memory window.
/// `covariates` is the candidate's covariate row (empty when absent).
double evaluate_statistic(const StatisticSpec& spec, const ActionTriple& candidate,
                          std::span<const DyadicEvent> prefix,
                          std::span<const double> covariates = {});

/// Maintains running counts so that the statistic matrix for the next step
/// costs O(|A| d) regardless of history length.
class StatisticsTracker {
public:
    /// `action_covariates`, when given, is |A| x p and feeds Covariate columns.
    StatisticsTracker(const ActionSpace& space, std::vector<StatisticSpec> specs,
                      const Eigen::MatrixXd* action_covariates = nullptr);

    void push(const DyadicEvent& event);
    std::size_t n_events() const noexcept { return n_events_; }

    /// Writes the |A| x d statistic matrix for the current prefix.
    void fill(Eigen::Ref<Eigen::MatrixXd> out) const;
    Eigen::MatrixXd matrix() const;

private:
    struct Memory {
        std::optional<std::size_t> capacity;
        std::vector<ActionTriple> ring;  // bounded windows only
        std::size_t head = 0;
        std::size_t size = 0;
        std::vector<double> triple_counts;
        std::vector<double> sender_counts;
        std::vector<double> receiver_counts;

        void add(const ActionTriple& t, const ActionSpace& space, int sign);
    };

    std::size_t memory_for(const std::optional<std::size_t>& capacity);

    const ActionSpace* space_;
    std::vector<StatisticSpec> specs_;
    const Eigen::MatrixXd* covariates_;
    std::vector<Memory> memories_;
    std::vector<std::size_t> spec_memory_;
    std::optional<ActionTriple> last_;
    std::size_t n_events_ = 0;
};

/// |A| x d matrix of statistics for every action in `space` given the prefix.
Eigen::MatrixXd statistics_matrix(const ActionSpace& space, std::span<const DyadicEvent> prefix,
                                  std::span<const StatisticSpec> specs,
                                  const Eigen::MatrixXd* action_covariates = nullptr);

} // namespace remirl
