#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "remirl/irl.hpp"
#include "remirl/mdp.hpp"
#include "remirl/rem.hpp"

namespace remirl {

using json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Pretty-printed JSON with every float rendered as `%.17g`.
std::string dump_json(const json& value);

/// `{"theta": [...], "loglik": x, "se": [...], "converged": b, "iterations": n}`
json fit_result_to_json(const FitResult& fit);

json mdp_to_json(const Mdp& mdp);
Mdp mdp_from_json(const json& doc);

/// `{"theta": [...], "gamma": g, "state_rewards": [...], "state_labels": [...]}`
json reward_model_to_json(const RewardModel& model, const Mdp& mdp);

struct RewardReport {
    Eigen::VectorXd theta;
    double gamma = 0.0;
    Eigen::VectorXd state_rewards;
    std::vector<std::string> state_labels;
};
RewardReport reward_report_from_json(const json& doc);

json equivalence_to_json(const EquivalenceReport& report);

/// `step,state_label,action_label` rows.
std::string trajectory_to_csv(const Trajectory& trajectory, const Mdp& mdp);
Trajectory trajectory_from_csv(std::string_view text, const Mdp& mdp);

/// `state_label,reward` rows.
std::string reward_table_csv(const RewardReport& report);

/// Side-by-side per-state rewards, one column per agent, matched by label.
std::string reward_comparison_csv(std::span<const RewardReport> reports,
                                  std::span<const std::string> names);

} // namespace remirl
