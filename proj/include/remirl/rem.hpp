#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "remirl/event_core.hpp"
#include "remirl/statistics.hpp"

namespace remirl {

struct RemModel {
    std::vector<StatisticSpec> specs;
    Eigen::VectorXd theta;
};

enum class LikelihoodMode { Ordinal, Timestamped };

/// Statistic matrices for every step of a history, stacked into one
/// ((M+1)|A|) x d matrix. Block i holds the rows for all candidates given the
/// first i events; the final block (i = M) feeds the trailing survival term.
struct RemDesign {
    Eigen::Index n_actions = 0;
    Eigen::Index n_steps = 0;
    Eigen::MatrixXd stats;
    std::vector<Eigen::Index> realized;  // action index of event i
    Eigen::VectorXd waits;               // tau_i - tau_{i-1}; empty when untimed
    double tail = 0.0;                   // end_time - tau_M
    bool timestamped = false;

    Eigen::Index dim() const noexcept { return stats.cols(); }
    auto step(Eigen::Index i) const { return stats.middleRows(i * n_actions, n_actions); }
};

/// Throws EventOutsideActionSpace when an event is not a member of `space`.
RemDesign build_design(const EventHistory& history, std::span<const StatisticSpec> specs,
                       const ActionSpace& space,
                       const Eigen::MatrixXd* action_covariates = nullptr);

/// theta . u(candidate, prefix), evaluated from the scalar statistic definitions.
double log_rate(const ActionTriple& candidate, std::span<const DyadicEvent> prefix,
                const RemModel& model, std::span<const double> covariates = {});
double rate(const ActionTriple& candidate, std::span<const DyadicEvent> prefix,
            const RemModel& model, std::span<const double> covariates = {});

struct LoglikEvaluation {
    double loglik = 0.0;
    Eigen::VectorXd gradient;
};

LoglikEvaluation evaluate_loglik(const RemDesign& design, const Eigen::VectorXd& theta,
                                 LikelihoodMode mode);

double ordinal_loglik(const RemDesign& design, const Eigen::VectorXd& theta);
double timestamped_loglik(const RemDesign& design, const Eigen::VectorXd& theta);

double ordinal_loglik(const EventHistory& history, const RemModel& model,
                      const ActionSpace& space);
/// Requires every event timestamped and an end time (MissingTimestamps, MissingEndTime).
double timestamped_loglik(const EventHistory& history, const RemModel& model,
                          const ActionSpace& space);
Eigen::VectorXd loglik_gradient(const EventHistory& history, const RemModel& model,
                                const ActionSpace& space, LikelihoodMode mode);

struct FitConfig {
    LikelihoodMode mode = LikelihoodMode::Ordinal;
    std::optional<Eigen::VectorXd> init_theta;  // zero when unset
    int max_iter = 5000;
    double tol = 1e-8;
    bool std_errors = true;
};

struct FitResult {
    Eigen::VectorXd theta_hat;
    double loglik = 0.0;
    double gradient_norm = 0.0;  // infinity norm at theta_hat
    int n_iterations = 0;
    bool converged = false;
    std::optional<Eigen::VectorXd> std_errors;
    std::vector<double> loglik_trace;  // one entry per accepted iterate, starting at init
};

/// Maximum-likelihood fit by gradient ascent with Armijo backtracking.
/// Non-convergence is reported through `converged`; an unidentifiable
/// statistic column raises DegenerateStatistic.
FitResult fit_mle(const RemDesign& design, const FitConfig& config = {});
FitResult fit_mle(const EventHistory& history, std::span<const StatisticSpec> specs,
                  const ActionSpace& space, const FitConfig& config = {},
                  const Eigen::MatrixXd* action_covariates = nullptr);

/// Central-difference Hessian of the log-likelihood built from analytic gradients.
Eigen::MatrixXd numerical_hessian(const RemDesign& design, const Eigen::VectorXd& theta,
                                  LikelihoodMode mode, double step = 1e-5);

} // namespace remirl
