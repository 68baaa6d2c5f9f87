#include "remirl/rem.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "remirl/error.hpp"
#include "remirl/numeric.hpp"

namespace remirl {

RemDesign build_design(const EventHistory& history, std::span<const StatisticSpec> specs,
                       const ActionSpace& space, const Eigen::MatrixXd* action_covariates) {
    if (specs.empty()) throw Error(Errc::InvalidArgument, "at least one statistic is required");
    RemDesign design;
    design.n_actions = static_cast<Eigen::Index>(space.size());
    design.n_steps = static_cast<Eigen::Index>(history.size());
    design.stats.resize((design.n_steps + 1) * design.n_actions,
                        static_cast<Eigen::Index>(specs.size()));
    design.realized.reserve(history.size());

    StatisticsTracker tracker(space, {specs.begin(), specs.end()}, action_covariates);
    for (Eigen::Index i = 0; i < design.n_steps; ++i) {
        const auto& e = history[static_cast<std::size_t>(i)];
        const auto index = space.index_of(e.triple());
        if (!index) {
            throw Error(Errc::EventOutsideActionSpace,
                        "event " + std::to_string(i) + " is not a member of the action space");
        }
        tracker.fill(design.stats.middleRows(i * design.n_actions, design.n_actions));
        design.realized.push_back(static_cast<Eigen::Index>(*index));
        tracker.push(e);
    }
    tracker.fill(design.stats.middleRows(design.n_steps * design.n_actions, design.n_actions));

    design.timestamped = history.timestamped() && history.end_time().has_value();
    if (design.timestamped) {
        design.waits.resize(design.n_steps);
        double previous = history.origin_time();
        for (Eigen::Index i = 0; i < design.n_steps; ++i) {
            const double t = *history[static_cast<std::size_t>(i)].time;
            design.waits(i) = t - previous;
            previous = t;
        }
        design.tail = *history.end_time() - previous;
    } else if (history.empty() && history.end_time()) {
        design.timestamped = true;
        design.tail = *history.end_time() - history.origin_time();
    }
    return design;
}

double log_rate(const ActionTriple& candidate, std::span<const DyadicEvent> prefix,
                const RemModel& model, std::span<const double> covariates) {
    double score = 0.0;
    for (std::size_t j = 0; j < model.specs.size(); ++j) {
        score += model.theta(static_cast<Eigen::Index>(j)) *
                 evaluate_statistic(model.specs[j], candidate, prefix, covariates);
    }
    return score;
}

double rate(const ActionTriple& candidate, std::span<const DyadicEvent> prefix,
            const RemModel& model, std::span<const double> covariates) {
    return std::exp(log_rate(candidate, prefix, model, covariates));
}

LoglikEvaluation evaluate_loglik(const RemDesign& design, const Eigen::VectorXd& theta,
                                 LikelihoodMode mode) {
    if (theta.size() != design.dim()) {
        throw Error(Errc::InvalidArgument, "theta length does not match the statistic count");
    }
    LoglikEvaluation out;
    out.gradient = Eigen::VectorXd::Zero(design.dim());
    Eigen::VectorXd scores(design.n_actions);
    Eigen::VectorXd weights(design.n_actions);

    if (mode == LikelihoodMode::Ordinal) {
        for (Eigen::Index i = 0; i < design.n_steps; ++i) {
            const auto block = design.step(i);
            scores.noalias() = block * theta;
            const double lse = log_sum_exp(scores);
            const auto r = design.realized[static_cast<std::size_t>(i)];
            out.loglik += scores(r) - lse;
            weights = (scores.array() - lse).exp().matrix();
            out.gradient += block.row(r).transpose();
            out.gradient.noalias() -= block.transpose() * weights;
        }
        return out;
    }

    if (!design.timestamped) {
        throw Error(Errc::MissingTimestamps, "timestamped likelihood needs timestamps and an end time");
    }
    auto survival = [&](Eigen::Index i, double exposure) {
        if (exposure == 0.0) return;
        const auto block = design.step(i);
        scores.noalias() = block * theta;
        weights = scores.array().exp().matrix();
        out.loglik -= exposure * weights.sum();
        out.gradient.noalias() -= exposure * (block.transpose() * weights);
    };
    for (Eigen::Index i = 0; i < design.n_steps; ++i) {
        const auto block = design.step(i);
        const auto r = design.realized[static_cast<std::size_t>(i)];
        out.loglik += block.row(r).dot(theta);
        out.gradient += block.row(r).transpose();
        survival(i, design.waits(i));
    }
    survival(design.n_steps, design.tail);
    return out;
}

double ordinal_loglik(const RemDesign& design, const Eigen::VectorXd& theta) {
    return evaluate_loglik(design, theta, LikelihoodMode::Ordinal).loglik;
}

double timestamped_loglik(const RemDesign& design, const Eigen::VectorXd& theta) {
    return evaluate_loglik(design, theta, LikelihoodMode::Timestamped).loglik;
}

namespace {

void require_timestamps(const EventHistory& history) {
    if (!history.empty() && !history.timestamped()) {
        throw Error(Errc::MissingTimestamps, "history has no timestamps");
    }
    if (!history.end_time()) {
        throw Error(Errc::MissingEndTime, "timestamped likelihood needs an observation end time");
    }
}

void check_model(const RemModel& model) {
    if (static_cast<std::size_t>(model.theta.size()) != model.specs.size()) {
        throw Error(Errc::InvalidArgument, "theta length does not match the statistic count");
    }
    if (!model.theta.allFinite()) throw Error(Errc::InvalidArgument, "theta must be finite");
}

} // namespace

double ordinal_loglik(const EventHistory& history, const RemModel& model,
                      const ActionSpace& space) {
    check_model(model);
    return ordinal_loglik(build_design(history, model.specs, space), model.theta);
}

double timestamped_loglik(const EventHistory& history, const RemModel& model,
                          const ActionSpace& space) {
    check_model(model);
    require_timestamps(history);
    return timestamped_loglik(build_design(history, model.specs, space), model.theta);
}

Eigen::VectorXd loglik_gradient(const EventHistory& history, const RemModel& model,
                                const ActionSpace& space, LikelihoodMode mode) {
    check_model(model);
    if (mode == LikelihoodMode::Timestamped) require_timestamps(history);
    return evaluate_loglik(build_design(history, model.specs, space), model.theta, mode).gradient;
}

Eigen::MatrixXd numerical_hessian(const RemDesign& design, const Eigen::VectorXd& theta,
                                  LikelihoodMode mode, double step) {
    const auto d = design.dim();
    Eigen::MatrixXd hessian(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        const double h = step * std::max(1.0, std::abs(theta(k)));
        Eigen::VectorXd up = theta, down = theta;
        up(k) += h;
        down(k) -= h;
        hessian.col(k) = (evaluate_loglik(design, up, mode).gradient -
                          evaluate_loglik(design, down, mode).gradient) /
                         (up(k) - down(k));
    }
    return 0.5 * (hessian + hessian.transpose());
}

namespace {

void check_identifiable(const RemDesign& design, LikelihoodMode mode) {
    for (Eigen::Index j = 0; j < design.dim(); ++j) {
        bool degenerate = true;
        if (mode == LikelihoodMode::Ordinal) {
            // A column constant within every step cancels out of each softmax.
            for (Eigen::Index i = 0; i < design.n_steps && degenerate; ++i) {
                const auto col = design.step(i).col(j);
                degenerate = col.maxCoeff() == col.minCoeff();
            }
        } else {
            degenerate = (design.stats.col(j).array() == 0.0).all();
        }
        if (degenerate) {
            throw Error(Errc::DegenerateStatistic,
                        "statistic column " + std::to_string(j) + " does not vary; its coefficient is unidentifiable");
        }
    }
}

} // namespace

FitResult fit_mle(const RemDesign& design, const FitConfig& config) {
    if (design.n_steps < 1) throw Error(Errc::InvalidArgument, "fitting needs at least one event");
    if (design.dim() < 1) throw Error(Errc::InvalidArgument, "fitting needs at least one statistic");
    if (config.mode == LikelihoodMode::Timestamped && !design.timestamped) {
        throw Error(Errc::MissingTimestamps, "timestamped fit needs timestamps and an end time");
    }
    check_identifiable(design, config.mode);

    FitResult result;
    Eigen::VectorXd theta = config.init_theta.value_or(Eigen::VectorXd::Zero(design.dim()));
    if (theta.size() != design.dim()) {
        throw Error(Errc::InvalidArgument, "initial theta has the wrong length");
    }
    auto current = evaluate_loglik(design, theta, config.mode);
    result.loglik_trace.push_back(current.loglik);

    constexpr double armijo = 1e-4;
    double step = 1.0 / std::max(1.0, current.gradient.norm());
    int iter = 0;
    for (; iter < config.max_iter; ++iter) {
        if (inf_norm(current.gradient) <= config.tol) break;
        const Eigen::VectorXd& direction = current.gradient;
        const double slope = direction.squaredNorm();

        bool accepted = false;
        Eigen::VectorXd trial_theta;
        LoglikEvaluation trial;
        for (int halvings = 0; halvings < 80; ++halvings) {
            trial_theta = theta + step * direction;
            trial = evaluate_loglik(design, trial_theta, config.mode);
            // Along the ray the log-likelihood is concave, so a non-negative
            // directional derivative at the trial point also certifies ascent
            // when the function change is below rounding resolution.
            if (std::isfinite(trial.loglik) &&
                (trial.loglik >= current.loglik + armijo * step * slope ||
                 trial.gradient.dot(direction) >= 0.0)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        // Barzilai-Borwein trial length for the next iteration.
        const Eigen::VectorXd s = trial_theta - theta;
        const Eigen::VectorXd y = trial.gradient - current.gradient;
        const double sy = s.dot(y);
        step = sy < 0.0 ? -s.squaredNorm() / sy : 2.0 * step;

        theta = std::move(trial_theta);
        current = std::move(trial);
        result.loglik_trace.push_back(current.loglik);
    }

    result.theta_hat = theta;
    result.loglik = current.loglik;
    result.gradient_norm = inf_norm(current.gradient);
    result.n_iterations = iter;
    result.converged = result.gradient_norm <= config.tol;

    if (config.std_errors) {
        const Eigen::MatrixXd information = -numerical_hessian(design, theta, config.mode);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(information);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
            (ldlt.vectorD().array() > 0.0).all()) {
            const Eigen::MatrixXd covariance =
                ldlt.solve(Eigen::MatrixXd::Identity(design.dim(), design.dim()));
            result.std_errors = covariance.diagonal().cwiseSqrt();
        }
    }
    return result;
}

FitResult fit_mle(const EventHistory& history, std::span<const StatisticSpec> specs,
                  const ActionSpace& space, const FitConfig& config,
                  const Eigen::MatrixXd* action_covariates) {
    if (history.empty()) throw Error(Errc::InvalidArgument, "fitting needs at least one event");
    if (config.mode == LikelihoodMode::Timestamped) require_timestamps(history);
    return fit_mle(build_design(history, specs, space, action_covariates), config);
}

} // namespace remirl
