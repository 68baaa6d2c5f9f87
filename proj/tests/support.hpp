#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Core>

#include "remirl/cli.hpp"
#include "remirl/event_core.hpp"
#include "remirl/random.hpp"
#include "remirl/rem.hpp"
#include "remirl/statistics.hpp"

namespace remirl::testing {

// Upper 0.999 quantiles of the chi-squared distribution, by degrees of freedom.
inline double chi2_999(int df) {
    switch (df) {
        case 1: return 10.827566170662733;
        case 2: return 13.815510557964274;
        case 3: return 16.26623619623813;
        case 5: return 20.515005652432873;
        case 11: return 31.264133620239985;
        case 19: return 43.82019596451753;
        default: return NAN;
    }
}

inline constexpr double kZ975 = 1.959963984540054;

inline std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + std::min<std::size_t>(static_cast<std::size_t>(rng.uniform() * (hi - lo + 1)),
                                      hi - lo);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * rng.uniform();
}

inline const std::vector<StatisticSpec>& statistic_pool() {
    static const std::vector<StatisticSpec> pool = parse_statistic_specs(
        "reciprocity,inertia,inertia_count,sender_activity,receiver_popularity,inertia@3,"
        "reciprocity@2,sender_activity@4");
    return pool;
}

/// d distinct statistics drawn from the pool.
inline std::vector<StatisticSpec> random_specs(Rng& rng, std::size_t d) {
    std::vector<std::size_t> order(statistic_pool().size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_int(rng, 0, i - 1)]);
    std::vector<StatisticSpec> specs;
    for (std::size_t i = 0; i < d; ++i) specs.push_back(statistic_pool()[order[i]]);
    return specs;
}

inline Eigen::VectorXd random_theta(Rng& rng, std::size_t d, double bound = 2.0) {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < theta.size(); ++j) theta(j) = uniform_real(rng, -bound, bound);
    return theta;
}

/// Uniformly random members of `space`, optionally with exponential gaps.
inline EventHistory random_history(Rng& rng, const ActionSpace& space, std::size_t m,
                                   bool timestamps = false) {
    std::vector<DyadicEvent> events;
    double clock = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& t = space[uniform_int(rng, 0, space.size() - 1)];
        DyadicEvent e{t.sender, t.receiver, t.type, std::nullopt, {}};
        if (timestamps) {
            clock += rng.exponential(2.0);
            e.time = clock;
        }
        events.push_back(e);
    }
    std::optional<double> end;
    if (timestamps) end = clock + rng.exponential(2.0);
    return validate_history(std::move(events), end);
}

/// Ordinal log-likelihood straight from the scalar statistic definitions.
inline double brute_force_ordinal(const EventHistory& history, const RemModel& model,
                                  const ActionSpace& space) {
    const std::span<const DyadicEvent> events(history.events());
    double total = 0.0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto prefix = events.first(i);
        double denom = 0.0;
        for (const auto& a : space.actions()) denom += rate(a, prefix, model);
        total += std::log(rate(events[i].triple(), prefix, model) / denom);
    }
    return total;
}

/// Timestamped log-likelihood straight from the scalar statistic definitions.
inline double brute_force_timestamped(const EventHistory& history, const RemModel& model,
                                      const ActionSpace& space) {
    const std::span<const DyadicEvent> events(history.events());
    double total = 0.0;
    double previous = 0.0;
    for (std::size_t i = 0; i <= events.size(); ++i) {
        const auto prefix = events.first(i);
        double sum = 0.0;
        for (const auto& a : space.actions()) sum += rate(a, prefix, model);
        const double t = i < events.size() ? *events[i].time : *history.end_time();
        total -= (t - previous) * sum;
        if (i < events.size()) total += log_rate(events[i].triple(), prefix, model);
        previous = t;
    }
    return total;
}

template <class F>
Eigen::VectorXd central_difference(F&& f, const Eigen::VectorXd& x, double h = 1e-5) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        Eigen::VectorXd up = x, down = x;
        up(k) += h;
        down(k) -= h;
        g(k) = (f(up) - f(down)) / (2.0 * h);
    }
    return g;
}

/// Average ranks, 1-based.
inline std::vector<double> ranks(const Eigen::VectorXd& v) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(v.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v(a) < v(b); });
    std::vector<double> r(order.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v(order[j + 1]) == v(order[i])) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[static_cast<std::size_t>(order[k])] = avg;
        i = j + 1;
    }
    return r;
}

inline double spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const Eigen::Map<const Eigen::VectorXd> x(ra.data(), static_cast<Eigen::Index>(ra.size()));
    const Eigen::Map<const Eigen::VectorXd> y(rb.data(), static_cast<Eigen::Index>(rb.size()));
    const Eigen::VectorXd dx = x.array() - x.mean();
    const Eigen::VectorXd dy = y.array() - y.mean();
    return dx.dot(dy) / std::sqrt(dx.squaredNorm() * dy.squaredNorm());
}

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
};

inline CliRun cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    CliRun run;
    run.code = run_cli(args, out, err);
    run.out = out.str();
    run.err = err.str();
    return run;
}

/// Fresh scratch directory under the system temp path, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("remirl_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

} // namespace remirl::testing
