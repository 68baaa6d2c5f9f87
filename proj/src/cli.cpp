#include "remirl/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include <CLI11.hpp>

#include "remirl/error.hpp"
#include "remirl/event_core.hpp"
#include "remirl/io.hpp"
#include "remirl/irl.hpp"
#include "remirl/mdp.hpp"
#include "remirl/rem.hpp"
#include "remirl/simulator.hpp"
#include "remirl/statistics.hpp"

namespace remirl {

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto pos = text.find(sep, start);
        if (pos == std::string_view::npos) pos = text.size();
        out.emplace_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double parse_double(const std::string& text, const char* what) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error(Errc::InvalidArgument, std::string("bad ") + what + " value '" + text + "'");
    }
    return v;
}

/// Comma-separated coefficients; a single value applies to every statistic.
Eigen::VectorXd parse_theta(const std::string& text, std::size_t dim) {
    const auto parts = split(text, ',');
    Eigen::VectorXd theta(static_cast<Eigen::Index>(dim));
    if (parts.size() == 1) {
        theta.setConstant(parse_double(parts[0], "theta"));
    } else if (parts.size() == dim) {
        for (std::size_t j = 0; j < dim; ++j) theta(static_cast<Eigen::Index>(j)) = parse_double(parts[j], "theta");
    } else {
        throw Error(Errc::InvalidArgument, "theta has " + std::to_string(parts.size()) +
                                               " values for " + std::to_string(dim) + " statistics");
    }
    return theta;
}

ActorId resolve_actor(const LabelTable& actors, const std::string& label) {
    const auto id = actors.find(label);
    if (!id) throw Error(Errc::InvalidArgument, "unknown actor '" + label + "'");
    return actor(*id);
}

/// `A>B,B>A` pairs resolved against the roster.
Permissibility parse_permit(const std::string& text, const LabelTable& actors) {
    std::vector<std::pair<ActorId, ActorId>> pairs;
    for (const auto& item : split(text, ',')) {
        const auto gt = item.find('>');
        if (gt == std::string::npos) {
            throw Error(Errc::InvalidArgument, "permit entries look like sender>receiver, got '" + item + "'");
        }
        pairs.emplace_back(resolve_actor(actors, item.substr(0, gt)),
                           resolve_actor(actors, item.substr(gt + 1)));
    }
    return pair_permissibility(std::move(pairs));
}

LabelTable seeded_roster(const std::string& actors) {
    LabelTable table;
    if (actors.empty()) return table;
    for (const auto& label : split(actors, ',')) table.intern(label);
    return table;
}

struct LoadedEvents {
    ParsedEvents parsed;
    EventHistory history;
    ActionSpace space;
};

LoadedEvents load_events(const std::string& path, const std::string& actors,
                         const std::string& permit, std::optional<double> end_time) {
    LoadedEvents loaded;
    loaded.parsed = parse_event_csv(read_file(path), seeded_roster(actors));
    if (!end_time && loaded.parsed.has_time && !loaded.parsed.events.empty() &&
        loaded.parsed.events.back().time) {
        end_time = loaded.parsed.events.back().time;
    }
    loaded.history = validate_history(loaded.parsed.events, end_time);
    loaded.space = enumerate_action_space(
        loaded.parsed.actors.size(), loaded.parsed.types.size(),
        permit.empty() ? Permissibility{} : parse_permit(permit, loaded.parsed.actors));
    return loaded;
}

/// Per-action covariates: the mean of the event covariates observed for each
/// triple, zero for triples never observed.
std::optional<Eigen::MatrixXd> action_covariates(const LoadedEvents& loaded) {
    const auto dim = static_cast<Eigen::Index>(loaded.history.covariate_dim());
    if (dim == 0) return std::nullopt;
    const auto n = static_cast<Eigen::Index>(loaded.space.size());
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n, dim);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
    for (const auto& e : loaded.history.events()) {
        const auto index = loaded.space.index_of(e.triple());
        if (!index) continue;
        const auto r = static_cast<Eigen::Index>(*index);
        for (Eigen::Index j = 0; j < dim; ++j) sums(r, j) += e.covariates[static_cast<std::size_t>(j)];
        counts(r) += 1.0;
    }
    for (Eigen::Index r = 0; r < n; ++r) {
        if (counts(r) > 0) sums.row(r) /= counts(r);
    }
    return sums;
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
    } else {
        write_file(path, content);
    }
}

void report_error(std::ostream& err, const char* name, const std::string& message) {
    err << dump_json(json{{"error", name}, {"message", message}});
}

LikelihoodMode parse_mode(const std::string& mode) {
    if (mode == "ordinal") return LikelihoodMode::Ordinal;
    if (mode == "timestamped") return LikelihoodMode::Timestamped;
    throw Error(Errc::InvalidArgument, "mode must be ordinal or timestamped");
}

EgoScheme parse_roles(const LabelTable& actors, const std::string& ego, const std::string& roles) {
    EgoScheme scheme;
    scheme.ego = resolve_actor(actors, ego);
    std::map<std::string, std::string> assigned;
    for (const auto& item : split(roles, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw Error(Errc::InvalidArgument, "roles look like own_driver=D1, got '" + item + "'");
        }
        assigned[item.substr(0, eq)] = item.substr(eq + 1);
    }
    for (const auto& [role, label] : assigned) {
        const auto id = resolve_actor(actors, label);
        if (role == "own_driver") {
            scheme.own_driver = id;
        } else if (role == "other_captain") {
            scheme.other_captain = id;
        } else if (role == "other_driver") {
            scheme.other_driver = id;
        } else {
            throw Error(Errc::InvalidArgument, "unknown role '" + role + "'");
        }
    }
    for (const char* role : {"own_driver", "other_captain", "other_driver"}) {
        if (!assigned.count(role)) throw Error(Errc::InvalidArgument, std::string("missing role ") + role);
    }
    return scheme;
}

} // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Relational event models and inverse reinforcement learning on dyadic event logs"};
    app.require_subcommand(1);

    std::string input, output, stats = "reciprocity,inertia", mode = "ordinal", permit, actors;
    std::string theta_text, fit_path, ego, roles, mdp_output, mdp_path, table_output, rule = "pm";
    std::optional<double> end_time;
    int max_iter = 5000, epochs = 5000, horizon = 0;
    double tol = 1e-8, lr = 0.01, irl_tol = 1e-6, smoothing = 1.0, epsilon = 0.0;
    std::uint64_t seed = 0;
    std::size_t n_events = 100, n_types = 1;
    bool timestamps = false;
    std::vector<std::string> inputs, names;

    auto* fit = app.add_subcommand("fit-rem", "Fit REM coefficients by maximum likelihood");
    fit->add_option("--input", input, "Event CSV")->required();
    fit->add_option("--output", output, "FitResult JSON (default: stdout)");
    fit->add_option("--stats", stats, "Statistics, e.g. reciprocity,inertia@50");
    fit->add_option("--mode", mode, "ordinal or timestamped");
    fit->add_option("--permit", permit, "Allowed sender>receiver pairs");
    fit->add_option("--actors", actors, "Roster labels fixed before reading the file");
    fit->add_option("--end-time", end_time, "Observation end (default: last timestamp)");
    fit->add_option("--max-iter", max_iter);
    fit->add_option("--tol", tol, "Gradient infinity-norm tolerance");

    auto* build = app.add_subcommand("build-mdp", "Convert events into an ego trajectory and MDP");
    build->add_option("--input", input, "Event CSV")->required();
    build->add_option("--ego", ego, "Agent actor label")->required();
    build->add_option("--roles", roles, "own_driver=..,other_captain=..,other_driver=..")->required();
    build->add_option("--output", output, "Trajectory CSV")->required();
    build->add_option("--mdp-output", mdp_output, "Transition JSON")->required();
    build->add_option("--smoothing", smoothing, "Additive smoothing constant");

    auto* irl = app.add_subcommand("irl", "Inverse reinforcement learning");
    irl->require_subcommand(1);
    auto* maxent = irl->add_subcommand("maxent", "Maximum-entropy IRL on a trajectory and MDP");
    maxent->add_option("--input", input, "Trajectory CSV")->required();
    maxent->add_option("--mdp", mdp_path, "MDP JSON")->required();
    maxent->add_option("--output", output, "RewardModel JSON")->required();
    maxent->add_option("--table", table_output, "Per-state reward CSV");
    maxent->add_option("--epochs", epochs);
    maxent->add_option("--lr", lr);
    maxent->add_option("--horizon", horizon, "0: longest demonstration");
    maxent->add_option("--tol", irl_tol, "Gradient infinity-norm tolerance");
    maxent->add_option("--seed", seed, "Seed for a random initial theta (with --init-scale)");
    double init_scale = 0.0;
    maxent->add_option("--init-scale", init_scale);

    auto* sim = app.add_subcommand("simulate", "Simulate an event history from REM coefficients");
    sim->add_option("--actors", actors, "Actor count or comma-separated labels");
    sim->add_option("--types", n_types, "Number of action types");
    sim->add_option("--stats", stats);
    sim->add_option("--theta", theta_text, "Coefficients (one value broadcasts)")->required();
    sim->add_option("--events", n_events);
    sim->add_option("--seed", seed);
    sim->add_option("--rule", rule, "pm (probability matching) or egreedy");
    sim->add_option("--epsilon", epsilon);
    sim->add_flag("--timestamps", timestamps, "Draw exponential waiting times");
    sim->add_option("--permit", permit);
    sim->add_option("--output", output, "Event CSV (default: stdout)");

    auto* equiv = app.add_subcommand("check-equivalence", "Compare REM and step-wise IRL likelihoods");
    equiv->add_option("--input", input, "Event CSV")->required();
    equiv->add_option("--stats", stats);
    equiv->add_option("--theta", theta_text);
    equiv->add_option("--fit", fit_path, "Take theta from a FitResult JSON");
    equiv->add_option("--permit", permit);
    equiv->add_option("--actors", actors);
    equiv->add_option("--output", output, "Report JSON (default: stdout)");

    auto* report = app.add_subcommand("report", "Side-by-side per-state rewards");
    report->add_option("--inputs", inputs, "RewardModel JSON files")->required()->expected(1, -1);
    report->add_option("--names", names, "Column names (default: file stems)");
    report->add_option("--output", output, "CSV (default: stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        report_error(err, "InvalidArgument", e.what());
        return kExitValidation;
    }

    try {
        if (fit->parsed()) {
            const auto specs = parse_statistic_specs(stats);
            const auto loaded = load_events(input, actors, permit, end_time);
            const auto covariates = action_covariates(loaded);
            FitConfig config;
            config.mode = parse_mode(mode);
            config.max_iter = max_iter;
            config.tol = tol;
            const auto result = fit_mle(loaded.history, specs, loaded.space, config,
                                        covariates ? &*covariates : nullptr);
            emit(output, dump_json(fit_result_to_json(result)), out);
            if (!result.converged) {
                report_error(err, "NotConverged",
                             "gradient norm " + std::to_string(result.gradient_norm) + " after " +
                                 std::to_string(result.n_iterations) + " iterations");
                return kExitNotConverged;
            }
            return kExitOk;
        }

        if (build->parsed()) {
            const auto parsed = parse_event_csv(read_file(input));
            const auto history = validate_history(parsed.events);
            const auto scheme = parse_roles(parsed.actors, ego, roles);
            const auto trajectory = build_ego_trajectory(history, scheme);
            const Mdp mdp = build_ego_mdp(std::span(&trajectory, 1), smoothing);
            write_file(output, trajectory_to_csv(trajectory, mdp));
            write_file(mdp_output, dump_json(mdp_to_json(mdp)));
            return kExitOk;
        }

        if (maxent->parsed()) {
            const Mdp mdp = mdp_from_json(json::parse(read_file(mdp_path)));
            const auto trajectory = trajectory_from_csv(read_file(input), mdp);
            MaxEntConfig config;
            config.learning_rate = lr;
            config.epochs = epochs;
            config.horizon = horizon;
            config.convergence_tol = irl_tol;
            config.seed = seed;
            config.init_scale = init_scale;
            const auto result = maxent_irl(mdp, std::span(&trajectory, 1), config);
            const auto doc = reward_model_to_json(result.reward, mdp);
            write_file(output, dump_json(doc));
            if (!table_output.empty()) {
                write_file(table_output, reward_table_csv(reward_report_from_json(doc)));
            }
            if (!result.converged) {
                report_error(err, "NotConverged",
                             "gradient norm " + std::to_string(result.gradient_norm) + " after " +
                                 std::to_string(result.epochs) + " epochs");
                return kExitNotConverged;
            }
            return kExitOk;
        }

        if (sim->parsed()) {
            LabelTable roster;
            std::size_t count = 0;
            if (actors.empty()) actors = "4";
            if (auto [ptr, ec] = std::from_chars(actors.data(), actors.data() + actors.size(), count);
                ec == std::errc{} && ptr == actors.data() + actors.size()) {
                for (std::size_t i = 1; i <= count; ++i) roster.intern("A" + std::to_string(i));
            } else {
                roster = seeded_roster(actors);
            }
            LabelTable types;
            for (std::size_t c = 0; c < n_types; ++c) types.intern(std::to_string(c));
            const auto space = enumerate_action_space(
                roster.size(), types.size(), permit.empty() ? Permissibility{} : parse_permit(permit, roster));
            SimConfig config;
            config.specs = parse_statistic_specs(stats);
            config.theta = parse_theta(theta_text, config.specs.size());
            config.n_events = n_events;
            config.seed = seed;
            config.timestamps = timestamps;
            config.epsilon = epsilon;
            if (rule == "pm") {
                config.rule = ChoiceRule::ProbabilityMatching;
            } else if (rule == "egreedy") {
                config.rule = ChoiceRule::EpsilonGreedy;
            } else {
                throw Error(Errc::InvalidArgument, "rule must be pm or egreedy");
            }
            const auto history = simulate_rem(space, config);
            emit(output, serialize_event_csv(history, roster, types), out);
            return kExitOk;
        }

        if (equiv->parsed()) {
            const auto specs = parse_statistic_specs(stats);
            Eigen::VectorXd theta;
            if (!fit_path.empty()) {
                const auto doc = json::parse(read_file(fit_path));
                const auto values = doc.at("theta").get<std::vector<double>>();
                theta = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
            } else if (!theta_text.empty()) {
                theta = parse_theta(theta_text, specs.size());
            } else {
                throw Error(Errc::InvalidArgument, "check-equivalence needs --theta or --fit");
            }
            if (static_cast<std::size_t>(theta.size()) != specs.size()) {
                throw Error(Errc::InvalidArgument, "theta length does not match the statistic count");
            }
            const auto loaded = load_events(input, actors, permit, std::nullopt);
            const auto covariates = action_covariates(loaded);
            const auto result = rem_birl_equivalence(loaded.history, RemModel{specs, theta},
                                                     loaded.space, covariates ? &*covariates : nullptr);
            emit(output, dump_json(equivalence_to_json(result)), out);
            return kExitOk;
        }

        if (report->parsed()) {
            std::vector<RewardReport> reports;
            for (const auto& path : inputs) reports.push_back(reward_report_from_json(json::parse(read_file(path))));
            if (names.empty()) {
                for (const auto& path : inputs) names.push_back(std::filesystem::path(path).stem().string());
            }
            emit(output, reward_comparison_csv(reports, names), out);
            return kExitOk;
        }
    } catch (const Error& e) {
        report_error(err, e.name(), e.what());
        return kExitValidation;
    } catch (const json::exception& e) {
        report_error(err, "InvalidArgument", e.what());
        return kExitValidation;
    }
    return kExitValidation;
}

} // namespace remirl
