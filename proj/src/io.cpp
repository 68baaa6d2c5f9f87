#include "remirl/io.hpp"

#include <algorithm>
#include <fstream>
#include <cmath>
#include <sstream>

#include "remirl/error.hpp"
#include "remirl/format.hpp"

namespace remirl {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::InvalidArgument, "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::InvalidArgument, "cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

namespace {

void dump_into(std::ostringstream& out, const json& value, int indent, int depth) {
    const auto pad = [&](int level) { out << '\n' << std::string(static_cast<std::size_t>(level * indent), ' '); };
    switch (value.type()) {
        case json::value_t::number_float: {
            const double v = value.get<double>();
            if (std::isfinite(v)) out << format_double(v); else out << "null";
            break;
        }
        case json::value_t::array: {
            if (value.empty()) { out << "[]"; break; }
            const bool flat = std::none_of(value.begin(), value.end(),
                                           [](const json& x) { return x.is_structured(); });
            out << '[';
            bool first = true;
            for (const auto& item : value) {
                if (!first) out << (flat ? ", " : ",");
                if (!flat) pad(depth + 1);
                dump_into(out, item, indent, depth + 1);
                first = false;
            }
            if (!flat) pad(depth);
            out << ']';
            break;
        }
        case json::value_t::object: {
            if (value.empty()) { out << "{}"; break; }
            out << '{';
            bool first = true;
            for (const auto& [key, item] : value.items()) {
                if (!first) out << ',';
                pad(depth + 1);
                out << json(key).dump() << ": ";
                dump_into(out, item, indent, depth + 1);
                first = false;
            }
            pad(depth);
            out << '}';
            break;
        }
        default: out << value.dump(); break;
    }
}

json vector_json(const Eigen::VectorXd& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

} // namespace

std::string dump_json(const json& value) {
    std::ostringstream out;
    dump_into(out, value, 2, 0);
    out << '\n';
    return out.str();
}

json fit_result_to_json(const FitResult& fit) {
    return {{"theta", vector_json(fit.theta_hat)},
            {"loglik", fit.loglik},
            {"se", fit.std_errors ? vector_json(*fit.std_errors) : json(nullptr)},
            {"converged", fit.converged},
            {"iterations", fit.n_iterations}};
}

json mdp_to_json(const Mdp& mdp) {
    json transitions = json::array();
    for (const auto& p : dense_transitions(mdp)) {
        json rows = json::array();
        for (Eigen::Index s = 0; s < p.rows(); ++s) rows.push_back(vector_json(p.row(s).transpose()));
        transitions.push_back(std::move(rows));
    }
    const Eigen::MatrixXd features(mdp.features);
    json feature_rows = json::array();
    for (Eigen::Index s = 0; s < features.rows(); ++s) {
        feature_rows.push_back(vector_json(features.row(s).transpose()));
    }
    return {{"state_labels", mdp.state_labels},
            {"action_labels", mdp.action_labels},
            {"features", std::move(feature_rows)},
            {"transitions", std::move(transitions)}};
}

Mdp mdp_from_json(const json& doc) {
    try {
        TransitionTensor tensor;
        for (const auto& rows : doc.at("transitions")) {
            const auto n = static_cast<Eigen::Index>(rows.size());
            Eigen::MatrixXd p(n, n);
            for (Eigen::Index s = 0; s < n; ++s) {
                const auto row = vector_from(rows.at(static_cast<std::size_t>(s)));
                if (row.size() != n) throw Error(Errc::InvalidArgument, "ragged transition matrix");
                p.row(s) = row.transpose();
            }
            tensor.push_back(std::move(p));
        }
        const auto& feature_rows = doc.at("features");
        const auto n_states = static_cast<Eigen::Index>(feature_rows.size());
        const auto dim = n_states == 0 ? 0 : static_cast<Eigen::Index>(feature_rows.at(0).size());
        Eigen::MatrixXd features(n_states, dim);
        for (Eigen::Index s = 0; s < n_states; ++s) {
            const auto row = vector_from(feature_rows.at(static_cast<std::size_t>(s)));
            if (row.size() != dim) throw Error(Errc::InvalidArgument, "ragged feature matrix");
            features.row(s) = row.transpose();
        }
        return make_mdp(tensor, features.sparseView(),
                        doc.at("state_labels").get<std::vector<std::string>>(),
                        doc.at("action_labels").get<std::vector<std::string>>());
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidArgument, std::string("malformed MDP document: ") + e.what());
    }
}

json reward_model_to_json(const RewardModel& model, const Mdp& mdp) {
    return {{"theta", vector_json(model.theta)},
            {"gamma", model.gamma},
            {"state_rewards", vector_json(model.state_rewards(mdp))},
            {"state_labels", mdp.state_labels}};
}

RewardReport reward_report_from_json(const json& doc) {
    try {
        RewardReport r;
        r.theta = vector_from(doc.at("theta"));
        r.gamma = doc.at("gamma").get<double>();
        r.state_rewards = vector_from(doc.at("state_rewards"));
        r.state_labels = doc.at("state_labels").get<std::vector<std::string>>();
        if (static_cast<std::size_t>(r.state_rewards.size()) != r.state_labels.size()) {
            throw Error(Errc::InvalidArgument, "state rewards and labels differ in length");
        }
        return r;
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidArgument, std::string("malformed reward document: ") + e.what());
    }
}

json equivalence_to_json(const EquivalenceReport& report) {
    return {{"rem_ll", report.rem_ll}, {"birl_ll", report.birl_ll}, {"abs_diff", report.abs_diff}};
}

std::string trajectory_to_csv(const Trajectory& trajectory, const Mdp& mdp) {
    std::ostringstream out;
    out << "step,state_label,action_label\n";
    for (std::size_t t = 0; t < trajectory.size(); ++t) {
        const auto& step = trajectory.steps[t];
        out << t << ',' << mdp.state_labels.at(static_cast<std::size_t>(step.state)) << ','
            << mdp.action_labels.at(static_cast<std::size_t>(step.action)) << '\n';
    }
    return out.str();
}

Trajectory trajectory_from_csv(std::string_view text, const Mdp& mdp) {
    auto lookup = [](const std::vector<std::string>& labels, std::string_view label,
                     std::size_t line) -> Eigen::Index {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == label) return static_cast<Eigen::Index>(i);
        }
        throw Error(Errc::MalformedRow, "unknown label '" + std::string(label) + "'", line);
    };
    Trajectory trajectory;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != "step,state_label,action_label") {
                throw Error(Errc::UnknownColumn, "expected header step,state_label,action_label", 1);
            }
            continue;
        }
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
            throw Error(Errc::MalformedRow, "expected 3 fields", line_no);
        }
        const std::string_view view(line);
        trajectory.steps.push_back({lookup(mdp.state_labels, view.substr(c1 + 1, c2 - c1 - 1), line_no),
                                    lookup(mdp.action_labels, view.substr(c2 + 1), line_no)});
    }
    if (line_no == 0) throw Error(Errc::EmptyFile, "no header row");
    return trajectory;
}

std::string reward_table_csv(const RewardReport& report) {
    std::ostringstream out;
    out << "state_label,reward\n";
    for (std::size_t s = 0; s < report.state_labels.size(); ++s) {
        out << report.state_labels[s] << ','
            << format_double(report.state_rewards(static_cast<Eigen::Index>(s))) << '\n';
    }
    return out.str();
}

std::string reward_comparison_csv(std::span<const RewardReport> reports,
                                  std::span<const std::string> names) {
    if (reports.empty() || reports.size() != names.size()) {
        throw Error(Errc::InvalidArgument, "one name per reward model is required");
    }
    const auto& labels = reports.front().state_labels;
    std::ostringstream out;
    out << "state_label";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (std::size_t s = 0; s < labels.size(); ++s) {
        out << labels[s];
        for (const auto& r : reports) {
            const auto it = std::find(r.state_labels.begin(), r.state_labels.end(), labels[s]);
            if (it == r.state_labels.end()) {
                throw Error(Errc::InvalidArgument, "reward models do not share state '" + labels[s] + "'");
            }
            out << ',' << format_double(r.state_rewards(it - r.state_labels.begin()));
        }
        out << '\n';
    }
    return out.str();
}

} // namespace remirl
