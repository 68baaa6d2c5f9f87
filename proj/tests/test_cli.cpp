#include <doctest.h>

#include "remirl/io.hpp"
#include "support.hpp"

using namespace remirl;
using namespace remirl::testing;

namespace {

const std::string kFixture = std::string(REMIRL_TEST_DATA_DIR) + "/mts_fixture.csv";

} // namespace

TEST_CASE("simulate is deterministic and writes a parseable CSV") {
    const std::vector<std::string> args{"simulate", "--actors", "3", "--theta", "0.5,-0.2",
                                        "--events", "60", "--seed", "4", "--timestamps"};
    const auto a = cli(args);
    const auto b = cli(args);
    REQUIRE(a.code == kExitOk);
    CHECK(a.out == b.out);
    const auto parsed = parse_event_csv(a.out);
    CHECK(parsed.events.size() == 60);
    CHECK(parsed.has_time);
}

TEST_CASE("fit-rem output feeds check-equivalence") {
    ScratchDir dir("cli_fit");
    const auto sim = cli({"simulate", "--actors", "4", "--theta", "1.0,0.5", "--events", "400", "--seed", "9",
                          "--output", dir / "events.csv"});
    REQUIRE(sim.code == kExitOk);
    const auto fit = cli({"fit-rem", "--input", dir / "events.csv", "--output", dir / "fit.json"});
    REQUIRE(fit.code == kExitOk);
    const auto doc = json::parse(read_file(dir / "fit.json"));
    CHECK(doc.at("converged").get<bool>());
    CHECK(doc.at("theta").size() == 2);
    CHECK(doc.at("se").size() == 2);

    const auto eq = cli({"check-equivalence", "--input", dir / "events.csv", "--fit", dir / "fit.json"});
    REQUIRE(eq.code == kExitOk);
    const auto report = json::parse(eq.out);
    CHECK(report.at("abs_diff").get<double>() < 1e-10);
    CHECK(report.at("rem_ll").get<double>() == doctest::Approx(doc.at("loglik").get<double>()).epsilon(1e-12));
}

TEST_CASE("build-mdp writes labelled outputs") {
    ScratchDir dir("cli_mdp");
    const auto run = cli({"build-mdp", "--input", kFixture, "--ego", "C1", "--roles",
                          "own_driver=D1,other_captain=C2,other_driver=D2", "--output", dir / "traj.csv",
                          "--mdp-output", dir / "mdp.json"});
    REQUIRE(run.code == kExitOk);
    const auto mdp = json::parse(read_file(dir / "mdp.json"));
    CHECK(mdp.at("state_labels").size() == 5);
    CHECK(mdp.at("action_labels").size() == 3);
    CHECK(mdp.at("transitions").size() == 3);
}

TEST_CASE("validation errors are JSON on stderr with exit 1") {
    SUBCASE("missing file") {
        const auto run = cli({"fit-rem", "--input", "/nonexistent/events.csv"});
        CHECK(run.code == kExitValidation);
        const auto err = json::parse(run.err);
        CHECK(err.contains("error"));
        CHECK(err.contains("message"));
    }
    SUBCASE("unknown statistic") {
        const auto run = cli({"simulate", "--theta", "1", "--stats", "transitivity"});
        CHECK(run.code == kExitValidation);
        CHECK(json::parse(run.err).at("error") == "InvalidArgument");
    }
    SUBCASE("bad roles") {
        ScratchDir dir("cli_roles");
        const auto run = cli({"build-mdp", "--input", kFixture, "--ego", "C1", "--roles", "own_driver=D1",
                              "--output", dir / "t.csv", "--mdp-output", dir / "m.json"});
        CHECK(run.code == kExitValidation);
        CHECK(json::parse(run.err).at("error") == "InvalidArgument");
    }
    SUBCASE("no subcommand") {
        CHECK(cli({}).code == kExitValidation);
    }
}

TEST_CASE("report joins reward files") {
    ScratchDir dir("cli_report");
    for (const auto& [ego, roles] :
         {std::pair{"C1", "own_driver=D1,other_captain=C2,other_driver=D2"},
          std::pair{"C2", "own_driver=D2,other_captain=C1,other_driver=D1"}}) {
        const std::string e(ego);
        REQUIRE(cli({"build-mdp", "--input", kFixture, "--ego", e, "--roles", roles, "--output",
                     dir / (e + ".csv"), "--mdp-output", dir / (e + ".json")})
                    .code == kExitOk);
        const auto irl = cli({"irl", "maxent", "--input", dir / (e + ".csv"), "--mdp", dir / (e + ".json"),
                              "--output", dir / (e + "_reward.json"), "--epochs", "50"});
        CHECK((irl.code == kExitOk || irl.code == kExitNotConverged));
    }
    const auto run = cli({"report", "--inputs", dir / "C1_reward.json", dir / "C2_reward.json"});
    REQUIRE(run.code == kExitOk);
    CHECK(run.out.rfind("state_label,C1_reward,C2_reward", 0) == 0);
}
