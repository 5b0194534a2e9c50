#include "sisext/commands.hpp"
#include "sisext/config.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sisext;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const RunConfig& c, unsigned threads = 1) {
    std::ostringstream out, err;
    const int code = run_command(c, threads, out, err);
    return {code, out.str(), err.str()};
}

RunConfig config_for(std::string command) {
    RunConfig c;
    c.command = command;
    c.format = default_format(command);
    return c;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("config JSON round trip") {
    RunConfig c = config_for("exact-mean");
    c.N = 77;
    c.x0 = 5;
    c.omega = 1.5;
    c.trajectory_stream = 4;
    c.sweep = SweepKind::N;
    c.N_values = {10, 20};
    c.suites = {"A1", "gumbel"};
    CHECK(run_config_from_json(to_json(c)) == c);
    CHECK(to_json(c)["schema_version"] == schema_version);

    json j = to_json(c);
    j["bogus"] = 1;
    CHECK_THROWS_AS(run_config_from_json(j), std::invalid_argument);
    j = to_json(c);
    j["schema_version"] = schema_version + 1;
    CHECK_THROWS_AS(run_config_from_json(j), std::invalid_argument);

    const json minimal{{"command", "predict"}};
    const auto m = run_config_from_json(minimal);
    CHECK(m.format == OutputFormat::Json);
    CHECK(m.start_state() == 1000);
    CHECK(default_format("simulate") == OutputFormat::Csv);
    CHECK(output_format_from_string("json") == OutputFormat::Json);
    CHECK(sweep_kind_from_string("x0") == SweepKind::X0);
}

TEST_CASE("config file loading") {
    const auto path = std::filesystem::temp_directory_path() / "sisext_test_config.json";
    RunConfig c = config_for("simulate");
    c.n = 12;
    std::ofstream(path) << to_json(c).dump(2);
    CHECK(load_run_config(path.string()) == c);
    std::filesystem::remove(path);
    CHECK_THROWS(load_run_config(path.string()));
}

TEST_CASE("predict") {
    RunConfig c = config_for("predict");
    c.N = 10'000;
    c.lambda = 0.5;
    c.x0 = 10'000;
    const auto r = run(c);
    REQUIRE(r.code == exit_ok);
    const auto j = json::parse(r.out);
    CHECK(j["schema_version"] == schema_version);
    CHECK(j["command"] == "predict");
    CHECK(run_config_from_json(j["config"]) == c);
    bool has_general = false;
    for (const auto& pred : j["predictions"]) {
        if (pred["formula"] == "general") {
            has_general = true;
            CHECK(pred["delta_vs_general"].get<double>() == 0.0);
            CHECK(pred["scale"].get<double>() == doctest::Approx(2.0));
        }
    }
    CHECK(has_general);
    CHECK(j.contains("phase_schedule"));
    CHECK(j["warnings"].empty());

    c.format = OutputFormat::Csv;
    const auto csv = lines(run(c).out);
    REQUIRE(csv.size() >= 2);
    CHECK(csv[0] == "formula,centering,scale,predicted_mean,delta_vs_general");
}

TEST_CASE("predict warns outside the subcritical regime") {
    RunConfig c = config_for("predict");
    c.N = 100;
    c.lambda = 1.5;
    const auto r = run(c);
    CHECK(r.code == exit_ok);
    const auto j = json::parse(r.out);
    bool flagged = false;
    for (const auto& w : j["warnings"]) flagged |= w["code"] == "not_subcritical";
    CHECK(flagged);
    CHECK(r.err.find("not_subcritical") != std::string::npos);

    c.lambda = 0.5;
    c.x0 = 0;
    const auto zero = json::parse(run(c).out);
    bool x0_zero = false;
    for (const auto& w : zero["warnings"]) x0_zero |= w["code"] == "x0_zero";
    CHECK(x0_zero);
}

TEST_CASE("simulate") {
    RunConfig c = config_for("simulate");
    c.N = 200;
    c.n = 300;
    c.seed = 9;
    const auto a = run(c, 1);
    REQUIRE(a.code == exit_ok);
    const auto rows = lines(a.out);
    REQUIRE(rows.size() == 301);
    CHECK(rows[0] == "stream_id,extinction_time,event_count,censored");
    CHECK(rows[1].rfind("0,", 0) == 0);
    CHECK(rows[1].back() == '0');
    CHECK(run(c, 4).out == a.out);
    CHECK(run(c, 1).out == a.out);

    c.t_max = 1.0;
    const auto cut = run(c);
    CHECK(cut.code == exit_ok);
    CHECK(lines(cut.out)[1] == lines(cut.out)[1].substr(0, lines(cut.out)[1].size() - 1) + "1");
    CHECK_FALSE(cut.err.empty());

    c.t_max = 1e4;
    c.format = OutputFormat::Json;
    const auto j = json::parse(run(c).out);
    CHECK(j["command"] == "simulate");
    CHECK(j.contains("gumbel_fit"));

    c.trajectory_stream = 2;
    CHECK(run(c).code == exit_usage);
}

TEST_CASE("simulate writes trajectories") {
    const auto path = std::filesystem::temp_directory_path() / "sisext_test_traj.csv";
    RunConfig c = config_for("simulate");
    c.N = 50;
    c.n = 10;
    c.trajectory_stream = 3;
    c.trajectory_out = path.string();
    REQUIRE(run(c).code == exit_ok);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "time,state");
    std::filesystem::remove(path);
}

TEST_CASE("exact-mean") {
    RunConfig c = config_for("exact-mean");
    c.N = 1;
    c.mu = 2.0;
    auto rows = lines(run(c).out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == "N,lambda,mu,x0,mean");
    CHECK(rows[1] == "1,0.5,2,1,0.5");

    c.N = 10;
    c.x0 = 0;
    rows = lines(run(c).out);
    CHECK(rows[1] == "10,0.5,2,0,0");

    c.x0.reset();
    c.sweep = SweepKind::X0;
    c.stride = 3;
    rows = lines(run(c).out);
    REQUIRE(rows.size() == 6);  // 0, 3, 6, 9, 10
    double prev = -1.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double mean = std::stod(rows[i].substr(rows[i].rfind(',') + 1));
        CHECK(mean > prev);
        prev = mean;
    }
    CHECK(rows.back().rfind("10,0.5,2,10,", 0) == 0);

    c.sweep = SweepKind::N;
    c.N_values = {5, 50, 500};
    rows = lines(run(c).out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[3].rfind("500,0.5,2,500,", 0) == 0);

    c.sweep = SweepKind::None;
    c.N = exact_mean_max_n + 1;
    CHECK(run(c).code == exit_usage);
    c.N = 0;
    CHECK(run(c).code == exit_usage);
}

TEST_CASE("validate") {
    RunConfig c = config_for("validate");
    c.suites = {"nonsense"};
    const auto bad = run(c);
    CHECK(bad.code == exit_usage);
    CHECK(bad.err.find("gumbel") != std::string::npos);

    c.suites = {"A10", "A10"};
    const auto r = run(c);
    CHECK(r.code == exit_ok);
    const auto j = json::parse(r.out);
    REQUIRE(j["criteria"].size() == 1);
    const auto& a10 = j["criteria"][0];
    for (const char* key : {"id", "description", "measured", "relation", "threshold", "within_threshold", "runtime_s",
                            "runtime_limit_s", "pass", "detail"}) {
        CHECK(a10.contains(key));
    }
    CHECK(a10["pass"] == true);

    c.format = OutputFormat::Csv;
    const auto csv = lines(run(c).out);
    REQUIRE(csv.size() == 2);
    CHECK(csv[0] == "id,measured,threshold,pass,runtime_s");
}

TEST_CASE("unwritable output is a runtime error") {
    RunConfig c = config_for("exact-mean");
    c.N = 5;
    c.out = "/nonexistent-dir/out.csv";
    const auto r = run(c);
    CHECK(r.code == exit_runtime);
    CHECK(r.err.find("/nonexistent-dir/out.csv") != std::string::npos);

    c.command = "frobnicate";
    CHECK(run(c).code == exit_usage);
}
