#include "sisext/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace sisext {

using nlohmann::json;

std::string_view to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

OutputFormat output_format_from_string(std::string_view name) {
    if (name == "csv") return OutputFormat::Csv;
    if (name == "json") return OutputFormat::Json;
    throw std::invalid_argument("unknown output format '" + std::string(name) + "' (expected csv or json)");
}

OutputFormat default_format(std::string_view command) {
    return command == "predict" || command == "validate" ? OutputFormat::Json : OutputFormat::Csv;
}

std::string_view to_string(SweepKind s) {
    switch (s) {
        case SweepKind::None: return "none";
        case SweepKind::X0: return "x0";
        case SweepKind::N: return "N";
    }
    return "none";
}

SweepKind sweep_kind_from_string(std::string_view name) {
    if (name == "none") return SweepKind::None;
    if (name == "x0") return SweepKind::X0;
    if (name == "N") return SweepKind::N;
    throw std::invalid_argument("unknown sweep '" + std::string(name) + "' (expected none, x0 or N)");
}

json to_json(const RunConfig& c) {
    json j{
        {"schema_version", schema_version},
        {"command", c.command},
        {"N", c.N},
        {"lambda", c.lambda},
        {"mu", c.mu},
        {"x0", c.x0 ? json(*c.x0) : json(nullptr)},
        {"seed", c.seed},
        {"n", c.n},
        {"t_max", c.t_max},
        {"out", c.out},
        {"format", to_string(c.format)},
        {"K", c.K},
        {"w", c.w},
        {"omega", c.omega ? json(*c.omega) : json(nullptr)},
        {"regime_threshold", c.regime_threshold},
        {"trajectory_stream", c.trajectory_stream ? json(*c.trajectory_stream) : json(nullptr)},
        {"trajectory_out", c.trajectory_out},
        {"sweep", to_string(c.sweep)},
        {"stride", c.stride},
        {"N_values", c.N_values},
        {"suites", c.suites},
    };
    return j;
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& into) {
    if (j.contains(key)) into = j.at(key).get<T>();
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& into) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    into = v.is_null() ? std::nullopt : std::optional<T>(v.get<T>());
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("run config must be a JSON object");
    static const std::set<std::string> known{
        "schema_version", "command", "N", "lambda", "mu", "x0", "seed", "n", "t_max", "out", "format", "K", "w",
        "omega", "regime_threshold", "trajectory_stream", "trajectory_out", "sweep", "stride", "N_values", "suites"};
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) throw std::invalid_argument("run config: unknown key '" + key + "'");
    }
    if (j.contains("schema_version") && j.at("schema_version").get<int>() != schema_version) {
        throw std::invalid_argument("run config: unsupported schema_version " + j.at("schema_version").dump());
    }
    RunConfig c;
    try {
        read(j, "command", c.command);
        read(j, "N", c.N);
        read(j, "lambda", c.lambda);
        read(j, "mu", c.mu);
        read_optional(j, "x0", c.x0);
        read(j, "seed", c.seed);
        read(j, "n", c.n);
        read(j, "t_max", c.t_max);
        read(j, "out", c.out);
        c.format = default_format(c.command);
        if (j.contains("format")) c.format = output_format_from_string(j.at("format").get<std::string>());
        read(j, "K", c.K);
        read(j, "w", c.w);
        read_optional(j, "omega", c.omega);
        read(j, "regime_threshold", c.regime_threshold);
        read_optional(j, "trajectory_stream", c.trajectory_stream);
        read(j, "trajectory_out", c.trajectory_out);
        if (j.contains("sweep")) c.sweep = sweep_kind_from_string(j.at("sweep").get<std::string>());
        read(j, "stride", c.stride);
        read(j, "N_values", c.N_values);
        read(j, "suites", c.suites);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("run config: ") + e.what());
    }
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config file '" + path + "': " + e.what());
    }
    return run_config_from_json(j);
}

}  // namespace sisext
