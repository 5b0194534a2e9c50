#pragma once

// Serializable run configuration shared by every command. A run is
// reproducible from its RunConfig alone; the worker-count hint is not part
// of it because it never changes results.

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sisext {

inline constexpr int schema_version = 1;

enum class OutputFormat { Csv, Json };

std::string_view to_string(OutputFormat f);
OutputFormat output_format_from_string(std::string_view name);

/// JSON for reports (predict, validate), CSV for samples and sweeps.
OutputFormat default_format(std::string_view command);

enum class SweepKind { None, X0, N };

std::string_view to_string(SweepKind s);
SweepKind sweep_kind_from_string(std::string_view name);

struct RunConfig {
    std::string command;  // predict, simulate, exact-mean, validate

    std::int64_t N = 1000;
    double lambda = 0.5;
    double mu = 1.0;
    std::optional<std::int64_t> x0;  // defaults to N

    std::uint64_t seed = 1;
    std::uint64_t n = 1000;
    double t_max = 1e4;

    std::string out;  // empty: standard output
    OutputFormat format = OutputFormat::Csv;

    // predict
    double K = 2.0;
    double w = 0.0;
    std::optional<double> omega;  // constant override of the default scaling function
    double regime_threshold = 3.0;

    // simulate
    std::optional<std::uint64_t> trajectory_stream;
    std::string trajectory_out;

    // exact-mean
    SweepKind sweep = SweepKind::None;
    std::int64_t stride = 1;
    std::vector<std::int64_t> N_values;

    // validate
    std::vector<std::string> suites{"all"};

    std::int64_t start_state() const { return x0.value_or(N); }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

nlohmann::json to_json(const RunConfig& c);

/// Parses a config object. Unknown keys and a mismatched schema_version are
/// rejected with std::invalid_argument.
RunConfig run_config_from_json(const nlohmann::json& j);

RunConfig load_run_config(const std::string& path);

}  // namespace sisext
