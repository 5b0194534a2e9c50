#include "sisext/commands.hpp"

#include "sisext/analytic.hpp"
#include "sisext/errors.hpp"
#include "sisext/mc.hpp"
#include "sisext/model.hpp"
#include "sisext/sim.hpp"
#include "sisext/validation.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

namespace sisext {

using nlohmann::json;

namespace {

// Writes to config.out when set, otherwise to the fallback stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : path_(path), stream_(&fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw std::runtime_error("cannot open output file '" + path + "' for writing");
            stream_ = &file_;
        }
    }

    std::ostream& stream() { return *stream_; }

    void finish() {
        stream_->flush();
        if (!*stream_) {
            throw std::runtime_error(path_.empty() ? std::string("write to standard output failed")
                                                   : "write to '" + path_ + "' failed");
        }
    }

private:
    std::string path_;
    std::ofstream file_;
    std::ostream* stream_;
};

struct Warning {
    std::string code;
    std::string message;
};

json to_json(const std::vector<Warning>& warnings) {
    json arr = json::array();
    for (const auto& w : warnings) arr.push_back({{"code", w.code}, {"message", w.message}});
    return arr;
}

void print_warnings(std::ostream& err, const std::vector<Warning>& warnings) {
    for (const auto& w : warnings) fmt::print(err, "warning [{}]: {}\n", w.code, w.message);
}

json to_json(const GumbelPrediction& g, double general_centering) {
    return {{"formula", to_string(g.formula)},
            {"centering", g.centering},
            {"scale", g.scale},
            {"predicted_mean", g.predicted_mean},
            {"delta_vs_general", g.centering - general_centering}};
}

json to_json(const PhaseSchedule& s) {
    return {{"t0", s.t0},         {"t_star", s.t_star}, {"t_star_approx", s.t_star_approx},
            {"x_star", s.x_star}, {"k_star", s.k_star}, {"t_w", s.t_w},
            {"omega", s.omega}};
}

ScalingFunction scaling_for(const RunConfig& c) {
    return c.omega ? ScalingFunction::constant(*c.omega) : ScalingFunction::standard();
}

}  // namespace

int cmd_predict(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const ModelParams p(config.N, config.lambda, config.mu);
    const InitialCondition ic(p, config.start_state());
    const RegimeClass regime = classify_regime(p, config.regime_threshold);

    std::vector<Warning> warnings;
    std::vector<GumbelPrediction> predictions;
    std::optional<PhaseSchedule> schedule;
    std::optional<HypothesisDiagnostics> diagnostics;

    if (!p.subcritical()) {
        warnings.push_back({"not_subcritical",
                            fmt::format("mu = {} does not exceed lambda = {}; the Gumbel limit needs mu > lambda",
                                        p.mu(), p.lambda())});
    } else if (ic.x0() == 0) {
        warnings.push_back({"x0_zero", "x0 = 0: the chain starts extinct, no centering is defined"});
    } else {
        if (regime.kind != Regime::Subcritical) {
            warnings.push_back({"weakly_subcritical",
                                fmt::format("(mu - lambda) sqrt(N) = {:.4g} is not above the threshold {}",
                                            regime.severity, config.regime_threshold)});
        }
        const auto general = predict_extinction(p, ic, CenteringFormula::General);
        diagnostics = general.diagnostics;
        if (general.diagnostics.x0_gap <= config.regime_threshold) {
            warnings.push_back({"small_start", fmt::format("x0 (mu - lambda) = {:.4g} is not above the threshold {}",
                                                           general.diagnostics.x0_gap, config.regime_threshold)});
        }
        for (auto f : {CenteringFormula::General, CenteringFormula::Intermediate, CenteringFormula::Low,
                       CenteringFormula::High}) {
            try {
                predictions.push_back(predict_extinction(p, ic, f));
            } catch (const std::domain_error& e) {
                warnings.push_back({"formula_unavailable", fmt::format("{}: {}", to_string(f), e.what())});
            }
        }
        try {
            schedule = phase_schedule(p, ic, scaling_for(config), config.K, config.w);
        } catch (const std::exception& e) {
            warnings.push_back({"phase_schedule_unavailable", e.what()});
        }
    }

    Sink sink(config.out, out);
    const double general_centering = predictions.empty() ? 0.0 : predictions.front().centering;
    if (config.format == OutputFormat::Json) {
        json preds = json::array();
        for (const auto& g : predictions) preds.push_back(to_json(g, general_centering));
        json report{
            {"schema_version", schema_version},
            {"command", "predict"},
            {"config", to_json(config)},
            {"regime", {{"kind", to_string(regime.kind)}, {"severity", regime.severity},
                        {"threshold", config.regime_threshold}}},
            {"diagnostics", diagnostics ? json{{"gap_sqrt_n", diagnostics->gap_sqrt_n},
                                               {"x0_gap", diagnostics->x0_gap},
                                               {"x0_over_gap_n", diagnostics->x0_over_gap_n}}
                                        : json(nullptr)},
            {"predictions", preds},
            {"phase_schedule", schedule ? to_json(*schedule) : json(nullptr)},
            {"warnings", to_json(warnings)},
        };
        sink.stream() << report.dump(2) << '\n';
    } else {
        auto& s = sink.stream();
        s << "formula,centering,scale,predicted_mean,delta_vs_general\n";
        for (const auto& g : predictions) {
            fmt::print(s, "{},{},{},{},{}\n", to_string(g.formula), g.centering, g.scale, g.predicted_mean,
                       g.centering - general_centering);
        }
    }
    sink.finish();
    print_warnings(err, warnings);
    return exit_ok;
}

int cmd_simulate(const RunConfig& config, unsigned threads, std::ostream& out, std::ostream& err) {
    const ModelParams p(config.N, config.lambda, config.mu);
    const InitialCondition ic(p, config.start_state());
    if (config.n < 1) throw UsageError("--n must be at least 1");
    if (config.trajectory_stream && config.trajectory_out.empty()) {
        throw UsageError("--trajectory-stream needs --trajectory-out");
    }

    const auto set = run_batch(p, ic, config.n, config.seed, config.t_max, threads);

    Sink sink(config.out, out);
    if (config.format == OutputFormat::Csv) {
        write_samples_csv(sink.stream(), set);
    } else {
        json report{{"schema_version", schema_version},
                    {"command", "simulate"},
                    {"config", to_json(config)},
                    {"replicates", set.replicates.size()},
                    {"censored", set.censored_count}};
        if (!set.samples.empty()) {
            const auto stats = summarize(set.samples);
            report["extinction_time"] = {{"mean", stats.mean},
                                         {"sd", stats.sd},
                                         {"standard_error", stats.standard_error},
                                         {"median", sample_quantile(set.samples, 0.5)}};
        }
        if (p.subcritical() && ic.x0() > 0 && set.samples.size() >= 10) {
            const auto pred = predict_extinction(p, ic);
            try {
                const auto gof = ks_vs_gumbel(normalize(set, pred));
                report["gumbel_fit"] = {{"ks_distance", gof.ks_distance},
                                        {"normalized_mean", gof.sample_mean},
                                        {"normalized_sd", gof.sample_sd},
                                        {"predicted_normalized_mean", gof.predicted_mean},
                                        {"predicted_mean_time", pred.predicted_mean}};
            } catch (const CensoringExceeded& e) {
                report["gumbel_fit"] = nullptr;
                fmt::print(err, "warning [censoring]: {}\n", e.what());
            }
        }
        sink.stream() << report.dump(2) << '\n';
    }
    sink.finish();

    if (set.censored_count > 0) {
        fmt::print(err, "warning [censoring]: {} of {} replicates reached t_max = {}\n", set.censored_count,
                   set.replicates.size(), config.t_max);
    }

    if (config.trajectory_stream) {
        const auto traj =
            sample_extinction_logistic(p, ic, RandomSource{config.seed, *config.trajectory_stream}, config.t_max, true);
        Sink path_sink(config.trajectory_out, out);
        write_trajectory_csv(path_sink.stream(), traj);
        path_sink.finish();
    }
    return exit_ok;
}

int cmd_exact_mean(const RunConfig& config, std::ostream& out, std::ostream&) {
    struct Row {
        std::int64_t N;
        std::int64_t x0;
        double mean;
    };
    auto guard = [](std::int64_t N) {
        if (N > exact_mean_max_n) {
            throw CostGuardExceeded(fmt::format("exact mean limited to N <= {}, got N = {}; use simulate instead",
                                                exact_mean_max_n, N));
        }
    };

    std::vector<Row> rows;
    switch (config.sweep) {
        case SweepKind::None: {
            guard(config.N);
            const ModelParams p(config.N, config.lambda, config.mu);
            const InitialCondition ic(p, config.start_state());
            rows.push_back({p.N(), ic.x0(), exact_mean_extinction(p, ic.x0())});
            break;
        }
        case SweepKind::X0: {
            if (config.stride < 1) throw UsageError("--stride must be at least 1");
            guard(config.N);
            const ModelParams p(config.N, config.lambda, config.mu);
            const auto all = exact_mean_extinction_all(p);
            for (std::int64_t x = 0; x <= p.N(); x += config.stride) rows.push_back({p.N(), x, all[x]});
            if (rows.back().x0 != p.N()) rows.push_back({p.N(), p.N(), all[p.N()]});
            break;
        }
        case SweepKind::N: {
            if (config.N_values.empty()) throw UsageError("--sweep N needs --bigN-values");
            for (auto N : config.N_values) {
                guard(N);
                const ModelParams p(N, config.lambda, config.mu);
                const std::int64_t x0 = config.x0.value_or(N);
                if (x0 > N) throw UsageError(fmt::format("x0 = {} exceeds N = {} in the sweep", x0, N));
                rows.push_back({N, x0, exact_mean_extinction(p, x0)});
            }
            break;
        }
    }

    Sink sink(config.out, out);
    if (config.format == OutputFormat::Csv) {
        auto& s = sink.stream();
        s << "N,lambda,mu,x0,mean\n";
        for (const auto& r : rows) fmt::print(s, "{},{},{},{},{}\n", r.N, config.lambda, config.mu, r.x0, r.mean);
    } else {
        json arr = json::array();
        for (const auto& r : rows) {
            arr.push_back({{"N", r.N}, {"lambda", config.lambda}, {"mu", config.mu}, {"x0", r.x0}, {"mean", r.mean}});
        }
        json report{{"schema_version", schema_version}, {"command", "exact-mean"}, {"config", to_json(config)},
                    {"rows", arr}};
        sink.stream() << report.dump(2) << '\n';
    }
    sink.finish();
    return exit_ok;
}

int cmd_validate(const RunConfig& config, unsigned threads, std::ostream& out, std::ostream&) {
    namespace v = validation;
    std::vector<std::string> ids;
    for (const auto& suite : config.suites) {
        std::vector<std::string> part;
        try {
            part = v::suite_criteria(suite);
        } catch (const std::invalid_argument& e) {
            throw UsageError(fmt::format("{}; known suites: {}, or a criterion id A1..A12", e.what(),
                                         fmt::join(v::suite_names(), ", ")));
        }
        for (auto& id : part) {
            if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(std::move(id));
        }
    }
    if (ids.empty()) throw UsageError("no suite selected");

    const auto results = v::run_criteria(ids, v::Options{config.seed, threads});
    const bool all_pass = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });

    Sink sink(config.out, out);
    if (config.format == OutputFormat::Json) {
        json criteria = json::array();
        for (const auto& r : results) {
            json detail = json::object();
            for (const auto& [key, value] : r.detail) detail[key] = value;
            json entry{{"id", r.id},
                       {"description", r.description},
                       {"measured", r.measured},
                       {"relation", r.relation},
                       {"threshold", r.threshold},
                       {"within_threshold", r.within_threshold},
                       {"runtime_s", r.runtime_s},
                       {"runtime_limit_s", r.runtime_limit_s},
                       {"pass", r.pass},
                       {"detail", detail}};
            if (!r.note.empty()) entry["error"] = r.note;
            criteria.push_back(std::move(entry));
        }
        json report{{"schema_version", schema_version}, {"command", "validate"}, {"config", to_json(config)},
                    {"criteria", criteria}, {"pass", all_pass}};
        sink.stream() << report.dump(2) << '\n';
    } else {
        auto& s = sink.stream();
        s << "id,measured,threshold,pass,runtime_s\n";
        for (const auto& r : results) {
            fmt::print(s, "{},{},{},{},{}\n", r.id, r.measured, r.threshold, r.pass ? 1 : 0, r.runtime_s);
        }
    }
    sink.finish();
    return all_pass ? exit_ok : exit_check_failed;
}

int run_command(const RunConfig& config, unsigned threads, std::ostream& out, std::ostream& err) {
    try {
        if (config.command == "predict") return cmd_predict(config, out, err);
        if (config.command == "simulate") return cmd_simulate(config, threads, out, err);
        if (config.command == "exact-mean") return cmd_exact_mean(config, out, err);
        if (config.command == "validate") return cmd_validate(config, threads, out, err);
        throw UsageError("unknown command '" + config.command + "'");
    } catch (const UsageError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return exit_usage;
    } catch (const CostGuardExceeded& e) {
        fmt::print(err, "error: {}\n", e.what());
        return exit_usage;
    } catch (const std::domain_error& e) {
        fmt::print(err, "error: invalid parameters: {}\n", e.what());
        return exit_usage;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return exit_runtime;
    }
}

}  // namespace sisext
