// sisext: predictions, simulation, exact means and acceptance checks for
// extinction of the stochastic SIS logistic epidemic.

#include "sisext/commands.hpp"
#include "sisext/config.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

namespace {

unsigned env_threads() {
    const char* v = std::getenv("SISEXT_THREADS");
    if (v == nullptr || *v == '\0') return 0;
    try {
        return static_cast<unsigned>(std::stoul(v));
    } catch (const std::exception&) {
        std::cerr << "warning: ignoring SISEXT_THREADS='" << v << "'\n";
        return 0;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extinction times of the stochastic SIS logistic epidemic"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "sisext 1.0.0");

    sisext::RunConfig flags;
    std::string config_path;
    std::string format_name;
    std::string sweep_name;
    unsigned threads = env_threads();
    bool print_config = false;

    std::int64_t x0 = 0;
    double omega = 0.0;
    std::uint64_t trajectory_stream = 0;

    struct Registered {
        CLI::App* sub;
        std::vector<std::pair<CLI::Option*, std::function<void(sisext::RunConfig&)>>> opts;
    };
    std::vector<Registered> subs;

    auto add_common = [&](CLI::App* sub, Registered& reg) {
        auto add = [&](CLI::Option* o, std::function<void(sisext::RunConfig&)> apply) {
            reg.opts.emplace_back(o, std::move(apply));
        };
        sub->add_option("--config", config_path, "Load a JSON run configuration; flags override it")
            ->check(CLI::ExistingFile);
        sub->add_flag("--print-config", print_config, "Print the resolved run configuration and exit");
        sub->add_option("--threads", threads, "Worker-count hint (0 = all cores); never changes results");
        add(sub->add_option("--bigN", flags.N, "Population size N")->check(CLI::PositiveNumber),
            [&](auto& c) { c.N = flags.N; });
        add(sub->add_option("--lambda", flags.lambda, "Infection rate lambda"), [&](auto& c) { c.lambda = flags.lambda; });
        add(sub->add_option("--mu", flags.mu, "Recovery rate mu"), [&](auto& c) { c.mu = flags.mu; });
        add(sub->add_option("--x0", x0, "Initial number of infectives (default N)")->check(CLI::NonNegativeNumber),
            [&](auto& c) { c.x0 = x0; });
        add(sub->add_option("--out", flags.out, "Output file (default standard output)"),
            [&](auto& c) { c.out = flags.out; });
        add(sub->add_option("--format", format_name, "Output format")->check(CLI::IsMember({"csv", "json"})),
            [&](auto& c) { c.format = sisext::output_format_from_string(format_name); });
        add(sub->add_option("--seed", flags.seed, "Master seed"), [&](auto& c) { c.seed = flags.seed; });
        return add;
    };

    {
        auto* sub = app.add_subcommand("predict", "Gumbel-limit predictions, diagnostics and phase schedule");
        Registered reg{sub, {}};
        auto add = add_common(sub, reg);
        add(sub->add_option("--K", flags.K, "Discrete-chain constant K (>= 2)"), [&](auto& c) { c.K = flags.K; });
        add(sub->add_option("--w", flags.w, "Gumbel quantile argument for t_w"), [&](auto& c) { c.w = flags.w; });
        add(sub->add_option("--omega", omega, "Constant scaling value replacing (mu-lambda)^(1/4) N^(1/8)"),
            [&](auto& c) { c.omega = omega; });
        add(sub->add_option("--regime-threshold", flags.regime_threshold, "Severity threshold for warnings"),
            [&](auto& c) { c.regime_threshold = flags.regime_threshold; });
        subs.push_back(std::move(reg));
    }
    {
        auto* sub = app.add_subcommand("simulate", "Monte Carlo extinction times, one CSV row per replicate");
        Registered reg{sub, {}};
        auto add = add_common(sub, reg);
        add(sub->add_option("--n", flags.n, "Number of replicates"), [&](auto& c) { c.n = flags.n; });
        add(sub->add_option("--tmax", flags.t_max, "Censoring horizon"), [&](auto& c) { c.t_max = flags.t_max; });
        add(sub->add_option("--trajectory-stream", trajectory_stream, "Also export the path of this replicate"),
            [&](auto& c) { c.trajectory_stream = trajectory_stream; });
        add(sub->add_option("--trajectory-out", flags.trajectory_out, "File for the exported path (time,state)"),
            [&](auto& c) { c.trajectory_out = flags.trajectory_out; });
        subs.push_back(std::move(reg));
    }
    {
        auto* sub = app.add_subcommand("exact-mean", "Exact mean extinction time, optionally over a sweep");
        Registered reg{sub, {}};
        auto add = add_common(sub, reg);
        add(sub->add_option("--sweep", sweep_name, "Sweep over x0 or N")->check(CLI::IsMember({"none", "x0", "N"})),
            [&](auto& c) { c.sweep = sisext::sweep_kind_from_string(sweep_name); });
        add(sub->add_option("--stride", flags.stride, "x0 step for --sweep x0"),
            [&](auto& c) { c.stride = flags.stride; });
        add(sub->add_option("--bigN-values", flags.N_values, "Population sizes for --sweep N"),
            [&](auto& c) { c.N_values = flags.N_values; });
        subs.push_back(std::move(reg));
    }
    {
        auto* sub = app.add_subcommand("validate", "Run acceptance suites and print a verdict per criterion");
        Registered reg{sub, {}};
        auto add = add_common(sub, reg);
        add(sub->add_option("--suite", flags.suites,
                            "Suite names: gumbel, oracles, analytic, couplings, montecarlo, repro, all, or A1..A12"),
            [&](auto& c) { c.suites = flags.suites; });
        subs.push_back(std::move(reg));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : sisext::exit_usage;
    }

    for (const auto& reg : subs) {
        if (!reg.sub->parsed()) continue;
        sisext::RunConfig config;
        try {
            if (!config_path.empty()) {
                config = sisext::load_run_config(config_path);
                if (!config.command.empty() && config.command != reg.sub->get_name()) {
                    std::cerr << "error: config file is for '" << config.command << "', not '" << reg.sub->get_name()
                              << "'\n";
                    return sisext::exit_usage;
                }
            } else {
                config.format = sisext::default_format(reg.sub->get_name());
            }
            config.command = reg.sub->get_name();
            for (const auto& [opt, apply] : reg.opts) {
                if (opt->count() > 0) apply(config);
            }
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return sisext::exit_usage;
        }
        if (print_config) {
            std::cout << sisext::to_json(config).dump(2) << '\n';
            return sisext::exit_ok;
        }
        return sisext::run_command(config, threads, std::cout, std::cerr);
    }
    return sisext::exit_usage;
}
