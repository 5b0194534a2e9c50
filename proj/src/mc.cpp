#include "sisext/mc.hpp"

#include "sisext/errors.hpp"
#include "sisext/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <ostream>
#include <stdexcept>

namespace sisext {

unsigned resolve_threads(unsigned hint) {
    if (hint > 0) return hint;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

double ExtinctionSampleSet::censored_fraction() const noexcept {
    return replicates.empty() ? 0.0 : static_cast<double>(censored_count) / static_cast<double>(replicates.size());
}

ExtinctionSampleSet run_batch(const ModelParams& p, const InitialCondition& ic, std::size_t n,
                              std::uint64_t master_seed, double t_max, unsigned parallelism_hint) {
    if (n < 1) throw std::domain_error("run_batch: n must be at least 1");
    if (!(t_max > 0.0)) throw std::domain_error("run_batch: t_max must be positive");

    ExtinctionSampleSet set{p, ic.x0(), master_seed, t_max, std::vector<ReplicateRecord>(n), {}, 0};
    parallel_for(n, parallelism_hint, [&](std::size_t i) {
        const auto traj = sample_extinction_logistic(p, ic, RandomSource{master_seed, i}, t_max);
        set.replicates[i] = {i, traj.end_time, traj.event_count, traj.censored};
    });
    set.samples.reserve(n);
    for (const auto& r : set.replicates) {
        if (r.censored) {
            ++set.censored_count;
        } else {
            set.samples.push_back(r.extinction_time);
        }
    }
    return set;
}

void write_samples_csv(std::ostream& out, const ExtinctionSampleSet& set) {
    out << "stream_id,extinction_time,event_count,censored\n";
    for (const auto& r : set.replicates) {
        out << fmt::format("{},{},{},{}\n", r.stream_id, r.extinction_time, r.event_count, r.censored ? 1 : 0);
    }
}

double empirical_cdf(std::span<const double> samples, double t) {
    if (samples.empty()) throw std::domain_error("empirical_cdf: no samples");
    const auto below = std::count_if(samples.begin(), samples.end(), [t](double s) { return s <= t; });
    return static_cast<double>(below) / static_cast<double>(samples.size());
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw std::domain_error("EmpiricalCdf: no samples");
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double t) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), t);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

SummaryStats summarize(std::span<const double> values) {
    if (values.empty()) throw std::domain_error("summarize: no values");
    const auto n = static_cast<double>(values.size());
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t k = 0;
    for (const double v : values) {  // Welford
        ++k;
        const double delta = v - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (v - mean);
    }
    const double sd = values.size() > 1 ? std::sqrt(m2 / (n - 1.0)) : 0.0;
    return {values.size(), mean, sd, sd / std::sqrt(n)};
}

double sample_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::domain_error("sample_quantile: no values");
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("sample_quantile: q must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0 || std::isinf(values[hi])) return values[lo];
    return values[lo] + frac * (values[hi] - values[lo]);
}

NormalizedSampleSet normalize(const ExtinctionSampleSet& set, const GumbelPrediction& prediction,
                              double max_censored_fraction) {
    if (set.censored_fraction() > max_censored_fraction) {
        throw CensoringExceeded(fmt::format("{} of {} replicates censored at t_max = {} (limit {:.3g}%)",
                                            set.censored_count, set.replicates.size(), set.t_max,
                                            100.0 * max_censored_fraction));
    }
    NormalizedSampleSet ns{{}, prediction};
    ns.values.reserve(set.samples.size());
    for (const double t : set.samples) ns.values.push_back(prediction.normalize(t));
    return ns;
}

GofReport ks_vs_gumbel(const NormalizedSampleSet& ns) {
    if (ns.values.size() < 10) throw std::domain_error("ks_vs_gumbel: need at least 10 samples");
    std::vector<double> sorted = ns.values;
    std::sort(sorted.begin(), sorted.end());
    const double ks = ks_distance(sorted, gumbel_cdf);
    const SummaryStats s = summarize(ns.values);
    const double scale = ns.prediction.scale;
    return {ks, s.mean, s.sd, euler_gamma, s.n, scale * (s.mean + ns.prediction.centering),
            ns.prediction.predicted_mean};
}

std::vector<MeanDominationRow> mean_domination_report(const ModelParams& p, const InitialCondition& ic,
                                                      const TimeGrid& grid, std::size_t n, std::uint64_t seed,
                                                      unsigned parallelism_hint) {
    if (n < 2) throw std::domain_error("mean_domination_report: need at least 2 replicates");
    if (ic.x0() < 1) throw std::domain_error("mean_domination_report: x0 must be at least 1");
    const OdeSolution ode(p, ic);
    const std::size_t g = grid.size();
    std::vector<double> states(n * g);
    parallel_for(n, parallelism_hint, [&](std::size_t i) {
        const auto xs = sample_states_at(p, ic, RandomSource{seed, i}, grid);
        for (std::size_t j = 0; j < g; ++j) states[i * g + j] = static_cast<double>(xs[j]);
    });
    std::vector<MeanDominationRow> rows;
    rows.reserve(g);
    std::vector<double> column(n);
    for (std::size_t j = 0; j < g; ++j) {
        for (std::size_t i = 0; i < n; ++i) column[i] = states[i * g + j];
        const SummaryStats s = summarize(column);
        const double bound = static_cast<double>(p.N()) * ode.z(grid[j]);
        rows.push_back({grid[j], s.mean, s.standard_error, bound, s.mean > bound + 3.0 * s.standard_error});
    }
    return rows;
}

}  // namespace sisext
