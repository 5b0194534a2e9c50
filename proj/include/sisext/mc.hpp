#pragma once

// Parallel Monte Carlo batches and the statistics used to compare them with
// the analytic predictions. Replicate i always uses stream_id i, so results
// do not depend on how many workers ran the batch.

#include "sisext/analytic.hpp"
#include "sisext/model.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace sisext {

/// Worker count for a hint; 0 means hardware concurrency.
unsigned resolve_threads(unsigned hint);

/// Calls fn(i) for i in [0, n) on up to `threads` workers. fn must only
/// write to slots owned by index i.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    const unsigned workers = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    constexpr std::size_t chunk = 64;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        try {
            for (;;) {
                const std::size_t begin = next.fetch_add(chunk);
                if (begin >= n) return;
                const std::size_t end = std::min(n, begin + chunk);
                for (std::size_t i = begin; i < end; ++i) fn(i);
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(n);
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

struct ReplicateRecord {
    std::uint64_t stream_id;
    double extinction_time;  // censoring horizon when censored
    std::uint64_t event_count;
    bool censored;
};

struct ExtinctionSampleSet {
    ModelParams params;
    State x0;
    std::uint64_t master_seed;
    double t_max;
    std::vector<ReplicateRecord> replicates;  // ordered by stream_id
    std::vector<double> samples;              // uncensored extinction times, stream order
    std::size_t censored_count = 0;

    double censored_fraction() const noexcept;
};

ExtinctionSampleSet run_batch(const ModelParams& p, const InitialCondition& ic, std::size_t n,
                              std::uint64_t master_seed, double t_max, unsigned parallelism_hint = 0);

/// One row per replicate under the header
/// "stream_id,extinction_time,event_count,censored". Times use the shortest
/// round-trip decimal form, so equal sets give equal bytes.
void write_samples_csv(std::ostream& out, const ExtinctionSampleSet& set);

/// Fraction of samples <= t.
double empirical_cdf(std::span<const double> samples, double t);

/// Sorted-copy ECDF for repeated evaluation.
class EmpiricalCdf {
public:
    explicit EmpiricalCdf(std::vector<double> samples);
    double operator()(double t) const;
    std::span<const double> sorted() const noexcept { return sorted_; }

private:
    std::vector<double> sorted_;
};

struct SummaryStats {
    std::size_t n;
    double mean;
    double sd;
    double standard_error;
};

SummaryStats summarize(std::span<const double> values);

/// Sample quantile by linear interpolation between order statistics.
double sample_quantile(std::vector<double> values, double q);

inline constexpr double default_max_censored_fraction = 1e-3;

struct NormalizedSampleSet {
    std::vector<double> values;  // (mu - lambda) T_i - centering
    GumbelPrediction prediction;
};

/// Normalizes the uncensored samples; throws CensoringExceeded when the
/// censored fraction is above the limit.
NormalizedSampleSet normalize(const ExtinctionSampleSet& set, const GumbelPrediction& prediction,
                              double max_censored_fraction = default_max_censored_fraction);

struct GofReport {
    double ks_distance;
    double sample_mean;     // of the normalized values
    double sample_sd;
    double predicted_mean;  // Euler's gamma on the normalized scale
    std::size_t n;
    double time_sample_mean;     // mean extinction time
    double time_predicted_mean;  // (centering + gamma) / (mu - lambda)
};

/// Kolmogorov-Smirnov distance of a sample against a continuous CDF,
/// evaluated exactly at the order statistics.
template <typename Cdf>
double ks_distance(std::span<const double> sorted, Cdf&& cdf) {
    const auto n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

GofReport ks_vs_gumbel(const NormalizedSampleSet& ns);

struct MeanDominationRow {
    double t;
    double mc_mean;
    double standard_error;
    double ode_bound;  // N z(t)
    bool violated;     // mc_mean > ode_bound + 3 SE
};

std::vector<MeanDominationRow> mean_domination_report(const ModelParams& p, const InitialCondition& ic,
                                                      const TimeGrid& grid, std::size_t n, std::uint64_t seed,
                                                      unsigned parallelism_hint = 0);

}  // namespace sisext
