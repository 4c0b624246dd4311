#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "peermax/distribution.hpp"
#include "peermax/outcomes.hpp"
#include "peermax/rng.hpp"

namespace peermax {

enum class BaseModel { SingleItemSpa, MultiUnitVcg };
enum class ExecMode { Serial, Parallel };

inline constexpr std::size_t kDefaultCap = 1'000'000;

/// Per-field standard errors of a Monte Carlo estimate.
struct StatsErrors {
    std::vector<double> w, s, r;
    double wel = 0.0;
    double base_rev = 0.0;
};

/// The (w_i, s_i, r_i) triple plus the WEL and base-mechanism revenue
/// benchmarks. w_i is buyer i's expected welfare contribution, s_i the
/// expected base-mechanism payment, r_i the others' optimal expected welfare;
/// they satisfy r_i = s_i + sum_{j != i} w_j.
struct PerBuyerStats {
    std::vector<double> w, s, r;
    double wel = 0.0;
    double base_rev = 0.0;
    std::optional<StatsErrors> stderrs;  // Monte Carlo only
};

/// Exact expectation by full joint-support enumeration weighted by product
/// probabilities. Requires discrete buyers and support product <= cap.
/// Tie-break: lowest index wins / is filled first, in both the mechanism and
/// the winner indicator. Block-partitioned with a fixed reduction order, so
/// serial and parallel runs are bit-identical.
PerBuyerStats stats_exact(const Instance& instance, BaseModel model,
                          std::size_t cap = kDefaultCap, ExecMode mode = ExecMode::Parallel);

/// Unbiased sample means of the same quantities with per-field standard
/// errors; w/s/r share sample paths. Deterministic given the stream's seed,
/// independent of thread count (per-block sub-streams, ordered reduce).
PerBuyerStats stats_mc(const Instance& instance, BaseModel model, std::int64_t samples,
                       RngStream& stream, ExecMode mode = ExecMode::Parallel);

/// Closed-form single-item stats via order-statistic CDF products over the
/// merged support; polynomial in (n, support size) rather than exponential.
/// Agrees with stats_exact(SingleItemSpa) on every discrete instance; the
/// enumeration engine stays around as the oracle for that claim.
PerBuyerStats single_item_stats(const Instance& instance);

/// One cell of the identity (monotone) quantile coupling between a true
/// distribution and a reported one.
struct CouplingCell {
    double measure = 0.0;
    double true_value = 0.0;
    double bid_value = 0.0;
};

/// Partition of [0,1] at the union of both quantile breakpoints; cell
/// measures sum to 1.
std::vector<CouplingCell> quantile_coupling(const Distribution& truth,
                                            const Distribution& report);

/// E over coupling cells and the others' joint support of
/// true_value * alloc_i(bid_value, b_{-i}); the allocation term of buyer i's
/// ex-ante utility under the identity arrangement.
double coupled_allocation_value(BaseModel model, const Instance& reported, std::size_t i,
                                const Distribution& true_dist, std::size_t cap = kDefaultCap);

/// Ex-ante utility of buyer i with true distribution true_dist when the
/// reported profile is `reported`: coupled allocation value minus the
/// expected payment under the reported profile.
double exante_utility_exact(BaseModel model, const Instance& reported, std::size_t i,
                            const Distribution& true_dist, std::size_t cap = kDefaultCap);

/// E over the others' joint support of buyer i's base-mechanism allocation
/// when i bids the fixed value `bid`.
double expected_allocation_at_bid(BaseModel model, const Instance& reported, std::size_t i,
                                  double bid, std::size_t cap = kDefaultCap);

/// Joint support size if within cap.
std::size_t joint_support_size(const Instance& instance, std::size_t cap);

}  // namespace peermax
