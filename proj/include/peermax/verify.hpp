#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "peermax/mechanism.hpp"

namespace peermax {

/// The either-or guarantee threshold: min{wel / (24 (K + log2 n)), 2^K base_rev}.
double either_or_bound(double wel, double base_rev, int k, int n);

/// One-sided lower confidence bound for a binomial proportion (Wilson score).
double wilson_lower_bound(int hits, int trials, double z);

struct GuaranteeReport {
    std::uint64_t instance_id = 0;
    int n = 0;
    double wel = 0.0;
    double base_rev = 0.0;
    double bound = 0.0;
    double revenue = 0.0;
    double margin = 0.0;  // revenue - bound
    bool satisfied = false;
};

struct IcWitness {
    std::vector<std::size_t> true_profile;  // class indices, one per buyer
    std::size_t buyer = 0;
    std::size_t deviation = 0;  // class index of the deviating report
};

struct IcAuditResult {
    double max_regret = 0.0;
    IcWitness witness;
    std::uint64_t cases = 0;
};

/// Exhaustive deviation search over a finite class: for every true profile in
/// class^n, every buyer, every in-class deviation, the regret
/// U_i(B_i, F_{-i}; F_i) - U_i(F; F_i) is computed by quantile coupling.
IcAuditResult ic_audit(const MechanismConfig& config, const std::vector<Distribution>& cls,
                       int n, double m = 1.0, std::vector<double> demands = {},
                       std::size_t cap = kDefaultCap);

/// Enumerates all permutations of `cells` equal quantile cells as
/// measure-preserving arrangements for buyer i and reports whether the
/// identity attains the maximum ex-ante utility (ties allowed). The instance
/// holds the true distributions; reported_i defaults to the truthful report.
bool arrangement_audit(const MechanismConfig& config, const Instance& instance, std::size_t i,
                       int cells, const std::optional<Distribution>& reported_i = {},
                       std::size_t cap = kDefaultCap);

struct PostedPriceCap {
    double cap = 0.0;    // max_j 2^-j * (cumulative family weight up to j)
    double bound = 0.0;  // 2 delta
    bool ok = false;
};

/// Per-buyer posted-price ceiling of the general hard family.
PostedPriceCap posted_price_cap(const HardFamily& family);

struct ConcentrationResult {
    double frequency = 0.0;
    double lcb99 = 0.0;  // one-sided 99% lower confidence bound on the frequency
    int hits = 0;
    int trials = 0;
    double threshold = 0.0;  // (2/3) n delta L
};

/// Frequency of the event {sum_i E[v_i] >= (2/3) n delta L} over instances
/// drawn from the general hard-family law. Needs n >= 64 so that L >= 2.
ConcentrationResult concentration_audit(int n, int trials, RngStream& stream);

struct UpperBoundResult {
    double mean_rev = 0.0;
    double stderr_rev = 0.0;
    double ceiling = 0.0;  // 2 n delta
    bool ok = false;
    int trials = 0;
};

/// Mean revenue of a valid mechanism over draws from the general hard-family
/// instance law, checked against the 2 n delta ceiling (plus 4 stderr).
UpperBoundResult upper_bound_audit(const MechanismConfig& config, int n, int trials,
                                   RngStream& stream, std::size_t cap = kDefaultCap);

struct SweepConfig {
    int count = 0;
    int n_min = 2, n_max = 5;
    int k_min = 1, k_max = 3;
    int big_k = 1;  // the K of the guarantee
    std::uint64_t seed = 0;
    BaseModel model = BaseModel::SingleItemSpa;
    double vmax = 10.0;
    int m_max = 3;   // MultiUnitVcg only
    int d_max = 2;   // MultiUnitVcg only
    std::size_t cap = kDefaultCap;
    ExecMode mode = ExecMode::Parallel;
};

struct SweepSummary {
    int count = 0;
    int violations = 0;
    double min_margin = 0.0;
};

struct SweepResult {
    std::vector<GuaranteeReport> reports;
    SweepSummary summary;
};

/// Random-instance guarantee sweep for Peer-Max (single-item) or Peer-Welfare
/// (multi-unit). Instances derive per-index sub-streams from the seed and the
/// reports are merged in instance order, so results do not depend on thread
/// count.
SweepResult sweep(const SweepConfig& config);

}  // namespace peermax
