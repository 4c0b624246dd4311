#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "peermax/engine.hpp"

namespace peermax {

/// Participation boundary u >= tau is taken with this slack, so boundary
/// cases (w_i exactly equal to s_i + alpha r_i) count as participating.
inline constexpr double kParticipationTol = 1e-12;

/// The randomized multiplier law D_alpha: the listed grid A_{L,K} is drawn
/// uniformly with total probability 1/2, and high_atom = 2^{K+1} carries the
/// other 1/2. L = ceil(log2(4n)); |grid| = K + L + 2.
struct AlphaGrid {
    int k = 1;
    int l = 3;
    double high_atom = 4.0;
    std::vector<double> grid;  // {0, 2^-L, ..., 1/2, 1, 2, ..., 2^K}, ascending
};

AlphaGrid alpha_support(int k, int n);

/// REV(alpha) = sum_i 1[w_i >= s_i + alpha r_i] * (s_i + alpha r_i).
double rev_at_alpha(const PerBuyerStats& stats, double alpha);

struct TamReport {
    std::vector<double> u_base;      // base-mechanism ex-ante utility under the reported profile
    std::vector<double> thresholds;  // tau_i
    std::vector<bool> participates;
    std::vector<double> p;           // ex-ante payments p_i(B)
    double revenue = 0.0;
    std::optional<std::vector<double>> true_utility;  // set when a true profile is given
};

/// Threshold-augmented mechanism over an IC base: buyer i keeps the base
/// allocation and pays E[p^S_i] + tau_i when u^S_i >= tau_i, and is excluded
/// (still simulated in the base mechanism) otherwise. u^S_i is computed with
/// the reported profile as both value and bid law.
TamReport tam_evaluate(BaseModel base, const Instance& reported, std::vector<double> thresholds,
                       const std::optional<std::vector<Distribution>>& true_profile = {},
                       std::size_t cap = kDefaultCap);

struct PeerRevenue {
    double revenue = 0.0;
    AlphaGrid grid;
    std::vector<std::pair<double, double>> per_alpha;  // (alpha, REV(alpha)) over the grid
    double rev_high = 0.0;                             // REV(2^{K+1})
    PerBuyerStats stats;
};

/// Peer-Max: TAM_{tau^alpha} with tau_i = alpha * E[max_{j != i} v_j] and
/// alpha ~ D_alpha; the revenue is the closed-form expectation
/// REV(2^{K+1})/2 + (1/(2|A|)) sum_{alpha in A} REV(alpha).
PeerRevenue peer_max_revenue(const Instance& instance, int k, std::size_t cap = kDefaultCap);

/// Peer-Welfare: the VCG generalization, tau_i = alpha * E[others' optimal
/// welfare with i removed].
PeerRevenue peer_welfare_revenue(const Instance& instance, int k, std::size_t cap = kDefaultCap);

struct IidTamResult {
    double revenue = 0.0;
    std::vector<double> thresholds;
    std::vector<bool> participates;
    PerBuyerStats stats;
};

/// TAM with tau_i = U_i^SPA(B_{i'}, B_{-i}), i' the smallest index != i.
/// Extracts revenue = WEL when all buyers are identical; other inputs are
/// allowed but carry no guarantee.
IidTamResult iid_tam_revenue(const Instance& instance, std::size_t cap = kDefaultCap);

struct MechanismConfig {
    enum class Type { Tam, PeerMax, PeerWelfare, IidTam };
    Type type = Type::PeerMax;
    BaseModel base = BaseModel::SingleItemSpa;  // Tam only
    std::vector<double> thresholds;             // Tam only
    int k = 1;                                  // PeerMax / PeerWelfare
};

BaseModel mechanism_model(const MechanismConfig& config);

/// Expected revenue of the configured mechanism on a truthfully reported
/// instance.
double mechanism_revenue(const MechanismConfig& config, const Instance& instance,
                         std::size_t cap = kDefaultCap);

/// Ex-ante utility of buyer i with true distribution true_dist when the
/// submitted profile is `reported` (identity arrangement, quantile
/// coupling). Randomized mechanisms are averaged over their threshold
/// components.
double mechanism_exante_utility(const MechanismConfig& config, const Instance& reported,
                                std::size_t i, const Distribution& true_dist,
                                std::size_t cap = kDefaultCap);

/// Probability (mixture weight over threshold components) with which buyer i
/// participates under the reported profile; 0 or 1 for deterministic TAMs.
double participation_weight(const MechanismConfig& config, const Instance& reported,
                            std::size_t i, std::size_t cap = kDefaultCap);

/// The bid-reporting mechanism induced on a scaled family {a * base : a in
/// factors}: x~_i(a) = E[vhat(q_i) x_i(...)], p~_i(a) = p_i(F^{a_1}, ...,
/// F^{a_n}), with the IC / IR / feasibility checks evaluated on the table.
struct InducedBidTable {
    std::vector<double> factors;
    int n = 0;
    double feasibility_bound = 0.0;            // integral of vhat = mean(base)
    std::vector<std::vector<double>> alloc;    // [profile][buyer]
    std::vector<std::vector<double>> pay;      // [profile][buyer]
    std::uint64_t ic_checks = 0, ic_violations = 0;
    double max_ic_regret = 0.0;
    std::uint64_t feas_checks = 0, feas_violations = 0;
    double max_feas_excess = 0.0;
    std::uint64_t ir_violations = 0;
    double min_ir_utility = 0.0;

    std::size_t profile_count() const { return alloc.size(); }
};

InducedBidTable induce_bid_mechanism(const MechanismConfig& config, const Distribution& base,
                                     std::vector<double> factors, int n,
                                     std::size_t cap = kDefaultCap);

}  // namespace peermax
