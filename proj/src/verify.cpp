#include "peermax/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "peermax/errors.hpp"

namespace peermax {

double either_or_bound(double wel, double base_rev, int k, int n) {
    if (wel < 0.0 || base_rev < 0.0) throw DomainError("benchmarks must be >= 0");
    if (k < 1) throw ParameterError("either_or_bound needs K >= 1");
    if (n < 2) throw ParameterError("either_or_bound needs n >= 2");
    const double wel_side = wel / (24.0 * (k + std::log2(static_cast<double>(n))));
    const double spa_side = std::ldexp(base_rev, k);
    return std::min(wel_side, spa_side);
}

double wilson_lower_bound(int hits, int trials, double z) {
    if (trials <= 0) throw DomainError("wilson_lower_bound needs trials >= 1");
    const double nt = static_cast<double>(trials);
    const double phat = static_cast<double>(hits) / nt;
    const double z2 = z * z;
    const double center = phat + z2 / (2.0 * nt);
    const double spread = z * std::sqrt(phat * (1.0 - phat) / nt + z2 / (4.0 * nt * nt));
    return std::max(0.0, (center - spread) / (1.0 + z2 / nt));
}

IcAuditResult ic_audit(const MechanismConfig& config, const std::vector<Distribution>& cls,
                       int n, double m, std::vector<double> demands, std::size_t cap) {
    if (cls.empty()) throw ValidationError("ic_audit needs a non-empty class");
    if (n < 2) throw ValidationError("ic_audit needs n >= 2");
    const std::size_t un = static_cast<std::size_t>(n);
    if (demands.empty()) demands.assign(un, 1.0);
    if (demands.size() != un) throw ValidationError("demands length must equal n");

    const std::size_t k = cls.size();
    std::size_t profiles = 1;
    for (int j = 0; j < n; ++j) {
        if (profiles > cap / k)
            throw CapacityError("ic_audit profile space exceeds cap " + std::to_string(cap));
        profiles *= k;
    }

    IcAuditResult result;
    result.max_regret = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> digits(un, 0);
    for (std::size_t p = 0; p < profiles; ++p) {
        std::vector<Distribution> truth;
        truth.reserve(un);
        for (std::size_t j = 0; j < un; ++j) truth.push_back(cls[digits[j]]);
        const Instance truthful = Instance::make(truth, m, demands);
        for (std::size_t i = 0; i < un; ++i) {
            const double u_truth =
                mechanism_exante_utility(config, truthful, i, truth[i], cap);
            for (std::size_t dev = 0; dev < k; ++dev) {
                if (cls[dev] == truth[i]) continue;
                Instance reported = truthful;
                reported.buyers[i] = cls[dev];
                const double u_dev =
                    mechanism_exante_utility(config, reported, i, truth[i], cap);
                ++result.cases;
                const double regret = u_dev - u_truth;
                if (regret > result.max_regret) {
                    result.max_regret = regret;
                    result.witness = IcWitness{digits, i, dev};
                }
            }
        }
        for (std::size_t j = un; j-- > 0;) {
            if (++digits[j] < k) break;
            digits[j] = 0;
        }
    }
    if (result.cases == 0) result.max_regret = 0.0;
    return result;
}

namespace {

// Values of a distribution on `cells` equal quantile cells; throws when a
// breakpoint is off the grid.
std::vector<double> cell_values(const Distribution& dist, int cells) {
    const double c = static_cast<double>(cells);
    for (double b : dist.tail_breakpoints()) {
        const double scaled = b * c;
        if (std::abs(scaled - std::round(scaled)) > 1e-9)
            throw ParameterError("quantile breakpoint " + std::to_string(b) +
                                 " is off the " + std::to_string(cells) + "-cell grid");
    }
    std::vector<double> values(static_cast<std::size_t>(cells));
    for (int kcell = 0; kcell < cells; ++kcell)
        values[static_cast<std::size_t>(kcell)] =
            dist.quantile((kcell + 1) / c);
    return values;
}

}  // namespace

bool arrangement_audit(const MechanismConfig& config, const Instance& instance, std::size_t i,
                       int cells, const std::optional<Distribution>& reported_i,
                       std::size_t cap) {
    if (cells < 1 || cells > 6) throw ParameterError("arrangement_audit needs 1 <= cells <= 6");
    if (i >= instance.n()) throw ParameterError("buyer index out of range");
    const Distribution& truth = instance.buyers[i];
    const Distribution report = reported_i.value_or(truth);

    const std::vector<double> true_vals = cell_values(truth, cells);
    const std::vector<double> bid_vals = cell_values(report, cells);

    Instance reported = instance;
    reported.buyers[i] = report;
    const BaseModel model = mechanism_model(config);

    // The payment and the participation weight depend only on the reported
    // profile, never on the arrangement, so they cancel when comparing
    // arrangements; an excluded buyer earns 0 under every arrangement.
    if (participation_weight(config, reported, i, cap) <= 0.0) return true;

    // Expected base allocation for each cell's bid against the others.
    const std::size_t c = static_cast<std::size_t>(cells);
    std::vector<double> cell_alloc(c, 0.0);
    for (std::size_t kcell = 0; kcell < c; ++kcell)
        cell_alloc[kcell] = expected_allocation_at_bid(model, reported, i, bid_vals[kcell], cap);

    // Identity pairs true cell k with bid cell k; a permutation re-pairs them.
    std::vector<std::size_t> perm(c);
    std::iota(perm.begin(), perm.end(), 0);
    const auto pairing_value = [&](const std::vector<std::size_t>& pi) {
        double total = 0.0;
        for (std::size_t kcell = 0; kcell < c; ++kcell)
            total += true_vals[kcell] * cell_alloc[pi[kcell]];
        return total / static_cast<double>(c);
    };
    const double identity_value = pairing_value(perm);
    double best = identity_value;
    while (std::next_permutation(perm.begin(), perm.end()))
        best = std::max(best, pairing_value(perm));
    return identity_value >= best - 1e-9;
}

PostedPriceCap posted_price_cap(const HardFamily& family) {
    if (family.kind != HardKind::General)
        throw ParameterError("posted_price_cap applies to the general hard family");
    PostedPriceCap out;
    out.bound = 2.0 * family.delta;
    double cumulative = 0.0;
    for (int j = 1; j <= family.levels; ++j) {
        cumulative += family.weights[static_cast<std::size_t>(j - 1)];
        out.cap = std::max(out.cap, std::ldexp(cumulative, -j));
    }
    out.ok = out.cap <= out.bound + 1e-12;
    return out;
}

ConcentrationResult concentration_audit(int n, int trials, RngStream& stream) {
    if (trials < 1) throw DomainError("concentration_audit needs trials >= 1");
    ConcentrationResult out;
    out.trials = trials;
    for (int t = 0; t < trials; ++t) {
        const HardInstance hard = make_hard_instance(HardKind::General, n, stream);
        if (t == 0) {
            if (hard.family.levels < 2)
                throw ParameterError("concentration_audit needs n >= 64 so that L >= 2");
            out.threshold = (2.0 / 3.0) * n * hard.family.delta * hard.family.levels;
        }
        double total_mean = 0.0;
        for (const Distribution& f : hard.instance.buyers) total_mean += f.mean();
        if (total_mean >= out.threshold - 1e-12) ++out.hits;
    }
    out.frequency = static_cast<double>(out.hits) / static_cast<double>(trials);
    out.lcb99 = wilson_lower_bound(out.hits, trials, 2.3263478740408408);
    return out;
}

UpperBoundResult upper_bound_audit(const MechanismConfig& config, int n, int trials,
                                   RngStream& stream, std::size_t cap) {
    if (trials < 1) throw DomainError("upper_bound_audit needs trials >= 1");
    if (mechanism_model(config) != BaseModel::SingleItemSpa)
        throw ValidationError("upper_bound_audit draws single-item instances");
    UpperBoundResult out;
    out.trials = trials;
    double sum = 0.0, sumsq = 0.0;
    for (int t = 0; t < trials; ++t) {
        const HardInstance hard = make_hard_instance(HardKind::General, n, stream);
        if (t == 0) out.ceiling = 2.0 * n * hard.family.delta;
        const double rev = mechanism_revenue(config, hard.instance, cap);
        sum += rev;
        sumsq += rev * rev;
    }
    const double count = static_cast<double>(trials);
    out.mean_rev = sum / count;
    if (trials > 1) {
        double var = (sumsq - count * out.mean_rev * out.mean_rev) / (count - 1.0);
        if (var < 0.0) var = 0.0;
        out.stderr_rev = std::sqrt(var / count);
    }
    out.ok = out.mean_rev <= out.ceiling + 4.0 * out.stderr_rev + 1e-12;
    return out;
}

SweepResult sweep(const SweepConfig& config) {
    if (config.count < 0) throw ValidationError("sweep count must be >= 0");
    if (config.n_min < 2 || config.n_max < config.n_min)
        throw ValidationError("sweep needs 2 <= n_min <= n_max");
    if (config.k_min < 1 || config.k_max < config.k_min)
        throw ValidationError("sweep needs 1 <= k_min <= k_max");

    SweepResult result;
    result.reports.resize(static_cast<std::size_t>(config.count));
    const RngStream root(config.seed);

    auto run_one = [&](std::size_t idx) {
        RngStream local = root.child(idx);
        const int n = config.n_min +
                      static_cast<int>(local.next_below(
                          static_cast<std::uint64_t>(config.n_max - config.n_min + 1)));
        const int k = config.k_min +
                      static_cast<int>(local.next_below(
                          static_cast<std::uint64_t>(config.k_max - config.k_min + 1)));
        Instance instance = random_discrete_instance(n, k, config.vmax, local);
        PeerRevenue pr;
        if (config.model == BaseModel::MultiUnitVcg) {
            instance.m = 1.0 + static_cast<double>(
                                   local.next_below(static_cast<std::uint64_t>(config.m_max)));
            for (double& d : instance.demands)
                d = 1.0 + static_cast<double>(
                              local.next_below(static_cast<std::uint64_t>(config.d_max)));
            pr = peer_welfare_revenue(instance, config.big_k, config.cap);
        } else {
            pr = peer_max_revenue(instance, config.big_k, config.cap);
        }
        GuaranteeReport rep;
        rep.instance_id = idx;
        rep.n = n;
        rep.wel = pr.stats.wel;
        rep.base_rev = pr.stats.base_rev;
        rep.bound = either_or_bound(rep.wel, rep.base_rev, config.big_k, n);
        rep.revenue = pr.revenue;
        rep.margin = rep.revenue - rep.bound;
        rep.satisfied = rep.margin >= -1e-9;
        result.reports[idx] = rep;
    };

    if (config.mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(config.count); ++i)
            run_one(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < static_cast<std::size_t>(config.count); ++i) run_one(i);
    }

    result.summary.count = config.count;
    result.summary.min_margin = result.reports.empty()
                                    ? 0.0
                                    : std::numeric_limits<double>::infinity();
    for (const GuaranteeReport& rep : result.reports) {
        result.summary.min_margin = std::min(result.summary.min_margin, rep.margin);
        if (!rep.satisfied) ++result.summary.violations;
    }
    return result;
}

}  // namespace peermax
