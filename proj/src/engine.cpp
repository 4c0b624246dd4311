#include "peermax/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "peermax/errors.hpp"

namespace peermax {

namespace {

constexpr std::size_t kBlock = 4096;

void require_discrete(const Instance& instance) {
    for (std::size_t i = 0; i < instance.n(); ++i)
        if (!instance.buyers[i].is_discrete())
            throw RepresentationError("buyers[" + std::to_string(i) +
                                      "] is not discrete; the exact engine needs finite support");
}

void require_model_fit(const Instance& instance, BaseModel model) {
    if (model == BaseModel::SingleItemSpa && !instance.is_single_item())
        throw ValidationError("single-item SPA model needs m = 1 and unit demands");
}

struct SupportTable {
    std::vector<std::vector<double>> values;
    std::vector<std::vector<double>> probs;
    std::vector<std::size_t> sizes;
};

SupportTable support_table(const Instance& instance) {
    SupportTable t;
    for (const Distribution& f : instance.buyers) {
        std::vector<double> vs, ps;
        for (const Atom& a : f.atoms()) {
            vs.push_back(a.value);
            ps.push_back(a.prob);
        }
        t.sizes.push_back(vs.size());
        t.values.push_back(std::move(vs));
        t.probs.push_back(std::move(ps));
    }
    return t;
}

// Per-profile w/s/r/wel contributions for one realized bid vector.
struct ProfileScratch {
    std::vector<double> suffix_max;
    std::vector<double> w, s, r;
    double wel = 0.0;

    explicit ProfileScratch(std::size_t n) : suffix_max(n + 1, 0.0), w(n), s(n), r(n) {}

    void evaluate(BaseModel model, const Instance& instance, std::span<const double> bids) {
        const std::size_t n = bids.size();
        std::fill(w.begin(), w.end(), 0.0);
        std::fill(s.begin(), s.end(), 0.0);
        wel = 0.0;
        if (model == BaseModel::SingleItemSpa) {
            suffix_max[n] = 0.0;
            for (std::size_t i = n; i-- > 0;)
                suffix_max[i] = std::max(suffix_max[i + 1], bids[i]);
            std::size_t winner = 0;
            double prefix = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (bids[i] > bids[winner]) winner = i;
                r[i] = std::max(prefix, suffix_max[i + 1]);
                prefix = std::max(prefix, bids[i]);
            }
            w[winner] = bids[winner];
            s[winner] = r[winner];  // second price = max over the others
            wel = bids[winner];
        } else {
            const BidOutcome out = vcg_outcome(bids, instance.m, instance.demands);
            for (std::size_t i = 0; i < n; ++i) {
                w[i] = bids[i] * out.alloc[i];
                s[i] = out.pay[i];
                r[i] = others_optimal_welfare(bids, instance.m, instance.demands, i);
                wel += w[i];
            }
        }
    }
};

struct StatsPartial {
    std::vector<double> w, s, r;
    double wel = 0.0;
    double base_rev = 0.0;

    explicit StatsPartial(std::size_t n) : w(n, 0.0), s(n, 0.0), r(n, 0.0) {}

    void add_weighted(const ProfileScratch& one, double weight) {
        double rev = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] += weight * one.w[i];
            s[i] += weight * one.s[i];
            r[i] += weight * one.r[i];
            rev += one.s[i];
        }
        wel += weight * one.wel;
        base_rev += weight * rev;
    }

    void add(const StatsPartial& o) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] += o.w[i];
            s[i] += o.s[i];
            r[i] += o.r[i];
        }
        wel += o.wel;
        base_rev += o.base_rev;
    }
};

}  // namespace

std::size_t joint_support_size(const Instance& instance, std::size_t cap) {
    require_discrete(instance);
    std::size_t product = 1;
    for (const Distribution& f : instance.buyers) {
        const std::size_t k = f.atoms().size();
        if (product > cap / k)
            throw CapacityError("joint support exceeds cap " + std::to_string(cap) +
                                " (at least " + std::to_string(product) + " x " +
                                std::to_string(k) + " profiles)");
        product *= k;
    }
    if (product > cap)
        throw CapacityError("joint support of " + std::to_string(product) +
                            " profiles exceeds cap " + std::to_string(cap));
    return product;
}

PerBuyerStats stats_exact(const Instance& instance, BaseModel model, std::size_t cap,
                          ExecMode mode) {
    require_model_fit(instance, model);
    const std::size_t total = joint_support_size(instance, cap);
    const std::size_t n = instance.n();
    const SupportTable table = support_table(instance);

    const std::size_t nblocks = (total + kBlock - 1) / kBlock;
    std::vector<StatsPartial> partials(nblocks, StatsPartial(n));

    auto run_block = [&](std::size_t b) {
        const std::size_t begin = b * kBlock;
        const std::size_t end = std::min(begin + kBlock, total);
        ProfileScratch one(n);
        std::vector<std::size_t> digits(n, 0);
        std::vector<double> bids(n, 0.0);
        std::size_t rem = begin;
        for (std::size_t i = n; i-- > 0;) {
            digits[i] = rem % table.sizes[i];
            rem /= table.sizes[i];
        }
        StatsPartial& acc = partials[b];
        for (std::size_t p = begin; p < end; ++p) {
            double prob = 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                bids[i] = table.values[i][digits[i]];
                prob *= table.probs[i][digits[i]];
            }
            one.evaluate(model, instance, bids);
            acc.add_weighted(one, prob);
            for (std::size_t i = n; i-- > 0;) {  // odometer step
                if (++digits[i] < table.sizes[i]) break;
                digits[i] = 0;
            }
        }
    };

    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t b = 0; b < static_cast<std::int64_t>(nblocks); ++b)
            run_block(static_cast<std::size_t>(b));
    } else {
        for (std::size_t b = 0; b < nblocks; ++b) run_block(b);
    }

    StatsPartial totals(n);
    for (const StatsPartial& p : partials) totals.add(p);
    PerBuyerStats st;
    st.w = std::move(totals.w);
    st.s = std::move(totals.s);
    st.r = std::move(totals.r);
    st.wel = totals.wel;
    st.base_rev = totals.base_rev;
    return st;
}

namespace {

// Sample sums and sums of squares, reduced blockwise in fixed order.
struct McPartial {
    StatsPartial sum;
    StatsPartial sumsq;
    explicit McPartial(std::size_t n) : sum(n), sumsq(n) {}
};

}  // namespace

PerBuyerStats stats_mc(const Instance& instance, BaseModel model, std::int64_t samples,
                       RngStream& stream, ExecMode mode) {
    if (samples < 1) throw DomainError("stats_mc needs samples >= 1");
    require_model_fit(instance, model);
    const std::size_t n = instance.n();
    const std::uint64_t base = stream.next_u64();

    const std::size_t nsamples = static_cast<std::size_t>(samples);
    const std::size_t nblocks = (nsamples + kBlock - 1) / kBlock;
    std::vector<McPartial> partials(nblocks, McPartial(n));

    auto run_block = [&](std::size_t b) {
        const std::size_t begin = b * kBlock;
        const std::size_t end = std::min(begin + kBlock, nsamples);
        RngStream block_stream(splitmix64(base ^ splitmix64(b + 0x6a09e667f3bcc909ULL)));
        ProfileScratch one(n);
        std::vector<double> bids(n, 0.0);
        McPartial& acc = partials[b];
        for (std::size_t sidx = begin; sidx < end; ++sidx) {
            for (std::size_t i = 0; i < n; ++i) bids[i] = instance.buyers[i].sample(block_stream);
            one.evaluate(model, instance, bids);
            double rev = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc.sum.w[i] += one.w[i];
                acc.sum.s[i] += one.s[i];
                acc.sum.r[i] += one.r[i];
                acc.sumsq.w[i] += one.w[i] * one.w[i];
                acc.sumsq.s[i] += one.s[i] * one.s[i];
                acc.sumsq.r[i] += one.r[i] * one.r[i];
                rev += one.s[i];
            }
            acc.sum.wel += one.wel;
            acc.sumsq.wel += one.wel * one.wel;
            acc.sum.base_rev += rev;
            acc.sumsq.base_rev += rev * rev;
        }
    };

    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t b = 0; b < static_cast<std::int64_t>(nblocks); ++b)
            run_block(static_cast<std::size_t>(b));
    } else {
        for (std::size_t b = 0; b < nblocks; ++b) run_block(b);
    }

    McPartial totals(n);
    for (const McPartial& p : partials) {
        totals.sum.add(p.sum);
        totals.sumsq.add(p.sumsq);
    }

    const double count = static_cast<double>(nsamples);
    auto stderr_of = [&](double sum, double sumsq) {
        if (nsamples < 2) return 0.0;
        const double mean = sum / count;
        double var = (sumsq - count * mean * mean) / (count - 1.0);
        if (var < 0.0) var = 0.0;
        return std::sqrt(var / count);
    };

    PerBuyerStats st;
    st.w.resize(n);
    st.s.resize(n);
    st.r.resize(n);
    StatsErrors se;
    se.w.resize(n);
    se.s.resize(n);
    se.r.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        st.w[i] = totals.sum.w[i] / count;
        st.s[i] = totals.sum.s[i] / count;
        st.r[i] = totals.sum.r[i] / count;
        se.w[i] = stderr_of(totals.sum.w[i], totals.sumsq.w[i]);
        se.s[i] = stderr_of(totals.sum.s[i], totals.sumsq.s[i]);
        se.r[i] = stderr_of(totals.sum.r[i], totals.sumsq.r[i]);
    }
    st.wel = totals.sum.wel / count;
    st.base_rev = totals.sum.base_rev / count;
    se.wel = stderr_of(totals.sum.wel, totals.sumsq.wel);
    se.base_rev = stderr_of(totals.sum.base_rev, totals.sumsq.base_rev);
    st.stderrs = std::move(se);
    return st;
}

namespace {

double prob_below(const std::vector<Atom>& atoms, double t, bool strict) {
    double p = 0.0;
    for (const Atom& a : atoms)
        if (strict ? a.value < t : a.value <= t) p += a.prob;
    return p;
}

}  // namespace

PerBuyerStats single_item_stats(const Instance& instance) {
    require_discrete(instance);
    if (!instance.is_single_item())
        throw ValidationError("single_item_stats needs m = 1 and unit demands");
    const std::size_t n = instance.n();
    PerBuyerStats st;
    st.w.assign(n, 0.0);
    st.s.assign(n, 0.0);
    st.r.assign(n, 0.0);

    std::vector<const std::vector<Atom>*> atoms(n);
    for (std::size_t i = 0; i < n; ++i) atoms[i] = &instance.buyers[i].atoms();

    std::vector<double> support;  // merged positive support, ascending
    for (std::size_t i = 0; i < n; ++i)
        for (const Atom& a : *atoms[i])
            if (a.value > 0.0) support.push_back(a.value);
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());

    // E[max] = sum over layers (t_r - t_{r-1}) * P[max >= t_r].
    double prev = 0.0;
    for (double t : support) {
        double all_below = 1.0;
        for (std::size_t j = 0; j < n; ++j) all_below *= prob_below(*atoms[j], t, true);
        st.wel += (t - prev) * (1.0 - all_below);
        prev = t;
    }

    for (std::size_t i = 0; i < n; ++i) {
        prev = 0.0;
        for (double t : support) {
            double below = 1.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) below *= prob_below(*atoms[j], t, true);
            st.r[i] += (t - prev) * (1.0 - below);
            prev = t;
        }
        for (const Atom& atom : *atoms[i]) {
            const double a = atom.value;
            // i wins at value a iff every j < i is strictly below and every
            // j > i is at most a (lowest index wins ties).
            double win = 1.0;
            for (std::size_t j = 0; j < n && win > 0.0; ++j)
                if (j != i) win *= prob_below(*atoms[j], a, /*strict=*/j < i);
            if (win <= 0.0) continue;
            st.w[i] += atom.prob * a * win;
            // E[(max of others) * 1[win]]: within the win event every other
            // buyer sits at or below a, so layers above a vanish and
            // P[win and max < t] = prod_{j != i} P[v_j < t] for t <= a.
            double gain = 0.0;
            prev = 0.0;
            for (double t : support) {
                if (t > a) break;
                double below = 1.0;
                for (std::size_t j = 0; j < n; ++j)
                    if (j != i) below *= prob_below(*atoms[j], t, true);
                gain += (t - prev) * (win - below);
                prev = t;
            }
            st.s[i] += atom.prob * gain;
        }
    }
    for (double si : st.s) st.base_rev += si;
    return st;
}

std::vector<CouplingCell> quantile_coupling(const Distribution& truth,
                                            const Distribution& report) {
    std::vector<double> breaks = truth.tail_breakpoints();
    for (double b : report.tail_breakpoints()) breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    std::vector<CouplingCell> cells;
    double prev = 0.0;
    for (double b : breaks) {
        const double measure = b - prev;
        if (measure > 0.0)
            cells.push_back({measure, truth.quantile(b), report.quantile(b)});
        prev = b;
    }
    return cells;
}

double coupled_allocation_value(BaseModel model, const Instance& reported, std::size_t i,
                                const Distribution& true_dist, std::size_t cap) {
    require_model_fit(reported, model);
    const std::size_t n = reported.n();
    if (i >= n) throw ParameterError("buyer index out of range");
    const std::vector<CouplingCell> cells = quantile_coupling(true_dist, reported.buyers[i]);

    std::size_t others = 1;  // joint support of everyone but i
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const std::size_t k = reported.buyers[j].atoms().size();
        if (others > cap / k)
            throw CapacityError("others' joint support exceeds cap " + std::to_string(cap));
        others *= k;
    }
    if (others * cells.size() > cap)
        throw CapacityError("coupling evaluation exceeds cap " + std::to_string(cap));

    std::vector<std::size_t> digits(n, 0);
    std::vector<double> bids(n, 0.0);
    double total = 0.0;
    for (std::size_t p = 0; p < others; ++p) {
        double prob = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const Atom& a = reported.buyers[j].atoms()[digits[j]];
            bids[j] = a.value;
            prob *= a.prob;
        }
        for (const CouplingCell& cell : cells) {
            if (cell.true_value == 0.0) continue;
            bids[i] = cell.bid_value;
            const BidOutcome out = model == BaseModel::SingleItemSpa
                                       ? spa_outcome(bids)
                                       : vcg_outcome(bids, reported.m, reported.demands);
            if (out.alloc[i] != 0.0)
                total += prob * cell.measure * cell.true_value * out.alloc[i];
        }
        for (std::size_t j = n; j-- > 0;) {
            if (j == i) continue;
            if (++digits[j] < reported.buyers[j].atoms().size()) break;
            digits[j] = 0;
        }
    }
    return total;
}

double exante_utility_exact(BaseModel model, const Instance& reported, std::size_t i,
                            const Distribution& true_dist, std::size_t cap) {
    const double alloc_value = coupled_allocation_value(model, reported, i, true_dist, cap);
    const PerBuyerStats st = model == BaseModel::SingleItemSpa
                                 ? single_item_stats(reported)
                                 : stats_exact(reported, model, cap);
    return alloc_value - st.s[i];
}

double expected_allocation_at_bid(BaseModel model, const Instance& reported, std::size_t i,
                                  double bid, std::size_t cap) {
    require_model_fit(reported, model);
    const std::size_t n = reported.n();
    if (i >= n) throw ParameterError("buyer index out of range");
    std::size_t others = 1;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const std::size_t k = reported.buyers[j].atoms().size();
        if (others > cap / k)
            throw CapacityError("others' joint support exceeds cap " + std::to_string(cap));
        others *= k;
    }

    std::vector<std::size_t> digits(n, 0);
    std::vector<double> bids(n, 0.0);
    bids[i] = bid;
    double total = 0.0;
    for (std::size_t p = 0; p < others; ++p) {
        double prob = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const Atom& a = reported.buyers[j].atoms()[digits[j]];
            bids[j] = a.value;
            prob *= a.prob;
        }
        const BidOutcome out = model == BaseModel::SingleItemSpa
                                   ? spa_outcome(bids)
                                   : vcg_outcome(bids, reported.m, reported.demands);
        total += prob * out.alloc[i];
        for (std::size_t j = n; j-- > 0;) {
            if (j == i) continue;
            if (++digits[j] < reported.buyers[j].atoms().size()) break;
            digits[j] = 0;
        }
    }
    return total;
}

}  // namespace peermax
