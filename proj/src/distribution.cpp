#include "peermax/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "peermax/errors.hpp"

namespace peermax {

namespace {

constexpr double kProbTol = 1e-12;

}  // namespace

Distribution Distribution::discrete(std::vector<Atom> atoms) {
    if (atoms.empty())
        throw ValidationError("discrete distribution needs at least one atom");
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.value > b.value; });
    // Merge exactly-equal values; inputs come from users or closed forms, so
    // exact comparison is the intended dedup rule.
    std::vector<Atom> merged;
    for (const Atom& a : atoms) {
        if (!(a.value >= 0.0))
            throw ValidationError("atom value must be >= 0, got " + std::to_string(a.value));
        if (!(a.prob > 0.0) || a.prob > 1.0 + kProbTol)
            throw ValidationError("atom probability must be in (0,1], got " + std::to_string(a.prob));
        if (!merged.empty() && merged.back().value == a.value)
            merged.back().prob += a.prob;
        else
            merged.push_back(a);
    }
    double total = 0.0;
    for (const Atom& a : merged) total += a.prob;
    if (std::abs(total - 1.0) > kProbTol)
        throw ValidationError("atom probabilities sum to " + std::to_string(total) + ", expected 1");
    Distribution d;
    d.kind_ = merged.size() == 1 ? Kind::Degenerate : Kind::Discrete;
    d.atoms_ = std::move(merged);
    if (d.kind_ == Kind::Degenerate) d.atoms_.front().prob = 1.0;
    return d;
}

Distribution Distribution::degenerate(double value) {
    if (!(value >= 0.0))
        throw ValidationError("degenerate value must be >= 0");
    Distribution d;
    d.kind_ = Kind::Degenerate;
    d.atoms_ = {Atom{value, 1.0}};
    return d;
}

Distribution Distribution::truncated_er(double scale, double h) {
    if (!(scale > 0.0))
        throw ValidationError("truncated_er scale must be > 0");
    if (!(h >= 1.0))
        throw ValidationError("truncated_er h must be >= 1");
    Distribution d;
    d.kind_ = Kind::TruncatedEqualRevenue;
    d.scale_ = scale;
    d.h_ = h;
    return d;
}

const std::vector<Atom>& Distribution::atoms() const {
    if (!is_discrete())
        throw RepresentationError("truncated_er distribution has no finite support");
    return atoms_;
}

double Distribution::degenerate_value() const {
    if (kind_ != Kind::Degenerate)
        throw RepresentationError("not a degenerate distribution");
    return atoms_.front().value;
}

double Distribution::quantile(double q) const {
    if (!(q >= 0.0 && q <= 1.0))
        throw DomainError("quantile argument must be in [0,1], got " + std::to_string(q));
    if (kind_ == Kind::TruncatedEqualRevenue)
        return scale_ / std::max(q, 1.0 / h_);
    // v(q) = largest value whose upper-tail probability is >= q; v(0) is the
    // maximum support value.
    if (q == 0.0) return atoms_.front().value;
    double tail = 0.0;
    for (const Atom& a : atoms_) {
        tail += a.prob;
        if (tail >= q) return a.value;
    }
    return atoms_.back().value;  // q <= 1 within rounding of the tail sum
}

double Distribution::cdf(double v) const {
    if (kind_ == Kind::TruncatedEqualRevenue) {
        if (v < scale_) return 0.0;
        if (v >= scale_ * h_) return 1.0;
        return 1.0 - scale_ / v;
    }
    double p = 0.0;
    for (const Atom& a : atoms_)
        if (a.value <= v) p += a.prob;
    return p;
}

double Distribution::mean() const {
    if (kind_ == Kind::TruncatedEqualRevenue)
        return scale_ * (1.0 + std::log(h_));
    double m = 0.0;
    for (const Atom& a : atoms_) m += a.value * a.prob;
    return m;
}

Distribution Distribution::scaled(double a) const {
    if (!(a >= 0.0))
        throw ValidationError("scale factor must be >= 0");
    if (a == 0.0) return degenerate(0.0);
    switch (kind_) {
        case Kind::TruncatedEqualRevenue:
            return truncated_er(a * scale_, h_);
        case Kind::Degenerate:
            return degenerate(a * atoms_.front().value);
        case Kind::Discrete: {
            std::vector<Atom> scaled = atoms_;
            for (Atom& atom : scaled) atom.value *= a;
            return discrete(std::move(scaled));
        }
    }
    throw ValidationError("unreachable distribution kind");
}

std::vector<double> Distribution::tail_breakpoints() const {
    const auto& as = atoms();
    std::vector<double> breaks;
    breaks.reserve(as.size());
    double tail = 0.0;
    for (const Atom& a : as) {
        tail += a.prob;
        breaks.push_back(tail);
    }
    breaks.back() = 1.0;
    return breaks;
}

Instance Instance::make(std::vector<Distribution> buyers, double m, std::vector<double> demands) {
    if (buyers.size() < 2)
        throw ValidationError("instance needs n >= 2 buyers, got " + std::to_string(buyers.size()));
    if (!(m > 0.0))
        throw ValidationError("supply m must be > 0");
    if (demands.size() != buyers.size())
        throw ValidationError("demands length must equal buyer count");
    for (std::size_t i = 0; i < demands.size(); ++i)
        if (!(demands[i] > 0.0))
            throw ValidationError("demands[" + std::to_string(i) + "] must be > 0");
    Instance inst;
    inst.buyers = std::move(buyers);
    inst.m = m;
    inst.demands = std::move(demands);
    return inst;
}

Instance Instance::single_item(std::vector<Distribution> buyers) {
    std::vector<double> demands(buyers.size(), 1.0);
    return make(std::move(buyers), 1.0, std::move(demands));
}

bool Instance::is_single_item() const {
    if (m != 1.0) return false;
    return std::all_of(demands.begin(), demands.end(), [](double d) { return d == 1.0; });
}

bool Instance::all_discrete() const {
    return std::all_of(buyers.begin(), buyers.end(),
                       [](const Distribution& f) { return f.is_discrete(); });
}

Distribution max_distribution(const std::vector<Distribution>& dists) {
    if (dists.empty())
        throw ValidationError("max_distribution needs at least one distribution");
    std::vector<double> support;
    for (const Distribution& f : dists)
        for (const Atom& a : f.atoms()) support.push_back(a.value);
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());

    std::vector<Atom> atoms;
    double prev_cdf = 0.0;
    for (double v : support) {
        double cdf = 1.0;
        for (const Distribution& f : dists) cdf *= f.cdf(v);
        double p = cdf - prev_cdf;
        if (p > 0.0) atoms.push_back({v, p});
        prev_cdf = cdf;
    }
    return Distribution::discrete(std::move(atoms));
}

TruncatedErIid make_truncated_er_iid(int n, double h, double scale) {
    if (n < 2) throw ValidationError("make_truncated_er_iid needs n >= 2");
    std::vector<Distribution> buyers(static_cast<std::size_t>(n),
                                     Distribution::truncated_er(scale, h));
    TruncatedErIid out{Instance::single_item(std::move(buyers)),
                       scale * h * (1.0 - std::pow(1.0 - 1.0 / h, n)),
                       scale * (1.0 + std::log(h))};
    return out;
}

namespace {

int hard_levels(int n) {
    // L = floor(log2(n)/2) - 1, computed in integers: largest t with 4^t <= n.
    int t = 0;
    std::int64_t pow4 = 1;
    while (pow4 * 4 <= n) {
        pow4 *= 4;
        ++t;
    }
    return t - 1;
}

}  // namespace

HardInstance make_hard_instance(HardKind kind, int n, RngStream& stream) {
    const int levels = n >= 2 ? hard_levels(n) : 0;
    if (n < 16 || levels < 1)
        throw ParameterError("make_hard_instance needs n >= 16 so that L >= 1, got n=" +
                             std::to_string(n));
    HardFamily family;
    family.kind = kind;
    family.n = n;
    family.levels = levels;
    family.eps = 1.0 / (4.0 * n);
    family.delta = 1.0 / (std::ldexp(1.0, levels + 1) - 2.0);
    for (int j = 1; j <= levels; ++j) {
        family.weights.push_back(family.delta * std::ldexp(1.0, j));
        if (kind == HardKind::General) {
            const double value = 1.0 / (std::ldexp(1.0, j) * family.eps);
            family.members.push_back(Distribution::discrete(
                {{value, family.eps}, {0.0, 1.0 - family.eps}}));
        } else {
            family.members.push_back(
                Distribution::truncated_er(std::ldexp(1.0, -j), 1.0 / family.eps));
        }
    }

    std::vector<Distribution> buyers;
    buyers.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double u = stream.next_double();
        double acc = 0.0;
        std::size_t pick = family.members.size() - 1;
        for (std::size_t j = 0; j < family.weights.size(); ++j) {
            acc += family.weights[j];
            if (u < acc) {
                pick = j;
                break;
            }
        }
        buyers.push_back(family.members[pick]);
    }
    return HardInstance{Instance::single_item(std::move(buyers)), std::move(family)};
}

Instance random_discrete_instance(int n, int k, double vmax, RngStream& stream) {
    if (n < 2) throw ValidationError("random_discrete_instance needs n >= 2");
    if (k < 1) throw ValidationError("random_discrete_instance needs k >= 1");
    if (!(vmax > 0.0)) throw ValidationError("vmax must be > 0");
    std::vector<Distribution> buyers;
    buyers.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::vector<Atom> atoms(static_cast<std::size_t>(k));
        double total = 0.0;
        for (Atom& a : atoms) {
            a.value = vmax * stream.next_double();
            a.prob = 1e-3 + stream.next_double();  // bounded away from 0
            total += a.prob;
        }
        for (Atom& a : atoms) a.prob /= total;
        buyers.push_back(Distribution::discrete(std::move(atoms)));
    }
    return Instance::single_item(std::move(buyers));
}

}  // namespace peermax
