#include "peermax/json_io.hpp"

#include <cinttypes>
#include <cstdio>

#include "peermax/errors.hpp"

namespace peermax {

namespace {

double get_number(const Json& j, const char* key, const std::string& path) {
    if (!j.contains(key) || !j[key].is_number())
        throw ValidationError(path + "." + key + ": expected a number");
    return j[key].get<double>();
}

std::string csv_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

Json parse_json_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ValidationError(std::string("json parse error: ") + e.what());
    }
}

Distribution parse_distribution(const Json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw ValidationError(path + ": expected an object with a \"kind\" field");
    const std::string kind = j["kind"].get<std::string>();
    try {
        if (kind == "degenerate") return Distribution::degenerate(get_number(j, "value", path));
        if (kind == "truncated_er")
            return Distribution::truncated_er(get_number(j, "scale", path),
                                              get_number(j, "h", path));
        if (kind == "discrete") {
            if (!j.contains("support") || !j["support"].is_array())
                throw ValidationError(path + ".support: expected an array");
            std::vector<Atom> atoms;
            std::size_t idx = 0;
            for (const Json& a : j["support"]) {
                const std::string apath = path + ".support[" + std::to_string(idx++) + "]";
                atoms.push_back({get_number(a, "value", apath), get_number(a, "prob", apath)});
            }
            return Distribution::discrete(std::move(atoms));
        }
    } catch (const ValidationError& e) {
        // Re-anchor constructor messages at this field.
        const std::string what = e.what();
        if (what.rfind(path, 0) == 0) throw;
        throw ValidationError(path + ": " + what);
    }
    throw ValidationError(path + ".kind: unknown kind \"" + kind + "\"");
}

Json distribution_to_json(const Distribution& dist) {
    switch (dist.kind()) {
        case Distribution::Kind::Degenerate:
            return Json{{"kind", "degenerate"}, {"value", dist.degenerate_value()}};
        case Distribution::Kind::TruncatedEqualRevenue:
            return Json{{"kind", "truncated_er"}, {"scale", dist.er_scale()}, {"h", dist.er_h()}};
        case Distribution::Kind::Discrete: {
            Json support = Json::array();
            for (const Atom& a : dist.atoms())
                support.push_back(Json{{"value", a.value}, {"prob", a.prob}});
            return Json{{"kind", "discrete"}, {"support", std::move(support)}};
        }
    }
    throw ValidationError("unreachable distribution kind");
}

Instance parse_instance(const Json& j) {
    if (!j.is_object()) throw ValidationError("instance: expected an object");
    if (!j.contains("buyers") || !j["buyers"].is_array())
        throw ValidationError("instance.buyers: expected an array");
    std::vector<Distribution> buyers;
    std::size_t idx = 0;
    for (const Json& b : j["buyers"])
        buyers.push_back(parse_distribution(b, "buyers[" + std::to_string(idx++) + "]"));

    double m = 1.0;
    if (j.contains("m")) m = get_number(j, "m", "instance");
    std::vector<double> demands(buyers.size(), 1.0);
    if (j.contains("demands")) {
        if (!j["demands"].is_array())
            throw ValidationError("instance.demands: expected an array");
        demands.clear();
        for (const Json& d : j["demands"]) {
            if (!d.is_number())
                throw ValidationError("instance.demands[" + std::to_string(demands.size()) +
                                      "]: expected a number");
            demands.push_back(d.get<double>());
        }
    }
    return Instance::make(std::move(buyers), m, std::move(demands));
}

Json instance_to_json(const Instance& instance) {
    Json buyers = Json::array();
    for (const Distribution& f : instance.buyers) buyers.push_back(distribution_to_json(f));
    return Json{{"m", instance.m}, {"demands", instance.demands}, {"buyers", std::move(buyers)}};
}

MechanismConfig parse_mechanism(const Json& j) {
    if (!j.is_object() || !j.contains("mech") || !j["mech"].is_string())
        throw ValidationError("mechanism: expected an object with a \"mech\" field");
    const std::string mech = j["mech"].get<std::string>();
    MechanismConfig config;
    if (mech == "tam") {
        config.type = MechanismConfig::Type::Tam;
        std::string base = "spa";
        if (j.contains("base")) {
            if (!j["base"].is_string())
                throw ValidationError("mechanism.base: expected \"spa\" or \"vcg\"");
            base = j["base"].get<std::string>();
        }
        if (base == "spa")
            config.base = BaseModel::SingleItemSpa;
        else if (base == "vcg")
            config.base = BaseModel::MultiUnitVcg;
        else
            throw ValidationError("mechanism.base: expected \"spa\" or \"vcg\", got \"" + base +
                                  "\"");
        if (!j.contains("thresholds") || !j["thresholds"].is_array())
            throw ValidationError("mechanism.thresholds: expected an array");
        for (const Json& t : j["thresholds"]) {
            if (!t.is_number())
                throw ValidationError("mechanism.thresholds: expected numbers");
            config.thresholds.push_back(t.get<double>());
        }
        return config;
    }
    if (mech == "peer_max" || mech == "peer_welfare") {
        config.type = mech == "peer_max" ? MechanismConfig::Type::PeerMax
                                         : MechanismConfig::Type::PeerWelfare;
        if (j.contains("k")) {
            if (!j["k"].is_number_integer())
                throw ValidationError("mechanism.k: expected an integer");
            config.k = j["k"].get<int>();
        }
        if (config.k < 1) throw ValidationError("mechanism.k: must be >= 1");
        return config;
    }
    if (mech == "iid_tam") {
        config.type = MechanismConfig::Type::IidTam;
        return config;
    }
    throw ValidationError("mechanism.mech: unknown mechanism \"" + mech + "\"");
}

Json mechanism_to_json(const MechanismConfig& config) {
    switch (config.type) {
        case MechanismConfig::Type::Tam:
            return Json{{"mech", "tam"},
                        {"base", config.base == BaseModel::SingleItemSpa ? "spa" : "vcg"},
                        {"thresholds", config.thresholds}};
        case MechanismConfig::Type::PeerMax:
            return Json{{"mech", "peer_max"}, {"k", config.k}};
        case MechanismConfig::Type::PeerWelfare:
            return Json{{"mech", "peer_welfare"}, {"k", config.k}};
        case MechanismConfig::Type::IidTam:
            return Json{{"mech", "iid_tam"}};
    }
    throw ValidationError("unreachable mechanism type");
}

Json stats_to_json(const PerBuyerStats& stats) {
    Json j{{"w", stats.w},
           {"s", stats.s},
           {"r", stats.r},
           {"wel", stats.wel},
           {"base_rev", stats.base_rev}};
    if (stats.stderrs) {
        j["stderr"] = Json{{"w", stats.stderrs->w},
                           {"s", stats.stderrs->s},
                           {"r", stats.stderrs->r},
                           {"wel", stats.stderrs->wel},
                           {"base_rev", stats.stderrs->base_rev}};
    }
    return j;
}

Json tam_report_to_json(const TamReport& report) {
    Json j{{"u_base", report.u_base},
           {"thresholds", report.thresholds},
           {"participates", report.participates},
           {"p", report.p},
           {"revenue", report.revenue}};
    if (report.true_utility) j["true_utility"] = *report.true_utility;
    return j;
}

Json peer_revenue_to_json(const PeerRevenue& result) {
    Json curve = Json::array();
    for (const auto& [alpha, rev] : result.per_alpha)
        curve.push_back(Json{{"alpha", alpha}, {"rev", rev}});
    curve.push_back(Json{{"alpha", result.grid.high_atom}, {"rev", result.rev_high}});
    return Json{{"revenue", result.revenue},
                {"k", result.grid.k},
                {"l", result.grid.l},
                {"per_alpha", std::move(curve)},
                {"stats", stats_to_json(result.stats)}};
}

Json iid_result_to_json(const IidTamResult& result) {
    return Json{{"revenue", result.revenue},
                {"thresholds", result.thresholds},
                {"participates", result.participates},
                {"stats", stats_to_json(result.stats)}};
}

Json ic_audit_to_json(const IcAuditResult& result) {
    return Json{{"max_regret", result.max_regret},
                {"cases", result.cases},
                {"witness", Json{{"true_profile", result.witness.true_profile},
                                 {"buyer", result.witness.buyer},
                                 {"deviation", result.witness.deviation}}}};
}

Json sweep_to_json(const SweepResult& result) {
    Json rows = Json::array();
    for (const GuaranteeReport& r : result.reports) {
        rows.push_back(Json{{"id", r.instance_id},
                            {"n", r.n},
                            {"wel", r.wel},
                            {"base_rev", r.base_rev},
                            {"bound", r.bound},
                            {"revenue", r.revenue},
                            {"margin", r.margin},
                            {"satisfied", r.satisfied}});
    }
    return Json{{"reports", std::move(rows)},
                {"summary", Json{{"count", result.summary.count},
                                 {"violations", result.summary.violations},
                                 {"min_margin", result.summary.min_margin}}}};
}

Json posted_price_to_json(const PostedPriceCap& result) {
    return Json{{"cap", result.cap}, {"bound", result.bound}, {"ok", result.ok}};
}

Json concentration_to_json(const ConcentrationResult& result) {
    return Json{{"frequency", result.frequency}, {"lcb99", result.lcb99},
                {"hits", result.hits},           {"trials", result.trials},
                {"threshold", result.threshold}};
}

Json upper_bound_to_json(const UpperBoundResult& result) {
    return Json{{"mean_rev", result.mean_rev},
                {"stderr", result.stderr_rev},
                {"ceiling", result.ceiling},
                {"ok", result.ok},
                {"trials", result.trials}};
}

std::string sweep_to_csv(const SweepResult& result) {
    std::string out = "id,n,wel,base_rev,bound,revenue,margin,satisfied\n";
    for (const GuaranteeReport& r : result.reports) {
        out += std::to_string(r.instance_id) + "," + std::to_string(r.n) + "," +
               csv_double(r.wel) + "," + csv_double(r.base_rev) + "," + csv_double(r.bound) +
               "," + csv_double(r.revenue) + "," + csv_double(r.margin) + "," +
               (r.satisfied ? "1" : "0") + "\n";
    }
    return out;
}

std::string per_alpha_csv(const PeerRevenue& result) {
    std::string out = "alpha,rev\n";
    for (const auto& [alpha, rev] : result.per_alpha)
        out += csv_double(alpha) + "," + csv_double(rev) + "\n";
    out += csv_double(result.grid.high_atom) + "," + csv_double(result.rev_high) + "\n";
    return out;
}

std::string instance_hash(const Instance& instance) {
    const std::string text = instance_to_json(instance).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a:%016" PRIx64, h);
    return buf;
}

}  // namespace peermax
