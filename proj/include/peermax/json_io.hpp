#pragma once

#include <string>

#include <json.hpp>

#include "peermax/mechanism.hpp"
#include "peermax/verify.hpp"

namespace peermax {

using Json = nlohmann::json;

/// Throws ValidationError (with the nlohmann location message) on bad syntax.
Json parse_json_text(const std::string& text);

/// {"kind":"discrete","support":[{"value":..,"prob":..},..]} |
/// {"kind":"degenerate","value":..} | {"kind":"truncated_er","scale":..,"h":..}
Distribution parse_distribution(const Json& j, const std::string& path);
Json distribution_to_json(const Distribution& dist);

/// {"m":..,"demands":[..],"buyers":[..]}
Instance parse_instance(const Json& j);
Json instance_to_json(const Instance& instance);

/// {"mech":"tam","base":"spa","thresholds":[..]} | {"mech":"peer_max","k":..}
/// | {"mech":"peer_welfare","k":..} | {"mech":"iid_tam"}
MechanismConfig parse_mechanism(const Json& j);
Json mechanism_to_json(const MechanismConfig& config);

Json stats_to_json(const PerBuyerStats& stats);
Json tam_report_to_json(const TamReport& report);
Json peer_revenue_to_json(const PeerRevenue& result);
Json iid_result_to_json(const IidTamResult& result);
Json ic_audit_to_json(const IcAuditResult& result);
Json sweep_to_json(const SweepResult& result);
Json posted_price_to_json(const PostedPriceCap& result);
Json concentration_to_json(const ConcentrationResult& result);
Json upper_bound_to_json(const UpperBoundResult& result);

/// One row per instance: id,n,wel,base_rev,bound,revenue,margin,satisfied.
std::string sweep_to_csv(const SweepResult& result);
/// Revenue-vs-alpha curve rows: alpha,rev (grid rows, then the high atom).
std::string per_alpha_csv(const PeerRevenue& result);

/// FNV-1a over the canonical JSON encoding; reports echo it for re-runs.
std::string instance_hash(const Instance& instance);

}  // namespace peermax
