#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "obswin/kfun.hpp"
#include "obswin/observability.hpp"
#include "obswin/system.hpp"
#include "obswin/window.hpp"

namespace obswin {

/// Bumped whenever a published schema under docs/schemas changes shape.
inline constexpr const char* kSchemaVersion = "1";

using Json = nlohmann::json;

/// Deterministic text form: keys sorted, two-space indent, floats with 17
/// significant digits, non-finite floats as null. Ends with a newline.
std::string canonical_dump(const Json& value);

Json to_json(const Vector& v);
Json to_json(const SystemSpec& spec);
Json to_json(const std::vector<SystemWarning>& warnings);
Json to_json(const RankReport& report);
Json to_json(const DistinguishResult& result);
Json to_json(const WindowReport& report);
Json to_json(const Alpha0Table& table);
Json to_json(const KFunction& k);
Json to_json(const std::vector<CertificateCheck>& checks);

/// r,T_hat,n_pairs,n_undistinguished,n_truncated,lower_bound
std::string window_curve_csv(const WindowReport& report);
/// r,alpha,certified
std::string k_anchors_csv(const KFunction& k);
/// r,beta,status,evaluations
std::string alpha0_csv(const Alpha0Table& table);

/// %.17g, the float format used by every artifact.
std::string format_double(double v);

}  // namespace obswin
