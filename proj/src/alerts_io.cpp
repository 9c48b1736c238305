#include "masq/pipeline.hpp"

namespace masq {

using nlohmann::json;

json alert_to_json(const Alert& a) {
  return {
      {"v", kAlertVersion},
      {"alert_kind", std::string(to_string(a.alert_kind))},
      {"masquerade_kind", std::string(to_string(a.masquerade_kind))},
      {"subject", a.subject},
      {"cluster_id", a.cluster_id},
      {"distance", a.distance ? json(*a.distance) : json(nullptr)},
      {"expected_signer", a.expected_signer ? json(*a.expected_signer) : json(nullptr)},
      {"observed_state", std::string(to_string(a.observed_state))},
      {"reasoning", a.reasoning},
  };
}

Alert alert_from_json(const json& j) {
  auto bad = [](const std::string& what) {
    return PipelineError(PipelineErrc::SchemaViolation, what);
  };
  try {
    if (j.at("v").get<int>() != kAlertVersion) throw bad("unsupported alert version");
    Alert a;
    const auto kind = alert_kind_from_string(j.at("alert_kind").get<std::string>());
    const auto masq = masquerade_kind_from_string(j.at("masquerade_kind").get<std::string>());
    const auto state = signature_state_from_string(j.at("observed_state").get<std::string>());
    if (!kind || !masq || !state) throw bad("unknown enumeration value in alert");
    a.alert_kind = *kind;
    a.masquerade_kind = *masq;
    a.observed_state = *state;
    a.subject = j.at("subject").get<std::string>();
    a.cluster_id = j.at("cluster_id").get<int>();
    if (!j.at("distance").is_null()) a.distance = j.at("distance").get<int>();
    if (!j.at("expected_signer").is_null()) {
      a.expected_signer = j.at("expected_signer").get<std::string>();
    }
    a.reasoning = j.at("reasoning").get<std::string>();
    return a;
  } catch (const json::exception& e) {
    throw bad(std::string("malformed alert: ") + e.what());
  }
}

std::string alerts_text(const std::vector<Alert>& alerts) {
  std::string out;
  for (const auto& a : alerts) {
    out += alert_to_json(a).dump(-1, ' ', false, json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

std::vector<Alert> parse_alerts(std::string_view text) {
  std::vector<Alert> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    try {
      out.push_back(alert_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw PipelineError(PipelineErrc::SchemaViolation, e.what(), line_no);
    } catch (const PipelineError& e) {
      throw PipelineError(e.code(), e.detail(), line_no);
    }
  }
  return out;
}

}  // namespace masq
