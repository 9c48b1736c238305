#include "masq/sigstate.hpp"

#include <algorithm>
#include <cctype>

namespace masq {
namespace {

struct StateName {
  SignatureState state;
  std::string_view id;
  std::string_view label;
};

constexpr std::array<StateName, 9> kStateNames = {{
    {SignatureState::SignedVerified, "SignedVerified", "signed: verified"},
    {SignatureState::SignedNotVerified, "SignedNotVerified", "signed: not verified"},
    {SignatureState::SignedRevoked, "SignedRevoked", "signed: certificate revoked"},
    {SignatureState::SignedStolenOrRevoked, "SignedStolenOrRevoked",
     "signed: using stolen or revoked certificates"},
    {SignatureState::SignedMalwareSigningCert, "SignedMalwareSigningCert",
     "signed: certificate used for digitally signing malware"},
    {SignatureState::SignedNotInValidityPeriod, "SignedNotInValidityPeriod",
     "signed: certificate not in validity period"},
    {SignatureState::SignedNoTrustedRoot, "SignedNoTrustedRoot",
     "signed: certificate chain could not be built to a trusted root authority"},
    {SignatureState::UnsignedContainsX509, "UnsignedContainsX509",
     "not signed: contains x509 certificate"},
    {SignatureState::UnsignedNoSignature, "UnsignedNoSignature", "not signed: no signature"},
}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool listed(const std::vector<std::string>& ids, const std::set<std::string>& set) {
  if (set.empty()) return false;
  return std::any_of(ids.begin(), ids.end(), [&](const std::string& raw) {
    const auto id = normalize_cert_id(raw);
    return id && set.contains(*id);
  });
}

}  // namespace

std::string_view to_string(SignatureState s) noexcept {
  return kStateNames[static_cast<std::size_t>(s)].id;
}

std::string_view describe(SignatureState s) noexcept {
  return kStateNames[static_cast<std::size_t>(s)].label;
}

std::optional<SignatureState> signature_state_from_string(std::string_view name) noexcept {
  for (const auto& entry : kStateNames) {
    if (entry.id == name) return entry.state;
  }
  return std::nullopt;
}

std::optional<std::string> normalize_cert_id(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (const char c : raw) {
    if (c == ':' || c == '-' || std::isspace(static_cast<unsigned char>(c))) continue;
    if (!std::isxdigit(static_cast<unsigned char>(c))) return std::nullopt;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (out.empty()) return std::nullopt;
  return out;
}

Blocklist load_blocklist(std::string_view text) {
  Blocklist bl;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw BlocklistError(line_no, "missing prefix");
    const auto prefix = trim(line.substr(0, colon));
    std::set<std::string>* target = nullptr;
    if (prefix == "malware") {
      target = &bl.malware_cert_ids;
    } else if (prefix == "stolen") {
      target = &bl.stolen_cert_ids;
    } else {
      throw BlocklistError(line_no, "unknown prefix '" + std::string(prefix) + "'");
    }
    auto id = normalize_cert_id(line.substr(colon + 1));
    if (!id) throw BlocklistError(line_no, "identifier is not hex");
    target->insert(std::move(*id));
  }
  return bl;
}

// First matching rule wins; intel-driven states outrank mechanical failures.
SignatureState classify_signature(const SignatureFacts& facts, const Blocklist& bl) {
  if (!facts.is_signed) {
    return facts.x509_present ? SignatureState::UnsignedContainsX509
                              : SignatureState::UnsignedNoSignature;
  }
  if (facts.stolen || listed(facts.cert_ids, bl.stolen_cert_ids)) {
    return SignatureState::SignedStolenOrRevoked;
  }
  if (listed(facts.cert_ids, bl.malware_cert_ids)) return SignatureState::SignedMalwareSigningCert;
  if (facts.revoked) return SignatureState::SignedRevoked;
  if (!facts.chain_trusted) return SignatureState::SignedNoTrustedRoot;
  if (!facts.within_validity) return SignatureState::SignedNotInValidityPeriod;
  if (!facts.verify_ok) return SignatureState::SignedNotVerified;
  return SignatureState::SignedVerified;
}

bool detect_x509_remnant(std::span<const std::uint8_t> data) noexcept {
  constexpr std::size_t kHeader = 4;
  constexpr std::size_t kInnerWindow = 8;
  for (std::size_t i = 0; i + kHeader <= data.size(); ++i) {
    if (data[i] != 0x30 || data[i + 1] != 0x82) continue;
    const std::size_t len = std::size_t{data[i + 2]} << 8 | data[i + 3];
    if (len < 256 || len > 16383 || i + kHeader + len > data.size()) continue;
    const std::size_t first = i + kHeader;
    const std::size_t last = std::min(first + kInnerWindow, data.size() - 1);
    for (std::size_t j = first; j < last; ++j) {
      if (data[j] == 0x30 && data[j + 1] == 0x82) return true;
    }
  }
  return false;
}

}  // namespace masq
