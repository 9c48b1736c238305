#include <algorithm>
#include <array>

#include "masq/pipeline.hpp"

namespace masq {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 16> kManifestKeys = {
    "v",         "sha256",      "filename",        "tlsh",    "path",   "signer",
    "is_signed", "verify_ok",   "chain_trusted",   "within_validity",   "revoked",
    "stolen",    "x509_present", "cert_ids",       "reputation",        "source"};

[[noreturn]] void schema(const std::string& what) {
  throw PipelineError(PipelineErrc::SchemaViolation, what);
}

const json& require(const json& j, std::string_view key) {
  const auto it = j.find(key);
  if (it == j.end()) schema("missing field '" + std::string(key) + "'");
  return *it;
}

std::string require_string(const json& j, std::string_view key) {
  const auto& v = require(j, key);
  if (!v.is_string()) schema("field '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

bool require_bool(const json& j, std::string_view key) {
  const auto& v = require(j, key);
  if (!v.is_boolean()) schema("field '" + std::string(key) + "' must be a boolean");
  return v.get<bool>();
}

std::optional<std::string> optional_string(const json& j, std::string_view key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) schema("field '" + std::string(key) + "' must be a string or null");
  return it->get<std::string>();
}

ManifestEntry entry_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) schema("manifest line must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(kManifestKeys.begin(), kManifestKeys.end(), key) == kManifestKeys.end()) {
      schema("unknown field '" + key + "'");
    }
  }
  const auto& v = require(j, "v");
  if (!v.is_number_integer() || v.get<int>() != kManifestVersion) {
    schema("unsupported manifest version " + v.dump());
  }

  const bool has_tlsh = j.contains("tlsh");
  const bool has_path = j.contains("path");
  if (has_tlsh == has_path) schema("exactly one of 'tlsh' or 'path' is required");

  ManifestEntry entry;
  FileRecord& r = entry.record;
  r.filename = require_string(j, "filename");
  r.source = optional_string(j, "source").value_or("");

  const auto rep = reputation_from_string(require_string(j, "reputation"));
  if (!rep) schema("reputation must be legitimate, malicious or unknown");
  r.reputation = *rep;

  SignatureFacts& f = r.sig_facts;
  f.is_signed = require_bool(j, "is_signed");
  f.verify_ok = require_bool(j, "verify_ok");
  f.chain_trusted = require_bool(j, "chain_trusted");
  f.within_validity = require_bool(j, "within_validity");
  f.revoked = require_bool(j, "revoked");
  f.stolen = require_bool(j, "stolen");
  if (!f.is_signed && f.verify_ok) schema("verify_ok requires is_signed");
  f.signer = optional_string(j, "signer");
  if (const auto it = j.find("cert_ids"); it != j.end()) {
    if (!it->is_array()) schema("cert_ids must be an array");
    for (const auto& id : *it) {
      if (!id.is_string() || !normalize_cert_id(id.get<std::string>())) {
        schema("cert_ids entries must be non-empty hex strings");
      }
      f.cert_ids.push_back(id.get<std::string>());
    }
  }
  std::optional<bool> x509;
  if (const auto it = j.find("x509_present"); it != j.end()) {
    if (!it->is_boolean()) schema("field 'x509_present' must be a boolean");
    x509 = it->get<bool>();
  }

  std::optional<std::string> sha = optional_string(j, "sha256");
  if (has_tlsh) {
    if (!sha) schema("missing field 'sha256'");
    try {
      r.digest = parse_digest(require_string(j, "tlsh"));
    } catch (const DigestError& e) {
      throw PipelineError(PipelineErrc::DigestError, e.what());
    }
    f.x509_present = x509.value_or(false);
  } else {
    std::filesystem::path p = require_string(j, "path");
    if (p.is_relative()) p = base_dir / p;
    const auto bytes = read_bytes(p);
    try {
      r.digest = compute_digest(bytes);
    } catch (const DigestError& e) {
      throw PipelineError(PipelineErrc::DigestError, p.string() + ": " + e.what());
    }
    const auto actual = sha256_hex(bytes);
    if (sha && *sha != actual) schema("sha256 does not match contents of " + p.string());
    sha = actual;
    f.x509_present = x509.value_or(detect_x509_remnant(bytes));
    entry.path = std::move(p);
  }
  if (!is_valid_sha256(*sha)) schema("sha256 must be 64 lower-case hex characters");
  r.sha256 = std::move(*sha);
  return entry;
}

}  // namespace

json record_to_json(const FileRecord& r) {
  const auto& f = r.sig_facts;
  json j = {
      {"v", kManifestVersion},
      {"sha256", r.sha256},
      {"filename", r.filename},
      {"tlsh", format_digest(r.digest)},
      {"signer", f.signer ? json(*f.signer) : json(nullptr)},
      {"is_signed", f.is_signed},
      {"verify_ok", f.verify_ok},
      {"chain_trusted", f.chain_trusted},
      {"within_validity", f.within_validity},
      {"revoked", f.revoked},
      {"stolen", f.stolen},
      {"x509_present", f.x509_present},
      {"cert_ids", f.cert_ids},
      {"reputation", std::string(to_string(r.reputation))},
      {"source", r.source},
  };
  return j;
}

FileRecord record_from_json(const json& j, const std::filesystem::path& base_dir) {
  return entry_from_json(j, base_dir).record;
}

ManifestEntry parse_manifest_entry(std::string_view line, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw PipelineError(PipelineErrc::SchemaViolation, std::string("invalid JSON: ") + e.what());
  }
  return entry_from_json(j, base_dir);
}

FileRecord parse_manifest_line(std::string_view line, const std::filesystem::path& base_dir) {
  return parse_manifest_entry(line, base_dir).record;
}

std::vector<ManifestEntry> ingest_manifest_entries(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const auto base_dir = path.parent_path();
  std::vector<ManifestEntry> out;
  std::size_t line_no = 0;
  std::string_view rest = text;
  while (!rest.empty()) {
    ++line_no;
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      out.push_back(parse_manifest_entry(line, base_dir));
    } catch (const PipelineError& e) {
      throw PipelineError(e.code(), e.detail(), line_no);
    }
  }
  return out;
}

std::vector<FileRecord> ingest_manifest(const std::filesystem::path& path) {
  std::vector<FileRecord> out;
  for (auto& e : ingest_manifest_entries(path)) out.push_back(std::move(e.record));
  return out;
}

std::string manifest_text(const std::vector<FileRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json(r).dump(-1, ' ', false, json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

}  // namespace masq
