#include <array>

#include "masq/pipeline.hpp"

namespace masq {
namespace {

constexpr std::array<std::uint8_t, 256> make_marker() {
  std::array<std::uint8_t, 256> m{};
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = static_cast<std::uint8_t>((k * 167 + 13) & 0xFF);
  return m;
}

constexpr std::array<std::uint8_t, 256> kMarker = make_marker();

// Metadata-only forgeries keep the digest, so they get a derived identifier.
std::string derived_sha256(const FileRecord& r, ForgeMode mode) {
  const std::string seed = r.sha256 + ":" + std::string(to_string(mode));
  return sha256_hex({reinterpret_cast<const std::uint8_t*>(seed.data()), seed.size()});
}

}  // namespace

std::string_view to_string(ForgeMode m) noexcept {
  switch (m) {
    case ForgeMode::StripSignature: return "strip_signature";
    case ForgeMode::CorruptBody: return "corrupt_body";
    case ForgeMode::X509Remnant: return "x509_remnant";
  }
  return "unknown";
}

std::optional<ForgeMode> forge_mode_from_string(std::string_view s) noexcept {
  for (const auto m : {ForgeMode::StripSignature, ForgeMode::CorruptBody, ForgeMode::X509Remnant}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

std::span<const std::uint8_t, 256> forge_marker() noexcept { return kMarker; }

std::vector<std::uint8_t> corrupt_body(std::span<const std::uint8_t> raw) {
  const std::size_t offset = raw.size() / 4;
  std::vector<std::uint8_t> out;
  out.reserve(raw.size() + kMarker.size());
  out.insert(out.end(), raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(offset));
  out.insert(out.end(), kMarker.begin(), kMarker.end());
  out.insert(out.end(), raw.begin() + static_cast<std::ptrdiff_t>(offset), raw.end());
  return out;
}

FileRecord forge_masquerade(const FileRecord& record, ForgeMode mode,
                            std::optional<std::span<const std::uint8_t>> raw) {
  FileRecord out = record;
  SignatureFacts& f = out.sig_facts;
  switch (mode) {
    case ForgeMode::StripSignature:
      f = SignatureFacts{};
      out.sha256 = derived_sha256(record, mode);
      break;

    case ForgeMode::X509Remnant:
      // The certificate blob (signer, ids) survives; the signature does not.
      f.is_signed = false;
      f.verify_ok = false;
      f.chain_trusted = false;
      f.within_validity = false;
      f.revoked = false;
      f.stolen = false;
      f.x509_present = true;
      out.sha256 = derived_sha256(record, mode);
      break;

    case ForgeMode::CorruptBody: {
      if (!raw) {
        throw PipelineError(PipelineErrc::MissingRawBytes,
                            "corrupt_body needs the original bytes of " + record.filename);
      }
      const auto bytes = corrupt_body(*raw);
      try {
        out.digest = compute_digest(bytes);
      } catch (const DigestError& e) {
        throw PipelineError(PipelineErrc::DigestError, e.what());
      }
      out.sha256 = sha256_hex(bytes);
      f.verify_ok = false;
      break;
    }
  }
  out.reputation = Reputation::Malicious;
  out.source += (out.source.empty() ? "" : " ") + std::string("forged:") + std::string(to_string(mode));
  return out;
}

}  // namespace masq
