#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace masq {

/// Signing observations for one file, ingested as metadata.
struct SignatureFacts {
  bool is_signed = false;
  bool verify_ok = false;
  bool chain_trusted = false;
  bool within_validity = false;
  bool revoked = false;
  bool stolen = false;  // external intel designation
  std::optional<std::string> signer;
  std::vector<std::string> cert_ids;  // thumbprints / serials, hex text
  bool x509_present = false;

  friend bool operator==(const SignatureFacts&, const SignatureFacts&) = default;
};

/// The nine code-signing states, one per file.
enum class SignatureState : std::uint8_t {
  SignedVerified,
  SignedNotVerified,
  SignedRevoked,
  SignedStolenOrRevoked,
  SignedMalwareSigningCert,
  SignedNotInValidityPeriod,
  SignedNoTrustedRoot,
  UnsignedContainsX509,
  UnsignedNoSignature,
};

inline constexpr std::array<SignatureState, 9> kAllSignatureStates = {
    SignatureState::SignedVerified,           SignatureState::SignedNotVerified,
    SignatureState::SignedRevoked,            SignatureState::SignedStolenOrRevoked,
    SignatureState::SignedMalwareSigningCert, SignatureState::SignedNotInValidityPeriod,
    SignatureState::SignedNoTrustedRoot,      SignatureState::UnsignedContainsX509,
    SignatureState::UnsignedNoSignature,
};

/// Stable identifier, e.g. "SignedVerified".
std::string_view to_string(SignatureState s) noexcept;
/// Human label, e.g. "signed: certificate revoked".
std::string_view describe(SignatureState s) noexcept;
std::optional<SignatureState> signature_state_from_string(std::string_view name) noexcept;

inline bool is_unsigned(SignatureState s) noexcept {
  return s == SignatureState::UnsignedContainsX509 || s == SignatureState::UnsignedNoSignature;
}

struct Blocklist {
  std::set<std::string> malware_cert_ids;
  std::set<std::string> stolen_cert_ids;

  bool empty() const noexcept { return malware_cert_ids.empty() && stolen_cert_ids.empty(); }
};

class BlocklistError : public std::runtime_error {
 public:
  BlocklistError(std::size_t line, const std::string& what)
      : std::runtime_error("blocklist line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Lower-case hex with ':', '-' and whitespace removed. Returns nullopt when
/// the result is empty or contains a non-hex character.
std::optional<std::string> normalize_cert_id(std::string_view raw);

/// Parses `malware:<hex>` / `stolen:<hex>` lines; '#' starts a comment line.
/// Throws BlocklistError carrying the 1-based line number.
Blocklist load_blocklist(std::string_view text);

SignatureState classify_signature(const SignatureFacts& facts, const Blocklist& bl);

/// True when the bytes hold something shaped like a DER certificate: a
/// SEQUENCE header `30 82 <len16>` with 256 <= len16 <= 16383 whose content
/// fits in the buffer, followed within 8 bytes by another `30 82` header.
bool detect_x509_remnant(std::span<const std::uint8_t> data) noexcept;

}  // namespace masq
