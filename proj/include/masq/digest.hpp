#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace masq {

/// Number of two-bit bucket codes carried by a T1 digest.
inline constexpr std::size_t kBucketCount = 128;
/// Length of the canonical text form: "T1" + 70 hex characters.
inline constexpr std::size_t kDigestTextLength = 72;
inline constexpr std::size_t kMinDigestInput = 50;

enum class DigestErrc {
  TooShort,
  InsufficientComplexity,
  BadLength,
  BadPrefix,
  NonHexCharacter,
  VersionMismatch,
};

std::string_view to_string(DigestErrc code) noexcept;

class DigestError : public std::runtime_error {
 public:
  DigestError(DigestErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  DigestErrc code() const noexcept { return code_; }

 private:
  DigestErrc code_;
};

/// Decoded TLSH-compatible similarity digest (128 buckets, 1-byte checksum).
///
/// `body[i]` is the quartile code of bucket i, in bucket order (not the
/// reversed order used by the text form).
struct Digest {
  std::uint8_t version = 1;
  std::uint8_t checksum = 0;
  std::uint8_t lvalue = 0;
  std::uint8_t q1ratio = 0;  // 0..15
  std::uint8_t q2ratio = 0;  // 0..15
  std::array<std::uint8_t, kBucketCount> body{};  // each 0..3

  friend bool operator==(const Digest&, const Digest&) = default;
};

/// Whether the length (lvalue) component participates in `distance`.
enum class LengthTerm : bool { Exclude = false, Include = true };

/// Throws DigestError{TooShort | InsufficientComplexity}.
Digest compute_digest(std::span<const std::uint8_t> data);

/// Accepts upper- or lower-case hex. Throws DigestError{BadLength |
/// BadPrefix | NonHexCharacter}.
Digest parse_digest(std::string_view text);

/// Canonical upper-case 72-character form.
std::string format_digest(const Digest& d);

/// TLSH distance score. Throws DigestError{VersionMismatch} when the
/// version tags differ.
int distance(const Digest& a, const Digest& b,
             LengthTerm length = LengthTerm::Include);

/// Upper bound on the body term (128 buckets, at most 6 each).
inline constexpr int kMaxBodyDistance = 6 * static_cast<int>(kBucketCount);

namespace detail {

/// Logarithmic length capture used for `Digest::lvalue`.
std::uint8_t length_capture(std::uint64_t length) noexcept;

/// Circular difference on a ring of size `range`.
constexpr int ring_diff(int x, int y, int range) noexcept {
  const int d = x > y ? x - y : y - x;
  return d < range - d ? d : range - d;
}

}  // namespace detail
}  // namespace masq
