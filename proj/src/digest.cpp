#include "masq/digest.hpp"

#include <algorithm>
#include <cstdlib>

namespace masq {
namespace {

// Pearson permutation shared with the reference digest.
constexpr std::array<std::uint8_t, 256> kPearson = {
    1,   87,  49,  12,  176, 178, 102, 166, 121, 193, 6,   84,  249, 230, 44,  163,
    14,  197, 213, 181, 161, 85,  218, 80,  64,  239, 24,  226, 236, 142, 38,  200,
    110, 177, 104, 103, 141, 253, 255, 50,  77,  101, 81,  18,  45,  96,  31,  222,
    25,  107, 190, 70,  86,  237, 240, 34,  72,  242, 20,  214, 244, 227, 149, 235,
    97,  234, 57,  22,  60,  250, 82,  175, 208, 5,   127, 199, 111, 62,  135, 248,
    174, 169, 211, 58,  66,  154, 106, 195, 245, 171, 17,  187, 182, 179, 0,   243,
    132, 56,  148, 75,  128, 133, 158, 100, 130, 126, 91,  13,  153, 246, 216, 219,
    119, 68,  223, 78,  83,  88,  201, 99,  122, 11,  92,  32,  136, 114, 52,  10,
    138, 30,  48,  183, 156, 35,  61,  26,  143, 74,  251, 94,  129, 162, 63,  152,
    170, 7,   115, 167, 241, 206, 3,   150, 55,  59,  151, 220, 90,  53,  23,  131,
    125, 173, 15,  238, 79,  95,  89,  16,  105, 137, 225, 224, 217, 160, 37,  123,
    118, 73,  2,   157, 46,  116, 9,   145, 134, 228, 207, 212, 202, 215, 69,  229,
    27,  188, 67,  124, 168, 252, 42,  4,   29,  108, 21,  247, 19,  205, 39,  203,
    233, 40,  186, 147, 198, 192, 155, 33,  164, 191, 98,  204, 165, 180, 117, 76,
    140, 36,  210, 172, 41,  54,  159, 8,   185, 232, 113, 196, 231, 47,  146, 120,
    51,  65,  28,  144, 254, 221, 93,  189, 194, 139, 112, 43,  71,  109, 184, 209,
};

// Upper edge of each length-capture step.
constexpr std::array<std::uint32_t, 170> kLengthSteps = {
    1, 2, 3, 5, 7, 11, 17,
    25, 38, 57, 86, 129, 194, 291,
    437, 656, 854, 1110, 1443, 1876, 2439,
    3171, 3475, 3823, 4205, 4626, 5088, 5597,
    6157, 6772, 7450, 8195, 9014, 9916, 10907,
    11998, 13198, 14518, 15970, 17567, 19323, 21256,
    23382, 25720, 28292, 31121, 34233, 37656, 41422,
    45564, 50121, 55133, 60646, 66711, 73382, 80721,
    88793, 97672, 107439, 118183, 130002, 143002, 157302,
    173032, 190335, 209369, 230306, 253337, 278670, 306538,
    337191, 370911, 408002, 448802, 493682, 543050, 597356,
    657091, 722800, 795081, 874589, 962048, 1058252, 1164078,
    1280486, 1408534, 1549388, 1704327, 1874759, 2062236, 2268459,
    2495305, 2744836, 3019320, 3321252, 3653374, 4018711, 4420582,
    4862641, 5348905, 5883796, 6472176, 7119394, 7831333, 8614467,
    9475909, 10423501, 11465851, 12612437, 13873681, 15261050, 16787154,
    18465870, 20312458, 22343706, 24578077, 27035886, 29739474, 32713425,
    35984770, 39583245, 43541573, 47895730, 52685306, 57953837, 63749221,
    70124148, 77136564, 84850228, 93335252, 102668779, 112935659, 124229227,
    136652151, 150317384, 165349128, 181884040, 200072456, 220079703, 242087671,
    266296456, 292926096, 322218735, 354440623, 389884688, 428873168, 471760495,
    518936559, 570830240, 627913311, 690704607, 759775136, 835752671, 919327967,
    1011260767, 1112386880, 1223623232, 1345985727, 1480584256, 1628642751, 1791507135,
    1970657856, 2167723648, 2384496256, 2622945920, 2885240448, 3173764736, 3491141248,
    3840255616, 4224281216,
};

constexpr std::uint8_t pearson(std::uint8_t salt, std::uint8_t a, std::uint8_t b,
                               std::uint8_t c) noexcept {
  return kPearson[kPearson[kPearson[salt ^ a] ^ b] ^ c];
}

constexpr std::uint8_t swap_nibbles(std::uint8_t b) noexcept {
  return static_cast<std::uint8_t>((b << 4) | (b >> 4));
}

constexpr char kHex[] = "0123456789ABCDEF";

int hex_value(char c) noexcept {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

void put_byte(std::string& out, std::uint8_t b) {
  out.push_back(kHex[b >> 4]);
  out.push_back(kHex[b & 0x0F]);
}

// Two-bit code difference weights: 0, 1, 2, and 6 for opposite extremes.
constexpr int code_diff(int a, int b) noexcept {
  const int d = std::abs(a - b);
  return d == 3 ? 6 : d;
}

}  // namespace

std::string_view to_string(DigestErrc code) noexcept {
  switch (code) {
    case DigestErrc::TooShort: return "TooShort";
    case DigestErrc::InsufficientComplexity: return "InsufficientComplexity";
    case DigestErrc::BadLength: return "BadLength";
    case DigestErrc::BadPrefix: return "BadPrefix";
    case DigestErrc::NonHexCharacter: return "NonHexCharacter";
    case DigestErrc::VersionMismatch: return "VersionMismatch";
  }
  return "unknown";
}

namespace detail {

std::uint8_t length_capture(std::uint64_t length) noexcept {
  const auto it = std::lower_bound(kLengthSteps.begin(), kLengthSteps.end(), length);
  if (it == kLengthSteps.end()) return static_cast<std::uint8_t>(kLengthSteps.size() - 1);
  return static_cast<std::uint8_t>(it - kLengthSteps.begin());
}

}  // namespace detail

Digest compute_digest(std::span<const std::uint8_t> data) {
  if (data.size() < kMinDigestInput) {
    throw DigestError(DigestErrc::TooShort,
                      "digest input has " + std::to_string(data.size()) +
                          " bytes, need at least " + std::to_string(kMinDigestInput));
  }

  // Every 5-byte window contributes one checksum step and six triplets; the
  // salts are the Pearson images of 0, 2, 3, 5, 7, 11 and 13.
  std::array<std::uint32_t, 256> buckets{};
  std::uint8_t checksum = 0;
  for (std::size_t i = 4; i < data.size(); ++i) {
    const std::uint8_t a0 = data[i - 4], a1 = data[i - 3], a2 = data[i - 2],
                       a3 = data[i - 1], a4 = data[i];
    checksum = pearson(1, a4, a3, checksum);
    ++buckets[pearson(49, a4, a3, a2)];
    ++buckets[pearson(12, a4, a3, a1)];
    ++buckets[pearson(178, a4, a2, a1)];
    ++buckets[pearson(166, a4, a2, a0)];
    ++buckets[pearson(84, a4, a3, a0)];
    ++buckets[pearson(230, a4, a1, a0)];
  }

  std::array<std::uint32_t, kBucketCount> sorted{};
  std::copy_n(buckets.begin(), kBucketCount, sorted.begin());
  constexpr std::size_t p1 = kBucketCount / 4 - 1, p2 = kBucketCount / 2 - 1,
                        p3 = kBucketCount - kBucketCount / 4 - 1;
  std::nth_element(sorted.begin(), sorted.begin() + p2, sorted.end());
  const std::uint32_t q2 = sorted[p2];
  std::nth_element(sorted.begin(), sorted.begin() + p1, sorted.begin() + p2);
  const std::uint32_t q1 = sorted[p1];
  std::nth_element(sorted.begin() + p2 + 1, sorted.begin() + p3, sorted.end());
  const std::uint32_t q3 = sorted[p3];

  const auto nonzero =
      std::count_if(buckets.begin(), buckets.begin() + kBucketCount,
                    [](std::uint32_t c) { return c > 0; });
  if (q3 == 0 || nonzero <= static_cast<long>(kBucketCount / 2)) {
    throw DigestError(DigestErrc::InsufficientComplexity,
                      "only " + std::to_string(nonzero) + " of " +
                          std::to_string(kBucketCount) + " buckets are populated");
  }

  Digest d;
  d.checksum = checksum;
  d.lvalue = detail::length_capture(data.size());
  d.q1ratio = static_cast<std::uint8_t>((std::uint64_t{q1} * 100 / q3) % 16);
  d.q2ratio = static_cast<std::uint8_t>((std::uint64_t{q2} * 100 / q3) % 16);
  for (std::size_t i = 0; i < kBucketCount; ++i) {
    const auto k = buckets[i];
    d.body[i] = k > q3 ? 3 : k > q2 ? 2 : k > q1 ? 1 : 0;
  }
  return d;
}

Digest parse_digest(std::string_view text) {
  if (text.size() == kDigestTextLength - 2) {
    throw DigestError(DigestErrc::BadPrefix, "digest lacks the T1 version prefix");
  }
  if (text.size() != kDigestTextLength) {
    throw DigestError(DigestErrc::BadLength,
                      "digest text has " + std::to_string(text.size()) +
                          " characters, expected " + std::to_string(kDigestTextLength));
  }
  if ((text[0] != 'T' && text[0] != 't') || text[1] != '1') {
    throw DigestError(DigestErrc::BadPrefix, "digest must start with T1");
  }

  std::array<std::uint8_t, 35> raw{};
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const int hi = hex_value(text[2 + 2 * i]);
    const int lo = hex_value(text[3 + 2 * i]);
    if (hi < 0 || lo < 0) {
      throw DigestError(DigestErrc::NonHexCharacter,
                        "non-hex character near offset " + std::to_string(2 + 2 * i));
    }
    raw[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }

  Digest d;
  d.checksum = swap_nibbles(raw[0]);
  d.lvalue = swap_nibbles(raw[1]);
  const std::uint8_t q = swap_nibbles(raw[2]);
  d.q1ratio = q & 0x0F;
  d.q2ratio = q >> 4;
  // Body bytes are stored last-byte-first; bucket 4i+j sits at bits 2j.
  for (std::size_t i = 0; i < kBucketCount / 4; ++i) {
    const std::uint8_t packed = raw[3 + (kBucketCount / 4 - 1 - i)];
    for (std::size_t j = 0; j < 4; ++j) d.body[4 * i + j] = (packed >> (2 * j)) & 0x03;
  }
  return d;
}

std::string format_digest(const Digest& d) {
  std::string out;
  out.reserve(kDigestTextLength);
  out.push_back('T');
  out.push_back(static_cast<char>('0' + d.version));
  put_byte(out, swap_nibbles(d.checksum));
  put_byte(out, swap_nibbles(d.lvalue));
  put_byte(out, swap_nibbles(static_cast<std::uint8_t>((d.q2ratio & 0x0F) << 4 | (d.q1ratio & 0x0F))));
  for (std::size_t i = kBucketCount / 4; i-- > 0;) {
    std::uint8_t packed = 0;
    for (std::size_t j = 0; j < 4; ++j) packed |= (d.body[4 * i + j] & 0x03) << (2 * j);
    put_byte(out, packed);
  }
  return out;
}

int distance(const Digest& a, const Digest& b, LengthTerm length) {
  if (a.version != b.version) {
    throw DigestError(DigestErrc::VersionMismatch,
                      "cannot compare T" + std::to_string(a.version) + " with T" +
                          std::to_string(b.version));
  }
  int score = 0;
  if (length == LengthTerm::Include) {
    const int ld = detail::ring_diff(a.lvalue, b.lvalue, 256);
    score += ld <= 1 ? ld : 12 * ld;
  }
  for (const auto& [x, y] : {std::pair{a.q1ratio, b.q1ratio}, std::pair{a.q2ratio, b.q2ratio}}) {
    const int qd = detail::ring_diff(x, y, 16);
    score += qd <= 1 ? qd : 12 * (qd - 1);
  }
  if (a.checksum != b.checksum) ++score;
  for (std::size_t i = 0; i < kBucketCount; ++i) score += code_diff(a.body[i], b.body[i]);
  return score;
}

}  // namespace masq
