#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>

#include "masq/pipeline.hpp"

namespace masq {

std::string_view to_string(PipelineErrc code) noexcept {
  switch (code) {
    case PipelineErrc::Io: return "Io";
    case PipelineErrc::SchemaViolation: return "SchemaViolation";
    case PipelineErrc::DigestError: return "DigestError";
    case PipelineErrc::VersionMismatch: return "VersionMismatch";
    case PipelineErrc::CorruptModel: return "CorruptModel";
    case PipelineErrc::MissingRawBytes: return "MissingRawBytes";
  }
  return "unknown";
}

std::string sha256_hex(std::span<const std::uint8_t> data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int md_len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &md_len, EVP_sha256(), nullptr) != 1) {
    throw PipelineError(PipelineErrc::Io, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * md_len);
  for (unsigned int i = 0; i < md_len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0x0F]);
  }
  return out;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError(PipelineErrc::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw PipelineError(PipelineErrc::Io, "read failed for " + path.string());
  return bytes;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError(PipelineErrc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw PipelineError(PipelineErrc::Io, "read failed for " + path.string());
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw PipelineError(PipelineErrc::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw PipelineError(PipelineErrc::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw PipelineError(PipelineErrc::Io, "cannot replace " + path.string());
  }
}

}  // namespace masq
