#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "masq/clusterer.hpp"
#include "masq/detector.hpp"

namespace masq {

inline constexpr int kManifestVersion = 1;
inline constexpr int kModelFormatVersion = 1;
inline constexpr int kAlertVersion = 1;

enum class PipelineErrc {
  Io,
  SchemaViolation,
  DigestError,
  VersionMismatch,
  CorruptModel,
  MissingRawBytes,
};

std::string_view to_string(PipelineErrc code) noexcept;

class PipelineError : public std::runtime_error {
 public:
  PipelineError(PipelineErrc code, const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        code_(code),
        line_(line),
        detail_(what) {}
  PipelineErrc code() const noexcept { return code_; }
  /// 1-based line number, 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }
  /// Message without the line prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  PipelineErrc code_;
  std::size_t line_;
  std::string detail_;
};

// --- hashing and file helpers -------------------------------------------

std::string sha256_hex(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// --- manifests -----------------------------------------------------------

/// One manifest line. Paths are resolved against `base_dir` when relative.
FileRecord parse_manifest_line(std::string_view line, const std::filesystem::path& base_dir = {});
/// Canonical manifest JSON for a record (always the `tlsh` form).
nlohmann::json record_to_json(const FileRecord& r);
FileRecord record_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// A parsed manifest line plus the resolved raw-bytes path, when given.
struct ManifestEntry {
  FileRecord record;
  std::optional<std::filesystem::path> path;
};

ManifestEntry parse_manifest_entry(std::string_view line,
                                   const std::filesystem::path& base_dir = {});
std::vector<ManifestEntry> ingest_manifest_entries(const std::filesystem::path& path);
std::vector<FileRecord> ingest_manifest(const std::filesystem::path& path);
std::string manifest_text(const std::vector<FileRecord>& records);

// --- model files ---------------------------------------------------------

std::string serialize_model(const ClusterModel& model);
ClusterModel deserialize_model(std::string_view text);
void save_model(const ClusterModel& model, const std::filesystem::path& path);
ClusterModel load_model(const std::filesystem::path& path);

// --- alerts --------------------------------------------------------------

nlohmann::json alert_to_json(const Alert& a);
Alert alert_from_json(const nlohmann::json& j);
std::string alerts_text(const std::vector<Alert>& alerts);
std::vector<Alert> parse_alerts(std::string_view text);

// --- forging -------------------------------------------------------------

enum class ForgeMode { StripSignature, CorruptBody, X509Remnant };

std::string_view to_string(ForgeMode m) noexcept;
std::optional<ForgeMode> forge_mode_from_string(std::string_view s) noexcept;

/// 256-byte block inserted by CorruptBody.
std::span<const std::uint8_t, 256> forge_marker() noexcept;
/// `raw` with the marker inserted at offset raw.size() / 4.
std::vector<std::uint8_t> corrupt_body(std::span<const std::uint8_t> raw);

/// Derives a malicious masquerading variant of `record`. CorruptBody needs
/// the original bytes and throws PipelineError{MissingRawBytes} without them.
FileRecord forge_masquerade(const FileRecord& record, ForgeMode mode,
                            std::optional<std::span<const std::uint8_t>> raw = std::nullopt);

}  // namespace masq
