#include "masq/cli.hpp"

#include <chrono>
#include <ctime>
#include <ostream>

#include "CLI11.hpp"
#include "masq/pipeline.hpp"

namespace masq {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Digest parse_digest_arg(const std::string& text) {
  try {
    return parse_digest(text);
  } catch (const DigestError& e) {
    throw UsageError(std::string("invalid digest '") + text + "': " + e.what());
  }
}

Blocklist blocklist_from(const std::string& path) {
  return path.empty() ? Blocklist{} : load_blocklist(read_text(path));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Similarity-driven detector for masquerading executables", "masq"};
  app.require_subcommand(1);

  std::string corpus, model_path, feed, out_path, blocklist_path, in_path, mode_name;
  int threshold = kDefaultThreshold;
  double majority_min = kDefaultMajorityMin;
  bool no_length = false;
  std::string digest_a, digest_b, file_path;

  auto* build = app.add_subcommand("build", "Cluster a reference corpus into a model file");
  build->add_option("--corpus", corpus, "Corpus manifest (JSONL)")->required();
  build->add_option("--threshold", threshold, "Linkage distance threshold")->capture_default_str();
  build->add_option("--out", out_path, "Model file to write")->required();

  auto* scan = app.add_subcommand("scan", "Scan a feed against a model and write alerts");
  scan->add_option("--model", model_path, "Model file")->required();
  scan->add_option("--feed", feed, "Feed manifest (JSONL)")->required();
  scan->add_option("--threshold", threshold, "Candidate distance threshold")->capture_default_str();
  scan->add_option("--blocklist", blocklist_path, "Certificate blocklist");
  scan->add_option("--out", out_path, "Alerts file to write (JSONL)")->required();

  auto* audit = app.add_subcommand("audit", "Run the cluster signing audits");
  audit->add_option("--model", model_path, "Model file")->required();
  audit->add_option("--majority-min", majority_min, "Verified fraction for the unsigned-minority audit")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  audit->add_option("--blocklist", blocklist_path, "Certificate blocklist");
  audit->add_option("--out", out_path, "Alerts file to write (JSONL)")->required();

  auto* digest = app.add_subcommand("digest", "Print the similarity digest of a file");
  digest->add_option("path", file_path, "Input file")->required();

  auto* dist = app.add_subcommand("dist", "Print the distance between two digests");
  dist->add_option("a", digest_a, "First digest")->required();
  dist->add_option("b", digest_b, "Second digest")->required();
  dist->add_flag("--no-length", no_length, "Ignore the length component");

  auto* forge = app.add_subcommand("forge", "Derive masquerading variants of manifest records");
  forge->add_option("--in", in_path, "Input manifest")->required();
  forge->add_option("--mode", mode_name, "strip_signature | corrupt_body | x509_remnant")
      ->required()
      ->check(CLI::IsMember({"strip_signature", "corrupt_body", "x509_remnant"}));
  forge->add_option("--out", out_path, "Output manifest")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*build) {
      auto model = cluster_corpus(ingest_manifest(corpus), threshold);
      model.created = utc_now();
      save_model(model, out_path);
      out << "records: " << model.record_count() << "\n";
      out << "clusters: " << model.clusters.size() << "\n";
    } else if (*scan) {
      const auto model = load_model(model_path);
      const auto bl = blocklist_from(blocklist_path);
      const auto result = scan_feed(model, ingest_manifest(feed), bl, threshold);
      write_file_atomic(out_path, alerts_text(result.alerts));
      out << "candidates: " << result.candidates.size() << "\n";
      out << "alerts: " << result.alerts.size() << "\n";
    } else if (*audit) {
      const auto model = load_model(model_path);
      const auto bl = blocklist_from(blocklist_path);
      auto alerts = audit_unsigned_minority(model, majority_min, bl);
      const auto split = audit_reputation_split(model, bl);
      out << "unsigned-minority: " << alerts.size() << "\n";
      out << "reputation-split: " << split.size() << "\n";
      alerts.insert(alerts.end(), split.begin(), split.end());
      canonicalize(alerts);
      write_file_atomic(out_path, alerts_text(alerts));
      out << "alerts: " << alerts.size() << "\n";
    } else if (*digest) {
      out << format_digest(compute_digest(read_bytes(file_path))) << "\n";
    } else if (*dist) {
      const auto a = parse_digest_arg(digest_a);
      const auto b = parse_digest_arg(digest_b);
      out << distance(a, b, no_length ? LengthTerm::Exclude : LengthTerm::Include) << "\n";
    } else if (*forge) {
      const auto mode = *forge_mode_from_string(mode_name);
      std::vector<FileRecord> forged;
      for (const auto& entry : ingest_manifest_entries(in_path)) {
        std::optional<std::vector<std::uint8_t>> raw;
        if (mode == ForgeMode::CorruptBody && entry.path) raw = read_bytes(*entry.path);
        forged.push_back(forge_masquerade(
            entry.record, mode,
            raw ? std::optional<std::span<const std::uint8_t>>(*raw) : std::nullopt));
      }
      write_file_atomic(out_path, manifest_text(forged));
      out << "forged: " << forged.size() << "\n";
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace masq
