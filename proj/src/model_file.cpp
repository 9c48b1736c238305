#include "masq/pipeline.hpp"

namespace masq {
namespace {

using nlohmann::json;

constexpr std::string_view kFormatTag = "masq-model";

std::string dump_line(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
}

[[noreturn]] void corrupt(const std::string& what, std::size_t line = 0) {
  throw PipelineError(PipelineErrc::CorruptModel, what, line);
}

json cluster_to_json(const Cluster& c) {
  const auto& consensus = c.signer_consensus;
  return {
      {"kind", "cluster"},
      {"id", c.id},
      {"size", c.members.size()},
      {"centroid", format_digest(c.centroid)},
      {"legitimate", c.reputation.legitimate},
      {"malicious", c.reputation.malicious},
      {"unknown", c.reputation.unknown},
      {"dominant", std::string(to_string(c.reputation.dominant))},
      {"signer", consensus ? json(consensus->signer) : json(nullptr)},
      {"signer_count", consensus ? consensus->count : 0},
  };
}

// Parsed cluster row, checked against the members once they are loaded.
struct ClusterRow {
  std::size_t size = 0;
  Cluster expected;
};

ClusterRow cluster_from_json(const json& j) {
  ClusterRow row;
  Cluster& c = row.expected;
  c.id = j.at("id").get<int>();
  row.size = j.at("size").get<std::size_t>();
  c.centroid = parse_digest(j.at("centroid").get<std::string>());
  c.reputation.legitimate = j.at("legitimate").get<std::size_t>();
  c.reputation.malicious = j.at("malicious").get<std::size_t>();
  c.reputation.unknown = j.at("unknown").get<std::size_t>();
  const auto dominant = reputation_from_string(j.at("dominant").get<std::string>());
  if (!dominant) corrupt("bad dominant label in cluster " + std::to_string(c.id));
  c.reputation.dominant = *dominant;
  if (!j.at("signer").is_null()) {
    c.signer_consensus =
        SignerConsensus{j.at("signer").get<std::string>(), j.at("signer_count").get<std::size_t>(),
                        row.size};
  }
  return row;
}

}  // namespace

std::string serialize_model(const ClusterModel& model) {
  std::string out = dump_line({
      {"format", kFormatTag},
      {"v", kModelFormatVersion},
      {"threshold", model.threshold},
      {"records", model.record_count()},
      {"clusters", model.clusters.size()},
      {"created", model.created},
  });
  for (const auto& c : model.clusters) out += dump_line(cluster_to_json(c));
  for (const auto& c : model.clusters) {
    for (const auto& m : c.members) {
      out += dump_line({{"kind", "member"}, {"cluster", c.id}, {"record", record_to_json(m)}});
    }
  }
  return out;
}

ClusterModel deserialize_model(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    if (nl == std::string_view::npos) corrupt("unterminated final line (truncated file?)");
    lines.push_back(text.substr(0, nl));
    text.remove_prefix(nl + 1);
  }
  if (lines.empty()) corrupt("empty model file");

  std::size_t line_no = 0;
  auto parse = [&](std::string_view line) {
    ++line_no;
    try {
      return json::parse(line);
    } catch (const json::parse_error& e) {
      corrupt(std::string("invalid JSON: ") + e.what(), line_no);
    }
  };

  ClusterModel model;
  std::size_t record_count = 0;
  std::size_t cluster_count = 0;
  std::vector<ClusterRow> rows;
  try {
    const json header = parse(lines[0]);
    if (!header.is_object() || header.value("format", "") != kFormatTag) {
      corrupt("not a model file", 1);
    }
    const int version = header.at("v").get<int>();
    if (version != kModelFormatVersion) {
      throw PipelineError(PipelineErrc::VersionMismatch,
                          "model format version " + std::to_string(version) +
                              " is not supported (expected " +
                              std::to_string(kModelFormatVersion) + ")");
    }
    model.threshold = header.at("threshold").get<int>();
    model.created = header.at("created").get<std::string>();
    record_count = header.at("records").get<std::size_t>();
    cluster_count = header.at("clusters").get<std::size_t>();
    if (lines.size() != 1 + cluster_count + record_count) {
      corrupt("header announces " + std::to_string(cluster_count) + " clusters and " +
              std::to_string(record_count) + " records but the file has " +
              std::to_string(lines.size() - 1) + " rows");
    }

    for (std::size_t i = 0; i < cluster_count; ++i) {
      const json j = parse(lines[1 + i]);
      if (j.at("kind") != "cluster") corrupt("expected a cluster row", line_no);
      rows.push_back(cluster_from_json(j));
      if (rows.back().expected.id != static_cast<int>(i)) {
        corrupt("cluster ids must be consecutive from 0", line_no);
      }
      Cluster c;
      c.id = static_cast<int>(i);
      model.clusters.push_back(std::move(c));
    }
    for (std::size_t i = 0; i < record_count; ++i) {
      const json j = parse(lines[1 + cluster_count + i]);
      if (j.at("kind") != "member") corrupt("expected a member row", line_no);
      const auto id = j.at("cluster").get<std::size_t>();
      if (id >= cluster_count) corrupt("member references unknown cluster", line_no);
      try {
        model.clusters[id].members.push_back(record_from_json(j.at("record")));
      } catch (const PipelineError& e) {
        corrupt("bad member record: " + e.detail(), line_no);
      }
    }
  } catch (const json::exception& e) {
    corrupt(std::string("malformed row: ") + e.what(), line_no);
  } catch (const DigestError& e) {
    corrupt(std::string("bad digest: ") + e.what(), line_no);
  }

  for (std::size_t i = 0; i < cluster_count; ++i) {
    Cluster& c = model.clusters[i];
    if (c.members.empty() || c.members.size() != rows[i].size) {
      corrupt("cluster " + std::to_string(i) + " member count does not match its header");
    }
    refresh_summaries(c);
    const Cluster& want = rows[i].expected;
    if (c.centroid != want.centroid || c.reputation != want.reputation ||
        c.signer_consensus != want.signer_consensus) {
      corrupt("cluster " + std::to_string(i) + " summary does not match its members");
    }
  }
  model.index = build_centroid_index(model.clusters);
  return model;
}

void save_model(const ClusterModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

ClusterModel load_model(const std::filesystem::path& path) {
  return deserialize_model(read_text(path));
}

}  // namespace masq
