#include "masq/clusterer.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <tuple>

namespace masq {
namespace {

bool canonical_less(const FileRecord& a, const FileRecord& b) {
  if (a.sha256 != b.sha256) return a.sha256 < b.sha256;
  const auto da = format_digest(a.digest), db = format_digest(b.digest);
  return std::tie(da, a.filename, a.source, a.reputation) <
         std::tie(db, b.filename, b.source, b.reputation);
}

}  // namespace

std::string_view to_string(Reputation r) noexcept {
  switch (r) {
    case Reputation::Legitimate: return "legitimate";
    case Reputation::Malicious: return "malicious";
    case Reputation::Unknown: return "unknown";
  }
  return "unknown";
}

std::optional<Reputation> reputation_from_string(std::string_view name) noexcept {
  if (name == "legitimate") return Reputation::Legitimate;
  if (name == "malicious") return Reputation::Malicious;
  if (name == "unknown") return Reputation::Unknown;
  return std::nullopt;
}

bool is_valid_sha256(std::string_view s) noexcept {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

std::size_t ClusterModel::record_count() const noexcept {
  return std::accumulate(clusters.begin(), clusters.end(), std::size_t{0},
                         [](std::size_t n, const Cluster& c) { return n + c.members.size(); });
}

std::string normalize_signer(std::string_view signer) {
  std::string out;
  bool pending_space = false;
  for (const char c : signer) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string signer_key(std::string_view signer) {
  std::string key = normalize_signer(signer);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return key;
}

bool same_signer(std::string_view a, std::string_view b) { return signer_key(a) == signer_key(b); }

Digest medoid(std::span<const Digest> members) {
  if (members.empty()) throw ClusterError(ClusterErrc::EmptyInput, "medoid of no digests");
  const std::size_t n = members.size();
  std::vector<long> sums(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int d = distance(members[i], members[j]);
      sums[i] += d;
      sums[j] += d;
    }
  }
  std::size_t best = 0;
  std::string best_text = format_digest(members[0]);
  for (std::size_t i = 1; i < n; ++i) {
    if (sums[i] > sums[best]) continue;
    std::string text = format_digest(members[i]);
    if (sums[i] < sums[best] || text < best_text) {
      best = i;
      best_text = std::move(text);
    }
  }
  return members[best];
}

ReputationSummary summarize_reputation(std::span<const FileRecord> members) {
  ReputationSummary s;
  for (const auto& m : members) {
    switch (m.reputation) {
      case Reputation::Legitimate: ++s.legitimate; break;
      case Reputation::Malicious: ++s.malicious; break;
      case Reputation::Unknown: ++s.unknown; break;
    }
  }
  if (s.legitimate > s.malicious) {
    s.dominant = Reputation::Legitimate;
  } else if (s.malicious > s.legitimate) {
    s.dominant = Reputation::Malicious;
  } else {
    s.dominant = Reputation::Unknown;
  }
  return s;
}

ReputationSummary cluster_reputation(const Cluster& c) { return summarize_reputation(c.members); }

std::optional<SignerConsensus> compute_signer_consensus(std::span<const FileRecord> members) {
  struct Tally {
    std::string display;
    std::size_t count = 0;
  };
  std::map<std::string, Tally> tallies;
  const Blocklist no_intel;
  for (const auto& m : members) {
    if (!m.sig_facts.signer) continue;
    if (classify_signature(m.sig_facts, no_intel) != SignatureState::SignedVerified) continue;
    auto display = normalize_signer(*m.sig_facts.signer);
    if (display.empty()) continue;
    auto& tally = tallies[signer_key(display)];
    if (tally.count == 0) tally.display = std::move(display);
    ++tally.count;
  }
  const Tally* best = nullptr;
  for (const auto& [key, tally] : tallies) {
    if (best == nullptr || tally.count > best->count ||
        (tally.count == best->count && tally.display < best->display)) {
      best = &tally;
    }
  }
  if (best == nullptr) return std::nullopt;
  return SignerConsensus{best->display, best->count, members.size()};
}

std::optional<SignerConsensus> signer_consensus(const Cluster& c) {
  return compute_signer_consensus(c.members);
}

void refresh_summaries(Cluster& c) {
  std::vector<Digest> digests;
  digests.reserve(c.members.size());
  for (const auto& m : c.members) digests.push_back(m.digest);
  c.centroid = medoid(digests);
  c.reputation = summarize_reputation(c.members);
  c.signer_consensus = compute_signer_consensus(c.members);
}

VpIndex build_centroid_index(const std::vector<Cluster>& clusters) {
  std::vector<std::pair<ItemId, Digest>> items;
  items.reserve(clusters.size());
  for (const auto& c : clusters) items.emplace_back(static_cast<ItemId>(c.id), c.centroid);
  return VpIndex(std::move(items));
}

ClusterModel cluster_corpus(std::vector<FileRecord> records, int threshold) {
  if (records.empty()) throw ClusterError(ClusterErrc::EmptyCorpus, "corpus has no records");
  const auto version = records.front().digest.version;
  for (const auto& r : records) {
    if (r.digest.version != version) {
      throw ClusterError(ClusterErrc::VersionMismatch, "corpus mixes digest versions");
    }
  }
  std::sort(records.begin(), records.end(), canonical_less);

  std::vector<std::pair<ItemId, Digest>> items;
  items.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) items.emplace_back(i, records[i].digest);
  const VpIndex member_index(std::move(items));

  // Components are discovered from the smallest unvisited record, so they come
  // out ordered by smallest member and the ids are canonical.
  ClusterModel model;
  model.threshold = threshold;
  std::vector<bool> visited(records.size(), false);
  std::vector<std::size_t> frontier;
  for (std::size_t seed = 0; seed < records.size(); ++seed) {
    if (visited[seed]) continue;
    visited[seed] = true;
    std::vector<std::size_t> component{seed};
    frontier.assign(1, seed);
    while (!frontier.empty()) {
      const std::size_t at = frontier.back();
      frontier.pop_back();
      for (const auto& hit : member_index.query_radius(records[at].digest, threshold)) {
        if (visited[hit.id]) continue;
        visited[hit.id] = true;
        component.push_back(hit.id);
        frontier.push_back(hit.id);
      }
    }
    std::sort(component.begin(), component.end());

    Cluster cluster;
    cluster.id = static_cast<int>(model.clusters.size());
    cluster.members.reserve(component.size());
    for (const auto i : component) cluster.members.push_back(std::move(records[i]));
    refresh_summaries(cluster);
    model.clusters.push_back(std::move(cluster));
  }
  model.index = build_centroid_index(model.clusters);
  return model;
}

std::optional<Assignment> assign(const ClusterModel& model, const Digest& probe, int threshold) {
  const auto nearest = model.index.query_nearest(probe, 1);
  if (nearest.empty() || nearest.front().distance > threshold) return std::nullopt;
  return Assignment{static_cast<int>(nearest.front().id), nearest.front().distance};
}

}  // namespace masq
