#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "masq/digest.hpp"
#include "masq/sigstate.hpp"
#include "masq/simindex.hpp"

namespace masq {

inline constexpr int kDefaultThreshold = 30;

enum class Reputation : std::uint8_t { Legitimate, Malicious, Unknown };

std::string_view to_string(Reputation r) noexcept;
std::optional<Reputation> reputation_from_string(std::string_view name) noexcept;

/// One corpus or feed entry.
struct FileRecord {
  std::string sha256;  // 64 lower-case hex
  std::string filename;
  Digest digest;
  SignatureFacts sig_facts;
  Reputation reputation = Reputation::Unknown;
  std::string source;

  friend bool operator==(const FileRecord&, const FileRecord&) = default;
};

bool is_valid_sha256(std::string_view s) noexcept;

struct ReputationSummary {
  std::size_t legitimate = 0;
  std::size_t malicious = 0;
  std::size_t unknown = 0;
  Reputation dominant = Reputation::Unknown;

  std::size_t total() const noexcept { return legitimate + malicious + unknown; }
  friend bool operator==(const ReputationSummary&, const ReputationSummary&) = default;
};

struct SignerConsensus {
  std::string signer;
  std::size_t count = 0;  // members whose verified signer is `signer`
  std::size_t total = 0;  // all members

  double fraction() const noexcept {
    return total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total);
  }
  friend bool operator==(const SignerConsensus&, const SignerConsensus&) = default;
};

struct Cluster {
  int id = 0;
  std::vector<FileRecord> members;  // sorted by sha256
  Digest centroid;
  ReputationSummary reputation;
  std::optional<SignerConsensus> signer_consensus;

  friend bool operator==(const Cluster&, const Cluster&) = default;
};

struct ClusterModel {
  int threshold = kDefaultThreshold;
  std::vector<Cluster> clusters;  // clusters[i].id == i
  VpIndex index;                  // centroids keyed by cluster id
  std::string created;            // ISO-8601 UTC, set by the pipeline

  std::size_t record_count() const noexcept;
  const Cluster& cluster(int id) const { return clusters.at(static_cast<std::size_t>(id)); }
};

enum class ClusterErrc { EmptyCorpus, EmptyInput, VersionMismatch };

class ClusterError : public std::runtime_error {
 public:
  ClusterError(ClusterErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ClusterErrc code() const noexcept { return code_; }

 private:
  ClusterErrc code_;
};

/// Whitespace-collapsed, case-folded signer key used for all comparisons.
std::string signer_key(std::string_view signer);
/// Whitespace-collapsed signer text (case preserved).
std::string normalize_signer(std::string_view signer);
bool same_signer(std::string_view a, std::string_view b);

/// Threshold single-linkage clustering: each connected component of the
/// graph `distance <= threshold` becomes one cluster. The result does not
/// depend on input order; cluster ids ascend with each cluster's smallest
/// member sha256.
ClusterModel cluster_corpus(std::vector<FileRecord> records, int threshold = kDefaultThreshold);

/// Member with the least total distance to the others; ties go to the
/// lexicographically smallest formatted digest.
Digest medoid(std::span<const Digest> members);

struct Assignment {
  int cluster_id = 0;
  int distance = 0;
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

std::optional<Assignment> assign(const ClusterModel& model, const Digest& probe,
                                 int threshold = kDefaultThreshold);

ReputationSummary cluster_reputation(const Cluster& c);
ReputationSummary summarize_reputation(std::span<const FileRecord> members);

/// Most common verified signer and its share of all members.
std::optional<SignerConsensus> signer_consensus(const Cluster& c);
std::optional<SignerConsensus> compute_signer_consensus(std::span<const FileRecord> members);

/// Fills centroid, reputation and signer consensus from `members`.
void refresh_summaries(Cluster& c);
/// Rebuilds the centroid index from `clusters`.
VpIndex build_centroid_index(const std::vector<Cluster>& clusters);

}  // namespace masq
