#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "masq/clusterer.hpp"
#include "masq/sigstate.hpp"

namespace masq {

enum class MasqueradeKind : std::uint8_t {
  ContentMasquerading,
  CertificateAttack,
  SupplyChain,
  GenericSimilarity,
};

enum class AlertKind : std::uint8_t {
  NoSignatureNearSignedCluster,
  InvalidSignatureNearCluster,
  X509RemnantNearCluster,
  RevokedCertSignerMismatch,
  StolenCertSignerMismatch,
  MalwareSigningCert,
  UntrustedRootSignerMismatch,
  ClusterUnsignedMinority,
  ClusterReputationSplit,
  GenericSimilarMalware,
};

std::string_view to_string(MasqueradeKind k) noexcept;
std::string_view to_string(AlertKind k) noexcept;
std::optional<MasqueradeKind> masquerade_kind_from_string(std::string_view s) noexcept;
std::optional<AlertKind> alert_kind_from_string(std::string_view s) noexcept;

struct Alert {
  AlertKind alert_kind = AlertKind::GenericSimilarMalware;
  MasqueradeKind masquerade_kind = MasqueradeKind::GenericSimilarity;
  std::string subject;  // file sha256, or "cluster:<id>" for cluster audits
  int cluster_id = 0;
  std::optional<int> distance;
  std::optional<std::string> expected_signer;
  SignatureState observed_state = SignatureState::UnsignedNoSignature;
  std::string reasoning;

  friend bool operator==(const Alert&, const Alert&) = default;
};

std::string cluster_subject(int cluster_id);

/// Sorts by (subject, cluster id, alert kind).
void canonicalize(std::vector<Alert>& alerts);

struct Candidate {
  FileRecord record;
  int cluster_id = 0;
  int distance = 0;
};

/// Feed records whose nearest legitimate-dominant centroid lies within
/// `threshold`. Clusters dominated by malicious or unknown members are never
/// matched. Sorted by (sha256, cluster id).
std::vector<Candidate> scan_candidates(const ClusterModel& model,
                                       const std::vector<FileRecord>& feed,
                                       int threshold = kDefaultThreshold);

/// Applies the signing-consistency rule table to one candidate. Returns
/// nullopt when the candidate's signing state is consistent with its cluster.
std::optional<Alert> classify_masquerade(const Candidate& candidate, const Cluster& cluster,
                                         const Blocklist& bl);

inline constexpr double kDefaultMajorityMin = 0.6;

/// Clusters where at least `majority_min` of members are signed and verified
/// but some are unsigned (file-infector indicator).
std::vector<Alert> audit_unsigned_minority(const ClusterModel& model,
                                           double majority_min = kDefaultMajorityMin,
                                           const Blocklist& bl = {});

/// Clusters whose labelled members are all signed and verified yet carry both
/// legitimate and malicious reputations (supply chain indicator).
std::vector<Alert> audit_reputation_split(const ClusterModel& model, const Blocklist& bl = {});

struct ScanResult {
  std::vector<Candidate> candidates;
  std::vector<Alert> alerts;
};

/// scan_candidates followed by classify_masquerade on every candidate.
ScanResult scan_feed(const ClusterModel& model, const std::vector<FileRecord>& feed,
                     const Blocklist& bl, int threshold = kDefaultThreshold);

}  // namespace masq
