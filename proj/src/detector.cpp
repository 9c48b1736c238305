#include "masq/detector.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <tuple>

namespace masq {
namespace {

constexpr std::array<std::string_view, 4> kMasqueradeNames = {
    "ContentMasquerading", "CertificateAttack", "SupplyChain", "GenericSimilarity"};

constexpr std::array<std::string_view, 10> kAlertNames = {
    "NoSignatureNearSignedCluster", "InvalidSignatureNearCluster", "X509RemnantNearCluster",
    "RevokedCertSignerMismatch",    "StolenCertSignerMismatch",    "MalwareSigningCert",
    "UntrustedRootSignerMismatch",  "ClusterUnsignedMinority",     "ClusterReputationSplit",
    "GenericSimilarMalware"};

std::string quoted(std::string_view s) { return "\"" + std::string(s) + "\""; }

// "cluster 4 (46 members: 45 legitimate, 1 malicious, 0 unknown; 45 of 46
// verified-signed by "Google LLC")"
std::string cluster_evidence(const Cluster& c) {
  std::ostringstream os;
  os << "cluster " << c.id << " (" << c.members.size() << " member"
     << (c.members.size() == 1 ? "" : "s") << ": " << c.reputation.legitimate << " legitimate, "
     << c.reputation.malicious << " malicious, " << c.reputation.unknown << " unknown";
  if (c.signer_consensus) {
    os << "; " << c.signer_consensus->count << " of " << c.signer_consensus->total
       << " verified-signed by " << quoted(c.signer_consensus->signer);
  } else {
    os << "; no verified signer";
  }
  os << ")";
  return os.str();
}

bool signer_mismatch(const FileRecord& r, const SignerConsensus& consensus) {
  return !r.sig_facts.signer || !same_signer(*r.sig_facts.signer, consensus.signer);
}

std::string observed_signer(const FileRecord& r) {
  return r.sig_facts.signer ? quoted(normalize_signer(*r.sig_facts.signer)) : "no signer";
}

}  // namespace

std::string_view to_string(MasqueradeKind k) noexcept {
  return kMasqueradeNames[static_cast<std::size_t>(k)];
}

std::string_view to_string(AlertKind k) noexcept { return kAlertNames[static_cast<std::size_t>(k)]; }

std::optional<MasqueradeKind> masquerade_kind_from_string(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kMasqueradeNames.size(); ++i) {
    if (kMasqueradeNames[i] == s) return static_cast<MasqueradeKind>(i);
  }
  return std::nullopt;
}

std::optional<AlertKind> alert_kind_from_string(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kAlertNames.size(); ++i) {
    if (kAlertNames[i] == s) return static_cast<AlertKind>(i);
  }
  return std::nullopt;
}

std::string cluster_subject(int cluster_id) { return "cluster:" + std::to_string(cluster_id); }

void canonicalize(std::vector<Alert>& alerts) {
  std::stable_sort(alerts.begin(), alerts.end(), [](const Alert& a, const Alert& b) {
    return std::tie(a.subject, a.cluster_id, a.alert_kind) <
           std::tie(b.subject, b.cluster_id, b.alert_kind);
  });
}

std::vector<Candidate> scan_candidates(const ClusterModel& model,
                                       const std::vector<FileRecord>& feed, int threshold) {
  std::vector<Candidate> out;
  for (const auto& record : feed) {
    // Radius hits arrive ordered by (distance, cluster id); the first
    // legitimate-dominant one is the nearest match.
    for (const auto& hit : model.index.query_radius(record.digest, threshold)) {
      const Cluster& c = model.cluster(static_cast<int>(hit.id));
      if (c.reputation.dominant != Reputation::Legitimate) continue;
      out.push_back({record, c.id, hit.distance});
      break;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.record.sha256, a.cluster_id) < std::tie(b.record.sha256, b.cluster_id);
  });
  return out;
}

std::optional<Alert> classify_masquerade(const Candidate& candidate, const Cluster& cluster,
                                         const Blocklist& bl) {
  const FileRecord& r = candidate.record;
  const SignatureState state = classify_signature(r.sig_facts, bl);
  const auto& consensus = cluster.signer_consensus;

  Alert alert;
  alert.subject = r.sha256;
  alert.cluster_id = cluster.id;
  alert.distance = candidate.distance;
  alert.observed_state = state;
  if (consensus) alert.expected_signer = consensus->signer;

  std::ostringstream why;
  why << quoted(r.filename) << " is at distance " << candidate.distance << " from "
      << cluster_evidence(cluster) << " and is " << quoted(describe(state)) << "; ";

  switch (state) {
    case SignatureState::UnsignedNoSignature:
      if (!consensus) return std::nullopt;
      alert.alert_kind = AlertKind::NoSignatureNearSignedCluster;
      alert.masquerade_kind = MasqueradeKind::ContentMasquerading;
      why << "files near this cluster are expected to be signed by " << quoted(consensus->signer);
      break;

    case SignatureState::SignedNotVerified:
      alert.alert_kind = AlertKind::InvalidSignatureNearCluster;
      alert.masquerade_kind = MasqueradeKind::ContentMasquerading;
      why << "the signature by " << observed_signer(r) << " fails verification";
      if (consensus && !signer_mismatch(r, *consensus)) {
        why << "; the claimed signer matches the cluster, consistent with a modified genuine file";
      } else if (consensus) {
        why << "; files near this cluster are expected to be signed by "
            << quoted(consensus->signer);
      }
      break;

    case SignatureState::UnsignedContainsX509:
      alert.alert_kind = AlertKind::X509RemnantNearCluster;
      alert.masquerade_kind = MasqueradeKind::ContentMasquerading;
      why << "the file carries the remains of an X509 certificate without a valid signature";
      if (consensus) {
        why << "; files near this cluster are expected to be signed by "
            << quoted(consensus->signer);
      }
      break;

    case SignatureState::SignedRevoked:
    case SignatureState::SignedNotInValidityPeriod:
      if (!consensus || !signer_mismatch(r, *consensus)) return std::nullopt;
      alert.alert_kind = AlertKind::RevokedCertSignerMismatch;
      alert.masquerade_kind = MasqueradeKind::CertificateAttack;
      why << (state == SignatureState::SignedRevoked
                  ? "it is signed by a revoked certificate issued to "
                  : "it is signed outside the certificate validity period by ")
          << observed_signer(r) << " while the cluster is signed by " << quoted(consensus->signer);
      break;

    case SignatureState::SignedStolenOrRevoked:
      alert.alert_kind = AlertKind::StolenCertSignerMismatch;
      alert.masquerade_kind = MasqueradeKind::CertificateAttack;
      why << "it is signed by " << observed_signer(r)
          << " using a certificate designated stolen or revoked";
      if (consensus) why << "; the cluster is signed by " << quoted(consensus->signer);
      break;

    case SignatureState::SignedMalwareSigningCert:
      alert.alert_kind = AlertKind::MalwareSigningCert;
      alert.masquerade_kind = MasqueradeKind::CertificateAttack;
      why << "it is signed by " << observed_signer(r)
          << " with a certificate known for signing malware";
      if (consensus) why << "; the cluster is signed by " << quoted(consensus->signer);
      break;

    case SignatureState::SignedNoTrustedRoot:
      if (!consensus || !signer_mismatch(r, *consensus)) return std::nullopt;
      alert.alert_kind = AlertKind::UntrustedRootSignerMismatch;
      alert.masquerade_kind = MasqueradeKind::CertificateAttack;
      why << "its certificate chain for " << observed_signer(r)
          << " does not reach a trusted root while the cluster is signed by "
          << quoted(consensus->signer);
      break;

    case SignatureState::SignedVerified:
      if (r.reputation != Reputation::Malicious) return std::nullopt;
      alert.alert_kind = AlertKind::GenericSimilarMalware;
      alert.masquerade_kind = MasqueradeKind::GenericSimilarity;
      why << "it is labelled malicious despite a verified signature by " << observed_signer(r);
      break;
  }
  alert.reasoning = why.str();
  return alert;
}

std::vector<Alert> audit_unsigned_minority(const ClusterModel& model, double majority_min,
                                           const Blocklist& bl) {
  std::vector<Alert> out;
  for (const auto& c : model.clusters) {
    std::size_t verified = 0;
    std::vector<const FileRecord*> unsigned_members;
    std::optional<SignatureState> first_unsigned;
    for (const auto& m : c.members) {
      const auto state = classify_signature(m.sig_facts, bl);
      if (state == SignatureState::SignedVerified) ++verified;
      if (is_unsigned(state)) {
        if (!first_unsigned) first_unsigned = state;
        unsigned_members.push_back(&m);
      }
    }
    const double fraction = static_cast<double>(verified) / static_cast<double>(c.members.size());
    if (unsigned_members.empty() || fraction < majority_min) continue;

    Alert alert;
    alert.alert_kind = AlertKind::ClusterUnsignedMinority;
    alert.masquerade_kind = MasqueradeKind::ContentMasquerading;
    alert.subject = cluster_subject(c.id);
    alert.cluster_id = c.id;
    alert.observed_state = *first_unsigned;
    if (c.signer_consensus) alert.expected_signer = c.signer_consensus->signer;

    std::ostringstream why;
    why << cluster_evidence(c) << " has " << verified << " signed and verified members vs "
        << unsigned_members.size() << " unsigned: ";
    for (std::size_t i = 0; i < unsigned_members.size(); ++i) {
      const auto* m = unsigned_members[i];
      if (i) why << ", ";
      why << quoted(m->filename) << " (" << m->sha256.substr(0, 12) << ", distance "
          << distance(m->digest, c.centroid) << ")";
    }
    why << "; unsigned near-duplicates of signed software suggest file infection";
    alert.reasoning = why.str();
    out.push_back(std::move(alert));
  }
  canonicalize(out);
  return out;
}

std::vector<Alert> audit_reputation_split(const ClusterModel& model, const Blocklist& bl) {
  std::vector<Alert> out;
  for (const auto& c : model.clusters) {
    if (c.reputation.legitimate == 0 || c.reputation.malicious == 0) continue;
    const bool labelled_all_verified =
        std::all_of(c.members.begin(), c.members.end(), [&](const FileRecord& m) {
          return m.reputation == Reputation::Unknown ||
                 classify_signature(m.sig_facts, bl) == SignatureState::SignedVerified;
        });
    if (!labelled_all_verified) continue;

    Alert alert;
    alert.alert_kind = AlertKind::ClusterReputationSplit;
    alert.masquerade_kind = MasqueradeKind::SupplyChain;
    alert.subject = cluster_subject(c.id);
    alert.cluster_id = c.id;
    alert.observed_state = SignatureState::SignedVerified;
    if (c.signer_consensus) alert.expected_signer = c.signer_consensus->signer;

    std::ostringstream why;
    why << cluster_evidence(c) << " is signed and verified throughout";
    if (c.signer_consensus) why << " by " << quoted(c.signer_consensus->signer);
    why << " yet splits " << c.reputation.legitimate << " legitimate vs "
        << c.reputation.malicious << " malicious; malicious members at distance";
    bool first = true;
    for (const auto& m : c.members) {
      if (m.reputation != Reputation::Malicious) continue;
      why << (first ? " " : ", ") << distance(m.digest, c.centroid);
      first = false;
    }
    why << " from the centroid; signed releases carrying malicious code suggest a compromised "
           "producer";
    alert.reasoning = why.str();
    out.push_back(std::move(alert));
  }
  canonicalize(out);
  return out;
}

ScanResult scan_feed(const ClusterModel& model, const std::vector<FileRecord>& feed,
                     const Blocklist& bl, int threshold) {
  ScanResult result;
  result.candidates = scan_candidates(model, feed, threshold);
  for (const auto& cand : result.candidates) {
    if (auto alert = classify_masquerade(cand, model.cluster(cand.cluster_id), bl)) {
      result.alerts.push_back(std::move(*alert));
    }
  }
  canonicalize(result.alerts);
  return result;
}

}  // namespace masq
