#include <algorithm>
#include <map>

#include "doctest.h"
#include "masq/clusterer.hpp"
#include "support/test_support.hpp"

using namespace masq;
using masq::testing::make_record;
using masq::testing::SplitMix64;

namespace {

// 5 mutually distant seeds, each followed by 20 mutants that random-walk from
// earlier family members in small steps.
std::vector<FileRecord> planted_corpus(std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<FileRecord> out;
  std::uint64_t n = seed * 1000;
  for (int s = 0; s < 5; ++s) {
    std::vector<Digest> family{masq::testing::random_digest(rng)};
    for (int m = 0; m < 20; ++m) {
      const auto& parent = family[rng.below(family.size())];
      family.push_back(masq::testing::nudge(parent, rng, 1 + static_cast<int>(rng.below(6))));
    }
    for (const auto& d : family) {
      out.push_back(make_record(n++, "family" + std::to_string(s) + ".exe", d,
                                masq::testing::verified("Vendor " + std::to_string(s)),
                                Reputation::Legitimate));
    }
  }
  return out;
}

std::vector<std::vector<std::string>> brute_partition(const std::vector<FileRecord>& records,
                                                      int threshold) {
  std::vector<Digest> digests;
  for (const auto& r : records) digests.push_back(r.digest);
  const auto labels = masq::testing::brute_force_components(digests, threshold);
  std::map<std::size_t, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) groups[labels[i]].push_back(records[i].sha256);
  std::vector<std::vector<std::string>> out;
  for (auto& [_, g] : groups) {
    std::sort(g.begin(), g.end());
    out.push_back(g);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("empty corpus") {
  CHECK_THROWS_AS(cluster_corpus({}), ClusterError);
}

TEST_CASE("singleton cluster") {
  SplitMix64 rng(20);
  const auto d = masq::testing::random_digest(rng);
  const auto model = cluster_corpus({make_record(1, "a.exe", d, {}, Reputation::Legitimate)});
  REQUIRE(model.clusters.size() == 1);
  CHECK(model.clusters[0].centroid == d);
  CHECK(model.clusters[0].members.size() == 1);
  CHECK(model.record_count() == 1);
}

TEST_CASE("printed pair at distance 8 forms one cluster") {
  const auto& p = masq::testing::published_pairs()[0];
  const auto model = cluster_corpus(
      {make_record(1, "RemovePillow.exe", parse_digest(p.file), {}, Reputation::Malicious),
       make_record(2, "corel.exe", parse_digest(p.cluster), masq::testing::verified("Corel Corporation"),
                   Reputation::Legitimate)},
      30);
  REQUIRE(model.clusters.size() == 1);
  CHECK(model.clusters[0].members.size() == 2);
  CHECK(cluster_corpus(model.clusters[0].members, 7).clusters.size() == 2);
}

TEST_CASE("planted corpus recovers connected components") {
  const auto records = planted_corpus(21);
  REQUIRE(records.size() == 105);
  const auto expected = brute_partition(records, 30);
  CHECK(expected.size() == 5);
  const auto model = cluster_corpus(records, 30);
  CHECK(masq::testing::partition_of(model) == expected);

  SplitMix64 rng(22);
  for (int p = 0; p < 10; ++p) {
    auto shuffled = records;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto again = cluster_corpus(shuffled, 30);
    CHECK(masq::testing::partition_of(again) == expected);
    CHECK(again.clusters == model.clusters);
  }
}

TEST_CASE("chained linkage at a tight threshold") {
  // Small threshold splits families; still equals the brute-force answer.
  const auto records = planted_corpus(23);
  for (int threshold : {0, 2, 4, 8}) {
    CAPTURE(threshold);
    CHECK(masq::testing::partition_of(cluster_corpus(records, threshold)) ==
          brute_partition(records, threshold));
  }
}

TEST_CASE("cluster ids follow the smallest member") {
  const auto model = cluster_corpus(planted_corpus(24));
  for (std::size_t i = 0; i < model.clusters.size(); ++i) {
    CHECK(model.clusters[i].id == static_cast<int>(i));
    CHECK(std::is_sorted(model.clusters[i].members.begin(), model.clusters[i].members.end(),
                         [](const FileRecord& a, const FileRecord& b) { return a.sha256 < b.sha256; }));
    if (i) CHECK(model.clusters[i - 1].members[0].sha256 < model.clusters[i].members[0].sha256);
  }
}

TEST_CASE("medoid") {
  SplitMix64 rng(25);
  const auto a = masq::testing::random_digest(rng);
  CHECK(medoid(std::vector<Digest>{a}) == a);

  const auto b = masq::testing::nudge(a, rng, 3);
  const auto pick = medoid(std::vector<Digest>{a, b});
  CHECK(pick == (format_digest(a) < format_digest(b) ? a : b));
  CHECK(medoid(std::vector<Digest>{b, a}) == pick);

  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Digest> members;
    const auto base = masq::testing::random_digest(rng);
    for (int i = 0; i < 10; ++i) members.push_back(masq::testing::nudge(base, rng, 1 + i % 7));
    long best = -1;
    std::string best_text;
    for (const auto& m : members) {
      long sum = 0;
      for (const auto& o : members) sum += distance(m, o);
      const auto text = format_digest(m);
      if (best < 0 || sum < best || (sum == best && text < best_text)) {
        best = sum;
        best_text = text;
      }
    }
    CHECK(format_digest(medoid(members)) == best_text);
  }
}

TEST_CASE("assign") {
  const auto model = cluster_corpus(planted_corpus(26));
  const auto& c = model.clusters[2];
  CHECK(assign(model, c.centroid) == Assignment{2, 0});

  SplitMix64 rng(27);
  for (int i = 0; i < 50; ++i) {
    const auto probe = masq::testing::random_digest(rng);
    int nearest = 1 << 30;
    for (const auto& k : model.clusters) nearest = std::min(nearest, distance(probe, k.centroid));
    const auto got = assign(model, probe);
    if (nearest > 30) {
      CHECK_FALSE(got);
    } else {
      REQUIRE(got);
      CHECK(got->distance == nearest);
    }
  }
}

TEST_CASE("assign reproduces the x509 remnant pair") {
  const auto& p = masq::testing::published_pairs()[2];
  const auto model = cluster_corpus(
      {make_record(1, "vendor.exe", parse_digest(p.cluster), masq::testing::verified("Vendor"),
                   Reputation::Legitimate)});
  CHECK(assign(model, parse_digest(p.file)) == Assignment{0, 24});
}

TEST_CASE("reputation summaries") {
  SplitMix64 rng(28);
  const auto d = masq::testing::random_digest(rng);
  std::vector<FileRecord> members;
  for (int i = 0; i < 45; ++i) members.push_back(make_record(i, "chrome.exe", d, {}, Reputation::Legitimate));
  CHECK(summarize_reputation(members).dominant == Reputation::Legitimate);
  members.push_back(make_record(99, "chrome.exe", d, {}, Reputation::Malicious));
  const auto s = summarize_reputation(members);
  CHECK(s == ReputationSummary{45, 1, 0, Reputation::Legitimate});

  std::vector<FileRecord> tie;
  for (int i = 0; i < 4; ++i)
    tie.push_back(make_record(200 + i, "x", d, {}, i < 2 ? Reputation::Legitimate : Reputation::Malicious));
  CHECK(summarize_reputation(tie).dominant == Reputation::Unknown);

  std::vector<FileRecord> none = {make_record(300, "x", d, {}, Reputation::Unknown)};
  CHECK(summarize_reputation(none).dominant == Reputation::Unknown);
}

TEST_CASE("signer consensus") {
  SplitMix64 rng(29);
  const auto d = masq::testing::random_digest(rng);
  std::vector<FileRecord> members;
  for (int i = 0; i < 45; ++i)
    members.push_back(make_record(i, "chrome.exe", d, masq::testing::verified("Google LLC"), Reputation::Legitimate));
  members.push_back(make_record(45, "chrome.exe", d, masq::testing::unsigned_file(), Reputation::Legitimate));
  const auto c = compute_signer_consensus(members);
  REQUIRE(c);
  CHECK(c->signer == "Google LLC");
  CHECK(c->count == 45);
  CHECK(c->total == 46);

  std::vector<FileRecord> unsigned_only = {make_record(1, "a", d, {}, Reputation::Legitimate)};
  CHECK_FALSE(compute_signer_consensus(unsigned_only));

  std::vector<FileRecord> mixed;
  for (int i = 0; i < 5; ++i)
    mixed.push_back(make_record(100 + i, "m", d, masq::testing::verified(i < 3 ? "A" : "B"), Reputation::Legitimate));
  const auto m = compute_signer_consensus(mixed);
  REQUIRE(m);
  CHECK(m->signer == "A");
  CHECK(m->fraction() == doctest::Approx(0.6));

  // Unverified signatures do not count toward consensus.
  std::vector<FileRecord> broken = {make_record(200, "b", d, masq::testing::verified("A"), Reputation::Legitimate)};
  broken[0].sig_facts.verify_ok = false;
  CHECK_FALSE(compute_signer_consensus(broken));
}

TEST_CASE("signer comparison") {
  CHECK(same_signer("Google  LLC", "google llc"));
  CHECK(same_signer(" TeamViewer GmbH ", "TeamViewer GmbH"));
  CHECK_FALSE(same_signer("TeamViewer GmbH", "Hartex LLC"));
  CHECK(normalize_signer("  Corel\t Corporation ") == "Corel Corporation");
}

TEST_CASE("centroid index matches clusters") {
  const auto model = cluster_corpus(planted_corpus(30));
  CHECK(model.index.size() == model.clusters.size());
  for (const auto& c : model.clusters) {
    const auto hits = model.index.query_radius(c.centroid, 0);
    REQUIRE_FALSE(hits.empty());
    CHECK(hits[0].id == static_cast<ItemId>(c.id));
  }
}
