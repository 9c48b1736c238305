#include <fstream>
#include <functional>
#include <sstream>

#include "doctest.h"
#include "masq/cli.hpp"
#include "masq/pipeline.hpp"
#include "support/scenarios.hpp"

using namespace masq;
using namespace masq::testing;
using nlohmann::json;

namespace {

const std::string kAdobeLine =
    R"({"v":1,"sha256":"70ee341243edb68d3e1ee6100a96a859212340a72d1dceab93e65de56856ed7b",)"
    R"("filename":"AIDE.dll","tlsh":"T100067D87E1E221DCC17B803486AB9713FA71385923109AF797C0EA353A37FD06576B96",)"
    R"("signer":"Adobe","is_signed":true,"verify_ok":true,"chain_trusted":true,"within_validity":true,)"
    R"("revoked":false,"stolen":false,"reputation":"legitimate"})";

PipelineErrc manifest_error(const std::string& line) {
  try {
    (void)parse_manifest_line(line);
  } catch (const PipelineError& e) {
    return e.code();
  }
  FAIL("accepted: " << line);
  return PipelineErrc::Io;
}

std::string edit(const std::string& line, const std::function<void(json&)>& f) {
  auto j = json::parse(line);
  f(j);
  return j.dump();
}

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "masq");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("manifest line with the printed cluster row") {
  const auto r = parse_manifest_line(kAdobeLine);
  CHECK(r.sig_facts.signer == "Adobe");
  CHECK(r.filename == "AIDE.dll");
  CHECK(r.reputation == Reputation::Legitimate);
  CHECK(classify_signature(r.sig_facts, {}) == SignatureState::SignedVerified);
  CHECK(format_digest(r.digest) ==
        "T100067D87E1E221DCC17B803486AB9713FA71385923109AF797C0EA353A37FD06576B96");
  CHECK(record_from_json(record_to_json(r)) == r);
}

TEST_CASE("manifest schema violations") {
  CHECK(manifest_error("not json") == PipelineErrc::SchemaViolation);
  CHECK(manifest_error("[1,2]") == PipelineErrc::SchemaViolation);
  CHECK(manifest_error(edit(kAdobeLine, [](json& j) { j["path"] = "x.bin"; })) ==
        PipelineErrc::SchemaViolation);
  CHECK(manifest_error(edit(kAdobeLine, [](json& j) { j.erase("tlsh"); })) ==
        PipelineErrc::SchemaViolation);
  CHECK(manifest_error(edit(kAdobeLine, [](json& j) { j["v"] = 2; })) ==
        PipelineErrc::SchemaViolation);
  CHECK(manifest_error(edit(kAdobeLine, [](json& j) { j["extra"] = 1; })) ==
        PipelineErrc::SchemaViolation);
  CHECK(manifest_error(edit(kAdobeLine, [](json& j) { j.erase("revoked"); })) ==
        PipelineErrc::SchemaViolation);
  CHECK(manifest_error(edit(kAdobeLine, [](json& j) { j["revoked"] = "no"; })) ==
        PipelineErrc::SchemaViolation);
  CHECK(manifest_error(edit(kAdobeLine, [](json& j) { j["reputation"] = "good"; })) ==
        PipelineErrc::SchemaViolation);
  CHECK(manifest_error(edit(kAdobeLine, [](json& j) { j["sha256"] = "ABC"; })) ==
        PipelineErrc::SchemaViolation);
  CHECK(manifest_error(edit(kAdobeLine, [](json& j) { j.erase("sha256"); })) ==
        PipelineErrc::SchemaViolation);
  CHECK(manifest_error(edit(kAdobeLine, [](json& j) { j["cert_ids"] = {"zz"}; })) ==
        PipelineErrc::SchemaViolation);
  CHECK(manifest_error(edit(kAdobeLine, [](json& j) {
          j["is_signed"] = false;
        })) == PipelineErrc::SchemaViolation);
  CHECK(manifest_error(edit(kAdobeLine, [](json& j) { j["tlsh"] = "T1ZZ"; })) ==
        PipelineErrc::DigestError);
}

TEST_CASE("manifest files") {
  TempDir dir;
  write(dir / "empty.jsonl", "");
  CHECK(ingest_manifest(dir / "empty.jsonl").empty());

  write(dir / "two.jsonl", kAdobeLine + "\n\n" + kAdobeLine + "\r\n");
  CHECK(ingest_manifest(dir / "two.jsonl").size() == 2);

  write(dir / "bad.jsonl", kAdobeLine + "\n{\"v\":1}\n");
  try {
    ingest_manifest(dir / "bad.jsonl");
    FAIL("no throw");
  } catch (const PipelineError& e) {
    CHECK(e.code() == PipelineErrc::SchemaViolation);
    CHECK(e.line() == 2);
  }

  CHECK_THROWS_AS(ingest_manifest(dir / "missing.jsonl"), PipelineError);
}

TEST_CASE("manifest path form") {
  TempDir dir;
  const auto cert = read_bytes(data_dir() / "cert" / "selfsigned.der");
  auto bytes = SplitMix64(60).bytes(9000);
  bytes.insert(bytes.begin() + 3000, cert.begin(), cert.end());
  {
    std::ofstream out(dir / "remnant.bin", std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  const std::string line =
      R"({"v":1,"filename":"java.exe","path":"remnant.bin","is_signed":false,"verify_ok":false,)"
      R"("chain_trusted":false,"within_validity":false,"revoked":false,"stolen":false,"reputation":"malicious"})";
  write(dir / "m.jsonl", line + "\n");
  const auto entries = ingest_manifest_entries(dir / "m.jsonl");
  REQUIRE(entries.size() == 1);
  const auto& r = entries[0].record;
  CHECK(r.sha256 == sha256_hex(bytes));
  CHECK(r.digest == compute_digest(bytes));
  CHECK(r.sig_facts.x509_present);
  CHECK(classify_signature(r.sig_facts, {}) == SignatureState::UnsignedContainsX509);
  REQUIRE(entries[0].path);

  auto wrong = json::parse(line);
  wrong["sha256"] = std::string(64, '0');
  write(dir / "w.jsonl", wrong.dump() + "\n");
  CHECK_THROWS_AS(ingest_manifest(dir / "w.jsonl"), PipelineError);
}

TEST_CASE("sha256") {
  const std::string abc = "abc";
  CHECK(sha256_hex({reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()}) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex({}) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("model round trip") {
  SplitMix64 rng(61);
  std::vector<FileRecord> corpus;
  for (int f = 0; f < 5; ++f) {
    const auto c = random_digest(rng);
    for (int i = 0; i < 4; ++i) {
      auto facts = i == 3 ? unsigned_file(i % 2) : verified("Vendor \"" + std::to_string(f) + "\"");
      facts.cert_ids = {"ab:cd"};
      corpus.push_back(make_record(f * 10 + i, "f" + std::to_string(f) + ".exe", nudge(c, rng, i + 1), facts,
                                   i == 2 ? Reputation::Malicious : Reputation::Legitimate, "src"));
    }
  }
  auto model = cluster_corpus(corpus);
  model.created = "2026-01-01T00:00:00Z";
  REQUIRE(model.clusters.size() == 5);

  const auto text = serialize_model(model);
  CHECK(serialize_model(deserialize_model(text)) == text);

  TempDir dir;
  save_model(model, dir / "model.jsonl");
  const auto loaded = load_model(dir / "model.jsonl");
  CHECK(loaded.threshold == model.threshold);
  CHECK(loaded.created == model.created);
  CHECK(loaded.clusters == model.clusters);
  CHECK(loaded.index.items() == model.index.items());
}

TEST_CASE("corrupt and future model files") {
  SplitMix64 rng(62);
  const auto d = random_digest(rng);
  auto model = cluster_corpus({make_record(1, "a", d, verified("A"), Reputation::Legitimate),
                               make_record(2, "b", nudge(d, rng, 2), verified("A"), Reputation::Legitimate)});
  const auto text = serialize_model(model);

  auto code_of = [](std::string_view t) {
    try {
      (void)deserialize_model(t);
    } catch (const PipelineError& e) {
      return e.code();
    }
    return PipelineErrc::Io;
  };
  CHECK(code_of(text.substr(0, text.size() / 2)) == PipelineErrc::CorruptModel);
  CHECK(code_of(text.substr(0, text.rfind('\n', text.size() - 2) + 1)) == PipelineErrc::CorruptModel);
  CHECK(code_of("") == PipelineErrc::CorruptModel);

  auto first_nl = text.find('\n');
  auto header = json::parse(text.substr(0, first_nl));
  header["v"] = 2;
  CHECK(code_of(header.dump() + text.substr(first_nl)) == PipelineErrc::VersionMismatch);

  // A member moved to a different reputation breaks the stored summary.
  std::string tampered = text;
  const auto member_pos = tampered.find("\"member\"");
  REQUIRE(member_pos != std::string::npos);
  const auto rep_pos = tampered.find("\"reputation\":\"legitimate\"", member_pos);
  REQUIRE(rep_pos != std::string::npos);
  tampered.replace(rep_pos, 25, "\"reputation\":\"malicious\"");
  CHECK(code_of(tampered) == PipelineErrc::CorruptModel);
}

TEST_CASE("alerts round trip") {
  const auto out = run_scenario(combined_scenario());
  auto alerts = out.scan;
  alerts.insert(alerts.end(), out.audit.begin(), out.audit.end());
  REQUIRE_FALSE(alerts.empty());
  CHECK(parse_alerts(alerts_text(alerts)) == alerts);
  for (const auto& a : alerts) CHECK(alert_from_json(alert_to_json(a)) == a);
}

TEST_CASE("forge modes") {
  SplitMix64 rng(70);
  const auto base = make_record(70, "tool.exe", random_digest(rng), verified("Vendor"),
                                Reputation::Legitimate, "customer");
  const auto stripped = forge_masquerade(base, ForgeMode::StripSignature);
  CHECK(classify_signature(stripped.sig_facts, {}) == SignatureState::UnsignedNoSignature);
  CHECK(stripped.reputation == Reputation::Malicious);
  CHECK(stripped.digest == base.digest);
  CHECK(stripped.sha256 != base.sha256);
  CHECK(is_valid_sha256(stripped.sha256));

  const auto remnant = forge_masquerade(base, ForgeMode::X509Remnant);
  CHECK(classify_signature(remnant.sig_facts, {}) == SignatureState::UnsignedContainsX509);
  CHECK(remnant.sig_facts.signer == "Vendor");

  try {
    forge_masquerade(base, ForgeMode::CorruptBody);
    FAIL("no throw");
  } catch (const PipelineError& e) {
    CHECK(e.code() == PipelineErrc::MissingRawBytes);
  }

  const auto bytes = SplitMix64(71).bytes(8192);
  const auto corrupted = forge_masquerade(base, ForgeMode::CorruptBody, bytes);
  CHECK(corrupted.sha256 == sha256_hex(corrupt_body(bytes)));
  CHECK(distance(compute_digest(bytes), corrupted.digest) <= 45);
  CHECK(classify_signature(corrupted.sig_facts, {}) == SignatureState::SignedNotVerified);

  for (auto m : {ForgeMode::StripSignature, ForgeMode::CorruptBody, ForgeMode::X509Remnant})
    CHECK(forge_mode_from_string(to_string(m)) == m);
  CHECK_FALSE(forge_mode_from_string("nope"));

  const auto marked = corrupt_body(bytes);
  CHECK(marked.size() == bytes.size() + 256);
  CHECK(std::equal(forge_marker().begin(), forge_marker().end(), marked.begin() + 2048));
}

TEST_CASE("atomic write replaces content") {
  TempDir dir;
  write_file_atomic(dir / "f.txt", "one");
  write_file_atomic(dir / "f.txt", "two");
  CHECK(read_text(dir / "f.txt") == "two");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++files;
  CHECK(files == 1);
}

TEST_CASE("cli dist") {
  const auto& p = published_pairs()[0];
  auto r = cli({"dist", p.file, p.cluster});
  CHECK(r.code == 0);
  CHECK(r.out == "8\n");
  r = cli({"dist", "--no-length", p.file, p.cluster});
  CHECK(r.code == 0);
  r = cli({"dist", "T1XYZ", p.cluster});
  CHECK(r.code == 2);
  r = cli({});
  CHECK(r.code == 2);
  r = cli({"frobnicate"});
  CHECK(r.code == 2);
}

TEST_CASE("cli digest") {
  auto r = cli({"digest", (data_dir() / "digest" / "rand_8192.bin").string()});
  CHECK(r.code == 0);
  CHECK(r.out == "T140F1AFBFA7B45D3C1E4631C9AF1F942D51F6B04F8185079E2C49D9ED880AA34AC714F9\n");
  r = cli({"digest", (data_dir() / "digest" / "zeros_49.bin").string()});
  CHECK(r.code == 1);
  r = cli({"digest", "/nonexistent/file"});
  CHECK(r.code == 1);
}

TEST_CASE("cli build, scan, audit and forge") {
  const auto s = combined_scenario();
  TempDir dir;
  write(dir / "corpus.jsonl", manifest_text(s.corpus));
  write(dir / "feed.jsonl", manifest_text(s.feed));
  std::string bl_text;
  for (const auto& id : s.blocklist.malware_cert_ids) bl_text += "malware:" + id + "\n";
  for (const auto& id : s.blocklist.stolen_cert_ids) bl_text += "stolen:" + id + "\n";
  write(dir / "bl.txt", bl_text);

  const auto model_path = (dir / "model.jsonl").string();
  auto r = cli({"build", "--corpus", (dir / "corpus.jsonl").string(), "--out", model_path});
  REQUIRE(r.code == 0);
  const auto model = cluster_corpus(s.corpus);
  CHECK(r.out == "records: " + std::to_string(s.corpus.size()) + "\nclusters: " +
                     std::to_string(model.clusters.size()) + "\n");

  const auto expected = run_scenario(s);
  r = cli({"scan", "--model", model_path, "--feed", (dir / "feed.jsonl").string(), "--blocklist",
           (dir / "bl.txt").string(), "--out", (dir / "alerts.jsonl").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("alerts: " + std::to_string(expected.scan.size()) + "\n") != std::string::npos);
  const auto scanned = parse_alerts(read_text(dir / "alerts.jsonl"));
  CHECK(scanned == expected.scan);

  r = cli({"audit", "--model", model_path, "--out", (dir / "audit.jsonl").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out == "unsigned-minority: 1\nreputation-split: 1\nalerts: 2\n");
  CHECK(kinds_of(parse_alerts(read_text(dir / "audit.jsonl"))) == sorted(s.expected_audit));

  r = cli({"forge", "--in", (dir / "corpus.jsonl").string(), "--mode", "strip_signature", "--out",
           (dir / "forged.jsonl").string()});
  REQUIRE(r.code == 0);
  const auto forged = ingest_manifest(dir / "forged.jsonl");
  CHECK(forged.size() == s.corpus.size());
  for (const auto& f : forged) CHECK(f.reputation == Reputation::Malicious);

  r = cli({"forge", "--in", (dir / "corpus.jsonl").string(), "--mode", "corrupt_body", "--out",
           (dir / "forged2.jsonl").string()});
  CHECK(r.code == 1);
  r = cli({"forge", "--in", (dir / "corpus.jsonl").string(), "--mode", "bogus", "--out",
           (dir / "forged3.jsonl").string()});
  CHECK(r.code == 2);

  r = cli({"scan", "--model", (dir / "nope.jsonl").string(), "--feed", (dir / "feed.jsonl").string(),
           "--out", (dir / "x.jsonl").string()});
  CHECK(r.code == 1);
  r = cli({"audit", "--model", model_path, "--majority-min", "1.5", "--out", (dir / "y.jsonl").string()});
  CHECK(r.code == 2);
}
