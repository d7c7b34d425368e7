#include <catch_amalgamated.hpp>

#include <sstream>

#include "reference_corpus.hpp"
#include "pdfcorpus/corpus_model.hpp"
#include "pdfcorpus/error.hpp"
#include "test_util.hpp"

using namespace pdfcorpus;

namespace {

std::span<const std::uint8_t> bytes_of(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

DocumentRecord ok_record(const std::string& tag, std::uint32_t pages) {
  DocumentRecord r;
  r.id = derive_document_id(tag);
  r.source_url = "https://www.house.gov/" + tag + ".pdf";
  r.base_url = "house.gov";
  r.file_size = 123;
  r.page_count = pages;
  r.status = DocumentStatus::ok;
  r.fetch_timestamp = "20190101000000";
  return r;
}

}  // namespace

// Digests below were produced with Python's hashlib.
TEST_CASE("sha-256 ids match reference digests") {
  CHECK(derive_document_id(std::string_view{}).hex() ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(derive_document_id("abc").hex() == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(derive_document_id("abc") == derive_document_id("abc"));
  CHECK(sha256_hex(bytes_of("abc")) == derive_document_id("abc").hex());
}

TEST_CASE("sha-1 base32 digest matches the CDX form") {
  // base64.b32encode(hashlib.sha1(b"abc").digest())
  CHECK(sha1_base32(bytes_of("abc")) == "VGMT4NSHA2AWVOR6EVYXQUGCNSONBWE5");
  const auto pdf = fixtures::read_file(fixtures::data_dir() / "pdf" / "one_page.pdf");
  CHECK(sha1_base32(pdf) == "OTTTPX5GWRWF4DDSBAXMVEGA2I6OE4MB");
}

TEST_CASE("document id hex round trip and rejection") {
  const auto id = derive_document_id("x");
  CHECK(DocumentId::from_hex(id.hex()) == id);
  std::string upper = id.hex();
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  CHECK(DocumentId::from_hex(upper) == id);
  CHECK_THROWS_AS(DocumentId::from_hex("abc"), Error);
  CHECK_THROWS_AS(DocumentId::from_hex(std::string(64, 'g')), Error);
}

TEST_CASE("derive_document_id is pure over random inputs") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::uint8_t> buf(uniform_index(rng, 300));
    for (auto& b : buf) b = static_cast<std::uint8_t>(rng());
    CHECK(derive_document_id(buf) == derive_document_id(buf));
  }
}

TEST_CASE("record validation") {
  auto r = ok_record("a", 3);
  CHECK_NOTHROW(validate_record(r));

  auto no_pages = r;
  no_pages.page_count.reset();
  CHECK_THROWS_AS(validate_record(no_pages), Error);

  auto enc = r;
  enc.status = DocumentStatus::encrypted;
  CHECK_THROWS_AS(validate_record(enc), Error);
  enc.page_count.reset();
  CHECK_NOTHROW(validate_record(enc));

  auto bad_ts = r;
  bad_ts.fetch_timestamp = "2019";
  CHECK_THROWS_AS(validate_record(bad_ts), Error);

  auto bad_base = r;
  bad_base.base_url = "senate.gov";
  CHECK_THROWS_AS(validate_record(bad_base), Error);
}

TEST_CASE("make_manifest sorts by id and rejects duplicates") {
  std::vector<DocumentRecord> recs = {ok_record("c", 1), ok_record("a", 2), ok_record("b", 3)};
  const auto m = make_manifest(recs);
  REQUIRE(m.records.size() == 3);
  CHECK(std::is_sorted(m.records.begin(), m.records.end(),
                       [](const auto& x, const auto& y) { return x.id < y.id; }));
  CHECK(m.find(derive_document_id("b"))->page_count == 3u);
  CHECK(m.find(derive_document_id("zzz")) == nullptr);

  // corpus id depends on content, not input order
  std::vector<DocumentRecord> reversed(recs.rbegin(), recs.rend());
  CHECK(make_manifest(reversed).corpus_id == m.corpus_id);
  CHECK(make_manifest(reversed) == m);

  recs.push_back(ok_record("a", 2));
  CHECK_THROWS_AS(make_manifest(recs), Error);
}

TEST_CASE("created_at is the latest fetch timestamp") {
  auto a = ok_record("a", 1);
  auto b = ok_record("b", 1);
  a.fetch_timestamp = "20200101000000";
  b.fetch_timestamp = "20210101000000";
  CHECK(make_manifest({a, b}).created_at == "20210101000000");
  a.fetch_timestamp.reset();
  b.fetch_timestamp.reset();
  CHECK_FALSE(make_manifest({a, b}).created_at.has_value());
}

TEST_CASE("manifest round trip through jsonl") {
  const auto manifest = fixtures::reference_manifest();
  std::stringstream buf;
  write_manifest(manifest, buf);
  const auto text = buf.str();
  const auto back = read_manifest(buf);
  CHECK(back == manifest);

  std::stringstream again;
  write_manifest(back, again);
  CHECK(again.str() == text);

  fixtures::TempDir dir;
  write_manifest(manifest, dir / "m.jsonl");
  CHECK(read_manifest(dir / "m.jsonl") == manifest);
}

TEST_CASE("manifest with absent optionals round trips") {
  auto r = ok_record("q", 1);
  r.agency.reset();
  r.fetch_timestamp.reset();
  auto enc = ok_record("e", 1);
  enc.page_count.reset();
  enc.status = DocumentStatus::encrypted;
  enc.agency = "Food and Drug Administration";
  const auto m = make_manifest({r, enc});
  std::stringstream buf;
  write_manifest(m, buf);
  CHECK(buf.str().find("null") != std::string::npos);
  CHECK(read_manifest(buf) == m);
}

TEST_CASE("malformed manifest lines are rejected") {
  auto parse = [](const std::string& text) {
    std::stringstream in(text);
    return read_manifest(in);
  };
  CHECK_THROWS_AS(parse("not json\n"), Error);
  CHECK_THROWS_AS(parse("{\"id\": \"00\"}\n"), Error);
  std::stringstream good;
  write_manifest(make_manifest({ok_record("a", 1)}), good);
  std::string line = good.str();
  line.replace(line.find("\"ok\""), 4, "\"weird\"");
  CHECK_THROWS_AS(parse(line), Error);
  try {
    parse("[1,2]\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadFormat);
  }
}
