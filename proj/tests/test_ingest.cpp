#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "diaconf/csv.hpp"
#include "diaconf/manifest.hpp"
#include "diaconf/rng.hpp"
#include "diaconf/rttm.hpp"

using namespace diaconf;

TEST_CASE("parse_rttm maps SPEAKER fields") {
  std::istringstream in(
      "SPEAKER conv1 1 0.50 2.00 <NA> <NA> spkA <NA> <NA>\n"
      "SPKR-INFO conv1 1 <NA> <NA> <NA> unknown spkA <NA>\n"
      "SPEAKER conv1 1 3.00 1.00 <NA> <NA> spkB <NA> <NA>\n");
  const RttmParseResult r = parse_rttm(in);
  REQUIRE(r.diarizations.size() == 1);
  const Diarization& d = r.diarizations.at("conv1");
  REQUIRE(d.segments().size() == 2);
  CHECK(d.segments()[0].interval == TimeInterval(0.5, 2.5));
  CHECK(d.segments()[0].speaker == "spkA");
  CHECK(d.segments()[1].interval == TimeInterval(3.0, 4.0));
  CHECK(r.warnings.empty());
}

TEST_CASE("parse_rttm on empty input") {
  std::istringstream in("");
  CHECK(parse_rttm(in).diarizations.empty());
}

TEST_CASE("parse_rttm errors carry line numbers") {
  {
    std::istringstream in("SPEAKER conv1 1 0.50\n");
    CHECK_THROWS_AS(parse_rttm(in), ParseError);
  }
  {
    std::istringstream in(
        "SPEAKER conv1 1 0.50 1.00 <NA> <NA> spkA <NA> <NA>\n"
        "SPEAKER conv1 1 abc 1.00 <NA> <NA> spkA <NA> <NA>\n");
    try {
      parse_rttm(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
}

TEST_CASE("parse_rttm rejects non-positive duration with a warning") {
  std::istringstream in(
      "SPEAKER conv1 1 0.50 0.00 <NA> <NA> spkA <NA> <NA>\n"
      "SPEAKER conv1 1 1.00 1.00 <NA> <NA> spkA <NA> <NA>\n");
  const RttmParseResult r = parse_rttm(in);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("line 1") != std::string::npos);
  CHECK(r.diarizations.at("conv1").segments().size() == 1);
}

TEST_CASE("parse_rttm accepts CRLF and 9-field records") {
  std::istringstream in("SPEAKER conv1 1 0.50 2.00 <NA> <NA> spkA <NA>\r\n");
  const RttmParseResult r = parse_rttm(in);
  CHECK(r.diarizations.at("conv1").segments().size() == 1);
}

TEST_CASE("RTTM round-trip") {
  std::vector<Segment> segs;
  segs.emplace_back("conv1", TimeInterval(0.5, 2.5), "spkA");
  segs.emplace_back("conv1", TimeInterval(2.5, 3.125), "spkB");
  segs.emplace_back("conv1", TimeInterval(4.0, 7.25), "spkA");
  const std::map<std::string, Diarization> d{{"conv1", Diarization("conv1", segs)}};

  std::ostringstream out;
  write_rttm(d, out);
  CHECK(out.str().find("SPEAKER conv1 1 0.500 2.000 <NA> <NA> spkA <NA> <NA>") !=
        std::string::npos);

  std::istringstream in(out.str());
  const RttmParseResult r = parse_rttm(in);
  const Diarization& back = r.diarizations.at("conv1");
  REQUIRE(back.segments().size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.segments()[i].speaker == d.at("conv1").segments()[i].speaker);
    CHECK(std::abs(back.segments()[i].interval.start -
                   d.at("conv1").segments()[i].interval.start) < 1e-3);
    CHECK(std::abs(back.segments()[i].interval.end -
                   d.at("conv1").segments()[i].interval.end) < 1e-3);
  }
}

TEST_CASE("write_rttm of empty map") {
  std::ostringstream out;
  write_rttm(std::map<std::string, Diarization>{}, out);
  CHECK(out.str().empty());
}

TEST_CASE("parse_embeddings_csv basics") {
  std::istringstream in(
      "conversation_id,start,end,e0,e1,e2\n"
      "conv1,0.250,1.750,0.1,0.2,0.3\n"
      "conv1,0.000,1.500,1,0,0\n");
  const EmbeddingTrack t = parse_embeddings_csv(in);
  CHECK(t.conversation_id() == "conv1");
  CHECK(t.dim() == 3);
  REQUIRE(t.size() == 2);
  // rows out of time order are sorted ascending
  CHECK(t.embeddings()[0].interval.start == 0.0);
  CHECK(t.embeddings()[1].interval.start == Catch::Approx(0.25));
}

TEST_CASE("parse_embeddings_csv rejects bad rows with line numbers") {
  {
    std::istringstream in(
        "conversation_id,start,end,e0,e1\n"
        "conv1,0,1.5,NaN,0.2\n");
    try {
      parse_embeddings_csv(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  {
    std::istringstream in(
        "conversation_id,start,end,e0,e1\n"
        "conv1,0,1.5,0,0\n");
    CHECK_THROWS_AS(parse_embeddings_csv(in), ParseError);
  }
  {
    std::istringstream in(
        "conversation_id,start,end,e0,e1\n"
        "conv1,2.0,1.5,1,0\n");
    CHECK_THROWS_AS(parse_embeddings_csv(in), ParseError);
  }
  {
    std::istringstream in(
        "conversation_id,start,end,e0,e1\n"
        "conv1,0,1.5,1,0\n"
        "conv2,2,3.5,1,0\n");
    CHECK_THROWS_AS(parse_embeddings_csv(in), ParseError);
  }
  {
    std::istringstream in(
        "conversation_id,start,end,e0,e1\n"
        "conv1,0,1.5,1,0,9\n");
    CHECK_THROWS_AS(parse_embeddings_csv(in), ParseError);
  }
}

TEST_CASE("embeddings CSV round-trip") {
  Rng rng(7);
  std::vector<Embedding> embs;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> v = rng.gaussian_vector(8);
    embs.emplace_back(std::move(v), TimeInterval(0.25 * i, 0.25 * i + 1.5));
  }
  const EmbeddingTrack t("convX", embs);
  std::ostringstream out;
  write_embeddings_csv(t, out);
  std::istringstream in(out.str());
  const EmbeddingTrack back = parse_embeddings_csv(in);
  REQUIRE(back.size() == t.size());
  CHECK(back.dim() == t.dim());
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(std::abs(back.embeddings()[i].interval.start -
                   t.embeddings()[i].interval.start) < 1e-3);
    for (std::size_t k = 0; k < t.dim(); ++k)
      CHECK(std::abs(back.embeddings()[i].vector[k] -
                     t.embeddings()[i].vector[k]) < 1e-9);
  }
}

TEST_CASE("confidence CSV parse, duplicates, round-trip") {
  std::istringstream in(
      "conversation_id,start,end,speaker,method,score\n"
      "conv1,0.000,1.000,spkA,cosine,0.730000000\n");
  const auto anns = parse_confidence_csv(in);
  REQUIRE(anns.size() == 1);
  CHECK(anns[0].score == Catch::Approx(0.73));
  CHECK(anns[0].method == Method::Cosine);

  std::istringstream dup(
      "conversation_id,start,end,speaker,method,score\n"
      "conv1,0.000,1.000,spkA,cosine,0.5\n"
      "conv1,0.000,1.000,spkA,cosine,0.6\n");
  CHECK_THROWS_AS(parse_confidence_csv(dup), ParseError);

  std::istringstream nan(
      "conversation_id,start,end,speaker,method,score\n"
      "conv1,0.000,1.000,spkA,cosine,inf\n");
  CHECK_THROWS_AS(parse_confidence_csv(nan), ParseError);

  std::vector<ConfidenceAnnotation> five;
  for (int i = 0; i < 5; ++i)
    five.push_back(ConfidenceAnnotation{
        Segment("conv1", TimeInterval(i, i + 0.5), "spk" + std::to_string(i % 2)),
        i % 2 ? Method::Local : Method::Silhouette, 0.1 * i - 0.2, false});
  std::ostringstream out;
  write_confidence_csv(five, out);
  std::istringstream back_in(out.str());
  const auto back = parse_confidence_csv(back_in);
  REQUIRE(back.size() == five.size());
  for (std::size_t i = 0; i < five.size(); ++i) {
    CHECK(back[i].method == five[i].method);
    CHECK(std::abs(back[i].score - five[i].score) < 1e-9);
    CHECK(back[i].segment.speaker == five[i].segment.speaker);
  }
}

TEST_CASE("basis sidecar CSV round-trip") {
  SpectralBasis basis;
  basis.conversation_id = "conv1";
  basis.num_speakers = 2;
  basis.windows = {TimeInterval(0, 1.5), TimeInterval(0.25, 1.75)};
  basis.rows = {{0.9, -0.1}, {-0.2, 0.8}};
  basis.labels = {0, 1};
  std::ostringstream out;
  write_basis_csv(basis, out);
  std::istringstream in(out.str());
  const SpectralBasis back = parse_basis_csv(in);
  CHECK(back.conversation_id == "conv1");
  CHECK(back.num_speakers == 2);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.labels == basis.labels);
  CHECK(std::abs(back.rows[1][0] - -0.2) < 1e-9);
}

TEST_CASE("manifest load/save and duplicate ids") {
  const auto dir = std::filesystem::temp_directory_path() / "diaconf_manifest_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "manifest.json");
    out << R"({"conversations":[
      {"id":"a","embeddings":"a.csv","hypothesis":"a.rttm","reference":"ra.rttm"},
      {"id":"b","embeddings":"sub/b.csv"}
    ]})";
  }
  const CorpusManifest m = CorpusManifest::load(dir / "manifest.json");
  REQUIRE(m.conversations().size() == 2);
  CHECK(m.conversations()[0].reference == "ra.rttm");
  CHECK(m.conversations()[1].hypothesis.empty());
  CHECK(m.resolve_path("sub/b.csv") == dir / "sub/b.csv");

  CHECK_THROWS_AS(CorpusManifest({{"x", "", "", ""}, {"x", "", "", ""}}), Error);

  m.save(dir / "copy.json");
  const CorpusManifest back = CorpusManifest::load(dir / "copy.json");
  CHECK(back.conversations().size() == 2);
  std::filesystem::remove_all(dir);
}
