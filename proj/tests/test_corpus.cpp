#include <fstream>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "rex/common.hpp"
#include "rex/corpus.hpp"

using namespace rex;
using rex::test::TempDir;

namespace {

const std::string kText =
    "A mixture of 4-nitrobenzaldehyde (2.0 g) was stirred.\n"
    "The product was dried.\n";

}  // namespace

TEST_CASE("parse_ann reads T-lines and validates the surface") {
  std::string ann =
      "T1\tREACTION 0 53\tA mixture of 4-nitrobenzaldehyde (2.0 g) was "
      "stirred.\n"
      "#1\tAnnotatorNotes T1\tchecked\n"
      "R1\tCoref Arg1:T1 Arg2:T1\n";
  auto spans = parse_ann(ann, kText);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].id == "T1");
  CHECK(spans[0].label == "REACTION");
  CHECK(spans[0].span == CharSpan{0, 53});
  CHECK(spans[0].surface == kText.substr(0, 53));
}

TEST_CASE("parse_ann surface field stores newlines as spaces") {
  std::string text = "step one\nstep two\n";
  std::string ann = "T1\tREACTION 0 17\tstep one step two\n";
  auto spans = parse_ann(ann, text);
  REQUIRE(spans.size() == 1);
  // the stored surface is the raw document slice
  CHECK(spans[0].surface == "step one\nstep two");
}

TEST_CASE("parse_ann errors carry line numbers and ids") {
  CHECK_THROWS_WITH_AS(parse_ann("T1 no tabs here", kText),
                       doctest::Contains("ann line 1"), ParseError);
  CHECK_THROWS_WITH_AS(parse_ann("T1\tREACTION zero 5\tA mix", kText),
                       doctest::Contains("not integers"), ParseError);
  CHECK_THROWS_WITH_AS(parse_ann("T1\tREACTION 9 5\tx", kText),
                       doctest::Contains("T1"), DataError);
  CHECK_THROWS_WITH_AS(parse_ann("T1\tREACTION 0 9999\tx", kText),
                       doctest::Contains("exceeds document length"), DataError);
  CHECK_THROWS_WITH_AS(parse_ann("T1\tREACTION 0 9\twrong txt", kText),
                       doctest::Contains("does not match"), DataError);
}

TEST_CASE("parse_ann label filter") {
  std::string ann =
      "T1\tREACTION 0 9\tA mixture\n"
      "T2\tCOMPOUND 13 32\t4-nitrobenzaldehyde\n";
  AnnParseOptions opts;
  opts.accept_labels = {"REACTION"};
  auto spans = parse_ann(ann, kText, opts);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].id == "T1");
  // empty accept set keeps everything
  CHECK(parse_ann(ann, kText).size() == 2);
}

TEST_CASE("write_ann round trips through parse_ann") {
  std::vector<ReactionAnnotation> anns = {
      {"T2", {54, 76}, "REACTION", kText.substr(54, 22)},
      {"T1", {0, 53}, "REACTION", kText.substr(0, 53)},
  };
  std::string rendered = write_ann(anns);
  auto back = parse_ann(rendered, kText);
  REQUIRE(back.size() == 2);
  // write_ann sorts by start offset
  CHECK(back[0].id == "T1");
  CHECK(back[1].id == "T2");
  CHECK(back[0].span == CharSpan{0, 53});
  CHECK(back[1].span == CharSpan{54, 76});
}

TEST_CASE("load_document_pair and load_corpus_dir") {
  TempDir tmp("corpus_dir");
  write_file(tmp.file("docB.txt"), kText);
  write_file(tmp.file("docB.ann"), "T1\tREACTION 0 53\t" + kText.substr(0, 53) + "\n");
  write_file(tmp.file("docA.txt"), "No reactions here.\n");
  write_file(tmp.file("notes.md"), "ignored\n");

  Corpus corpus = load_corpus_dir(tmp.str());
  REQUIRE(corpus.documents.size() == 2);
  CHECK(corpus.documents[0].doc_id == "docA");
  CHECK(corpus.documents[1].doc_id == "docB");
  CHECK(corpus.documents[0].annotations.empty());
  REQUIRE(corpus.documents[1].annotations.size() == 1);
  CHECK(corpus.documents[1].paragraphs.size() == 2);
  CHECK(corpus.split_assignment.at("docA") == Split::train);
  CHECK(corpus.find("docB") != nullptr);
  CHECK(corpus.find("nope") == nullptr);
}

TEST_CASE("load_document_pair rejects invalid utf8 and bad ann files") {
  TempDir tmp("corpus_bad");
  write_file(tmp.file("bad.txt"), "ok text\xFF\n");
  CHECK_THROWS_WITH_AS(
      load_document_pair(tmp.file("bad.txt"), std::nullopt),
      doctest::Contains("not valid UTF-8"), DataError);

  write_file(tmp.file("doc.txt"), kText);
  write_file(tmp.file("doc.ann"), "T1\tREACTION 0 9999\tx\n");
  CHECK_THROWS_WITH_AS(
      load_document_pair(tmp.file("doc.txt"),
                         std::optional<std::string>(tmp.file("doc.ann"))),
      doctest::Contains("doc.ann"), DataError);
}

TEST_CASE("assign_splits is deterministic and respects test docs") {
  Corpus corpus;
  for (int i = 0; i < 10; ++i) {
    Document d;
    d.doc_id = "doc" + std::to_string(i);
    corpus.documents.push_back(d);
    corpus.split_assignment[d.doc_id] = Split::train;
  }
  corpus.split_assignment["doc9"] = Split::test;

  Corpus again = corpus;
  assign_splits(corpus, 0.3, 11);
  assign_splits(again, 0.3, 11);
  CHECK(corpus.split_assignment == again.split_assignment);

  std::size_t val = 0;
  for (const auto& [id, s] : corpus.split_assignment) {
    if (s == Split::validation) ++val;
  }
  // floor(0.3 * 9 eligible) = 2
  CHECK(val == 2);
  CHECK(corpus.split_assignment.at("doc9") == Split::test);
  CHECK(documents_in_split(corpus, Split::validation).size() == 2);
  CHECK(documents_in_split(corpus, Split::train).size() == 7);

  Corpus other = again;
  assign_splits(other, 0.3, 12);
  bool same = corpus.split_assignment == other.split_assignment;
  // a different seed is allowed to coincide but should usually differ
  CHECK((corpus.split_assignment.size() == other.split_assignment.size()));
  (void)same;

  CHECK_THROWS_AS(assign_splits(corpus, 1.5, 1), ConfigError);
}
