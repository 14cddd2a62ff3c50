#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "rex/chemmask.hpp"
#include "rex/common.hpp"
#include "rex/corpus.hpp"
#include "rex/labeling.hpp"

using namespace rex;
using rex::test::TempDir;

namespace {

Document make_doc(const std::string& text,
                  std::vector<ReactionAnnotation> anns = {}) {
  Document doc;
  doc.doc_id = "doc";
  doc.text = text;
  doc.paragraphs = split_paragraphs(text, ParagraphMode::newline);
  doc.annotations = std::move(anns);
  return doc;
}

}  // namespace

TEST_CASE("formula grammar accepts element sequences only") {
  CHECK(parses_as_formula("NaCl"));
  CHECK(parses_as_formula("H2O"));
  CHECK(parses_as_formula("CO2"));
  CHECK(parses_as_formula("K2CO3"));
  CHECK(parses_as_formula("In"));  // stoplist handles it downstream
  CHECK_FALSE(parses_as_formula("water"));
  CHECK_FALSE(parses_as_formula("nacl"));
  CHECK_FALSE(parses_as_formula("Xz"));
  CHECK_FALSE(parses_as_formula("ABC"));
  CHECK_FALSE(parses_as_formula(""));
}

TEST_CASE("lexicon loads case-folded names and ignores comments") {
  TempDir tmp("lexicon");
  write_file(tmp.file("lex.dic"),
             "# solvents\nEthanol\nTHF  # cyclic ether\n\nacetic acid\n");
  ChemLexicon lex = load_lexicon(tmp.file("lex.dic"));
  CHECK(lex.names.count("ethanol") == 1);
  CHECK(lex.names.count("thf") == 1);
  CHECK(lex.names.count("acetic acid") == 1);
  CHECK(lex.names.size() == 3);
}

TEST_CASE("recognizer applies lexicon, morphology, then formula grammar") {
  ChemLexicon lex;
  lex.names = {"ethanol"};
  auto toks = tokenize(
      "Ethanol and NaCl in 4-nitrobenzaldehyde as described [CHEM] here");
  auto hits = recognize_chems(toks, lex);
  std::vector<std::string> hit_surfaces;
  for (std::size_t i : hits) hit_surfaces.push_back(toks[i].surface);
  // "in"/"as" parse as formulas but are stoplisted; [CHEM] is never re-hit
  CHECK(hit_surfaces ==
        std::vector<std::string>{"Ethanol", "NaCl", "4-nitrobenzaldehyde"});
}

TEST_CASE("masking preserves structure and remaps offsets") {
  std::string text =
      "A mixture of NaCl and ethanol was stirred.\nThe yield was 80 percent.\n";
  ChemLexicon lex;
  lex.names = {"ethanol"};
  Document doc = make_doc(text);
  doc.annotations.push_back(
      {"T1", {0, 42}, "REACTION", doc.text.substr(0, 42)});

  MaskResult res = mask_chems(doc, lex);
  CHECK(res.masked_token_count == 2);
  CHECK(res.document.text.find("NaCl") == std::string::npos);
  CHECK(res.document.text.find("[CHEM]") != std::string::npos);

  // same paragraph / sentence / token counts
  REQUIRE(res.document.paragraphs.size() == doc.paragraphs.size());
  for (std::size_t p = 0; p < doc.paragraphs.size(); ++p) {
    CHECK(res.document.paragraphs[p].sentences.size() ==
          doc.paragraphs[p].sentences.size());
    CHECK(res.document.paragraphs[p].tokens.size() ==
          doc.paragraphs[p].tokens.size());
  }

  // token spans index the rebuilt text
  for (const Paragraph& p : res.document.paragraphs) {
    for (const Token& t : p.tokens) {
      CHECK(res.document.text.substr(t.span.start, t.span.length()) ==
            t.surface);
    }
  }

  // annotation surface matches the remapped slice and still ends at "stirred."
  REQUIRE(res.document.annotations.size() == 1);
  const ReactionAnnotation& a = res.document.annotations[0];
  CHECK(res.document.text.substr(a.span.start, a.span.length()) == a.surface);
  CHECK(a.surface.find("was stirred.") != std::string::npos);
  CHECK(a.surface.find("[CHEM]") != std::string::npos);
}

TEST_CASE("masking leaves gold tags invariant") {
  std::string text =
      "Add NaCl to ethanol.\nStir the mixture well.\nDry the product.\n";
  ChemLexicon lex;
  lex.names = {"ethanol"};
  Document doc = make_doc(text);
  doc.annotations.push_back(
      {"T1", {0, 43}, "REACTION", doc.text.substr(0, 43)});

  TagSequence before = spans_to_tags(doc, Granularity::paragraph);
  MaskResult res = mask_chems(doc, lex);
  TagSequence after = spans_to_tags(res.document, Granularity::paragraph);
  CHECK(before.tags == after.tags);
}

TEST_CASE("masking is idempotent") {
  ChemLexicon lex;
  lex.names = {"ethanol"};
  Document doc =
      make_doc("Dissolve NaCl in ethanol at rt.\nFilter and dry.\n");
  MaskResult once = mask_chems(doc, lex);
  MaskResult twice = mask_chems(once.document, lex);
  CHECK(twice.masked_token_count == 0);
  CHECK(twice.document.text == once.document.text);
}

TEST_CASE("endpoints inside a replaced token snap outward") {
  // annotation starts mid-"NaCl": the masked span must cover all of [CHEM]
  std::string text = "mix NaCl now\n";
  Document doc = make_doc(text);
  doc.annotations.push_back({"T1", {6, 12}, "REACTION", text.substr(6, 6)});
  ChemLexicon lex;
  MaskResult res = mask_chems(doc, lex);
  REQUIRE(res.document.annotations.size() == 1);
  const ReactionAnnotation& a = res.document.annotations[0];
  CHECK(res.document.text == "mix [CHEM] now\n");
  CHECK(a.span.start == 4);
  CHECK(res.document.text.substr(a.span.start, a.span.length()) ==
        "[CHEM] now");
}
