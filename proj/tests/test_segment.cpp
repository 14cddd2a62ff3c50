#include <string>
#include <vector>

#include "doctest.h"
#include "rex/segment.hpp"

using namespace rex;

namespace {

std::vector<std::string> surfaces(const std::vector<Token>& toks) {
  std::vector<std::string> out;
  for (const auto& t : toks) out.push_back(t.surface);
  return out;
}

}  // namespace

TEST_CASE("tokenize keeps chemical names and measurements intact") {
  auto toks = tokenize("4-nitrobenzaldehyde (13.2 mmol)");
  REQUIRE(toks.size() == 5);
  CHECK(surfaces(toks) ==
        std::vector<std::string>{"4-nitrobenzaldehyde", "(", "13.2", "mmol",
                                 ")"});
  CHECK(toks[0].kind == TokenKind::chemical);
  CHECK(toks[1].kind == TokenKind::punctuation);
  CHECK(toks[2].kind == TokenKind::number);
  CHECK(toks[3].kind == TokenKind::unit);
  CHECK(toks[4].kind == TokenKind::punctuation);
  CHECK(toks[0].span == CharSpan{0, 19});
  CHECK(toks[2].span == CharSpan{21, 25});
}

TEST_CASE("tokenize splits trailing sentence period") {
  auto toks = tokenize("NaCl.");
  REQUIRE(toks.size() == 2);
  CHECK(toks[0].surface == "NaCl");
  CHECK(toks[1].surface == ".");
  CHECK(toks[1].kind == TokenKind::punctuation);
}

TEST_CASE("tokenize handles degree sign and mask token") {
  auto toks = tokenize("heat to 80 \xC2\xB0"
                       "C with [CHEM] added");
  auto surf = surfaces(toks);
  REQUIRE(surf.size() == 7);
  CHECK(surf == std::vector<std::string>{"heat", "to", "80",
                                         "\xC2\xB0"
                                         "C",
                                         "with", "[CHEM]", "added"});
  CHECK(toks[2].kind == TokenKind::number);
  CHECK(toks[3].kind == TokenKind::unit);
  CHECK(toks[5].kind == TokenKind::chemical);
}

TEST_CASE("token spans index the original text") {
  std::string text = "Add 2.5 g of NaCl.";
  for (const Token& t : tokenize(text)) {
    CHECK(text.substr(t.span.start, t.span.length()) == t.surface);
  }
}

TEST_CASE("sentence splitting respects units and abbreviations") {
  auto two = split_sentences("Stir for 2 h. Cool to rt.");
  REQUIRE(two.size() == 2);
  CHECK(two[0].span == CharSpan{0, 14});
  CHECK(two[1].span == CharSpan{14, 25});

  auto one = split_sentences("Add 2.5 g of NaCl.");
  REQUIRE(one.size() == 1);
  CHECK(one[0].span == CharSpan{0, 18});

  // abbreviation guard: "approx." does not end the sentence
  auto approx = split_sentences("approx. 5 g were added. Then stir.");
  CHECK(approx.size() == 2);
}

TEST_CASE("sentence spans tile the input") {
  std::string text = "First step. Second step! Third? Done.";
  auto sents = split_sentences(text);
  REQUIRE(!sents.empty());
  CHECK(sents.front().span.start == 0);
  CHECK(sents.back().span.end == text.size());
  for (std::size_t i = 1; i < sents.size(); ++i) {
    CHECK(sents[i].span.start == sents[i - 1].span.end);
  }
}

TEST_CASE("paragraph modes split on newline runs") {
  std::string text = "A\nB\n\nC";
  auto nl = split_paragraphs(text, ParagraphMode::newline);
  REQUIRE(nl.size() == 3);
  CHECK(nl[0].span == CharSpan{0, 1});
  CHECK(nl[1].span == CharSpan{2, 3});
  CHECK(nl[2].span == CharSpan{5, 6});

  auto bl = split_paragraphs(text, ParagraphMode::blankline);
  REQUIRE(bl.size() == 2);
  CHECK(bl[0].span == CharSpan{0, 3});
  CHECK(bl[1].span == CharSpan{5, 6});
}

TEST_CASE("paragraphs carry sentences and tokens with absolute offsets") {
  std::string text = "Add NaCl. Stir well.\n\nFilter the solid.\n";
  auto paras = split_paragraphs(text, ParagraphMode::blankline);
  REQUIRE(paras.size() == 2);
  CHECK(paras[0].sentences.size() == 2);
  CHECK(paras[1].sentences.size() == 1);
  for (const Paragraph& p : paras) {
    CHECK(p.span.end <= text.size());
    for (const Token& t : p.tokens) {
      CHECK(t.span.start >= p.span.start);
      CHECK(t.span.end <= p.span.end);
      CHECK(text.substr(t.span.start, t.span.length()) == t.surface);
    }
  }
  // whitespace-only segments are dropped
  CHECK(split_paragraphs("\n \n  \n", ParagraphMode::newline).empty());
}

TEST_CASE("looks_chemical morphology") {
  CHECK(looks_chemical("4-nitrobenzaldehyde"));
  CHECK(looks_chemical("2,4-dichlorophenol"));
  CHECK(looks_chemical("tert-butanol"));
  CHECK(looks_chemical("(2S)-alaninol"));
  CHECK_FALSE(looks_chemical("water"));
  CHECK_FALSE(looks_chemical("stirred"));
  CHECK_FALSE(looks_chemical("13.2"));
  CHECK_FALSE(looks_chemical("3-4"));  // no letters
}

TEST_CASE("unit words") {
  CHECK(is_unit_word("mmol"));
  CHECK(is_unit_word("mL"));
  CHECK(is_unit_word("h"));
  CHECK(is_unit_word("rt"));
  CHECK_FALSE(is_unit_word("flask"));
}

TEST_CASE("paragraph mode parsing") {
  CHECK(paragraph_mode_from_string("newline") == ParagraphMode::newline);
  CHECK(paragraph_mode_from_string("blankline") == ParagraphMode::blankline);
  CHECK_THROWS(paragraph_mode_from_string("page"));
}
