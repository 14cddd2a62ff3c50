#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "rex/common.hpp"
#include "rex/eval.hpp"

using namespace rex;

namespace {

std::vector<ExtractedSpan> spans(
    std::initializer_list<std::pair<std::size_t, std::size_t>> xs) {
  std::vector<ExtractedSpan> out;
  for (auto [b, e] : xs) out.push_back({b, e});
  return out;
}

// Random disjoint span list over [0, range).
std::vector<ExtractedSpan> random_spans(Rng& rng, std::size_t range) {
  std::vector<ExtractedSpan> out;
  std::size_t pos = 0;
  while (pos < range) {
    std::size_t gap = rng.uniform_index(4);
    pos += gap;
    if (pos >= range) break;
    std::size_t len = 1 + rng.uniform_index(3);
    std::size_t end = std::min(pos + len - 1, range - 1);
    out.push_back({pos, end});
    pos = end + 2;  // keep at least one free unit between spans
  }
  return out;
}

}  // namespace

TEST_CASE("strict matching requires exact boundaries") {
  SpanScore s = strict_match_score(spans({{1, 3}, {5, 6}}),
                                   spans({{1, 3}, {5, 7}}));
  CHECK(s.precision == doctest::Approx(0.5));
  CHECK(s.recall == doctest::Approx(0.5));
  CHECK(s.f1 == doctest::Approx(0.5));
  CHECK(s.match_count == 1);
}

TEST_CASE("fuzzy matching tolerates unit slack on both endpoints") {
  CHECK(fuzzy_match_score(spans({{3, 5}}), spans({{2, 6}}), 1).match_count == 1);
  CHECK(fuzzy_match_score(spans({{3, 5}}), spans({{4, 4}}), 1).match_count == 1);
  // end drift of 2 exceeds tolerance 1 even though the begin matches
  CHECK(fuzzy_match_score(spans({{3, 5}}), spans({{3, 7}}), 1).match_count == 0);

  SpanScore s = fuzzy_match_score(spans({{3, 5}}), spans({{2, 6}, {9, 9}}), 1);
  CHECK(s.recall == doctest::Approx(1.0));
  CHECK(s.precision == doctest::Approx(0.5));
  CHECK(s.match_count == 1);
}

TEST_CASE("empty list conventions") {
  SpanScore both = strict_match_score({}, {});
  CHECK(both.precision == doctest::Approx(1.0));
  CHECK(both.recall == doctest::Approx(1.0));
  CHECK(both.f1 == doctest::Approx(1.0));

  SpanScore no_pred = strict_match_score(spans({{1, 2}}), {});
  CHECK(no_pred.precision == doctest::Approx(0.0));
  CHECK(no_pred.recall == doctest::Approx(0.0));
  CHECK(no_pred.f1 == doctest::Approx(0.0));

  SpanScore no_gold = strict_match_score({}, spans({{1, 2}}));
  CHECK(no_gold.precision == doctest::Approx(0.0));
  CHECK(no_gold.recall == doctest::Approx(0.0));

  CHECK(fuzzy_match_score({}, {}, 1).f1 == doctest::Approx(1.0));
}

TEST_CASE("overlapping spans within one list are rejected") {
  CHECK_THROWS_AS(strict_match_score(spans({{1, 3}, {3, 4}}), {}), DataError);
  CHECK_THROWS_AS(fuzzy_match_score({}, spans({{0, 2}, {1, 5}}), 1), DataError);
  // touching at adjacent units is fine
  CHECK_NOTHROW(strict_match_score(spans({{1, 3}, {4, 5}}), {}));
}

TEST_CASE("strict matching is symmetric under swapping gold and pred") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = random_spans(rng, 20);
    auto b = random_spans(rng, 20);
    SpanScore ab = strict_match_score(a, b);
    SpanScore ba = strict_match_score(b, a);
    CHECK(ab.precision == doctest::Approx(ba.recall));
    CHECK(ab.recall == doctest::Approx(ba.precision));
    CHECK(ab.f1 == doctest::Approx(ba.f1));
  }
}

TEST_CASE("fuzzy dominates strict and tolerance zero equals strict") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    auto gold = random_spans(rng, 30);
    auto pred = random_spans(rng, 30);
    SpanScore strict = strict_match_score(gold, pred);
    SpanScore fuzzy0 = fuzzy_match_score(gold, pred, 0);
    SpanScore fuzzy1 = fuzzy_match_score(gold, pred, 1);
    SpanScore fuzzy2 = fuzzy_match_score(gold, pred, 2);
    CHECK(fuzzy0.precision == doctest::Approx(strict.precision));
    CHECK(fuzzy0.recall == doctest::Approx(strict.recall));
    CHECK(fuzzy0.f1 == doctest::Approx(strict.f1));
    CHECK(fuzzy0.match_count == strict.match_count);
    CHECK(fuzzy1.recall >= strict.recall - 1e-12);
    CHECK(fuzzy1.precision >= strict.precision - 1e-12);
    CHECK(fuzzy2.recall >= fuzzy1.recall - 1e-12);
    CHECK(fuzzy2.precision >= fuzzy1.precision - 1e-12);
  }
}

TEST_CASE("tag accuracy compares positionwise") {
  CHECK(tag_accuracy({Tag::B, Tag::I, Tag::O}, {Tag::O, Tag::I, Tag::O}) ==
        doctest::Approx(2.0 / 3.0));
  CHECK(tag_accuracy({}, {}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(tag_accuracy({Tag::B}, {Tag::B, Tag::O}), DataError);
}

TEST_CASE("evaluate micro-averages across documents") {
  DocPrediction d1;
  d1.doc_id = "a";
  d1.gold = spans({{1, 3}, {5, 6}});
  d1.pred = spans({{1, 3}, {5, 7}});
  d1.gold_tags = {Tag::O, Tag::B, Tag::I, Tag::I, Tag::O, Tag::B, Tag::I,
                  Tag::O};
  d1.pred_tags = {Tag::O, Tag::B, Tag::I, Tag::I, Tag::O, Tag::B, Tag::I,
                  Tag::I};
  DocPrediction d2;
  d2.doc_id = "b";
  d2.gold = spans({{0, 0}});
  d2.pred = spans({{0, 0}});
  d2.gold_tags = {Tag::B, Tag::O};
  d2.pred_tags = {Tag::B, Tag::O};

  MatchReport rep = evaluate({d1, d2}, 1);
  // strict: 2 matches over 3 gold and 3 pred
  CHECK(rep.strict.precision == doctest::Approx(2.0 / 3.0));
  CHECK(rep.strict.recall == doctest::Approx(2.0 / 3.0));
  CHECK(rep.strict.match_count == 2);
  // fuzzy: (5,7) is within 1 of (5,6), so everything matches
  CHECK(rep.fuzzy.precision == doctest::Approx(1.0));
  CHECK(rep.fuzzy.recall == doctest::Approx(1.0));
  CHECK(rep.fuzzy.match_count == 3);
  CHECK(rep.has_tags);
  CHECK(rep.tag_accuracy == doctest::Approx(9.0 / 10.0));
  REQUIRE(rep.per_doc.size() == 2);
  CHECK(rep.per_doc[0].strict.f1 == doctest::Approx(0.5));
  CHECK(rep.per_doc[1].strict.f1 == doctest::Approx(1.0));

  std::string table = render_report_table(rep);
  CHECK(table.find("strict") != std::string::npos);
  CHECK(table.find("symmetric local convention") != std::string::npos);
  std::string kv = render_report_kv(rep);
  CHECK(kv.find("strict.f1 = 0.6667") != std::string::npos);
  CHECK(kv.find("per_doc.a.strict.f1 = 0.5000") != std::string::npos);
  CHECK(kv.find("symmetric matched-predicted-span rule") != std::string::npos);
}

TEST_CASE("evaluate rejects mismatched tag lengths") {
  DocPrediction d;
  d.doc_id = "a";
  d.gold_tags = {Tag::O, Tag::O};
  d.pred_tags = {Tag::O};
  CHECK_THROWS_WITH_AS(evaluate({d}, 1), doctest::Contains("doc a"),
                       DataError);
}
