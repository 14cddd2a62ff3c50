#ifndef REX_EVAL_HPP
#define REX_EVAL_HPP

#include <string>
#include <vector>

#include "rex/labeling.hpp"

namespace rex {

struct SpanScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // strict: |gold ∩ pred|; fuzzy: gold spans with a prediction in tolerance
  std::size_t match_count = 0;
};

// Empty-list conventions (the source metrics leave them unstated): with no
// predictions, precision is 1 when gold is also empty, else 0; recall
// symmetric.
SpanScore strict_match_score(const std::vector<ExtractedSpan>& gold,
                             const std::vector<ExtractedSpan>& pred);

// A gold span matches when some prediction has both endpoints within
// tolerance. Precision counts predictions with some gold within tolerance:
// a symmetric extension of the gold-side rule, flagged in reports as a
// local convention. tolerance 0 reduces to strict exactly.
SpanScore fuzzy_match_score(const std::vector<ExtractedSpan>& gold,
                            const std::vector<ExtractedSpan>& pred,
                            std::size_t tolerance = 1);

double tag_accuracy(const std::vector<Tag>& gold, const std::vector<Tag>& pred);

struct DocPrediction {
  std::string doc_id;
  std::vector<ExtractedSpan> gold;
  std::vector<ExtractedSpan> pred;
  std::vector<Tag> gold_tags;  // may be empty when tags are unavailable
  std::vector<Tag> pred_tags;
};

struct DocScore {
  std::string doc_id;
  SpanScore strict;
  SpanScore fuzzy;
  double tag_accuracy = 0.0;
};

struct MatchReport {
  SpanScore strict;  // micro-averaged over documents
  SpanScore fuzzy;
  double tag_accuracy = 0.0;
  std::size_t fuzzy_tolerance = 1;
  bool has_tags = false;
  std::vector<DocScore> per_doc;
};

MatchReport evaluate(const std::vector<DocPrediction>& docs,
                     std::size_t fuzzy_tolerance = 1);

std::string render_report_table(const MatchReport& report);
// flat keys: strict.f1, fuzzy.precision, ..., per_doc.<id>.strict.f1
std::string render_report_kv(const MatchReport& report);

}  // namespace rex

#endif  // REX_EVAL_HPP
