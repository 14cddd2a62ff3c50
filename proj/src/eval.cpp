#include "rex/eval.hpp"

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <set>
#include <sstream>

#include "rex/common.hpp"

namespace rex {

namespace {

void check_non_overlapping(const std::vector<ExtractedSpan>& spans,
                           const char* which) {
  std::vector<ExtractedSpan> sorted(spans);
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    // inclusive unit indices: sharing a unit counts as overlap
    if (sorted[i].begin <= sorted[i - 1].end) {
      throw DataError(std::string(which) + " spans overlap: (" +
                      std::to_string(sorted[i - 1].begin) + "," +
                      std::to_string(sorted[i - 1].end) + ") and (" +
                      std::to_string(sorted[i].begin) + "," +
                      std::to_string(sorted[i].end) + ")");
    }
  }
}

double ratio_with_convention(std::size_t matched, std::size_t denom,
                             std::size_t other_count) {
  if (denom == 0) return other_count == 0 ? 1.0 : 0.0;
  return static_cast<double>(matched) / static_cast<double>(denom);
}

double harmonic(double p, double r) {
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

bool within(const ExtractedSpan& a, const ExtractedSpan& b, std::size_t tol) {
  auto diff = [](std::size_t x, std::size_t y) {
    return x > y ? x - y : y - x;
  };
  return diff(a.begin, b.begin) <= tol && diff(a.end, b.end) <= tol;
}

SpanScore score_from_counts(std::size_t matched_gold, std::size_t matched_pred,
                            std::size_t gold_n, std::size_t pred_n) {
  SpanScore s;
  s.precision = ratio_with_convention(matched_pred, pred_n, gold_n);
  s.recall = ratio_with_convention(matched_gold, gold_n, pred_n);
  s.f1 = harmonic(s.precision, s.recall);
  s.match_count = matched_gold;
  return s;
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << v;
  return out.str();
}

}  // namespace

SpanScore strict_match_score(const std::vector<ExtractedSpan>& gold,
                             const std::vector<ExtractedSpan>& pred) {
  check_non_overlapping(gold, "gold");
  check_non_overlapping(pred, "predicted");
  std::set<ExtractedSpan> gold_set(gold.begin(), gold.end());
  std::size_t matched = 0;
  for (const auto& p : pred) matched += gold_set.count(p);
  return score_from_counts(matched, matched, gold.size(), pred.size());
}

SpanScore fuzzy_match_score(const std::vector<ExtractedSpan>& gold,
                            const std::vector<ExtractedSpan>& pred,
                            std::size_t tolerance) {
  check_non_overlapping(gold, "gold");
  check_non_overlapping(pred, "predicted");
  std::size_t matched_gold = 0;
  for (const auto& g : gold) {
    for (const auto& p : pred) {
      if (within(g, p, tolerance)) {
        ++matched_gold;
        break;
      }
    }
  }
  std::size_t matched_pred = 0;
  for (const auto& p : pred) {
    for (const auto& g : gold) {
      if (within(g, p, tolerance)) {
        ++matched_pred;
        break;
      }
    }
  }
  return score_from_counts(matched_gold, matched_pred, gold.size(), pred.size());
}

double tag_accuracy(const std::vector<Tag>& gold, const std::vector<Tag>& pred) {
  if (gold.size() != pred.size()) {
    throw DataError("tag accuracy needs equal lengths, got " +
                    std::to_string(gold.size()) + " vs " +
                    std::to_string(pred.size()));
  }
  if (gold.empty()) return 1.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == pred[i]) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(gold.size());
}

MatchReport evaluate(const std::vector<DocPrediction>& docs,
                     std::size_t fuzzy_tolerance) {
  MatchReport report;
  report.fuzzy_tolerance = fuzzy_tolerance;

  std::size_t strict_matched = 0;
  std::size_t fuzzy_gold_matched = 0;
  std::size_t fuzzy_pred_matched = 0;
  std::size_t gold_total = 0;
  std::size_t pred_total = 0;
  std::size_t tag_same = 0;
  std::size_t tag_total = 0;

  for (const auto& doc : docs) {
    DocScore ds;
    ds.doc_id = doc.doc_id;
    ds.strict = strict_match_score(doc.gold, doc.pred);
    ds.fuzzy = fuzzy_match_score(doc.gold, doc.pred, fuzzy_tolerance);
    strict_matched += ds.strict.match_count;
    fuzzy_gold_matched += ds.fuzzy.match_count;
    gold_total += doc.gold.size();
    pred_total += doc.pred.size();
    // recover the pred-side fuzzy count from the per-doc precision
    for (const auto& p : doc.pred) {
      for (const auto& g : doc.gold) {
        if (within(g, p, fuzzy_tolerance)) {
          ++fuzzy_pred_matched;
          break;
        }
      }
    }
    if (!doc.gold_tags.empty() || !doc.pred_tags.empty()) {
      if (doc.gold_tags.size() != doc.pred_tags.size()) {
        throw DataError("doc " + doc.doc_id + ": tag length mismatch");
      }
      report.has_tags = true;
      ds.tag_accuracy = tag_accuracy(doc.gold_tags, doc.pred_tags);
      for (std::size_t i = 0; i < doc.gold_tags.size(); ++i) {
        if (doc.gold_tags[i] == doc.pred_tags[i]) ++tag_same;
      }
      tag_total += doc.gold_tags.size();
    }
    report.per_doc.push_back(std::move(ds));
  }

  report.strict =
      score_from_counts(strict_matched, strict_matched, gold_total, pred_total);
  report.fuzzy = score_from_counts(fuzzy_gold_matched, fuzzy_pred_matched,
                                   gold_total, pred_total);
  report.tag_accuracy =
      tag_total == 0 ? (report.has_tags ? 1.0 : 0.0)
                     : static_cast<double>(tag_same) / static_cast<double>(tag_total);
  return report;
}

std::string render_report_table(const MatchReport& report) {
  std::ostringstream out;
  out << "metric      precision  recall     f1         matches\n";
  out << "strict      " << fmt(report.strict.precision) << "     "
      << fmt(report.strict.recall) << "     " << fmt(report.strict.f1)
      << "     " << report.strict.match_count << "\n";
  out << "fuzzy(t=" << report.fuzzy_tolerance << ")  "
      << fmt(report.fuzzy.precision) << "     " << fmt(report.fuzzy.recall)
      << "     " << fmt(report.fuzzy.f1) << "     "
      << report.fuzzy.match_count << "\n";
  if (report.has_tags) {
    out << "tag accuracy: " << fmt(report.tag_accuracy) << "\n";
  }
  out << "note: fuzzy precision counts predicted spans with a gold span "
         "within tolerance (symmetric local convention)\n";
  return out.str();
}

std::string render_report_kv(const MatchReport& report) {
  std::ostringstream out;
  out << "# fuzzy precision uses the symmetric matched-predicted-span rule "
         "(local convention)\n";
  out << "strict.precision = " << fmt(report.strict.precision) << "\n";
  out << "strict.recall = " << fmt(report.strict.recall) << "\n";
  out << "strict.f1 = " << fmt(report.strict.f1) << "\n";
  out << "strict.match_count = " << report.strict.match_count << "\n";
  out << "fuzzy.tolerance = " << report.fuzzy_tolerance << "\n";
  out << "fuzzy.precision = " << fmt(report.fuzzy.precision) << "\n";
  out << "fuzzy.recall = " << fmt(report.fuzzy.recall) << "\n";
  out << "fuzzy.f1 = " << fmt(report.fuzzy.f1) << "\n";
  out << "fuzzy.match_count = " << report.fuzzy.match_count << "\n";
  if (report.has_tags) {
    out << "tag_accuracy = " << fmt(report.tag_accuracy) << "\n";
  }
  for (const auto& doc : report.per_doc) {
    out << "per_doc." << doc.doc_id << ".strict.precision = "
        << fmt(doc.strict.precision) << "\n";
    out << "per_doc." << doc.doc_id << ".strict.recall = "
        << fmt(doc.strict.recall) << "\n";
    out << "per_doc." << doc.doc_id << ".strict.f1 = " << fmt(doc.strict.f1)
        << "\n";
    out << "per_doc." << doc.doc_id << ".fuzzy.precision = "
        << fmt(doc.fuzzy.precision) << "\n";
    out << "per_doc." << doc.doc_id << ".fuzzy.recall = "
        << fmt(doc.fuzzy.recall) << "\n";
    out << "per_doc." << doc.doc_id << ".fuzzy.f1 = " << fmt(doc.fuzzy.f1)
        << "\n";
    if (report.has_tags) {
      out << "per_doc." << doc.doc_id << ".tag_accuracy = "
          << fmt(doc.tag_accuracy) << "\n";
    }
  }
  return out.str();
}

}  // namespace rex
