#include "rex/labeling.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "rex/common.hpp"

namespace rex {

char tag_char(Tag t) {
  switch (t) {
    case Tag::B: return 'B';
    case Tag::I: return 'I';
    case Tag::O: return 'O';
  }
  return 'O';
}

Tag tag_from_char(char c) {
  switch (c) {
    case 'B': return Tag::B;
    case 'I': return Tag::I;
    case 'O': return Tag::O;
    default:
      throw ParseError(std::string("unknown tag character: '") + c + "'");
  }
}

Granularity granularity_from_string(const std::string& s) {
  if (s == "paragraph") return Granularity::paragraph;
  if (s == "sentence") return Granularity::sentence;
  throw ConfigError("unknown granularity: '" + s + "'");
}

const char* granularity_name(Granularity g) {
  return g == Granularity::paragraph ? "paragraph" : "sentence";
}

std::vector<CharSpan> unit_spans(const Document& doc, Granularity g) {
  std::vector<CharSpan> out;
  for (const Paragraph& p : doc.paragraphs) {
    if (g == Granularity::paragraph) {
      out.push_back(p.span);
    } else {
      for (const Sentence& s : p.sentences) out.push_back(s.span);
    }
  }
  return out;
}

std::size_t unit_count(const Document& doc, Granularity g) {
  if (g == Granularity::paragraph) return doc.paragraphs.size();
  std::size_t n = 0;
  for (const Paragraph& p : doc.paragraphs) n += p.sentences.size();
  return n;
}

std::vector<const Token*> unit_tokens(const Document& doc, Granularity g,
                                      std::size_t unit_index) {
  std::vector<const Token*> out;
  if (g == Granularity::paragraph) {
    const Paragraph& p = doc.paragraphs.at(unit_index);
    for (const Token& t : p.tokens) out.push_back(&t);
    return out;
  }
  std::size_t k = 0;
  for (const Paragraph& p : doc.paragraphs) {
    for (const Sentence& s : p.sentences) {
      if (k == unit_index) {
        for (const Token& t : p.tokens) {
          if (t.span.start >= s.span.start && t.span.end <= s.span.end)
            out.push_back(&t);
        }
        return out;
      }
      ++k;
    }
  }
  throw DataError("unit index out of range: " + std::to_string(unit_index));
}

std::vector<CharSpan> merged_gold_spans(const Document& doc) {
  std::vector<CharSpan> spans;
  for (const ReactionAnnotation& a : doc.annotations) spans.push_back(a.span);
  std::sort(spans.begin(), spans.end(), [](const CharSpan& a, const CharSpan& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
  std::vector<CharSpan> merged;
  for (const CharSpan& s : spans) {
    if (!merged.empty() && s.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, s.end);
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

TagSequence spans_to_tags(const Document& doc, Granularity g) {
  std::vector<CharSpan> units = unit_spans(doc, g);
  TagSequence seq;
  seq.doc_id = doc.doc_id;
  seq.granularity = g;
  seq.tags.assign(units.size(), Tag::O);
  for (const CharSpan& span : merged_gold_spans(doc)) {
    std::size_t first = units.size(), last = units.size();
    for (std::size_t u = 0; u < units.size(); ++u) {
      if (units[u].overlaps(span)) {
        if (first == units.size()) first = u;
        last = u;
      }
    }
    if (first == units.size())
      throw DataError("document " + doc.doc_id + ": annotation [" +
                      std::to_string(span.start) + "," + std::to_string(span.end) +
                      ") overlaps no " + granularity_name(g) + " unit");
    seq.tags[first] = Tag::B;
    for (std::size_t u = first + 1; u <= last; ++u) seq.tags[u] = Tag::I;
  }
  return seq;
}

std::vector<Tag> repair_tags(const std::vector<Tag>& tags, RepairRule rule) {
  std::vector<Tag> out = tags;
  bool open = false;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] == Tag::I && !open) {
      out[i] = (rule == RepairRule::orphan_i_becomes_b) ? Tag::B : Tag::O;
    }
    open = out[i] != Tag::O;
  }
  return out;
}

bool is_iob2_valid(const std::vector<Tag>& tags) {
  bool open = false;
  for (Tag t : tags) {
    if (t == Tag::I && !open) return false;
    open = t != Tag::O;
  }
  return true;
}

std::vector<ExtractedSpan> tags_to_spans(const std::vector<Tag>& tags,
                                         RepairRule rule) {
  std::vector<Tag> fixed = repair_tags(tags, rule);
  std::vector<ExtractedSpan> out;
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (fixed[i] == Tag::B) {
      std::size_t j = i;
      while (j + 1 < fixed.size() && fixed[j + 1] == Tag::I) ++j;
      out.push_back({i, j});
      i = j;
    }
  }
  return out;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.file_count = corpus.documents.size();
  for (const Document& doc : corpus.documents) {
    stats.paragraph_count += doc.paragraphs.size();
    for (const Paragraph& p : doc.paragraphs) stats.word_count += p.tokens.size();
    stats.reaction_count += merged_gold_spans(doc).size();
  }
  if (stats.paragraph_count > 0)
    stats.avg_tokens_per_paragraph =
        static_cast<double>(stats.word_count) / static_cast<double>(stats.paragraph_count);
  if (stats.file_count > 0)
    stats.avg_paragraphs_per_document =
        static_cast<double>(stats.paragraph_count) / static_cast<double>(stats.file_count);
  return stats;
}

BoundaryNoiseReport boundary_noise_report(const Document& doc, Granularity g,
                                          double threshold) {
  BoundaryNoiseReport report;
  report.threshold = threshold;
  std::vector<CharSpan> units = unit_spans(doc, g);
  std::vector<CharSpan> gold = merged_gold_spans(doc);
  TagSequence tags = spans_to_tags(doc, g);
  for (std::size_t u = 0; u < units.size(); ++u) {
    if (tags.tags[u] == Tag::O) continue;
    std::size_t inside = 0;
    for (const CharSpan& span : gold) {
      std::size_t lo = std::max(units[u].start, span.start);
      std::size_t hi = std::min(units[u].end, span.end);
      if (hi > lo) inside += hi - lo;
    }
    double frac = units[u].length() == 0
                      ? 0.0
                      : 1.0 - static_cast<double>(inside) /
                                  static_cast<double>(units[u].length());
    report.units.push_back({u, frac});
    if (frac > threshold) ++report.units_above_threshold;
  }
  if (!report.units.empty())
    report.share_above_threshold =
        static_cast<double>(report.units_above_threshold) /
        static_cast<double>(report.units.size());
  return report;
}

std::string format_tag_line(const TagSequence& seq) {
  std::ostringstream out;
  out << seq.doc_id << '\t' << granularity_name(seq.granularity) << '\t';
  for (std::size_t i = 0; i < seq.tags.size(); ++i) {
    if (i) out << ' ';
    out << tag_char(seq.tags[i]);
  }
  return out.str();
}

TagSequence parse_tag_line(const std::string& line) {
  std::vector<std::string> fields = split(line, '\t');
  if (fields.size() != 3)
    throw ParseError("tag line must have 3 tab-separated fields: '" + line + "'");
  TagSequence seq;
  seq.doc_id = fields[0];
  seq.granularity = granularity_from_string(fields[1]);
  for (const std::string& tok : split_ws(fields[2])) {
    if (tok.size() != 1)
      throw ParseError("bad tag token '" + tok + "' in line for " + seq.doc_id);
    seq.tags.push_back(tag_from_char(tok[0]));
  }
  return seq;
}

void write_tag_file(std::ostream& out, const std::vector<TagSequence>& seqs) {
  for (const TagSequence& s : seqs) out << format_tag_line(s) << '\n';
}

std::vector<TagSequence> read_tag_file(std::istream& in) {
  std::vector<TagSequence> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    out.push_back(parse_tag_line(line));
  }
  return out;
}

}  // namespace rex
