#ifndef REX_LABELING_HPP
#define REX_LABELING_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "rex/corpus.hpp"

namespace rex {

// Label index order (B=0, I=1, O=2) is load-bearing: decoders break score
// ties by lowest index.
enum class Tag : int { B = 0, I = 1, O = 2 };

inline constexpr int kNumLabels = 3;

char tag_char(Tag t);
Tag tag_from_char(char c);

enum class Granularity { paragraph, sentence };

Granularity granularity_from_string(const std::string& s);
const char* granularity_name(Granularity g);

struct TagSequence {
  std::string doc_id;
  Granularity granularity = Granularity::paragraph;
  std::vector<Tag> tags;

  bool operator==(const TagSequence& o) const = default;
};

// Inclusive unit-index pair for one extracted reaction.
struct ExtractedSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const ExtractedSpan& o) const = default;
  auto operator<=>(const ExtractedSpan& o) const = default;
};

struct CorpusStats {
  std::size_t file_count = 0;
  std::size_t word_count = 0;
  std::size_t paragraph_count = 0;
  std::size_t reaction_count = 0;
  double avg_tokens_per_paragraph = 0.0;
  double avg_paragraphs_per_document = 0.0;
};

enum class RepairRule { orphan_i_becomes_b, orphan_i_becomes_o };

std::vector<CharSpan> unit_spans(const Document& doc, Granularity g);

// Tokens falling inside the given unit (paragraph index or flattened
// sentence index).
std::vector<const Token*> unit_tokens(const Document& doc, Granularity g,
                                      std::size_t unit_index);

std::size_t unit_count(const Document& doc, Granularity g);

// Union-merge of overlapping or nested gold annotation spans, sorted.
std::vector<CharSpan> merged_gold_spans(const Document& doc);

// B on the unit holding a span's first character, I through the unit holding
// its last character, O elsewhere. Output is always IOB2-valid.
TagSequence spans_to_tags(const Document& doc, Granularity g);

std::vector<Tag> repair_tags(const std::vector<Tag>& tags,
                             RepairRule rule = RepairRule::orphan_i_becomes_b);

// Accepts possibly-invalid sequences (window decoders can emit them) and
// repairs before extraction. Spans come back sorted and non-overlapping.
std::vector<ExtractedSpan> tags_to_spans(const std::vector<Tag>& tags,
                                         RepairRule rule = RepairRule::orphan_i_becomes_b);

bool is_iob2_valid(const std::vector<Tag>& tags);

CorpusStats corpus_stats(const Corpus& corpus);

struct UnitNoise {
  std::size_t unit = 0;
  double fraction = 0.0;  // chars outside every gold span / unit length
};

struct BoundaryNoiseReport {
  std::vector<UnitNoise> units;  // one entry per B/I-tagged unit
  double threshold = 0.4;
  std::size_t units_above_threshold = 0;
  double share_above_threshold = 0.0;
};

BoundaryNoiseReport boundary_noise_report(const Document& doc, Granularity g,
                                          double threshold = 0.4);

// Line format: doc_id<TAB>granularity<TAB>B I O ...
std::string format_tag_line(const TagSequence& seq);
TagSequence parse_tag_line(const std::string& line);

void write_tag_file(std::ostream& out, const std::vector<TagSequence>& seqs);
std::vector<TagSequence> read_tag_file(std::istream& in);

}  // namespace rex

#endif  // REX_LABELING_HPP
