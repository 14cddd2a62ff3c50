#ifndef REX_CORPUS_HPP
#define REX_CORPUS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rex/segment.hpp"

namespace rex {

// One gold reaction span. surface always equals the document slice at span
// (with raw newlines; the .ann file field stores newlines as spaces).
struct ReactionAnnotation {
  std::string id;
  CharSpan span;
  std::string label;
  std::string surface;

  bool operator==(const ReactionAnnotation& o) const = default;
};

struct Document {
  std::string doc_id;
  std::string text;
  std::vector<Paragraph> paragraphs;
  std::vector<ReactionAnnotation> annotations;
};

enum class Split { train, validation, test };

const char* split_name(Split s);

struct Corpus {
  std::vector<Document> documents;
  std::map<std::string, Split> split_assignment;

  const Document* find(const std::string& doc_id) const;
};

struct AnnParseOptions {
  std::set<std::string> accept_labels;  // empty accepts every label
};

// Parses BRAT standoff text. Only T-lines are interpreted; R/E/A/#/* lines
// are skipped. Offsets and surface text are validated against doc_text.
std::vector<ReactionAnnotation> parse_ann(const std::string& ann_text,
                                          const std::string& doc_text,
                                          const AnnParseOptions& opts = {});

// Emits T-lines sorted by start offset; parse_ann(write_ann(a), text) == a.
std::string write_ann(const std::vector<ReactionAnnotation>& annotations);

Document load_document_pair(const std::string& txt_path,
                            const std::optional<std::string>& ann_path,
                            ParagraphMode mode = ParagraphMode::newline,
                            const AnnParseOptions& opts = {});

// Discovers <stem>.txt / <stem>.ann pairs directly under dir (missing .ann is
// fine). Documents come back sorted by doc_id, all assigned to train.
Corpus load_corpus_dir(const std::string& dir,
                       ParagraphMode mode = ParagraphMode::newline,
                       const AnnParseOptions& opts = {});

// Deterministic shuffle by seed over doc ids sorted lexicographically;
// floor(fraction * N) documents move to validation. Docs already assigned to
// test keep that assignment.
void assign_splits(Corpus& corpus, double validation_fraction, std::uint64_t seed);

std::vector<const Document*> documents_in_split(const Corpus& corpus, Split split);

}  // namespace rex

#endif  // REX_CORPUS_HPP
