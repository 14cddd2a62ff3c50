#ifndef REX_SEGMENT_HPP
#define REX_SEGMENT_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace rex {

// Half-open byte range into the enclosing document text.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool contains(std::size_t pos) const { return pos >= start && pos < end; }
  bool overlaps(const CharSpan& o) const {
    return start < o.end && o.start < end;
  }
  bool operator==(const CharSpan& o) const = default;
};

enum class TokenKind { word, number, chemical, punctuation, unit };

const char* token_kind_name(TokenKind k);

struct Token {
  CharSpan span;
  std::string surface;
  TokenKind kind = TokenKind::word;
};

struct Sentence {
  std::size_t index = 0;  // within parent paragraph
  CharSpan span;
};

struct Paragraph {
  std::size_t index = 0;
  CharSpan span;
  std::vector<Sentence> sentences;  // tile the paragraph span in order
  std::vector<Token> tokens;        // ordered, none crossing a sentence boundary
};

enum class ParagraphMode { newline, blankline };

ParagraphMode paragraph_mode_from_string(const std::string& s);
const char* paragraph_mode_name(ParagraphMode m);

// Splits text into fully segmented paragraphs (sentences and tokens filled
// in, all offsets absolute). newline mode breaks on every newline run;
// blankline mode only on runs of two or more newlines. Whitespace-only
// segments are dropped and paragraph spans carry no edge whitespace.
std::vector<Paragraph> split_paragraphs(const std::string& text,
                                        ParagraphMode mode = ParagraphMode::newline);

// Offsets relative to the given string. Sentence spans tile [0, text.size()):
// whitespace after a boundary is attached to the preceding sentence.
std::vector<Sentence> split_sentences(const std::string& text);

// Offsets relative to the given string.
std::vector<Token> tokenize(const std::string& text);

// Morphology test shared by the tokenizer and the chemical recognizer:
// hyphenated names with a digit locant prefix, a chemical suffix on the
// final segment, or a bracketed locant.
bool looks_chemical(const std::string& surface);

bool is_unit_word(const std::string& surface);

}  // namespace rex

#endif  // REX_SEGMENT_HPP
