#ifndef REX_CHEMMASK_HPP
#define REX_CHEMMASK_HPP

#include <set>
#include <string>
#include <vector>

#include "rex/corpus.hpp"

namespace rex {

inline const std::string kChemMaskToken = "[CHEM]";

struct ChemLexicon {
  std::set<std::string> names;  // case-folded exact names
  std::string patterns_version = "1";
};

// One name per line, '#' starts a comment, blank lines ignored.
ChemLexicon load_lexicon(const std::string& path);

// True when the token parses entirely as element symbols with optional
// trailing digits per symbol (NaCl, H2O, CO2). Case-sensitive.
bool parses_as_formula(const std::string& surface);

// Recognition order per token: exact lexicon hit, chemical morphology,
// formula grammar (length >= 2, not a stoplisted English word). [CHEM]
// itself is never re-recognized.
std::vector<std::size_t> recognize_chems(const std::vector<Token>& tokens,
                                         const ChemLexicon& lexicon);

struct MaskResult {
  Document document;
  std::size_t masked_token_count = 0;
};

// Replaces every recognized token surface with [CHEM], remapping all spans
// (paragraphs, sentences, tokens, annotations) into the rebuilt text.
// Paragraph/sentence/token counts are preserved and masking is idempotent.
MaskResult mask_chems(const Document& doc, const ChemLexicon& lexicon);

}  // namespace rex

#endif  // REX_CHEMMASK_HPP
