#include "rex/chemmask.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "rex/common.hpp"

namespace rex {

namespace {

const std::set<std::string>& element_symbols() {
  static const std::set<std::string> symbols = {
      "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg",
      "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr",
      "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr",
      "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
      "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
      "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf",
      "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po",
      "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm",
      "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs",
      "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};
  return symbols;
}

// English words that also parse as element sequences (He, In, NO, US ...).
const std::set<std::string>& formula_stoplist() {
  static const std::set<std::string> words = {
      "he",   "in",   "as",   "at",   "be",   "no",   "so",   "us",
      "is",   "if",   "on",   "up",   "i",    "we",   "bin",  "chin",
      "cob",  "con",  "nip",  "snip", "son",  "sin",  "ban",  "bin",
      "can",  "cap",  "cat",  "cop",  "cup",  "ice",  "ion",  "lab",
      "nab",  "nap",  "pin",  "pun",  "ran",  "rub",  "run",  "tan",
      "tin",  "ton",  "van",  "won",  "yes",  "you",  "this", "that",
      "skin", "spin", "stain"};
  return words;
}

bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

bool parses_as_formula(const std::string& surface) {
  const std::size_t n = surface.size();
  if (n == 0 || !is_upper(surface[0])) return false;
  std::size_t i = 0;
  while (i < n) {
    if (!is_upper(surface[i])) return false;
    // greedy: two-letter symbol first
    if (i + 1 < n && is_lower(surface[i + 1]) &&
        element_symbols().count(surface.substr(i, 2))) {
      i += 2;
    } else if (element_symbols().count(surface.substr(i, 1))) {
      i += 1;
    } else {
      return false;
    }
    while (i < n && is_digit(surface[i])) ++i;
  }
  return true;
}

ChemLexicon load_lexicon(const std::string& path) {
  ChemLexicon lex;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::string name = trim(line);
    if (!name.empty()) lex.names.insert(to_lower(name));
  }
  return lex;
}

std::vector<std::size_t> recognize_chems(const std::vector<Token>& tokens,
                                         const ChemLexicon& lexicon) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& s = tokens[i].surface;
    if (s == kChemMaskToken) continue;
    if (lexicon.names.count(to_lower(s))) {
      out.push_back(i);
      continue;
    }
    if (looks_chemical(s)) {
      out.push_back(i);
      continue;
    }
    if (s.size() >= 2 && parses_as_formula(s) &&
        !formula_stoplist().count(to_lower(s))) {
      out.push_back(i);
    }
  }
  return out;
}

namespace {

// Piecewise offset remapping through the replaced token spans. Endpoints
// strictly inside a replaced span snap outward to cover the whole token.
class OffsetMap {
 public:
  OffsetMap(const std::vector<CharSpan>& old_spans, std::size_t repl_len)
      : old_spans_(old_spans), repl_len_(repl_len) {
    long delta = 0;
    new_starts_.reserve(old_spans.size());
    for (const CharSpan& s : old_spans_) {
      new_starts_.push_back(static_cast<std::size_t>(
          static_cast<long>(s.start) + delta));
      delta += static_cast<long>(repl_len_) - static_cast<long>(s.length());
    }
  }

  std::size_t map_start(std::size_t pos) const { return map(pos, false); }
  std::size_t map_end(std::size_t pos) const { return map(pos, true); }

 private:
  std::size_t map(std::size_t pos, bool is_end) const {
    long delta = 0;
    for (std::size_t i = 0; i < old_spans_.size(); ++i) {
      const CharSpan& s = old_spans_[i];
      if (pos <= s.start) break;
      if (pos < s.end) {
        // snap into the replacement
        return is_end ? new_starts_[i] + repl_len_ : new_starts_[i];
      }
      delta += static_cast<long>(repl_len_) - static_cast<long>(s.length());
    }
    return static_cast<std::size_t>(static_cast<long>(pos) + delta);
  }

  const std::vector<CharSpan>& old_spans_;
  std::size_t repl_len_;
  std::vector<std::size_t> new_starts_;
};

}  // namespace

MaskResult mask_chems(const Document& doc, const ChemLexicon& lexicon) {
  std::vector<CharSpan> replaced;
  for (const Paragraph& p : doc.paragraphs) {
    for (std::size_t idx : recognize_chems(p.tokens, lexicon))
      replaced.push_back(p.tokens[idx].span);
  }
  std::sort(replaced.begin(), replaced.end(),
            [](const CharSpan& a, const CharSpan& b) { return a.start < b.start; });

  MaskResult result;
  result.masked_token_count = replaced.size();

  std::string new_text;
  new_text.reserve(doc.text.size() + replaced.size() * kChemMaskToken.size());
  std::size_t pos = 0;
  for (const CharSpan& s : replaced) {
    new_text.append(doc.text, pos, s.start - pos);
    new_text.append(kChemMaskToken);
    pos = s.end;
  }
  new_text.append(doc.text, pos, doc.text.size() - pos);

  OffsetMap omap(replaced, kChemMaskToken.size());

  Document& out = result.document;
  out.doc_id = doc.doc_id;
  out.text = std::move(new_text);
  out.paragraphs.reserve(doc.paragraphs.size());
  for (const Paragraph& p : doc.paragraphs) {
    Paragraph np;
    np.index = p.index;
    np.span = {omap.map_start(p.span.start), omap.map_end(p.span.end)};
    np.sentences.reserve(p.sentences.size());
    for (const Sentence& s : p.sentences) {
      np.sentences.push_back(
          {s.index, {omap.map_start(s.span.start), omap.map_end(s.span.end)}});
    }
    np.tokens.reserve(p.tokens.size());
    for (const Token& t : p.tokens) {
      Token nt;
      nt.span = {omap.map_start(t.span.start), omap.map_end(t.span.end)};
      nt.surface = out.text.substr(nt.span.start, nt.span.length());
      nt.kind = (nt.surface == kChemMaskToken) ? TokenKind::chemical : t.kind;
      np.tokens.push_back(std::move(nt));
    }
    out.paragraphs.push_back(std::move(np));
  }
  out.annotations.reserve(doc.annotations.size());
  for (const ReactionAnnotation& a : doc.annotations) {
    ReactionAnnotation na;
    na.id = a.id;
    na.label = a.label;
    na.span = {omap.map_start(a.span.start), omap.map_end(a.span.end)};
    na.surface = out.text.substr(na.span.start, na.span.length());
    out.annotations.push_back(std::move(na));
  }
  return result;
}

}  // namespace rex
