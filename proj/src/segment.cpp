#include "rex/segment.hpp"

#include <array>
#include <cctype>
#include <set>
#include <string>

#include "rex/common.hpp"

namespace rex {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit_c(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alpha_c(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_alnum_c(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_upper_c(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }

// Words before a '.' that never end a sentence. Time units (h, min) are
// deliberately absent: procedure text routinely ends sentences with them.
const std::set<std::string>& abbreviations() {
  static const std::set<std::string> abbrevs = {
      "eg",  "ie",  "etc", "eq",   "approx", "wt",    "vol",  "no",
      "ca",  "cf",  "fig", "figs", "ref",    "refs",  "mp",   "bp",
      "dr",  "mr",  "mrs", "ms",   "prof",   "al",    "vs",   "viz",
      "anal", "calcd", "obsd", "temp", "conc", "sat", "aq",   "dil"};
  return abbrevs;
}

const std::set<std::string>& unit_words() {
  static const std::set<std::string> units = {
      "g",   "mg",  "kg",   "ug",  "mL",  "ml",  "L",    "l",   "mol",
      "mmol", "umol", "h",  "hr",  "hrs", "min", "s",    "sec", "eq",
      "equiv", "M",  "N",   "rt",  "ppm", "mbar", "bar", "Pa",  "kPa",
      "atm", "psi", "nm",  "um",  "mm",  "cm",  "Hz",   "MHz", "degC"};
  return units;
}

bool is_chem_charset(char c) {
  return is_alnum_c(c) || c == '-' || c == ',' || c == '(' || c == ')' ||
         c == '[' || c == ']' || c == '\'';
}

bool ends_with_chem_suffix(const std::string& s) {
  static const std::array<const char*, 16> suffixes = {
      "yl", "ane", "ene", "yne", "ol", "ide", "ate", "ine",
      "one", "ite", "ium", "ose", "oxy", "yde", "ato", "anol"};
  for (const char* suf : suffixes) {
    std::size_t n = std::string(suf).size();
    if (s.size() >= n && s.compare(s.size() - n, n, suf) == 0) return true;
  }
  return false;
}

// ^digits(,digits)*- followed by at least one letter somewhere after.
bool has_locant_prefix(const std::string& s) {
  std::size_t i = 0;
  if (i >= s.size() || !is_digit_c(s[i])) return false;
  while (i < s.size() && (is_digit_c(s[i]) || s[i] == ',')) ++i;
  if (i >= s.size() || s[i] != '-') return false;
  for (std::size_t k = i + 1; k < s.size(); ++k)
    if (is_alpha_c(s[k])) return true;
  return false;
}

// (2S), [1,2-b] and the like: bracketed digits with at most a few letters.
bool has_bracketed_locant(const std::string& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '(' && s[i] != '[') continue;
    char close = (s[i] == '(') ? ')' : ']';
    std::size_t j = i + 1;
    bool saw_digit = false;
    std::size_t letters = 0;
    while (j < s.size() && s[j] != close) {
      char c = s[j];
      if (is_digit_c(c)) saw_digit = true;
      else if (is_alpha_c(c)) ++letters;
      else if (c != ',' && c != '-') break;
      ++j;
    }
    if (j < s.size() && s[j] == close && saw_digit && letters <= 3 && j > i + 1)
      return true;
  }
  return false;
}

}  // namespace

const char* token_kind_name(TokenKind k) {
  switch (k) {
    case TokenKind::word: return "word";
    case TokenKind::number: return "number";
    case TokenKind::chemical: return "chemical";
    case TokenKind::punctuation: return "punctuation";
    case TokenKind::unit: return "unit";
  }
  return "word";
}

ParagraphMode paragraph_mode_from_string(const std::string& s) {
  if (s == "newline") return ParagraphMode::newline;
  if (s == "blankline") return ParagraphMode::blankline;
  throw ConfigError("unknown paragraph mode: '" + s + "'");
}

const char* paragraph_mode_name(ParagraphMode m) {
  return m == ParagraphMode::newline ? "newline" : "blankline";
}

bool is_unit_word(const std::string& surface) {
  return unit_words().count(surface) > 0 || surface == "\xC2\xB0" "C";
}

bool looks_chemical(const std::string& surface) {
  bool has_letter = false;
  for (char c : surface) {
    if (!is_chem_charset(c)) return false;
    if (is_alpha_c(c)) has_letter = true;
  }
  if (!has_letter) return false;
  if (has_locant_prefix(surface)) return true;
  if (has_bracketed_locant(surface)) return true;
  // final hyphen segment with a chemical suffix ("tert-butyl")
  std::size_t dash = surface.rfind('-');
  if (dash != std::string::npos && dash + 1 < surface.size()) {
    std::string tail = surface.substr(dash + 1);
    if (tail.size() >= 5 && ends_with_chem_suffix(tail)) return true;
  }
  return false;
}

std::vector<Sentence> split_sentences(const std::string& text) {
  std::vector<Sentence> out;
  if (trim(text).empty()) return out;
  const std::size_t n = text.size();
  std::vector<std::size_t> boundaries;
  std::size_t i = 0;
  while (i < n) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
    std::size_t k = j;
    while (k < n && is_space(text[k])) ++k;
    bool split_here = k > j && k < n &&
                      (is_upper_c(text[k]) || is_digit_c(text[k]));
    if (split_here && c == '.' && j == i + 1) {
      // look back across letters and dots: "approx", "e.g", single initials
      std::size_t b = i;
      while (b > 0 && (is_alpha_c(text[b - 1]) || text[b - 1] == '.')) --b;
      std::string word;
      for (std::size_t p = b; p < i; ++p)
        if (text[p] != '.') word.push_back(text[p]);
      if (!word.empty()) {
        if (word.size() == 1 && is_upper_c(word[0])) split_here = false;
        if (abbreviations().count(to_lower(word))) split_here = false;
      }
    }
    if (split_here) boundaries.push_back(k);
    i = (k > j) ? k : j;
  }
  std::size_t prev = 0;
  for (std::size_t b : boundaries) {
    if (b > prev) out.push_back({out.size(), {prev, b}});
    prev = b;
  }
  if (prev < n) out.push_back({out.size(), {prev, n}});
  return out;
}

namespace {

// Chemical-name matcher at position i; returns token length or 0.
std::size_t match_chemical(const std::string& text, std::size_t i) {
  std::size_t j = i;
  while (j < text.size() && is_chem_charset(text[j])) ++j;
  std::string cand = text.substr(i, j - i);
  // back off trailing connectors and unbalanced closers
  while (!cand.empty()) {
    char last = cand.back();
    if (last == ',' || last == '-' || last == '\'') {
      cand.pop_back();
      continue;
    }
    if (last == ')' || last == ']') {
      long open = 0, close = 0;
      for (char c : cand) {
        if (c == '(' || c == '[') ++open;
        if (c == ')' || c == ']') ++close;
      }
      if (close > open) {
        cand.pop_back();
        continue;
      }
    }
    break;
  }
  if (cand.empty()) return 0;
  // leading unbalanced opener means the token would not start at i
  if (cand.front() == '(' || cand.front() == '[') {
    long open = 0, close = 0;
    for (char c : cand) {
      if (c == '(' || c == '[') ++open;
      if (c == ')' || c == ']') ++close;
    }
    if (open > close) return 0;
  }
  bool structural = cand.find('-') != std::string::npos ||
                    cand.find('(') != std::string::npos ||
                    cand.find('[') != std::string::npos;
  if (!structural) return 0;
  if (!looks_chemical(cand)) return 0;
  return cand.size();
}

std::size_t match_number(const std::string& text, std::size_t i) {
  std::size_t j = i;
  while (j < text.size() && is_digit_c(text[j])) ++j;
  if (j == i) return 0;
  if (j < text.size() && text[j] == '.' && j + 1 < text.size() &&
      is_digit_c(text[j + 1])) {
    ++j;
    while (j < text.size() && is_digit_c(text[j])) ++j;
  }
  if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
    std::size_t k = j + 1;
    if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
    if (k < text.size() && is_digit_c(text[k])) {
      ++k;
      while (k < text.size() && is_digit_c(text[k])) ++k;
      j = k;
    }
  }
  return j - i;
}

const std::string kChemToken = "[CHEM]";

}  // namespace

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    // reserved mask token stays whole across re-segmentation
    if (text.compare(i, kChemToken.size(), kChemToken) == 0) {
      out.push_back({{i, i + kChemToken.size()}, kChemToken, TokenKind::chemical});
      i += kChemToken.size();
      continue;
    }
    if (std::size_t len = match_chemical(text, i)) {
      out.push_back({{i, i + len}, text.substr(i, len), TokenKind::chemical});
      i += len;
      continue;
    }
    if (std::size_t len = match_number(text, i)) {
      out.push_back({{i, i + len}, text.substr(i, len), TokenKind::number});
      i += len;
      continue;
    }
    // degree sign (UTF-8 C2 B0), fused with a following temperature letter
    if (static_cast<unsigned char>(text[i]) == 0xC2 && i + 1 < n &&
        static_cast<unsigned char>(text[i + 1]) == 0xB0) {
      std::size_t len = 2;
      TokenKind kind = TokenKind::punctuation;
      if (i + 2 < n && (text[i + 2] == 'C' || text[i + 2] == 'F' || text[i + 2] == 'K')) {
        len = 3;
        kind = TokenKind::unit;
      }
      out.push_back({{i, i + len}, text.substr(i, len), kind});
      i += len;
      continue;
    }
    if (is_alnum_c(text[i])) {
      std::size_t j = i;
      while (j < n && is_alnum_c(text[j])) ++j;
      std::string surface = text.substr(i, j - i);
      TokenKind kind = is_unit_word(surface) ? TokenKind::unit : TokenKind::word;
      out.push_back({{i, j}, surface, kind});
      i = j;
      continue;
    }
    // multi-byte UTF-8 punctuation kept as one token
    std::size_t len = 1;
    unsigned char c = text[i];
    if (c >= 0xF0) len = 4;
    else if (c >= 0xE0) len = 3;
    else if (c >= 0xC0) len = 2;
    if (i + len > n) len = 1;
    out.push_back({{i, i + len}, text.substr(i, len), TokenKind::punctuation});
    i += len;
  }
  return out;
}

std::vector<Paragraph> split_paragraphs(const std::string& text, ParagraphMode mode) {
  const std::size_t min_newlines = (mode == ParagraphMode::blankline) ? 2 : 1;
  std::vector<CharSpan> segments;
  std::size_t seg_start = 0;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (!is_space(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    std::size_t newlines = 0;
    while (j < n && is_space(text[j])) {
      if (text[j] == '\n') ++newlines;
      ++j;
    }
    if (newlines >= min_newlines) {
      segments.push_back({seg_start, i});
      seg_start = j;
    }
    i = j;
  }
  segments.push_back({seg_start, n});

  std::vector<Paragraph> out;
  for (CharSpan seg : segments) {
    // trim edge whitespace so separators stay outside paragraph spans
    while (seg.start < seg.end && is_space(text[seg.start])) ++seg.start;
    while (seg.end > seg.start && is_space(text[seg.end - 1])) --seg.end;
    if (seg.start >= seg.end) continue;
    Paragraph para;
    para.index = out.size();
    para.span = seg;
    std::string slice = text.substr(seg.start, seg.length());
    for (Sentence s : split_sentences(slice)) {
      s.span.start += seg.start;
      s.span.end += seg.start;
      s.index = para.sentences.size();
      std::string sent_slice = text.substr(s.span.start, s.span.length());
      for (Token t : tokenize(sent_slice)) {
        t.span.start += s.span.start;
        t.span.end += s.span.start;
        para.tokens.push_back(std::move(t));
      }
      para.sentences.push_back(s);
    }
    out.push_back(std::move(para));
  }
  return out;
}

}  // namespace rex
