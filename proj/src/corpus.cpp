#include "rex/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "rex/common.hpp"

namespace fs = std::filesystem;

namespace rex {

namespace {

// .ann surface fields are single-line; document slices may span paragraphs.
std::string newlines_to_spaces(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "train";
}

const Document* Corpus::find(const std::string& doc_id) const {
  for (const Document& d : documents) {
    if (d.doc_id == doc_id) return &d;
  }
  return nullptr;
}

std::vector<ReactionAnnotation> parse_ann(const std::string& ann_text,
                                          const std::string& doc_text,
                                          const AnnParseOptions& opts) {
  std::vector<ReactionAnnotation> out;
  std::istringstream in(ann_text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] != 'T') continue;  // R/E/A/#/* and friends are out of scope

    std::size_t tab1 = line.find('\t');
    if (tab1 == std::string::npos)
      throw ParseError("ann line " + std::to_string(line_no) +
                       ": T-line has no tab-separated fields");
    std::size_t tab2 = line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos)
      throw ParseError("ann line " + std::to_string(line_no) +
                       ": T-line is missing the surface field");
    std::string id = line.substr(0, tab1);
    std::string middle = line.substr(tab1 + 1, tab2 - tab1 - 1);
    std::string surface_field = line.substr(tab2 + 1);

    std::vector<std::string> parts = split_ws(middle);
    if (parts.size() != 3)
      throw ParseError("ann line " + std::to_string(line_no) +
                       ": expected '<label> <start> <end>', got '" + middle + "'");
    std::size_t start = 0, end = 0;
    try {
      std::size_t used = 0;
      start = std::stoull(parts[1], &used);
      if (used != parts[1].size()) throw std::invalid_argument(parts[1]);
      end = std::stoull(parts[2], &used);
      if (used != parts[2].size()) throw std::invalid_argument(parts[2]);
    } catch (const std::exception&) {
      throw ParseError("ann line " + std::to_string(line_no) +
                       ": offsets are not integers in '" + middle + "'");
    }

    if (!opts.accept_labels.empty() && !opts.accept_labels.count(parts[0]))
      continue;
    if (start >= end)
      throw DataError("annotation " + id + ": empty or inverted span [" +
                      std::to_string(start) + "," + std::to_string(end) + ")");
    if (end > doc_text.size())
      throw DataError("annotation " + id + ": span end " + std::to_string(end) +
                      " exceeds document length " +
                      std::to_string(doc_text.size()));

    std::string slice = doc_text.substr(start, end - start);
    if (newlines_to_spaces(slice) != newlines_to_spaces(surface_field))
      throw DataError("annotation " + id +
                      ": surface text does not match the document slice");

    out.push_back({id, {start, end}, parts[0], slice});
  }
  return out;
}

std::string write_ann(const std::vector<ReactionAnnotation>& annotations) {
  std::vector<const ReactionAnnotation*> sorted;
  sorted.reserve(annotations.size());
  for (const auto& a : annotations) sorted.push_back(&a);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ReactionAnnotation* a, const ReactionAnnotation* b) {
                     if (a->span.start != b->span.start)
                       return a->span.start < b->span.start;
                     if (a->span.end != b->span.end) return a->span.end < b->span.end;
                     return a->id < b->id;
                   });
  std::ostringstream out;
  for (const ReactionAnnotation* a : sorted) {
    out << a->id << '\t' << a->label << ' ' << a->span.start << ' '
        << a->span.end << '\t' << newlines_to_spaces(a->surface) << '\n';
  }
  return out.str();
}

Document load_document_pair(const std::string& txt_path,
                            const std::optional<std::string>& ann_path,
                            ParagraphMode mode, const AnnParseOptions& opts) {
  Document doc;
  doc.doc_id = fs::path(txt_path).stem().string();
  doc.text = read_file(txt_path);
  if (!utf8_valid(doc.text))
    throw DataError(txt_path + ": not valid UTF-8 text");
  doc.paragraphs = split_paragraphs(doc.text, mode);
  if (ann_path) {
    std::string ann_text = read_file(*ann_path);
    if (!utf8_valid(ann_text))
      throw DataError(*ann_path + ": not valid UTF-8 text");
    try {
      doc.annotations = parse_ann(ann_text, doc.text, opts);
    } catch (const DataError& e) {
      throw DataError(*ann_path + ": " + e.what());
    }
  }
  return doc;
}

Corpus load_corpus_dir(const std::string& dir, ParagraphMode mode,
                       const AnnParseOptions& opts) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
  std::vector<fs::path> txt_files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt")
      txt_files.push_back(entry.path());
  }
  std::sort(txt_files.begin(), txt_files.end());

  Corpus corpus;
  for (const fs::path& txt : txt_files) {
    fs::path ann = txt;
    ann.replace_extension(".ann");
    std::optional<std::string> ann_path;
    if (fs::exists(ann)) ann_path = ann.string();
    Document doc = load_document_pair(txt.string(), ann_path, mode, opts);
    corpus.split_assignment[doc.doc_id] = Split::train;
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

void assign_splits(Corpus& corpus, double validation_fraction, std::uint64_t seed) {
  if (validation_fraction < 0.0 || validation_fraction >= 1.0)
    throw ConfigError("validation fraction must be in [0, 1)");
  std::vector<std::string> ids;
  for (const Document& d : corpus.documents) {
    auto it = corpus.split_assignment.find(d.doc_id);
    if (it != corpus.split_assignment.end() && it->second == Split::test) continue;
    ids.push_back(d.doc_id);
  }
  std::sort(ids.begin(), ids.end());
  Rng rng(seed);
  rng.shuffle(ids);
  std::size_t n_val =
      static_cast<std::size_t>(std::floor(validation_fraction * static_cast<double>(ids.size())));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    corpus.split_assignment[ids[i]] =
        (i < n_val) ? Split::validation : Split::train;
  }
}

std::vector<const Document*> documents_in_split(const Corpus& corpus, Split split) {
  std::vector<const Document*> out;
  for (const Document& d : corpus.documents) {
    auto it = corpus.split_assignment.find(d.doc_id);
    if (it != corpus.split_assignment.end() && it->second == split)
      out.push_back(&d);
  }
  return out;
}

}  // namespace rex
