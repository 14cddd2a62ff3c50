#include "rex/encode.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rex {

namespace {

const char* const kReserved[] = {"[PAD]", "[UNK]", "[CHEM]"};

double parse_double_strict(const std::string& field, std::size_t row) {
  const char* begin = field.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw ParseError("embedding row " + std::to_string(row) +
                     ": bad float '" + field + "'");
  }
  return v;
}

struct EmbeddingFileRows {
  std::size_t dim = 0;
  std::vector<std::pair<std::string, Vec>> rows;
};

// Shared reader for the word and contextual formats; they differ only in
// how the leading field is interpreted.
EmbeddingFileRows read_embedding_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file: " + path);

  EmbeddingFileRows out;
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("embedding file is empty: " + path);
  }
  auto header = split_ws(trim(line));
  if (header.size() != 2) {
    throw ParseError("embedding header must be '<rows> <dim>': " + path);
  }
  std::size_t declared_rows = 0;
  std::size_t dim = 0;
  try {
    declared_rows = std::stoul(header[0]);
    dim = std::stoul(header[1]);
  } catch (const std::exception&) {
    throw ParseError("embedding header must be '<rows> <dim>': " + path);
  }
  if (dim == 0) throw ParseError("embedding dim must be positive: " + path);
  out.dim = dim;

  std::size_t row = 0;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty()) continue;
    ++row;
    auto fields = split_ws(t);
    if (fields.size() != dim + 1) {
      throw ParseError("embedding row " + std::to_string(row) + ": expected " +
                       std::to_string(dim + 1) + " fields, got " +
                       std::to_string(fields.size()));
    }
    Vec values(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      values[j] = parse_double_strict(fields[j + 1], row);
    }
    out.rows.emplace_back(fields[0], std::move(values));
  }
  if (out.rows.size() != declared_rows) {
    throw ParseError("embedding file declares " + std::to_string(declared_rows) +
                     " rows, found " + std::to_string(out.rows.size()) + ": " +
                     path);
  }
  return out;
}

int casing_class(const std::string& s) {
  bool has_alpha = false;
  bool all_lower = true;
  bool all_upper = true;
  bool title = true;
  bool first_alpha = true;
  for (char ch : s) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (!std::isalpha(c)) continue;
    has_alpha = true;
    if (std::isupper(c)) {
      all_lower = false;
      if (!first_alpha) title = false;
    } else {
      all_upper = false;
      if (first_alpha) title = false;
    }
    first_alpha = false;
  }
  if (!has_alpha) return 3;
  if (all_lower) return 0;
  if (all_upper) return 1;
  if (title) return 2;
  return 3;
}

}  // namespace

Vocabulary::Vocabulary() {
  for (const char* t : kReserved) add(t);
}

std::size_t Vocabulary::add(const std::string& token) {
  auto it = index.find(token);
  if (it != index.end()) return it->second;
  std::size_t id = tokens.size();
  tokens.push_back(token);
  index.emplace(token, id);
  return id;
}

std::size_t Vocabulary::lookup(const std::string& token) const {
  auto it = index.find(token);
  return it == index.end() ? kUnk : it->second;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& t : tokens) {
    h ^= fnv1a64(t);
    h *= 1099511628211ull;
  }
  return h;
}

const Vec* ContextualStore::find(const std::string& doc_id, std::size_t unit,
                                 std::size_t token) const {
  std::string key = doc_id + ":" + std::to_string(unit) + ":" +
                    std::to_string(token);
  auto it = vectors.find(key);
  if (it == vectors.end()) {
    ++miss_count;
    return nullptr;
  }
  return &it->second;
}

const std::array<std::size_t, FeatureEmbedder::kFeatureCount>&
FeatureEmbedder::cardinalities() {
  static const std::array<std::size_t, kFeatureCount> k = {2, 2, 2, 2, 4, 5};
  return k;
}

void FeatureEmbedder::build(std::size_t per_feature_dim) {
  feature_dim = per_feature_dim;
  tables.clear();
  static const char* const names[kFeatureCount] = {
      "feat_is_chem", "feat_has_digit", "feat_has_unit",
      "feat_is_punct", "feat_casing",   "feat_kind"};
  const auto& card = cardinalities();
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    tables.emplace_back(names[f], card[f], feature_dim);
  }
}

void FeatureEmbedder::init(Rng& rng) {
  for (auto& t : tables) init_uniform(t, rng, -0.1, 0.1);
}

std::array<std::size_t, FeatureEmbedder::kFeatureCount> FeatureEmbedder::extract(
    const Token& token) {
  std::array<std::size_t, kFeatureCount> out{};
  out[0] = token.kind == TokenKind::chemical ? 1 : 0;
  bool digit = false;
  for (char c : token.surface) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
      break;
    }
  }
  out[1] = digit ? 1 : 0;
  out[2] = token.kind == TokenKind::unit ? 1 : 0;
  out[3] = token.kind == TokenKind::punctuation ? 1 : 0;
  out[4] = static_cast<std::size_t>(casing_class(token.surface));
  out[5] = static_cast<std::size_t>(token.kind);
  return out;
}

std::vector<Tensor*> FeatureEmbedder::tensors() {
  std::vector<Tensor*> out;
  for (auto& t : tables) out.push_back(&t);
  return out;
}

std::vector<Vec> embed_tokens(const std::vector<const Token*>& tokens,
                              const EmbeddingTable& table,
                              const ContextualStore* store,
                              const FeatureEmbedder& features,
                              const std::string& doc_id, std::size_t unit_index,
                              EmbedTrace& trace) {
  std::size_t d_w = table.dim();
  std::size_t d_c = store ? store->dim : 0;
  std::size_t d_f = features.output_dim();
  std::size_t d = d_w + d_c + d_f;

  trace.word_rows.clear();
  trace.features.clear();
  trace.word_rows.reserve(tokens.size());
  trace.features.reserve(tokens.size());

  std::vector<Vec> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& tok = *tokens[i];
    Vec row(d, 0.0);
    std::size_t word = table.vocab.lookup(tok.surface);
    trace.word_rows.push_back(word);
    for (std::size_t j = 0; j < d_w; ++j) row[j] = table.matrix.at(word, j);
    if (store) {
      const Vec* ctx = store->find(doc_id, unit_index, i);
      if (ctx) {
        for (std::size_t j = 0; j < d_c; ++j) row[d_w + j] = (*ctx)[j];
      }
    }
    auto vals = FeatureEmbedder::extract(tok);
    trace.features.push_back(vals);
    std::size_t off = d_w + d_c;
    for (std::size_t f = 0; f < FeatureEmbedder::kFeatureCount; ++f) {
      const Tensor& t = features.tables[f];
      for (std::size_t j = 0; j < features.feature_dim; ++j) {
        row[off + j] = t.at(vals[f], j);
      }
      off += features.feature_dim;
    }
    out.push_back(std::move(row));
  }
  return out;
}

void embed_backward(EmbeddingTable& table, FeatureEmbedder& features,
                    const ContextualStore* store, const EmbedTrace& trace,
                    const std::vector<Vec>& upstream) {
  std::size_t d_w = table.dim();
  std::size_t d_c = store ? store->dim : 0;
  for (std::size_t i = 0; i < upstream.size(); ++i) {
    const Vec& dy = upstream[i];
    std::size_t word = trace.word_rows[i];
    if (table.trainable) {
      for (std::size_t j = 0; j < d_w; ++j) {
        table.matrix.grad_at(word, j) += dy[j];
      }
    }
    std::size_t off = d_w + d_c;  // contextual block is constant input
    const auto& vals = trace.features[i];
    for (std::size_t f = 0; f < FeatureEmbedder::kFeatureCount; ++f) {
      Tensor& t = features.tables[f];
      for (std::size_t j = 0; j < features.feature_dim; ++j) {
        t.grad_at(vals[f], j) += dy[off + j];
      }
      off += features.feature_dim;
    }
  }
}

EncoderMode encoder_mode_from_string(const std::string& s) {
  if (s == "mean") return EncoderMode::mean_pool;
  if (s == "max") return EncoderMode::max_pool;
  if (s == "birnn") return EncoderMode::birnn;
  throw ConfigError("unknown paragraph encoder: " + s);
}

const char* encoder_mode_name(EncoderMode m) {
  switch (m) {
    case EncoderMode::mean_pool: return "mean";
    case EncoderMode::max_pool: return "max";
    case EncoderMode::birnn: return "birnn";
  }
  return "?";
}

void ParagraphEncoderParams::build(EncoderMode m, std::size_t token_d,
                                   RnnCell cell, std::size_t hidden) {
  mode = m;
  token_dim = token_d;
  if (mode == EncoderMode::birnn) {
    rnn.build("encoder", cell, token_dim, hidden);
  }
}

std::size_t ParagraphEncoderParams::output_dim() const {
  return mode == EncoderMode::birnn ? rnn.output_dim() : token_dim;
}

std::vector<Tensor*> ParagraphEncoderParams::tensors() {
  if (mode == EncoderMode::birnn) return rnn.tensors();
  return {};
}

Vec encode_paragraph(const ParagraphEncoderParams& params,
                     const std::vector<Vec>& token_rows, EncodeTrace& trace) {
  trace.token_count = token_rows.size();
  trace.argmax_rows.clear();
  std::size_t d_out = params.output_dim();
  if (token_rows.empty()) return Vec(d_out, 0.0);

  switch (params.mode) {
    case EncoderMode::mean_pool: {
      Vec out(d_out, 0.0);
      for (const Vec& row : token_rows) {
        for (std::size_t j = 0; j < d_out; ++j) out[j] += row[j];
      }
      double inv = 1.0 / static_cast<double>(token_rows.size());
      for (double& v : out) v *= inv;
      return out;
    }
    case EncoderMode::max_pool: {
      Vec out(token_rows[0]);
      trace.argmax_rows.assign(d_out, 0);
      for (std::size_t t = 1; t < token_rows.size(); ++t) {
        for (std::size_t j = 0; j < d_out; ++j) {
          // strict > keeps the lowest row index on ties
          if (token_rows[t][j] > out[j]) {
            out[j] = token_rows[t][j];
            trace.argmax_rows[j] = t;
          }
        }
      }
      return out;
    }
    case EncoderMode::birnn:
      return birnn_final_state(params.rnn, token_rows, trace.rnn);
  }
  return Vec(d_out, 0.0);
}

void encode_backward(ParagraphEncoderParams& params, const EncodeTrace& trace,
                     const std::vector<Vec>& token_rows, const Vec& upstream,
                     std::vector<Vec>& row_grads) {
  (void)token_rows;
  if (trace.token_count == 0) return;
  switch (params.mode) {
    case EncoderMode::mean_pool: {
      double inv = 1.0 / static_cast<double>(trace.token_count);
      for (std::size_t t = 0; t < trace.token_count; ++t) {
        for (std::size_t j = 0; j < upstream.size(); ++j) {
          row_grads[t][j] += upstream[j] * inv;
        }
      }
      return;
    }
    case EncoderMode::max_pool: {
      for (std::size_t j = 0; j < upstream.size(); ++j) {
        row_grads[trace.argmax_rows[j]][j] += upstream[j];
      }
      return;
    }
    case EncoderMode::birnn:
      birnn_final_state_backward(params.rnn, trace.rnn, upstream, &row_grads);
      return;
  }
}

EmbeddingTable load_embedding_table(const std::string& path) {
  EmbeddingFileRows data = read_embedding_file(path);
  EmbeddingTable table;
  // pass 1 fixes the vocabulary so reserved tokens in the file reuse their
  // reserved rows
  std::vector<std::size_t> row_ids;
  row_ids.reserve(data.rows.size());
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    const std::string& tok = data.rows[i].first;
    if (!seen.emplace(tok, i).second) {
      throw ParseError("embedding row " + std::to_string(i + 1) +
                       ": duplicate token '" + tok + "'");
    }
    row_ids.push_back(table.vocab.add(tok));
  }
  table.matrix = Tensor("word_embedding", table.vocab.size(), data.dim);
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    const Vec& v = data.rows[i].second;
    for (std::size_t j = 0; j < data.dim; ++j) {
      table.matrix.at(row_ids[i], j) = v[j];
    }
  }
  table.file_checksum = fnv1a64_file(path);
  return table;
}

ContextualStore load_contextual_store(const std::string& path) {
  EmbeddingFileRows data = read_embedding_file(path);
  ContextualStore store;
  store.dim = data.dim;
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    auto& [key, vec] = data.rows[i];
    if (store.vectors.count(key)) {
      throw ParseError("embedding row " + std::to_string(i + 1) +
                       ": duplicate key '" + key + "'");
    }
    store.vectors.emplace(key, std::move(vec));
  }
  store.file_checksum = fnv1a64_file(path);
  return store;
}

}  // namespace rex
