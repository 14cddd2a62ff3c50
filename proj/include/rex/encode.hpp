#ifndef REX_ENCODE_HPP
#define REX_ENCODE_HPP

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "rex/nn.hpp"
#include "rex/segment.hpp"

namespace rex {

struct Vocabulary {
  // reserved rows, always present
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::size_t kChem = 2;

  std::vector<std::string> tokens;
  std::unordered_map<std::string, std::size_t> index;

  Vocabulary();
  std::size_t add(const std::string& token);
  std::size_t lookup(const std::string& token) const;  // kUnk when absent
  std::size_t size() const { return tokens.size(); }
  std::uint64_t hash() const;
};

struct EmbeddingTable {
  Vocabulary vocab;
  Tensor matrix;  // |V| x d_w
  bool trainable = true;
  std::uint64_t file_checksum = 0;

  std::size_t dim() const { return matrix.cols; }
};

// Precomputed contextual vectors keyed by doc_id:unit:token. Misses yield
// the zero vector and are counted.
struct ContextualStore {
  std::unordered_map<std::string, Vec> vectors;
  std::size_t dim = 0;
  std::uint64_t file_checksum = 0;
  mutable std::size_t miss_count = 0;

  const Vec* find(const std::string& doc_id, std::size_t unit,
                  std::size_t token) const;
};

// Fixed feature set; each feature owns a small trainable table of
// cardinality x feature_dim rows.
struct FeatureEmbedder {
  static constexpr std::size_t kFeatureCount = 6;
  // is_chem(2), has_digit(2), has_unit(2), is_punct(2), casing(4), kind(5)
  static const std::array<std::size_t, kFeatureCount>& cardinalities();

  std::size_t feature_dim = 0;
  std::vector<Tensor> tables;

  void build(std::size_t per_feature_dim);
  void init(Rng& rng);
  std::size_t output_dim() const { return kFeatureCount * feature_dim; }
  static std::array<std::size_t, kFeatureCount> extract(const Token& token);
  std::vector<Tensor*> tensors();
};

struct EmbedTrace {
  std::vector<std::size_t> word_rows;
  std::vector<std::array<std::size_t, FeatureEmbedder::kFeatureCount>> features;
};

// Row i = concat(word embedding, contextual block (zeros when absent),
// feature embeddings); OOV tokens use the [UNK] row.
std::vector<Vec> embed_tokens(const std::vector<const Token*>& tokens,
                              const EmbeddingTable& table,
                              const ContextualStore* store,
                              const FeatureEmbedder& features,
                              const std::string& doc_id, std::size_t unit_index,
                              EmbedTrace& trace);

void embed_backward(EmbeddingTable& table, FeatureEmbedder& features,
                    const ContextualStore* store, const EmbedTrace& trace,
                    const std::vector<Vec>& upstream);

enum class EncoderMode { mean_pool, max_pool, birnn };

EncoderMode encoder_mode_from_string(const std::string& s);
const char* encoder_mode_name(EncoderMode m);

struct ParagraphEncoderParams {
  EncoderMode mode = EncoderMode::mean_pool;
  std::size_t token_dim = 0;
  BiRnnParams rnn;  // birnn mode only

  void build(EncoderMode m, std::size_t token_d, RnnCell cell, std::size_t hidden);
  std::size_t output_dim() const;
  std::vector<Tensor*> tensors();
};

struct EncodeTrace {
  std::size_t token_count = 0;
  std::vector<std::size_t> argmax_rows;  // max-pool routing
  BiRnnTrace rnn;
};

// Empty paragraphs encode to the zero vector of output_dim.
Vec encode_paragraph(const ParagraphEncoderParams& params,
                     const std::vector<Vec>& token_rows, EncodeTrace& trace);

// Accumulates into row_grads (token_count rows of token_dim) and the rnn
// tensors' grads.
void encode_backward(ParagraphEncoderParams& params, const EncodeTrace& trace,
                     const std::vector<Vec>& token_rows, const Vec& upstream,
                     std::vector<Vec>& row_grads);

// Text format: first line "<rows> <dim>", then one row per line:
// <token> <f1> ... <fdim>. The contextual variant keys rows by
// <doc_id>:<unit>:<tok>.
EmbeddingTable load_embedding_table(const std::string& path);
ContextualStore load_contextual_store(const std::string& path);

}  // namespace rex

#endif  // REX_ENCODE_HPP
