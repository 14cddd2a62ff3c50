#ifndef REX_DECODE_HPP
#define REX_DECODE_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rex/chemmask.hpp"
#include "rex/config.hpp"
#include "rex/corpus.hpp"
#include "rex/encode.hpp"
#include "rex/labeling.hpp"
#include "rex/nn.hpp"

namespace rex {

using LabelScores = std::array<double, kNumLabels>;

// Boolean transition structure. Disallowed entries carry score kNegInf in
// the parameter tensors and are excluded from every update.
struct ConstraintMask {
  std::array<std::array<bool, kNumLabels>, kNumLabels> allowed;
  std::array<bool, kNumLabels> start_allowed;

  static ConstraintMask none();
  // forbids start->I and O->I; every sequence it admits is IOB2-valid
  static ConstraintMask iob2_default();

  bool operator==(const ConstraintMask& o) const = default;
};

struct CrfParams {
  std::size_t d_p = 0;
  Tensor emission_w;   // kNumLabels x d_p
  Tensor transitions;  // kNumLabels x kNumLabels
  Tensor start;        // kNumLabels x 1
  Tensor end;          // kNumLabels x 1
  ConstraintMask mask = ConstraintMask::iob2_default();

  void build(std::size_t d, const ConstraintMask& m);
  void init(Rng& rng);
  // pins masked transition/start scores to kNegInf and clears their grads;
  // called after construction and after every optimizer step
  void apply_mask();
  std::vector<Tensor*> tensors();
};

// emissions[t][y] = w_y . x_t
std::vector<LabelScores> crf_emissions(const CrfParams& p,
                                       const std::vector<Vec>& units);

// log Z by the forward algorithm in log space.
double crf_log_z(const CrfParams& p, const std::vector<LabelScores>& emissions);

double crf_sequence_score(const CrfParams& p,
                          const std::vector<LabelScores>& emissions,
                          const std::vector<Tag>& tags);

// marginals[t][y] = p(y_t = y | x) from forward-backward.
std::vector<LabelScores> crf_marginals(const CrfParams& p,
                                       const std::vector<LabelScores>& emissions);

// Returns -log p(gold | x). When grad_scale != 0, accumulates
// grad_scale * d(-log p)/d(theta) into the parameter grads and, if non-null,
// into input_grads (one d_p vector per unit, accumulated). Gold sequences
// that violate the mask raise DataError.
double crf_neg_log_likelihood(CrfParams& p, const std::vector<Vec>& units,
                              const std::vector<Tag>& gold, double grad_scale,
                              std::vector<Vec>* input_grads);

// Max-scoring sequence under the mask; score ties prefer the lower label
// index at each backtrack step. Always IOB2-valid with the default mask.
std::vector<Tag> viterbi(const CrfParams& p,
                         const std::vector<LabelScores>& emissions);

struct WindowParams {
  std::size_t radius = 0;  // 0 linear, 1 trigram
  std::size_t d_p = 0;
  Tensor w;    // kNumLabels x (2r+1)*d_p
  Tensor b;    // kNumLabels x 1
  Tensor pad;  // d_p x 1, trainable stand-in for out-of-range neighbors

  void build(std::size_t r, std::size_t d);
  void init(Rng& rng);
  std::vector<Tensor*> tensors();
};

std::vector<LabelScores> window_scores(const WindowParams& p,
                                       const std::vector<Vec>& units);

// Per-unit argmax, ties to the lower label index. Not repaired here.
std::vector<Tag> window_decode(const WindowParams& p,
                               const std::vector<Vec>& units);

// Summed per-unit softmax cross-entropy against gold; gradient handling as
// in crf_neg_log_likelihood.
double window_loss(WindowParams& p, const std::vector<Vec>& units,
                   const std::vector<Tag>& gold, double grad_scale,
                   std::vector<Vec>* input_grads);

// softmax probabilities per unit
std::vector<LabelScores> window_probs(const WindowParams& p,
                                      const std::vector<Vec>& units);

struct TrainingMeta {
  std::uint64_t seed = 0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_val_f1 = 0.0;
};

struct Model {
  RunConfig config;

  EmbeddingTable words;
  FeatureEmbedder features;
  ContextualStore contextual;
  bool has_contextual = false;

  ParagraphEncoderParams encoder;

  bool contextualize = false;
  BiRnnParams context_rnn;

  DecoderKind kind = DecoderKind::crf;
  CrfParams crf;
  WindowParams window;

  TrainingMeta meta;

  // shapes derived from config; tensors initialized from the seeded rng
  void build(const RunConfig& cfg, Vocabulary vocab, Rng& rng);
  std::size_t token_dim() const;
  std::size_t decoder_input_dim() const;
  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;

  // pins vocabulary hash, dimensions, label order, constraint mask, masking
  // flag and embedding-file checksums; serialized as one JSON line
  std::string fingerprint() const;
};

// Vocabulary from the train-split documents (plus reserved rows), insertion
// ordered by document then unit then token.
Vocabulary build_vocabulary(const Corpus& corpus, Granularity g);

struct TrainLogEntry {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_strict_f1 = 0.0;
  bool improved = false;
};

struct TrainResult {
  Model model;
  std::vector<TrainLogEntry> log;
};

// Mini-batch SGD on windowed chunks; per-epoch strict-F1 validation; early
// stop when epoch - best_epoch >= patience; returns the best checkpoint.
// Fully determined by config.seed.
TrainResult train(const Corpus& corpus, const RunConfig& config);

// Stride-W/2 windowing with overlap votes resolved by max confidence
// (CRF marginal / softmax probability); earlier window wins exact ties.
std::vector<Tag> predict_tags(const Model& model, const Document& doc);
std::vector<ExtractedSpan> predict(const Model& model, const Document& doc);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

// Contextual vectors live in their source file, not the checkpoint; this
// reloads them and verifies dimension and checksum against the fingerprint.
void attach_contextual(Model& model, const std::string& path);

// Guards prediction-time setup against the training-time fingerprint
// (masked model on unmasked input and the reverse).
void check_predict_compatibility(const Model& model, const RunConfig& runtime);

}  // namespace rex

#endif  // REX_DECODE_HPP
