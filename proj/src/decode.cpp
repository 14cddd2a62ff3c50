#include "rex/decode.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "rex/eval.hpp"

namespace rex {

namespace {

using nlohmann::json;

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << v;
  return out.str();
}

std::uint64_t parse_hex64(const std::string& s) {
  return std::stoull(s, nullptr, 16);
}

Tag argmax_tag(const LabelScores& s) {
  // strict > keeps the lowest label index on ties
  int best = 0;
  for (int y = 1; y < kNumLabels; ++y) {
    if (s[y] > s[best]) best = y;
  }
  return static_cast<Tag>(best);
}

LabelScores softmax3(const LabelScores& s) {
  double m = std::max({s[0], s[1], s[2]});
  LabelScores e{std::exp(s[0] - m), std::exp(s[1] - m), std::exp(s[2] - m)};
  double z = e[0] + e[1] + e[2];
  return {e[0] / z, e[1] / z, e[2] / z};
}

double lse3(const LabelScores& s) { return logsumexp3(s[0], s[1], s[2]); }

}  // namespace

ConstraintMask ConstraintMask::none() {
  ConstraintMask m;
  for (auto& row : m.allowed) row.fill(true);
  m.start_allowed.fill(true);
  return m;
}

ConstraintMask ConstraintMask::iob2_default() {
  ConstraintMask m = none();
  m.allowed[static_cast<int>(Tag::O)][static_cast<int>(Tag::I)] = false;
  m.start_allowed[static_cast<int>(Tag::I)] = false;
  return m;
}

void CrfParams::build(std::size_t d, const ConstraintMask& m) {
  d_p = d;
  mask = m;
  emission_w = Tensor("crf.emission", kNumLabels, d);
  transitions = Tensor("crf.transitions", kNumLabels, kNumLabels);
  start = Tensor("crf.start", kNumLabels, 1);
  end = Tensor("crf.end", kNumLabels, 1);
  apply_mask();
}

void CrfParams::init(Rng& rng) {
  init_fan_in(emission_w, rng);
  // transitions and boundary scores start at zero
  apply_mask();
}

void CrfParams::apply_mask() {
  for (int a = 0; a < kNumLabels; ++a) {
    for (int b = 0; b < kNumLabels; ++b) {
      if (!mask.allowed[a][b]) {
        transitions.at(a, b) = kNegInf;
        transitions.grad_at(a, b) = 0.0;
      }
    }
    if (!mask.start_allowed[a]) {
      start.at(a, 0) = kNegInf;
      start.grad_at(a, 0) = 0.0;
    }
  }
}

std::vector<Tensor*> CrfParams::tensors() {
  return {&emission_w, &transitions, &start, &end};
}

std::vector<LabelScores> crf_emissions(const CrfParams& p,
                                       const std::vector<Vec>& units) {
  std::vector<LabelScores> out(units.size());
  for (std::size_t t = 0; t < units.size(); ++t) {
    if (units[t].size() != p.d_p) {
      throw DataError("unit vector dimension " + std::to_string(units[t].size()) +
                      " does not match crf input dimension " +
                      std::to_string(p.d_p));
    }
    for (int y = 0; y < kNumLabels; ++y) {
      double s = 0.0;
      for (std::size_t j = 0; j < p.d_p; ++j) {
        s += p.emission_w.at(y, j) * units[t][j];
      }
      out[t][y] = s;
    }
  }
  return out;
}

namespace {

std::vector<LabelScores> crf_alpha(const CrfParams& p,
                                   const std::vector<LabelScores>& em) {
  std::size_t L = em.size();
  std::vector<LabelScores> alpha(L);
  for (int y = 0; y < kNumLabels; ++y) {
    alpha[0][y] = p.start.at(y, 0) + em[0][y];
  }
  for (std::size_t t = 1; t < L; ++t) {
    for (int y = 0; y < kNumLabels; ++y) {
      LabelScores prev;
      for (int a = 0; a < kNumLabels; ++a) {
        prev[a] = alpha[t - 1][a] + p.transitions.at(a, y);
      }
      alpha[t][y] = lse3(prev) + em[t][y];
    }
  }
  return alpha;
}

std::vector<LabelScores> crf_beta(const CrfParams& p,
                                  const std::vector<LabelScores>& em) {
  std::size_t L = em.size();
  std::vector<LabelScores> beta(L);
  for (int y = 0; y < kNumLabels; ++y) beta[L - 1][y] = p.end.at(y, 0);
  for (std::size_t t = L - 1; t > 0; --t) {
    for (int y = 0; y < kNumLabels; ++y) {
      LabelScores nxt;
      for (int b = 0; b < kNumLabels; ++b) {
        nxt[b] = p.transitions.at(y, b) + em[t][b] + beta[t][b];
      }
      beta[t - 1][y] = lse3(nxt);
    }
  }
  return beta;
}

}  // namespace

double crf_log_z(const CrfParams& p, const std::vector<LabelScores>& emissions) {
  if (emissions.empty()) return 0.0;
  auto alpha = crf_alpha(p, emissions);
  LabelScores fin;
  for (int y = 0; y < kNumLabels; ++y) {
    fin[y] = alpha.back()[y] + p.end.at(y, 0);
  }
  return lse3(fin);
}

double crf_sequence_score(const CrfParams& p,
                          const std::vector<LabelScores>& emissions,
                          const std::vector<Tag>& tags) {
  if (emissions.size() != tags.size()) {
    throw DataError("tag sequence length does not match emissions");
  }
  if (tags.empty()) return 0.0;
  double s = p.start.at(static_cast<int>(tags[0]), 0);
  for (std::size_t t = 0; t < tags.size(); ++t) {
    s += emissions[t][static_cast<int>(tags[t])];
    if (t > 0) {
      s += p.transitions.at(static_cast<int>(tags[t - 1]),
                            static_cast<int>(tags[t]));
    }
  }
  s += p.end.at(static_cast<int>(tags.back()), 0);
  return s;
}

std::vector<LabelScores> crf_marginals(const CrfParams& p,
                                       const std::vector<LabelScores>& emissions) {
  std::size_t L = emissions.size();
  std::vector<LabelScores> out(L);
  if (L == 0) return out;
  auto alpha = crf_alpha(p, emissions);
  auto beta = crf_beta(p, emissions);
  LabelScores fin;
  for (int y = 0; y < kNumLabels; ++y) fin[y] = alpha[L - 1][y] + p.end.at(y, 0);
  double log_z = lse3(fin);
  for (std::size_t t = 0; t < L; ++t) {
    for (int y = 0; y < kNumLabels; ++y) {
      out[t][y] = std::exp(alpha[t][y] + beta[t][y] - log_z);
    }
  }
  return out;
}

double crf_neg_log_likelihood(CrfParams& p, const std::vector<Vec>& units,
                              const std::vector<Tag>& gold, double grad_scale,
                              std::vector<Vec>* input_grads) {
  std::size_t L = units.size();
  if (gold.size() != L) {
    throw DataError("gold tag count " + std::to_string(gold.size()) +
                    " does not match unit count " + std::to_string(L));
  }
  if (L == 0) return 0.0;
  if (!p.mask.start_allowed[static_cast<int>(gold[0])]) {
    throw DataError("gold tags violate the transition mask at position 0");
  }
  for (std::size_t t = 1; t < L; ++t) {
    if (!p.mask.allowed[static_cast<int>(gold[t - 1])][static_cast<int>(gold[t])]) {
      throw DataError("gold tags violate the transition mask at position " +
                      std::to_string(t));
    }
  }

  auto em = crf_emissions(p, units);
  auto alpha = crf_alpha(p, em);
  auto beta = crf_beta(p, em);
  LabelScores fin;
  for (int y = 0; y < kNumLabels; ++y) fin[y] = alpha[L - 1][y] + p.end.at(y, 0);
  double log_z = lse3(fin);
  double nll = log_z - crf_sequence_score(p, em, gold);

  if (grad_scale == 0.0) return nll;

  // d(-log p)/d emission[t][y] = p(y_t = y) - 1{gold}
  std::vector<LabelScores> d_em(L);
  for (std::size_t t = 0; t < L; ++t) {
    for (int y = 0; y < kNumLabels; ++y) {
      double marg = std::exp(alpha[t][y] + beta[t][y] - log_z);
      d_em[t][y] = marg - (static_cast<int>(gold[t]) == y ? 1.0 : 0.0);
    }
  }
  for (std::size_t t = 0; t < L; ++t) {
    for (int y = 0; y < kNumLabels; ++y) {
      double g = grad_scale * d_em[t][y];
      if (g == 0.0) continue;
      for (std::size_t j = 0; j < p.d_p; ++j) {
        p.emission_w.grad_at(y, j) += g * units[t][j];
      }
      if (input_grads) {
        for (std::size_t j = 0; j < p.d_p; ++j) {
          (*input_grads)[t][j] += g * p.emission_w.at(y, j);
        }
      }
    }
  }
  for (std::size_t t = 0; t + 1 < L; ++t) {
    for (int a = 0; a < kNumLabels; ++a) {
      for (int b = 0; b < kNumLabels; ++b) {
        if (!p.mask.allowed[a][b]) continue;
        double pair = std::exp(alpha[t][a] + p.transitions.at(a, b) +
                               em[t + 1][b] + beta[t + 1][b] - log_z);
        double ind = (static_cast<int>(gold[t]) == a &&
                      static_cast<int>(gold[t + 1]) == b)
                         ? 1.0
                         : 0.0;
        p.transitions.grad_at(a, b) += grad_scale * (pair - ind);
      }
    }
  }
  for (int y = 0; y < kNumLabels; ++y) {
    if (p.mask.start_allowed[y]) {
      double marg = std::exp(alpha[0][y] + beta[0][y] - log_z);
      double ind = static_cast<int>(gold[0]) == y ? 1.0 : 0.0;
      p.start.grad_at(y, 0) += grad_scale * (marg - ind);
    }
    double marg_end = std::exp(alpha[L - 1][y] + beta[L - 1][y] - log_z);
    double ind_end = static_cast<int>(gold[L - 1]) == y ? 1.0 : 0.0;
    p.end.grad_at(y, 0) += grad_scale * (marg_end - ind_end);
  }
  return nll;
}

std::vector<Tag> viterbi(const CrfParams& p,
                         const std::vector<LabelScores>& emissions) {
  std::size_t L = emissions.size();
  if (L == 0) return {};
  std::vector<LabelScores> delta(L);
  std::vector<std::array<int, kNumLabels>> back(L);
  for (int y = 0; y < kNumLabels; ++y) {
    delta[0][y] = p.start.at(y, 0) + emissions[0][y];
  }
  for (std::size_t t = 1; t < L; ++t) {
    for (int y = 0; y < kNumLabels; ++y) {
      int best = 0;
      double best_s = delta[t - 1][0] + p.transitions.at(0, y);
      for (int a = 1; a < kNumLabels; ++a) {
        double s = delta[t - 1][a] + p.transitions.at(a, y);
        if (s > best_s) {  // ties keep the lower predecessor index
          best_s = s;
          best = a;
        }
      }
      delta[t][y] = best_s + emissions[t][y];
      back[t][y] = best;
    }
  }
  int last = 0;
  double best_fin = delta[L - 1][0] + p.end.at(0, 0);
  for (int y = 1; y < kNumLabels; ++y) {
    double s = delta[L - 1][y] + p.end.at(y, 0);
    if (s > best_fin) {
      best_fin = s;
      last = y;
    }
  }
  std::vector<Tag> out(L);
  out[L - 1] = static_cast<Tag>(last);
  for (std::size_t t = L - 1; t > 0; --t) {
    last = back[t][last];
    out[t - 1] = static_cast<Tag>(last);
  }
  return out;
}

void WindowParams::build(std::size_t r, std::size_t d) {
  radius = r;
  d_p = d;
  w = Tensor("window.w", kNumLabels, (2 * r + 1) * d);
  b = Tensor("window.b", kNumLabels, 1);
  pad = Tensor("window.pad", d, 1);
}

void WindowParams::init(Rng& rng) {
  init_fan_in(w, rng);
  init_uniform(pad, rng, -0.1, 0.1);
  // bias starts at zero
}

std::vector<Tensor*> WindowParams::tensors() { return {&w, &b, &pad}; }

namespace {

// concat(prev..., cur, next...) with the pad vector outside the range
Vec window_input(const WindowParams& p, const std::vector<Vec>& units,
                 std::size_t t) {
  std::size_t width = 2 * p.radius + 1;
  Vec x(width * p.d_p);
  for (std::size_t k = 0; k < width; ++k) {
    long long pos = static_cast<long long>(t) + static_cast<long long>(k) -
                    static_cast<long long>(p.radius);
    const double* src;
    if (pos < 0 || pos >= static_cast<long long>(units.size())) {
      src = p.pad.value.data();
    } else {
      src = units[static_cast<std::size_t>(pos)].data();
    }
    std::copy(src, src + p.d_p, x.begin() + k * p.d_p);
  }
  return x;
}

}  // namespace

std::vector<LabelScores> window_scores(const WindowParams& p,
                                       const std::vector<Vec>& units) {
  for (const Vec& u : units) {
    if (u.size() != p.d_p) {
      throw DataError("unit vector dimension " + std::to_string(u.size()) +
                      " does not match window input dimension " +
                      std::to_string(p.d_p));
    }
  }
  std::vector<LabelScores> out(units.size());
  for (std::size_t t = 0; t < units.size(); ++t) {
    Vec x = window_input(p, units, t);
    for (int y = 0; y < kNumLabels; ++y) {
      double s = p.b.at(y, 0);
      for (std::size_t j = 0; j < x.size(); ++j) s += p.w.at(y, j) * x[j];
      out[t][y] = s;
    }
  }
  return out;
}

std::vector<Tag> window_decode(const WindowParams& p,
                               const std::vector<Vec>& units) {
  auto scores = window_scores(p, units);
  std::vector<Tag> out(scores.size());
  for (std::size_t t = 0; t < scores.size(); ++t) out[t] = argmax_tag(scores[t]);
  return out;
}

std::vector<LabelScores> window_probs(const WindowParams& p,
                                      const std::vector<Vec>& units) {
  auto scores = window_scores(p, units);
  for (auto& s : scores) s = softmax3(s);
  return scores;
}

double window_loss(WindowParams& p, const std::vector<Vec>& units,
                   const std::vector<Tag>& gold, double grad_scale,
                   std::vector<Vec>* input_grads) {
  if (gold.size() != units.size()) {
    throw DataError("gold tag count " + std::to_string(gold.size()) +
                    " does not match unit count " + std::to_string(units.size()));
  }
  auto scores = window_scores(p, units);
  double loss = 0.0;
  std::size_t width = 2 * p.radius + 1;
  for (std::size_t t = 0; t < units.size(); ++t) {
    double lz = lse3(scores[t]);
    loss += lz - scores[t][static_cast<int>(gold[t])];
    if (grad_scale == 0.0) continue;
    LabelScores probs = softmax3(scores[t]);
    Vec x = window_input(p, units, t);
    LabelScores ds;
    for (int y = 0; y < kNumLabels; ++y) {
      ds[y] = grad_scale *
              (probs[y] - (static_cast<int>(gold[t]) == y ? 1.0 : 0.0));
    }
    for (int y = 0; y < kNumLabels; ++y) {
      if (ds[y] == 0.0) continue;
      for (std::size_t j = 0; j < x.size(); ++j) {
        p.w.grad_at(y, j) += ds[y] * x[j];
      }
      p.b.grad_at(y, 0) += ds[y];
    }
    // route input gradient slices back to units or the pad parameter
    for (std::size_t k = 0; k < width; ++k) {
      long long pos = static_cast<long long>(t) + static_cast<long long>(k) -
                      static_cast<long long>(p.radius);
      bool in_range = pos >= 0 && pos < static_cast<long long>(units.size());
      if (!in_range) {
        for (std::size_t j = 0; j < p.d_p; ++j) {
          double g = 0.0;
          for (int y = 0; y < kNumLabels; ++y) {
            g += ds[y] * p.w.at(y, k * p.d_p + j);
          }
          p.pad.grad_at(j, 0) += g;
        }
      } else if (input_grads) {
        Vec& dst = (*input_grads)[static_cast<std::size_t>(pos)];
        for (std::size_t j = 0; j < p.d_p; ++j) {
          double g = 0.0;
          for (int y = 0; y < kNumLabels; ++y) {
            g += ds[y] * p.w.at(y, k * p.d_p + j);
          }
          dst[j] += g;
        }
      }
    }
  }
  return loss;
}

std::size_t Model::token_dim() const {
  return config.word_dim + (has_contextual ? contextual.dim : 0) +
         features.output_dim();
}

std::size_t Model::decoder_input_dim() const {
  return contextualize ? context_rnn.output_dim() : encoder.output_dim();
}

void Model::build(const RunConfig& cfg, Vocabulary vocab, Rng& rng) {
  config = cfg;
  kind = cfg.decoder;
  contextualize = cfg.contextualize_resolved();

  has_contextual = !cfg.paths.contextual_file.empty();
  if (has_contextual) {
    contextual = load_contextual_store(cfg.paths.contextual_file);
  }

  if (!cfg.paths.word_embedding_file.empty()) {
    EmbeddingTable from_file = load_embedding_table(cfg.paths.word_embedding_file);
    if (from_file.dim() != cfg.word_dim) {
      throw ConfigError("encode.word_dim = " + std::to_string(cfg.word_dim) +
                        " but embedding file has dimension " +
                        std::to_string(from_file.dim()));
    }
    words = std::move(from_file);
  } else {
    words.vocab = std::move(vocab);
    words.matrix = Tensor("word_embedding", words.vocab.size(), cfg.word_dim);
    init_uniform(words.matrix, rng, -0.1, 0.1);
    words.file_checksum = 0;
  }

  features.build(cfg.feature_dim);
  features.init(rng);

  encoder.build(cfg.encoder, token_dim(), cfg.rnn_cell, cfg.hidden_dim);
  if (cfg.encoder == EncoderMode::birnn) encoder.rnn.init(rng);

  if (contextualize) {
    context_rnn.build("context", cfg.rnn_cell, encoder.output_dim(),
                      cfg.context_hidden_dim);
    context_rnn.init(rng);
  }

  std::size_t d_in = decoder_input_dim();
  if (kind == DecoderKind::crf) {
    crf.build(d_in, ConstraintMask::iob2_default());
    crf.init(rng);
  } else {
    window.build(kind == DecoderKind::trigram ? 1 : 0, d_in);
    window.init(rng);
  }
}

std::vector<Tensor*> Model::tensors() {
  std::vector<Tensor*> out;
  out.push_back(&words.matrix);
  for (Tensor* t : features.tensors()) out.push_back(t);
  for (Tensor* t : encoder.tensors()) out.push_back(t);
  if (contextualize) {
    for (Tensor* t : context_rnn.tensors()) out.push_back(t);
  }
  if (kind == DecoderKind::crf) {
    for (Tensor* t : crf.tensors()) out.push_back(t);
  } else {
    for (Tensor* t : window.tensors()) out.push_back(t);
  }
  return out;
}

std::vector<const Tensor*> Model::tensors() const {
  auto mutable_list = const_cast<Model*>(this)->tensors();
  return {mutable_list.begin(), mutable_list.end()};
}

std::string Model::fingerprint() const {
  json j;
  j["version"] = 1;
  j["labels"] = "B,I,O";
  j["granularity"] = granularity_name(config.granularity);
  j["paragraph_mode"] = paragraph_mode_name(config.paragraph_mode);
  j["masked"] = config.chemmask_enabled;
  j["patterns_version"] = config.patterns_version;
  j["word_dim"] = config.word_dim;
  j["feature_dim"] = config.feature_dim;
  j["context_dim"] = has_contextual ? contextual.dim : 0;
  j["encoder"] = encoder_mode_name(config.encoder);
  j["rnn_cell"] = rnn_cell_name(config.rnn_cell);
  j["hidden_dim"] = config.hidden_dim;
  j["decoder"] = decoder_kind_name(kind);
  j["contextualize"] = contextualize;
  j["context_hidden_dim"] = contextualize ? config.context_hidden_dim : 0;
  j["window"] = config.window;
  j["repair"] =
      config.repair == RepairRule::orphan_i_becomes_b ? "b" : "o";
  j["vocab_size"] = words.vocab.size();
  j["vocab_hash"] = hex64(words.vocab.hash());
  j["word_file_checksum"] = hex64(words.file_checksum);
  j["contextual_checksum"] = hex64(has_contextual ? contextual.file_checksum : 0);
  const ConstraintMask m =
      kind == DecoderKind::crf ? crf.mask : ConstraintMask::iob2_default();
  std::string start_row, rows;
  for (int y = 0; y < kNumLabels; ++y) {
    start_row += m.start_allowed[y] ? '1' : '0';
  }
  for (int a = 0; a < kNumLabels; ++a) {
    for (int b = 0; b < kNumLabels; ++b) rows += m.allowed[a][b] ? '1' : '0';
  }
  j["mask_start"] = start_row;
  j["mask_transitions"] = rows;
  return j.dump();
}

Vocabulary build_vocabulary(const Corpus& corpus, Granularity g) {
  Vocabulary vocab;
  for (const Document& doc : corpus.documents) {
    auto it = corpus.split_assignment.find(doc.doc_id);
    if (it != corpus.split_assignment.end() && it->second != Split::train) {
      continue;
    }
    std::size_t units = unit_count(doc, g);
    for (std::size_t u = 0; u < units; ++u) {
      for (const Token* tok : unit_tokens(doc, g, u)) vocab.add(tok->surface);
    }
  }
  return vocab;
}

namespace {

struct UnitTrace {
  EmbedTrace embed;
  EncodeTrace enc;
  std::vector<Vec> rows;
};

// Pre-contextualizer unit vectors for units [begin, begin+len). Traces are
// kept only when a backward pass will follow.
std::vector<Vec> encode_units(const Model& m, const Document& doc,
                              std::size_t begin, std::size_t len,
                              std::vector<UnitTrace>* traces) {
  const ContextualStore* store = m.has_contextual ? &m.contextual : nullptr;
  Granularity g = m.config.granularity;
  std::vector<Vec> out;
  out.reserve(len);
  for (std::size_t u = 0; u < len; ++u) {
    UnitTrace local;
    UnitTrace& tr = traces ? (*traces)[u] : local;
    auto toks = unit_tokens(doc, g, begin + u);
    tr.rows = embed_tokens(toks, m.words, store, m.features, doc.doc_id,
                           begin + u, tr.embed);
    out.push_back(encode_paragraph(m.encoder, tr.rows, tr.enc));
  }
  return out;
}

void decode_window_tags(const Model& m, const std::vector<Vec>& dec_in,
                        std::vector<Tag>& tags, std::vector<double>& conf) {
  if (m.kind == DecoderKind::crf) {
    auto em = crf_emissions(m.crf, dec_in);
    tags = viterbi(m.crf, em);
    auto marg = crf_marginals(m.crf, em);
    conf.resize(tags.size());
    for (std::size_t t = 0; t < tags.size(); ++t) {
      conf[t] = marg[t][static_cast<int>(tags[t])];
    }
  } else {
    auto probs = window_probs(m.window, dec_in);
    tags.resize(probs.size());
    conf.resize(probs.size());
    for (std::size_t t = 0; t < probs.size(); ++t) {
      tags[t] = argmax_tag(probs[t]);
      conf[t] = probs[t][static_cast<int>(tags[t])];
    }
  }
}

struct Chunk {
  const Document* doc = nullptr;
  std::size_t begin = 0;
  std::size_t len = 0;
  std::vector<Tag> gold;
};

double global_grad_norm(const std::vector<Tensor*>& tensors) {
  double sq = 0.0;
  for (const Tensor* t : tensors) {
    if (!t->trainable) continue;
    for (double g : t->grad) sq += g * g;
  }
  return std::sqrt(sq);
}

struct MicroCounts {
  std::size_t matched = 0;
  std::size_t gold = 0;
  std::size_t pred = 0;

  double f1() const {
    double p = pred == 0 ? (gold == 0 ? 1.0 : 0.0)
                         : static_cast<double>(matched) / static_cast<double>(pred);
    double r = gold == 0 ? (pred == 0 ? 1.0 : 0.0)
                         : static_cast<double>(matched) / static_cast<double>(gold);
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
};

}  // namespace

TrainResult train(const Corpus& corpus, const RunConfig& config) {
  Granularity g = config.granularity;

  // validation docs come from the assigned split; when none are assigned the
  // selection mirrors assign_splits so external pre-assignment and internal
  // assignment agree
  std::vector<const Document*> train_docs;
  std::vector<const Document*> val_docs;
  {
    bool any_val = false;
    for (const auto& [id, split] : corpus.split_assignment) {
      if (split == Split::validation) any_val = true;
    }
    std::map<std::string, Split> assignment = corpus.split_assignment;
    if (!any_val && config.validation_fraction > 0.0) {
      if (config.validation_fraction >= 1.0) {
        throw ConfigError("train.validation_fraction must be in [0, 1)");
      }
      std::vector<std::string> ids;
      for (const Document& d : corpus.documents) {
        auto it = assignment.find(d.doc_id);
        if (it != assignment.end() && it->second == Split::test) continue;
        ids.push_back(d.doc_id);
      }
      std::sort(ids.begin(), ids.end());
      Rng split_rng(config.seed);
      split_rng.shuffle(ids);
      std::size_t n_val = static_cast<std::size_t>(
          std::floor(config.validation_fraction * static_cast<double>(ids.size())));
      for (std::size_t i = 0; i < ids.size(); ++i) {
        assignment[ids[i]] = (i < n_val) ? Split::validation : Split::train;
      }
    }
    for (const Document& d : corpus.documents) {
      auto it = assignment.find(d.doc_id);
      Split s = it == assignment.end() ? Split::train : it->second;
      if (s == Split::train) train_docs.push_back(&d);
      if (s == Split::validation) val_docs.push_back(&d);
    }
  }
  if (train_docs.empty()) throw DataError("no training documents");

  Vocabulary vocab;  // train split only
  for (const Document* d : train_docs) {
    std::size_t units = unit_count(*d, g);
    for (std::size_t u = 0; u < units; ++u) {
      for (const Token* tok : unit_tokens(*d, g, u)) vocab.add(tok->surface);
    }
  }

  Rng rng(config.seed);
  TrainResult result;
  Model& model = result.model;
  model.build(config, std::move(vocab), rng);
  model.meta.seed = config.seed;

  std::map<const Document*, std::vector<Tag>> gold_tags;
  for (const Document* d : train_docs) gold_tags[d] = spans_to_tags(*d, g).tags;
  for (const Document* d : val_docs) gold_tags[d] = spans_to_tags(*d, g).tags;

  // non-overlapping training chunks of at most W units; a chunk sliced out
  // of the middle of a reaction gets its leading orphan I repaired to B
  std::vector<Chunk> chunks;
  std::size_t W = config.window;
  for (const Document* d : train_docs) {
    const auto& tags = gold_tags[d];
    for (std::size_t s = 0; s < tags.size(); s += W) {
      Chunk c;
      c.doc = d;
      c.begin = s;
      c.len = std::min(W, tags.size() - s);
      c.gold.assign(tags.begin() + s, tags.begin() + s + c.len);
      if (c.gold[0] == Tag::I) c.gold[0] = Tag::B;
      chunks.push_back(std::move(c));
    }
  }
  if (chunks.empty()) throw DataError("training documents contain no units");

  const std::vector<const Document*>& score_docs =
      val_docs.empty() ? train_docs : val_docs;

  std::vector<Tensor*> tensors = model.tensors();
  std::vector<Vec> best_values;
  double best_f1 = -1.0;
  std::size_t best_epoch = 0;

  std::vector<std::size_t> order(chunks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t pos = 0; pos < order.size(); pos += config.batch_size) {
      ++batch_no;
      std::size_t batch_len = std::min(config.batch_size, order.size() - pos);
      double scale = 1.0 / static_cast<double>(batch_len);
      for (std::size_t k = 0; k < batch_len; ++k) {
        const Chunk& chunk = chunks[order[pos + k]];
        std::vector<UnitTrace> traces(chunk.len);
        std::vector<Vec> unit_vecs =
            encode_units(model, *chunk.doc, chunk.begin, chunk.len, &traces);
        BiRnnTrace ctx_trace;
        std::vector<Vec> dec_in = model.contextualize
                                      ? birnn_forward(model.context_rnn,
                                                      unit_vecs, ctx_trace)
                                      : unit_vecs;
        std::vector<Vec> input_grads(chunk.len,
                                     Vec(model.decoder_input_dim(), 0.0));
        double loss = 0.0;
        try {
          if (model.kind == DecoderKind::crf) {
            loss = crf_neg_log_likelihood(model.crf, dec_in, chunk.gold, scale,
                                          &input_grads);
          } else {
            loss = window_loss(model.window, dec_in, chunk.gold, scale,
                               &input_grads);
          }
        } catch (const DataError& e) {
          throw DataError(std::string(e.what()) + " (doc " +
                          chunk.doc->doc_id + ")");
        }
        if (!std::isfinite(loss)) {
          throw DataError("non-finite loss at epoch " + std::to_string(epoch) +
                          " batch " + std::to_string(batch_no) + " (doc " +
                          chunk.doc->doc_id + ")");
        }
        loss_sum += loss;

        std::vector<Vec> enc_grads;
        if (model.contextualize) {
          enc_grads.assign(chunk.len, Vec(model.encoder.output_dim(), 0.0));
          birnn_backward(model.context_rnn, ctx_trace, input_grads, &enc_grads);
        } else {
          enc_grads = std::move(input_grads);
        }
        const ContextualStore* store =
            model.has_contextual ? &model.contextual : nullptr;
        for (std::size_t u = 0; u < chunk.len; ++u) {
          std::vector<Vec> row_grads(traces[u].rows.size(),
                                     Vec(model.token_dim(), 0.0));
          encode_backward(model.encoder, traces[u].enc, traces[u].rows,
                          enc_grads[u], row_grads);
          embed_backward(model.words, model.features, store, traces[u].embed,
                         row_grads);
        }
      }

      double norm = global_grad_norm(tensors);
      double clip = config.clip_norm;
      double step_scale = 1.0;
      if (clip > 0.0 && norm > clip) step_scale = clip / norm;
      for (Tensor* t : tensors) {
        if (!t->trainable) continue;
        for (std::size_t i = 0; i < t->value.size(); ++i) {
          t->value[i] -= config.learning_rate * step_scale * t->grad[i];
        }
        t->zero_grad();
      }
      if (model.kind == DecoderKind::crf) model.crf.apply_mask();
    }

    MicroCounts counts;
    for (const Document* d : score_docs) {
      auto gold_spans = tags_to_spans(gold_tags[d], config.repair);
      auto pred_spans = predict(model, *d);
      std::set<ExtractedSpan> gold_set(gold_spans.begin(), gold_spans.end());
      for (const auto& p : pred_spans) counts.matched += gold_set.count(p);
      counts.gold += gold_spans.size();
      counts.pred += pred_spans.size();
    }
    double f1 = counts.f1();

    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(chunks.size());
    entry.val_strict_f1 = f1;
    entry.improved = f1 > best_f1;
    result.log.push_back(entry);

    if (f1 > best_f1) {
      best_f1 = f1;
      best_epoch = epoch;
      best_values.clear();
      for (const Tensor* t : tensors) best_values.push_back(t->value);
    }
    model.meta.epochs_run = epoch;
    if (epoch - best_epoch >= config.patience) break;
  }

  if (!best_values.empty()) {
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      tensors[i]->value = best_values[i];
    }
    if (model.kind == DecoderKind::crf) model.crf.apply_mask();
  }
  model.meta.best_epoch = best_epoch;
  model.meta.best_val_f1 = best_f1 < 0.0 ? 0.0 : best_f1;
  return result;
}

std::vector<Tag> predict_tags(const Model& model, const Document& doc) {
  std::size_t U = unit_count(doc, model.config.granularity);
  if (U == 0) return {};
  std::vector<Vec> unit_vecs = encode_units(model, doc, 0, U, nullptr);

  std::size_t W = model.config.window;
  std::size_t stride = std::max<std::size_t>(1, W / 2);
  std::vector<std::size_t> starts;
  for (std::size_t s = 0;; s += stride) {
    starts.push_back(s);
    if (s + W >= U) break;
  }

  std::vector<Tag> out(U, Tag::O);
  std::vector<double> best_conf(U, -1.0);
  for (std::size_t s : starts) {
    std::size_t len = std::min(W, U - s);
    std::vector<Vec> slice(unit_vecs.begin() + s, unit_vecs.begin() + s + len);
    BiRnnTrace ctx_trace;
    std::vector<Vec> dec_in =
        model.contextualize ? birnn_forward(model.context_rnn, slice, ctx_trace)
                            : std::move(slice);
    std::vector<Tag> tags;
    std::vector<double> conf;
    decode_window_tags(model, dec_in, tags, conf);
    // strictly greater confidence replaces, so the earlier window wins ties
    for (std::size_t t = 0; t < len; ++t) {
      if (conf[t] > best_conf[s + t]) {
        best_conf[s + t] = conf[t];
        out[s + t] = tags[t];
      }
    }
  }
  return out;
}

std::vector<ExtractedSpan> predict(const Model& model, const Document& doc) {
  return tags_to_spans(predict_tags(model, doc), model.config.repair);
}

void save_model(const Model& model, const std::string& path) {
  // ostringstream + hexfloat keeps the byte-identical determinism contract
  std::ostringstream out;
  out << "REXMODEL 1\n";
  out << "fingerprint " << model.fingerprint() << "\n";
  out << "meta " << model.meta.seed << " " << model.meta.epochs_run << " "
      << model.meta.best_epoch << " " << to_hexfloat(model.meta.best_val_f1)
      << "\n";
  std::string cfg = render_config(model.config);
  std::vector<std::string> cfg_lines = split(cfg, '\n');
  while (!cfg_lines.empty() && cfg_lines.back().empty()) cfg_lines.pop_back();
  out << "config " << cfg_lines.size() << "\n";
  for (const auto& line : cfg_lines) out << line << "\n";
  out << "vocab " << model.words.vocab.size() << "\n";
  for (const auto& tok : model.words.vocab.tokens) out << tok << "\n";
  for (const Tensor* t : model.tensors()) {
    out << "tensor " << t->name << " " << t->rows << " " << t->cols << " "
        << (t->trainable ? 1 : 0) << "\n";
    for (std::size_t r = 0; r < t->rows; ++r) {
      for (std::size_t c = 0; c < t->cols; ++c) {
        if (c) out << " ";
        out << to_hexfloat(t->at(r, c));
      }
      out << "\n";
    }
  }
  out << "end\n";
  write_file(path, out.str());
}

Model load_model(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "REXMODEL 1") {
    throw DataError("not a model checkpoint (bad magic): " + path);
  }
  if (!std::getline(in, line) || line.rfind("fingerprint ", 0) != 0) {
    throw DataError("checkpoint missing fingerprint: " + path);
  }
  std::string stored_fp = line.substr(std::string("fingerprint ").size());

  if (!std::getline(in, line) || line.rfind("meta ", 0) != 0) {
    throw DataError("checkpoint missing metadata: " + path);
  }
  TrainingMeta meta;
  {
    auto fields = split_ws(line);
    if (fields.size() != 5) throw DataError("malformed checkpoint metadata");
    meta.seed = std::stoull(fields[1]);
    meta.epochs_run = std::stoull(fields[2]);
    meta.best_epoch = std::stoull(fields[3]);
    meta.best_val_f1 = from_hexfloat(fields[4]);
  }

  if (!std::getline(in, line) || line.rfind("config ", 0) != 0) {
    throw DataError("checkpoint missing config block: " + path);
  }
  std::size_t cfg_lines = std::stoull(line.substr(7));
  std::string cfg_text;
  for (std::size_t i = 0; i < cfg_lines; ++i) {
    if (!std::getline(in, line)) throw DataError("truncated checkpoint config");
    cfg_text += line;
    cfg_text += "\n";
  }
  RunConfig cfg = parse_config_text(cfg_text);

  if (!std::getline(in, line) || line.rfind("vocab ", 0) != 0) {
    throw DataError("checkpoint missing vocabulary: " + path);
  }
  std::size_t vocab_size = std::stoull(line.substr(6));
  Vocabulary vocab;
  for (std::size_t i = 0; i < vocab_size; ++i) {
    if (!std::getline(in, line)) throw DataError("truncated checkpoint vocabulary");
    if (i < 3) {
      if (line != vocab.tokens[i]) {
        throw DataError("checkpoint vocabulary lost its reserved rows");
      }
    } else {
      vocab.add(line);
    }
  }
  if (vocab.size() != vocab_size) {
    throw DataError("checkpoint vocabulary contains duplicates");
  }

  json fp;
  try {
    fp = json::parse(stored_fp);
  } catch (const json::exception&) {
    throw DataError("unreadable checkpoint fingerprint: " + path);
  }

  Model model;
  model.config = cfg;
  model.kind = cfg.decoder;
  model.contextualize = cfg.contextualize_resolved();
  model.meta = meta;
  std::size_t context_dim = fp.value<std::size_t>("context_dim", 0);
  model.has_contextual = context_dim > 0;
  model.contextual.dim = context_dim;
  model.contextual.file_checksum =
      parse_hex64(fp.value("contextual_checksum", std::string("0")));
  model.words.vocab = std::move(vocab);
  model.words.matrix =
      Tensor("word_embedding", model.words.vocab.size(), cfg.word_dim);
  model.words.file_checksum =
      parse_hex64(fp.value("word_file_checksum", std::string("0")));
  model.features.build(cfg.feature_dim);
  model.encoder.build(cfg.encoder, model.token_dim(), cfg.rnn_cell,
                      cfg.hidden_dim);
  if (model.contextualize) {
    model.context_rnn.build("context", cfg.rnn_cell, model.encoder.output_dim(),
                            cfg.context_hidden_dim);
  }
  if (model.kind == DecoderKind::crf) {
    model.crf.build(model.decoder_input_dim(), ConstraintMask::iob2_default());
  } else {
    model.window.build(model.kind == DecoderKind::trigram ? 1 : 0,
                       model.decoder_input_dim());
  }

  std::map<std::string, Tensor*> by_name;
  for (Tensor* t : model.tensors()) by_name[t->name] = t;
  std::size_t loaded = 0;
  while (std::getline(in, line)) {
    if (line == "end") break;
    auto fields = split_ws(line);
    if (fields.size() != 5 || fields[0] != "tensor") {
      throw DataError("malformed checkpoint tensor header: " + line);
    }
    auto it = by_name.find(fields[1]);
    if (it == by_name.end()) {
      throw DataError("checkpoint tensor does not belong to this model: " +
                      fields[1]);
    }
    Tensor* t = it->second;
    std::size_t rows = std::stoull(fields[2]);
    std::size_t cols = std::stoull(fields[3]);
    if (rows != t->rows || cols != t->cols) {
      throw DataError("checkpoint tensor " + t->name + " has shape " +
                      std::to_string(rows) + "x" + std::to_string(cols) +
                      ", expected " + std::to_string(t->rows) + "x" +
                      std::to_string(t->cols));
    }
    t->trainable = fields[4] == "1";
    for (std::size_t r = 0; r < rows; ++r) {
      if (!std::getline(in, line)) {
        throw DataError("truncated checkpoint tensor " + t->name);
      }
      auto vals = split_ws(line);
      if (vals.size() != cols) {
        throw DataError("checkpoint tensor " + t->name + " row " +
                        std::to_string(r) + " has " +
                        std::to_string(vals.size()) + " values, expected " +
                        std::to_string(cols));
      }
      for (std::size_t c = 0; c < cols; ++c) {
        t->at(r, c) = from_hexfloat(vals[c]);
      }
    }
    ++loaded;
  }
  if (loaded != by_name.size()) {
    throw DataError("checkpoint is missing tensors (" + std::to_string(loaded) +
                    " of " + std::to_string(by_name.size()) + ")");
  }

  if (model.fingerprint() != stored_fp) {
    throw DataError("checkpoint fingerprint mismatch: " + path);
  }
  return model;
}

void attach_contextual(Model& model, const std::string& path) {
  if (!model.has_contextual) {
    throw ConfigError("model was trained without contextual embeddings");
  }
  ContextualStore store = load_contextual_store(path);
  if (store.dim != model.contextual.dim) {
    throw ConfigError("contextual file dimension " + std::to_string(store.dim) +
                      " does not match the model's " +
                      std::to_string(model.contextual.dim));
  }
  if (store.file_checksum != model.contextual.file_checksum) {
    throw ConfigError(
        "contextual file does not match the one used at training time "
        "(checksum mismatch)");
  }
  model.contextual = std::move(store);
}

void check_predict_compatibility(const Model& model, const RunConfig& runtime) {
  if (model.config.chemmask_enabled != runtime.chemmask_enabled) {
    throw ConfigError(std::string("model was trained on ") +
                      (model.config.chemmask_enabled ? "masked" : "unmasked") +
                      " input but chemmask.enabled = " +
                      (runtime.chemmask_enabled ? "true" : "false"));
  }
  if (model.has_contextual && runtime.paths.contextual_file.empty()) {
    throw ConfigError(
        "model uses contextual embeddings; paths.contextual_file is required");
  }
}

}  // namespace rex
