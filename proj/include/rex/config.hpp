#ifndef REX_CONFIG_HPP
#define REX_CONFIG_HPP

#include <cstdint>
#include <string>

#include "rex/encode.hpp"
#include "rex/labeling.hpp"
#include "rex/nn.hpp"
#include "rex/segment.hpp"

namespace rex {

enum class DecoderKind { linear, trigram, crf };

DecoderKind decoder_kind_from_string(const std::string& s);
const char* decoder_kind_name(DecoderKind k);

// Flat `section.key = value` text file; unknown keys are rejected so typos
// surface as errors instead of silent defaults.
struct RunConfig {
  std::uint64_t seed = 42;

  struct Paths {
    std::string corpus_dir;
    std::string output_dir;
    std::string lexicon;
    std::string word_embedding_file;
    std::string contextual_file;
  } paths;

  ParagraphMode paragraph_mode = ParagraphMode::newline;

  Granularity granularity = Granularity::paragraph;
  RepairRule repair = RepairRule::orphan_i_becomes_b;

  bool chemmask_enabled = false;
  std::string patterns_version = "1";

  std::size_t word_dim = 16;
  std::size_t feature_dim = 2;
  EncoderMode encoder = EncoderMode::mean_pool;
  std::size_t hidden_dim = 16;
  RnnCell rnn_cell = RnnCell::tanh_cell;

  DecoderKind decoder = DecoderKind::crf;
  std::size_t window = 16;
  // auto resolves to true for the crf decoder, false otherwise
  std::string contextualize = "auto";
  std::size_t context_hidden_dim = 16;

  double learning_rate = 0.05;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  std::size_t batch_size = 8;
  double clip_norm = 5.0;
  double validation_fraction = 0.1;

  std::size_t fuzzy_tolerance = 1;

  bool contextualize_resolved() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Every key with its resolved value, in fixed order; written next to run
// outputs so any reported number can be traced to a full configuration.
std::string render_config(const RunConfig& config);

}  // namespace rex

#endif  // REX_CONFIG_HPP
