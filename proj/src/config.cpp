#include "rex/config.hpp"

#include <sstream>

namespace rex {

namespace {

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" +
                    value + "'");
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    std::uint64_t v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" +
                      value + "'");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" +
                      value + "'");
  }
}

}  // namespace

DecoderKind decoder_kind_from_string(const std::string& s) {
  if (s == "linear") return DecoderKind::linear;
  if (s == "trigram") return DecoderKind::trigram;
  if (s == "crf") return DecoderKind::crf;
  throw ConfigError("unknown decoder kind: " + s);
}

const char* decoder_kind_name(DecoderKind k) {
  switch (k) {
    case DecoderKind::linear: return "linear";
    case DecoderKind::trigram: return "trigram";
    case DecoderKind::crf: return "crf";
  }
  return "?";
}

bool RunConfig::contextualize_resolved() const {
  if (contextualize == "true") return true;
  if (contextualize == "false") return false;
  return decoder == DecoderKind::crf;
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'section.key = value'");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key");
    }
    try {
      if (key == "seed") {
        config.seed = parse_u64(key, value);
      } else if (key == "paths.corpus_dir") {
        config.paths.corpus_dir = value;
      } else if (key == "paths.output_dir") {
        config.paths.output_dir = value;
      } else if (key == "paths.lexicon") {
        config.paths.lexicon = value;
      } else if (key == "paths.word_embedding_file") {
        config.paths.word_embedding_file = value;
      } else if (key == "paths.contextual_file") {
        config.paths.contextual_file = value;
      } else if (key == "segment.paragraph_mode") {
        config.paragraph_mode = paragraph_mode_from_string(value);
      } else if (key == "labeling.granularity") {
        config.granularity = granularity_from_string(value);
      } else if (key == "labeling.orphan_i") {
        if (value == "b") {
          config.repair = RepairRule::orphan_i_becomes_b;
        } else if (value == "o") {
          config.repair = RepairRule::orphan_i_becomes_o;
        } else {
          throw ConfigError("config key 'labeling.orphan_i': expected b or o");
        }
      } else if (key == "chemmask.enabled") {
        config.chemmask_enabled = parse_bool(key, value);
      } else if (key == "chemmask.patterns_version") {
        config.patterns_version = value;
      } else if (key == "encode.word_dim") {
        config.word_dim = parse_u64(key, value);
      } else if (key == "encode.feature_dim") {
        config.feature_dim = parse_u64(key, value);
      } else if (key == "encode.paragraph_encoder") {
        config.encoder = encoder_mode_from_string(value);
      } else if (key == "encode.hidden_dim") {
        config.hidden_dim = parse_u64(key, value);
      } else if (key == "encode.rnn_cell") {
        config.rnn_cell = rnn_cell_from_string(value);
      } else if (key == "decode.kind") {
        config.decoder = decoder_kind_from_string(value);
      } else if (key == "decode.window") {
        config.window = parse_u64(key, value);
        if (config.window == 0) {
          throw ConfigError("config key 'decode.window': must be positive");
        }
      } else if (key == "decode.contextualize") {
        if (value != "auto" && value != "true" && value != "false") {
          throw ConfigError(
              "config key 'decode.contextualize': expected auto, true or false");
        }
        config.contextualize = value;
      } else if (key == "decode.context_hidden_dim") {
        config.context_hidden_dim = parse_u64(key, value);
      } else if (key == "train.learning_rate") {
        config.learning_rate = parse_real(key, value);
      } else if (key == "train.max_epochs") {
        config.max_epochs = parse_u64(key, value);
      } else if (key == "train.patience") {
        config.patience = parse_u64(key, value);
      } else if (key == "train.batch_size") {
        config.batch_size = parse_u64(key, value);
        if (config.batch_size == 0) {
          throw ConfigError("config key 'train.batch_size': must be positive");
        }
      } else if (key == "train.clip_norm") {
        config.clip_norm = parse_real(key, value);
      } else if (key == "train.validation_fraction") {
        config.validation_fraction = parse_real(key, value);
      } else if (key == "eval.fuzzy_tolerance") {
        config.fuzzy_tolerance = parse_u64(key, value);
      } else {
        throw ConfigError("unknown config key: " + key);
      }
    } catch (const ConfigError&) {
      throw;
    }
  }
  return config;
}

RunConfig parse_config_file(const std::string& path) {
  return parse_config_text(read_file(path));
}

std::string render_config(const RunConfig& config) {
  std::ostringstream out;
  out << "seed = " << config.seed << "\n";
  out << "paths.corpus_dir = " << config.paths.corpus_dir << "\n";
  out << "paths.output_dir = " << config.paths.output_dir << "\n";
  out << "paths.lexicon = " << config.paths.lexicon << "\n";
  out << "paths.word_embedding_file = " << config.paths.word_embedding_file
      << "\n";
  out << "paths.contextual_file = " << config.paths.contextual_file << "\n";
  out << "segment.paragraph_mode = " << paragraph_mode_name(config.paragraph_mode)
      << "\n";
  out << "labeling.granularity = " << granularity_name(config.granularity)
      << "\n";
  out << "labeling.orphan_i = "
      << (config.repair == RepairRule::orphan_i_becomes_b ? "b" : "o") << "\n";
  out << "chemmask.enabled = " << (config.chemmask_enabled ? "true" : "false")
      << "\n";
  out << "chemmask.patterns_version = " << config.patterns_version << "\n";
  out << "encode.word_dim = " << config.word_dim << "\n";
  out << "encode.feature_dim = " << config.feature_dim << "\n";
  out << "encode.paragraph_encoder = " << encoder_mode_name(config.encoder)
      << "\n";
  out << "encode.hidden_dim = " << config.hidden_dim << "\n";
  out << "encode.rnn_cell = " << rnn_cell_name(config.rnn_cell) << "\n";
  out << "decode.kind = " << decoder_kind_name(config.decoder) << "\n";
  out << "decode.window = " << config.window << "\n";
  out << "decode.contextualize = " << config.contextualize << "\n";
  out << "decode.context_hidden_dim = " << config.context_hidden_dim << "\n";
  out << "train.learning_rate = " << config.learning_rate << "\n";
  out << "train.max_epochs = " << config.max_epochs << "\n";
  out << "train.patience = " << config.patience << "\n";
  out << "train.batch_size = " << config.batch_size << "\n";
  out << "train.clip_norm = " << config.clip_norm << "\n";
  out << "train.validation_fraction = " << config.validation_fraction << "\n";
  out << "eval.fuzzy_tolerance = " << config.fuzzy_tolerance << "\n";
  return out.str();
}

}  // namespace rex
