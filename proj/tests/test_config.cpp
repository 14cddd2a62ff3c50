#include <string>

#include "doctest.h"
#include "rex/config.hpp"

using namespace rex;

TEST_CASE("config defaults") {
  RunConfig cfg = parse_config_text("");
  CHECK(cfg.seed == 42);
  CHECK(cfg.paragraph_mode == ParagraphMode::newline);
  CHECK(cfg.granularity == Granularity::paragraph);
  CHECK(cfg.repair == RepairRule::orphan_i_becomes_b);
  CHECK_FALSE(cfg.chemmask_enabled);
  CHECK(cfg.word_dim == 16);
  CHECK(cfg.feature_dim == 2);
  CHECK(cfg.encoder == EncoderMode::mean_pool);
  CHECK(cfg.decoder == DecoderKind::crf);
  CHECK(cfg.window == 16);
  CHECK(cfg.contextualize == "auto");
  CHECK(cfg.learning_rate == doctest::Approx(0.05));
  CHECK(cfg.max_epochs == 50);
  CHECK(cfg.patience == 5);
  CHECK(cfg.batch_size == 8);
  CHECK(cfg.clip_norm == doctest::Approx(5.0));
  CHECK(cfg.validation_fraction == doctest::Approx(0.1));
  CHECK(cfg.fuzzy_tolerance == 1);
}

TEST_CASE("config parses every section") {
  RunConfig cfg = parse_config_text(
      "# run setup\n"
      "seed = 7\n"
      "paths.corpus_dir = /data/corpus\n"
      "paths.output_dir = /data/out\n"
      "paths.lexicon = lex.dic\n"
      "segment.paragraph_mode = blankline\n"
      "labeling.granularity = sentence\n"
      "labeling.orphan_i = o\n"
      "chemmask.enabled = true\n"
      "chemmask.patterns_version = 2\n"
      "encode.word_dim = 8\n"
      "encode.feature_dim = 3\n"
      "encode.paragraph_encoder = birnn\n"
      "encode.hidden_dim = 4\n"
      "encode.rnn_cell = lstm\n"
      "decode.kind = trigram\n"
      "decode.window = 8\n"
      "decode.contextualize = false\n"
      "decode.context_hidden_dim = 6\n"
      "train.learning_rate = 0.1\n"
      "train.max_epochs = 9\n"
      "train.patience = 2\n"
      "train.batch_size = 4\n"
      "train.clip_norm = 1.5\n"
      "train.validation_fraction = 0.25\n"
      "eval.fuzzy_tolerance = 0\n");
  CHECK(cfg.seed == 7);
  CHECK(cfg.paths.corpus_dir == "/data/corpus");
  CHECK(cfg.paragraph_mode == ParagraphMode::blankline);
  CHECK(cfg.granularity == Granularity::sentence);
  CHECK(cfg.repair == RepairRule::orphan_i_becomes_o);
  CHECK(cfg.chemmask_enabled);
  CHECK(cfg.patterns_version == "2");
  CHECK(cfg.word_dim == 8);
  CHECK(cfg.encoder == EncoderMode::birnn);
  CHECK(cfg.rnn_cell == RnnCell::lstm);
  CHECK(cfg.decoder == DecoderKind::trigram);
  CHECK(cfg.window == 8);
  CHECK(cfg.fuzzy_tolerance == 0);
}

TEST_CASE("unknown keys are named in the error") {
  CHECK_THROWS_WITH_AS(parse_config_text("decode.windw = 16\n"),
                       doctest::Contains("decode.windw"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("just a line\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("train.batch_size = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("decode.window = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("seed = twelve\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("chemmask.enabled = yes\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("decode.contextualize = maybe\n"),
                  ConfigError);
}

TEST_CASE("contextualize auto follows the decoder kind") {
  RunConfig cfg;
  cfg.contextualize = "auto";
  cfg.decoder = DecoderKind::crf;
  CHECK(cfg.contextualize_resolved());
  cfg.decoder = DecoderKind::linear;
  CHECK_FALSE(cfg.contextualize_resolved());
  cfg.contextualize = "true";
  CHECK(cfg.contextualize_resolved());
  cfg.decoder = DecoderKind::crf;
  cfg.contextualize = "false";
  CHECK_FALSE(cfg.contextualize_resolved());
}

TEST_CASE("render_config round trips through the parser") {
  RunConfig cfg = parse_config_text(
      "seed = 9\nencode.paragraph_encoder = max\ndecode.kind = linear\n");
  RunConfig back = parse_config_text(render_config(cfg));
  CHECK(back.seed == 9);
  CHECK(back.encoder == EncoderMode::max_pool);
  CHECK(back.decoder == DecoderKind::linear);
  CHECK(render_config(back) == render_config(cfg));
}
