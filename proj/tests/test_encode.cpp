#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "rex/common.hpp"
#include "rex/encode.hpp"

using namespace rex;
using rex::test::TempDir;
using rex::test::fd_entry;
using rex::test::rel_err;

namespace {

Token make_token(const std::string& surface, TokenKind kind) {
  return Token{{0, surface.size()}, surface, kind};
}

}  // namespace

TEST_CASE("vocabulary reserves pad unk chem rows") {
  Vocabulary v;
  REQUIRE(v.size() == 3);
  CHECK(v.tokens[Vocabulary::kPad] == "[PAD]");
  CHECK(v.tokens[Vocabulary::kUnk] == "[UNK]");
  CHECK(v.tokens[Vocabulary::kChem] == "[CHEM]");
  CHECK(v.add("water") == 3);
  CHECK(v.add("water") == 3);
  CHECK(v.lookup("water") == 3);
  CHECK(v.lookup("unseen") == Vocabulary::kUnk);
  std::uint64_t h = v.hash();
  v.add("acid");
  CHECK(v.hash() != h);
}

TEST_CASE("embedding file loads with reserved rows") {
  TempDir tmp("embed_load");
  write_file(tmp.file("w.vec"), "2 3\nwater 1 2 3\nacid 0.5 -1 2.5e-1\n");
  EmbeddingTable t = load_embedding_table(tmp.file("w.vec"));
  CHECK(t.dim() == 3);
  REQUIRE(t.vocab.size() == 5);
  CHECK(t.matrix.rows == 5);
  std::size_t water = t.vocab.lookup("water");
  CHECK(t.matrix.at(water, 0) == 1.0);
  CHECK(t.matrix.at(water, 2) == 3.0);
  CHECK(t.matrix.at(t.vocab.lookup("acid"), 2) == 0.25);
  // reserved rows not present in the file stay zero
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(t.matrix.at(Vocabulary::kPad, j) == 0.0);
    CHECK(t.matrix.at(Vocabulary::kUnk, j) == 0.0);
  }
  CHECK(t.file_checksum != 0);
}

TEST_CASE("embedding file reserved tokens reuse reserved rows") {
  TempDir tmp("embed_reserved");
  write_file(tmp.file("w.vec"), "2 2\n[CHEM] 9 8\nacid 1 1\n");
  EmbeddingTable t = load_embedding_table(tmp.file("w.vec"));
  CHECK(t.vocab.size() == 4);
  CHECK(t.matrix.at(Vocabulary::kChem, 0) == 9.0);
  CHECK(t.matrix.at(Vocabulary::kChem, 1) == 8.0);
  CHECK(t.vocab.lookup("acid") == 3);
}

TEST_CASE("embedding file errors name the offending row") {
  TempDir tmp("embed_err");
  write_file(tmp.file("head.vec"), "not a header\n");
  CHECK_THROWS_AS(load_embedding_table(tmp.file("head.vec")), ParseError);

  write_file(tmp.file("fields.vec"), "1 3\nwater 1 2\n");
  CHECK_THROWS_WITH_AS(load_embedding_table(tmp.file("fields.vec")),
                       doctest::Contains("row 1"), ParseError);

  write_file(tmp.file("count.vec"), "3 2\nwater 1 2\nacid 3 4\n");
  CHECK_THROWS_WITH_AS(load_embedding_table(tmp.file("count.vec")),
                       doctest::Contains("declares 3"), ParseError);

  write_file(tmp.file("dup.vec"), "2 2\nwater 1 2\nwater 3 4\n");
  CHECK_THROWS_WITH_AS(load_embedding_table(tmp.file("dup.vec")),
                       doctest::Contains("duplicate token"), ParseError);

  write_file(tmp.file("float.vec"), "1 2\nwater 1 abc\n");
  CHECK_THROWS_WITH_AS(load_embedding_table(tmp.file("float.vec")),
                       doctest::Contains("bad float"), ParseError);

  CHECK_THROWS_AS(load_embedding_table(tmp.file("missing.vec")), DataError);
}

TEST_CASE("contextual store lookups and misses") {
  TempDir tmp("ctx_load");
  write_file(tmp.file("c.vec"), "2 2\ndocA:0:0 1 2\ndocA:1:3 4 5\n");
  ContextualStore store = load_contextual_store(tmp.file("c.vec"));
  CHECK(store.dim == 2);
  const Vec* hit = store.find("docA", 0, 0);
  REQUIRE(hit != nullptr);
  CHECK((*hit)[1] == 2.0);
  CHECK(store.miss_count == 0);
  CHECK(store.find("docA", 9, 9) == nullptr);
  CHECK(store.find("docB", 0, 0) == nullptr);
  CHECK(store.miss_count == 2);

  write_file(tmp.file("dup.vec"), "2 2\ndocA:0:0 1 2\ndocA:0:0 3 4\n");
  CHECK_THROWS_WITH_AS(load_contextual_store(tmp.file("dup.vec")),
                       doctest::Contains("duplicate key"), ParseError);
}

TEST_CASE("feature extraction fixtures") {
  auto f = FeatureEmbedder::extract(make_token("mmol", TokenKind::unit));
  CHECK(f == std::array<std::size_t, 6>{0, 0, 1, 0, 0, 4});
  f = FeatureEmbedder::extract(make_token("H2O", TokenKind::chemical));
  CHECK(f == std::array<std::size_t, 6>{1, 1, 0, 0, 1, 2});
  f = FeatureEmbedder::extract(make_token("Stir", TokenKind::word));
  CHECK(f == std::array<std::size_t, 6>{0, 0, 0, 0, 2, 0});
  f = FeatureEmbedder::extract(make_token("(", TokenKind::punctuation));
  CHECK(f == std::array<std::size_t, 6>{0, 0, 0, 1, 3, 3});
  f = FeatureEmbedder::extract(make_token("13.2", TokenKind::number));
  CHECK(f == std::array<std::size_t, 6>{0, 1, 0, 0, 3, 1});
  f = FeatureEmbedder::extract(make_token("pTSA", TokenKind::word));
  CHECK(f[4] == 3);  // mixed casing
}

TEST_CASE("embed_tokens concatenates word contextual and feature blocks") {
  EmbeddingTable table;
  table.vocab.add("acid");
  table.matrix = Tensor("word_embedding", table.vocab.size(), 2);
  table.matrix.at(3, 0) = 0.5;
  table.matrix.at(3, 1) = -0.5;
  table.matrix.at(Vocabulary::kUnk, 0) = 9.0;

  ContextualStore store;
  store.dim = 1;
  store.vectors["doc:4:1"] = {7.0};

  FeatureEmbedder features;
  features.build(1);
  for (auto* t : features.tensors()) {
    for (std::size_t i = 0; i < t->size(); ++i) t->value[i] = 0.01 * (i + 1);
  }

  Token a = make_token("acid", TokenKind::word);
  Token b = make_token("zzz", TokenKind::word);
  EmbedTrace trace;
  auto rows = embed_tokens({&a, &b}, table, &store, features, "doc", 4, trace);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0].size() == 2 + 1 + 6);
  CHECK(trace.word_rows == std::vector<std::size_t>{3, Vocabulary::kUnk});
  CHECK(rows[0][0] == 0.5);
  CHECK(rows[0][1] == -0.5);
  CHECK(rows[0][2] == 0.0);  // contextual miss for token 0
  CHECK(rows[1][0] == 9.0);  // OOV fell back to [UNK]
  CHECK(rows[1][2] == 7.0);  // contextual hit for token 1
  CHECK(store.miss_count == 1);
  // casing block: "acid" lower (row 0 of feat_casing)
  CHECK(rows[0][3 + 4] == features.tables[4].at(0, 0));
}

TEST_CASE("mean and max pooling fixtures") {
  ParagraphEncoderParams params;
  params.build(EncoderMode::mean_pool, 2, RnnCell::tanh_cell, 0);
  EncodeTrace trace;
  std::vector<Vec> rows = {{1.0, 3.0}, {3.0, 1.0}};
  CHECK(encode_paragraph(params, rows, trace) == Vec{2.0, 2.0});

  params.build(EncoderMode::max_pool, 2, RnnCell::tanh_cell, 0);
  CHECK(encode_paragraph(params, rows, trace) == Vec{3.0, 3.0});
  CHECK(trace.argmax_rows == std::vector<std::size_t>{1, 0});

  // empty unit encodes to zeros
  CHECK(encode_paragraph(params, {}, trace) == Vec{0.0, 0.0});
}

TEST_CASE("max pooling ties route to the lowest row") {
  ParagraphEncoderParams params;
  params.build(EncoderMode::max_pool, 2, RnnCell::tanh_cell, 0);
  EncodeTrace trace;
  std::vector<Vec> rows = {{2.0, 0.0}, {2.0, 1.0}};
  CHECK(encode_paragraph(params, rows, trace) == Vec{2.0, 1.0});
  CHECK(trace.argmax_rows == std::vector<std::size_t>{0, 1});

  std::vector<Vec> grads(2, Vec(2, 0.0));
  encode_backward(params, trace, rows, {1.0, 1.0}, grads);
  CHECK(grads[0] == Vec{1.0, 0.0});
  CHECK(grads[1] == Vec{0.0, 1.0});
}

TEST_CASE("pooling is order invariant") {
  Rng rng(3);
  std::vector<Vec> rows = rex::test::random_units(rng, 5, 4);
  std::vector<Vec> shuffled = {rows[3], rows[0], rows[4], rows[2], rows[1]};
  for (EncoderMode mode : {EncoderMode::mean_pool, EncoderMode::max_pool}) {
    ParagraphEncoderParams params;
    params.build(mode, 4, RnnCell::tanh_cell, 0);
    EncodeTrace t1, t2;
    Vec a = encode_paragraph(params, rows, t1);
    Vec b = encode_paragraph(params, shuffled, t2);
    for (std::size_t j = 0; j < a.size(); ++j) {
      CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("birnn final state matches the per-position outputs") {
  Rng rng(5);
  BiRnnParams p;
  p.build("encoder", RnnCell::tanh_cell, 3, 2);
  p.init(rng);
  auto inputs = rex::test::random_units(rng, 4, 3);

  BiRnnTrace t1;
  auto outs = birnn_forward(p, inputs, t1);
  BiRnnTrace t2;
  Vec fin = birnn_final_state(p, inputs, t2);
  REQUIRE(fin.size() == 4);
  // forward half from the last position, backward half from the first
  CHECK(fin[0] == doctest::Approx(outs[3][0]));
  CHECK(fin[1] == doctest::Approx(outs[3][1]));
  CHECK(fin[2] == doctest::Approx(outs[0][2]));
  CHECK(fin[3] == doctest::Approx(outs[0][3]));
}

namespace {

// dot(u, encode(embed(tokens))) exercised end to end; grads checked against
// central differences on every trainable tensor.
struct EncodeHarness {
  EmbeddingTable table;
  FeatureEmbedder features;
  ParagraphEncoderParams params;
  std::vector<Token> toks;
  Vec u;

  EncodeHarness(EncoderMode mode, RnnCell cell) {
    Rng rng(11);
    table.vocab.add("alpha");
    table.vocab.add("beta");
    table.matrix = Tensor("word_embedding", table.vocab.size(), 3);
    init_uniform(table.matrix, rng, -0.5, 0.5);
    features.build(2);
    features.init(rng);
    std::size_t d = 3 + features.output_dim();
    params.build(mode, d, cell, 2);
    if (mode == EncoderMode::birnn) params.rnn.init(rng);
    toks = {make_token("alpha", TokenKind::word),
            make_token("H2O", TokenKind::chemical),
            make_token("beta", TokenKind::unit)};
    u.resize(params.output_dim());
    for (auto& v : u) v = rng.uniform(-1.0, 1.0);
  }

  double loss() {
    std::vector<const Token*> ptrs;
    for (auto& t : toks) ptrs.push_back(&t);
    EmbedTrace et;
    auto rows = embed_tokens(ptrs, table, nullptr, features, "d", 0, et);
    EncodeTrace ct;
    Vec enc = encode_paragraph(params, rows, ct);
    double L = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) L += u[j] * enc[j];
    return L;
  }

  void backward() {
    std::vector<const Token*> ptrs;
    for (auto& t : toks) ptrs.push_back(&t);
    EmbedTrace et;
    auto rows = embed_tokens(ptrs, table, nullptr, features, "d", 0, et);
    EncodeTrace ct;
    encode_paragraph(params, rows, ct);
    std::vector<Vec> row_grads(rows.size(), Vec(rows[0].size(), 0.0));
    encode_backward(params, ct, rows, u, row_grads);
    embed_backward(table, features, nullptr, et, row_grads);
  }

  std::vector<Tensor*> tensors() {
    std::vector<Tensor*> out = {&table.matrix};
    for (auto* t : features.tensors()) out.push_back(t);
    for (auto* t : params.tensors()) out.push_back(t);
    return out;
  }
};

}  // namespace

TEST_CASE("encoder gradients match central differences") {
  const double eps = 1e-5;
  const double tol = 1e-4;
  for (auto [mode, cell] :
       {std::pair{EncoderMode::mean_pool, RnnCell::tanh_cell},
        std::pair{EncoderMode::max_pool, RnnCell::tanh_cell},
        std::pair{EncoderMode::birnn, RnnCell::tanh_cell},
        std::pair{EncoderMode::birnn, RnnCell::lstm}}) {
    EncodeHarness h(mode, cell);
    h.backward();
    std::size_t checked = 0;
    for (Tensor* t : h.tensors()) {
      for (std::size_t i = 0; i < t->size(); ++i) {
        double fd = fd_entry(*t, i, eps, [&] { return h.loss(); });
        CHECK(rel_err(fd, t->grad[i]) < tol);
        ++checked;
      }
    }
    CHECK(checked > 20);
  }
}
