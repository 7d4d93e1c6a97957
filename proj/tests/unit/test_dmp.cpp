#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "dman/autodiff/grad_check.hpp"
#include "dman/autodiff/ops.hpp"
#include "dman/dmp/encoder.hpp"
#include "dman/errors.hpp"
#include "dman/synth/synthetic.hpp"

using namespace dman;

namespace {

Tensor random_input(std::size_t T, std::size_t d, Rng& rng) {
  std::vector<Real> v(T * d);
  for (auto& x : v) x = rng.uniform(-1, 1);
  return Tensor({T, d}, v);
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dman_test_" + name)).string();
}

}  // namespace

TEST(EncodeSentence, WidthIsFourH) {
  Rng rng(1);
  for (std::size_t h : {2u, 8u, 300u}) {
    auto p = EncoderParams::init(5, h, rng);
    auto r = encode_sentence(p, random_input(3, 5, rng));
    EXPECT_EQ(r.shape(), (Shape{4 * h}));
    if (h <= 8) EXPECT_EQ(pair_features(r, r).shape(), (Shape{16 * h}));
  }
}

TEST(EncodeSentence, LengthOne) {
  Rng rng(2);
  auto p = EncoderParams::init(4, 3, rng);
  auto xs = random_input(1, 4, rng);
  auto r = encode_sentence(p, xs);
  auto out = bilstm_directional(p.fwd, p.bwd, xs);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(r.at(j), out.forward.at(0, j));
    EXPECT_EQ(r.at(3 + j), out.backward.at(0, j));
    EXPECT_EQ(r.at(6 + j), out.forward.at(0, j));
    EXPECT_EQ(r.at(9 + j), out.backward.at(0, j));
  }
}

TEST(EncodeSentence, ZeroWeights) {
  Rng rng(3);
  auto p = EncoderParams::zeros(4, 5);
  auto r = encode_sentence(p, random_input(6, 4, rng));
  for (auto v : r.values()) EXPECT_EQ(v, 0.0);
}

TEST(EncodeSentence, EmptyRejected) {
  auto p = EncoderParams::zeros(2, 2);
  EmbeddingTable words{Vocab(), Tensor::zeros({2, 2})};
  EXPECT_THROW(encode_sentence(p, TokenizedSentence{}, words), std::invalid_argument);
}

TEST(EncodeSentence, DeterministicAndMaxDominates) {
  Rng rng(4);
  auto p = EncoderParams::init(3, 4, rng);
  for (int trial = 0; trial < 10; ++trial) {
    auto xs = random_input(2 + trial % 5, 3, rng);
    auto r1 = encode_sentence(p, xs);
    auto r2 = encode_sentence(p, xs);
    for (std::size_t i = 0; i < r1.numel(); ++i) EXPECT_EQ(r1.at(i), r2.at(i));
    auto out = bilstm_directional(p.fwd, p.bwd, xs);
    for (std::size_t t = 0; t < xs.dim(0); ++t) {
      for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_GE(r1.at(j), out.forward.at(t, j));
        EXPECT_GE(r1.at(4 + j), out.backward.at(t, j));
      }
    }
  }
}

TEST(PairFeatures, Values) {
  auto r = pair_features(Tensor::vector({1, 2}), Tensor::vector({3, 4}));
  const std::vector<Real> expect = {1, 2, 3, 4, 4, 6, 3, 8};
  ASSERT_EQ(r.numel(), 8u);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(r.at(i), expect[i]);

  auto z = pair_features(Tensor::zeros({3}), Tensor::zeros({3}));
  EXPECT_EQ(z.numel(), 12u);
  for (auto v : z.values()) EXPECT_EQ(v, 0.0);

  auto s = pair_features(Tensor::vector({3, 4}), Tensor::vector({1, 2}));
  for (std::size_t i = 4; i < 8; ++i) EXPECT_EQ(s.at(i), r.at(i));
  EXPECT_NE(s.at(0), r.at(0));

  EXPECT_THROW(pair_features(Tensor::zeros({2}), Tensor::zeros({3})), DimensionError);
}

TEST(DmpForward, Distribution) {
  auto head = DMPHead::zeros(8, 16);
  auto d = dmp_forward(head, Tensor::full({16}, 0.7));
  for (auto v : d.values()) EXPECT_NEAR(v, 0.125, 1e-15);

  Rng rng(5);
  head = DMPHead::init(8, 16, rng);
  std::vector<Real> rv(16);
  for (auto& v : rv) v = rng.uniform(-3, 3);
  auto r = Tensor::vector(rv);
  auto p = dmp_forward(head, r);
  double s = 0;
  for (auto v : p.values()) s += v;
  EXPECT_NEAR(s, 1.0, 1e-9);

  auto logits = dmp_logits(head, r);
  auto shifted = ops::add(logits, Tensor::full({8}, 123.0));
  auto a = ops::softmax(logits, 0), b = ops::softmax(shifted, 0);
  auto argmax = [](const Tensor& t) {
    auto v = t.values();
    return std::max_element(v.begin(), v.end()) - v.begin();
  };
  EXPECT_EQ(argmax(a), argmax(b));
  EXPECT_THROW(dmp_forward(head, Tensor::zeros({15})), DimensionError);
}

TEST(DmpGradient, TwoTokenPairAtH3) {
  Rng rng(6);
  DMPModel m;
  m.markers = default_markers();
  m.words = random_embeddings(Vocab({"a", "b", "c"}), 4, 1.0, rng, false);
  m.encoder = EncoderParams::init(4, 3, rng);
  m.head = DMPHead::init(8, 48, rng);
  m.config.keep_prob = 0.8;
  MarkerPair pair{sentence_from_tokens({"a", "b"}), sentence_from_tokens({"c", "a"}), 4};
  auto report = grad_check_params([&] { return dmp_loss(m, pair, false, 0); }, m.trainable());
  EXPECT_TRUE(report.passed) << report.max_rel_error << " a=" << report.analytic[report.worst_index] << " n=" << report.numeric[report.worst_index];
  EXPECT_LT(report.max_rel_error, 1e-5);
}

TEST(LrSchedule, HalvesOnDrop) {
  const auto lrs = lr_schedule({0.5, 0.6, 0.55, 0.7, 0.65, 0.64}, 0.1);
  const std::vector<Real> expect = {0.1, 0.1, 0.05, 0.05, 0.025, 0.0125};
  ASSERT_EQ(lrs.size(), expect.size());
  for (std::size_t i = 0; i < lrs.size(); ++i) EXPECT_DOUBLE_EQ(lrs[i], expect[i]);
  for (std::size_t i = 1; i < lrs.size(); ++i) EXPECT_LE(lrs[i], lrs[i - 1]);
}

TEST(TrainDmp, SyntheticTemplateCorpus) {
  auto suite = synth::make_suite(7);
  ASSERT_EQ(suite.dmp_train.size(), 800u);
  ASSERT_EQ(suite.dmp_val.size(), 200u);
  DMPConfig cfg;
  cfg.hidden = 32;
  const auto res = train_dmp(suite.dmp_train, suite.dmp_val, suite.words, default_markers(), cfg);
  ASSERT_EQ(res.log.size(), 10u);
  EXPECT_GE(res.best_val_acc, 0.90);
  EXPECT_DOUBLE_EQ(dmp_accuracy(res.model, suite.dmp_val), res.best_val_acc);
  for (std::size_t i = 1; i < res.log.size(); ++i) {
    EXPECT_LE(res.log[i].lr, res.log[i - 1].lr);
    const bool dropped = res.log[i].val_acc < res.log[i - 1].val_acc;
    EXPECT_DOUBLE_EQ(res.log[i].lr, dropped ? res.log[i - 1].lr / 2 : res.log[i - 1].lr);
  }
}

TEST(TrainDmp, EmptySplitRejected) {
  auto suite = synth::make_suite(1, {10, 5, 3, 3, 4});
  EXPECT_THROW(train_dmp({}, suite.dmp_val, suite.words, default_markers(), {}), std::invalid_argument);
  EXPECT_THROW(train_dmp(suite.dmp_train, {}, suite.words, default_markers(), {}), std::invalid_argument);
}

TEST(ExportEncoder, RoundTripBitIdentical) {
  auto suite = synth::make_suite(2, {40, 10, 3, 3, 4});
  DMPConfig cfg;
  cfg.hidden = 5;
  cfg.epochs = 2;
  auto res = train_dmp(suite.dmp_train, suite.dmp_val, suite.words, default_markers(), cfg);
  const auto path = temp_path("enc.ckpt");
  export_encoder(path, res.model);
  const auto ckpt = read_checkpoint(path);
  EXPECT_EQ(ckpt.hidden, 5u);
  EXPECT_EQ(ckpt.markers, default_markers());
  auto back = load_dmp_model(ckpt);
  const auto a = res.model.trainable(), b = back.trainable();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    ASSERT_EQ(a[k].shape(), b[k].shape());
    EXPECT_EQ(std::memcmp(a[k].values().data(), b[k].values().data(), a[k].numel() * sizeof(Real)), 0);
  }
  EXPECT_EQ(back.words.vocab, res.model.words.vocab);
  EXPECT_DOUBLE_EQ(dmp_accuracy(back, suite.dmp_val), dmp_accuracy(res.model, suite.dmp_val));

  const auto path2 = temp_path("enc2.ckpt");
  export_encoder(path2, back);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), {}), s2((std::istreambuf_iterator<char>(f2)), {});
  EXPECT_EQ(s1, s2);
}

TEST(ExportEncoder, MismatchedHiddenNamesBoth) {
  Rng rng(3);
  DMPModel m;
  m.markers = default_markers();
  m.words = random_embeddings(Vocab({"x"}), 3, 1.0, rng, false);
  m.encoder = EncoderParams::init(3, 6, rng);
  m.head = DMPHead::init(8, 96, rng);
  const auto ckpt = dmp_checkpoint(m);
  try {
    import_encoder(ckpt, 4);
    FAIL();
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("6"), std::string::npos);
    EXPECT_NE(msg.find("4"), std::string::npos);
  }
  EXPECT_NO_THROW(import_encoder(ckpt, 6));
}

TEST(Checkpoint, MissingOrCorruptFile) {
  EXPECT_THROW(read_checkpoint(temp_path("does_not_exist.ckpt")), IoError);
  const auto p = temp_path("garbage.ckpt");
  std::ofstream(p) << "not a checkpoint";
  EXPECT_THROW(read_checkpoint(p), FormatError);
}
