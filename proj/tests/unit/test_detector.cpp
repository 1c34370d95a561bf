#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mgtd/detector.hpp"
#include "mgtd/error.hpp"
#include "synthetic.hpp"

using namespace mgtd;

namespace {

FeatureConfig small_config() {
  FeatureConfig c;
  c.hash_dimension = 1u << 12;
  return c;
}

// Disjoint alphabets: one cluster per class.
std::vector<ExampleUnit> clusters(std::size_t per_class, std::uint64_t seed) {
  mgtd::SplitMix64 rng(seed);
  auto word = [&](std::string_view letters) {
    std::string w;
    for (std::size_t k = 0, n = 3 + rng.below(5); k < n; ++k) w += letters[rng.below(letters.size())];
    return w;
  };
  std::vector<ExampleUnit> out;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const bool machine = i % 2;
    std::string text;
    for (int k = 0; k < 8; ++k) text += (k ? " " : "") + word(machine ? "abcdefg" : "qrstuvw");
    ExampleUnit u;
    u.text = text;
    u.label = machine ? Label::Machine : Label::Human;
    u.record_id = "c" + std::to_string(i);
    out.push_back(std::move(u));
  }
  return out;
}

double accuracy(const ModelParams& m, const features::Featurizer& f, const std::vector<ExampleUnit>& units) {
  const auto preds = detector::predict_labels(m, f, units);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < units.size(); ++i) ok += preds[i] == units[i].label;
  return static_cast<double>(ok) / static_cast<double>(units.size());
}

}  // namespace

TEST_CASE("train: separable clusters are learned exactly") {
  const auto units = clusters(100, 1);
  const features::Featurizer f(small_config());
  const auto m = detector::train(units, f, Hyperparams{});
  CHECK(accuracy(m, f, units) == 1.0);
  for (double w : m.weights) CHECK(std::isfinite(w));
  CHECK(m.threshold == 0.5);
  CHECK(m.fingerprint == f.fingerprint());
}

TEST_CASE("train: deterministic per seed") {
  const auto units = synthetic::units(60, 60, 2);
  Hyperparams h;
  h.seed = 9;
  const auto a = detector::train(units, small_config(), h), b = detector::train(units, small_config(), h);
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
  h.seed = 10;
  CHECK(detector::train(units, small_config(), h).weights != a.weights);
}

TEST_CASE("train: loss after the last epoch is not above the first") {
  const features::Featurizer f(small_config());
  const auto data = detector::featurize(synthetic::units(80, 80, 3), f);
  for (double lr : kLearningRateGrid) {
    Hyperparams h;
    h.learning_rate = lr;
    const auto r = detector::train_logged(data, f.config(), h);
    REQUIRE(r.epoch_loss.size() == 5);
    CHECK(r.epoch_loss.back() <= r.epoch_loss.front());
  }
}

TEST_CASE("train: errors") {
  auto units = clusters(5, 1);
  for (auto& u : units) u.label = Label::Human;
  CHECK_THROWS_AS(detector::train(units, small_config(), Hyperparams{}), Error);
  Hyperparams h;
  h.epochs = 0;
  CHECK_THROWS_AS(detector::train(clusters(5, 1), small_config(), h), Error);
  h = Hyperparams{};
  h.learning_rate = 0;
  CHECK_THROWS_AS(h.validate(), Error);
  h = Hyperparams{};
  h.batch_size = 0;
  CHECK_THROWS_AS(h.validate(), Error);
}

TEST_CASE("predict: zero model scores 0.5 and ties go to Machine") {
  const features::Featurizer f(small_config());
  ModelParams m;
  m.weights.assign(f.dimension(), 0.0);
  m.fingerprint = f.fingerprint();
  const auto p = detector::predict(m, f.extract("bonjour tout le monde").normalized());
  CHECK(p.score == 0.5);
  CHECK(p.label == Label::Machine);
}

TEST_CASE("predict: score is monotone in bias") {
  const features::Featurizer f(small_config());
  const auto m0 = detector::train(clusters(20, 4), f, Hyperparams{});
  const auto v = f.extract("abc def qrs").normalized();
  double prev = -1;
  for (double b = -3; b <= 3; b += 0.5) {
    auto m = m0;
    m.bias = b;
    const double s = detector::predict(m, v).score;
    CHECK(s > prev);
    prev = s;
  }
}

TEST_CASE("predict: matches a dense dot product on random sparse vectors") {
  const std::uint32_t dim = 1024 + 6;
  ModelParams m;
  mgtd::SplitMix64 rng(77);
  m.weights.resize(dim);
  for (double& w : m.weights) w = rng.uniform() * 2 - 1;
  m.bias = 0.3;
  m.fingerprint = "fp";
  for (int t = 0; t < 100; ++t) {
    std::vector<double> dense(dim, 0.0);
    FeatureVector v;
    v.config_fingerprint = "fp";
    v.dimension = dim;
    for (std::uint32_t i = 0; i < dim; ++i)
      if (rng.uniform() < 0.02) v.entries.emplace_back(i, dense[i] = rng.uniform() * 4 - 2);
    double z = m.bias;
    for (std::uint32_t i = 0; i < dim; ++i) z += m.weights[i] * dense[i];
    const auto p = detector::predict(m, v);
    CHECK(p.score == doctest::Approx(1.0 / (1.0 + std::exp(-z))).epsilon(1e-12));
    CHECK((p.label == Label::Machine) == (z >= 0));
  }
}

TEST_CASE("predict: fingerprint mismatch") {
  const auto units = clusters(10, 5);
  const features::Featurizer f(small_config());
  const auto m = detector::train(units, f, Hyperparams{});
  FeatureConfig other = small_config();
  other.lowercase = false;
  const features::Featurizer g(other);
  CHECK_THROWS_AS(detector::predict(m, g.extract("abc")), FingerprintMismatch);
  CHECK_THROWS_AS(detector::predict_labels(m, g, units), FingerprintMismatch);
}

TEST_CASE("positive rescaling of weights and bias keeps labels") {
  const auto units = synthetic::units(40, 40, 6);
  const features::Featurizer f(small_config());
  const auto m = detector::train(units, f, Hyperparams{});
  const auto base = detector::predict_labels(m, f, units);
  for (double k : {0.01, 0.5, 3.0, 1000.0}) {
    auto s = m;
    for (double& w : s.weights) w *= k;
    s.bias *= k;
    CHECK(detector::predict_labels(s, f, units) == base);
  }
}

TEST_CASE("model save/load round trip") {
  const features::Featurizer f(small_config());
  const auto m = detector::train(clusters(15, 7), f, Hyperparams{});
  std::stringstream ss;
  detector::save_model(ss, m);
  const auto back = detector::load_model(ss);
  CHECK(back.weights == m.weights);
  CHECK(back.bias == m.bias);
  CHECK(back.threshold == m.threshold);
  CHECK(back.fingerprint == m.fingerprint);
  CHECK(back.config == m.config);

  std::stringstream again;
  detector::save_model(again, back);
  std::stringstream first;
  detector::save_model(first, m);
  CHECK(again.str() == first.str());

  std::string text = first.str();
  text.replace(0, text.find('\n'), "mgtd-model 99");
  std::istringstream bad(text);
  try {
    detector::load_model(bad);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }
  std::istringstream junk("not a model\n");
  CHECK_THROWS_AS(detector::load_model(junk), FormatError);
}

TEST_CASE("run_seeds: order follows seeds") {
  const auto train = synthetic::units(40, 40, 8), test = synthetic::units(20, 20, 9);
  const std::vector<std::uint64_t> fwd{1, 2, 3}, rev{3, 2, 1}, one{2};
  const auto a = detector::run_seeds(train, test, small_config(), Hyperparams{}, fwd);
  const auto b = detector::run_seeds(train, test, small_config(), Hyperparams{}, rev);
  REQUIRE(a.size() == 3);
  REQUIRE(b.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a[i].seed == fwd[i]);
    CHECK(a[i].confusion == b[2 - i].confusion);
    CHECK(a[i].metrics == b[2 - i].metrics);
    CHECK(a[i].confusion.total() == test.size());
  }
  CHECK(detector::run_seeds(train, test, small_config(), Hyperparams{}, one).size() == 1);
  CHECK_THROWS_AS(detector::run_seeds(train, test, small_config(), Hyperparams{}, std::span<const std::uint64_t>{}),
                  Error);
}

TEST_CASE("select_learning_rate keeps the first best on ties") {
  const features::Featurizer f(small_config());
  const auto train = detector::featurize(clusters(30, 10), f);
  const auto valid = detector::featurize(clusters(10, 11), f);
  const auto sel = detector::select_learning_rate(train, valid, f.config(), Hyperparams{}, kLearningRateGrid);
  CHECK(sel.valid_macro_f1 == 1.0);
  CHECK(sel.learning_rate == kLearningRateGrid.front());
  const std::vector<double> empty;
  CHECK_THROWS_AS(detector::select_learning_rate(train, valid, f.config(), Hyperparams{}, empty), Error);
}
