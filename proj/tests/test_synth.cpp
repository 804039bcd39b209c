#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pgdetect/features.hpp"
#include "pgdetect/synth.hpp"

using namespace pgd;

namespace {

SynthSpec planted(std::uint64_t seed) {
  SynthSpec s;
  s.n_rows = 4056;
  s.n_features = 102;
  s.n_signal = 5;
  s.signal_strengths = {0.45, 0.40, 0.35, 0.30, 0.25};
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("presets have the dataset shapes") {
  const auto a = generate(preset_a_like(1));
  CHECK(a.table.rows() == 4056);
  CHECK(a.table.cols() == 102);
  const auto b = generate(preset("b-like", 1));
  CHECK(b.table.rows() == 4132);
  CHECK(b.table.cols() == 27);
  CHECK_THROWS(preset("c-like"));
}

TEST_CASE("table strengths follow the reported top-5 magnitudes") {
  CHECK(preset_a_like().signal_strengths == std::vector<double>{0.2994, 0.2916, 0.2835, 0.2578, 0.2389});
  CHECK(preset_b_like().signal_strengths == std::vector<double>{0.4792, 0.4714, 0.4191, 0.4133, 0.3724});
}

TEST_CASE("planted correlations hit their targets") {
  const auto spec = planted(3);
  const auto d = generate(spec);
  const auto rep = correlation_report(d.table);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(std::abs(std::abs(rep.flag_corr[d.signal_columns[k]]) - spec.signal_strengths[k]) < 1e-4);
  }
  const double rate = static_cast<double>(d.table.positives()) / 4056.0;
  CHECK(std::abs(rate - 0.5) <= 0.01);
}

TEST_CASE("planted features rank above all noise") {
  int recovered = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = generate(planted(seed));
    const auto arr = select_and_arrange(correlation_report(d.table), 5);
    std::vector<std::string> want;
    for (auto c : d.signal_columns) want.push_back(d.table.feature_names[c]);
    auto got = arr.candidate_pool;
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    recovered += got == want;
  }
  CHECK(recovered >= 9);
}

TEST_CASE("no signal means small correlations") {
  SynthSpec s;
  s.n_rows = 4000;
  s.n_features = 20;
  s.seed = 5;
  const auto rep = correlation_report(generate(s).table);
  // 3 sigma of a null correlation at n = 4000 is about 0.047.
  for (double c : rep.flag_corr) CHECK(std::abs(c) < 0.1);
}

TEST_CASE("noise cliques are correlated") {
  SynthSpec s;
  s.n_rows = 4000;
  s.n_features = 10;
  s.noise_cliques = {{3, 0.6}};
  s.seed = 2;
  const auto d = generate(s);
  const auto rep = correlation_report(d.table);
  std::size_t strong = 0;
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = i + 1; j < 10; ++j)
      if (std::abs(rep.pairwise(i, j) - 0.6) < 0.05) ++strong;
  CHECK(strong == 3);
}

TEST_CASE("infeasible strength is rejected with the bound") {
  auto s = planted(1);
  s.signal_strengths[0] = 0.85;
  try {
    generate(s);
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("0.79") != std::string::npos);
  }
  CHECK(max_point_biserial(0.5) == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-6));
}

TEST_CASE("generation is deterministic") {
  const auto a = generate(preset_b_like(9)), b = generate(preset_b_like(9));
  CHECK(a.table.features == b.table.features);
  CHECK(a.table.labels == b.table.labels);
  CHECK(a.reason_codes == b.reason_codes);
  CHECK(synth_csv(a) == synth_csv(b));
  CHECK(generate(preset_b_like(10)).table.features != a.table.features);
}

TEST_CASE("reason codes only on flagged rows") {
  const auto d = generate(preset_b_like(4));
  for (std::size_t i = 0; i < d.table.rows(); ++i) {
    CHECK((d.reason_codes[i] == "none") == (d.table.labels[i] == 0));
  }
  const auto csv = synth_csv(d);
  CHECK(csv.substr(0, csv.find('\n')).ends_with(",flag,rg_reason"));
  CHECK(synth_feature_name(7) == "feat_007");
}

TEST_CASE("reason distribution") {
  const auto p = reason_probabilities();
  CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
  CHECK(p[0] == doctest::Approx(42.5 / 99.0).epsilon(1e-12));
  CHECK(p[10] == doctest::Approx(0.5 / 99.0).epsilon(1e-12));

  Rng rng(2024);
  const auto codes = sample_reason_codes(100000, rng);
  const auto hist = reason_histogram(codes);
  CHECK(hist.size() == 11);
  for (std::size_t i = 0; i < kReasonCodes.size(); ++i) {
    CHECK(std::abs(hist.at(std::string(kReasonCodes[i].label)) - p[i]) <= 0.02);
  }

  Rng a(1), b(1);
  CHECK(sample_reason_codes(50, a) == sample_reason_codes(50, b));
  const std::vector<std::string> one{"self_report"};
  CHECK(reason_histogram(one).at("self_report") == 1.0);
  CHECK_THROWS(reason_histogram(std::vector<std::string>{}));
  CHECK_THROWS(reason_histogram(std::vector<std::string>{"bogus"}));
}

TEST_CASE("spec validation") {
  SynthSpec s;
  s.n_rows = 10;
  s.n_features = 2;
  s.n_signal = 3;
  s.signal_strengths = {0.1, 0.1, 0.1};
  CHECK_THROWS(generate(s));
  s.n_signal = 1;
  CHECK_THROWS(generate(s));
}
