#include "pgdetect/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "pgdetect/features.hpp"

namespace pgd {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// Inverse normal CDF by bisection; only used for the feasibility bound.
double normal_quantile(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void SynthSpec::validate() const {
  if (n_rows < 2) throw std::invalid_argument("SynthSpec: n_rows must be >= 2");
  if (n_features < 1) throw std::invalid_argument("SynthSpec: n_features must be >= 1");
  if (n_signal > n_features) throw std::invalid_argument("SynthSpec: n_signal exceeds n_features");
  if (signal_strengths.size() != n_signal) {
    throw std::invalid_argument("SynthSpec: " + std::to_string(signal_strengths.size()) +
                                " strengths for " + std::to_string(n_signal) + " signal features");
  }
  for (double s : signal_strengths) {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("SynthSpec: signal strengths must be in (0,1)");
  }
  if (!(positive_rate > 0.0 && positive_rate < 1.0)) {
    throw std::invalid_argument("SynthSpec: positive_rate must be in (0,1)");
  }
  if (!(shared_nuisance >= 0.0 && shared_nuisance < 1.0)) {
    throw std::invalid_argument("SynthSpec: shared_nuisance must be in [0,1)");
  }
  std::size_t clique_total = 0;
  for (const auto& c : noise_cliques) {
    if (c.size < 2) throw std::invalid_argument("SynthSpec: noise cliques need >= 2 features");
    if (!(c.corr > 0.0 && c.corr < 1.0)) throw std::invalid_argument("SynthSpec: clique corr must be in (0,1)");
    clique_total += c.size;
  }
  if (clique_total > n_features - n_signal) {
    throw std::invalid_argument("SynthSpec: noise cliques need more features than are left after signals");
  }
}

SynthSpec preset_a_like(std::uint64_t seed) {
  SynthSpec s;
  s.n_rows = 4056;
  s.n_features = 102;
  s.n_signal = 5;
  s.signal_strengths = {0.2994, 0.2916, 0.2835, 0.2578, 0.2389};
  s.shared_nuisance = 0.85;
  s.noise_cliques = {{4, 0.6}, {4, 0.4}, {3, 0.7}};
  s.positive_rate = 0.5;
  s.seed = seed;
  return s;
}

SynthSpec preset_b_like(std::uint64_t seed) {
  SynthSpec s;
  s.n_rows = 4132;
  s.n_features = 27;
  s.n_signal = 5;
  s.signal_strengths = {0.4792, 0.4714, 0.4191, 0.4133, 0.3724};
  s.shared_nuisance = 0.0;
  s.noise_cliques = {{3, 0.5}};
  s.positive_rate = 0.5;
  s.seed = seed;
  return s;
}

SynthSpec preset(const std::string& name, std::uint64_t seed) {
  if (name == "a-like") return preset_a_like(seed);
  if (name == "b-like") return preset_b_like(seed);
  throw std::invalid_argument("unknown preset '" + name + "' (expected a-like or b-like)");
}

double max_point_biserial(double positive_rate) {
  const double z = normal_quantile(1.0 - positive_rate);
  return normal_pdf(z) / std::sqrt(positive_rate * (1.0 - positive_rate));
}

std::string synth_feature_name(std::size_t i) {
  std::string digits = std::to_string(i);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "feat_" + digits;
}

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_rows;
  const double c = spec.shared_nuisance;
  const double bound = max_point_biserial(spec.positive_rate) * std::sqrt(1.0 - c * c);
  for (double s : spec.signal_strengths) {
    if (s >= bound) {
      throw std::invalid_argument(
          "generate: signal strength " + format_double(s) +
          " is not achievable; point-biserial correlation must stay below " + format_double(bound) +
          " at positive_rate " + format_double(spec.positive_rate) + " and shared_nuisance " +
          format_double(c));
    }
  }

  Rng rng(spec.seed);
  const std::vector<double> risk = rng.normal_vector(n, 0.0, 1.0);
  const std::vector<double> nuisance = rng.normal_vector(n, 0.0, 1.0);

  // Flag the top round(rate * n) rows by latent risk.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return risk[a] > risk[b]; });
  const auto n_pos = static_cast<std::size_t>(
      std::floor(spec.positive_rate * static_cast<double>(n) + 0.5));
  std::vector<int> labels(n, 0);
  for (std::size_t i = 0; i < n_pos; ++i) labels[order[i]] = 1;
  const std::vector<double> flags(labels.begin(), labels.end());

  // Signal features land at seeded positions among the columns.
  const auto column_order = rng.permutation(spec.n_features);
  SynthData out;
  out.signal_columns.assign(column_order.begin(),
                            column_order.begin() + static_cast<std::ptrdiff_t>(spec.n_signal));

  Matrix features(n, spec.n_features);
  std::vector<double> column(n);
  for (std::size_t k = 0; k < spec.n_signal; ++k) {
    const std::vector<double> own = rng.normal_vector(n, 0.0, 1.0);
    const double sign = k % 2 == 0 ? 1.0 : -1.0;
    const double a_max = std::sqrt(1.0 - c * c);
    auto build = [&](double a) {
      const double rest = std::sqrt(std::max(0.0, 1.0 - a * a - c * c));
      for (std::size_t i = 0; i < n; ++i) column[i] = a * risk[i] + sign * c * nuisance[i] + rest * own[i];
      return pearson(column, flags).r;
    };
    const double target = spec.signal_strengths[k];
    double lo = 0.0, hi = a_max;
    if (build(hi) <= target) {
      lo = hi;  // sample cannot reach the target; use the strongest loading
    } else {
      while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        (build(mid) < target ? lo : hi) = mid;
      }
    }
    const double a = 0.5 * (lo + hi);
    build(a);
    out.signal_loadings.push_back(a);
    const std::size_t col = out.signal_columns[k];
    for (std::size_t i = 0; i < n; ++i) features(i, col) = column[i];
  }

  std::size_t next = spec.n_signal;
  for (const auto& clique : spec.noise_cliques) {
    const std::vector<double> shared = rng.normal_vector(n, 0.0, 1.0);
    const double load = std::sqrt(clique.corr);
    const double rest = std::sqrt(1.0 - clique.corr);
    for (std::size_t m = 0; m < clique.size; ++m, ++next) {
      const std::size_t col = column_order[next];
      for (std::size_t i = 0; i < n; ++i) features(i, col) = load * shared[i] + rest * rng.normal();
    }
  }
  for (; next < spec.n_features; ++next) {
    const std::size_t col = column_order[next];
    for (std::size_t i = 0; i < n; ++i) features(i, col) = rng.normal();
  }

  out.table.features = std::move(features);
  out.table.labels = std::move(labels);
  for (std::size_t f = 0; f < spec.n_features; ++f) {
    out.table.feature_names.push_back(synth_feature_name(f));
  }
  out.reason_codes.assign(n, "none");
  if (spec.emit_reason_codes) {
    Rng reason_rng(derive_seed(spec.seed, 1));
    const auto codes = sample_reason_codes(n_pos, reason_rng);
    for (std::size_t i = 0; i < n_pos; ++i) out.reason_codes[order[i]] = codes[i];
  }
  return out;
}

std::string synth_csv(const SynthData& data) {
  const auto& t = data.table;
  std::string out;
  for (const auto& name : t.feature_names) out += name + ",";
  out += "flag,rg_reason\n";
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (double v : t.features.row(r)) {
      out += format_double(v);
      out += ',';
    }
    out += t.labels[r] ? "1," : "0,";
    out += data.reason_codes.empty() ? std::string("none") : data.reason_codes[r];
    out += '\n';
  }
  return out;
}

std::vector<double> reason_probabilities() {
  std::vector<double> p;
  double total = 0.0;
  for (const auto& rc : kReasonCodes) {
    const double mid = (rc.low + rc.high) / 2.0;
    p.push_back(mid);
    total += mid;
  }
  for (auto& v : p) v /= total;
  return p;
}

std::vector<std::string> sample_reason_codes(std::size_t n, Rng& rng) {
  const auto p = reason_probabilities();
  std::vector<double> cumulative(p.size());
  std::partial_sum(p.begin(), p.end(), cumulative.begin());
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    out.emplace_back(kReasonCodes[static_cast<std::size_t>(it - cumulative.begin())].label);
  }
  return out;
}

std::map<std::string, double> reason_histogram(std::span<const std::string> codes) {
  if (codes.empty()) throw std::invalid_argument("reason_histogram: empty code list");
  std::map<std::string, double> hist;
  for (const auto& rc : kReasonCodes) hist[std::string(rc.label)] = 0.0;
  for (const auto& code : codes) {
    auto it = hist.find(code);
    if (it == hist.end()) throw std::invalid_argument("reason_histogram: unknown reason code '" + code + "'");
    it->second += 1.0;
  }
  for (auto& [label, v] : hist) v /= static_cast<double>(codes.size());
  return hist;
}

}  // namespace pgd
