#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pgdetect/dataset.hpp"
#include "pgdetect/rng.hpp"

namespace pgd {

/// A group of noise features sharing one latent factor; pairwise correlation ~= corr.
struct NoiseClique {
  std::size_t size = 0;
  double corr = 0.0;
};

struct SynthSpec {
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  std::size_t n_signal = 0;
  /// Target |corr(feature, flag)| per signal feature, each in (0, 1).
  std::vector<double> signal_strengths;
  /// Loading of a nuisance factor shared by all signal features with
  /// alternating sign. Signal features then carry redundant noise that a
  /// combination of neighbours can cancel. 0 disables it.
  double shared_nuisance = 0.0;
  std::vector<NoiseClique> noise_cliques;
  double positive_rate = 0.5;
  std::uint64_t seed = 0;
  bool emit_reason_codes = true;

  void validate() const;
};

/// 4,056 users x 102 features, planted strengths at the Dataset A top-5 magnitudes.
SynthSpec preset_a_like(std::uint64_t seed = 0);
/// 4,132 users x 27 features, planted strengths at the Dataset B top-5 magnitudes.
SynthSpec preset_b_like(std::uint64_t seed = 0);
/// "a-like" or "b-like"; throws otherwise.
SynthSpec preset(const std::string& name, std::uint64_t seed = 0);

struct SynthData {
  DatasetTable table;
  /// Reason label per row; "none" for unflagged rows or when codes are disabled.
  std::vector<std::string> reason_codes;
  /// Column index of each planted signal feature, in signal_strengths order.
  std::vector<std::size_t> signal_columns;
  /// Calibrated loading on the latent risk per signal feature.
  std::vector<double> signal_loadings;
};

/// Latent risk r ~ N(0,1); the top positive_rate share of rows by r is flagged.
/// Signal feature k = a_k r + s_k c u + sqrt(1 - a_k^2 - c^2) e_k, with a_k set
/// by bisection so the sample point-biserial correlation hits the target.
/// Throws when a target reaches the achievable bound.
SynthData generate(const SynthSpec& spec);

/// Largest point-biserial correlation a unit-variance feature can reach
/// against a threshold flag at this positive rate: phi(z) / sqrt(p(1-p)).
double max_point_biserial(double positive_rate);

/// Column name of feature i in generated tables, e.g. "feat_007".
std::string synth_feature_name(std::size_t i);

/// CSV with features, "flag", and (when codes are present) "rg_reason".
std::string synth_csv(const SynthData& data);

// ------------------------------------------------------------------ reason codes

struct ReasonCode {
  std::string_view label;
  std::string_view description;
  double low;   // reported proportion range, percent
  double high;
};

inline constexpr std::array<ReasonCode, 11> kReasonCodes{{
    {"account_closure", "Account closure/reopening due to problem gambling", 40, 45},
    {"self_report", "The user reports a problem", 14, 16},
    {"limit_change", "The user requests a limit change", 15, 22},
    {"game_block", "The user requests to block one or more games", 13, 15},
    {"deposit_limit_raise", "The user requests a higher personal deposit limit", 4, 5},
    {"fair_play_complaint", "The user heavily complains about fair play", 2, 2},
    {"third_party_block", "A third party asks to block the account", 0, 1},
    {"payout_cancel", "The user cancels an out-payment after requesting it", 0, 1},
    {"payment_block", "The user requests to block an in-payment method", 0, 1},
    {"under_age", "The user is under age", 0, 1},
    {"other", "Others or unclassified", 0, 1},
}};

/// Interval midpoints renormalized to sum to 1, in kReasonCodes order.
std::vector<double> reason_probabilities();

std::vector<std::string> sample_reason_codes(std::size_t n, Rng& rng);

/// Empirical frequency per label (all labels present, zeros included).
/// Throws for an empty list or an unknown label.
std::map<std::string, double> reason_histogram(std::span<const std::string> codes);

}  // namespace pgd
