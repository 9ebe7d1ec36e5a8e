#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pfld/filter.hpp"
#include "pfld/operators.hpp"
#include "pfld/sampler.hpp"
#include "pfld/schedule.hpp"
#include "pfld/score.hpp"

namespace pfld::harness {

/// Malformed or inconsistent experiment configuration. The message starts
/// with the offending field path, e.g. "problem.prior.mean: ...".
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct OperatorSpec {
  OperatorKind kind = OperatorKind::kIdentity;
  std::vector<int> observed;  // inpaint: kept indices (alternative to box)
  std::optional<std::vector<int>> box;  // inpaint: dropped rectangle {row, col, h, w}
  std::vector<double> kernel;           // blur: explicit taps
  double blur_sigma = 1.0;
  int blur_taps = 5;
  int factor = 2;
};

struct CodecSpec {
  CodecKind kind = CodecKind::kIdentity;
  std::uint64_t seed = 0;
};

struct ProblemSpec {
  GmmPrior prior;
  OperatorSpec op;
  CodecSpec codec;
  ImageShape shape;
  std::optional<Vector> signal;      // explicit x* (pixel space)
  std::uint64_t signal_seed = 0;     // otherwise x* = D(z), z drawn from the prior
  double sigma_nu = 0.01;
  std::uint64_t measurement_seed = 0;
};

struct ScheduleSpec {
  int steps = 1000;
  double beta_min = 1e-4;
  double beta_max = 0.02;
  AncestralVariance variance = AncestralVariance::kPosterior;
};

// Unset optionals resolve per operator/prior, see resolve_psld().
struct SamplerSpec {
  double eta = 0.3;
  std::optional<double> gamma;
  std::optional<bool> glue;
  std::optional<GradientMode> gradient_mode;
  GlueReference glue_reference = GlueReference::kMeasurement;
  bool stochastic = true;
};

struct MetricSpec {
  double max_value = 1.0;
  int ssim_window = 11;
};

struct OutputSpec {
  std::string dir = "pfld_out";
  bool json = true;
  bool csv = true;
};

struct ExperimentConfig {
  ProblemSpec problem;
  ScheduleSpec schedule;
  SamplerSpec sampler;
  FilterConfig filter;
  std::vector<std::uint64_t> seeds{1};
  MetricSpec metrics;
  OutputSpec output;
  std::vector<int> sweep_particles{1, 5, 10, 15, 20, 25, 30};
  std::vector<int> sweep_pruning{10, 20, 30};
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Stable JSON rendering of every field except `output`.
std::string canonical_json(const ExperimentConfig& cfg);
/// FNV-1a over canonical_json(), 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Parses "7", "1,2,3" or "base:count".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

}  // namespace pfld::harness
