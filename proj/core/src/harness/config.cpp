#include "pfld/harness/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace pfld::harness {

namespace {

using nlohmann::json;

// A json node plus the dotted path that reached it, for error messages.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_ + ": " + what); }

  bool has(const char* key) const { return value_.is_object() && value_.contains(key); }
  Node at(const char* key) const {
    if (!has(key)) fail(std::string("missing field '") + key + "'");
    return Node(value_.at(key), join(key));
  }
  Node at(std::size_t i) const { return Node(value_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  void expect_object(std::initializer_list<const char*> allowed) const {
    if (!value_.is_object()) fail("expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : value_.items())
      if (!ok.count(item.key())) throw ConfigError(join(item.key().c_str()) + ": unknown field");
  }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    return value_.get<double>();
  }
  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("must be positive");
    return v;
  }
  long long integer() const {
    if (!value_.is_number_integer()) fail("expected an integer");
    return value_.get<long long>();
  }
  std::uint64_t seed() const {
    if (!value_.is_number_unsigned() && !(value_.is_number_integer() && value_.get<long long>() >= 0))
      fail("expected a non-negative integer");
    return value_.get<std::uint64_t>();
  }
  bool boolean() const {
    if (!value_.is_boolean()) fail("expected true/false");
    return value_.get<bool>();
  }
  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }
  std::size_t size() const {
    if (!value_.is_array()) fail("expected an array");
    return value_.size();
  }
  bool is_array() const { return value_.is_array(); }
  bool is_object() const { return value_.is_object(); }
  Vector vector() const {
    const auto n = size();
    if (n == 0) fail("expected a non-empty array");
    Vector v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = at(i).number();
    return v;
  }
  std::vector<int> ints() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(static_cast<int>(at(i).integer()));
    return out;
  }

 private:
  std::string join(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& value_;
  std::string path_;
};

GmmPrior parse_prior(const Node& n) {
  const std::string type = n.at("type").string();
  GmmPrior prior;
  if (type == "gaussian") {
    n.expect_object({"type", "mean", "variance"});
    prior = GmmPrior{{1.0}, {n.at("mean").vector()}, {n.at("variance").vector()}};
  } else if (type == "gmm") {
    n.expect_object({"type", "weights", "means", "variances"});
    const Node weights = n.at("weights");
    for (std::size_t k = 0; k < weights.size(); ++k) prior.weights.push_back(weights.at(k).number());
    const Node means = n.at("means");
    const Node vars = n.at("variances");
    for (std::size_t k = 0; k < means.size(); ++k) prior.means.push_back(means.at(k).vector());
    for (std::size_t k = 0; k < vars.size(); ++k) prior.variances.push_back(vars.at(k).vector());
  } else {
    n.at("type").fail("expected 'gaussian' or 'gmm'");
  }
  try {
    prior.validate();
  } catch (const InvalidArgument& e) {
    n.fail(e.what());
  }
  return prior;
}

OperatorSpec parse_operator(const Node& n) {
  n.expect_object({"kind", "observed", "box", "kernel", "sigma", "taps", "factor"});
  OperatorSpec op;
  const std::string kind = n.at("kind").string();
  if (kind == "identity") {
    op.kind = OperatorKind::kIdentity;
  } else if (kind == "inpaint") {
    op.kind = OperatorKind::kInpaintMask;
    if (n.has("observed")) op.observed = n.at("observed").ints();
    if (n.has("box")) {
      op.box = n.at("box").ints();
      if (op.box->size() != 4) n.at("box").fail("expected [row, col, height, width]");
    }
    if (op.observed.empty() && !op.box) n.fail("inpaint needs 'observed' indices or a 'box'");
  } else if (kind == "blur") {
    op.kind = OperatorKind::kGaussianBlur;
    if (n.has("kernel")) {
      const Vector k = n.at("kernel").vector();
      op.kernel.assign(k.data(), k.data() + k.size());
    }
    if (n.has("sigma")) op.blur_sigma = n.at("sigma").positive();
    if (n.has("taps")) op.blur_taps = static_cast<int>(n.at("taps").integer());
  } else if (kind == "downsample") {
    op.kind = OperatorKind::kDownsample;
    if (n.has("factor")) op.factor = static_cast<int>(n.at("factor").integer());
  } else {
    n.at("kind").fail("expected identity, inpaint, blur or downsample");
  }
  return op;
}

ProblemSpec parse_problem(const Node& n) {
  n.expect_object({"prior", "operator", "codec", "shape", "signal", "sigma_nu", "measurement_seed"});
  ProblemSpec p;
  p.prior = parse_prior(n.at("prior"));
  p.op = parse_operator(n.at("operator"));
  const int dim = p.prior.dim();
  if (n.has("shape")) {
    const auto hw = n.at("shape").ints();
    if (hw.size() != 2 || hw[0] < 1 || hw[1] < 1) n.at("shape").fail("expected [height, width]");
    p.shape = {hw[0], hw[1]};
  } else {
    p.shape = {1, dim};
  }
  if (p.shape.size() != dim) n.at("prior").fail("prior dimension does not match the image shape");
  if (n.has("codec")) {
    const Node c = n.at("codec");
    c.expect_object({"kind", "seed"});
    const std::string kind = c.at("kind").string();
    if (kind == "identity") {
      p.codec.kind = CodecKind::kIdentity;
    } else if (kind == "orthonormal") {
      p.codec.kind = CodecKind::kFixedLinear;
      if (c.has("seed")) p.codec.seed = c.at("seed").seed();
    } else {
      c.at("kind").fail("expected identity or orthonormal");
    }
  }
  if (n.has("signal")) {
    const Node s = n.at("signal");
    if (s.is_array()) {
      p.signal = s.vector();
      if (p.signal->size() != dim) s.fail("signal dimension does not match the image shape");
    } else {
      s.expect_object({"prior_draw_seed"});
      p.signal_seed = s.at("prior_draw_seed").seed();
    }
  }
  if (n.has("sigma_nu")) {
    p.sigma_nu = n.at("sigma_nu").number();
    if (!(p.sigma_nu >= 0.0)) n.at("sigma_nu").fail("must be >= 0");
  }
  if (n.has("measurement_seed")) p.measurement_seed = n.at("measurement_seed").seed();
  return p;
}

const char* variance_name(AncestralVariance v) { return v == AncestralVariance::kBeta ? "beta" : "posterior"; }
const char* mode_name(GradientMode m) { return m == GradientMode::kAnalytic ? "analytic" : "finite_difference"; }
const char* reference_name(GlueReference r) {
  return r == GlueReference::kTrueSignal ? "true_signal" : "measurement";
}

json to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  const Node n(root, "");
  n.expect_object({"problem", "schedule", "sampler", "filter", "seeds", "metrics", "sweeps", "output"});

  ExperimentConfig cfg;
  cfg.problem = parse_problem(n.at("problem"));

  if (n.has("schedule")) {
    const Node s = n.at("schedule");
    s.expect_object({"T", "beta_min", "beta_max", "variance"});
    if (s.has("T")) cfg.schedule.steps = static_cast<int>(s.at("T").integer());
    if (s.has("beta_min")) cfg.schedule.beta_min = s.at("beta_min").number();
    if (s.has("beta_max")) cfg.schedule.beta_max = s.at("beta_max").number();
    if (s.has("variance")) {
      const std::string v = s.at("variance").string();
      if (v == "posterior") cfg.schedule.variance = AncestralVariance::kPosterior;
      else if (v == "beta") cfg.schedule.variance = AncestralVariance::kBeta;
      else s.at("variance").fail("expected posterior or beta");
    }
    try {
      (void)DiffusionSchedule::linear(cfg.schedule.steps, cfg.schedule.beta_min, cfg.schedule.beta_max);
    } catch (const InvalidArgument& e) {
      s.fail(e.what());
    }
  }

  if (n.has("sampler")) {
    const Node s = n.at("sampler");
    s.expect_object({"eta", "gamma", "glue", "gradient_mode", "glue_reference", "stochastic"});
    if (s.has("eta")) cfg.sampler.eta = s.at("eta").number();
    if (!(cfg.sampler.eta >= 0.0)) s.at("eta").fail("must be >= 0");
    if (s.has("gamma")) {
      cfg.sampler.gamma = s.at("gamma").number();
      if (!(*cfg.sampler.gamma >= 0.0)) s.at("gamma").fail("must be >= 0");
    }
    if (s.has("glue")) cfg.sampler.glue = s.at("glue").boolean();
    if (s.has("gradient_mode")) {
      const std::string m = s.at("gradient_mode").string();
      if (m == "analytic") cfg.sampler.gradient_mode = GradientMode::kAnalytic;
      else if (m == "finite_difference") cfg.sampler.gradient_mode = GradientMode::kFiniteDifference;
      else s.at("gradient_mode").fail("expected analytic or finite_difference");
    }
    if (s.has("glue_reference")) {
      const std::string r = s.at("glue_reference").string();
      if (r == "measurement") cfg.sampler.glue_reference = GlueReference::kMeasurement;
      else if (r == "true_signal") cfg.sampler.glue_reference = GlueReference::kTrueSignal;
      else s.at("glue_reference").fail("expected measurement or true_signal");
    }
    if (s.has("stochastic")) cfg.sampler.stochastic = s.at("stochastic").boolean();
  }

  if (n.has("filter")) {
    const Node f = n.at("filter");
    f.expect_object({"N0", "threshold_ratio", "R", "resample"});
    if (f.has("N0")) cfg.filter.initial_particles = static_cast<int>(f.at("N0").integer());
    if (f.has("threshold_ratio")) cfg.filter.threshold_ratio = f.at("threshold_ratio").number();
    if (f.has("R")) cfg.filter.prune_period = static_cast<int>(f.at("R").integer());
    if (f.has("resample")) {
      const std::string r = f.at("resample").string();
      if (r == "multinomial") cfg.filter.scheme = ResampleScheme::kMultinomial;
      else if (r == "systematic") cfg.filter.scheme = ResampleScheme::kSystematic;
      else f.at("resample").fail("expected multinomial or systematic");
    }
    try {
      cfg.filter.validate();
    } catch (const InvalidArgument& e) {
      f.fail(e.what());
    }
  }

  if (n.has("seeds")) {
    const Node s = n.at("seeds");
    cfg.seeds.clear();
    if (s.is_array()) {
      for (std::size_t i = 0; i < s.size(); ++i) cfg.seeds.push_back(s.at(i).seed());
    } else {
      s.expect_object({"base", "count"});
      const auto base = s.at("base").seed();
      const auto count = s.at("count").integer();
      if (count < 1) s.at("count").fail("must be >= 1");
      for (long long i = 0; i < count; ++i) cfg.seeds.push_back(base + static_cast<std::uint64_t>(i));
    }
    if (cfg.seeds.empty()) s.fail("seed list is empty");
  }

  if (n.has("metrics")) {
    const Node m = n.at("metrics");
    m.expect_object({"max_value", "ssim_window"});
    if (m.has("max_value")) cfg.metrics.max_value = m.at("max_value").positive();
    if (m.has("ssim_window")) {
      cfg.metrics.ssim_window = static_cast<int>(m.at("ssim_window").integer());
      if (cfg.metrics.ssim_window < 1 || cfg.metrics.ssim_window % 2 == 0)
        m.at("ssim_window").fail("must be odd and positive");
    }
  }

  if (n.has("sweeps")) {
    const Node s = n.at("sweeps");
    s.expect_object({"particles", "pruning"});
    if (s.has("particles")) cfg.sweep_particles = s.at("particles").ints();
    if (s.has("pruning")) cfg.sweep_pruning = s.at("pruning").ints();
  }

  if (n.has("output")) {
    const Node o = n.at("output");
    o.expect_object({"dir", "formats"});
    if (o.has("dir")) cfg.output.dir = o.at("dir").string();
    if (o.has("formats")) {
      const Node f = o.at("formats");
      cfg.output.json = cfg.output.csv = false;
      for (std::size_t i = 0; i < f.size(); ++i) {
        const std::string fmt = f.at(i).string();
        if (fmt == "json") cfg.output.json = true;
        else if (fmt == "csv") cfg.output.csv = true;
        else f.at(i).fail("expected json or csv");
      }
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string canonical_json(const ExperimentConfig& cfg) {
  const auto& p = cfg.problem;
  json prior;
  prior["weights"] = p.prior.weights;
  prior["means"] = json::array();
  prior["variances"] = json::array();
  for (const auto& m : p.prior.means) prior["means"].push_back(to_json(m));
  for (const auto& v : p.prior.variances) prior["variances"].push_back(to_json(v));

  json op;
  op["kind"] = to_string(p.op.kind);
  op["observed"] = p.op.observed;
  op["box"] = p.op.box ? json(*p.op.box) : json(nullptr);
  op["kernel"] = p.op.kernel;
  op["sigma"] = p.op.blur_sigma;
  op["taps"] = p.op.blur_taps;
  op["factor"] = p.op.factor;

  json problem;
  problem["prior"] = prior;
  problem["operator"] = op;
  problem["codec"] = {{"kind", p.codec.kind == CodecKind::kIdentity ? "identity" : "orthonormal"},
                      {"seed", p.codec.seed}};
  problem["shape"] = {p.shape.height, p.shape.width};
  problem["signal"] = p.signal ? to_json(*p.signal) : json({{"prior_draw_seed", p.signal_seed}});
  problem["sigma_nu"] = p.sigma_nu;
  problem["measurement_seed"] = p.measurement_seed;

  json root;
  root["problem"] = problem;
  root["schedule"] = {{"T", cfg.schedule.steps},
                      {"beta_min", cfg.schedule.beta_min},
                      {"beta_max", cfg.schedule.beta_max},
                      {"variance", variance_name(cfg.schedule.variance)}};
  json sampler;
  sampler["eta"] = cfg.sampler.eta;
  sampler["gamma"] = cfg.sampler.gamma ? json(*cfg.sampler.gamma) : json("auto");
  sampler["glue"] = cfg.sampler.glue ? json(*cfg.sampler.glue) : json("auto");
  sampler["gradient_mode"] = cfg.sampler.gradient_mode ? json(mode_name(*cfg.sampler.gradient_mode)) : json("auto");
  sampler["glue_reference"] = reference_name(cfg.sampler.glue_reference);
  sampler["stochastic"] = cfg.sampler.stochastic;
  root["sampler"] = sampler;
  root["filter"] = {{"N0", cfg.filter.initial_particles},
                    {"threshold_ratio", cfg.filter.threshold_ratio},
                    {"R", cfg.filter.prune_period},
                    {"resample", to_string(cfg.filter.scheme)}};
  root["seeds"] = cfg.seeds;
  root["metrics"] = {{"max_value", cfg.metrics.max_value}, {"ssim_window", cfg.metrics.ssim_window}};
  root["sweeps"] = {{"particles", cfg.sweep_particles}, {"pruning", cfg.sweep_pruning}};
  return root.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_json(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  try {
    if (const auto colon = text.find(':'); colon != std::string::npos) {
      const auto base = std::stoull(text.substr(0, colon));
      const auto count = std::stoull(text.substr(colon + 1));
      for (std::uint64_t i = 0; i < count; ++i) out.push_back(base + i);
    } else {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(std::stoull(item));
    }
  } catch (const std::logic_error&) {
    throw ConfigError("--seeds: expected N, a,b,c or base:count, got '" + text + "'");
  }
  if (out.empty()) throw ConfigError("--seeds: empty seed list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  try {
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  } catch (const std::logic_error&) {
    throw ConfigError("expected a comma-separated integer list, got '" + text + "'");
  }
  if (out.empty()) throw ConfigError("empty integer list");
  return out;
}

}  // namespace pfld::harness
