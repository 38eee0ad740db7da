#include "config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cvt {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw std::runtime_error("config: key '" + key + "' " + why);
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    bad(key, "expects an integer, got '" + v + "'");
  }
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    bad(key, "expects a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, "expects true/false, got '" + v + "'");
}

void apply_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "stage") {
    if (value == "source") c.stage = Stage::Source;
    else if (value == "transfer") c.stage = Stage::Transfer;
    else if (value == "baseline") c.stage = Stage::Baseline;
    else bad(key, "expects source|transfer|baseline");
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "init_seed") {
    c.init_seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "workers") {
    long long w = parse_int(key, value);
    if (w < 1 || w > 256) bad(key, "out of range [1,256]");
    c.workers = static_cast<int>(w);
  } else if (key == "ratio") {
    int a = 0, b = 0;
    char colon = 0;
    std::istringstream is(value);
    if (!(is >> a >> colon >> b) || colon != ':' || a < 0 || b < 0 || a + b == 0)
      bad(key, "expects native:mapped with nonnegative terms, got '" + value + "'");
    c.ratio_native = a;
    c.ratio_mapped = b;
  } else if (key == "episodes") {
    long long e = parse_int(key, value);
    if (e < 1) bad(key, "must be >= 1");
    c.episodes = static_cast<int>(e);
  } else if (key == "deterministic") {
    c.deterministic = parse_bool(key, value);
  } else if (key == "mapper") {
    if (value == "analytic") c.mapper = MapperKind::Analytic;
    else if (value == "linear") c.mapper = MapperKind::Linear;
    else if (value == "identity") c.mapper = MapperKind::Identity;
    else bad(key, "expects analytic|linear|identity");
  } else if (key == "control") {
    if (value == "pullback") c.control = ControlMode::Pullback;
    else if (value == "expert-replay") c.control = ControlMode::ExpertReplay;
    else bad(key, "expects pullback|expert-replay");
  } else if (key == "checkpoint_every") {
    long long e = parse_int(key, value);
    if (e < 0) bad(key, "must be >= 0");
    c.checkpoint_every = static_cast<int>(e);
  } else if (key == "net.hidden") {
    long long h = parse_int(key, value);
    if (h < 1 || h > 4096) bad(key, "out of range [1,4096]");
    c.net.hidden = static_cast<int>(h);
  } else if (key == "net.convs") {
    std::vector<ConvSpec> convs;
    std::istringstream cs(value);
    std::string item;
    while (std::getline(cs, item, ',')) {
      ConvSpec spec;
      char s = 0;
      std::istringstream it(item);
      if (!(it >> spec.filters >> s >> spec.stride) || s != 's' || spec.filters < 1 ||
          spec.stride < 1)
        bad(key, "expects filters 's' stride items like 8s2,8s2,8s1,8s1");
      convs.push_back(spec);
    }
    if (convs.empty()) bad(key, "needs at least one conv layer");
    c.net.convs = convs;
  } else if (key == "train.gamma") {
    double g = parse_real(key, value);
    if (g < 0.0 || g > 1.0) bad(key, "out of range [0,1]");
    c.gamma = g;
  } else if (key == "train.tmax") {
    long long t = parse_int(key, value);
    if (t < 1 || t > 1000) bad(key, "out of range [1,1000]");
    c.t_max = static_cast<int>(t);
  } else if (key == "train.lr") {
    double v = parse_real(key, value);
    if (v <= 0.0) bad(key, "must be > 0");
    c.lr = v;
  } else if (key == "train.beta_entropy") {
    double v = parse_real(key, value);
    if (v < 0.0) bad(key, "must be >= 0");
    c.beta_entropy = v;
  } else if (key == "train.c_value") {
    double v = parse_real(key, value);
    if (v < 0.0) bad(key, "must be >= 0");
    c.c_value = v;
  } else if (key == "train.rms_decay") {
    double v = parse_real(key, value);
    if (v < 0.0 || v >= 1.0) bad(key, "out of range [0,1)");
    c.rms_decay = v;
  } else if (key == "train.rms_eps") {
    double v = parse_real(key, value);
    if (v <= 0.0) bad(key, "must be > 0");
    c.rms_eps = v;
  } else if (key == "metrics.threshold") {
    c.metrics.threshold = parse_real(key, value);
  } else if (key == "metrics.window") {
    long long w = parse_int(key, value);
    if (w < 1) bad(key, "must be >= 1");
    c.metrics.window = static_cast<int>(w);
  } else if (key == "metrics.jumpstart_k") {
    long long k = parse_int(key, value);
    if (k < 1) bad(key, "must be >= 1");
    c.metrics.jumpstart_k = static_cast<int>(k);
  } else if (key == "metrics.auc_budget") {
    long long b = parse_int(key, value);
    if (b < 1) bad(key, "must be >= 1");
    c.metrics.auc_budget = static_cast<int>(b);
  } else if (key == "checkpoint.source") {
    c.source_checkpoint = value;
  } else if (key == "checkpoint.mapper") {
    c.mapper_checkpoint = value;
  } else if (key == "log.transfer") {
    c.transfer_log_path = value;
  } else if (key == "log.baseline") {
    c.baseline_log_path = value;
  } else if (key == "plot.logs") {
    std::istringstream ls(value);
    std::string item;
    c.plot_logs.clear();
    while (std::getline(ls, item, ',')) {
      std::size_t eq = item.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 >= item.size())
        bad(key, "expects name=path entries separated by commas");
      c.plot_logs.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    if (c.plot_logs.empty()) bad(key, "needs at least one entry");
  } else if (key == "plot.smooth") {
    long long w = parse_int(key, value);
    if (w < 1) bad(key, "must be >= 1");
    c.plot_smooth = static_cast<int>(w);
  } else if (key == "dump.checkpoint") {
    c.dump_checkpoint = value;
  } else if (key == "dump.layer") {
    long long l = parse_int(key, value);
    if (l < 0) bad(key, "must be >= 0");
    c.dump_layer = static_cast<int>(l);
  } else if (key == "mapper.pairs") {
    long long n = parse_int(key, value);
    if (n < 1) bad(key, "must be >= 1");
    c.mapper_pairs = static_cast<int>(n);
  } else if (key == "mapper.lambda") {
    double v = parse_real(key, value);
    if (v < 0.0) bad(key, "must be >= 0");
    c.mapper_lambda = v;
  } else {
    bad(key, "is unknown");
  }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: malformed line " + std::to_string(lineno) + ": " + line);
    apply_key(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  if (c.stage == Stage::Transfer && c.source_checkpoint.empty())
    throw std::runtime_error("config: stage=transfer requires checkpoint.source");
  if (c.mapper == MapperKind::Linear && c.ratio_mapped > 0 && c.mapper_checkpoint.empty())
    throw std::runtime_error("config: mapper=linear requires checkpoint.mapper");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

TrainConfig ExperimentConfig::to_train_config() const {
  TrainConfig t;
  t.workers = workers;
  t.ratio_native = ratio_native;
  t.ratio_mapped = ratio_mapped;
  t.seed = seed;
  t.init_seed = init_seed;
  t.episode_budget = episodes;
  t.deterministic = deterministic;
  t.gamma = gamma;
  t.t_max = t_max;
  t.beta_entropy = beta_entropy;
  t.c_value = c_value;
  t.opt = {lr, rms_decay, rms_eps};
  t.net = net;
  t.mapper.kind = mapper;
  t.control = control;
  t.checkpoint_every = checkpoint_every;
  return t;
}

}  // namespace cvt
