#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "trivopt/cli.hpp"
#include "trivopt/optimizers.hpp"
#include "trivopt/trivialize.hpp"

namespace trivopt::cli {
namespace {

const std::vector<std::string> kCommands{"bench", "verify", "expm-bench"};
const std::vector<std::string> kProblems{"procrustes", "rayleigh", "karcher", "pca",
                                         "brockett",   "quadratic", "copy"};

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out;
}

[[noreturn]] void malformed(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError("malformed value '" + value + "' for key '" + key + "' (expected " + expected + ")");
}

std::uint64_t to_uint(const std::string& key, const std::string& value, bool allow_zero = false) {
  std::uint64_t v = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end || (!allow_zero && v == 0)) {
    malformed(key, value, allow_zero ? "non-negative integer" : "positive integer");
  }
  return v;
}

double to_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) malformed(key, value, "real number");
  return v;
}

double to_positive(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  if (!(v > 0.0)) malformed(key, value, "positive real number");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  malformed(key, value, "true or false");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void require_one_of(const std::string& key, const std::string& value,
                    const std::vector<std::string>& allowed) {
  if (std::find(allowed.begin(), allowed.end(), value) == allowed.end()) {
    throw ConfigError("unknown " + key + " '" + value + "' (expected one of: " + join(allowed) + ")");
  }
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "command", "problem",  "n",        "k",         "opt",     "lr",      "alpha",
      "radius",  "beta",     "beta1",    "beta2",     "adam-eps", "rule",   "k-every",
      "eps-low", "eps-high", "iters",    "tol",       "seed",    "out",     "timing",
      "alphabet", "seq-len", "spacing",  "batch",     "orth-ratio", "only", "tol-scale",
      "threads", "sizes",    "count"};
  return keys;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = normalize_key(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    out[key] = value;
  }
  return out;
}

RunConfig config_from_map(const std::map<std::string, std::string>& values) {
  const auto& keys = known_keys();
  for (const auto& [key, value] : values) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  RunConfig c;
  const auto get = [&](const char* key) -> const std::string* {
    const auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  };

  if (auto v = get("command")) {
    require_one_of("command", *v, kCommands);
    c.command = *v;
  }
  if (auto v = get("problem")) {
    require_one_of("problem", *v, kProblems);
    c.problem = *v;
  }
  if (auto v = get("n")) c.n = to_uint("n", *v);
  if (auto v = get("k")) c.k = to_uint("k", *v);
  if (auto v = get("opt")) {
    try {
      parse_optimizer_kind(*v);
    } catch (const ContractError& e) {
      throw ConfigError(std::string("key 'opt': ") + e.what());
    }
    c.opt = *v;
  }
  if (auto v = get("lr")) {
    if (*v == "auto") {
      c.lr_mode = LrMode::Auto;
    } else if (*v == "curvature") {
      c.lr_mode = LrMode::Curvature;
    } else {
      c.lr_mode = LrMode::Fixed;
      c.lr = to_positive("lr", *v);
    }
  }
  if (auto v = get("alpha")) c.alpha = to_positive("alpha", *v);
  if (auto v = get("radius")) c.radius = to_positive("radius", *v);
  if (auto v = get("beta")) c.beta = to_double("beta", *v);
  if (auto v = get("beta1")) c.beta1 = to_double("beta1", *v);
  if (auto v = get("beta2")) c.beta2 = to_double("beta2", *v);
  if (auto v = get("adam-eps")) c.adam_eps = to_positive("adam-eps", *v);
  if (auto v = get("rule")) {
    try {
      parse_rule_kind(*v);
    } catch (const ContractError& e) {
      throw ConfigError(std::string("key 'rule': ") + e.what());
    }
    c.rule = *v;
  }
  if (auto v = get("k-every")) c.k_every = to_uint("k-every", *v);
  if (auto v = get("eps-low")) c.eps_low = to_positive("eps-low", *v);
  if (auto v = get("eps-high")) c.eps_high = to_positive("eps-high", *v);
  if (auto v = get("iters")) c.iters = to_uint("iters", *v, true);
  if (auto v = get("tol")) {
    c.tol = to_double("tol", *v);
    if (c.tol < 0.0) malformed("tol", *v, "non-negative real number");
  }
  if (auto v = get("seed")) c.seed = to_uint("seed", *v, true);
  if (auto v = get("out")) c.out = *v;
  if (auto v = get("timing")) c.timing = to_bool("timing", *v);
  if (auto v = get("alphabet")) c.alphabet = static_cast<int>(to_uint("alphabet", *v));
  if (auto v = get("seq-len")) c.seq_len = static_cast<int>(to_uint("seq-len", *v));
  if (auto v = get("spacing")) c.spacing = static_cast<int>(to_uint("spacing", *v));
  if (auto v = get("batch")) c.batch = to_uint("batch", *v);
  if (auto v = get("orth-ratio")) c.orth_ratio = to_positive("orth-ratio", *v);
  if (auto v = get("only")) c.only = split_list(*v);
  if (auto v = get("tol-scale")) c.tol_scale = to_positive("tol-scale", *v);
  if (auto v = get("threads")) c.threads = static_cast<unsigned>(to_uint("threads", *v, true));
  if (auto v = get("sizes")) {
    c.sizes.clear();
    for (const auto& s : split_list(*v)) c.sizes.push_back(to_uint("sizes", s));
    if (c.sizes.empty()) malformed("sizes", *v, "comma-separated positive integers");
  }
  if (auto v = get("count")) c.count = to_uint("count", *v);

  // Cross-field requirements.
  const auto kind = parse_rule_kind(c.rule);
  if (kind == StoppingRule::Kind::EveryK && !get("k-every")) {
    throw ConfigError("missing key 'k-every' (the EveryK period k) required by rule = everyk");
  }
  if (kind == StoppingRule::Kind::GradRatio && !(c.eps_low < 1.0 && c.eps_high > 1.0)) {
    throw ConfigError("rule = gradratio requires eps-low < 1 < eps-high");
  }
  for (const auto& [key, b] : {std::pair{"beta", c.beta}, {"beta1", c.beta1}, {"beta2", c.beta2}}) {
    if (!(b >= 0.0 && b < 1.0)) throw ConfigError(std::string("key '") + key + "' must lie in [0, 1)");
  }
  if ((c.problem == "pca" || c.problem == "brockett") && c.k >= c.n) {
    throw ConfigError("key 'k' must be smaller than n for problem " + c.problem);
  }
  if ((c.problem == "rayleigh" || c.problem == "pca" || c.problem == "brockett") && c.n < 2) {
    throw ConfigError("key 'n' must be at least 2 for problem " + c.problem);
  }
  if (c.lr_mode == LrMode::Curvature && c.problem == "copy") {
    throw ConfigError("lr = curvature needs a single manifold; the copy task is a product");
  }
  return c;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"trivopt"};
  app.allow_extras(false);
  std::string command;
  std::string config_path;
  std::map<std::string, std::string> flags;
  app.add_option("command", command, "bench | verify | expm-bench");
  app.add_option("--config", config_path, "key = value file; flags override it");
  for (const auto& key : known_keys()) {
    if (key == "command") continue;
    app.add_option_function<std::string>(
        "--" + key, [&flags, key](const std::string& v) { flags[key] = v; });
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  std::map<std::string, std::string> merged;
  if (!config_path.empty()) merged = read_config_file(config_path);
  for (const auto& [k, v] : flags) merged[k] = v;
  if (!command.empty()) merged["command"] = command;
  return config_from_map(merged);
}

std::string describe(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  const char* lr_mode = c.lr_mode == LrMode::Auto ? "auto" : c.lr_mode == LrMode::Curvature ? "curvature" : nullptr;
  os << "command = " << c.command << "\n"
     << "problem = " << c.problem << "\n"
     << "n = " << c.n << "\n"
     << "k = " << c.k << "\n"
     << "opt = " << c.opt << "\n";
  if (lr_mode) {
    os << "lr = " << lr_mode << "\n";
  } else {
    os << "lr = " << c.lr << "\n";
  }
  os << "rule = " << c.rule << "\n";
  if (c.k_every) os << "k-every = " << c.k_every << "\n";
  os << "eps-low = " << c.eps_low << "\n"
     << "eps-high = " << c.eps_high << "\n"
     << "iters = " << c.iters << "\n"
     << "seed = " << c.seed << "\n"
     << "out = " << (c.out.empty() ? "-" : c.out) << "\n";
  return os.str();
}

}  // namespace trivopt::cli
