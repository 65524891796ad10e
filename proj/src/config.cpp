#include <algorithm>
#include <fstream>
#include <sstream>

#include "modcs/errors.hpp"
#include "modcs/harness.hpp"

namespace modcs {

namespace {

const std::vector<std::string> kKeys = {
    "name",      "m",         "s0",          "sa",        "r",          "d",
    "generator", "n",         "n0",          "noise",     "c",          "epsilon",
    "epsilon_rule", "algorithms", "alpha",   "alpha_add", "alpha_del",  "init",
    "horizon",   "trials",    "first_trial", "seed",      "output_dir", "threads"};

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string Lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double ToDouble(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) {
    throw ConfigurationError("config key '" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

long long ToInt(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) {
    throw ConfigurationError("config key '" + key + "': expected an integer, got '" + v + "'");
  }
  return out;
}

// Accepts plain decimals and fractions such as "2/3".
double ToRate(const std::string& key, const std::string& v) {
  const auto slash = v.find('/');
  if (slash == std::string::npos) return ToDouble(key, v);
  const double den = ToDouble(key, Trim(v.substr(slash + 1)));
  if (den == 0.0) throw ConfigurationError("config key '" + key + "': zero denominator");
  return ToDouble(key, Trim(v.substr(0, slash))) / den;
}

}  // namespace

std::vector<std::string> KnownConfigKeys() { return kKeys; }

std::map<std::string, std::string> ParseKeyValues(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigurationError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = Trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigurationError("config line " + std::to_string(lineno) + ": empty key");
    }
    kv[key] = Trim(line.substr(eq + 1));
  }
  return kv;
}

std::map<std::string, std::string> ReadKeyValueFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseKeyValues(buf.str());
}

ExperimentSpec SpecFromKeyValues(const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) {
    if (std::find(kKeys.begin(), kKeys.end(), k) == kKeys.end()) {
      throw ConfigurationError("unknown config key '" + k + "'");
    }
  }
  auto get = [&](const std::string& k) -> const std::string* {
    auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };

  ExperimentSpec spec;
  spec.model.m = 200;
  spec.model.s0 = 20;
  spec.model.sa = 2;
  spec.model.r = 1.0;
  spec.model.d = 3;
  if (auto v = get("name")) spec.name = *v;
  if (auto v = get("m")) spec.model.m = static_cast<int>(ToInt("m", *v));
  if (auto v = get("s0")) spec.model.s0 = static_cast<int>(ToInt("s0", *v));
  if (auto v = get("sa")) spec.model.sa = static_cast<int>(ToInt("sa", *v));
  if (auto v = get("r")) spec.model.r = ToRate("r", *v);
  if (auto v = get("d")) spec.model.d = static_cast<int>(ToInt("d", *v));
  if (auto v = get("generator")) {
    const std::string g = Lower(*v);
    if (g == "gen1") {
      spec.model.generator = Generator::kGen1;
    } else if (g == "gen2") {
      spec.model.generator = Generator::kGen2;
    } else {
      throw ConfigurationError("generator must be gen1 or gen2");
    }
  }
  if (auto v = get("n")) spec.sensing.n = static_cast<int>(ToInt("n", *v));
  if (auto v = get("n0")) spec.sensing.n0 = static_cast<int>(ToInt("n0", *v));
  if (auto v = get("noise")) {
    const std::string nz = Lower(*v);
    if (nz != "uniform" && nz != "none") throw ConfigurationError("noise must be uniform or none");
    spec.sensing.noise = nz == "uniform";
  }
  if (auto v = get("c")) spec.sensing.c = ToDouble("c", *v);
  if (auto v = get("epsilon")) spec.sensing.epsilon = ToDouble("epsilon", *v);
  if (auto v = get("epsilon_rule")) {
    const std::string rule = Lower(*v);
    if (rule == "bound") {
      spec.sensing.epsilon_rule = EpsilonRule::kNoiseBound;
    } else if (rule == "rms") {
      spec.sensing.epsilon_rule = EpsilonRule::kNoiseRms;
    } else {
      throw ConfigurationError("epsilon_rule must be bound or rms");
    }
  }
  InitMode init = InitMode::kOracle;
  if (auto v = get("init")) {
    const std::string i = Lower(*v);
    if (i == "oracle") {
      init = InitMode::kOracle;
    } else if (i == "simplecs") {
      init = InitMode::kSimpleCS;
    } else {
      throw ConfigurationError("init must be oracle or simplecs");
    }
  }
  if (auto v = get("horizon")) spec.horizon = static_cast<int>(ToInt("horizon", *v));
  if (auto v = get("trials")) spec.trials = static_cast<int>(ToInt("trials", *v));
  if (auto v = get("first_trial")) spec.first_trial = static_cast<int>(ToInt("first_trial", *v));
  if (auto v = get("seed")) {
    const long long s = ToInt("seed", *v);
    if (s < 0) throw ConfigurationError("seed must be nonnegative");
    spec.master_seed = static_cast<std::uint64_t>(s);
  }
  if (auto v = get("output_dir")) spec.output_dir = *v;
  if (auto v = get("threads")) spec.threads = static_cast<int>(ToInt("threads", *v));

  std::vector<Algorithm> algs = {Algorithm::kSimpleCS, Algorithm::kModCS,
                                 Algorithm::kModCSAddLSDel, Algorithm::kLSCS};
  if (auto v = get("algorithms")) {
    algs.clear();
    std::istringstream in(*v);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = Trim(item);
      if (!item.empty()) algs.push_back(ParseAlgorithm(item));
    }
  }
  const double c = spec.sensing.noise ? spec.sensing.c : 0.0;
  for (Algorithm a : algs) {
    RecoveryConfig cfg = DefaultRecoveryConfig(a, c, spec.model.r);
    if (auto v = get("alpha_add")) cfg.alpha_add = ToDouble("alpha_add", *v);
    if (auto v = get("alpha_del")) cfg.alpha_del = ToDouble("alpha_del", *v);
    cfg.alpha = (cfg.alpha_add + cfg.alpha_del) / 2.0;
    if (auto v = get("alpha")) cfg.alpha = ToDouble("alpha", *v);
    cfg.init_mode = init;
    spec.algorithms.push_back(cfg);
  }
  spec.Validate();
  return spec;
}

}  // namespace modcs
