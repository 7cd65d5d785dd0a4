#pragma once

// Experiment configuration: a flat key = value text format with [section]
// headers. Every key is known in advance; anything else is an error that
// names the offending line and column.
//
//   # comment
//   [model]
//   kind = commuting
//   dB   = 256

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "isi/errors.hpp"
#include "isi/tolerances.hpp"

namespace isi {

enum class ModelKind { commuting, cucchietti, random, file };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::commuting: return "commuting";
    case ModelKind::cucchietti: return "cucchietti";
    case ModelKind::random: return "random";
    case ModelKind::file: return "file";
  }
  return "unknown";
}

struct ModelConfig {
  ModelKind kind = ModelKind::commuting;
  double omega = 1.0;
  long dS = 2;           ///< random model only; the spin models fix d_S = 2
  long dB = 64;
  int n_spins = 6;       ///< cucchietti
  double v_scale = 1.0;  ///< v_lα uniform on [−v_scale, v_scale]
  double eb_scale = 1.0; ///< E_l^B uniform on [−eb_scale, eb_scale]
  double g_scale = 1.0;  ///< cucchietti couplings g_k
  double eps_scale = 1.0;///< cucchietti fields ε_k
  double strength = 1.0; ///< random model coupling
  std::string file;      ///< Hamiltonian file, relative to the config file
};

struct AnalysisConfig {
  std::vector<std::string> theorems{"all"};
  long mc_samples = 2000;
  long streams = 8;
  long dR = 0;                   ///< bath subspace dimension; 0 means the whole bath
  std::string psi = "up";        ///< system state of H_R = ψ ⊗ B_R: up | down | plus | random
  double epsilon = 0.1;
  double p = 1.0;
  double eps_prime_target = 0.3;
  double sufficient_threshold = 0.1;
  int nc_starts = 512;           ///< multistart count for d_S > 2
  bool eth_fit = true;
  bool allow_degenerate = false;
};

struct DynamicsConfig {
  bool enabled = true;
  double T_factor = 1000.0;      ///< T = T_factor / minimum level spacing
  long n_times = 2000;
  long draws = 20;               ///< bath states Φ drawn from B_R
  double trajectory_T = 50.0;
  long trajectory_points = 201;
};

struct SweepConfig {
  std::string parameter;         ///< "section.key"
  std::vector<std::string> values;
  long model_draws = 1;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  std::string out = "out";
  std::string base_dir = ".";    ///< directory of the config file
  ModelConfig model;
  AnalysisConfig analysis;
  DynamicsConfig dynamics;
  SweepConfig sweep;
  Tolerances tol;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& text, const std::string& key, int line, int column) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ConfigError("invalid value '" + text + "' for " + key, line, column);
  return value;
}

inline bool parse_bool(const std::string& text, const std::string& key, int line, int column) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ConfigError("invalid boolean '" + text + "' for " + key, line, column);
}

}  // namespace detail

/// Assigns one "section.key" entry; `line`/`column` locate the value for diagnostics.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value, int line = 0,
                          int column = 0, int key_column = 0) {
  using detail::parse_bool;
  using detail::parse_number;
  auto num = [&](auto& field) { field = parse_number<std::decay_t<decltype(field)>>(value, key, line, column); };
  auto flag = [&](bool& field) { field = parse_bool(value, key, line, column); };

  if (key == "run.name") cfg.name = value;
  else if (key == "run.seed") num(cfg.seed);
  else if (key == "run.out") cfg.out = value;
  else if (key == "model.kind") {
    if (value == "commuting") cfg.model.kind = ModelKind::commuting;
    else if (value == "cucchietti") cfg.model.kind = ModelKind::cucchietti;
    else if (value == "random") cfg.model.kind = ModelKind::random;
    else if (value == "file") cfg.model.kind = ModelKind::file;
    else throw ConfigError("unknown model kind '" + value + "'", line, column);
  }
  else if (key == "model.omega") num(cfg.model.omega);
  else if (key == "model.dS") num(cfg.model.dS);
  else if (key == "model.dB") num(cfg.model.dB);
  else if (key == "model.n_spins") num(cfg.model.n_spins);
  else if (key == "model.v_scale") num(cfg.model.v_scale);
  else if (key == "model.eb_scale") num(cfg.model.eb_scale);
  else if (key == "model.g_scale") num(cfg.model.g_scale);
  else if (key == "model.eps_scale") num(cfg.model.eps_scale);
  else if (key == "model.strength") num(cfg.model.strength);
  else if (key == "model.file") cfg.model.file = value;
  else if (key == "analysis.theorems") cfg.analysis.theorems = detail::split_list(value);
  else if (key == "analysis.mc_samples") num(cfg.analysis.mc_samples);
  else if (key == "analysis.streams") num(cfg.analysis.streams);
  else if (key == "analysis.dR") num(cfg.analysis.dR);
  else if (key == "analysis.psi") {
    if (value != "up" && value != "down" && value != "plus" && value != "random")
      throw ConfigError("analysis.psi must be up, down, plus or random", line, column);
    cfg.analysis.psi = value;
  }
  else if (key == "analysis.epsilon") num(cfg.analysis.epsilon);
  else if (key == "analysis.p") num(cfg.analysis.p);
  else if (key == "analysis.eps_prime_target") num(cfg.analysis.eps_prime_target);
  else if (key == "analysis.sufficient_threshold") num(cfg.analysis.sufficient_threshold);
  else if (key == "analysis.nc_starts") num(cfg.analysis.nc_starts);
  else if (key == "analysis.eth_fit") flag(cfg.analysis.eth_fit);
  else if (key == "analysis.allow_degenerate") flag(cfg.analysis.allow_degenerate);
  else if (key == "dynamics.enabled") flag(cfg.dynamics.enabled);
  else if (key == "dynamics.T_factor") num(cfg.dynamics.T_factor);
  else if (key == "dynamics.n_times") num(cfg.dynamics.n_times);
  else if (key == "dynamics.draws") num(cfg.dynamics.draws);
  else if (key == "dynamics.trajectory_T") num(cfg.dynamics.trajectory_T);
  else if (key == "dynamics.trajectory_points") num(cfg.dynamics.trajectory_points);
  else if (key == "sweep.parameter") cfg.sweep.parameter = value;
  else if (key == "sweep.values") cfg.sweep.values = detail::split_list(value);
  else if (key == "sweep.model_draws") num(cfg.sweep.model_draws);
  else if (key == "tolerances.state_norm") num(cfg.tol.state_norm);
  else if (key == "tolerances.hermitian") num(cfg.tol.hermitian);
  else if (key == "tolerances.trace") num(cfg.tol.trace);
  else if (key == "tolerances.psd") num(cfg.tol.psd);
  else if (key == "tolerances.input_hermitian") num(cfg.tol.input_hermitian);
  else if (key == "tolerances.spectrum_rel") num(cfg.tol.spectrum_rel);
  else if (key == "tolerances.gaps_rel") num(cfg.tol.gaps_rel);
  else if (key == "tolerances.eth_beta_tol") num(cfg.tol.eth_beta_tol);
  else if (key == "tolerances.gap_check_max_dim") num(cfg.tol.gap_check_max_dim);
  else if (key == "tolerances.decomposition_max_dim") num(cfg.tol.decomposition_max_dim);
  else if (key == "tolerances.pair_cache_max_dim") num(cfg.tol.pair_cache_max_dim);
  else throw ConfigError("unknown key '" + key + "'", line, key_column);
}

/// Range and consistency checks that do not depend on building the model.
inline void validate(const ExperimentConfig& cfg) {
  const auto& m = cfg.model;
  if (m.dB < 1) throw ConfigError("model.dB must be at least 1");
  if (m.dS < 2) throw ConfigError("model.dS must be at least 2");
  if (m.kind == ModelKind::file && m.file.empty()) throw ConfigError("model.kind = file needs model.file");
  const auto& a = cfg.analysis;
  if (a.mc_samples < 2) throw ConfigError("analysis.mc_samples must be at least 2");
  if (a.streams < 1) throw ConfigError("analysis.streams must be at least 1");
  if (a.dR < 0) throw ConfigError("analysis.dR must be non-negative");
  if (!(a.epsilon > 0.0)) throw ConfigError("analysis.epsilon must be positive");
  if (a.p < 0.0 || a.p > 1.0) throw ConfigError("analysis.p must lie in [0, 1]");
  if (!(a.eps_prime_target > 0.0)) throw ConfigError("analysis.eps_prime_target must be positive");
  if (a.nc_starts < 1) throw ConfigError("analysis.nc_starts must be at least 1");
  for (const auto& t : a.theorems) {
    static const char* known[] = {"all", "T0i", "T0ii", "T1", "T1prime", "T2i", "T2ii", "Popescu", "SufficientISI"};
    if (std::find(std::begin(known), std::end(known), t) == std::end(known))
      throw ConfigError("unknown theorem '" + t + "' in analysis.theorems");
  }
  const auto& d = cfg.dynamics;
  if (!(d.T_factor > 0.0)) throw ConfigError("dynamics.T_factor must be positive");
  if (d.n_times < 100) throw ConfigError("dynamics.n_times must be at least 100");
  if (d.draws < 1) throw ConfigError("dynamics.draws must be at least 1");
  if (!(d.trajectory_T > 0.0) || d.trajectory_points < 2)
    throw ConfigError("dynamics.trajectory_T must be positive and trajectory_points at least 2");
  if (!cfg.sweep.parameter.empty() && cfg.sweep.values.empty()) throw ConfigError("sweep.values is empty");
  if (cfg.sweep.model_draws < 1) throw ConfigError("sweep.model_draws must be at least 1");
}

inline ExperimentConfig parse_config(std::istream& in, const std::string& base_dir = ".") {
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  static const char* sections[] = {"run", "model", "analysis", "dynamics", "sweep", "tolerances"};
  std::string section;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = raw.substr(0, hash);
    const std::string body = detail::trim(text);
    if (body.empty()) continue;
    const int first_col = static_cast<int>(text.find_first_not_of(" \t")) + 1;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError("unterminated section header", line, first_col);
      section = detail::trim(body.substr(1, body.size() - 2));
      if (std::find(std::begin(sections), std::end(sections), section) == std::end(sections))
        throw ConfigError("unknown section '" + section + "'", line, first_col + 1);
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line, first_col);
    if (section.empty()) throw ConfigError("key outside of any section", line, first_col);
    const std::string key = detail::trim(text.substr(0, eq));
    const std::string value = detail::trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key before '='", line, static_cast<int>(eq) + 1);
    const auto vpos = text.find_first_not_of(" \t", eq + 1);
    const int value_col = static_cast<int>(vpos == std::string::npos ? eq + 2 : vpos + 1);
    if (value.empty()) throw ConfigError("missing value for " + section + "." + key, line, value_col);
    apply_setting(cfg, section + "." + key, value, line, value_col, first_col);
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  const auto slash = path.find_last_of('/');
  return parse_config(in, slash == std::string::npos ? "." : path.substr(0, slash));
}

/// Applies "section.key=value" overrides in order.
inline void apply_overrides(ExperimentConfig& cfg, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not of the form key=value");
    apply_setting(cfg, detail::trim(o.substr(0, eq)), detail::trim(o.substr(eq + 1)));
  }
}

}  // namespace isi
