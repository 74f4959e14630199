#pragma once

// Command-line front end: parameter resolution (defaults, config file,
// flags), calculators and simulators, and JSON / CSV / text output.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cqe/bb84.hpp"
#include "cqe/bounds.hpp"
#include "cqe/diqkd.hpp"
#include "cqe/error.hpp"
#include "cqe/minentropy.hpp"
#include "cqe/qrng.hpp"

namespace cqe::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNumeric = 3;

enum class Command { Bb84, Diqkd, Qrng, Mineval, Simulate };
enum class OutputFormat { Json, Csv, Text };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::Bb84: return "bb84";
    case Command::Diqkd: return "diqkd";
    case Command::Qrng: return "qrng";
    case Command::Mineval: return "mineval";
    case Command::Simulate: return "simulate";
  }
  return "unknown";
}

inline const char* to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::Json: return "json";
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Text: return "text";
  }
  return "unknown";
}

inline Command parse_command(const std::string& s) {
  for (Command c : {Command::Bb84, Command::Diqkd, Command::Qrng, Command::Mineval, Command::Simulate})
    if (s == to_string(c)) return c;
  throw Error(ErrorCode::ConfigParse, "unknown command: " + s);
}

inline OutputFormat parse_format(const std::string& s) {
  for (OutputFormat f : {OutputFormat::Json, OutputFormat::Csv, OutputFormat::Text})
    if (s == to_string(f)) return f;
  throw Error(ErrorCode::Validation, "unknown output format: " + s);
}

enum class Kind { Count, Real, Text, Flag, Leak, RealList };

struct ParamSpec {
  std::string key;  // JSON field; the flag is --key with '_' replaced by '-'
  Kind kind;
  Json fallback;
  std::string help;

  std::string flag() const {
    std::string f = key;
    for (char& c : f)
      if (c == '_') c = '-';
    return "--" + f;
  }
};

inline const std::vector<ParamSpec>& param_specs(Command c) {
  static const std::vector<ParamSpec> bb84{
      {"n", Kind::Count, 1e6, "key bits"},
      {"k", Kind::Count, 1e5, "test bits per basis"},
      {"ez", Kind::Real, 0.02, "Z-basis error rate"},
      {"ex", Kind::Real, 0.02, "X-basis error rate"},
      {"eps_sec", Kind::Real, 1e-9, "secrecy parameter"},
      {"eps_cor", Kind::Real, 1e-15, "correctness parameter"},
      {"leak", Kind::Leak, "auto", "error-correction leakage in bits, or auto"},
  };
  static const std::vector<ParamSpec> diqkd{
      {"n", Kind::Count, 1e6, "key rounds per setting pair"},
      {"k", Kind::Count, 1e6, "test rounds per setting pair"},
      {"omega", Kind::Real, kTsirelsonWinProb, "observed CHSH winning frequency"},
      {"eps_t", Kind::Real, 1e-10, "testing failure probability"},
      {"eps_g", Kind::Real, 1e-10, "generation failure probability"},
      {"eps_cor", Kind::Real, 1e-15, "correctness parameter"},
      {"qber", Kind::Real, 0.0, "key-round bit error rate for --leak auto"},
      {"leak", Kind::Leak, "auto", "error-correction leakage in bits, or auto"},
  };
  static const std::vector<ParamSpec> qrng{
      {"n", Kind::Count, 1e6, "generation rounds"},
      {"k", Kind::Count, 1e5, "test rounds"},
      {"Q", Kind::Real, 0.0, "observed click frequency"},
      {"eps_sec", Kind::Real, 1e-10, "secrecy parameter"},
      {"asymptotic", Kind::Flag, false, "report the rate without finite-size terms"},
  };
  static const std::vector<ParamSpec> mineval{
      {"lambdas", Kind::RealList, "", "comma-separated profile lambda_y"},
  };
  static const std::vector<ParamSpec> simulate{
      {"protocol", Kind::Text, "", "bb84, chsh or qrng"},
      {"rounds", Kind::Count, 1e4, "pairs (bb84), test rounds (chsh), generation rounds (qrng)"},
      {"depol", Kind::Real, 0.0, "depolarizing probability"},
      {"x_basis_prob", Kind::Real, std::numbers::sqrt2 / (1.0 + std::numbers::sqrt2), "probability of choosing the X basis (bb84)"},
      {"key_rounds", Kind::Count, 0.0, "key rounds measuring A0 on both sides (chsh)"},
      {"alpha", Kind::Real, 0.0, "Alice measurement angle (chsh)"},
      {"beta", Kind::Real, std::numbers::pi / 4.0, "Bob measurement angle (chsh)"},
      {"test_rounds", Kind::Count, 1e4, "click-test rounds (qrng)"},
      {"source", Kind::Text, "poisson", "poisson, thermal or fock (qrng)"},
      {"mu", Kind::Real, 0.05, "mean photon number, or photon number for fock (qrng)"},
      {"emit_bits", Kind::Text, "", "write packed raw bits to this path (qrng)"},
  };
  switch (c) {
    case Command::Bb84: return bb84;
    case Command::Diqkd: return diqkd;
    case Command::Qrng: return qrng;
    case Command::Mineval: return mineval;
    case Command::Simulate: return simulate;
  }
  return bb84;
}

inline std::string normalize_key(std::string k) {
  while (!k.empty() && k.front() == '-') k.erase(k.begin());
  for (char& c : k)
    if (c == '-') c = '_';
  return k;
}

inline const ParamSpec* find_spec(Command c, const std::string& key) {
  for (const auto& s : param_specs(c))
    if (s.key == key) return &s;
  return nullptr;
}

struct Sweep {
  std::string name;
  double start = 0.0;
  double stop = 0.0;
  std::int64_t steps = 1;

  std::vector<double> grid() const {
    std::vector<double> g;
    for (std::int64_t i = 0; i < steps; ++i)
      g.push_back(steps == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(steps - 1));
    return g;
  }
};

struct RunConfig {
  Command command = Command::Bb84;
  Json params = Json::object();
  OutputFormat output_format = OutputFormat::Json;
  std::uint64_t seed = 0;
  std::optional<Sweep> sweep;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string out;
  std::string err;
};

namespace detail {

inline double parse_real_text(const std::string& s, const std::string& name) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::Validation, name + ": not a number: " + s);
  }
  if (used != s.size()) throw Error(ErrorCode::Validation, name + ": not a number: " + s);
  return v;
}

inline double to_real(const Json& j, const std::string& name) {
  double v = 0.0;
  if (j.is_number()) {
    v = j.get<double>();
  } else if (j.is_string()) {
    v = parse_real_text(j.get<std::string>(), name);
  } else {
    throw Error(ErrorCode::Validation, name + ": expected a number");
  }
  if (!std::isfinite(v)) throw Error(ErrorCode::Validation, name + ": must be finite");
  return v;
}

inline std::int64_t to_count(const Json& j, const std::string& name) {
  const double v = to_real(j, name);
  if (v < 0.0 || v > 9007199254740992.0 || std::floor(v) != v)
    throw Error(ErrorCode::Validation, name + ": expected a non-negative integer");
  return static_cast<std::int64_t>(v);
}

inline bool to_flag(const Json& j, const std::string& name) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
  }
  if (j.is_number_integer()) return j.get<int>() != 0;
  throw Error(ErrorCode::Validation, name + ": expected true or false");
}

inline std::vector<double> to_real_list(const Json& j, const std::string& name) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(to_real(e, name));
  } else if (j.is_string()) {
    std::stringstream ss(j.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b == std::string::npos) throw Error(ErrorCode::Validation, name + ": empty list entry");
      out.push_back(parse_real_text(item.substr(b, e - b + 1), name));
    }
  } else {
    throw Error(ErrorCode::Validation, name + ": expected a comma-separated list");
  }
  if (out.empty()) throw Error(ErrorCode::Validation, name + ": list is empty");
  return out;
}

inline Json normalize_value(const ParamSpec& s, const Json& raw) {
  switch (s.kind) {
    case Kind::Count: return to_count(raw, s.key);
    case Kind::Real: return to_real(raw, s.key);
    case Kind::Text:
      if (!raw.is_string()) throw Error(ErrorCode::Validation, s.key + ": expected a string");
      return raw;
    case Kind::Flag: return to_flag(raw, s.key);
    case Kind::Leak:
      if (raw.is_string() && raw.get<std::string>() == "auto") return raw;
      return to_real(raw, s.key);
    case Kind::RealList: return to_real_list(raw, s.key);
  }
  return raw;
}

inline FailureBudget budget_from_eps_sec(double eps_sec, double eps_cor) {
  return FailureBudget::from_eps_sec(eps_sec, eps_cor);
}

inline Json report_json(const KeyRateReport& r) {
  Json j;
  j["e_hat"] = r.e_hat;
  j["hmin_smooth"] = r.hmin_smooth;
  j["ell"] = r.ell;
  j["delta_sec"] = r.delta_sec;
  j["raw_bits"] = r.raw_bits;
  j["rate"] = r.rate();
  Json t = Json::object();
  for (const auto& [k, v] : r.terms) t[k] = v;
  j["terms"] = t;
  return j;
}

inline Json run_bb84(const Json& p) {
  Bb84Params b;
  b.n = p["n"].get<std::int64_t>();
  b.k = p["k"].get<std::int64_t>();
  b.e_z = p["ez"].get<double>();
  b.e_x = p["ex"].get<double>();
  b.budget = budget_from_eps_sec(p["eps_sec"].get<double>(), p["eps_cor"].get<double>());
  b.validate();
  b.leak_ec = p["leak"].is_string() ? bb84_default_leak(b.n, b.e_x) : p["leak"].get<double>();
  b.validate();
  return report_json(bb84_key_length(b));
}

inline Json run_diqkd(const Json& p) {
  DiqkdParams d;
  d.n = p["n"].get<std::int64_t>();
  d.k = p["k"].get<std::int64_t>();
  d.omega = p["omega"].get<double>();
  d.budget = FailureBudget::from_test_and_generation(p["eps_t"].get<double>(), p["eps_g"].get<double>(),
                                                      p["eps_cor"].get<double>());
  const double qber = p["qber"].get<double>();
  cqe::detail::require(qber >= 0.0 && qber <= 0.5, ErrorCode::Validation, "qber must lie in [0, 1/2]");
  d.leak_ec = p["leak"].is_string() ? bb84_default_leak(4 * d.n, qber) : p["leak"].get<double>();
  d.validate();
  return report_json(diqkd_key_length(d));
}

inline Json run_qrng(const Json& p) {
  QrngParams q;
  q.n = p["n"].get<std::int64_t>();
  q.k = p["k"].get<std::int64_t>();
  q.q_obs = p["Q"].get<double>();
  q.budget = FailureBudget::from_eps_sec(p["eps_sec"].get<double>());
  q.validate();
  Json j = report_json(qrng_output_length(q));
  j["finite_rate"] = j["rate"];
  if (p["asymptotic"].get<bool>()) j["rate"] = qrng_asymptotic_rate(q.q_obs);
  j["asymptotic"] = p["asymptotic"].get<bool>();
  return j;
}

inline Json run_mineval(const Json& p) {
  const EigProfile profile(p["lambdas"].get<std::vector<double>>());
  Json j;
  j["d"] = profile.size();
  j["hmin"] = min_entropy_lb(profile);
  j["pguess"] = canonical_guess_prob(profile);
  return j;
}

inline FockDiagonalState make_source(const std::string& name, double mu) {
  if (name == "poisson") return FockDiagonalState::poisson(mu);
  if (name == "thermal") return FockDiagonalState::thermal(mu);
  if (name == "fock") {
    cqe::detail::require(mu >= 0.0 && std::floor(mu) == mu && mu <= 1000.0, ErrorCode::Validation,
                         "fock source needs an integer photon number in --mu");
    return FockDiagonalState::fock(static_cast<std::size_t>(mu));
  }
  throw Error(ErrorCode::Validation, "unknown source: " + name);
}

inline Json run_simulate(const Json& p, std::uint64_t seed) {
  const auto protocol = p["protocol"].get<std::string>();
  const auto rounds = p["rounds"].get<std::int64_t>();
  Json j;
  j["protocol"] = protocol;
  if (protocol == "bb84") {
    Bb84SimConfig c{rounds, p["depol"].get<double>(), seed, p["x_basis_prob"].get<double>()};
    const Bb84Observation o = simulate_bb84(c);
    j["pairs"] = o.pairs;
    j["n"] = o.n;
    j["k"] = o.k;
    j["x_test_errors"] = o.x_test_errors;
    j["z_errors"] = o.z_errors;
    j["e_x"] = o.e_x;
    j["e_z"] = o.e_z;
    j["key_phase_error_rate"] = o.key_phase_error_rate;
  } else if (protocol == "chsh") {
    ChshSimConfig c;
    c.n_rounds = rounds;
    c.key_rounds = p["key_rounds"].get<std::int64_t>();
    const double q = p["depol"].get<double>();
    cqe::detail::require(q >= 0.0 && q <= 1.0, ErrorCode::Validation, "depol must lie in [0, 1]");
    c.spectrum = SingleRoundSpectrum::depolarized(q);
    c.angles = {p["alpha"].get<double>(), p["beta"].get<double>()};
    c.seed = seed;
    const ChshObservation o = simulate_chsh(c);
    j["rounds"] = o.rounds;
    j["wins"] = o.wins;
    j["omega"] = o.omega;
    j["key_rounds"] = o.key_rounds;
    j["key_errors"] = o.key_errors;
    j["qber"] = o.qber;
  } else if (protocol == "qrng") {
    const FockDiagonalState src = make_source(p["source"].get<std::string>(), p["mu"].get<double>());
    const QrngSample s = simulate_qrng(QrngSimConfig{rounds, p["test_rounds"].get<std::int64_t>(), seed}, src);
    std::array<std::int64_t, 4> counts{};
    for (auto x : s.x) ++counts[x];
    j["generation_rounds"] = rounds;
    j["test_rounds"] = s.test_rounds;
    j["clicks"] = s.clicks;
    j["click_frequency"] = s.click_frequency;
    for (std::size_t y = 0; y < 4; ++y) j["count_" + std::to_string(y)] = counts[y];
    const auto path = p["emit_bits"].get<std::string>();
    if (!path.empty()) {
      const auto bytes = pack_bits(symbols_to_bits(s.x));
      std::ofstream f(path, std::ios::binary);
      if (!f) throw Error(ErrorCode::Validation, "cannot open " + path);
      f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      j["bits_written"] = 2 * s.x.size();
    }
  } else {
    throw Error(ErrorCode::Validation, "simulate needs a protocol: bb84, chsh or qrng");
  }
  return j;
}

inline Json compute(Command c, const Json& params, std::uint64_t seed) {
  switch (c) {
    case Command::Bb84: return run_bb84(params);
    case Command::Diqkd: return run_diqkd(params);
    case Command::Qrng: return run_qrng(params);
    case Command::Mineval: return run_mineval(params);
    case Command::Simulate: return run_simulate(params, seed);
  }
  return Json::object();
}

// Scalar leaves as (dotted name, value) pairs.
inline void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, Json>>& out) {
  for (const auto& [k, v] : j.items()) {
    const std::string name = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) {
      flatten(v, name, out);
    } else {
      out.emplace_back(name, v);
    }
  }
}

inline std::string format_scalar(const Json& v, bool full_precision) {
  if (v.is_number_float()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, full_precision ? "%.17g" : "%.8g", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace detail

/// Fills defaults and converts every value to its canonical JSON type.
inline Json resolve_params(Command c, const Json& raw) {
  if (!raw.is_object()) throw Error(ErrorCode::ConfigParse, "params must be a JSON object");
  for (const auto& [k, v] : raw.items())
    if (!find_spec(c, normalize_key(k)))
      throw Error(ErrorCode::Validation, "unknown parameter for " + std::string(to_string(c)) + ": " + k);
  Json out = Json::object();
  for (const auto& s : param_specs(c)) {
    Json value = s.fallback;
    for (const auto& [k, v] : raw.items())
      if (normalize_key(k) == s.key) value = v;
    out[s.key] = detail::normalize_value(s, value);
  }
  return out;
}

inline Sweep parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw Error(ErrorCode::Validation, "sweep must look like name=start:stop:steps");
  Sweep s;
  s.name = normalize_key(text.substr(0, eq));
  std::vector<std::string> parts;
  std::stringstream ss(text.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw Error(ErrorCode::Validation, "sweep must look like name=start:stop:steps");
  s.start = detail::parse_real_text(parts[0], "sweep start");
  s.stop = detail::parse_real_text(parts[1], "sweep stop");
  const double steps = detail::parse_real_text(parts[2], "sweep steps");
  if (steps < 1.0 || steps > 100000.0 || std::floor(steps) != steps)
    throw Error(ErrorCode::Validation, "sweep steps must be an integer in [1, 100000]");
  s.steps = static_cast<std::int64_t>(steps);
  return s;
}

inline Json sweep_json(const Sweep& s) { return Json{{"name", s.name}, {"start", s.start}, {"stop", s.stop}, {"steps", s.steps}}; }

inline Json config_json(const RunConfig& cfg) {
  Json j;
  j["command"] = to_string(cfg.command);
  j["params"] = cfg.params;
  j["output_format"] = to_string(cfg.output_format);
  j["seed"] = cfg.seed;
  j["sweep"] = cfg.sweep ? sweep_json(*cfg.sweep) : Json(nullptr);
  return j;
}

/// Runs a configuration whose params are already resolved.
inline RunResult run(const RunConfig& cfg_in) {
  RunResult res;
  try {
    RunConfig cfg = cfg_in;
    cfg.params = resolve_params(cfg.command, cfg.params);
    const Json echo = config_json(cfg);

    struct Record {
      std::optional<double> grid_value;
      Json result;
    };
    std::vector<Record> records;
    if (cfg.sweep) {
      const ParamSpec* spec = find_spec(cfg.command, cfg.sweep->name);
      if (!spec || (spec->kind != Kind::Real && spec->kind != Kind::Count && spec->kind != Kind::Leak))
        throw Error(ErrorCode::Validation, "sweep parameter is not a numeric parameter of this command: " + cfg.sweep->name);
      for (double v : cfg.sweep->grid()) {
        Json p = cfg.params;
        p[spec->key] = spec->kind == Kind::Count ? Json(std::llround(v)) : Json(v);
        p = resolve_params(cfg.command, p);
        records.push_back({v, detail::compute(cfg.command, p, cfg.seed)});
      }
    } else {
      records.push_back({std::nullopt, detail::compute(cfg.command, cfg.params, cfg.seed)});
    }

    std::ostringstream os;
    const std::string sweep_name = cfg.sweep ? cfg.sweep->name : "";
    switch (cfg.output_format) {
      case OutputFormat::Json: {
        Json j;
        j["config"] = echo;
        if (cfg.sweep) {
          Json arr = Json::array();
          for (const auto& r : records) {
            Json rec;
            rec[sweep_name] = *r.grid_value;
            rec["result"] = r.result;
            arr.push_back(rec);
          }
          j["records"] = arr;
        } else {
          j["result"] = records.front().result;
        }
        os << j.dump(2) << '\n';
        break;
      }
      case OutputFormat::Csv: {
        std::vector<std::string> header;
        if (cfg.sweep) header.push_back(sweep_name);
        std::vector<std::pair<std::string, Json>> first;
        detail::flatten(records.front().result, "", first);
        for (const auto& [k, v] : first) header.push_back(k);
        for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << detail::csv_field(header[i]);
        os << "\r\n";
        for (const auto& r : records) {
          std::vector<std::pair<std::string, Json>> flat;
          detail::flatten(r.result, "", flat);
          std::vector<std::string> row;
          if (r.grid_value) row.push_back(detail::format_scalar(Json(*r.grid_value), true));
          for (const auto& [k, v] : flat) row.push_back(detail::format_scalar(v, true));
          for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << detail::csv_field(row[i]);
          os << "\r\n";
        }
        break;
      }
      case OutputFormat::Text: {
        os << to_string(cfg.command) << '\n';
        for (const auto& r : records) {
          if (r.grid_value) os << "[" << sweep_name << " = " << detail::format_scalar(Json(*r.grid_value), false) << "]\n";
          std::vector<std::pair<std::string, Json>> flat;
          detail::flatten(r.result, "", flat);
          std::size_t width = 0;
          for (const auto& [k, v] : flat) width = std::max(width, k.size());
          for (const auto& [k, v] : flat)
            os << "  " << k << std::string(width - k.size() + 2, ' ') << detail::format_scalar(v, false) << '\n';
        }
        break;
      }
    }
    res.out = os.str();
  } catch (const Error& e) {
    const bool numeric = e.code() == ErrorCode::NoConvergence || e.code() == ErrorCode::NotHermitian;
    res.exit_code = numeric ? kExitNumeric : kExitInvalid;
    res.err = std::string("error: ") + e.what() + "\n";
  } catch (const nlohmann::json::exception& e) {
    res.exit_code = kExitInvalid;
    res.err = std::string("error: ConfigParse: ") + e.what() + "\n";
  } catch (const std::exception& e) {
    res.exit_code = kExitNumeric;
    res.err = std::string("error: ") + e.what() + "\n";
  }
  return res;
}

/// Reads a config file: either the echoed {"command", "params", ...} block
/// or a flat object keyed like the flags.
inline void apply_config_file(const std::string& path, RunConfig& cfg, Json& params, bool& command_seen) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::ConfigParse, "cannot open config file " + path);
  Json j;
  try {
    j = Json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigParse, std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ConfigParse, "config file must hold a JSON object");
  if (j.contains("config") && j["config"].is_object()) j = j["config"];
  if (j.contains("command")) {
    const Command c = parse_command(j["command"].get<std::string>());
    if (command_seen && c != cfg.command) throw Error(ErrorCode::ConfigParse, "config file is for a different command");
    cfg.command = c;
    command_seen = true;
  }
  const Json block = j.contains("params") ? j["params"] : j;
  for (const auto& [k, v] : block.items()) {
    const std::string key = normalize_key(k);
    if (key == "command" || key == "output_format" || key == "out" || key == "seed" || key == "sweep") continue;
    params[key] = v;
  }
  if (j.contains("output_format")) cfg.output_format = parse_format(j["output_format"].get<std::string>());
  if (j.contains("out")) cfg.output_format = parse_format(j["out"].get<std::string>());
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("sweep") && !j["sweep"].is_null()) {
    const Json& s = j["sweep"];
    if (s.is_string()) {
      cfg.sweep = parse_sweep(s.get<std::string>());
    } else {
      Sweep sw;
      sw.name = normalize_key(s.at("name").get<std::string>());
      sw.start = s.at("start").get<double>();
      sw.stop = s.at("stop").get<double>();
      sw.steps = s.at("steps").get<std::int64_t>();
      if (sw.steps < 1) throw Error(ErrorCode::Validation, "sweep steps must be at least 1");
      cfg.sweep = sw;
    }
  }
}

/// Full command-line entry point.
inline int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-size key and randomness length calculator"};
  app.require_subcommand(1);
  std::string out_format, seed_text, config_path, sweep_text;
  app.add_option("--out", out_format, "output format: json, csv or text");
  app.add_option("--seed", seed_text, "random seed (unsigned 64-bit)");
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.add_option("--sweep", sweep_text, "sweep a parameter: name=start:stop:steps");

  struct Sub {
    Command command;
    CLI::App* app;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> flags;
    std::map<std::string, CLI::Option*> options;
  };
  std::vector<Sub> subs;
  subs.reserve(5);
  const std::map<Command, std::string> descriptions{
      {Command::Bb84, "BB84 finite-key length"},
      {Command::Diqkd, "DI-QKD finite-key length"},
      {Command::Qrng, "QRNG output length"},
      {Command::Mineval, "min-entropy of a canonical profile"},
      {Command::Simulate, "Monte Carlo protocol simulation"},
  };
  for (Command c : {Command::Bb84, Command::Diqkd, Command::Qrng, Command::Mineval, Command::Simulate}) {
    subs.push_back({c, app.add_subcommand(to_string(c), descriptions.at(c)), {}, {}, {}});
    Sub& s = subs.back();
    s.app->fallthrough();
    for (const auto& spec : param_specs(c)) {
      if (spec.kind == Kind::Flag) {
        s.flags[spec.key] = false;
        s.options[spec.key] = s.app->add_flag(spec.flag(), s.flags[spec.key], spec.help);
      } else if (c == Command::Simulate && spec.key == "protocol") {
        s.options[spec.key] = s.app->add_option("protocol", s.values[spec.key], spec.help);
      } else {
        s.options[spec.key] = s.app->add_option(spec.flag(), s.values[spec.key], spec.help);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  RunResult res;
  try {
    RunConfig cfg;
    const Sub* active = nullptr;
    for (const auto& s : subs)
      if (s.app->parsed()) active = &s;
    cfg.command = active->command;
    bool command_seen = true;
    Json params = Json::object();
    if (!config_path.empty()) apply_config_file(config_path, cfg, params, command_seen);
    for (const auto& spec : param_specs(cfg.command)) {
      const CLI::Option* opt = active->options.at(spec.key);
      if (opt->count() == 0) continue;
      params[spec.key] = spec.kind == Kind::Flag ? Json(active->flags.at(spec.key)) : Json(active->values.at(spec.key));
    }
    cfg.params = params;
    if (!out_format.empty()) cfg.output_format = parse_format(out_format);
    if (!seed_text.empty()) {
      if (seed_text.find_first_not_of("0123456789") != std::string::npos)
        throw Error(ErrorCode::Validation, "seed must be an unsigned integer");
      try {
        cfg.seed = std::stoull(seed_text);
      } catch (const std::exception&) {
        throw Error(ErrorCode::Validation, "seed is out of range");
      }
    }
    if (!sweep_text.empty()) cfg.sweep = parse_sweep(sweep_text);
    res = run(cfg);
  } catch (const Error& e) {
    res.exit_code = kExitInvalid;
    res.err = std::string("error: ") + e.what() + "\n";
  } catch (const std::exception& e) {
    res.exit_code = kExitInvalid;
    res.err = std::string("error: ConfigParse: ") + e.what() + "\n";
  }
  out << res.out;
  err << res.err;
  return res.exit_code;
}

}  // namespace cqe::cli
