#include "dfrc/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace dfrc {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::ostringstream os;
  for (std::size_t i = 0; i < items.size(); ++i) os << (i ? "; " : "") << items[i];
  return os.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

std::vector<std::string> SystemConfig::violations() const {
  std::vector<std::string> out;
  if (n_tx < 1) out.emplace_back("n_tx must be >= 1");
  if (n_tx % 2 != 0) out.emplace_back("n_tx must be even");
  if (n_sub < 2 || n_sub % 2 != 0) out.emplace_back("n_sub must be even and >= 2");
  if (n_users < 1) out.emplace_back("n_users must be >= 1");
  if (n_taps < 1) out.emplace_back("n_taps must be >= 1");
  if (n_cp < 0) out.emplace_back("n_cp must be >= 0");
  if (n_cp < n_taps - 1) out.emplace_back("n_cp must be >= n_taps - 1");
  if (2 * n_cp > n_sub) out.emplace_back("n_cp exceeds n_sub/2");
  if (frame_len < n_tx) out.emplace_back("frame_len must be >= n_tx");
  if (!(p_total > 0.0)) out.emplace_back("p_total must be > 0");
  if (!(rho >= 0.0 && rho <= 1.0)) out.emplace_back("rho must lie in [0, 1]");
  if (oversample < 1) out.emplace_back("oversample must be >= 1");
  const double eps_max = static_cast<double>(n_total()) * n_tx * frame_len;
  if (!(papr_eps >= 1.0) || (std::isfinite(papr_eps) && papr_eps > eps_max))
    out.emplace_back("papr_eps must lie in [1, N*N_t*L] (or be infinite)");
  if (!(noise_var > 0.0)) out.emplace_back("noise_var must be > 0");
  if (!(radar_noise_var > 0.0)) out.emplace_back("radar_noise_var must be > 0");
  if (!(snr_radar > 0.0)) out.emplace_back("snr_radar must be > 0");
  if (!(pfa > 0.0 && pfa < 1.0)) out.emplace_back("pfa must lie in (0, 1)");
  if (target_angles.empty()) out.emplace_back("at least one target angle is required");
  for (double a : target_angles)
    if (!(std::abs(a) <= kPi / 2.0 + 1e-12)) {
      out.emplace_back("target angles must lie in [-90, 90] degrees");
      break;
    }
  if (solver.sdp_tol <= 0.0 || solver.sdp_max_iters < 1) out.emplace_back("invalid SDP solver settings");
  if (solver.random_draws < 1 || solver.projection_passes < 1)
    out.emplace_back("invalid randomization settings");
  if (!(solver.rank1_threshold > 0.0 && solver.rank1_threshold <= 1.0))
    out.emplace_back("rank1_threshold must lie in (0, 1]");
  if (!(solver.cap_margin >= 0.0 && solver.cap_margin < 0.5)) out.emplace_back("cap_margin must lie in [0, 0.5)");
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf" || t == "none") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !t.empty();
}

bool parse_int(const std::string& text, int& out) {
  const std::string t = trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && !t.empty();
}

using Setter = std::function<bool(SystemConfig&, const std::string&)>;

Setter int_field(int SystemConfig::*field) {
  return [field](SystemConfig& c, const std::string& v) { return parse_int(v, c.*field); };
}

Setter int_solver(int SolverSettings::*field) {
  return [field](SystemConfig& c, const std::string& v) { return parse_int(v, c.solver.*field); };
}

Setter real_field(double SystemConfig::*field) {
  return [field](SystemConfig& c, const std::string& v) {
    double x = 0.0;
    if (!parse_double(v, x) || std::isinf(x)) return false;
    c.*field = x;
    return true;
  };
}

Setter real_solver(double SolverSettings::*field) {
  return [field](SystemConfig& c, const std::string& v) {
    double x = 0.0;
    if (!parse_double(v, x) || std::isinf(x)) return false;
    c.solver.*field = x;
    return true;
  };
}

Setter db_field(double SystemConfig::*field, bool allow_inf, double sign = 1.0) {
  return [=](SystemConfig& c, const std::string& v) {
    double x = 0.0;
    if (!parse_double(v, x) || (std::isinf(x) && !allow_inf)) return false;
    c.*field = std::isinf(x) ? x : db_to_linear(sign * x);
    return true;
  };
}

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"n_tx", int_field(&SystemConfig::n_tx)},
      {"n_sub", int_field(&SystemConfig::n_sub)},
      {"n_cp", int_field(&SystemConfig::n_cp)},
      {"n_users", int_field(&SystemConfig::n_users)},
      {"n_taps", int_field(&SystemConfig::n_taps)},
      {"frame_len", int_field(&SystemConfig::frame_len)},
      {"p_total", real_field(&SystemConfig::p_total)},
      {"papr_db", db_field(&SystemConfig::papr_eps, true)},
      {"rho", real_field(&SystemConfig::rho)},
      {"oversample", int_field(&SystemConfig::oversample)},
      {"noise_var", real_field(&SystemConfig::noise_var)},
      {"snr_db", db_field(&SystemConfig::noise_var, false, -1.0)},
      {"radar_noise_var", real_field(&SystemConfig::radar_noise_var)},
      {"snr_radar_db", db_field(&SystemConfig::snr_radar, false)},
      {"pfa", real_field(&SystemConfig::pfa)},
      {"target_angles_deg",
       [](SystemConfig& c, const std::string& v) {
         std::vector<double> angles;
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) {
           double deg = 0.0;
           if (!parse_double(item, deg) || std::isinf(deg)) return false;
           angles.push_back(deg * kPi / 180.0);
         }
         c.target_angles = std::move(angles);
         return true;
       }},
      {"sdp_tol", real_solver(&SolverSettings::sdp_tol)},
      {"sdp_max_iters", int_solver(&SolverSettings::sdp_max_iters)},
      {"random_draws", int_solver(&SolverSettings::random_draws)},
      {"projection_passes", int_solver(&SolverSettings::projection_passes)},
      {"rank1_threshold", real_solver(&SolverSettings::rank1_threshold)},
      {"cap_margin", real_solver(&SolverSettings::cap_margin)},
      {"full_sdp_cap", int_solver(&SolverSettings::full_sdp_cap)},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

SystemConfig parse_config(const std::string& text) {
  SystemConfig cfg;
  std::vector<std::string> errors;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) {
      errors.push_back(where + "expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& table = setters();
    const auto it = std::find_if(table.begin(), table.end(), [&](const auto& kv) { return kv.first == key; });
    if (it == table.end()) {
      errors.push_back(where + "unknown key '" + key + "'");
      continue;
    }
    if (seen.count(key)) {
      errors.push_back(where + "duplicate key '" + key + "' (first on line " + std::to_string(seen[key]) + ")");
      continue;
    }
    seen[key] = lineno;
    if (!it->second(cfg, value)) errors.push_back(where + "invalid value '" + value + "' for '" + key + "'");
  }
  if (seen.count("noise_var") && seen.count("snr_db")) errors.emplace_back("noise_var and snr_db are mutually exclusive");
  for (auto& v : cfg.violations()) errors.push_back(std::move(v));
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

SystemConfig validate_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError({"cannot read config file '" + path + "'"});
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str());
}

void SystemConfig::validate() const {
  auto errs = violations();
  if (!errs.empty()) throw ConfigError(std::move(errs));
}

}  // namespace dfrc
