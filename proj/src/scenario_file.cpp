#include "oposim/scenario_file.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "oposim/result_table.hpp"

namespace oposim {

namespace {

struct KeyValue {
  std::string value;
  bool used = false;
};

using Section = std::map<std::string, KeyValue>;

std::string strip(std::string s) {
  const char* ws = " \t\r";
  const size_t a = s.find_first_not_of(ws);
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

std::map<std::string, Section> parse_sections(const std::string& text) {
  std::map<std::string, Section> sections;
  std::istringstream in(text);
  std::string line, current;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = strip(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": malformed section header");
      current = strip(line.substr(1, line.size() - 2));
      sections[current];
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos || current.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (sections[current].count(key))
      throw ConfigError("config: duplicate key '" + key + "' in [" + current + "]");
    sections[current][key] = {value, false};
  }
  return sections;
}

class SectionReader {
 public:
  SectionReader(std::map<std::string, Section>& all, const std::string& name)
      : name_(name), section_(all.count(name) ? &all[name] : nullptr) {}

  bool has(const std::string& key) const { return section_ && section_->count(key); }

  std::string get_string(const std::string& key, const std::string& fallback = "") {
    if (!has(key)) return fallback;
    auto& kv = (*section_)[key];
    kv.used = true;
    return kv.value;
  }

  double get_double(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return parse_double(key);
  }

  double require_double(const std::string& key) {
    if (!has(key)) throw ConfigError("config: [" + name_ + "] is missing key '" + key + "'");
    return parse_double(key);
  }

  std::vector<double> get_list(const std::string& key) {
    std::vector<double> out;
    if (!has(key)) return out;
    auto& kv = (*section_)[key];
    kv.used = true;
    std::stringstream ss(kv.value);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell = strip(cell);
      if (cell.empty()) continue;
      out.push_back(parse_value(key, cell));
    }
    if (out.empty()) throw ConfigError("config: empty list for '" + key + "'");
    return out;
  }

 private:
  double parse_double(const std::string& key) {
    auto& kv = (*section_)[key];
    kv.used = true;
    return parse_value(key, kv.value);
  }

  double parse_value(const std::string& key, const std::string& text) const {
    try {
      size_t pos = 0;
      const double v = std::stod(text, &pos);
      if (pos != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + key + "' has a non-numeric value '" + text + "'");
    }
  }

  std::string name_;
  Section* section_;
};

void reject_unused(const std::map<std::string, Section>& sections) {
  static const std::map<std::string, bool> known = {
      {"opo", true}, {"pump", true}, {"chain", true},
      {"window", true}, {"run", true}, {"sweep", true}};
  for (const auto& [name, section] : sections) {
    if (!known.count(name)) throw ConfigError("config: unknown section [" + name + "]");
    for (const auto& [key, kv] : section)
      if (!kv.used)
        throw ConfigError("config: unknown key '" + key + "' in [" + name + "]");
  }
}

}  // namespace

ScenarioFile ScenarioFile::parse_string(const std::string& text) {
  auto sections = parse_sections(text);
  ScenarioFile file;
  file.config_hash = fnv1a_hash(text);

  SectionReader opo(sections, "opo");
  const double tau = opo.get_double("tau_s", 2.7e-9);
  const double t1_sq = opo.get_double("t1_sq", 0.127);
  const double r2_sq = opo.get_double("r2_sq", 0.004);
  const int grid_m = static_cast<int>(opo.get_double("grid_m", 8));
  if (opo.has("r1_sq")) {
    const double r1_sq = opo.require_double("r1_sq");
    if (std::abs(t1_sq + r1_sq - 1.0) > 1e-12)
      throw ConfigError("config: t1_sq + r1_sq differs from 1 (key 'r1_sq')");
  }
  if (opo.has("t2_sq")) {
    const double t2_sq = opo.require_double("t2_sq");
    if (std::abs(t2_sq + r2_sq - 1.0) > 1e-12)
      throw ConfigError("config: t2_sq + r2_sq differs from 1 (key 't2_sq')");
  }
  file.scenario.opo = OpoConfig::from_power(t1_sq, r2_sq, tau, grid_m);

  SectionReader chain(sections, "chain");
  file.scenario.chain.tap_r = chain.get_double("tap_r", 0.05);
  file.scenario.chain.eta_t = chain.get_double("eta_t", 0.07);
  file.scenario.chain.eta_s = chain.get_double("eta_s", 0.70);
  const std::string filter_kind = chain.get_string("filter", "lorentzian");
  if (filter_kind == "lorentzian") {
    if (chain.has("kappa1_per_s") || chain.has("kappa2_per_s")) {
      file.scenario.chain.filter = FilterConfig::lorentzian(chain.require_double("kappa1_per_s"),
                                                            chain.require_double("kappa2_per_s"));
    } else {
      file.scenario.chain.filter =
          FilterConfig::symmetric(chain.get_double("two_kappa_per_s", 5.63e8));
    }
  } else if (filter_kind == "exact") {
    file.scenario.chain.filter =
        FilterConfig::exact(chain.require_double("filter_t1"), chain.require_double("filter_t2"),
                            chain.require_double("tauf_over_tau") * tau);
  } else {
    throw ConfigError("config: filter must be 'lorentzian' or 'exact'");
  }

  SectionReader pump(sections, "pump");
  const std::string pump_type = pump.get_string("type", "gaussian");
  if (pump_type == "gaussian") {
    const double s = pump.get_double("s", 0.05);
    double tp = 0.0;
    if (pump.has("tp_s"))
      tp = pump.require_double("tp_s");
    else
      tp = pump.get_double("tp_over_tau", 3.0) * tau;
    file.scenario.pump = PumpProfile::gaussian_pulse(s, tp);
  } else if (pump_type == "cw") {
    if (pump.has("z")) {
      file.scenario.pump = PumpProfile::constant_cw(pump.require_double("z"));
    } else {
      const double flux = pump.get_double("flux_target_per_s", 2e6);
      file.scenario.pump =
          PumpProfile::constant_cw(calibrate_cw_z(file.scenario.opo, flux));
    }
  } else if (pump_type == "tabulated") {
    const std::string path = pump.get_string("file");
    if (path.empty()) throw ConfigError("config: tabulated pump needs 'file'");
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read pump table " + path);
    std::vector<double> z;
    double t0 = 0.0, dt = 0.0, t_prev = 0.0, t = 0.0, v = 0.0;
    while (in >> t >> v) {
      if (z.empty())
        t0 = t;
      else
        dt = t - t_prev;
      t_prev = t;
      z.push_back(v);
    }
    if (z.size() < 2) throw ConfigError("config: pump table needs at least two samples");
    file.scenario.pump = PumpProfile::tabulated(std::move(z), t0 - 0.5 * dt, dt);
  } else {
    throw ConfigError("config: pump type must be gaussian, cw, or tabulated");
  }

  SectionReader window(sections, "window");
  if (window.has("t_s"))
    file.scenario.window.duration = window.require_double("t_s");
  else
    file.scenario.window.duration = window.get_double("t_over_tau", 10.0) * tau;
  const std::string offset = window.get_string("offset", "auto");
  if (offset == "auto") {
    file.scenario.window.auto_offset = true;
  } else {
    file.scenario.window.auto_offset = false;
    if (window.has("offset_s"))
      file.scenario.window.offset = window.require_double("offset_s");
    else
      file.scenario.window.offset = window.get_double("offset_over_tau", 0.0) * tau;
  }
  if (offset != "auto" && offset != "fixed")
    throw ConfigError("config: window offset must be 'auto' or 'fixed'");

  SectionReader run(sections, "run");
  file.run.mode_function = run.get_string("mode_function", "");
  const std::string engine = run.get_string("engine", "kernels");
  if (engine == "kernels")
    file.run.engine = HeraldScenario::Engine::kernels;
  else if (engine == "propagate")
    file.run.engine = HeraldScenario::Engine::propagate;
  else
    throw ConfigError("config: engine must be 'kernels' or 'propagate'");
  file.scenario.engine = file.run.engine;

  SectionReader sweep(sections, "sweep");
  file.sweep.t_over_tau = sweep.get_list("t_over_tau");
  file.sweep.s = sweep.get_list("s");
  file.sweep.tp_over_tau = sweep.get_list("tp_over_tau");
  file.sweep.z = sweep.get_list("z");
  for (double v : sweep.get_list("single_pass")) {
    if (v != 0.0 && v != 1.0) throw ConfigError("config: single_pass entries must be 0 or 1");
    file.sweep.single_pass.push_back(static_cast<int>(v));
  }

  reject_unused(sections);
  return file;
}

ScenarioFile ScenarioFile::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str());
}

}
