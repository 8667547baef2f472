#include "apwdg/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace apwdg {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"cell", {"edge"}},
      {"site", {"center", "radius", "charge"}},
      {"potential", {"kind", "file", "k_pot"}},
      {"basis", {"K", "N", "L", "epsilon", "radial", "slater_eta"}},
      {"penalty", {"C_sigma"}},
      {"assembly", {"l_pot", "radial_points", "surface", "l_cut"}},
      {"solver", {"nev", "symmetry"}},
      {"scf", {"enabled", "occupation", "mixing_alpha", "max_iters", "tol", "density_grid", "hartree_scale"}},
      {"study", {"sweep", "values", "ref_K", "ref_N", "ref_L", "ref_C_sigma", "track", "pw_values"}},
      {"inverse", {"varrho", "radii", "l_cut_extra"}},
      {"lineplot", {"start", "end", "points", "state"}},
  };
  return s;
}

// "site:2" -> "site"
std::string section_kind(const std::string& section) {
  const auto colon = section.find(':');
  return colon == std::string::npos ? section : section.substr(0, colon);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// Line number of each (section, key) in the source text, for diagnostics.
std::map<std::pair<std::string, std::string>, int> key_lines(const std::string& text) {
  std::map<std::pair<std::string, std::string>, int> out;
  std::istringstream in(text);
  std::string line, section;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq != std::string::npos) out[{section, trim(t.substr(0, eq))}] = no;
  }
  return out;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::map<std::pair<std::string, std::string>, int> lines)
      : tree_(tree), lines_(std::move(lines)) {}

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const {
    std::ostringstream msg;
    const auto it = lines_.find({section, key});
    if (it != lines_.end()) msg << "line " << it->second << ": ";
    msg << "[" << section << "] " << key << ": " << what;
    throw Error(ErrorCode::ConfigParse, msg.str());
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(pt::ptree::path_type(section, '\x01'));
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\x01'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  template <class T>
  void get(const std::string& section, const std::string& key, T& out) const {
    const auto v = raw(section, key);
    if (!v) return;
    out = convert<T>(section, key, *v);
  }

  template <class T>
  void get_list(const std::string& section, const std::string& key, std::vector<T>& out) const {
    const auto v = raw(section, key);
    if (!v) return;
    out.clear();
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(section, key, "empty list element");
      out.push_back(convert<T>(section, key, item));
    }
  }

  void get_vec3(const std::string& section, const std::string& key, Vec3& out) const {
    std::vector<double> v;
    get_list(section, key, v);
    if (!raw(section, key)) return;
    if (v.size() != 3) fail(section, key, "expected three comma-separated numbers");
    out = {v[0], v[1], v[2]};
  }

 private:
  template <class T>
  T convert(const std::string& section, const std::string& key, const std::string& v) const {
    if constexpr (std::is_same_v<T, std::string>) {
      return v;
    } else if constexpr (std::is_same_v<T, bool>) {
      std::string s = v;
      std::transform(s.begin(), s.end(), s.begin(), ::tolower);
      if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
      if (s == "false" || s == "no" || s == "off" || s == "0") return false;
      fail(section, key, "'" + v + "' is not a boolean");
    } else {
      std::istringstream in(v);
      T x{};
      in >> x;
      if (in.fail() || !(in >> std::ws).eof()) {
        fail(section, key, "'" + v + "' is not " + (std::is_integral_v<T> ? "an integer" : "a number"));
      }
      return x;
    }
  }

  const pt::ptree& tree_;
  std::map<std::pair<std::string, std::string>, int> lines_;
};

void check_keys(const pt::ptree& tree, const std::map<std::pair<std::string, std::string>, int>& lines) {
  for (const auto& [section, body] : tree) {
    if (!body.data().empty() && body.empty()) {
      std::ostringstream msg;
      const auto it = lines.find({"", section});
      if (it != lines.end()) msg << "line " << it->second << ": ";
      msg << "key '" << section << "' outside of any section";
      throw Error(ErrorCode::ConfigParse, msg.str());
    }
    const auto kind = schema().find(section_kind(section));
    if (kind == schema().end()) {
      throw Error(ErrorCode::ConfigParse, "unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!kind->second.count(key)) {
        std::ostringstream msg;
        const auto it = lines.find({section, key});
        if (it != lines.end()) msg << "line " << it->second << ": ";
        msg << "unknown key '" << key << "' in section [" << section << "]";
        throw Error(ErrorCode::ConfigParse, msg.str());
      }
    }
  }
}

void apply_overrides(pt::ptree& tree, const std::vector<std::string>& overrides) {
  for (const std::string& a : overrides) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error(ErrorCode::ConfigParse, "override '" + a + "' is not of the form key=value");
    const std::string lhs = trim(a.substr(0, eq)), value = trim(a.substr(eq + 1));
    std::string section, key;
    const auto dot = lhs.rfind('.');
    if (dot != std::string::npos) {
      section = lhs.substr(0, dot);
      key = lhs.substr(dot + 1);
    } else {
      key = lhs;
      std::vector<std::string> owners;
      for (const auto& [sec, keys] : schema())
        if (sec != "site" && keys.count(key)) owners.push_back(sec);
      if (owners.empty()) throw Error(ErrorCode::ConfigParse, "override names unknown key '" + key + "'");
      if (owners.size() > 1)
        throw Error(ErrorCode::ConfigParse, "override key '" + key + "' is ambiguous; use section.key");
      section = owners.front();
    }
    const auto kind = schema().find(section_kind(section));
    if (kind == schema().end() || !kind->second.count(key))
      throw Error(ErrorCode::ConfigParse, "override names unknown key '" + section + "." + key + "'");
    auto sec = tree.get_child_optional(pt::ptree::path_type(section, '\x01'));
    if (!sec) sec = tree.put_child(pt::ptree::path_type(section, '\x01'), pt::ptree{});
    sec->put(pt::ptree::path_type(key, '\x01'), value);
  }
}

RadialKind parse_radial(const Reader& r, const std::string& v) {
  if (v == "polynomial") return RadialKind::Polynomial;
  if (v == "slater") return RadialKind::Slater;
  r.fail("basis", "radial", "expected 'polynomial' or 'slater'");
}

ProblemConfig build(const pt::ptree& tree, const std::map<std::pair<std::string, std::string>, int>& lines,
                    const std::string& base_dir, const std::string& source) {
  check_keys(tree, lines);
  Reader r(tree, lines);
  ProblemConfig c;
  c.source = source;

  double edge = 10.0;
  r.get("cell", "edge", edge);
  if (!(edge > 0)) r.fail("cell", "edge", "must be positive");
  c.problem.cell = UnitCell(edge);

  std::vector<std::pair<int, std::string>> site_sections;
  for (const auto& [section, body] : tree) {
    if (section_kind(section) != "site") continue;
    int order = 0;
    const auto colon = section.find(':');
    if (colon != std::string::npos) {
      try {
        order = std::stoi(section.substr(colon + 1));
      } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigParse, "site section [" + section + "] needs a numeric label");
      }
    }
    site_sections.emplace_back(order, section);
  }
  std::sort(site_sections.begin(), site_sections.end());
  for (const auto& [order, section] : site_sections) {
    AtomicSite s;
    if (!r.raw(section, "center")) r.fail(section, "center", "missing");
    r.get_vec3(section, "center", s.center);
    r.get(section, "radius", s.radius);
    r.get(section, "charge", s.charge);
    c.problem.sites.push_back(s);
  }

  std::string kind = "coulomb";
  r.get("potential", "kind", kind);
  if (kind == "coulomb") {
    c.problem.potential = PotentialKind::Coulomb;
  } else if (kind == "zero") {
    c.problem.potential = PotentialKind::Zero;
  } else if (kind == "fourier") {
    c.problem.potential = PotentialKind::Fourier;
  } else {
    r.fail("potential", "kind", "expected 'coulomb', 'zero' or 'fourier'");
  }
  r.get("potential", "file", c.fourier_file);
  r.get("potential", "k_pot", c.problem.k_pot);
  if (c.problem.potential == PotentialKind::Fourier) {
    if (c.fourier_file.empty()) r.fail("potential", "file", "required for kind = fourier");
    std::filesystem::path p(c.fourier_file);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    c.problem.extra = read_fourier_csv(p.string());
  }

  r.get("basis", "K", c.basis.K);
  r.get("basis", "N", c.basis.N);
  r.get("basis", "L", c.basis.L);
  r.get("basis", "epsilon", c.basis.epsilon);
  if (auto v = r.raw("basis", "radial")) c.basis.radial = parse_radial(r, *v);
  r.get("basis", "slater_eta", c.basis.slater_eta);

  r.get("penalty", "C_sigma", c.assembly.C_sigma);
  r.get("assembly", "l_pot", c.assembly.l_pot);
  r.get("assembly", "radial_points", c.assembly.radial_points);
  r.get("assembly", "l_cut", c.assembly.l_cut);
  if (auto v = r.raw("assembly", "surface")) {
    if (*v == "closed_form") {
      c.assembly.surface = SurfaceSum::ClosedForm;
    } else if (*v == "partial_wave") {
      c.assembly.surface = SurfaceSum::PartialWave;
    } else {
      r.fail("assembly", "surface", "expected 'closed_form' or 'partial_wave'");
    }
  }

  r.get("solver", "nev", c.nev);
  r.get("solver", "symmetry", c.use_symmetry);

  r.get("scf", "enabled", c.scf);
  r.get("scf", "occupation", c.scf_config.occupation);
  r.get("scf", "mixing_alpha", c.scf_config.mixing_alpha);
  r.get("scf", "max_iters", c.scf_config.max_iters);
  r.get("scf", "tol", c.scf_config.tol);
  r.get("scf", "density_grid", c.scf_config.density_grid);
  r.get("scf", "hartree_scale", c.scf_config.hartree_scale);
  c.scf_config.k_pot = c.problem.k_pot;

  c.study.reference = c.basis;
  r.get("study", "sweep", c.study.sweep);
  r.get_list("study", "values", c.study.values);
  r.get("study", "ref_K", c.study.reference.K);
  r.get("study", "ref_N", c.study.reference.N);
  r.get("study", "ref_L", c.study.reference.L);
  r.get("study", "ref_C_sigma", c.study.reference_C_sigma);
  r.get_list("study", "track", c.study.track);
  r.get_list("study", "pw_values", c.study.pw_values);

  r.get_list("inverse", "varrho", c.inverse.varrho);
  r.get_list("inverse", "radii", c.inverse.radii);
  r.get("inverse", "l_cut_extra", c.inverse.l_cut_extra);

  r.get_vec3("lineplot", "start", c.lineplot.start);
  r.get_vec3("lineplot", "end", c.lineplot.end);
  r.get("lineplot", "points", c.lineplot.points);
  r.get("lineplot", "state", c.lineplot.state);
  return c;
}

ProblemConfig parse_text(const std::string& text, const std::vector<std::string>& overrides,
                         const std::string& base_dir, const std::string& source) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    std::ostringstream msg;
    msg << source << ": line " << e.line() << ": " << e.message();
    throw Error(ErrorCode::ConfigParse, msg.str());
  }
  apply_overrides(tree, overrides);
  return build(tree, key_lines(text), base_dir, source);
}

}  // namespace

void ProblemConfig::validate() const {
  require_valid_sites(problem.cell, problem.sites);
  if (basis.K < 1) throw Error(ErrorCode::InvalidArgument, "basis.K must be >= 1");
  if (basis.N < 0 || basis.L < 0) throw Error(ErrorCode::InvalidArgument, "basis.N and basis.L must be >= 0");
  if (basis.epsilon < 0) throw Error(ErrorCode::InvalidArgument, "basis.epsilon must be >= 0");
  if (basis.radial == RadialKind::Slater && !(basis.slater_eta > 0))
    throw Error(ErrorCode::InvalidArgument, "basis.slater_eta must be positive");
  if (!(assembly.C_sigma > 0)) throw Error(ErrorCode::InvalidArgument, "penalty.C_sigma must be positive");
  if (problem.k_pot < 0) throw Error(ErrorCode::InvalidArgument, "potential.k_pot must be >= 0");
  if (nev < 1) throw Error(ErrorCode::InvalidArgument, "solver.nev must be >= 1");
  for (const auto& s : problem.sites)
    if (s.charge < 0) throw Error(ErrorCode::InvalidArgument, "site charges must be >= 0");
  scf_config.validate();
  if (!study.values.empty() || !study.pw_values.empty()) study_config().validate();
  for (double R : inverse.radii)
    if (!(R > 0)) throw Error(ErrorCode::InvalidArgument, "inverse.radii must be positive");
  for (int v : inverse.varrho)
    if (v < 1) throw Error(ErrorCode::InvalidArgument, "inverse.varrho must be >= 1");
  if (inverse.l_cut_extra < 12) throw Error(ErrorCode::InvalidArgument, "inverse.l_cut_extra must be >= 12");
  if (lineplot.points < 2) throw Error(ErrorCode::InvalidArgument, "lineplot.points must be >= 2");
  if (lineplot.state < 1) throw Error(ErrorCode::InvalidArgument, "lineplot.state must be >= 1");
}

SystemOptions ProblemConfig::system_options() const {
  SystemOptions o;
  o.assembly = assembly;
  o.use_symmetry = use_symmetry;
  return o;
}

StudyConfig ProblemConfig::study_config() const {
  StudyConfig s;
  s.problem = problem;
  s.base = basis;
  s.C_sigma = assembly.C_sigma;
  s.assembly = assembly;
  s.use_symmetry = use_symmetry;
  s.sweep_var = study.sweep;
  s.values = study.values;
  s.reference = study.reference;
  s.reference_C_sigma = study.reference_C_sigma;
  s.track = study.track;
  s.scf = scf;
  s.scf_config = scf_config;
  s.pw_values = study.pw_values;
  return s;
}

ProblemConfig parse_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigParse, "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_text(buf.str(), overrides, dir.empty() ? "." : dir, path);
}

ProblemConfig parse_config_string(const std::string& text, const std::vector<std::string>& overrides,
                                  const std::string& base_dir) {
  return parse_text(text, overrides, base_dir, "<string>");
}

}  // namespace apwdg
