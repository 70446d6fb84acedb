#include "hypolab/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace hypolab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  double v = std::stod(s, &pos);
  if (trim(s.substr(pos)) != "") throw std::invalid_argument("trailing characters");
  return v;
}

int to_int(const std::string& s) {
  std::size_t pos = 0;
  int v = std::stoi(s, &pos);
  if (trim(s.substr(pos)) != "") throw std::invalid_argument("trailing characters");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("expected true/false");
}

Vec to_vec(const std::string& s) {
  const auto parts = split(s, ',');
  Vec v(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) v(i) = to_double(parts[i]);
  return v;
}

struct Entry {
  std::string section, key, value;
  int line;
};

[[noreturn]] void fail(const std::string& source, int line, const std::string& msg) {
  throw ConfigError("config", source + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

Profile parse_profile(const std::string& text) {
  const std::string t = trim(text);
  auto body = [&](const std::string& head) -> std::pair<std::string, int> {
    if (t.back() != ')') throw std::invalid_argument("missing ')' in profile");
    std::string inner = t.substr(head.size(), t.size() - head.size() - 1);
    int axis = 0;
    const auto semi = inner.find(';');
    if (semi != std::string::npos) {
      const std::string opt = trim(inner.substr(semi + 1));
      if (opt.rfind("axis=", 0) != 0) throw std::invalid_argument("unknown profile option '" + opt + "'");
      axis = to_int(opt.substr(5));
      inner = inner.substr(0, semi);
    }
    return {inner, axis};
  };
  if (t.rfind("poly(", 0) == 0) {
    const auto [inner, axis] = body("poly(");
    std::vector<double> c;
    for (const auto& p : split(inner, ',')) c.push_back(to_double(p));
    return Profile::polynomial(c, axis);
  }
  if (t.rfind("table(", 0) == 0) {
    const auto [inner, axis] = body("table(");
    std::vector<double> g, v;
    for (const auto& p : split(inner, ',')) {
      const auto kv = split(p, ':');
      if (kv.size() != 2) throw std::invalid_argument("table entries are q:value");
      g.push_back(to_double(kv[0]));
      v.push_back(to_double(kv[1]));
    }
    return Profile::table(g, v, axis);
  }
  return Profile::constant(to_double(t));
}

ProblemSpec parse_config(const std::string& text, const std::string& source) {
  std::vector<Entry> entries;
  {
    std::istringstream is(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(is, raw)) {
      ++line;
      const auto hash = raw.find('#');
      const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') fail(source, line, "unterminated section header");
        section = trim(s.substr(1, s.size() - 2));
        if (section != "problem" && section != "scales" && section != "coefficients.b" &&
            section != "coefficients.c" && section != "coefficients.sigma")
          fail(source, line, "unknown section [" + section + "]");
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) fail(source, line, "expected 'key = value'");
      if (section.empty()) fail(source, line, "key outside of any section");
      entries.push_back({section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line});
    }
  }

  ProblemSpec spec;
  bool have_preset = false;
  for (const auto& e : entries)
    if (e.section == "problem" && e.key == "preset") {
      try {
        spec = make_preset(parse_preset(e.value));
      } catch (const Error& err) {
        fail(source, e.line, err.what());
      }
      have_preset = true;
    }
  for (const auto& e : entries)
    if (e.section == "problem" && e.key == "dim") {
      int d = 0;
      try {
        d = to_int(e.value);
      } catch (const std::exception&) {
        fail(source, e.line, "dim must be an integer");
      }
      if (d < 1 || d > 2) fail(source, e.line, "dim must be 1 or 2");
      if (!have_preset || d != spec.dim) {
        spec.dim = d;
        spec.b.assign(d, Series{});
        spec.c.assign(d, Series{});
        spec.b_offset.assign(d, 0.0);
        spec.b_offset_free.assign(d, true);
        spec.q0 = Vec::Zero(d);
        spec.q_grid = {Vec::Zero(d)};
      }
    }
  if (spec.b.empty()) {
    spec.b.assign(spec.dim, Series{});
    spec.c.assign(spec.dim, Series{});
    spec.b_offset.assign(spec.dim, 0.0);
    spec.b_offset_free.assign(spec.dim, true);
    spec.q0 = Vec::Zero(spec.dim);
    spec.q_grid = {Vec::Zero(spec.dim)};
  }
  const int d = spec.dim;

  bool lo_set = false, hi_set = false;
  std::map<std::string, bool> cleared;
  for (const auto& e : entries) {
    try {
      if (e.section == "problem") {
        if (e.key == "preset" || e.key == "dim") continue;
        if (e.key == "name") spec.name = e.value;
        else if (e.key == "lambda") spec.lambda = parse_profile(e.value);
        else if (e.key == "lambda_lo") spec.lambda_lo = to_double(e.value), lo_set = true;
        else if (e.key == "lambda_hi") spec.lambda_hi = to_double(e.value), hi_set = true;
        else if (e.key == "beta") spec.beta = to_double(e.value);
        else if (e.key == "sigma_mode") {
          if (e.value == "fluctuation_dissipation") spec.sigma_mode = SigmaMode::fluctuation_dissipation;
          else if (e.value == "general_matrix") spec.sigma_mode = SigmaMode::general_matrix;
          else fail(source, e.line, "sigma_mode is fluctuation_dissipation or general_matrix");
        } else if (e.key == "q0") spec.q0 = to_vec(e.value);
        else if (e.key == "p0") spec.p0 = to_vec(e.value);
        else if (e.key == "q_grid") {
          spec.q_grid.clear();
          for (const auto& pt : split(e.value, ';')) spec.q_grid.push_back(to_vec(pt));
        } else fail(source, e.line, "unknown key '" + e.key + "' in [problem]");
      } else if (e.section == "scales") {
        if (e.key == "eps") spec.eps = to_double(e.value);
        else if (e.key == "delta") spec.delta = to_double(e.value);
        else if (e.key == "mass") spec.mass = to_double(e.value);
        else fail(source, e.line, "unknown key '" + e.key + "' in [scales]");
      } else {
        const std::string which = e.section.substr(13);
        std::vector<Series>& target = which == "b" ? spec.b : which == "c" ? spec.c : spec.sigma;
        const int ncomp = which == "sigma" ? d * d : d;
        if (e.key == "mode") {
          if (!cleared[which]) {
            target.assign(ncomp, Series{});
            cleared[which] = true;
          }
          int comp = -1;
          FourierTerm t;
          t.cos_amp = Profile::constant(0.0);
          t.sin_amp = Profile::constant(0.0);
          std::istringstream ts(e.value);
          std::string tok;
          while (ts >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) fail(source, e.line, "mode token '" + tok + "' is not key=value");
            const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
            if (k == "component") comp = to_int(v);
            else if (k == "k") {
              for (const auto& x : split(v, ',')) t.k.push_back(to_int(x));
            } else if (k == "cos") t.cos_amp = parse_profile(v);
            else if (k == "sin") t.sin_amp = parse_profile(v);
            else fail(source, e.line, "unknown mode field '" + k + "'");
          }
          if (comp < 0 || comp >= ncomp) fail(source, e.line, "mode component out of range");
          if (static_cast<int>(t.k.size()) != d) fail(source, e.line, "wave vector needs one entry per dimension");
          target[comp].terms.push_back(t);
        } else if (e.key == "offset" && which == "b") {
          const Vec v = to_vec(e.value);
          if (v.size() != d) fail(source, e.line, "offset needs one value per component");
          for (int l = 0; l < d; ++l) spec.b_offset[l] = v(l);
        } else if (e.key == "free" && which == "b") {
          const auto parts = split(e.value, ',');
          if (static_cast<int>(parts.size()) != d) fail(source, e.line, "free needs one flag per component");
          for (int l = 0; l < d; ++l) spec.b_offset_free[l] = to_bool(parts[l]);
        } else {
          fail(source, e.line, "unknown key '" + e.key + "' in [" + e.section + "]");
        }
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& ex) {
      fail(source, e.line, "bad value '" + e.value + "' for " + e.key + " (" + ex.what() + ")");
    }
  }
  if (spec.lambda.is_constant()) {
    if (!lo_set) spec.lambda_lo = spec.lambda.constant_value();
    if (!hi_set) spec.lambda_hi = spec.lambda.constant_value();
  } else if (!lo_set || !hi_set) {
    fail(source, 0, "non-constant lambda needs lambda_lo and lambda_hi");
  }
  if (spec.sigma_mode == SigmaMode::general_matrix && spec.sigma.empty())
    fail(source, 0, "general_matrix sigma needs [coefficients.sigma] modes");
  try {
    spec.validate();
  } catch (const ParameterError& e) {
    throw ConfigError("cli", source + ": " + e.what());
  }
  return spec;
}

ProblemSpec load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cli", "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string canonical_config(const ProblemSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  auto vec = [&](const Vec& v) {
    std::ostringstream o;
    o.precision(17);
    for (long i = 0; i < v.size(); ++i) o << (i ? "," : "") << v(i);
    return o.str();
  };
  os << "[problem]\nname = " << spec.name << "\ndim = " << spec.dim << "\nlambda = " << spec.lambda.describe()
     << "\nlambda_lo = " << spec.lambda_lo << "\nlambda_hi = " << spec.lambda_hi << "\nbeta = " << spec.beta
     << "\nsigma_mode = "
     << (spec.sigma_mode == SigmaMode::fluctuation_dissipation ? "fluctuation_dissipation" : "general_matrix")
     << "\nq0 = " << vec(spec.q0) << "\n";
  if (spec.p0) os << "p0 = " << vec(*spec.p0) << "\n";
  os << "q_grid = ";
  for (std::size_t i = 0; i < spec.q_grid.size(); ++i) os << (i ? " ; " : "") << vec(spec.q_grid[i]);
  os << "\n";
  auto series = [&](const std::string& name, const std::vector<Series>& s) {
    os << "\n[coefficients." << name << "]\n";
    for (std::size_t comp = 0; comp < s.size(); ++comp)
      for (const auto& t : s[comp].terms) {
        os << "mode = component=" << comp << " k=";
        for (std::size_t a = 0; a < t.k.size(); ++a) os << (a ? "," : "") << t.k[a];
        os << " cos=" << t.cos_amp.describe() << " sin=" << t.sin_amp.describe() << "\n";
      }
  };
  series("b", spec.b);
  os << "offset = ";
  for (int l = 0; l < spec.dim; ++l) os << (l ? "," : "") << spec.b_offset[l];
  os << "\nfree = ";
  for (int l = 0; l < spec.dim; ++l) os << (l ? "," : "") << (spec.b_offset_free[l] ? "true" : "false");
  os << "\n";
  series("c", spec.c);
  if (spec.sigma_mode == SigmaMode::general_matrix) series("sigma", spec.sigma);
  os << "\n[scales]\neps = " << spec.eps << "\ndelta = " << spec.delta << "\nmass = " << spec.mass << "\n";
  return os.str();
}

}  // namespace hypolab
