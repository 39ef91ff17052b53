#include "params.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace walkrg::cli {

const char* type_name(ParamType t) {
  switch (t) {
    case ParamType::Int: return "integer";
    case ParamType::UInt: return "non-negative integer";
    case ParamType::Double: return "number";
    case ParamType::Bool: return "boolean";
    case ParamType::String: return "string";
    case ParamType::IntList: return "list of integers";
    case ParamType::DoubleList: return "list of numbers";
  }
  return "?";
}

const ParamSpec* Schema::find(const std::string& key) const {
  for (const auto& p : params)
    if (p.key == key) return &p;
  return nullptr;
}

json Schema::defaults() const {
  json out = json::object();
  for (const auto& p : params) out[p.key] = p.fallback;
  return out;
}

std::vector<std::string> Schema::keys() const {
  std::vector<std::string> k;
  for (const auto& p : params) k.push_back(p.key);
  return k;
}

namespace {

json scalar(ParamType t, const json& v, const std::string& field) {
  auto fail = [&] { return ConfigError(field, std::string("expected ") + type_name(t) + ", got " + v.dump()); };
  switch (t) {
    case ParamType::Int:
      if (v.is_number_integer()) return v.get<std::int64_t>();
      if (v.is_number_float() && std::nearbyint(v.get<double>()) == v.get<double>() && std::abs(v.get<double>()) < 9e15)
        return static_cast<std::int64_t>(v.get<double>());
      throw fail();
    case ParamType::UInt:
      if (v.is_number_unsigned()) return v.get<std::uint64_t>();
      if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
      if (v.is_number_float() && v.get<double>() >= 0 && std::nearbyint(v.get<double>()) == v.get<double>() &&
          v.get<double>() < 9e15)
        return static_cast<std::uint64_t>(v.get<double>());
      throw fail();
    case ParamType::Double:
      if (v.is_number()) return v.get<double>();
      throw fail();
    case ParamType::Bool:
      if (v.is_boolean()) return v;
      throw fail();
    case ParamType::String:
      if (v.is_string()) return v;
      throw fail();
    default: break;
  }
  throw fail();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(item);
  return out;
}

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t");
  const auto b = s.find_last_not_of(" \t");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

json number_from_text(const std::string& text, bool integral, const std::string& field, ParamType t) {
  const std::string s = trim(text);
  auto bad = [&] { return ConfigError(field, std::string("expected ") + type_name(t) + ", got '" + text + "'"); };
  if (s.empty()) throw bad();
  if (integral) {
    if (s.front() == '-') {
      std::int64_t v = 0;
      const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) throw bad();
      return v;
    }
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw bad();
    return v;
  }
  // strtod: from_chars for double is missing in this libstdc++
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) throw bad();
  return v;
}

}  // namespace

json coerce(const ParamSpec& spec, const json& value) {
  if (spec.type == ParamType::IntList || spec.type == ParamType::DoubleList) {
    if (!value.is_array() || value.empty())
      throw ConfigError(spec.key, std::string("expected non-empty ") + type_name(spec.type) + ", got " + value.dump());
    const ParamType elem = spec.type == ParamType::IntList ? ParamType::Int : ParamType::Double;
    json out = json::array();
    for (const auto& v : value) out.push_back(scalar(elem, v, spec.key));
    return out;
  }
  return scalar(spec.type, value, spec.key);
}

json parse_flag(const ParamSpec& spec, const std::string& text) {
  switch (spec.type) {
    case ParamType::Int:
    case ParamType::UInt: return coerce(spec, number_from_text(text, true, spec.key, spec.type));
    case ParamType::Double: return number_from_text(text, false, spec.key, spec.type);
    case ParamType::Bool: {
      const auto s = trim(text);
      if (s == "true" || s == "1" || s == "yes") return true;
      if (s == "false" || s == "0" || s == "no") return false;
      throw ConfigError(spec.key, "expected true/false, got '" + text + "'");
    }
    case ParamType::String: return text;
    case ParamType::IntList:
    case ParamType::DoubleList: {
      json arr = json::array();
      for (const auto& item : split(text, ','))
        arr.push_back(number_from_text(item, spec.type == ParamType::IntList, spec.key, spec.type));
      return coerce(spec, arr);
    }
  }
  throw ConfigError(spec.key, "unsupported type");
}

void overlay(const Schema& schema, json& base, const json& layer, const std::string& origin) {
  if (!layer.is_object()) throw ConfigError("", origin + ": expected a JSON object of parameters");
  for (const auto& [key, value] : layer.items()) {
    const ParamSpec* spec = schema.find(key);
    if (!spec) {
      std::string known;
      for (const auto& k : schema.keys()) known += (known.empty() ? "" : ", ") + k;
      throw ConfigError(key, "unknown key in " + origin + " for '" + schema.subcommand + "' (known: " + known + ")");
    }
    base[key] = coerce(*spec, value);
  }
}

namespace {

using T = ParamType;

std::vector<Schema> build() {
  std::vector<Schema> s;
  s.push_back({"enumerate", "saw-enum", "exact self-avoiding walk counts c_n on Z^d",
               {{"d", T::Int, 3, "lattice dimension"},
                {"n", T::Int, 10, "largest walk length"},
                {"symmetry", T::Bool, true, "enumerate first step +e_0 only and multiply by 2d"},
                {"budget_seconds", T::Double, 0.0, "stop before a length predicted to overrun this budget (0: none)"},
                {"golden", T::String, "", "counts file for --check (default: bundled d=3 table)"}}});
  s.push_back({"pivot", "walk-mc", "pivot-algorithm R_n^2 and the exponent nu",
               {{"d", T::Int, 2, "lattice dimension (1..5)"},
                {"lengths", T::IntList, json::array({64, 128, 256, 512, 1024}), "walk lengths, spanning a factor >= 4"},
                {"samples", T::UInt, 100000u, "accepted moves recorded per length"},
                {"burn_in", T::UInt, 0u, "accepted moves discarded per length (0: 10 n)"},
                {"nu_min", T::Double, 0.0, "--check window (0 with nu_max 0: built-in window for d = 2, 5)"},
                {"nu_max", T::Double, 0.0, "--check window upper end"}}});
  s.push_back({"wsaw", "wsaw-ct", "continuous-time weakly self-avoiding walk: c_{T,g} and chi(g, nu)",
               {{"walk", T::String, "nn", "nn, longrange, or a graph name (single-site, path-M, cycle-M, torus-P2)"},
                {"d", T::Int, 1, "dimension for nn / longrange"},
                {"alpha", T::Double, 1.5, "long-range exponent in (0, 2)"},
                {"g", T::Double, 1.0, "coupling g >= 0"},
                {"nu", T::Double, 1.0, "mass nu > 0"},
                {"T_max", T::Double, 10.0, "integration horizon"},
                {"dT", T::Double, 0.05, "time step of the trapezoid rule"},
                {"samples", T::UInt, 2000u, "sample paths"}}});
  s.push_back({"gaussian-check", "gaussian-field", "covariance, decomposition and progressive-integration identities",
               {{"d", T::Int, 1, "torus dimension"},
                {"L", T::Int, 2, "block factor"},
                {"N", T::Int, 2, "number of scales (period L^N)"},
                {"alpha", T::Double, 1.5, "fractional exponent in (0, 2]"},
                {"m2", T::Double, 0.3, "mass m^2 > 0"},
                {"observables", T::Int, 20, "random polynomials for the progressive identity"},
                {"degree", T::Int, 6, "their maximal degree"},
                {"terms", T::Int, 8, "monomials per polynomial"}}});
  s.push_back({"polymer-check", "polymer-algebra", "reblocking identity and component factorization",
               {{"L", T::Int, 2, "block factor of the d = 1 torus"},
                {"N", T::Int, 2, "scales of the identity torus"},
                {"alpha", T::Double, 1.5, "covariance exponent"},
                {"m2", T::Double, 0.5, "covariance mass"},
                {"instances", T::Int, 20, "random (I, I_+, K) instances"},
                {"degree", T::Int, 2, "polynomial degree of the instances"},
                {"factor_N", T::Int, 3, "scales of the factorization torus"},
                {"factor_range", T::Int, 2, "range of the finite-range covariance"}}});
  s.push_back({"rg-flow", "rg-flow", "fixed points and the susceptibility exponent of the (s, mu) flow",
               {{"n", T::Double, 1.0, "number of field components (0: weakly self-avoiding walk)"},
                {"d", T::Int, 1, "dimension used for the beta table"},
                {"L", T::Int, 2, "block factor"},
                {"eps", T::Double, 0.1, "epsilon = 2 alpha - d"},
                {"alpha", T::Double, 0.0, "long-range exponent (0: (d + eps)/2)"},
                {"beta", T::String, "decomposition", "decomposition or constant"},
                {"a", T::Double, 1.9737, "beta value for beta = constant"},
                {"m2_min", T::Double, 1e-6, "smallest m^2 of the fit grid"},
                {"m2_max", T::Double, 1e-2, "largest m^2"},
                {"points", T::Int, 41, "grid points"},
                {"N", T::Int, 0, "flow length (0: mass scale of m2_min + 2)"},
                {"tolerance", T::Double, 0.02, "--check: |gamma - (1 + k eps/alpha)|"}}});
  s.push_back({"phase-portrait", "rg-flow", "massless trajectories of the (s, mu) flow",
               {{"n", T::Double, 1.0, "number of field components"},
                {"L", T::Int, 2, "block factor"},
                {"eps", T::Double, 0.1, "epsilon"},
                {"alpha", T::Double, 0.55, "long-range exponent"},
                {"a", T::Double, 1.0, "constant beta"},
                {"s_min", T::Double, 0.0, "smallest s_0"},
                {"s_max", T::Double, 0.15, "largest s_0"},
                {"s_points", T::Int, 7, "s_0 values"},
                {"mu_min", T::Double, -0.02, "smallest mu_0"},
                {"mu_max", T::Double, 0.02, "largest mu_0"},
                {"mu_points", T::Int, 5, "mu_0 values"},
                {"j_max", T::Int, 80, "scales per trajectory"},
                {"mu_escape", T::Double, 1e3, "|mu| beyond this counts as divergence"}}});
  s.push_back({"phi4", "phi4-tiny", "|phi|^4 susceptibility by direct quadrature and through Z_N",
               {{"graph", T::String, "torus-P2", "graph with at most four sites"},
                {"kinetic_alpha", T::Double, 2.0, "kinetic operator (-Delta)^{alpha/2}"},
                {"components", T::Int, 1, "field components (1 or 2)"},
                {"g", T::DoubleList, json::array({0.2, 1.0, 3.0}), "couplings"},
                {"nu", T::DoubleList, json::array({0.3, 0.7, 1.4}), "total masses nu = nu_0 + m^2"},
                {"m2", T::Double, 0.4, "Gaussian part m^2 of the split"},
                {"m2_alt", T::Double, 0.2, "second split for the invariance check"},
                {"nodes", T::Int, 0, "quadrature nodes per axis (0: default)"},
                {"tolerance", T::Double, 1e-6, "--check: agreement of the two computations"}}});
  s.push_back({"susy-check", "susy-saw", "supersymmetric integral representation against the walk",
               {{"graph", T::String, "path-2", "graph with at most three sites"},
                {"g", T::Double, 1.0, "coupling g > 0"},
                {"nu", T::Double, 1.0, "mass nu"},
                {"walk_samples", T::UInt, 20000u, "walk-side sample paths"},
                {"dT", T::Double, 0.05, "walk-side time step"},
                {"T_max", T::Double, 0.0, "walk-side horizon (0: 25/nu)"},
                {"nodes", T::Int, 0, "bosonic nodes per axis (0: default)"},
                {"tolerance", T::Double, 1e-4, "--check: |integral of e^{-S} - 1|"}}});
  return s;
}

}  // namespace

const std::vector<Schema>& schemas() {
  static const std::vector<Schema> all = build();
  return all;
}

const Schema& schema_for(const std::string& subcommand) {
  for (const auto& s : schemas())
    if (s.subcommand == subcommand) return s;
  throw ConfigError("", "unknown subcommand '" + subcommand + "'");
}

}  // namespace walkrg::cli
