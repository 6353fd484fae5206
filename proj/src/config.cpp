#include "qbcat/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace qbcat {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) {
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

ModelParams model_from_json(const json& j) {
  reject_unknown_keys(j, {"omega_a", "omega_c", "omega_d", "Omega", "g", "gamma_D", "kappa_1", "n_photon", "scenario"},
                      "model");
  ModelParams p;
  read_opt(j, "omega_a", p.omega_a);
  read_opt(j, "omega_c", p.omega_c);
  read_opt(j, "omega_d", p.omega_d);
  read_opt(j, "Omega", p.Omega);
  read_opt(j, "g", p.g);
  read_opt(j, "gamma_D", p.gamma_D);
  read_opt(j, "kappa_1", p.kappa_1);
  read_opt(j, "n_photon", p.n_photon);
  if (j.contains("scenario")) p.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  try {
    p.validate();
  } catch (const ModelError& e) {
    throw ConfigError(e.what());
  }
  return p;
}

SolverConfig solver_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"t_max", "dt_init", "dt_max", "dt_min", "max_steps", "rel_tol", "abs_tol",
                       "stiffness_policy", "fd_step", "output_points", "output_grid"},
                      "solver");
  SolverConfig c;
  read_opt(j, "t_max", c.t_max);
  read_opt(j, "dt_init", c.dt_init);
  read_opt(j, "dt_max", c.dt_max);
  read_opt(j, "dt_min", c.dt_min);
  read_opt(j, "max_steps", c.max_steps);
  read_opt(j, "rel_tol", c.rel_tol);
  read_opt(j, "abs_tol", c.abs_tol);
  read_opt(j, "fd_step", c.fd_step);
  if (j.contains("stiffness_policy")) {
    c.stiffness_policy = stiffness_policy_from_string(j.at("stiffness_policy").get<std::string>());
  }
  if (j.contains("output_grid") && j.contains("output_points")) {
    throw ConfigError("solver: give either output_grid or output_points, not both");
  }
  if (j.contains("output_grid")) {
    read_opt(j, "output_grid", c.output_grid);
  } else {
    std::size_t points = 3001;
    read_opt(j, "output_points", points);
    if (points < 1) throw ConfigError("solver: output_points must be >= 1");
    c.set_uniform_grid(points);
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

InitialState initial_state_from_json(const json& j) {
  InitialState s;
  if (j.is_string()) {
    if (j.get<std::string>() != "ground_ground") throw ConfigError("initial_state: unknown name");
    return s;
  }
  reject_unknown_keys(j, {"type", "dims", "components"}, "initial_state");
  const std::string type = j.value("type", "ground_ground");
  if (type == "ground_ground") return s;
  if (type != "spectral") throw ConfigError("initial_state.type must be ground_ground or spectral");

  s.kind = InitialState::Kind::spectral;
  read_opt(j, "dims", s.dims);
  if (s.dims.empty()) throw ConfigError("spectral initial_state needs dims");
  std::size_t n = 1;
  for (auto d : s.dims) n *= d;
  if (!j.contains("components") || !j.at("components").is_array() || j.at("components").empty()) {
    throw ConfigError("spectral initial_state needs a non-empty components list");
  }
  for (const auto& c : j.at("components")) {
    reject_unknown_keys(c, {"weight", "amplitudes"}, "initial_state component");
    InitialState::Component comp;
    read_opt(c, "weight", comp.weight);
    if (!(comp.weight >= 0.0)) throw ConfigError("component weight must be >= 0");
    const auto& amps = c.at("amplitudes");
    if (!amps.is_array() || amps.size() != n) throw ConfigError("component amplitudes must have prod(dims) entries");
    comp.amplitudes.resize(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
      const auto& a = amps.at(k);
      if (a.is_number()) {
        comp.amplitudes(static_cast<Eigen::Index>(k)) = a.get<double>();
      } else if (a.is_array() && a.size() == 2) {
        comp.amplitudes(static_cast<Eigen::Index>(k)) = cplx{a.at(0).get<double>(), a.at(1).get<double>()};
      } else {
        throw ConfigError("amplitude must be a number or [re, im]");
      }
    }
    s.components.push_back(std::move(comp));
  }
  return s;
}

ScenarioSpec scenario_part(const json& doc, const std::set<std::string>& extra_keys) {
  std::set<std::string> known{"label", "model", "solver", "initial_state", "fd_mode"};
  known.insert(extra_keys.begin(), extra_keys.end());
  reject_unknown_keys(doc, known, "config");
  ScenarioSpec s;
  read_opt(doc, "label", s.label);
  s.model = model_from_json(doc.value("model", json::object()));
  s.solver = solver_from_json(doc.value("solver", json::object()));
  if (doc.contains("initial_state")) s.initial_state = initial_state_from_json(doc.at("initial_state"));
  if (doc.contains("fd_mode")) s.fd_mode = fd_mode_from_string(doc.at("fd_mode").get<std::string>());
  s.initial_state.build(s.model);  // dimension check
  return s;
}

}  // namespace

DensityMatrix InitialState::build(const ModelParams& p) const {
  if (kind == Kind::ground_ground) return ground_state(p);

  std::size_t n = 1;
  for (auto d : dims) n *= d;
  const auto ni = static_cast<Eigen::Index>(n);
  Matrix rho = Matrix::Zero(ni, ni);
  double total = 0.0;
  for (const auto& c : components) {
    const double norm = c.amplitudes.norm();
    if (norm == 0.0) throw ConfigError("initial_state component has zero norm");
    const Eigen::VectorXcd v = c.amplitudes / norm;
    rho += c.weight * (v * v.adjoint());
    total += c.weight;
  }
  if (!(total > 0.0)) throw ConfigError("initial_state weights sum to zero");
  rho /= total;

  Operator op(dims, rho);
  const auto want = p.dims();
  if (dims == want) return DensityMatrix(std::move(op));
  if (!p.catalyzed() && dims.size() == 2 && dims[0] == 2) return DensityMatrix(partial_trace(op, 0));
  throw ConfigError("initial_state dims do not match the model's Hilbert space");
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::omega_c:
      return "omega_c";
    case SweepAxis::g:
      return "g";
    case SweepAxis::kappa_1:
      return "kappa_1";
    case SweepAxis::gamma_D:
      return "gamma_D";
  }
  return "g";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "omega_c") return SweepAxis::omega_c;
  if (s == "g") return SweepAxis::g;
  if (s == "kappa_1") return SweepAxis::kappa_1;
  if (s == "gamma_D") return SweepAxis::gamma_D;
  throw ConfigError("unknown sweep axis '" + s + "'");
}

ModelParams with_axis_value(ModelParams p, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::omega_c:
      p.omega_c = value;
      break;
    case SweepAxis::g:
      p.g = value;
      break;
    case SweepAxis::kappa_1:
      p.kappa_1 = value;
      break;
    case SweepAxis::gamma_D:
      p.gamma_D = value;
      break;
  }
  return p;
}

void SweepSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep: values must be non-empty");
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("sweep: values must be finite and >= 0");
  }
  if (!base.model.catalyzed()) throw ConfigError("sweep: base scenario must be catalyzed");
}

void ConvergenceSpec::validate() const {
  if (cutoffs.empty() && step_scales.empty()) throw ConfigError("convergence: nothing to do");
  for (std::size_t k = 0; k < cutoffs.size(); ++k) {
    if (cutoffs[k] < 1) throw ConfigError("convergence: cutoffs must be >= 1");
    if (k > 0 && cutoffs[k] <= cutoffs[k - 1]) throw ConfigError("convergence: cutoffs must be ascending");
  }
  for (double s : step_scales) {
    if (!(s > 0.0 && s <= 1.0)) throw ConfigError("convergence: step_scales must lie in (0, 1]");
  }
  if (!base.model.catalyzed() && !cutoffs.empty()) {
    throw ConfigError("convergence: cutoff study needs the catalyzed scenario");
  }
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

ScenarioSpec scenario_from_json(const json& doc) { return scenario_part(doc, {"sweep", "convergence"}); }

SweepSpec sweep_from_json(const json& doc) {
  SweepSpec s;
  s.base = scenario_part(doc, {"sweep", "convergence"});
  if (!doc.contains("sweep")) throw ConfigError("config has no 'sweep' section");
  const json& sw = doc.at("sweep");
  reject_unknown_keys(sw, {"axis", "values", "include_uncatalyzed_baseline"}, "sweep");
  if (!sw.contains("axis")) throw ConfigError("sweep.axis is required");
  s.axis = sweep_axis_from_string(sw.at("axis").get<std::string>());
  read_opt(sw, "values", s.values);
  read_opt(sw, "include_uncatalyzed_baseline", s.include_uncatalyzed_baseline);
  s.validate();
  return s;
}

ConvergenceSpec convergence_from_json(const json& doc) {
  ConvergenceSpec s;
  s.base = scenario_part(doc, {"sweep", "convergence"});
  if (doc.contains("convergence")) {
    const json& cv = doc.at("convergence");
    reject_unknown_keys(cv, {"cutoffs", "step_scales"}, "convergence");
    read_opt(cv, "cutoffs", s.cutoffs);
    read_opt(cv, "step_scales", s.step_scales);
  }
  s.validate();
  return s;
}

json to_json(const ModelParams& p) {
  return {{"omega_a", p.omega_a}, {"omega_c", p.omega_c}, {"omega_d", p.omega_d},
          {"Omega", p.Omega},     {"g", p.g},             {"gamma_D", p.gamma_D},
          {"kappa_1", p.kappa_1}, {"n_photon", p.n_photon}, {"scenario", to_string(p.scenario)}};
}

json to_json(const SolverConfig& c) {
  return {{"t_max", c.t_max},
          {"dt_init", c.dt_init},
          {"dt_max", c.dt_max},
          {"dt_min", c.dt_min},
          {"max_steps", c.max_steps},
          {"rel_tol", c.rel_tol},
          {"abs_tol", c.abs_tol},
          {"stiffness_policy", to_string(c.stiffness_policy)},
          {"fd_step", c.fd_step},
          {"output_points", c.output_grid.size()}};
}

}  // namespace qbcat
