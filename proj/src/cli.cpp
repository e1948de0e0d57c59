#include "pareig/cli.hpp"

#include "pareig/asymptotics.hpp"
#include "pareig/eigensolver.hpp"
#include "pareig/gaussian.hpp"
#include "pareig/objectives.hpp"
#include "pareig/optimizer.hpp"
#include "pareig/problems.hpp"
#include "pareig/projections.hpp"
#include "pareig/rearrangement.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>

namespace pareig::cli {

namespace {

namespace fs = std::filesystem;

// Sections whose content depends on a "type" field: a user value replaces
// the default wholesale instead of being merged into it.
const std::set<std::string> polymorphic{"potential", "constraint", "objective", "v",
                                        "c", "initial", "reference"};

json merge(const json& base, const json& patch, const std::string& where) {
  if (!patch.is_object() || !base.is_object()) return patch;
  json out = base;
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string path = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key()))
      throw ConfigError("unknown config key '" + path + "'");
    if (polymorphic.contains(it.key()) || !base[it.key()].is_object())
      out[it.key()] = it.value();
    else
      out[it.key()] = merge(base[it.key()], it.value(), path);
  }
  return out;
}

const json& need(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError(where + ": missing key '" + key + "'");
  return j.at(key);
}

std::string type_of(const json& f, const std::string& where) {
  const json& t = need(f, "type", where);
  if (!t.is_string()) throw ConfigError(where + ": 'type' must be a string");
  return t.get<std::string>();
}

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<int>();
}

// Fills missing keys of a formula object from `defaults`, rejects others.
json with_defaults(const json& f, const json& defaults, const std::string& where) {
  json out = defaults;
  for (auto it = f.begin(); it != f.end(); ++it) {
    if (!defaults.contains(it.key()))
      throw ConfigError(where + ": unknown key '" + it.key() + "' for type '" +
                        f.at("type").get<std::string>() + "'");
    out[it.key()] = it.value();
  }
  return out;
}

json profile_defaults(const std::string& type, const std::string& where) {
  if (type == "constant") return {{"type", type}, {"value", 0.0}};
  if (type == "cos" || type == "sin")
    return {{"type", type}, {"amplitude", 1.0}, {"frequency", 1.0},
            {"phase", 0.0}, {"offset", 0.0}};
  if (type == "values") return {{"type", type}, {"values", json::array()}};
  if (type == "file") return {{"type", type}, {"path", ""}};
  throw ConfigError(where + ": unknown profile type '" + type + "'");
}

std::vector<double> numbers_from_csv(const std::string& text, const std::string& where) {
  // one value per line (the last column); a non-numeric first line is a header
  std::vector<double> out;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cut = line.find_last_of(',');
    const std::string cell = cut == std::string::npos ? line : line.substr(cut + 1);
    try {
      size_t used = 0;
      const double v = std::stod(cell, &used);
      out.push_back(v);
    } catch (const std::exception&) {
      if (!first) throw ConfigError(where + ": non-numeric entry '" + cell + "'");
    }
    first = false;
  }
  return out;
}

Eigen::VectorXd sample_profile(const json& f0, int n, const std::function<double(int)>& coord,
                               const std::string& where) {
  const std::string type = type_of(f0, where);
  const json f = with_defaults(f0, profile_defaults(type, where), where);
  Eigen::VectorXd v(n);
  if (type == "constant") {
    v.setConstant(parse_real(f["value"]));
  } else if (type == "cos" || type == "sin") {
    const double a = parse_real(f["amplitude"]), k = parse_real(f["frequency"]);
    const double p = parse_real(f["phase"]), o = parse_real(f["offset"]);
    for (int i = 0; i < n; ++i) {
      const double arg = k * coord(i) + p;
      v[i] = o + a * (type == "cos" ? std::cos(arg) : std::sin(arg));
    }
  } else {
    std::vector<double> raw;
    if (type == "values") {
      for (const auto& e : f["values"]) raw.push_back(parse_real(e));
    } else {
      raw = numbers_from_csv(read_file(f["path"].get<std::string>()), where);
    }
    if (static_cast<int>(raw.size()) != n)
      throw ConfigError(where + ": expected " + std::to_string(n) + " samples, got " +
                        std::to_string(raw.size()));
    for (int i = 0; i < n; ++i) v[i] = raw[static_cast<size_t>(i)];
  }
  if (!v.allFinite()) throw ConfigError(where + ": non-finite samples");
  return v;
}

EigenOptions eigen_options(const json& cfg) {
  const json& e = cfg.at("eigen");
  EigenOptions o;
  o.tol = parse_real(e.at("tol"));
  o.max_iters = get_int(e.at("max_iters"), "eigen.max_iters");
  o.seed = e.at("seed").get<std::uint64_t>();
  return o;
}

BlockParabolicOperator operator_from_config(const json& cfg, const SpaceTimeGrid& g) {
  const double a = parse_real(cfg.at("operator").at("alpha"));
  const double b = parse_real(cfg.at("operator").at("beta"));
  if (!(a > 0 && b > 0)) throw ConfigError("operator: alpha and beta must be positive");
  return BlockParabolicOperator(g, a, b);
}

json base_metadata(const std::string& command, const json& cfg, const SpaceTimeGrid* g) {
  json meta{{"command", command}, {"config", cfg}};
  if (g) meta["grid"] = grid_to_json(*g);
  return meta;
}

void write_metadata(const fs::path& out, const json& meta) {
  write_file(out / "metadata.json", dump_json(meta));
}

std::string profile_csv_with_header(const TimeProfile& c, const std::string& name) {
  std::vector<std::vector<double>> rows;
  for (int j = 0; j < c.size(); ++j) rows.push_back({c.grid().time(j), c.values()[j]});
  return table_to_csv({"t", name}, rows);
}

// Cells strictly between lo and hi, and the number of maximal runs at hi.
json bang_bang_report(const TimeProfile& c, double lo, double hi) {
  const double tol = 1e-6 * std::max(1.0, hi - lo);
  const int n = c.size();
  int transition = 0, runs = 0;
  const double mid = 0.5 * (lo + hi);
  for (int j = 0; j < n; ++j) {
    const double x = c.values()[j];
    if (x > lo + tol && x < hi - tol) ++transition;
    runs += x > mid && c[j - 1] <= mid;
  }
  return {{"transition_cells", transition}, {"upper_intervals", runs}};
}

json body_check_json(const BodyCheck& b, double tol) {
  return {{"capacity", b.capacity}, {"monotone", b.monotone}, {"mass", b.mass},
          {"mass_order", b.mass_order}, {"tolerance", tol}, {"ok", b.ok(tol)}};
}

}  // namespace

double parse_real(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw ConfigError("expected a number, got " + j.dump());
  const std::string s = j.get<std::string>();
  static const std::regex re(
      R"(^\s*([+-]?)\s*(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)?\s*\*?\s*(pi)?\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$)");
  std::smatch mt;
  if (!std::regex_match(s, mt, re) || (!mt[2].matched && !mt[3].matched))
    throw ConfigError("cannot parse '" + s + "' as a real number");
  double v = mt[2].matched ? std::stod(mt[2].str()) : 1.0;
  if (mt[3].matched) v *= std::numbers::pi;
  if (mt[4].matched) v /= std::stod(mt[4].str());
  return mt[1].str() == "-" ? -v : v;
}

SpaceTimeGrid grid_from_config(const json& grid) {
  try {
    const int n = get_int(need(grid, "N", "grid"), "grid.N");
    const int m = get_int(need(grid, "M", "grid"), "grid.M");
    return SpaceTimeGrid(parse_real(need(grid, "T", "grid")), parse_real(need(grid, "L_lo", "grid")),
                         parse_real(need(grid, "L_hi", "grid")), n, m);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

TimeProfile time_profile_from_config(const json& f, const SpaceTimeGrid& g) {
  return {g, sample_profile(f, g.time_steps(), [&](int j) { return g.time(j); }, "time profile")};
}

SpaceProfile space_profile_from_config(const json& f, const SpaceTimeGrid& g) {
  return {g, sample_profile(f, g.space_steps(), [&](int i) { return g.space(i); }, "space profile")};
}

ScalarField field_from_config(const json& f0, const SpaceTimeGrid& g) {
  const std::string where = "field";
  const std::string type = type_of(f0, where);
  if (type == "separable") {
    return outer_product(time_profile_from_config(need(f0, "c", where), g),
                         space_profile_from_config(need(f0, "v", where), g));
  }
  if (type == "constant") {
    const json f = with_defaults(f0, {{"type", type}, {"value", 0.0}}, where);
    return ScalarField::constant(g, parse_real(f["value"]));
  }
  if (type == "cos_product") {
    const json f = with_defaults(
        f0, {{"type", type}, {"amplitude", 1.0}, {"time_frequency", 1.0}, {"time_phase", 0.0},
             {"space_frequency", 1.0}, {"space_phase", 0.0}, {"offset", 0.0}}, where);
    const double a = parse_real(f["amplitude"]), o = parse_real(f["offset"]);
    const double kt = parse_real(f["time_frequency"]), pt = parse_real(f["time_phase"]);
    const double kx = parse_real(f["space_frequency"]), px = parse_real(f["space_phase"]);
    return ScalarField::sample(g, [&](double t, double x) {
      return o + a * std::cos(kt * t + pt) * std::cos(kx * x + px);
    });
  }
  if (type == "cone") {
    const json f = with_defaults(
        f0, {{"type", type}, {"height", 1.0}, {"center_t", nullptr}, {"center_x", nullptr},
             {"radius_t", 1.0}, {"radius_x", 1.0}}, where);
    const double h = parse_real(f["height"]);
    const double ct = f["center_t"].is_null() ? 0.5 * g.horizon() : parse_real(f["center_t"]);
    const double cx = f["center_x"].is_null() ? 0.5 * (g.space_lo() + g.space_hi())
                                              : parse_real(f["center_x"]);
    const double rt = parse_real(f["radius_t"]), rx = parse_real(f["radius_x"]);
    if (!(rt > 0 && rx > 0)) throw ConfigError("cone: radii must be positive");
    return ScalarField::sample(g, [&](double t, double x) {
      const double r = std::hypot((t - ct) / rt, (x - cx) / rx);
      return h * std::max(0.0, 1 - r);
    });
  }
  if (type == "file") {
    const json f = with_defaults(f0, {{"type", type}, {"path", ""}}, where);
    const std::string text = read_file(f["path"].get<std::string>());
    Eigen::MatrixXd v(g.space_steps(), g.time_steps());
    std::istringstream in(text);
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (row >= g.space_steps()) throw ConfigError("field file: more than M rows");
      std::istringstream cells(line);
      std::string cell;
      int col = 0;
      while (std::getline(cells, cell, ',')) {
        if (col >= g.time_steps()) throw ConfigError("field file: more than N columns");
        try {
          v(row, col++) = std::stod(cell);
        } catch (const std::exception&) {
          throw ConfigError("field file: non-numeric entry '" + cell + "'");
        }
      }
      if (col != g.time_steps()) throw ConfigError("field file: row with wrong column count");
      ++row;
    }
    if (row != g.space_steps()) throw ConfigError("field file: expected M rows");
    return {g, v};
  }
  throw ConfigError(where + ": unknown field type '" + type + "'");
}

json default_config(const std::string& command) {
  json cfg{{"grid", {{"T", "2pi"}, {"L_lo", "-pi"}, {"L_hi", "pi"}, {"N", 64}, {"M", 32}}},
           {"seed", 0},
           {"threads", 1}};
  const json eigen{{"tol", 1e-10}, {"max_iters", 500}, {"seed", 20240611},
                   {"residual_gate", 1e-8}};
  const json op{{"alpha", 1.0}, {"beta", 1.0}};
  if (command == "solve") {
    cfg["operator"] = op;
    cfg["eigen"] = eigen;
    cfg["problem"] = "eigen";
    cfg["potential"] = {{"type", "constant"}, {"value", 0.0}};
    cfg["direct"] = {{"residual_gate", 1e-10}};
  } else if (command == "optimize") {
    cfg["operator"] = op;
    cfg["eigen"] = eigen;
    cfg["objective"] = {{"type", "talenti"}, {"k", 1}};
    cfg["control"] = "profile";
    cfg["v"] = {{"type", "cos"}};
    cfg["constraint"] = {{"type", "box_mean"}, {"lo", 0.0}, {"hi", 1.0}, {"mean", 0.5}};
    cfg["initial"] = {{"type", "random"}};
    json opt = config_to_json(OptimizerConfig{});
    opt.erase("seed");
    opt["direction"] = "auto";
    cfg["optimizer"] = opt;
    cfg["feasibility_gate"] = 1e-9;
  } else if (command == "sweep") {
    cfg["eigen"] = eigen;
    cfg["kind"] = "mu";
    cfg["values"] = {10, 30, 100, 300, 1000};
    cfg["potential"] = {{"type", "cos_product"}, {"time_phase", "pi"}};
    cfg["c"] = {{"type", "constant"}, {"value", 1.0}};
    cfg["v"] = {{"type", "cos"}};
  } else if (command == "gaussian-check") {
    cfg["c"] = {{"type", "cos"}, {"amplitude", 0.5}, {"offset", 1.0}};
    cfg["mu"] = {2.0};
    cfg["box"] = {-3.0, 3.0};
    cfg["points"] = 41;
    cfg["residual_gate"] = 1e-6;
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  return cfg;
}

json effective_config(const std::string& command, const json& user) {
  if (user.is_null()) return default_config(command);
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  return merge(default_config(command), user, "");
}

json cmd_solve(const json& cfg, const fs::path& out) {
  const SpaceTimeGrid g = grid_from_config(cfg.at("grid"));
  const BlockParabolicOperator op = operator_from_config(cfg, g);
  const ScalarField m = field_from_config(cfg.at("potential"), g);
  const std::string problem = cfg.at("problem").get<std::string>();
  json meta = base_metadata("solve", cfg, &g);
  meta["mean_potential"] = m.values().mean();
  write_file(out / "potential.csv", field_to_csv(m));

  if (problem == "eigen") {
    const EigenPair ep = principal_eigenpair(op, m, eigen_options(cfg));
    write_file(out / "eigenfunction.csv", field_to_csv(ep.right));
    write_file(out / "adjoint.csv", field_to_csv(ep.left));
    const double gate = parse_real(cfg.at("eigen").at("residual_gate"));
    meta["lambda"] = ep.lambda;
    meta["lambda_left"] = ep.lambda_left;
    meta["residual"] = ep.residual;
    meta["iterations"] = ep.iterations;
    meta["restarts"] = ep.restarts;
    meta["min_ratio"] = ep.min_ratio;
    meta["gate_passed"] = ep.residual <= gate;
    write_metadata(out, meta);
    if (ep.residual > gate) throw GateFailure("eigen residual above residual_gate");
    return meta;
  }
  if (problem == "direct") {
    Eigen::MatrixXd src = m.values().array() - m.values().mean();
    const ScalarField rhs(g, src);
    const ScalarField phi = solve_direct(op, rhs);
    const Eigen::VectorXd r = op.apply(phi.flat()) - op.time_weight() * rhs.flat();
    const double residual = r.cwiseAbs().maxCoeff() / std::max(1e-300, op.time_weight() * rhs.flat().cwiseAbs().maxCoeff());
    const double gate = parse_real(cfg.at("direct").at("residual_gate"));
    write_file(out / "solution.csv", field_to_csv(phi));
    meta["residual"] = residual;
    meta["max_abs"] = phi.values().cwiseAbs().maxCoeff();
    meta["capital_lambda"] = capital_lambda(m, op);
    meta["gate_passed"] = residual <= gate;
    write_metadata(out, meta);
    if (residual > gate) throw GateFailure("direct residual above residual_gate");
    return meta;
  }
  throw ConfigError("problem must be 'eigen' or 'direct'");
}

json cmd_optimize(const json& cfg, const fs::path& out) {
  const SpaceTimeGrid g = grid_from_config(cfg.at("grid"));
  const BlockParabolicOperator op = operator_from_config(cfg, g);
  const EigenOptions eopts = eigen_options(cfg);
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

  const json& objective = cfg.at("objective");
  const std::string otype = type_of(objective, "objective");
  const std::string control = cfg.at("control").get<std::string>();
  if (control != "profile" && control != "field")
    throw ConfigError("control must be 'profile' or 'field'");
  if (otype != "talenti" && otype != "eigenvalue")
    throw ConfigError("objective.type must be 'talenti' or 'eigenvalue'");
  if (otype == "talenti" && control != "profile")
    throw ConfigError("the talenti objective needs a profile control");

  OptimizerConfig oc;
  {
    const json& o = cfg.at("optimizer");
    oc.max_iters = get_int(o.at("max_iters"), "optimizer.max_iters");
    oc.initial_step = parse_real(o.at("initial_step"));
    oc.step_up = parse_real(o.at("step_up"));
    oc.step_down = parse_real(o.at("step_down"));
    oc.min_step = parse_real(o.at("min_step"));
    oc.objective_tol = parse_real(o.at("objective_tol"));
    oc.stagnation_window = get_int(o.at("stagnation_window"), "optimizer.stagnation_window");
    const std::string dir = o.at("direction").get<std::string>();
    if (dir == "auto")
      oc.direction = otype == "talenti" ? Direction::maximize : Direction::minimize;
    else if (dir == "maximize" || dir == "minimize")
      oc.direction = dir == "maximize" ? Direction::maximize : Direction::minimize;
    else
      throw ConfigError("optimizer.direction must be auto, maximize or minimize");
    oc.seed = seed;
    try {
      oc.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }

  int k = 1;
  if (otype == "talenti") {
    k = get_int(need(objective, "k", "objective"), "objective.k");
    if (k < 1) throw ConfigError("objective.k must be >= 1");
  }
  std::optional<SpaceProfile> v;
  if (control == "profile") v = space_profile_from_config(cfg.at("v"), g);

  ObjectiveFn base;
  if (control == "profile")
    base = otype == "talenti" ? talenti_objective(*v, k, op) : eigenvalue_profile_objective(*v, op, eopts);
  else
    base = eigenvalue_field_objective(op, eopts);

  const json& constraint = cfg.at("constraint");
  const std::string ctype = type_of(constraint, "constraint");
  const std::string itype = type_of(cfg.at("initial"), "initial");
  const double feas_gate = parse_real(cfg.at("feasibility_gate"));
  json meta = base_metadata("optimize", cfg, &g);

  ObjectiveFn objective_fn;
  ProjectionFn projection;
  Eigen::VectorXd x0;
  std::function<void(const Eigen::VectorXd&, json&)> report;
  bool feasible = true;
  // the optimized potential, as a field, for the eigenfunction artifact
  std::optional<ScalarField> final_potential;
  auto emit_profile = [&](const TimeProfile& c) {
    write_file(out / "control.csv", profile_csv_with_header(c, "c"));
    write_file(out / "control_aligned.csv", profile_csv_with_header(align_peak(c), "c"));
    if (v) final_potential = outer_product(c, *v);
  };
  auto emit_field = [&](const ScalarField& f) {
    write_file(out / "control.csv", field_to_csv(f));
    write_file(out / "control_aligned.csv", field_to_csv(align_peak(f)));
    final_potential = f;
  };

  if (ctype == "box_mean") {
    const json c = with_defaults(constraint, {{"type", ctype}, {"lo", 0.0}, {"hi", 1.0}, {"mean", 0.5}},
                                 "constraint");
    const double lo = parse_real(c["lo"]), hi = parse_real(c["hi"]), mean = parse_real(c["mean"]);
    if (!(lo <= mean && mean <= hi && lo < hi))
      throw ConfigError("constraint: need lo <= mean <= hi and lo < hi");
    const Eigen::Index n = control == "profile" ? g.time_steps() : g.size();
    objective_fn = base;
    projection = box_mean_projection(lo, hi, mean);
    if (itype == "random") x0 = random_uniform(n, lo, hi, seed);
    else if (itype == "constant") x0 = Eigen::VectorXd::Constant(n, mean);
    else throw ConfigError("initial.type for box_mean must be random or constant");
    report = [&, lo, hi, mean](const Eigen::VectorXd& x, json& m) {
      const double defect = std::abs(x.mean() - mean);
      const double bound = std::max(lo - x.minCoeff(), x.maxCoeff() - hi);
      feasible = defect <= feas_gate * std::max(1.0, hi - lo) && bound <= feas_gate;
      m["feasibility"] = {{"mean_defect", defect}, {"bound_violation", std::max(0.0, bound)},
                          {"ok", feasible}};
      if (control == "profile") {
        const TimeProfile c(g, x);
        emit_profile(c);
        m["bang_bang"] = bang_bang_report(c, lo, hi);
        m["symmetry"] = {{"asymmetry", asymmetry(c)}};
      } else {
        const ScalarField f = ScalarField::from_flat(g, x);
        emit_field(f);
        m["symmetry"] = {{"asymmetry", asymmetry(f)}, {"range", hi - lo},
                         {"relative_asymmetry", asymmetry(f) / (hi - lo)}};
      }
    };
  } else if (ctype == "rearrangement") {
    const json c = with_defaults(
        constraint, {{"type", ctype}, {"reference", nullptr}, {"K", 100}, {"min", nullptr},
                     {"max", nullptr}, {"masses", "reference"}}, "constraint");
    const int kslices = get_int(c["K"], "constraint.K");
    if (kslices < 1) throw ConfigError("constraint.K must be >= 1");
    const std::string masses = c["masses"].get<std::string>();
    if (control == "profile") {
      if (c["reference"].is_null()) throw ConfigError("constraint.reference is required");
      const TimeProfile ref = time_profile_from_config(c["reference"], g);
      const double lo = c["min"].is_null() ? ref.values().minCoeff() : parse_real(c["min"]);
      const double hi = c["max"].is_null() ? ref.values().maxCoeff() : parse_real(c["max"]);
      if (masses != "reference") throw ConfigError("profile controls take masses from the reference");
      const auto layout = std::make_shared<RearrangementBody1D>(body_from_profile(ref, kslices, lo, hi));
      objective_fn = through_body(base, *layout);
      projection = body_projection(*layout, layout->q);
      const Eigen::Index n = layout->F.size();
      if (itype == "random") x0 = random_uniform(n, 0, layout->capacity(), seed);
      else if (itype == "reference") x0 = flatten(*layout);
      else if (itype == "constant") x0 = Eigen::VectorXd::Constant(n, 0.5 * layout->capacity());
      else throw ConfigError("initial.type must be random, reference or constant");
      report = [&, layout, ref](const Eigen::VectorXd& x, json& m) {
        const auto body = unflatten(*layout, x);
        const double tol = feas_gate * std::max(1.0, layout->q.maxCoeff());
        const BodyCheck bc = check_body(body);
        feasible = bc.ok(tol);
        m["body_check"] = body_check_json(bc, tol);
        const TimeProfile cprof = reconstruct_profile(body);
        emit_profile(cprof);
        m["symmetry"] = {{"asymmetry", asymmetry(cprof)},
                         {"shift_aligned_distance", shift_aligned_distance(cprof, symmetric_decreasing_rearrangement(ref))},
                         {"domination_excess", domination_excess(cprof, ref)},
                         {"relaxed_bound_excess", relaxed_domination_excess(body)},
                         {"slice_height", layout->dc()}};
      };
    } else {
      std::shared_ptr<RearrangementBody2D> layout;
      if (masses == "cone") {
        layout = std::make_shared<RearrangementBody2D>(
            empty_body_2d(g, kslices, 0.0, 1.0, cone_slice_masses(kslices)));
      } else if (masses == "reference") {
        if (c["reference"].is_null()) throw ConfigError("constraint.reference is required");
        const ScalarField ref = field_from_config(c["reference"], g);
        const double lo = c["min"].is_null() ? ref.values().minCoeff() : parse_real(c["min"]);
        const double hi = c["max"].is_null() ? ref.values().maxCoeff() : parse_real(c["max"]);
        layout = std::make_shared<RearrangementBody2D>(body_from_field(ref, kslices, lo, hi));
      } else {
        throw ConfigError("constraint.masses must be 'reference' or 'cone'");
      }
      objective_fn = through_body(base, *layout);
      projection = body_projection(*layout, layout->q);
      const Eigen::Index n = flatten(*layout).size();
      if (itype == "random") x0 = random_uniform(n, 0, layout->capacity(), seed);
      else if (itype == "reference" && masses == "reference") x0 = flatten(*layout);
      else if (itype == "constant") x0 = Eigen::VectorXd::Constant(n, 0.5 * layout->capacity());
      else throw ConfigError("initial.type must be random, reference (with reference masses) or constant");
      report = [&, layout](const Eigen::VectorXd& x, json& m) {
        const auto body = unflatten(*layout, x);
        const double tol = feas_gate * std::max(1.0, layout->q.maxCoeff());
        const BodyCheck bc = check_body(body);
        feasible = bc.ok(tol);
        m["body_check"] = body_check_json(bc, tol);
        const ScalarField f = reconstruct_field(body);
        emit_field(f);
        const double range = layout->m_max - layout->m_min;
        m["symmetry"] = {{"asymmetry", asymmetry(f)},
                         {"range", range},
                         {"relative_asymmetry", asymmetry(f) / range}};
      };
    }
  } else {
    throw ConfigError("constraint.type must be 'box_mean' or 'rearrangement'");
  }

  OptimizerResult res;
  try {
    res = run(objective_fn, x0, projection, oc);
  } catch (const ProjectionError& e) {
    throw ConfigError(std::string("infeasible constraint: ") + e.what());
  }

  json m = meta;
  report(res.control, m);
  m["value"] = res.value;
  m["initial_value"] = res.trace.objective.empty() ? res.value : res.trace.objective.front();
  m["stop_reason"] = res.trace.stop_reason;
  m["evaluations"] = res.trace.evaluations;
  m["iterations"] = static_cast<int>(res.trace.objective.size());
  m["direction"] = oc.direction == Direction::maximize ? "maximize" : "minimize";
  write_file(out / "trace.csv", res.trace.to_csv());
  if (otype == "eigenvalue") {
    const EigenPair ep = principal_eigenpair(op, *final_potential, eopts);
    write_file(out / "eigenfunction.csv", field_to_csv(ep.right));
    m["eigen_residual"] = ep.residual;
  }
  m["gate_passed"] = feasible;
  write_metadata(out, m);
  if (!feasible) throw GateFailure("final control violates the constraint");
  return m;
}

json cmd_sweep(const json& cfg, const fs::path& out) {
  const SpaceTimeGrid g = grid_from_config(cfg.at("grid"));
  SweepOptions so;
  so.threads = get_int(cfg.at("threads"), "threads");
  so.eigen = eigen_options(cfg);
  std::vector<double> values;
  for (const auto& e : cfg.at("values")) values.push_back(parse_real(e));
  const std::string kind = cfg.at("kind").get<std::string>();
  SweepTable table;
  try {
    if (kind == "mu") {
      table = mu_sweep(field_from_config(cfg.at("potential"), g), values, so);
    } else if (kind == "epsilon") {
      table = epsilon_sweep(time_profile_from_config(cfg.at("c"), g),
                            space_profile_from_config(cfg.at("v"), g), values, so);
    } else {
      throw ConfigError("kind must be 'mu' or 'epsilon'");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  write_file(out / "table.csv", table.to_csv());
  json meta = base_metadata("sweep", cfg, &g);
  meta["summary"] = table.to_json();
  write_metadata(out, meta);
  return meta;
}

json cmd_gaussian_check(const json& cfg, const fs::path& out) {
  const SpaceTimeGrid g = grid_from_config(cfg.at("grid"));
  const TimeProfile c = time_profile_from_config(cfg.at("c"), g);
  std::vector<double> mus;
  for (const auto& e : cfg.at("mu")) mus.push_back(parse_real(e));
  const json& box = cfg.at("box");
  if (!box.is_array() || box.size() != 2) throw ConfigError("box must be [lo, hi]");
  const int points = get_int(cfg.at("points"), "points");
  const double gate = parse_real(cfg.at("residual_gate"));

  auto checked = [&](const TimeProfile& p) {
    try {
      return gaussian_eigenvalue(p, mus);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  };
  const GaussianEigen ge = checked(c);
  const GaussianEigen ge_sym = checked(symmetric_decreasing_rearrangement(c));

  std::vector<std::string> header{"t", "c"};
  for (size_t i = 0; i < mus.size(); ++i) header.push_back("xi_" + std::to_string(i + 1));
  header.push_back("beta");
  std::vector<std::vector<double>> rows;
  for (int j = 0; j < g.time_steps(); ++j) {
    std::vector<double> row{g.time(j), c.values()[j]};
    for (const auto& x : ge.xi_profiles) row.push_back(x.xi[j]);
    row.push_back(ge.beta[j]);
    rows.push_back(std::move(row));
  }
  write_file(out / "riccati.csv", table_to_csv(header, rows));
  if (mus.size() == 1)
    write_file(out / "eigenfunction.csv",
               gaussian_eigenfunction_csv(ge, parse_real(box[0]), parse_real(box[1]), points));

  json meta = base_metadata("gaussian-check", cfg, &g);
  double worst = 0.0;
  json per_mu = json::array();
  for (const auto& x : ge.xi_profiles) {
    worst = std::max(worst, x.residual);
    per_mu.push_back({{"mu", x.mu}, {"mean_xi", x.mean_xi}, {"residual", x.residual},
                      {"min_xi", x.xi.values().minCoeff()}});
  }
  meta["lambda_bar"] = ge.lambda_bar;
  meta["lambda_bar_rearranged"] = ge_sym.lambda_bar;
  meta["rearrangement_inequality"] = ge.lambda_bar >= ge_sym.lambda_bar - 1e-10;
  meta["riccati"] = per_mu;
  meta["residual"] = worst;
  meta["gate_passed"] = worst <= gate;
  write_metadata(out, meta);
  if (worst > gate) throw GateFailure("Riccati residual above residual_gate");
  return meta;
}

int run_command(const std::string& command, const fs::path& config_path, const fs::path& out,
                const json& overrides, std::ostream& log) {
  auto fail = [&](int code, const std::string& kind, const std::string& what) {
    log << "pareig " << command << ": " << kind << ": " << what << '\n';
    try {
      write_file(out / "error.json",
                 dump_json({{"command", command}, {"kind", kind}, {"message", what}, {"exit_code", code}}));
    } catch (const std::exception&) {
    }
    return code;
  };
  try {
    json user = json::object();
    if (!config_path.empty()) {
      try {
        user = json::parse(read_file(config_path));
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
    }
    json cfg = effective_config(command, user);
    for (auto it = overrides.begin(); it != overrides.end(); ++it) cfg[it.key()] = it.value();
    if (get_int(cfg.at("threads"), "threads") < 1) throw ConfigError("threads must be >= 1");
    fs::create_directories(out);
    fs::remove(out / "error.json");

    json meta;
    if (command == "solve") meta = cmd_solve(cfg, out);
    else if (command == "optimize") meta = cmd_optimize(cfg, out);
    else if (command == "sweep") meta = cmd_sweep(cfg, out);
    else meta = cmd_gaussian_check(cfg, out);
    log << "pareig " << command << ": wrote " << out.string() << '\n';
    return ok;
  } catch (const ConfigError& e) {
    return fail(bad_config, "config", e.what());
  } catch (const json::exception& e) {
    return fail(bad_config, "config", e.what());
  } catch (const GateFailure& e) {
    return fail(gate_failed, "gate", e.what());
  } catch (const std::exception& e) {
    return fail(runtime_failure, "runtime", e.what());
  }
}

}  // namespace pareig::cli
