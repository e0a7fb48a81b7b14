#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>

#include <nlohmann/json.hpp>

namespace spdreg::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string num(double v, const char* fmt = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) throw InvalidInput("bad number '" + s + "' in " + what);
  return v;
}

struct Sweep {
  std::string name;
  std::vector<double> values;
};

Sweep parse_sweep(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw InvalidInput("--sweep expects name=v1,v2,...");
  Sweep s{spec.substr(0, eq), {}};
  if (s.name != "alpha" && s.name != "beta" && s.name != "p" && s.name != "s")
    throw InvalidInput("--sweep supports alpha, beta, p, s; got '" + s.name + "'");
  std::string rest = spec.substr(eq + 1);
  std::size_t pos = 0;
  while (pos <= rest.size()) {
    const auto comma = rest.find(',', pos);
    const std::string item = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    s.values.push_back(parse_double(item, "--sweep"));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return s;
}

void set_param(FunctionalParams& p, const std::string& name, double v) {
  if (name == "alpha") p.alpha = v;
  else if (name == "beta") p.beta = v;
  else if (name == "p") p.p = v;
  else p.s = v;
}

// out.dtf -> out.alpha0.5.dtf
std::string tagged(const std::string& path, const std::string& tag) {
  const fs::path p(path);
  fs::path name = p.stem();
  name += "." + tag;
  name += p.extension();
  return (p.parent_path() / name).string();
}

const char* direction_name(Direction d) { return d == Direction::Newton ? "newton" : "gradient"; }
const char* step_rule_name(StepRule r) { return r == StepRule::Fixed ? "fixed" : "bb"; }

json params_json(const FunctionalParams& p) {
  return json{{"p", p.p},         {"s", p.s}, {"alpha", p.alpha}, {"beta", p.beta},
              {"l", p.l},         {"nrho", p.n_rho}, {"z", p.z},   {"epsilon", p.epsilon}};
}

json solver_json(const SolverConfig& c) {
  return json{{"max_iters", c.max_iters},
              {"rel_tol", c.rel_tol},
              {"direction", direction_name(c.direction)},
              {"step_rule", step_rule_name(c.step_rule)},
              {"init_step", c.init_step}};
}

}  // namespace

Objective parse_objective(const std::string& name) {
  if (name == "loglog") return Objective::FLogEuclidean;
  if (name == "euclid") return Objective::FEuclidean;
  if (name == "sobolev") return Objective::FC;
  throw InvalidInput("unknown objective '" + name + "'");
}

TensorField make_phantom(const std::string& name, int n) {
  if (name == "staircase") return make_staircase_phantom(n);
  if (name == "main-direction") return make_main_direction_phantom(n);
  throw InvalidInput("unknown phantom '" + name + "'");
}

int run_generate(const GenerateOptions& o, std::ostream& out) {
  if (!(o.sigma2 >= 0.0) || !std::isfinite(o.sigma2)) throw InvalidInput("--sigma2 must be >= 0");
  if (o.mask_side < 0 || o.mask_side > o.n) throw InvalidInput("--mask-side must be in [0, n]");
  const TensorField phantom = make_phantom(o.phantom, o.n);
  DwiSet dwis = simulate_dwis(phantom, o.b_value, o.a0, default_directions());
  add_rician_noise(dwis, {o.sigma2, o.seed});
  const TensorField noisy = fit_field(dwis, o.epsilon, o.z);

  const std::string prefix = o.prefix.empty() ? o.phantom : o.prefix;
  fs::create_directories(o.out_dir);
  auto path = [&](const std::string& suffix) { return (fs::path(o.out_dir) / (prefix + suffix)).string(); };

  json outputs;
  outputs["phantom"] = prefix + ".dtf";
  write_dtf_file(path(".dtf"), phantom);
  outputs["noisy"] = prefix + "_noisy.dtf";
  write_dtf_file(path("_noisy.dtf"), noisy);
  if (o.write_dwi) {
    outputs["dwi"] = prefix + "_noisy.dwi";
    write_dwi_file(path("_noisy.dwi"), dwis);
  }
  if (o.mask_side > 0) {
    outputs["mask"] = prefix + ".msk";
    write_mask_file(path(".msk"), centered_square_mask(o.n, o.n, o.mask_side));
  }

  json prov;
  prov["tool"] = "spdreg";
  prov["version"] = SPDREG_VERSION;
  prov["command"] = "generate";
  prov["phantom"] = o.phantom;
  prov["n"] = o.n;
  prov["sigma2"] = o.sigma2;
  prov["seed"] = o.seed;
  prov["b_value"] = o.b_value;
  prov["a0"] = o.a0;
  prov["directions"] = "icosahedron-12";
  prov["z"] = o.z;
  prov["epsilon"] = o.epsilon;
  prov["mask_side"] = o.mask_side;
  prov["outputs"] = outputs;
  write_text_file(path(".json"), prov.dump(2) + "\n");

  out << "wrote " << path(".dtf") << ", " << path("_noisy.dtf") << ", " << path(".json") << "\n";
  return kExitOk;
}

int run_solve(const SolveOptions& o, bool inpaint, std::ostream& out) {
  const Objective kind = parse_objective(o.objective);
  o.params.validate();
  o.solver.validate();
  const TensorField data = read_dtf_file(o.input);
  Mask mask(data.width(), data.height());
  if (inpaint) {
    mask = read_mask_file(o.mask);
    require_same_shape(data, mask);
  }

  std::vector<std::pair<std::string, FunctionalParams>> runs;
  if (o.sweep.empty()) {
    runs.emplace_back("", o.params);
  } else {
    const Sweep sweep = parse_sweep(o.sweep);
    for (double v : sweep.values) {
      FunctionalParams p = o.params;
      set_param(p, sweep.name, v);
      p.validate();
      runs.emplace_back(sweep.name + num(v, "%g"), p);
    }
  }

  int code = kExitOk;
  for (const auto& [tag, params] : runs) {
    const std::string field_path = tag.empty() ? o.output : tagged(o.output, tag);
    const std::string base_report = o.report.empty() ? o.output + ".json" : o.report;
    const std::string report_path = tag.empty() ? base_report : tagged(base_report, tag);

    const SolveResult r = solve(data, mask, params, kind, o.solver);
    write_dtf_file(field_path, r.field);

    json j = json::parse(r.report.to_json(o.report_timing));
    j["diagnostic"] = r.report.diagnostic;
    j["command"] = inpaint ? "inpaint" : "denoise";
    j["objective"] = o.objective;
    j["input"] = o.input;
    if (inpaint) j["mask"] = o.mask;
    j["params"] = params_json(params);
    j["solver"] = solver_json(o.solver);
    write_text_file(report_path, j.dump(2) + "\n");

    out << "wrote " << field_path << " (" << r.report.iterations << " iterations, objective "
        << num(r.report.final_objective, "%.10g") << ")\n";
    if (r.report.line_search_failed()) {
      out << "error: " << r.report.diagnostic << "\n";
      code = kExitRuntime;
    }
  }
  return code;
}

int run_evaluate(const EvaluateOptions& o, std::ostream& out) {
  const TensorField ref = read_dtf_file(o.reference);
  const TensorField cand = read_dtf_file(o.candidate);
  require_same_shape(ref, cand);
  const double v = snr(ref, cand);
  out << "snr " << (std::isinf(v) ? std::string("inf") : num(v, "%.6g")) << "\n";
  out << "log_distance " << num(summed_log_distance(ref, cand), "%.6g") << "\n";
  if (!o.profile.empty()) {
    std::string csv = "column,largest_eigenvalue\n";
    const auto profile = column_eigen_profile(cand);
    for (std::size_t x = 0; x < profile.size(); ++x) csv += std::to_string(x) + "," + num(profile[x]) + "\n";
    write_text_file(o.profile, csv);
  }
  return kExitOk;
}

int run_render(const RenderOptions& o) {
  write_svg(read_dtf_file(o.input), o.output);
  return kExitOk;
}

int run_study(const StudyOptions& o, std::ostream& out) {
  o.params.validate();
  o.solver.validate();
  ConvergenceStudyConfig cfg;
  cfg.params = o.params;
  cfg.solver = o.solver;
  cfg.seeds = o.seeds;
  const double p = o.params.p;
  const auto rows =
      convergence_study(make_phantom(o.phantom, o.n), o.deltas, [p](double d) { return default_alpha_rule(d, p); }, cfg);
  const std::string csv = convergence_csv(rows);
  if (o.output.empty())
    out << csv;
  else
    write_text_file(o.output, csv);
  return kExitOk;
}

}  // namespace spdreg::cli
