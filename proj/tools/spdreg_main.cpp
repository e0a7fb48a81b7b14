#include <algorithm>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace spdreg;
using namespace spdreg::cli;

namespace {

void add_params(CLI::App* sub, FunctionalParams& p) {
  sub->add_option("--p", p.p, "Exponent p in [1, 2]")->capture_default_str();
  sub->add_option("--s", p.s, "Smoothness s in (0, 1)")->capture_default_str();
  sub->add_option("--alpha", p.alpha, "Regularization weight of the double integral")->capture_default_str();
  sub->add_option("--beta", p.beta, "Weight of the Sobolev comparison term")->capture_default_str();
  sub->add_option("--l", p.l, "1: mollified kernel, 0: all pairs")->capture_default_str();
  sub->add_option("--nrho", p.n_rho, "Mollifier radius in pixels")->capture_default_str();
  sub->add_option("--z", p.z, "Log-norm bound")->capture_default_str();
  sub->add_option("--eps", p.epsilon, "Eigenvalue floor")->capture_default_str();
}

void add_solver(CLI::App* sub, SolverConfig& c) {
  sub->add_option("--max-iters", c.max_iters, "Iteration cap")->capture_default_str();
  sub->add_option("--rel-tol", c.rel_tol, "Relative decrease stopping tolerance")->capture_default_str();
  sub->add_option("--init-step", c.init_step, "First trial step")->capture_default_str();
  const std::map<std::string, Direction> dirs{{"gradient", Direction::Gradient}, {"newton", Direction::Newton}};
  sub->add_option("--direction", c.direction, "Search direction [gradient]")->transform(CLI::CheckedTransformer(dirs).description(""))
      ->type_name("{gradient,newton}");
  const std::map<std::string, StepRule> rules{{"bb", StepRule::BarzilaiBorwein}, {"fixed", StepRule::Fixed}};
  sub->add_option("--step-rule", c.step_rule, "First trial step rule [bb]")->transform(CLI::CheckedTransformer(rules).description(""))
      ->type_name("{bb,fixed}");
}

bool is_given(const std::vector<std::string>& args, std::size_t from, const std::string& flag) {
  for (std::size_t i = from; i < args.size(); ++i)
    if (args[i] == flag || args[i].rfind(flag + "=", 0) == 0) return true;
  return false;
}

// Splices the entries of --config into args right after the subcommand,
// skipping keys that are also given as flags.
std::vector<std::string> merge_config(CLI::App& app, std::vector<std::string> args) {
  std::size_t pos = 0;
  CLI::App* sub = nullptr;
  for (; pos < args.size(); ++pos) {
    for (CLI::App* s : app.get_subcommands([](CLI::App*) { return true; }))
      if (s->get_name() == args[pos]) sub = s;
    if (sub) break;
  }
  if (!sub) return args;

  std::string path;
  for (std::size_t i = pos + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;

  std::vector<std::string> extra;
  for (const ConfigEntry& e : read_config_file(path)) {
    const std::string flag = "--" + e.key;
    const CLI::Option* opt = e.key == "config" ? nullptr : sub->get_option_no_throw(flag);
    if (!opt || opt->get_name().empty())
      throw InvalidInput("config line " + std::to_string(e.line) + ": unknown key '" + e.key + "' for " +
                         sub->get_name());
    if (is_given(args, pos + 1, flag)) continue;
    if (opt->get_expected_max() == 0) {
      if (e.value == "true" || e.value == "1") extra.push_back(flag);
      else if (e.value != "false" && e.value != "0")
        throw InvalidInput("config line " + std::to_string(e.line) + ": '" + e.key + "' expects true or false");
      continue;
    }
    extra.push_back(flag);
    extra.push_back(e.value);
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(pos + 1), extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational denoising and inpainting of SPD tensor fields", "spdreg"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPDREG_VERSION);

  int threads = 0;
  std::string config_path;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "Worker thread cap (0: hardware concurrency)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--config", config_path, "File of key = value lines; flags override it");
  };

  GenerateOptions gen;
  CLI::App* generate = app.add_subcommand("generate", "Write a phantom, its noisy refit, and provenance");
  generate->add_option("--phantom", gen.phantom, "staircase | main-direction")
      ->check(CLI::IsMember({"staircase", "main-direction"}))
      ->capture_default_str();
  generate->add_option("--n", gen.n, "Phantom side length")->capture_default_str();
  generate->add_option("--sigma2", gen.sigma2, "Rician noise variance")->capture_default_str();
  generate->add_option("--seed", gen.seed, "Noise seed")->capture_default_str();
  generate->add_option("--b", gen.b_value, "b-value")->capture_default_str();
  generate->add_option("--a0", gen.a0, "Unweighted signal A0")->capture_default_str();
  generate->add_option("--z", gen.z, "Log-norm bound")->capture_default_str();
  generate->add_option("--eps", gen.epsilon, "Eigenvalue floor")->capture_default_str();
  generate->add_option("--out-dir", gen.out_dir, "Output directory")->capture_default_str();
  generate->add_option("--prefix", gen.prefix, "File name prefix (default: phantom name)");
  generate->add_flag("--dwi", gen.write_dwi, "Also write the noisy DWI set");
  generate->add_option("--mask-side", gen.mask_side, "Also write a centered square mask of this side");
  common(generate);

  SolveOptions denoise_opts, inpaint_opts;
  auto add_solve = [&](CLI::App* sub, SolveOptions& o, bool inpaint) {
    sub->add_option("--input", o.input, "Input DTF file")->required();
    if (inpaint) sub->add_option("--mask", o.mask, "MSK file, 1 where data is present")->required();
    sub->add_option("--output", o.output, "Output DTF file")->required();
    sub->add_option("--report", o.report, "Report JSON (default: <output>.json)");
    sub->add_option("--objective", o.objective, "loglog | euclid | sobolev")
        ->check(CLI::IsMember({"loglog", "euclid", "sobolev"}))
        ->capture_default_str();
    add_params(sub, o.params);
    add_solver(sub, o.solver);
    sub->add_option("--sweep", o.sweep, "Run once per value, e.g. alpha=0.5,1,2");
    sub->add_flag("--report-timing", o.report_timing, "Record wall time in the report");
    common(sub);
  };
  CLI::App* denoise = app.add_subcommand("denoise", "Minimize the selected objective with full data");
  add_solve(denoise, denoise_opts, false);
  CLI::App* inpaint = app.add_subcommand("inpaint", "Minimize the selected objective with a data mask");
  add_solve(inpaint, inpaint_opts, true);

  EvaluateOptions eval;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Print SNR and log distance of a candidate field");
  evaluate->add_option("--reference", eval.reference, "Ground-truth DTF")->required();
  evaluate->add_option("--candidate", eval.candidate, "DTF to score")->required();
  evaluate->add_option("--profile", eval.profile, "Write the candidate's column eigenvalue profile CSV");
  common(evaluate);

  RenderOptions rend;
  CLI::App* render = app.add_subcommand("render", "Draw the field as an SVG ellipse glyph image");
  render->add_option("--input", rend.input, "Input DTF")->required();
  render->add_option("--output", rend.output, "Output SVG")->required();
  common(render);

  StudyOptions st;
  CLI::App* study = app.add_subcommand("study", "Reconstruction error against noise level, as CSV");
  study->add_option("--phantom", st.phantom, "staircase | main-direction")
      ->check(CLI::IsMember({"staircase", "main-direction"}))
      ->capture_default_str();
  study->add_option("--n", st.n, "Phantom side length")->capture_default_str();
  study->add_option("--deltas", st.deltas, "Rician sigma per level")->delimiter(',');
  study->add_option("--seeds", st.seeds, "Noise seeds")->delimiter(',');
  study->add_option("--output", st.output, "CSV path (default: stdout)");
  add_params(study, st.params);
  add_solver(study, st.solver);
  common(study);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = merge_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (threads > 0) set_max_threads(threads);
    if (generate->parsed()) return run_generate(gen, std::cout);
    if (denoise->parsed()) return run_solve(denoise_opts, false, std::cout);
    if (inpaint->parsed()) return run_solve(inpaint_opts, true, std::cout);
    if (evaluate->parsed()) return run_evaluate(eval, std::cout);
    if (render->parsed()) return run_render(rend);
    if (study->parsed()) return run_study(st, std::cout);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
