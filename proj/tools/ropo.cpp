// Command-line front end: solve, approx, simulate, info, export.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ropo/exact_solver.hpp"
#include "ropo/model_io.hpp"
#include "ropo/office_env.hpp"
#include "ropo/region_approx.hpp"
#include "ropo/simulation.hpp"

namespace {

using namespace ropo;

constexpr int kExitSolverFailure = 1;
constexpr int kExitInputError = 2;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelSource {
  std::string model_path;
  std::string builtin;
  std::string map_path;
  std::string flavor = "standard";
  std::optional<double> gamma;
};

struct LoadedModel {
  Pomdp model;
  std::optional<StateIndex> goal;  // known for office layouts
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

LoadedModel load_model(const ModelSource& src) {
  const int given = !src.model_path.empty() + !src.builtin.empty() + !src.map_path.empty();
  if (given != 1) throw InputError("give exactly one of --model, --builtin or --map");
  if (!src.model_path.empty()) {
    LoadedModel loaded{parse_model(read_file(src.model_path)), std::nullopt};
    if (src.gamma) loaded.model.set_discount(*src.gamma);
    validate(loaded.model);
    return loaded;
  }
  const ModelFlavor flavor = src.flavor == "noisy" ? ModelFlavor::kNoisy : ModelFlavor::kStandard;
  const MazeLayout layout =
      !src.builtin.empty() ? builtin_layout(src.builtin) : parse_layout(read_file(src.map_path));
  return {build_office_pomdp(layout, flavor, src.gamma.value_or(0.99)), office_goal_state(layout)};
}

void add_source_options(CLI::App* cmd, ModelSource& src) {
  cmd->add_option("--model", src.model_path, "Model file");
  cmd->add_option("--builtin", src.builtin, "Builtin office layout (mini-A, mini-B, office-70)");
  cmd->add_option("--map", src.map_path, "ASCII office map");
  cmd->add_option("--flavor", src.flavor, "Office model flavor")
      ->check(CLI::IsMember({"standard", "noisy"}));
  cmd->add_option("--gamma", src.gamma, "Discount factor (office default 0.99)")
      ->check(CLI::Range(0.0, 1.0));
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

std::string seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", s);
  return buf;
}

std::size_t default_jobs() {
  if (const char* env = std::getenv("ROPO_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

// --- info ---

struct InfoConfig {
  ModelSource src;
  std::optional<std::size_t> radius;
};

int cmd_info(const InfoConfig& cfg) {
  const LoadedModel loaded = load_model(cfg.src);
  const Pomdp& m = loaded.model;
  auto plural = [](std::size_t n, const char* word) {
    return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
  };
  std::cout << plural(m.num_states(), "state") << ", " << plural(m.num_actions(), "action") << ", "
            << plural(m.num_observations(), "observation") << '\n';
  std::cout << "discount " << format_real(m.discount()) << '\n';
  if (loaded.goal) std::cout << "goal state " << *loaded.goal << '\n';
  if (!cfg.radius) return 0;
  const Ropomdp rop(m, radius_k_regions(m, *cfg.radius));
  const RegionSystem& regions = rop.regions();
  std::size_t largest = 0;
  for (const Region& r : regions.regions()) largest = std::max(largest, r.size());
  std::cout << "radius " << *cfg.radius << ": " << plural(regions.size(), "region")
            << ", largest has " << plural(largest, "state") << '\n';
  std::cout << "region,size";
  for (ActionIndex a = 0; a < m.num_actions(); ++a) std::cout << ",feasible_a" << a;
  std::cout << '\n';
  for (std::size_t i = 0; i < regions.size(); ++i) {
    std::cout << i << ',' << regions[i].size();
    for (ActionIndex a = 0; a < m.num_actions(); ++a) {
      std::cout << ',' << rop.feasible_observations(a, i).size();
    }
    std::cout << '\n';
  }
  return 0;
}

// --- solve ---

struct SolveConfig {
  ModelSource src;
  double eps = 0.001;
  std::size_t max_iterations = 10000;
  std::string output;
  std::string report;
};

int cmd_solve(const SolveConfig& cfg) {
  const LoadedModel loaded = load_model(cfg.src);
  const auto started = std::chrono::steady_clock::now();
  const SolveReport report = solve_pomdp(loaded.model, {cfg.eps, cfg.max_iterations});
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  SolutionDocument doc;
  doc.discount = loaded.model.discount();
  doc.num_states = loaded.model.num_states();
  doc.horizon = report.iterations;
  doc.residual = report.residual;
  doc.regions.push_back(Region::all(doc.num_states));
  doc.sets.push_back(report.values);
  if (!cfg.output.empty()) {
    auto out = open_output(cfg.output);
    write_solution(out, doc);
  }

  std::ostringstream timing;
  timing << "iteration,vectors,residual,seconds\n";
  for (std::size_t t = 0; t < report.history.size(); ++t) {
    const IterationRecord& r = report.history[t];
    timing << t + 1 << ',' << r.set_size << ',' << format_real(r.residual) << ','
           << seconds(r.seconds) << '\n';
  }
  if (!cfg.report.empty()) {
    auto out = open_output(cfg.report);
    out << timing.str();
  }
  std::cout << "iterations " << report.iterations << ", vectors " << report.values.size()
            << ", residual " << format_real(report.residual) << ", loss bound "
            << format_real(report.loss_bound) << ", time " << seconds(elapsed) << " s\n";
  return 0;
}

// --- approx ---

struct ApproxConfig {
  ModelSource src;
  std::size_t radius = 0;
  bool sweep = false;
  double eps = 0.001;
  std::size_t max_iterations = 10000;
  std::size_t jobs = default_jobs();
  double prune_tolerance = 0.0;
  std::string output;
  std::string summary;
};

int cmd_approx(const ApproxConfig& cfg) {
  const LoadedModel loaded = load_model(cfg.src);
  const std::size_t first = cfg.sweep ? 0 : cfg.radius;
  std::ostringstream summary;
  summary << "radius,regions,iterations,vectors,largest_set,seconds\n";
  int status = 0;
  for (std::size_t k = first; k <= cfg.radius; ++k) {
    const auto started = std::chrono::steady_clock::now();
    const Ropomdp rop(loaded.model, radius_k_regions(loaded.model, k));
    RegionalSolveReport report;
    try {
      report = solve_ropomdp(rop, {cfg.eps, cfg.max_iterations, cfg.jobs, cfg.prune_tolerance});
    } catch (const IterationCapExceeded& e) {
      std::cerr << "radius " << k << ": " << e.what() << '\n';
      status = kExitSolverFailure;
      break;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::size_t total = 0;
    std::size_t largest = 0;
    for (const VectorSet& s : report.values.sets) {
      total += s.size();
      largest = std::max(largest, s.size());
    }
    summary << k << ',' << rop.regions().size() << ',' << report.iterations << ',' << total << ','
            << largest << ',' << seconds(elapsed) << '\n';
    if (!cfg.output.empty()) {
      SolutionDocument doc;
      doc.discount = loaded.model.discount();
      doc.num_states = loaded.model.num_states();
      doc.horizon = report.iterations;
      doc.reward_shift = report.reward_shift;
      doc.regions.assign(rop.regions().regions().begin(), rop.regions().regions().end());
      doc.sets = report.values.sets;
      const std::string path = cfg.sweep ? cfg.output + ".k" + std::to_string(k) : cfg.output;
      auto out = open_output(path);
      write_solution(out, doc);
    }
    if (rop.regions().size() == 1 && cfg.sweep) break;  // every larger radius gives the same system
  }
  if (!cfg.summary.empty()) {
    auto out = open_output(cfg.summary);
    out << summary.str();
  }
  std::cout << summary.str();
  return status;
}

// --- simulate ---

struct SimulateConfig {
  ModelSource src;
  std::string solution;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::size_t max_steps = 100;
  std::size_t jobs = default_jobs();
  std::vector<StateIndex> goals;
  std::optional<ActionIndex> declare;
  std::string output;
};

int cmd_simulate(const SimulateConfig& cfg) {
  if (cfg.trials == 0) throw InputError("--trials must be positive");
  if (cfg.max_steps == 0) throw InputError("--max-steps must be positive");
  const LoadedModel loaded = load_model(cfg.src);
  const SolutionDocument doc = read_solution(read_file(cfg.solution));
  if (doc.num_states != loaded.model.num_states()) {
    throw InputError("solution has " + std::to_string(doc.num_states) + " states, model has " +
                     std::to_string(loaded.model.num_states()));
  }
  TrialConfig trial;
  trial.max_steps = cfg.max_steps;
  trial.seed = cfg.seed;
  trial.initial = loaded.model.start;
  if (!cfg.goals.empty()) {
    trial.goal_states = cfg.goals;
  } else if (loaded.goal) {
    trial.goal_states = {*loaded.goal};
  } else {
    throw InputError("--goal is required for model files");
  }
  if (cfg.declare) {
    trial.declare_action = *cfg.declare;
  } else if (loaded.goal) {
    trial.declare_action = kDeclareGoal;
  } else {
    throw InputError("--declare is required for model files");
  }
  for (StateIndex g : trial.goal_states) {
    if (g >= loaded.model.num_states()) throw InputError("goal state out of range");
  }
  if (trial.declare_action >= loaded.model.num_actions()) throw InputError("declare action out of range");

  Ropomdp rop(loaded.model, RegionSystem(doc.regions, doc.num_states));
  const Campaign campaign =
      run_campaign(rop, RegionalValueSets{doc.sets}, trial, cfg.trials, cfg.jobs);
  if (!cfg.output.empty()) {
    auto out = open_output(cfg.output);
    write_campaign_csv(out, campaign);
  }
  const CampaignStats& s = campaign.stats;
  std::cout << "trials " << s.trials << '\n';
  std::cout << "M          " << format_real(s.mean_m) << " (se " << format_real(s.se_m) << ")\n";
  std::cout << "M'         " << format_real(s.mean_m_prime) << " (se " << format_real(s.se_m_prime) << ")\n";
  std::cout << "Difference " << format_real(s.difference) << " (se " << format_real(s.se_difference) << ")\n";
  return 0;
}

// --- export ---

struct ExportConfig {
  ModelSource src;
  std::string output;
};

int cmd_export(const ExportConfig& cfg) {
  const LoadedModel loaded = load_model(cfg.src);
  if (cfg.output.empty()) {
    serialize_model(std::cout, loaded.model);
  } else {
    auto out = open_output(cfg.output);
    serialize_model(out, loaded.model);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and region-based approximate POMDP solving"};
  app.require_subcommand(1);

  InfoConfig info;
  auto* info_cmd = app.add_subcommand("info", "Print model dimensions and region statistics");
  add_source_options(info_cmd, info.src);
  info_cmd->add_option("--radius", info.radius, "Summarise the radius-k region system");

  SolveConfig solve;
  auto* solve_cmd = app.add_subcommand("solve", "Exact value iteration by incremental pruning");
  add_source_options(solve_cmd, solve.src);
  solve_cmd->add_option("--eps", solve.eps, "Bellman residual target")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--max-iterations", solve.max_iterations, "Iteration cap");
  solve_cmd->add_option("-o,--output", solve.output, "Solution file");
  solve_cmd->add_option("--report", solve.report, "Per-iteration timing CSV");

  ApproxConfig approx;
  auto* approx_cmd = app.add_subcommand("approx", "Region-based approximate value iteration");
  add_source_options(approx_cmd, approx.src);
  approx_cmd->add_option("--radius", approx.radius, "Region radius k (largest k with --sweep)");
  approx_cmd->add_flag("--sweep", approx.sweep, "Solve k = 0..radius");
  approx_cmd->add_option("--eps", approx.eps, "Restricted residual target")->check(CLI::PositiveNumber);
  approx_cmd->add_option("--max-iterations", approx.max_iterations, "Iteration cap");
  approx_cmd->add_option("--prune-tolerance", approx.prune_tolerance,
                         "Drop vectors that improve the value by at most this much (default 0)")
      ->check(CLI::NonNegativeNumber);
  approx_cmd->add_option("--jobs", approx.jobs, "Worker threads (default $ROPO_JOBS or 1)")
      ->check(CLI::PositiveNumber);
  approx_cmd->add_option("-o,--output", approx.output, "Solution file (suffix .k<radius> with --sweep)");
  approx_cmd->add_option("--summary", approx.summary, "Sweep summary CSV");

  SimulateConfig sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Paired trials with and without the oracle");
  add_source_options(sim_cmd, sim.src);
  sim_cmd->add_option("--solution", sim.solution, "Solution file from approx")->required();
  sim_cmd->add_option("--trials", sim.trials, "Number of paired trials");
  sim_cmd->add_option("--seed", sim.seed, "Random seed");
  sim_cmd->add_option("--max-steps", sim.max_steps, "Steps before a trial is abandoned");
  sim_cmd->add_option("--jobs", sim.jobs, "Worker threads (default $ROPO_JOBS or 1)")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--goal", sim.goals, "Goal state indices (office models know theirs)");
  sim_cmd->add_option("--declare", sim.declare, "Declaring action index");
  sim_cmd->add_option("-o,--output", sim.output, "Per-trial CSV");

  ExportConfig exp;
  auto* export_cmd = app.add_subcommand("export", "Write the model in the text grammar");
  add_source_options(export_cmd, exp.src);
  export_cmd->add_option("-o,--output", exp.output, "Model file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    if (*info_cmd) return cmd_info(info);
    if (*solve_cmd) return cmd_solve(solve);
    if (*approx_cmd) return cmd_approx(approx);
    if (*sim_cmd) return cmd_simulate(sim);
    if (*export_cmd) return cmd_export(exp);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const LayoutError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolverFailure;
  }
  return kExitInputError;
}
