#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wiggly/wiggly.h"

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kConfig = 2, kSolver = 3, kBudget = 4 };

struct ExitError {
  int code;
  std::string message;
};

int exit_code(wg_status s) {
  switch (s) {
    case WG_OK: return kOk;
    case WG_INVALID_INPUT:
    case WG_IO: return kConfig;
    case WG_BUDGET_EXCEEDED: return kBudget;
    default: return kSolver;
  }
}

void check(wg_status s) {
  if (s != WG_OK) throw ExitError{exit_code(s), std::string(wg_status_name(s)) + ": " + wg_last_error()};
}

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- parameters shared between flags and config files ----

struct Param {
  CLI::Option* option;
  std::function<ordered_json()> get;
  std::function<void(const json&)> set;
  bool required;
};

class Params {
 public:
  // `--h` names the drive, so subcommands keep only the long help flag.
  explicit Params(CLI::App* app) : app_(app) { app_->set_help_flag("--help", "Print this help message and exit"); }

  template <class T>
  void add(const std::string& name, T& var, const std::string& help, bool required = false) {
    auto* opt = app_->add_option("--" + name, var, help);
    if constexpr (std::is_same_v<T, std::vector<double>> || std::is_same_v<T, std::vector<int>>) opt->delimiter(',');
    if (!required) opt->capture_default_str();
    params_[name] = {opt, [&var] { return ordered_json(var); },
                     [&var](const json& j) {
                       if constexpr (std::is_same_v<T, std::vector<double>> || std::is_same_v<T, std::vector<int>>) {
                         if (j.is_string()) {
                           T parsed;
                           std::stringstream in(j.get<std::string>());
                           for (std::string item; std::getline(in, item, ',');)
                             parsed.push_back(static_cast<typename T::value_type>(std::stod(item)));
                           var = parsed;
                           return;
                         }
                       }
                       var = j.get<T>();
                     },
                     required};
    order_.push_back(name);
  }

  CLI::App* app() const { return app_; }

  /// Fills unset options from `config` and checks required ones.
  void merge(const json& config) {
    for (const auto& [key, value] : config.items()) {
      if (key == "command" || key == "seed" || key == "threads" || key == "config") continue;
      const auto it = params_.find(key);
      if (it == params_.end()) throw ExitError{kConfig, "unknown config key '" + key + "' for " + app_->get_name()};
      if (it->second.option->count() > 0) continue;
      try {
        it->second.set(value);
      } catch (const std::exception& e) {
        throw ExitError{kConfig, "config key '" + key + "': " + e.what()};
      }
      given_.insert(key);
    }
    for (const auto& name : order_) {
      const auto& p = params_.at(name);
      if (p.required && p.option->count() == 0 && !given_.count(name))
        throw ExitError{kConfig, "--" + name + " is required"};
    }
  }

  bool is_set(const std::string& name) const { return params_.at(name).option->count() > 0 || given_.count(name); }

  ordered_json resolved() const {
    ordered_json out;
    for (const auto& name : order_) out[name] = params_.at(name).get();
    return out;
  }

 private:
  CLI::App* app_;
  std::map<std::string, Param> params_;
  std::vector<std::string> order_;
  std::set<std::string> given_;
};

// ---- resources ----

struct PotentialHandle {
  wg_potential* p = nullptr;
  explicit PotentialHandle(const std::string& source) {
    if (source == "pwq" || source == "cosine" || source == "zero")
      check(wg_potential_builtin(source.c_str(), &p));
    else
      check(wg_potential_from_json_file(source.c_str(), &p));
  }
  ~PotentialHandle() { wg_potential_free(p); }
  PotentialHandle(const PotentialHandle&) = delete;
  PotentialHandle& operator=(const PotentialHandle&) = delete;
};

struct DriveHandle {
  wg_drive* h = nullptr;
  explicit DriveHandle(const std::string& source) { check(wg_drive_by_name(source.c_str(), &h)); }
  ~DriveHandle() { wg_drive_free(h); }
  DriveHandle(const DriveHandle&) = delete;
  DriveHandle& operator=(const DriveHandle&) = delete;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw ExitError{kConfig, "cannot write " + path};
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// JSON reports go to --out when given, else to standard output.
void emit_json(const std::string& out, const ordered_json& report) {
  if (out.empty())
    std::cout << dump(report);
  else
    write_file(out, dump(report));
}

void write_sidecar(const std::string& out, const ordered_json& config, const ordered_json& summary) {
  ordered_json meta;
  meta["config"] = config;
  meta["summary"] = summary;
  write_file(out + ".meta.json", dump(meta));
}

struct Grid {
  double lo, hi;
  long n;
};

Grid parse_grid(const std::string& text, const char* flag) {
  Grid g{};
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%ld%c", &g.lo, &g.hi, &g.n, &tail) != 3 || g.n < 1 || !std::isfinite(g.lo) ||
      !std::isfinite(g.hi))
    throw ExitError{kConfig, std::string(flag) + " must look like lo:hi:n"};
  return g;
}

std::vector<double> grid_points(const Grid& g) {
  std::vector<double> out(static_cast<std::size_t>(g.n));
  for (long i = 0; i < g.n; ++i) out[i] = g.n == 1 ? g.lo : g.lo + (g.hi - g.lo) * static_cast<double>(i) / (g.n - 1);
  if (g.n > 1) out.back() = g.hi;
  return out;
}

// ---- commands ----

struct Globals {
  std::uint64_t seed = 20240611;
  int threads = 0;
};

struct Command {
  std::unique_ptr<Params> params;
  std::function<int(const Globals&, const ordered_json& config)> run;
  /// Settles defaults that depend on other options, before the config is resolved.
  std::function<void(const Params&)> prepare;
};

struct Simulate {
  double gamma = 0, epsilon = 0, x0 = 0;
  std::int64_t steps = 0;
  std::string w = "pwq", h = "quadratic", out;

  void bind(Params& p) {
    p.add("gamma", gamma, "epsilon / tau", true);
    p.add("epsilon", epsilon, "oscillation scale", true);
    p.add("x0", x0, "initial state", true);
    p.add("steps", steps, "number of steps", true);
    p.add("w", w, "potential: pwq, cosine, zero or a JSON file");
    p.add("h", h, "drive: quadratic or polynomial:c0,c1,...");
    p.add("out", out, "trajectory CSV", true);
  }

  int run(const ordered_json& config) const {
    PotentialHandle pot(w);
    DriveHandle drive(h);
    wg_trajectory* t = nullptr;
    check(wg_simulate(drive.h, pot.p, epsilon, gamma, x0, steps, &t));
    std::unique_ptr<wg_trajectory, void (*)(wg_trajectory*)> guard(t, wg_trajectory_free);
    check(wg_trajectory_write_csv(t, out.c_str()));
    static const char* const directions[] = {"nonincreasing", "nondecreasing", "constant"};
    ordered_json summary;
    summary["rows"] = steps;
    const auto pinned = wg_trajectory_pinned_step(t);
    summary["pinned_step"] = pinned < 0 ? ordered_json(nullptr) : ordered_json(pinned);
    summary["direction"] = directions[wg_trajectory_direction(t)];
    summary["final_state"] = wg_trajectory_states(t)[wg_trajectory_size(t) - 1];
    write_sidecar(out, config, summary);
    return kOk;
  }
};

struct Velocity {
  double gamma = 0, T = 0, tol = 1e-4, y0 = 0;
  std::string w = "pwq", out;

  void bind(Params& p) {
    p.add("gamma", gamma, "epsilon / tau", true);
    p.add("T", T, "slope", true);
    p.add("tol", tol, "target error bound");
    p.add("y0", y0, "orbit start");
    p.add("w", w, "potential: pwq, cosine, zero or a JSON file");
    p.add("out", out, "JSON report (default: standard output)");
  }

  int run(const ordered_json& config) const {
    PotentialHandle pot(w);
    wg_velocity v{};
    const wg_status s = wg_velocity_estimate(pot.p, T, gamma, tol, y0, &v);
    if (s != WG_OK && s != WG_BUDGET_EXCEEDED) check(s);
    ordered_json report;
    report["config"] = config;
    report["gamma"] = gamma;
    report["T"] = T;
    report["f"] = v.f;
    report["err_bound"] = v.error_bound;
    report["iters"] = v.iterations;
    report["pinned"] = v.pinned != 0;
    report["budget_exceeded"] = s == WG_BUDGET_EXCEEDED;
    emit_json(out, report);
    if (s == WG_BUDGET_EXCEEDED) {
      std::cerr << "warning: " << wg_last_error() << "; reported f is the best estimate\n";
      return kBudget;
    }
    return kOk;
  }
};

struct Threshold {
  double gamma = 0, tol = 1e-8;
  std::string method = "auto", w = "pwq", out;

  void bind(Params& p) {
    p.add("gamma", gamma, "epsilon / tau", true);
    p.add("method", method, "auto, criterion or velocity");
    p.add("tol", tol, "bracket width (velocity method: at least 1e-6)");
    p.add("w", w, "potential: pwq, cosine, zero or a JSON file");
    p.add("out", out, "JSON report (default: standard output)");
    p.app()->get_option("--method")->check(CLI::IsMember({"auto", "criterion", "velocity"}));
  }

  void prepare(const Params& p) {
    if (method == "velocity" && !p.is_set("tol")) tol = 1e-6;
  }

  int run(const ordered_json& config) const {
    const wg_threshold_method m = method == "criterion" ? WG_METHOD_CRITERION
                                  : method == "velocity" ? WG_METHOD_VELOCITY
                                  : method == "auto"     ? WG_METHOD_AUTO
                                                         : throw ExitError{kConfig, "unknown method " + method};
    PotentialHandle pot(w);
    wg_threshold t{};
    check(wg_pinning_threshold(pot.p, gamma, tol, m, &t));
    ordered_json report;
    report["config"] = config;
    report["gamma"] = gamma;
    report["threshold"] = t.threshold;
    report["bracket"] = {t.low, t.high};
    report["method"] = t.method == WG_METHOD_CRITERION ? "criterion" : "velocity";
    emit_json(out, report);
    return kOk;
  }
};

struct Phase {
  std::string gamma_grid, t_grid, w = "pwq", out;
  double tol = 1e-4;

  void bind(Params& p) {
    p.add("gamma-grid", gamma_grid, "lo:hi:n", true);
    p.add("t-grid", t_grid, "lo:hi:m", true);
    p.add("tol", tol, "velocity error bound per cell");
    p.add("w", w, "potential: pwq, cosine, zero or a JSON file");
    p.add("out", out, "CSV gamma,T,f,err_bound,iters,pinned", true);
  }

  int run(const Globals& g, const ordered_json& config) const {
    const auto gammas = grid_points(parse_grid(gamma_grid, "--gamma-grid"));
    const auto slopes = grid_points(parse_grid(t_grid, "--t-grid"));
    PotentialHandle pot(w);
    std::vector<wg_phase_cell> cells(gammas.size() * slopes.size());
    std::size_t capped = 0;
    check(wg_phase_sweep(pot.p, gammas.data(), gammas.size(), slopes.data(), slopes.size(), tol, g.threads,
                         cells.data(), &capped));
    std::string csv = "gamma,T,f,err_bound,iters,pinned\n";
    for (const auto& c : cells)
      csv += real(c.gamma) + ',' + real(c.T) + ',' + real(c.f) + ',' + real(c.error_bound) + ',' +
             std::to_string(c.iterations) + ',' + (c.pinned ? "true" : "false") + '\n';
    write_file(out, csv);
    ordered_json summary;
    summary["rows"] = cells.size();
    ordered_json capped_cells = ordered_json::array();
    for (const auto& c : cells)
      if (c.budget_exceeded) capped_cells.push_back({c.gamma, c.T});
    summary["budget_exceeded_cells"] = capped_cells;
    write_sidecar(out, config, summary);
    if (capped > 0)
      std::cerr << "warning: " << capped << " cell(s) hit the step cap before reaching --tol; their rows hold the best "
                << "estimate and are listed in " << out << ".meta.json\n";
    return kOk;
  }
};

struct LimitOde {
  double gamma = 0, x0 = 0, t_end = 0, tol = 1e-3;
  std::string w = "pwq", h = "quadratic", out;

  void bind(Params& p) {
    p.add("gamma", gamma, "epsilon / tau", true);
    p.add("x0", x0, "initial state", true);
    p.add("t-end", t_end, "final time", true);
    p.add("tol", tol, "local error per unit time");
    p.add("w", w, "potential: pwq, cosine, zero or a JSON file");
    p.add("h", h, "drive: quadratic or polynomial:c0,c1,...");
    p.add("out", out, "CSV t,x", true);
  }

  int run(const ordered_json& config) const {
    PotentialHandle pot(w);
    DriveHandle drive(h);
    wg_ode_run* r = nullptr;
    check(wg_limit_ode(drive.h, pot.p, gamma, x0, t_end, tol, &r));
    std::unique_ptr<wg_ode_run, void (*)(wg_ode_run*)> guard(r, wg_ode_free);
    check(wg_ode_write_csv(r, out.c_str()));
    ordered_json summary;
    summary["rows"] = wg_ode_size(r);
    double t_pin = 0.0;
    summary["pinned_at"] = wg_ode_pinned_at(r, &t_pin) ? ordered_json(t_pin) : ordered_json(nullptr);
    summary["final_state"] = wg_ode_states(r)[wg_ode_size(r) - 1];
    write_sidecar(out, config, summary);
    return kOk;
  }
};

struct Compare {
  double gamma = 0, x0 = 0, t_end = 0, tol = 1e-3;
  std::vector<double> epsilons;
  int samples = 1000;
  std::string w = "pwq", h = "quadratic", out;

  void bind(Params& p) {
    p.add("gamma", gamma, "epsilon / tau", true);
    p.add("x0", x0, "initial state", true);
    p.add("t-end", t_end, "final time", true);
    p.add("epsilons", epsilons, "strictly decreasing list, at least 3", true);
    p.add("tol", tol, "limit ODE local error per unit time");
    p.add("samples", samples, "uniform sample times in [0, t-end]");
    p.add("w", w, "potential: pwq, cosine, zero or a JSON file");
    p.add("h", h, "drive: quadratic or polynomial:c0,c1,...");
    p.add("out", out, "CSV epsilon,sup_distance", true);
  }

  int run(const Globals& g, const ordered_json& config) const {
    PotentialHandle pot(w);
    DriveHandle drive(h);
    std::vector<double> sup(epsilons.size());
    check(wg_convergence(drive.h, pot.p, gamma, x0, t_end, epsilons.data(), epsilons.size(), tol, g.threads, samples,
                         sup.data()));
    std::string csv = "epsilon,sup_distance\n";
    for (std::size_t i = 0; i < sup.size(); ++i) csv += real(epsilons[i]) + ',' + real(sup[i]) + '\n';
    write_file(out, csv);
    ordered_json summary;
    summary["rows"] = sup.size();
    bool decreasing = true;
    for (std::size_t i = 1; i < sup.size(); ++i) decreasing = decreasing && sup[i] <= sup[i - 1];
    summary["decreasing"] = decreasing;
    write_sidecar(out, config, summary);
    return kOk;
  }
};

struct ValidatePotential {
  std::string w = "pwq", out;
  int samples = 1000;

  void bind(Params& p) {
    p.add("w", w, "potential: pwq, cosine, zero or a JSON file");
    p.add("samples", samples, "pointwise samples on [-3, 3]");
    p.add("out", out, "JSON report (default: standard output)");
  }

  int run(const ordered_json& config) const {
    PotentialHandle pot(w);
    ordered_json checks = ordered_json::array();
    auto cb = [](const wg_check* c, void* user) {
      ordered_json item;
      item["name"] = c->name;
      item["passed"] = c->passed != 0;
      item["residual"] = c->residual;
      item["tolerance"] = c->tolerance;
      item["advisory"] = c->advisory != 0;
      static_cast<ordered_json*>(user)->push_back(item);
    };
    int all = 0;
    check(wg_validate_potential(pot.p, samples, cb, &checks, &all));
    ordered_json report;
    report["config"] = config;
    report["potential"] = wg_potential_name(pot.p);
    report["all_passed"] = all != 0;
    report["checks"] = checks;
    emit_json(out, report);
    return all ? kOk : kConfig;
  }
};

struct Selftest {
  std::vector<int> only;
  std::string out;

  void bind(Params& p) {
    p.add("only", only, "criterion ids to run (default: all)");
    p.add("out", out, "JSON report");
  }

  int run(const Globals& g, const ordered_json& config) const {
    struct State {
      ordered_json results = ordered_json::array();
    } state;
    auto cb = [](const wg_criterion* c, void* user) {
      std::printf("%s  %2d  %s (%.1f s): %s\n", c->passed ? "PASS" : "FAIL", c->id, c->name, c->seconds, c->detail);
      std::fflush(stdout);
      ordered_json item;
      item["id"] = c->id;
      item["name"] = c->name;
      item["passed"] = c->passed != 0;
      item["detail"] = c->detail;
      static_cast<State*>(user)->results.push_back(item);
    };
    int failures = 0;
    check(wg_selftest(g.seed, g.threads, only.data(), only.size(), cb, &state, &failures));
    std::printf("%zu criteria, %d failed\n", state.results.size(), failures);
    if (!out.empty()) {
      ordered_json report;
      report["config"] = config;
      report["criteria"] = state.results;
      report["failures"] = failures;
      write_file(out, dump(report));
    }
    return failures == 0 ? kOk : kSolver;
  }
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ExitError{kConfig, "cannot read config " + path};
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ExitError{kConfig, "config " + path + ": " + e.what()};
  }
  if (j.is_object() && j.contains("config") && j["config"].is_object()) j = j["config"];
  if (!j.is_object()) throw ExitError{kConfig, "config " + path + " must be a JSON object"};
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimizing movements for wiggly energies"};
  app.set_version_flag("--version", wg_version());
  app.require_subcommand(0, 1);

  Globals globals;
  std::string config_path;
  auto* seed_opt = app.add_option("--seed", globals.seed, "seed for randomized suites")->capture_default_str();
  auto* threads_opt = app.add_option("--threads", globals.threads, "worker threads (0: all cores)")->capture_default_str();
  app.add_option("--config", config_path, "JSON config; flags override its values");

  Simulate simulate;
  Velocity velocity;
  Threshold threshold;
  Phase phase;
  LimitOde limit_ode;
  Compare compare;
  ValidatePotential validate;
  Selftest selftest;

  std::map<std::string, Command> commands;
  auto add = [&](const char* name, const char* help, auto& cmd, auto run) {
    auto params = std::make_unique<Params>(app.add_subcommand(name, help));
    cmd.bind(*params);
    commands[name] = {std::move(params), run, {}};
  };
  add("simulate", "minimizing-movement trajectory", simulate,
      [&](const Globals&, const ordered_json& c) { return simulate.run(c); });
  add("velocity", "homogenized velocity f_gamma(T)", velocity,
      [&](const Globals&, const ordered_json& c) { return velocity.run(c); });
  add("threshold", "pinning threshold T_gamma", threshold,
      [&](const Globals&, const ordered_json& c) { return threshold.run(c); });
  commands["threshold"].prepare = [&](const Params& p) { threshold.prepare(p); };
  add("phase", "velocity over a gamma x T grid", phase, [&](const Globals& g, const ordered_json& c) { return phase.run(g, c); });
  add("limit-ode", "homogenized limit ODE", limit_ode,
      [&](const Globals&, const ordered_json& c) { return limit_ode.run(c); });
  add("compare", "discrete runs against the limit ODE", compare,
      [&](const Globals& g, const ordered_json& c) { return compare.run(g, c); });
  add("validate-potential", "check the hypotheses on W", validate,
      [&](const Globals&, const ordered_json& c) { return validate.run(c); });
  add("selftest", "run the acceptance suite", selftest,
      [&](const Globals& g, const ordered_json& c) { return selftest.run(g, c); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    json config = json::object();
    if (!config_path.empty()) config = load_config(config_path);

    std::string name;
    const auto selected = app.get_subcommands();
    if (!selected.empty()) name = selected.front()->get_name();
    if (config.contains("command")) {
      const auto from_file = config["command"].get<std::string>();
      if (name.empty()) name = from_file;
      if (name != from_file) throw ExitError{kConfig, "config is for '" + from_file + "', not '" + name + "'"};
    }
    if (name.empty()) {
      std::cerr << app.help();
      return kConfig;
    }
    const auto it = commands.find(name);
    if (it == commands.end()) throw ExitError{kConfig, "unknown command '" + name + "'"};

    try {
      if (seed_opt->count() == 0 && config.contains("seed")) globals.seed = config["seed"].get<std::uint64_t>();
      if (threads_opt->count() == 0 && config.contains("threads")) globals.threads = config["threads"].get<int>();
    } catch (const std::exception& e) {
      throw ExitError{kConfig, std::string("config: ") + e.what()};
    }
    it->second.params->merge(config);
    if (it->second.prepare) it->second.prepare(*it->second.params);

    ordered_json resolved;
    resolved["command"] = name;
    resolved["seed"] = globals.seed;
    const auto options = it->second.params->resolved();
    for (const auto& [key, value] : options.items()) resolved[key] = value;
    return it->second.run(globals, resolved);
  } catch (const ExitError& e) {
    std::cerr << "error: " << e.message << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  }
}
