#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "savi/config.hpp"
#include "savi/verify.hpp"

namespace fs = std::filesystem;
using namespace savi;

namespace {

enum Exit { kOk = 0, kVerifyFail = 1, kConfig = 2, kNumeric = 3 };

struct Globals {
  std::string out;
  std::optional<std::uint64_t> seed;
};

ExperimentConfig load(const std::string& path, const Globals& g) {
  ExperimentConfig c = load_config(path);
  if (!g.out.empty()) c.out = g.out;
  if (g.seed) {
    c.seed = *g.seed;
    c.optim.seed = *g.seed;
  }
  return c;
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError(fmt::format("cannot write '{}'", p.string()));
  f << text;
}

int cmd_run(const std::string& path, const Globals& g) {
  const ExperimentConfig c = load(path, g);
  if (c.methods.empty()) throw ConfigError("no methods selected");
  const auto model = build_model(c);
  const OptimConfig optim = effective_optim(c);
  const fs::path dir(c.out);

  if (const auto* codec = dynamic_cast<const CodecModel*>(model.get())) {
    std::vector<AllocationReport> reps;
    for (Method m : c.methods) {
      reps.push_back(run_allocation(*codec, m, optim));
      const auto& r = reps.back();
      write_file(dir / fmt::format("{}_{}.csv", c.name, r.method), allocation_csv(r));
      write_file(dir / fmt::format("{}_{}.trace", c.name, r.method), format_events(r.result.events));
    }
    write_file(dir / fmt::format("{}_comparison.csv", c.name), comparison_csv(reps));
    fmt::print("{:<8} {:>14} {:>14} {:>14} {:>12} {:>10}\n", "method", "R", "D", "L",
               "rate_err", "grads");
    for (const auto& r : reps) {
      fmt::print("{:<8} {:>14.8f} {:>14.8f} {:>14.8f} {:>12.6f} {:>10}\n", r.method, r.R, r.D, r.L,
                 r.bitrate_error, r.counter.gradient_calls);
    }
    return kOk;
  }

  fmt::print("{:<8} {:>16} {:>10} {:>8}\n", "method", "L", "grads", "events");
  for (Method m : c.methods) {
    if (m == Method::Exact) check_exact_guard_nodes(model->dag().node_count(), optim);
    const SolveResult r = run_method(*model, m, optim);
    write_file(dir / fmt::format("{}_{}.csv", c.name, r.method), node_csv(r));
    write_file(dir / fmt::format("{}_{}.trace", c.name, r.method), format_events(r.events));
    fmt::print("{:<8} {:>16.10f} {:>10} {:>8}\n", r.method, r.objective, r.counter.gradient_calls,
               r.events.size());
  }
  return kOk;
}

int cmd_trace(const std::string& path, const Globals& g) {
  const ExperimentConfig c = load(path, g);
  const auto model = build_model(c);
  const OptimConfig optim = effective_optim(c);
  if (c.kind == "codec") {
    check_exact_guard(c.T, optim);
  } else {
    check_exact_guard_nodes(model->dag().node_count(), optim);
  }
  const SolveResult r = solve_dag(*model, optim);
  const fs::path file = fs::path(c.out) / fmt::format("{}_exact.trace", c.name);
  write_file(file, format_events(r.events));
  fmt::print("{} events, {} gradient calls, L = {}\n", r.events.size(), r.counter.gradient_calls,
             format_double(r.objective));
  fmt::print("wrote {}\n", file.string());
  return kOk;
}

int cmd_verify(const std::string& profile, bool fault) {
  VerifyOptions opt;
  opt.inject_fault = fault;
  bool all = true;
  std::string first;
  for (const auto& s : run_verify(profile, opt)) {
    for (const auto& line : s.lines) fmt::print("[{}] {}\n", s.name, line);
    fmt::print("{} {} max_error={:.3e} time={:.2f}s\n", s.passed ? "PASS" : "FAIL", s.name,
               s.max_error, s.seconds);
    if (!s.passed && all) first = fmt::format("{}: {}", s.name, s.failure);
    all = all && s.passed;
  }
  if (!all) {
    fmt::print(stderr, "first failing case: {}\n", first);
    return kVerifyFail;
  }
  return kOk;
}

int cmd_gradcheck(const std::string& path, const Globals& g, int trials, double tol, bool fault) {
  const ExperimentConfig c = load(path, g);
  const auto model = build_model(c);
  std::unique_ptr<FaultyModel> faulty;
  if (fault) faulty = std::make_unique<FaultyModel>(*model, 1, 0);
  const Model& m = faulty ? *faulty : *model;
  const GradCheckReport r = grad_check(m, trials, tol, c.optim.seed, c.optim.fd);
  fmt::print("{} trials={} max_rel_error={:.3e} tol={:.1e} worst_node={} worst_trial={}\n",
             r.passed ? "PASS" : "FAIL", r.trials, r.max_rel_error, tol,
             r.worst_node > 0 ? m.node_label(r.worst_node) : "-", r.worst_trial);
  return r.passed ? kOk : kVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semi-amortized inference on latent DAGs"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--out", g.out, "output directory (overrides the config)");
  auto* seed_opt = app.add_option("--seed", seed, "seed for model and run (overrides the config)");
  bool fault = false;
  app.add_flag("--inject-fault", fault)->group("");

  std::string config, profile = "all";
  int trials = 10;
  double tol = 1e-4;

  auto* run = app.add_subcommand("run", "run the configured methods, write CSV and trace files");
  run->add_option("config", config)->required()->check(CLI::ExistingFile);
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("profile", profile)
      ->check(CLI::IsMember([] {
        auto p = verify_profiles();
        p.push_back("all");
        return p;
      }()));
  auto* trace = app.add_subcommand("trace", "write the event trace of the exact solver");
  trace->add_option("config", config)->required()->check(CLI::ExistingFile);
  auto* check = app.add_subcommand("gradcheck", "compare analytic and numeric gradients");
  check->add_option("config", config)->required()->check(CLI::ExistingFile);
  check->add_option("--trials", trials)->check(CLI::PositiveNumber);
  check->add_option("--tol", tol)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*run) return cmd_run(config, g);
    if (*verify) return cmd_verify(profile, fault);
    if (*trace) return cmd_trace(config, g);
    if (*check) return cmd_gradcheck(config, g, trials, tol, fault);
  } catch (const NumericError& e) {
    fmt::print(stderr, "numeric failure: {}\n", e.what());
    return kNumeric;
  } catch (const CycleError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kConfig;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return kVerifyFail;
  }
  return kOk;
}
