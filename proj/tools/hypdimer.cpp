#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hypdimer/pipeline.hpp"

using namespace hypdimer;

namespace {

enum Exit { ok = 0, invariant = 1, config = 2, missing = 3 };

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> out;
  std::optional<double> tol;
  std::string input;  // render only

  void apply(RunConfig& c) const {
    if (seed) c.seed = *seed;
    if (jobs) {
      if (*jobs <= 0) throw ConfigError("--jobs must be positive");
      c.jobs = *jobs;
    }
    if (out) c.out = *out;
    if (tol) {
      if (!(*tol > 0.0)) throw ConfigError("--tol must be positive");
      c.tol.override_all(*tol);
    }
  }
};

RunConfig base_config(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? parse_config(nlohmann::json::object()) : load_config(o.config_path);
  o.apply(c);
  return c;
}

// Render draws what a previous experiment produced: its experiment.json
// supplies the configuration unless --config is given.
RunConfig render_config(const Overrides& o) {
  std::string out = o.out.value_or(o.config_path.empty() ? RunConfig{}.out : load_config(o.config_path).out);
  std::string input = o.input.empty() ? (std::filesystem::path(out) / "experiment.json").string() : o.input;
  std::string text = read_text(input);
  if (!o.config_path.empty()) return base_config(o);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(input + " is not valid JSON: " + e.what());
  }
  if (!j.contains("config")) throw ConfigError(input + " carries no config");
  RunConfig c = parse_config(j["config"]);
  o.apply(c);
  return c;
}

int run(const std::string& command, const Overrides& o) {
  if (command == "verify") {
    auto cfg = base_config(o);
    auto rep = verify_to_disk(cfg);
    for (const auto& s : rep.suites)
      std::cout << (s.passed ? "PASS " : "FAIL ") << s.name << " residual=" << s.residual << " tol=" << s.tolerance
                << " cases=" << s.cases << '\n';
    if (const auto* f = rep.first_failure()) {
      std::cerr << "invariant failure in suite " << f->name << ": " << f->detail << '\n';
      return invariant;
    }
    return ok;
  }
  if (command == "experiment") {
    auto cfg = base_config(o);
    auto summary = run_experiments(cfg);
    for (const auto& a : summary["artifacts"]) std::cout << "wrote " << a.get<std::string>() << '\n';
    std::cout << "wrote experiment.json\n";
    return ok;
  }
  auto cfg = render_config(o);
  auto counts = render_to_disk(cfg);
  std::cout << "packing.svg: " << counts.primal_circles << " primal, " << counts.dual_circles << " dual circles\n"
            << "loops.svg: " << counts.loops << " loops\n";
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dimer and double-dimer experiments on circle-packed planar graphs"};
  app.require_subcommand(1, 1);
  Overrides o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON run configuration");
    sub->add_option("--seed", o.seed, "base seed for every random stream");
    sub->add_option("--jobs", o.jobs, "worker threads");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--tol", o.tol, "override every tolerance");
  };
  auto* verify = app.add_subcommand("verify", "run the invariant suites and write verify.json");
  auto* experiment = app.add_subcommand("experiment", "run the configured experiments and write CSV tables");
  auto* render = app.add_subcommand("render", "draw packing, superposition and loop SVGs");
  for (auto* s : {verify, experiment, render}) add_common(s);
  render->add_option("--input", o.input, "experiment.json of a previous run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return config;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config;
  } catch (const MissingInputError& e) {
    std::cerr << "missing input: " << e.what() << '\n';
    return missing;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return invariant;
  }
}
