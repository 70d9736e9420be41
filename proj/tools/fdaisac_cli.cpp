// Scenario-driven experiment runner.
//
//   fdaisac_cli <sense|comm-ber|crb|complexity|fodc-check|rate> [--scenario PATH]
//               [--snr DB,...] [--trials N] [--seed S] [--out DIR]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include "fdaisac/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace fdaisac;

namespace {

struct Options {
  std::string scenario;
  std::vector<double> snr;
  int trials = 0;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

std::uint64_t parse_seed(const std::string& text, const char* what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || text.front() == '-')
    throw ConfigError(std::string(what) + ": '" + text + "' is not a non-negative integer");
  return v;
}

Scenario prepare(const Options& opt, ExperimentKind kind) {
  Scenario scn = opt.scenario.empty() ? default_scenario() : load_scenario(opt.scenario);
  scn.experiment.kind = kind;
  if (const char* env = std::getenv("ISAC_SEED"); env && *env) scn.experiment.master_seed = parse_seed(env, "ISAC_SEED");
  if (opt.seed) scn.experiment.master_seed = *opt.seed;
  if (!opt.snr.empty()) scn.experiment.snr_grid_db = opt.snr;
  if (opt.trials > 0) scn.experiment.trials = opt.trials;
  scn.validate();
  return scn;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw RuntimeFailure("write to '" + path.string() + "' failed");
}

void emit(const Options& opt, const Scenario& scn, const std::vector<std::pair<std::string, std::string>>& files) {
  const fs::path dir(opt.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + opt.out + "': " + ec.message());
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& [name, content] : files) {
    write_file(dir / name, content);
    outputs.push_back({{"file", name}, {"hash", git_blob_hash(content)}, {"bytes", content.size()}});
  }
  const nlohmann::json config = to_json(scn);
  const std::string config_text = config.dump(2);
  nlohmann::json manifest = {{"subcommand", to_string(scn.experiment.kind)},
                             {"master_seed", scn.experiment.master_seed},
                             {"config", config},
                             {"config_hash", git_blob_hash(config_text)},
                             {"outputs", outputs}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  for (const auto& [name, _] : files) std::cout << "wrote " << (dir / name).string() << '\n';
}

int run(ExperimentKind kind, const Options& opt) {
  const Scenario scn = prepare(opt, kind);
  switch (kind) {
    case ExperimentKind::Sense: {
      const SensingRun r = run_sensing_experiment(scn);
      std::cout << sense_csv(r.rows);
      emit(opt, scn, {{"sense.csv", sense_csv(r.rows)}, {"sense_trials.csv", sense_detail_csv(r.details)}});
      break;
    }
    case ExperimentKind::CommBer: {
      const auto rows = run_comm_ber(scn);
      std::cout << ber_csv(rows);
      emit(opt, scn, {{"ber.csv", ber_csv(rows)}});
      break;
    }
    case ExperimentKind::Crb: {
      const auto rows = run_crb_table(scn);
      emit(opt, scn, {{"crb.csv", crb_csv(rows)}});
      break;
    }
    case ExperimentKind::Complexity: {
      const auto rows = run_complexity_table(scn);
      std::cout << complexity_csv(rows);
      emit(opt, scn, {{"complexity.csv", complexity_csv(rows)}});
      break;
    }
    case ExperimentKind::Rate: {
      const auto rows = run_rate_table(scn);
      std::cout << rate_csv(rows);
      emit(opt, scn, {{"rate.csv", rate_csv(rows)}});
      break;
    }
    case ExperimentKind::FodcCheck: {
      const double bound = scn.experiment.max_range_m > 0 ? scn.experiment.max_range_m : scn.array.max_unambiguous_range_m();
      const FodcReport rep = validate_fodc(scn.array, bound);
      std::cout << "period " << rep.period_m << " m (fundamental " << rep.fundamental_period_m << " m), max range "
                << rep.max_range_m << " m: " << (rep.pass ? "PASS" : "FAIL") << '\n';
      emit(opt, scn, {{"fodc.csv", fodc_csv(rep)}});
      break;
    }
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"FDA-MIMO ISAC experiment runner"};
  app.require_subcommand(1);
  Options opt;
  std::string seed_text;
  const std::vector<std::pair<const char*, ExperimentKind>> kinds = {
      {"sense", ExperimentKind::Sense},          {"comm-ber", ExperimentKind::CommBer},
      {"crb", ExperimentKind::Crb},              {"complexity", ExperimentKind::Complexity},
      {"fodc-check", ExperimentKind::FodcCheck}, {"rate", ExperimentKind::Rate}};
  std::vector<std::pair<CLI::App*, ExperimentKind>> subs;
  for (const auto& [name, kind] : kinds) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--scenario", opt.scenario, "scenario JSON file");
    sub->add_option("--snr", opt.snr, "SNR grid in dB (overrides the scenario)")->delimiter(',');
    sub->add_option("--trials", opt.trials, "Monte-Carlo trials (overrides the scenario)")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed_text, "master seed (overrides ISAC_SEED and the scenario)");
    sub->add_option("--out", opt.out, "output directory")->capture_default_str();
    subs.emplace_back(sub, kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (!seed_text.empty()) opt.seed = parse_seed(seed_text, "--seed");
    if (!opt.scenario.empty() && !fs::exists(opt.scenario))
      throw ConfigError("scenario file '" + opt.scenario + "' does not exist");
    for (const auto& [sub, kind] : subs)
      if (sub->parsed()) return run(kind, opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const RuntimeFailure& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
