#include "fdaisac/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <locale>
#include <set>
#include <sstream>

namespace fdaisac {

using nlohmann::json;

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Sense: return "sense";
    case ExperimentKind::CommBer: return "comm-ber";
    case ExperimentKind::Crb: return "crb";
    case ExperimentKind::Complexity: return "complexity";
    case ExperimentKind::FodcCheck: return "fodc-check";
    case ExperimentKind::Rate: return "rate";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(const std::string& s) {
  for (auto k : {ExperimentKind::Sense, ExperimentKind::CommBer, ExperimentKind::Crb, ExperimentKind::Complexity,
                 ExperimentKind::FodcCheck, ExperimentKind::Rate})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

CcieConfig CcieSettings::build() const {
  if (!coeffs) return CcieConfig::make(count, qam_order, seed);
  CcieConfig cfg;
  cfg.coeffs = *coeffs;
  cfg.qam_order = qam_order;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

void ExperimentSettings::validate() const {
  if (snr_grid_db.empty()) throw ConfigError("experiment.snr_grid_db must not be empty");
  for (double s : snr_grid_db)
    if (!std::isfinite(s)) throw ConfigError("experiment.snr_grid_db entries must be finite");
  if (trials < 1) throw ConfigError("experiment.trials must be >= 1");
  if (grid.angle_steps < 3 || grid.range_steps < 3) throw ConfigError("experiment.grids.s_r and s_theta must be >= 3");
  if (!(grid.angle_min_deg < grid.angle_max_deg) || grid.angle_min_deg < -90 || grid.angle_max_deg > 90)
    throw ConfigError("experiment.grids angle limits must satisfy -90 <= min < max <= 90");
  if (grid.refine_passes < 0) throw ConfigError("experiment.grids.refine_passes must be >= 0");
  if (methods.empty()) throw ConfigError("experiment.methods must not be empty");
  if (comm_rx_antennas < 1) throw ConfigError("experiment.comm_rx_antennas must be >= 1");
  if (min_bits_per_point < 1) throw ConfigError("experiment.min_bits_per_point must be >= 1");
  if (max_range_m < 0) throw ConfigError("experiment.max_range_m must be >= 0");
  for (int n : antenna_sweep)
    if (n < 2) throw ConfigError("experiment.antenna_sweep entries must be >= 2");
  if (complexity_targets < 1 || complexity_bins < 1) throw ConfigError("experiment complexity G and G' must be >= 1");
  if (rate_n_min < 1 || rate_n_max < rate_n_min) throw ConfigError("experiment rate range must satisfy 1 <= min <= max");
}

void Scenario::validate() const {
  array.validate();
  scene.validate(array);
  (void)ccie.build();
  experiment.validate();
}

Scenario default_scenario() {
  Scenario s;
  s.array = ArrayConfig::with_offsets({"0", "1", "2", "3.17", "4.2", "5.2"}, 6);
  s.scene.targets = {{40.9, 10.55, 8.62, {1.0, 0.0}}, {89.6, 10.55, 20.42, {1.0, 0.0}}, {115.9, 32.01, 36.5, {1.0, 0.0}}};
  // d = lambda: sin(theta) is unambiguous only over half the field of view
  s.experiment.grid.angle_min_deg = 0.0;
  s.experiment.grid.refine_passes = 2;
  return s;
}

// ---- JSON -----------------------------------------------------------------

json coeffs_to_json(const CVector& c) {
  json a = json::array();
  for (Eigen::Index i = 0; i < c.size(); ++i) a.push_back({c(i).real(), c(i).imag()});
  return a;
}

namespace {

cdouble complex_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(where + ": expected a number or a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
      throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <typename T>
void read_number(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_unsigned()) {
        out = v.get<T>();
      } else {
        const auto s = v.get<std::int64_t>();
        if (s < 0) throw ConfigError(where + "." + key + ": expected a non-negative integer");
        out = static_cast<T>(s);
      }
    } else {
      out = static_cast<T>(v.get<std::int64_t>());
    }
  } else {
    out = v.get<T>();
  }
}

SensingMethod parse_method(const std::string& s) {
  if (s == "ssmte") return SensingMethod::Ssmte;
  if (s == "lcsse") return SensingMethod::Lcsse;
  throw ConfigError("experiment.methods: unknown estimator '" + s + "'");
}

DopplerTranspose parse_transpose(const std::string& s) {
  if (s == "conjugate") return DopplerTranspose::Conjugate;
  if (s == "plain") return DopplerTranspose::Plain;
  throw ConfigError("experiment.doppler_transpose: expected 'conjugate' or 'plain', got '" + s + "'");
}

} // namespace

CVector coeffs_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("ccie.coeffs: expected a non-empty array");
  CVector c(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    c(static_cast<Eigen::Index>(i)) = complex_from_json(j[i], "ccie.coeffs[" + std::to_string(i) + "]");
  return c;
}

json to_json(const Scenario& s) {
  json offsets = json::array();
  for (const auto& r : s.array.offsets) offsets.push_back(r.str());
  json array = {{"n_tx", s.array.n_tx},       {"n_rx", s.array.n_rx},
                {"carrier_hz", s.array.carrier_hz}, {"delta_f_hz", s.array.delta_f_hz},
                {"d1_m", s.array.d1_m},       {"d2_m", s.array.d2_m},
                {"offsets", offsets},         {"pri_s", s.array.pri_s},
                {"pulses_per_cpi", s.array.pulses_per_cpi}, {"pulse_width_s", s.array.pulse_width_s}};
  const int count = s.ccie.coeffs ? static_cast<int>(s.ccie.coeffs->size()) : s.ccie.count;
  json ccie = {{"count", count}, {"qam_order", s.ccie.qam_order}, {"seed", s.ccie.seed}};
  if (s.ccie.coeffs) ccie["coeffs"] = coeffs_to_json(*s.ccie.coeffs);
  json targets = json::array();
  for (const auto& t : s.scene.targets)
    targets.push_back({{"range_m", t.range_m},
                       {"angle_deg", t.angle_deg},
                       {"velocity_mps", t.velocity_mps},
                       {"reflection", {t.reflection.real(), t.reflection.imag()}}});
  json scene = {{"targets", targets},
                {"sensing_noise_power", s.scene.sensing_noise_power},
                {"comm_noise_power", s.scene.comm_noise_power},
                {"comm_channel_power", s.scene.comm_channel_power},
                {"comm_user_range_m", s.scene.comm_user_range_m},
                {"comm_user_angle_deg", s.scene.comm_user_angle_deg}};
  const auto& e = s.experiment;
  json methods = json::array();
  for (auto m : e.methods) methods.push_back(to_string(m));
  json exp = {{"kind", to_string(e.kind)},
              {"snr_grid_db", e.snr_grid_db},
              {"trials", e.trials},
              {"master_seed", e.master_seed},
              {"grids",
               {{"s_r", e.grid.range_steps},
                {"s_theta", e.grid.angle_steps},
                {"angle_min_deg", e.grid.angle_min_deg},
                {"angle_max_deg", e.grid.angle_max_deg},
                {"refine_passes", e.grid.refine_passes}}},
              {"methods", methods},
              {"doppler_transpose", e.transpose == DopplerTranspose::Conjugate ? "conjugate" : "plain"},
              {"comm_rx_antennas", e.comm_rx_antennas},
              {"min_bits_per_point", e.min_bits_per_point},
              {"max_range_m", e.max_range_m},
              {"antenna_sweep", e.antenna_sweep},
              {"complexity_targets", e.complexity_targets},
              {"complexity_bins", e.complexity_bins},
              {"rate_n_min", e.rate_n_min},
              {"rate_n_max", e.rate_n_max}};
  return {{"array", array}, {"ccie", ccie}, {"scene", scene}, {"experiment", exp}};
}

Scenario scenario_from_json(const json& j) {
  reject_unknown(j, "scenario", {"array", "ccie", "scene", "experiment"});
  Scenario s = default_scenario();

  if (j.contains("array")) {
    const json& a = j.at("array");
    const std::string w = "array";
    reject_unknown(a, w,
                   {"n_tx", "n_rx", "carrier_hz", "delta_f_hz", "d1_m", "d2_m", "offsets", "pri_s", "pulses_per_cpi",
                    "pulse_width_s"});
    auto& c = s.array;
    read_number(a, "n_tx", c.n_tx, w);
    read_number(a, "n_rx", c.n_rx, w);
    read_number(a, "carrier_hz", c.carrier_hz, w);
    read_number(a, "delta_f_hz", c.delta_f_hz, w);
    // element spacing follows the carrier unless given explicitly
    c.d1_m = c.d2_m = kSpeedOfLight / c.carrier_hz;
    read_number(a, "d1_m", c.d1_m, w);
    read_number(a, "d2_m", c.d2_m, w);
    read_number(a, "pri_s", c.pri_s, w);
    read_number(a, "pulses_per_cpi", c.pulses_per_cpi, w);
    read_number(a, "pulse_width_s", c.pulse_width_s, w);
    if (a.contains("offsets")) {
      const json& o = a.at("offsets");
      if (!o.is_array()) throw ConfigError("array.offsets: expected an array of rational strings");
      c.offsets.clear();
      for (const auto& v : o) {
        if (v.is_string()) c.offsets.push_back(Rational::parse(v.get<std::string>()));
        else if (v.is_number_integer()) c.offsets.push_back(Rational::from_integer(v.get<std::int64_t>()));
        else throw ConfigError("array.offsets: entries must be strings such as \"3.17\" or integers");
      }
    } else if (a.contains("n_tx")) {
      c.offsets.clear();
      for (int n = 0; n < c.n_tx; ++n) c.offsets.push_back(Rational::from_integer(n));
    }
  }

  if (j.contains("ccie")) {
    const json& c = j.at("ccie");
    const std::string w = "ccie";
    reject_unknown(c, w, {"count", "qam_order", "seed", "coeffs"});
    read_number(c, "count", s.ccie.count, w);
    read_number(c, "qam_order", s.ccie.qam_order, w);
    read_number(c, "seed", s.ccie.seed, w);
    if (c.contains("coeffs")) {
      s.ccie.coeffs = coeffs_from_json(c.at("coeffs"));
      s.ccie.count = static_cast<int>(s.ccie.coeffs->size());
    }
  }

  if (j.contains("scene")) {
    const json& sc = j.at("scene");
    const std::string w = "scene";
    reject_unknown(sc, w,
                   {"targets", "sensing_noise_power", "comm_noise_power", "comm_channel_power", "comm_user_range_m",
                    "comm_user_angle_deg"});
    read_number(sc, "sensing_noise_power", s.scene.sensing_noise_power, w);
    read_number(sc, "comm_noise_power", s.scene.comm_noise_power, w);
    read_number(sc, "comm_channel_power", s.scene.comm_channel_power, w);
    read_number(sc, "comm_user_range_m", s.scene.comm_user_range_m, w);
    read_number(sc, "comm_user_angle_deg", s.scene.comm_user_angle_deg, w);
    if (sc.contains("targets")) {
      const json& ts = sc.at("targets");
      if (!ts.is_array()) throw ConfigError("scene.targets: expected an array");
      s.scene.targets.clear();
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const std::string tw = "scene.targets[" + std::to_string(i) + "]";
        reject_unknown(ts[i], tw, {"range_m", "angle_deg", "velocity_mps", "reflection"});
        Target t;
        if (!ts[i].contains("range_m") || !ts[i].contains("angle_deg"))
          throw ConfigError(tw + ": range_m and angle_deg are required");
        read_number(ts[i], "range_m", t.range_m, tw);
        read_number(ts[i], "angle_deg", t.angle_deg, tw);
        read_number(ts[i], "velocity_mps", t.velocity_mps, tw);
        if (ts[i].contains("reflection")) t.reflection = complex_from_json(ts[i].at("reflection"), tw + ".reflection");
        s.scene.targets.push_back(t);
      }
    }
  }

  if (j.contains("experiment")) {
    const json& e = j.at("experiment");
    const std::string w = "experiment";
    reject_unknown(e, w,
                   {"kind", "snr_grid_db", "trials", "master_seed", "grids", "methods", "doppler_transpose",
                    "comm_rx_antennas", "min_bits_per_point", "max_range_m", "antenna_sweep", "complexity_targets",
                    "complexity_bins", "rate_n_min", "rate_n_max"});
    auto& x = s.experiment;
    if (e.contains("kind")) {
      std::string kind;
      read(e, "kind", kind, w);
      x.kind = parse_experiment_kind(kind);
    }
    read(e, "snr_grid_db", x.snr_grid_db, w);
    read_number(e, "trials", x.trials, w);
    read_number(e, "master_seed", x.master_seed, w);
    if (e.contains("grids")) {
      const json& g = e.at("grids");
      const std::string gw = "experiment.grids";
      reject_unknown(g, gw, {"s_r", "s_theta", "angle_min_deg", "angle_max_deg", "refine_passes"});
      read_number(g, "s_r", x.grid.range_steps, gw);
      read_number(g, "s_theta", x.grid.angle_steps, gw);
      read_number(g, "angle_min_deg", x.grid.angle_min_deg, gw);
      read_number(g, "angle_max_deg", x.grid.angle_max_deg, gw);
      read_number(g, "refine_passes", x.grid.refine_passes, gw);
    }
    if (e.contains("methods")) {
      std::vector<std::string> names;
      read(e, "methods", names, w);
      x.methods.clear();
      for (const auto& n : names) x.methods.push_back(parse_method(n));
    }
    if (e.contains("doppler_transpose")) {
      std::string t;
      read(e, "doppler_transpose", t, w);
      x.transpose = parse_transpose(t);
    }
    read_number(e, "comm_rx_antennas", x.comm_rx_antennas, w);
    read_number(e, "min_bits_per_point", x.min_bits_per_point, w);
    read_number(e, "max_range_m", x.max_range_m, w);
    read(e, "antenna_sweep", x.antenna_sweep, w);
    read_number(e, "complexity_targets", x.complexity_targets, w);
    read_number(e, "complexity_bins", x.complexity_bins, w);
    read_number(e, "rate_n_min", x.rate_n_min, w);
    read_number(e, "rate_n_max", x.rate_n_max, w);
  }

  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario file '" + path + "' is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

// ---- association ----------------------------------------------------------

double match_cost(const EstimatedTarget& e, const Target& t) {
  return std::abs(e.angle_deg - t.angle_deg) + std::abs(e.range_m - t.range_m) +
         std::abs(e.velocity_mps - t.velocity_mps);
}

Matching associate(const std::vector<EstimatedTarget>& estimates, const std::vector<Target>& truth) {
  const std::size_t n_est = estimates.size();
  const std::size_t n_true = truth.size();
  if (n_est > 20) throw RuntimeFailure("association supports at most 20 estimates");
  const std::size_t states = std::size_t{1} << n_est;

  // DP over truths in order; state = set of used estimates.
  // Objective: fewest misses first, then smallest total cost.
  struct Cell {
    int misses = std::numeric_limits<int>::max();
    double cost = 0.0;
    int choice = -2;  // estimate taken by the truth that led here, -1 = none
    std::size_t prev = 0;
  };
  auto better = [](int m1, double c1, const Cell& b) { return m1 < b.misses || (m1 == b.misses && c1 < b.cost); };

  std::vector<std::vector<Cell>> dp(n_true + 1, std::vector<Cell>(states));
  dp[0][0] = {0, 0.0, -2, 0};
  for (std::size_t i = 0; i < n_true; ++i) {
    for (std::size_t mask = 0; mask < states; ++mask) {
      const Cell& cur = dp[i][mask];
      if (cur.misses == std::numeric_limits<int>::max()) continue;
      Cell& skip = dp[i + 1][mask];
      if (better(cur.misses + 1, cur.cost, skip)) skip = {cur.misses + 1, cur.cost, -1, mask};
      for (std::size_t e = 0; e < n_est; ++e) {
        if (mask & (std::size_t{1} << e)) continue;
        const std::size_t next = mask | (std::size_t{1} << e);
        const double c = cur.cost + match_cost(estimates[e], truth[i]);
        Cell& dst = dp[i + 1][next];
        if (better(cur.misses, c, dst)) dst = {cur.misses, c, static_cast<int>(e), mask};
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t mask = 1; mask < states; ++mask)
    if (better(dp[n_true][mask].misses, dp[n_true][mask].cost, dp[n_true][best])) best = mask;

  Matching m;
  m.estimate_for_truth.assign(n_true, -1);
  m.cost.assign(n_true, std::numeric_limits<double>::quiet_NaN());
  m.misses = dp[n_true][best].misses;
  m.total_cost = dp[n_true][best].cost;
  std::size_t mask = best;
  for (std::size_t i = n_true; i > 0; --i) {
    const Cell& c = dp[i][mask];
    if (c.choice >= 0) {
      m.estimate_for_truth[i - 1] = c.choice;
      m.cost[i - 1] = match_cost(estimates[static_cast<std::size_t>(c.choice)], truth[i - 1]);
    }
    mask = c.prev;
  }
  return m;
}

// ---- experiments ----------------------------------------------------------

namespace {

double noise_power_from_snr(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

Rng trial_rng(std::uint64_t master_seed, std::uint64_t trial) { return Rng(master_seed ^ trial); }

} // namespace

SensingRun run_sensing_experiment(const Scenario& scn) {
  scn.validate();
  const auto& cfg = scn.array;
  const auto& exp = scn.experiment;
  const CcieConfig ccie = scn.ccie.build();
  const auto bins = coarse_range_bins(scn.scene, cfg);
  const std::size_t g_total = scn.scene.targets.size();
  SensingOptions opts{exp.grid, exp.transpose};

  SensingRun run;
  for (double snr : exp.snr_grid_db) {
    Scene scene = scn.scene;
    scene.sensing_noise_power = noise_power_from_snr(snr);

    // accumulators per estimator and target
    const std::size_t n_methods = exp.methods.size();
    std::vector<std::vector<std::array<double, 3>>> sq(n_methods, std::vector<std::array<double, 3>>(g_total, {0, 0, 0}));
    std::vector<std::vector<int>> matched(n_methods, std::vector<int>(g_total, 0));
    std::vector<int> hits(n_methods, 0), misses(n_methods, 0);

    for (int t = 0; t < exp.trials; ++t) {
      Rng rng = trial_rng(exp.master_seed, static_cast<std::uint64_t>(t));
      const SnapshotSet snaps = synth_cpi(scene, cfg, ccie, rng);
      for (std::size_t mi = 0; mi < n_methods; ++mi) {
        const SensingResult res = sense(exp.methods[mi], snaps, bins, cfg, opts);
        const Matching m = associate(res.targets, scene.targets);
        const bool hit = m.misses == 0 && m.total_cost < kHitThreshold;
        hits[mi] += hit ? 1 : 0;
        misses[mi] += m.misses;
        for (std::size_t g = 0; g < g_total; ++g) {
          TrialDetail d;
          d.snr_db = snr;
          d.estimator = to_string(exp.methods[mi]);
          d.trial = t;
          d.target = static_cast<int>(g);
          d.trial_cost = m.misses == 0 ? m.total_cost : std::numeric_limits<double>::quiet_NaN();
          d.hit = hit;
          const int e = m.estimate_for_truth[g];
          if (e >= 0) {
            const auto& est = res.targets[static_cast<std::size_t>(e)];
            const auto& tr = scene.targets[g];
            d.range_m = est.range_m;
            d.angle_deg = est.angle_deg;
            d.velocity_mps = est.velocity_mps;
            d.err_range_m = est.range_m - tr.range_m;
            d.err_angle_deg = est.angle_deg - tr.angle_deg;
            d.err_velocity_mps = est.velocity_mps - tr.velocity_mps;
            sq[mi][g][0] += d.err_angle_deg * d.err_angle_deg;
            sq[mi][g][1] += d.err_range_m * d.err_range_m;
            sq[mi][g][2] += d.err_velocity_mps * d.err_velocity_mps;
            ++matched[mi][g];
          } else {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            d.range_m = d.angle_deg = d.velocity_mps = nan;
            d.err_range_m = d.err_angle_deg = d.err_velocity_mps = nan;
          }
          run.details.push_back(d);
        }
      }
    }

    // root-CRB averaged over targets
    std::array<double, 3> crb_mean{0, 0, 0};
    for (const auto& tr : scene.targets) {
      const CrbReport c = crb(tr, cfg, scene.sensing_noise_power, cfg.pulses_per_cpi);
      crb_mean[0] += std::sqrt(c.angle_deg2());
      crb_mean[1] += std::sqrt(c.range_m2);
      crb_mean[2] += std::sqrt(c.velocity_mps2);
    }
    for (auto& v : crb_mean) v /= static_cast<double>(std::max<std::size_t>(g_total, 1));

    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      MetricRow row;
      row.snr_db = snr;
      row.estimator = to_string(exp.methods[mi]);
      std::array<double, 3> rmse{0, 0, 0};
      for (std::size_t g = 0; g < g_total; ++g) {
        const int cnt = matched[mi][g];
        for (int p = 0; p < 3; ++p)
          rmse[p] += cnt > 0 ? std::sqrt(sq[mi][g][p] / cnt) : std::numeric_limits<double>::quiet_NaN();
      }
      for (auto& v : rmse) v /= static_cast<double>(std::max<std::size_t>(g_total, 1));
      row.rmse_angle_deg = rmse[0];
      row.rmse_range_m = rmse[1];
      row.rmse_velocity_mps = rmse[2];
      row.hit_rate = static_cast<double>(hits[mi]) / exp.trials;
      row.crb_angle_deg = crb_mean[0];
      row.crb_range_m = crb_mean[1];
      row.crb_velocity_mps = crb_mean[2];
      row.trials = exp.trials;
      row.misses = misses[mi];
      run.rows.push_back(row);
    }
  }
  return run;
}

std::vector<BerRow> run_comm_ber(const Scenario& scn) {
  scn.validate();
  const auto& exp = scn.experiment;
  const CcieConfig ccie = scn.ccie.build();
  const int n_tx = scn.array.n_tx;
  const int u = exp.comm_rx_antennas;
  const int mu_i = ccie.bits_index();
  const int mu_c = ccie.bits_symbol();
  const int per_antenna = mu_i + mu_c;
  const std::int64_t bits_per_frame = static_cast<std::int64_t>(n_tx) * per_antenna;
  const std::int64_t frames =
      std::max<std::int64_t>(exp.trials, (exp.min_bits_per_point + bits_per_frame - 1) / bits_per_frame);
  const double sigma_c2 = scn.scene.comm_channel_power;

  std::vector<BerRow> rows;
  for (double snr : exp.snr_grid_db) {
    const double noise = noise_power_from_snr(snr);
    std::int64_t err_index = 0, err_const = 0;
    for (std::int64_t f = 0; f < frames; ++f) {
      Rng rng = trial_rng(exp.master_seed, static_cast<std::uint64_t>(f));
      const CMatrix h = draw_comm_channel(u, n_tx, sigma_c2, rng);
      const Bits bits = random_bits(static_cast<std::size_t>(bits_per_frame), rng);
      const PduFrame frame = encode_frame(bits, n_tx, ccie);
      const CMatrix y = synth_comm_rx(frame, h, noise, rng);
      const Bits out = decode_frame(y, h, ccie);
      for (std::int64_t i = 0; i < bits_per_frame; ++i) {
        if (bits[static_cast<std::size_t>(i)] == out[static_cast<std::size_t>(i)]) continue;
        if (i % per_antenna < mu_i) ++err_index;
        else ++err_const;
      }
    }
    const BerBound bound = ccie_ber_bound(ccie, n_tx, u, sigma_c2, noise);
    BerRow r;
    r.snr_db = snr;
    r.bits = frames * bits_per_frame;
    r.errors = err_index + err_const;
    r.ber_sim = static_cast<double>(r.errors) / static_cast<double>(r.bits);
    r.ber_bound = bound.p_total;
    r.ber_bound_half = bound.p_total_half;
    r.p_im = bound.p_im;
    r.p_qam = bound.p_qam;
    r.ber_index_sim = mu_i > 0 ? static_cast<double>(err_index) / static_cast<double>(frames * n_tx * mu_i) : 0.0;
    r.ber_const_sim = static_cast<double>(err_const) / static_cast<double>(frames * n_tx * mu_c);
    rows.push_back(r);
  }
  return rows;
}

std::vector<CrbRow> run_crb_table(const Scenario& scn) {
  scn.validate();
  std::vector<CrbRow> rows;
  for (double snr : scn.experiment.snr_grid_db)
    for (std::size_t g = 0; g < scn.scene.targets.size(); ++g)
      rows.push_back({snr, static_cast<int>(g),
                      crb(scn.scene.targets[g], scn.array, noise_power_from_snr(snr), scn.array.pulses_per_cpi)});
  return rows;
}

std::vector<ComplexityRow> run_complexity_table(const Scenario& scn) {
  scn.validate();
  const auto& e = scn.experiment;
  std::vector<ComplexityRow> rows;
  for (int n : e.antenna_sweep) {
    const auto un = static_cast<std::uint64_t>(n);
    const auto k = static_cast<std::uint64_t>(scn.array.pulses_per_cpi);
    const auto g = static_cast<std::uint64_t>(e.complexity_targets);
    const auto gb = static_cast<std::uint64_t>(e.complexity_bins);
    const auto sr = static_cast<std::uint64_t>(e.grid.range_steps);
    const auto st = static_cast<std::uint64_t>(e.grid.angle_steps);
    rows.push_back({n, complexity_count(SensingMethod::Ssmte, un, un, k, g, gb, sr, st),
                    complexity_count(SensingMethod::Lcsse, un, un, k, g, gb, sr, st)});
  }
  return rows;
}

std::vector<RateRow> run_rate_table(const Scenario& scn) {
  scn.validate();
  const auto& e = scn.experiment;
  std::vector<RateRow> rows;
  for (int n = e.rate_n_min; n <= e.rate_n_max; ++n)
    rows.push_back({n, bits_per_pulse(RateScheme::Ccie, n, n, scn.ccie.qam_order),
                    bits_per_pulse(RateScheme::Fopim, n, n, scn.ccie.qam_order)});
  return rows;
}

// ---- CSV ------------------------------------------------------------------

namespace {

std::ostringstream csv_stream() {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(12);
  return os;
}

} // namespace

std::string sense_csv(const std::vector<MetricRow>& rows) {
  auto os = csv_stream();
  os << "snr_db,estimator,rmse_angle_deg,rmse_range_m,rmse_vel_mps,hit_rate,crb_angle,crb_range,crb_vel,trials,misses\n";
  for (const auto& r : rows)
    os << r.snr_db << ',' << r.estimator << ',' << r.rmse_angle_deg << ',' << r.rmse_range_m << ','
       << r.rmse_velocity_mps << ',' << r.hit_rate << ',' << r.crb_angle_deg << ',' << r.crb_range_m << ','
       << r.crb_velocity_mps << ',' << r.trials << ',' << r.misses << '\n';
  return os.str();
}

std::string sense_detail_csv(const std::vector<TrialDetail>& rows) {
  auto os = csv_stream();
  os << "snr_db,estimator,trial,target,range_m,angle_deg,velocity_mps,err_range_m,err_angle_deg,err_vel_mps,"
        "trial_cost,hit\n";
  for (const auto& r : rows)
    os << r.snr_db << ',' << r.estimator << ',' << r.trial << ',' << r.target << ',' << r.range_m << ','
       << r.angle_deg << ',' << r.velocity_mps << ',' << r.err_range_m << ',' << r.err_angle_deg << ','
       << r.err_velocity_mps << ',' << r.trial_cost << ',' << (r.hit ? 1 : 0) << '\n';
  return os.str();
}

std::string ber_csv(const std::vector<BerRow>& rows) {
  auto os = csv_stream();
  os << "snr_db,ber_sim,ber_bound,p_im,p_qam,ber_index_sim,ber_const_sim,ber_bound_half,bits,errors\n";
  for (const auto& r : rows)
    os << r.snr_db << ',' << r.ber_sim << ',' << r.ber_bound << ',' << r.p_im << ',' << r.p_qam << ','
       << r.ber_index_sim << ',' << r.ber_const_sim << ',' << r.ber_bound_half << ',' << r.bits << ',' << r.errors
       << '\n';
  return os.str();
}

std::string crb_csv(const std::vector<CrbRow>& rows) {
  auto os = csv_stream();
  os << "snr_db,target,crb_range_m2,crb_angle_deg2,crb_doppler_hz2,crb_vel_mps2\n";
  for (const auto& r : rows)
    os << r.snr_db << ',' << r.target << ',' << r.crb.range_m2 << ',' << r.crb.angle_deg2() << ','
       << r.crb.doppler_hz2 << ',' << r.crb.velocity_mps2 << '\n';
  return os.str();
}

std::string complexity_csv(const std::vector<ComplexityRow>& rows) {
  auto os = csv_stream();
  os << "n,ssmte,lcsse,ratio\n";
  for (const auto& r : rows)
    os << r.n << ',' << r.ssmte << ',' << r.lcsse << ','
       << static_cast<double>(r.ssmte) / static_cast<double>(r.lcsse) << '\n';
  return os.str();
}

std::string rate_csv(const std::vector<RateRow>& rows) {
  auto os = csv_stream();
  os << "n,ccie_bits,fopim_bits\n";
  for (const auto& r : rows) os << r.n << ',' << r.ccie << ',' << r.fopim << '\n';
  return os.str();
}

std::string fodc_csv(const FodcReport& r) {
  auto os = csv_stream();
  os << "period_m,fundamental_period_m,max_range_m,default_bound_m,pass\n";
  os << r.period_m << ',' << r.fundamental_period_m << ',' << r.max_range_m << ',' << r.default_bound_m << ','
     << (r.pass ? "PASS" : "FAIL") << '\n';
  return os.str();
}

std::string git_blob_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1)
    throw RuntimeFailure("SHA-1 digest failed");
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

} // namespace fdaisac
