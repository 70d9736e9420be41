#ifndef FDAISAC_HARNESS_HPP
#define FDAISAC_HARNESS_HPP

#include "fdaisac/array_model.hpp"
#include "fdaisac/ccie_modem.hpp"
#include "fdaisac/scene_synth.hpp"
#include "fdaisac/sensing.hpp"
#include "fdaisac/theory.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace fdaisac {

enum class ExperimentKind { Sense, CommBer, Crb, Complexity, FodcCheck, Rate };

const char* to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& s);

/// Coefficient-vector settings; an explicit vector overrides generation.
struct CcieSettings {
  int count = 4;
  int qam_order = 4;
  std::uint64_t seed = 7;
  std::optional<CVector> coeffs;

  CcieConfig build() const;
};

struct ExperimentSettings {
  ExperimentKind kind = ExperimentKind::Sense;
  std::vector<double> snr_grid_db{5.0};
  int trials = 200;
  std::uint64_t master_seed = 1;
  SearchGrid grid;
  std::vector<SensingMethod> methods{SensingMethod::Ssmte, SensingMethod::Lcsse};
  DopplerTranspose transpose = DopplerTranspose::Conjugate;
  // communication
  int comm_rx_antennas = 2;
  std::int64_t min_bits_per_point = 100000;
  // fodc-check; zero means the c T / 2 default
  double max_range_m = 0.0;
  // complexity table
  std::vector<int> antenna_sweep{4, 6, 8, 10};
  int complexity_targets = 3;
  int complexity_bins = 3;
  // rate table
  int rate_n_min = 2;
  int rate_n_max = 16;

  void validate() const;
};

struct Scenario {
  ArrayConfig array;
  CcieSettings ccie;
  Scene scene;
  ExperimentSettings experiment;

  void validate() const;
};

/// Scenario with the three-target simulation defaults (FODC offsets, N = M = 6).
Scenario default_scenario();

nlohmann::json to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);

nlohmann::json coeffs_to_json(const CVector& c);
CVector coeffs_from_json(const nlohmann::json& j);

/// One-to-one assignment of estimates to truth minimizing the summed
/// |d angle| deg + |d range| m + |d velocity| m/s.
struct Matching {
  std::vector<int> estimate_for_truth;  ///< -1 when unmatched
  std::vector<double> cost;             ///< per truth; NaN when unmatched
  double total_cost = 0.0;
  int misses = 0;
};

double match_cost(const EstimatedTarget& e, const Target& t);
Matching associate(const std::vector<EstimatedTarget>& estimates, const std::vector<Target>& truth);

inline constexpr double kHitThreshold = 0.2;

struct MetricRow {
  double snr_db = 0.0;
  std::string estimator;
  double rmse_angle_deg = 0.0;
  double rmse_range_m = 0.0;
  double rmse_velocity_mps = 0.0;
  double hit_rate = 0.0;
  double crb_angle_deg = 0.0;   ///< mean root-CRB over targets
  double crb_range_m = 0.0;
  double crb_velocity_mps = 0.0;
  int trials = 0;
  int misses = 0;
};

struct TrialDetail {
  double snr_db = 0.0;
  std::string estimator;
  int trial = 0;
  int target = 0;
  double range_m = 0.0;
  double angle_deg = 0.0;
  double velocity_mps = 0.0;
  double err_range_m = 0.0;
  double err_angle_deg = 0.0;
  double err_velocity_mps = 0.0;
  double trial_cost = 0.0;
  bool hit = false;
};

struct SensingRun {
  std::vector<MetricRow> rows;
  std::vector<TrialDetail> details;
};

/// Per SNR and estimator: Monte-Carlo RMSE and hit rate. Trial t draws from
/// an rng seeded with master_seed ^ t; all estimators see the same CPI.
SensingRun run_sensing_experiment(const Scenario& scn);

struct BerRow {
  double snr_db = 0.0;
  double ber_sim = 0.0;
  double ber_bound = 0.0;
  double p_im = 0.0;
  double p_qam = 0.0;
  double ber_index_sim = 0.0;
  double ber_const_sim = 0.0;
  double ber_bound_half = 0.0;
  std::int64_t bits = 0;
  std::int64_t errors = 0;
};

/// Monte-Carlo BER of the ML receiver next to the analytic bound. Frame f
/// draws from master_seed ^ f, so every SNR point reuses the same channels.
std::vector<BerRow> run_comm_ber(const Scenario& scn);

struct CrbRow {
  double snr_db = 0.0;
  int target = 0;
  CrbReport crb;
};
std::vector<CrbRow> run_crb_table(const Scenario& scn);

struct ComplexityRow {
  int n = 0;
  std::uint64_t ssmte = 0;
  std::uint64_t lcsse = 0;
};
std::vector<ComplexityRow> run_complexity_table(const Scenario& scn);

struct RateRow {
  int n = 0;
  std::int64_t ccie = 0;
  std::int64_t fopim = 0;
};
std::vector<RateRow> run_rate_table(const Scenario& scn);

// CSV emitters: header row, '.' decimal point, classic locale.
std::string sense_csv(const std::vector<MetricRow>& rows);
std::string sense_detail_csv(const std::vector<TrialDetail>& rows);
std::string ber_csv(const std::vector<BerRow>& rows);
std::string crb_csv(const std::vector<CrbRow>& rows);
std::string complexity_csv(const std::vector<ComplexityRow>& rows);
std::string rate_csv(const std::vector<RateRow>& rows);
std::string fodc_csv(const FodcReport& r);

/// Git blob hash ("blob <size>\0<content>", SHA-1, hex) of a string.
std::string git_blob_hash(const std::string& content);

} // namespace fdaisac

#endif // FDAISAC_HARNESS_HPP
