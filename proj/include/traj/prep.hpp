#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "traj/cohort.hpp"
#include "traj/mat.hpp"
#include "vendor_json.hpp"

namespace traj::prep {

inline constexpr double kContinuousMaskValue = -0.1;

struct WindowGrid {
  int window_days = 90;
  int i_max = 22;
  int anchor_day = 0;
};

// Feature axis layout: [binary codes by kind] [6 columns per lab code]
// [admission count, days-in-hospital fraction]. The continuous range
// covers labs and the two admin slots.
struct FeatureVocabulary {
  std::vector<std::string> primary_dx;
  std::vector<std::string> secondary_dx;
  std::vector<std::string> procedure;
  std::vector<std::string> medication;
  std::vector<std::string> labs;

  std::size_t n_binary() const {
    return primary_dx.size() + secondary_dx.size() + procedure.size() +
           medication.size();
  }
  std::size_t n_features() const { return n_binary() + 6 * labs.size() + 2; }
  std::size_t binary_offset(cohort::EventKind kind) const;
  // first of the 6 columns for lab index li
  std::size_t lab_offset(std::size_t li) const { return n_binary() + 6 * li; }
  std::size_t admin_offset() const { return n_binary() + 6 * labs.size(); }
  std::optional<std::size_t> binary_column(cohort::EventKind kind,
                                           const std::string& code) const;
  std::optional<std::size_t> lab_index(const std::string& code) const;

  // canonical empty-window row: 0 binary, -0.1 labs, 0 admin
  std::vector<double> empty_row() const;

  nlohmann::json to_json() const;
  static FeatureVocabulary from_json(const nlohmann::json& j);
};

// Empirical-rank transform per lab code, fitted on training values.
// Ties get the average of their ranks; ranks map to [0,1] via (r-1)/(n-1).
// Unseen values interpolate linearly between neighboring training values
// and clip to [0,1]. A code with no training values maps everything to the
// continuous mask value.
class RankNormalizer {
 public:
  void fit(const std::string& code, std::vector<double> values);
  double transform(const std::string& code, double value) const;
  bool has(const std::string& code) const;

  nlohmann::json to_json() const;
  static RankNormalizer from_json(const nlohmann::json& j);

 private:
  struct Table {
    std::vector<double> values;  // distinct, ascending
    std::vector<double> ranks;   // normalized average ranks, same size
  };
  std::map<std::string, Table> tables_;
};

struct TrajectoryTensor {
  std::string patient_id;
  Mat x;                       // i_max rows, n_features cols
  std::vector<char> presence;  // per window, 1 iff any event
  double n_w = 0.0;            // presence count / i_max
  std::optional<int> true_phenotype;

  int length() const;  // presence count
};

enum class TrajectoryMode { BEE, S2E, E2E, AFE, ALL };
const char* to_string(TrajectoryMode m);
TrajectoryMode trajectory_mode_from_string(const std::string& s);

struct IndexEventCriteria {
  std::vector<std::string> inclusion_prefixes;
  int min_prior_days = 90;

  bool short_admission_rule = true;
  int short_admission_max_days = 2;  // "under 48 hours"
  std::vector<std::string> short_admission_procedure_prefixes;
  int short_admission_window_days = 30;

  bool prior_secondary_rule = true;
  std::vector<std::string> prior_secondary_prefixes;

  bool medication_rule = true;
  std::vector<std::string> medication_prefixes;
  std::vector<double> medication_doses;  // empty = any dose

  struct MeasurementRule {
    std::string lab_prefix;
    std::optional<double> value_below;  // absent = any recorded value
  };
  bool measurement_rule = true;
  std::vector<MeasurementRule> measurement_rules;

  void validate() const;
  nlohmann::json to_json() const;
  static IndexEventCriteria from_json(const nlohmann::json& j);

  // Appendix-style acute heart failure rule set.
  static IndexEventCriteria heart_failure();
  // Inclusion prefixes only; exclusion rules disabled.
  static IndexEventCriteria stroke();
};

FeatureVocabulary build_vocabulary(
    const std::vector<cohort::PatientRecord>& cohort,
    double min_frequency = 0.01);

RankNormalizer fit_rank_normalizer(
    const std::vector<cohort::PatientRecord>& cohort,
    const FeatureVocabulary& vocab);

// Feature vector for the events of one window. `events` must lie inside
// [day_lo, day_lo + window_days). Admissions are clipped to the window.
std::vector<double> aggregate_window(
    const std::vector<const cohort::ClinicalEvent*>& events,
    const std::vector<cohort::AdmissionSpan>& admissions, int day_lo,
    int window_days, const FeatureVocabulary& vocab,
    const RankNormalizer& normalizer);

TrajectoryTensor assemble_sequence(const cohort::PatientRecord& patient,
                                   const WindowGrid& grid,
                                   const FeatureVocabulary& vocab,
                                   const RankNormalizer& normalizer);

std::optional<int> select_index_event(const cohort::PatientRecord& patient,
                                      const IndexEventCriteria& criteria);

// Shifts the assembled rows according to the trajectory mode. index_window
// is the row of the index event on the assembled grid; required for all
// modes except ALL.
TrajectoryTensor align_trajectory(const TrajectoryTensor& tensor,
                                  std::optional<int> index_window,
                                  TrajectoryMode mode,
                                  const FeatureVocabulary& vocab);

struct TensorBundle {
  WindowGrid grid;
  FeatureVocabulary vocab;
  RankNormalizer normalizer;
  std::vector<TrajectoryTensor> tensors;
};

// Binary matrix file plus sidecar JSON manifest.
void save_bundle(const TensorBundle& bundle, const std::string& path_prefix);
TensorBundle load_bundle(const std::string& path_prefix);

}  // namespace traj::prep
