#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vendor_json.hpp"

namespace traj::cohort {

enum class EventKind { primary_dx, secondary_dx, procedure, medication, lab };

const char* to_string(EventKind k);
EventKind event_kind_from_string(const std::string& s);

struct ClinicalEvent {
  int day = 0;  // offset from record start
  EventKind kind = EventKind::secondary_dx;
  std::string code;
  std::optional<double> value;  // labs only
};

struct AdmissionSpan {
  int start_day = 0;
  int end_day = 0;
};

struct PatientRecord {
  std::string patient_id;
  std::vector<ClinicalEvent> events;  // sorted by day
  std::vector<AdmissionSpan> admissions;
  std::optional<int> true_phenotype;  // generator ground truth

  // count of windows with at least one event on a grid anchored at day 0
  int trajectory_length(int window_days, int i_max) const;
};

struct LengthDistribution {
  enum class Kind { uniform, fixed } kind = Kind::uniform;
  int min = 1;
  int max = 22;
  int value = 5;  // fixed
};

struct BinaryCodeSpec {
  EventKind kind = EventKind::secondary_dx;
  std::string code;
  std::vector<double> phenotype_rates;  // per-window Bernoulli, one per phenotype
};

struct LabCodeSpec {
  std::string code;
  std::vector<double> phenotype_means;
  std::vector<double> phenotype_sds;
  double rate = 0.5;  // per-window occurrence
  double clip_lo = 0.0;
  double clip_hi = 100.0;
};

struct IndexEventSpec {
  std::vector<std::string> codes;  // primary_dx codes to draw from
  double fraction = 0.0;
  int min_day = 90;
};

struct CohortConfig {
  int n_patients = 2000;
  int n_phenotypes = 4;
  int i_max = 22;
  int window_days = 90;
  LengthDistribution length_distribution;
  double length_phenotype_correlation = 0.0;  // rho in [0, 1]
  std::vector<double> phenotype_length_offsets;  // default: evenly spread
  std::vector<BinaryCodeSpec> binary_codes;
  std::vector<LabCodeSpec> lab_codes;
  double admission_rate = 0.3;  // per active window
  IndexEventSpec index_event;
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

CohortConfig cohort_config_from_json(const nlohmann::json& j);
nlohmann::json cohort_config_to_json(const CohortConfig& c);

// A small built-in benchmark-style config: 4 phenotypes, 60 binary codes,
// 6 lab codes, uniform lengths on [1, i_max].
CohortConfig default_synthetic_config();

PatientRecord generate_patient(const CohortConfig& config, int index);
std::vector<PatientRecord> generate_cohort(const CohortConfig& config);

// Adds one primary-diagnosis index event (day >= min_day) to a seeded
// fraction of patients; all existing events are preserved.
std::vector<PatientRecord> inject_index_events(
    const std::vector<PatientRecord>& cohort, const CohortConfig& config);

nlohmann::json patient_to_json(const PatientRecord& p);
PatientRecord patient_from_json(const nlohmann::json& j);

void write_jsonl(const std::vector<PatientRecord>& cohort, std::ostream& os);
std::vector<PatientRecord> read_jsonl(std::istream& is);
void write_jsonl_file(const std::vector<PatientRecord>& cohort,
                      const std::string& path);
std::vector<PatientRecord> read_jsonl_file(const std::string& path);

}  // namespace traj::cohort
