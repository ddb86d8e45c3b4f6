#include "traj/prep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

namespace traj::prep {

using cohort::ClinicalEvent;
using cohort::EventKind;
using cohort::PatientRecord;

namespace {

bool has_prefix(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

bool matches_any_prefix(const std::string& s,
                        const std::vector<std::string>& prefixes) {
  for (const auto& p : prefixes)
    if (has_prefix(s, p)) return true;
  return false;
}

double median_of_sorted(const std::vector<double>& v) {
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::size_t FeatureVocabulary::binary_offset(EventKind kind) const {
  switch (kind) {
    case EventKind::primary_dx: return 0;
    case EventKind::secondary_dx: return primary_dx.size();
    case EventKind::procedure: return primary_dx.size() + secondary_dx.size();
    case EventKind::medication:
      return primary_dx.size() + secondary_dx.size() + procedure.size();
    default: throw std::invalid_argument("binary_offset: not a binary kind");
  }
}

std::optional<std::size_t> FeatureVocabulary::binary_column(
    EventKind kind, const std::string& code) const {
  const std::vector<std::string>* list = nullptr;
  switch (kind) {
    case EventKind::primary_dx: list = &primary_dx; break;
    case EventKind::secondary_dx: list = &secondary_dx; break;
    case EventKind::procedure: list = &procedure; break;
    case EventKind::medication: list = &medication; break;
    default: return std::nullopt;
  }
  auto it = std::lower_bound(list->begin(), list->end(), code);
  if (it == list->end() || *it != code) return std::nullopt;
  return binary_offset(kind) +
         static_cast<std::size_t>(it - list->begin());
}

std::optional<std::size_t> FeatureVocabulary::lab_index(
    const std::string& code) const {
  auto it = std::lower_bound(labs.begin(), labs.end(), code);
  if (it == labs.end() || *it != code) return std::nullopt;
  return static_cast<std::size_t>(it - labs.begin());
}

std::vector<double> FeatureVocabulary::empty_row() const {
  std::vector<double> row(n_features(), 0.0);
  for (std::size_t li = 0; li < labs.size(); ++li)
    for (std::size_t k = 0; k < 6; ++k)
      row[lab_offset(li) + k] = kContinuousMaskValue;
  return row;
}

nlohmann::json FeatureVocabulary::to_json() const {
  return {{"primary_dx", primary_dx},   {"secondary_dx", secondary_dx},
          {"procedure", procedure},     {"medication", medication},
          {"labs", labs}};
}

FeatureVocabulary FeatureVocabulary::from_json(const nlohmann::json& j) {
  FeatureVocabulary v;
  v.primary_dx = j.at("primary_dx").get<std::vector<std::string>>();
  v.secondary_dx = j.at("secondary_dx").get<std::vector<std::string>>();
  v.procedure = j.at("procedure").get<std::vector<std::string>>();
  v.medication = j.at("medication").get<std::vector<std::string>>();
  v.labs = j.at("labs").get<std::vector<std::string>>();
  return v;
}

void RankNormalizer::fit(const std::string& code, std::vector<double> values) {
  Table t;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && values[j] == values[i]) ++j;
    // 1-based ranks i+1 .. j, average (i+1+j)/2
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    const double norm =
        n == 1 ? 0.5 : (avg_rank - 1.0) / static_cast<double>(n - 1);
    t.values.push_back(values[i]);
    t.ranks.push_back(norm);
    i = j;
  }
  tables_[code] = std::move(t);
}

bool RankNormalizer::has(const std::string& code) const {
  auto it = tables_.find(code);
  return it != tables_.end() && !it->second.values.empty();
}

double RankNormalizer::transform(const std::string& code, double value) const {
  auto it = tables_.find(code);
  if (it == tables_.end() || it->second.values.empty())
    return kContinuousMaskValue;
  const Table& t = it->second;
  if (value <= t.values.front()) {
    return value == t.values.front() ? t.ranks.front() : 0.0;
  }
  if (value >= t.values.back()) {
    return value == t.values.back() ? t.ranks.back() : 1.0;
  }
  const auto hi =
      std::lower_bound(t.values.begin(), t.values.end(), value);
  const std::size_t h = static_cast<std::size_t>(hi - t.values.begin());
  if (t.values[h] == value) return t.ranks[h];
  const std::size_t l = h - 1;
  const double frac = (value - t.values[l]) / (t.values[h] - t.values[l]);
  return std::clamp(t.ranks[l] + frac * (t.ranks[h] - t.ranks[l]), 0.0, 1.0);
}

nlohmann::json RankNormalizer::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [code, t] : tables_)
    j[code] = {{"values", t.values}, {"ranks", t.ranks}};
  return j;
}

RankNormalizer RankNormalizer::from_json(const nlohmann::json& j) {
  RankNormalizer n;
  for (auto it = j.begin(); it != j.end(); ++it) {
    Table t;
    t.values = it.value().at("values").get<std::vector<double>>();
    t.ranks = it.value().at("ranks").get<std::vector<double>>();
    n.tables_[it.key()] = std::move(t);
  }
  return n;
}

int TrajectoryTensor::length() const {
  return static_cast<int>(std::count(presence.begin(), presence.end(), 1));
}

const char* to_string(TrajectoryMode m) {
  switch (m) {
    case TrajectoryMode::BEE: return "BEE";
    case TrajectoryMode::S2E: return "S2E";
    case TrajectoryMode::E2E: return "E2E";
    case TrajectoryMode::AFE: return "AFE";
    case TrajectoryMode::ALL: return "ALL";
  }
  throw std::logic_error("bad TrajectoryMode");
}

TrajectoryMode trajectory_mode_from_string(const std::string& s) {
  if (s == "BEE") return TrajectoryMode::BEE;
  if (s == "S2E") return TrajectoryMode::S2E;
  if (s == "E2E") return TrajectoryMode::E2E;
  if (s == "AFE") return TrajectoryMode::AFE;
  if (s == "ALL") return TrajectoryMode::ALL;
  throw std::invalid_argument("unknown trajectory mode: " + s);
}

void IndexEventCriteria::validate() const {
  if (inclusion_prefixes.empty())
    throw std::invalid_argument("criteria need at least one inclusion prefix");
}

nlohmann::json IndexEventCriteria::to_json() const {
  nlohmann::json j;
  j["inclusion_prefixes"] = inclusion_prefixes;
  j["min_prior_days"] = min_prior_days;
  j["short_admission_rule"] = short_admission_rule;
  j["short_admission_max_days"] = short_admission_max_days;
  j["short_admission_procedure_prefixes"] = short_admission_procedure_prefixes;
  j["short_admission_window_days"] = short_admission_window_days;
  j["prior_secondary_rule"] = prior_secondary_rule;
  j["prior_secondary_prefixes"] = prior_secondary_prefixes;
  j["medication_rule"] = medication_rule;
  j["medication_prefixes"] = medication_prefixes;
  j["medication_doses"] = medication_doses;
  j["measurement_rule"] = measurement_rule;
  j["measurement_rules"] = nlohmann::json::array();
  for (const auto& m : measurement_rules) {
    nlohmann::json jm{{"lab_prefix", m.lab_prefix}};
    if (m.value_below) jm["value_below"] = *m.value_below;
    j["measurement_rules"].push_back(std::move(jm));
  }
  return j;
}

IndexEventCriteria IndexEventCriteria::from_json(const nlohmann::json& j) {
  IndexEventCriteria c;
  c.inclusion_prefixes =
      j.at("inclusion_prefixes").get<std::vector<std::string>>();
  c.min_prior_days = j.value("min_prior_days", c.min_prior_days);
  c.short_admission_rule =
      j.value("short_admission_rule", c.short_admission_rule);
  c.short_admission_max_days =
      j.value("short_admission_max_days", c.short_admission_max_days);
  c.short_admission_procedure_prefixes = j.value(
      "short_admission_procedure_prefixes", std::vector<std::string>{});
  c.short_admission_window_days =
      j.value("short_admission_window_days", c.short_admission_window_days);
  c.prior_secondary_rule =
      j.value("prior_secondary_rule", c.prior_secondary_rule);
  c.prior_secondary_prefixes =
      j.value("prior_secondary_prefixes", std::vector<std::string>{});
  c.medication_rule = j.value("medication_rule", c.medication_rule);
  c.medication_prefixes =
      j.value("medication_prefixes", std::vector<std::string>{});
  c.medication_doses = j.value("medication_doses", std::vector<double>{});
  c.measurement_rule = j.value("measurement_rule", c.measurement_rule);
  for (const auto& jm : j.value("measurement_rules", nlohmann::json::array())) {
    MeasurementRule m;
    m.lab_prefix = jm.at("lab_prefix").get<std::string>();
    if (jm.contains("value_below"))
      m.value_below = jm.at("value_below").get<double>();
    c.measurement_rules.push_back(std::move(m));
  }
  return c;
}

IndexEventCriteria IndexEventCriteria::heart_failure() {
  IndexEventCriteria c;
  c.inclusion_prefixes = {"I50", "I11.0", "I13.0", "I13.2"};
  c.short_admission_procedure_prefixes = {"K59", "K60", "K61",
                                          "K72", "K73", "K74"};
  c.prior_secondary_prefixes = {"I50", "I11.0", "I13.0", "I13.2"};
  c.medication_prefixes = {"eplerenone", "sacubitril-valsartan",
                           "spironolactone"};
  c.medication_doses = {25.0, 50.0};
  c.measurement_rules = {{"NYHA", std::nullopt}, {"EF", 40.0}};
  return c;
}

IndexEventCriteria IndexEventCriteria::stroke() {
  IndexEventCriteria c;
  c.inclusion_prefixes = {"I61", "I63", "I64"};
  c.short_admission_rule = false;
  c.prior_secondary_rule = false;
  c.medication_rule = false;
  c.measurement_rule = false;
  return c;
}

FeatureVocabulary build_vocabulary(const std::vector<PatientRecord>& cohort,
                                   double min_frequency) {
  if (cohort.empty()) throw std::invalid_argument("build_vocabulary: empty cohort");
  std::map<std::pair<EventKind, std::string>, std::size_t> counts;
  for (const auto& p : cohort) {
    std::set<std::pair<EventKind, std::string>> seen;
    for (const auto& e : p.events) seen.insert({e.kind, e.code});
    for (const auto& k : seen) ++counts[k];
  }
  const double n = static_cast<double>(cohort.size());
  FeatureVocabulary v;
  for (const auto& [key, cnt] : counts) {
    if (static_cast<double>(cnt) / n < min_frequency) continue;
    switch (key.first) {
      case EventKind::primary_dx: v.primary_dx.push_back(key.second); break;
      case EventKind::secondary_dx: v.secondary_dx.push_back(key.second); break;
      case EventKind::procedure: v.procedure.push_back(key.second); break;
      case EventKind::medication: v.medication.push_back(key.second); break;
      case EventKind::lab: v.labs.push_back(key.second); break;
    }
  }
  // map iteration is already sorted; keep the invariant explicit
  std::sort(v.primary_dx.begin(), v.primary_dx.end());
  std::sort(v.secondary_dx.begin(), v.secondary_dx.end());
  std::sort(v.procedure.begin(), v.procedure.end());
  std::sort(v.medication.begin(), v.medication.end());
  std::sort(v.labs.begin(), v.labs.end());
  return v;
}

RankNormalizer fit_rank_normalizer(const std::vector<PatientRecord>& cohort,
                                   const FeatureVocabulary& vocab) {
  std::map<std::string, std::vector<double>> values;
  for (const auto& code : vocab.labs) values[code] = {};
  for (const auto& p : cohort)
    for (const auto& e : p.events)
      if (e.kind == EventKind::lab && e.value) {
        auto it = values.find(e.code);
        if (it != values.end()) it->second.push_back(*e.value);
      }
  RankNormalizer n;
  for (auto& [code, vals] : values) n.fit(code, std::move(vals));
  return n;
}

std::vector<double> aggregate_window(
    const std::vector<const ClinicalEvent*>& events,
    const std::vector<cohort::AdmissionSpan>& admissions, int day_lo,
    int window_days, const FeatureVocabulary& vocab,
    const RankNormalizer& normalizer) {
  std::vector<double> row = vocab.empty_row();
  const int day_hi = day_lo + window_days - 1;

  struct LabAcc {
    std::vector<double> values;
    double last = 0.0;
    int last_day = -1;
  };
  std::map<std::size_t, LabAcc> lab_acc;

  for (const ClinicalEvent* e : events) {
    if (e->day < day_lo || e->day > day_hi)
      throw std::invalid_argument("aggregate_window: event outside window");
    if (e->kind == EventKind::lab) {
      auto li = vocab.lab_index(e->code);
      if (!li || !e->value) continue;
      const double nv = normalizer.transform(e->code, *e->value);
      LabAcc& acc = lab_acc[*li];
      acc.values.push_back(nv);
      if (e->day >= acc.last_day) {  // record order breaks day ties
        acc.last_day = e->day;
        acc.last = nv;
      }
    } else {
      auto col = vocab.binary_column(e->kind, e->code);
      if (col) row[*col] = 1.0;
    }
  }

  for (auto& [li, acc] : lab_acc) {
    std::vector<double> sorted = acc.values;
    std::sort(sorted.begin(), sorted.end());
    const double med = median_of_sorted(sorted);
    std::vector<double> dev;
    dev.reserve(sorted.size());
    for (double v : sorted) dev.push_back(std::abs(v - med));
    std::sort(dev.begin(), dev.end());
    double mean = 0.0;
    for (double v : sorted) mean += v;
    mean /= static_cast<double>(sorted.size());

    const std::size_t off = vocab.lab_offset(li);
    row[off + 0] = sorted.front();
    row[off + 1] = sorted.back();
    row[off + 2] = mean;
    row[off + 3] = median_of_sorted(dev);
    row[off + 4] = acc.last;
    // count scaled to [0,1] by a fixed divisor
    row[off + 5] =
        std::min(1.0, static_cast<double>(sorted.size()) / 10.0);
  }

  int adm_count = 0;
  int adm_days = 0;
  for (const auto& a : admissions) {
    const int lo = std::max(a.start_day, day_lo);
    const int hi = std::min(a.end_day, day_hi);
    if (lo > hi) continue;
    ++adm_count;
    adm_days += hi - lo + 1;
  }
  const std::size_t aoff = vocab.admin_offset();
  row[aoff] = std::min(1.0, static_cast<double>(adm_count) / 4.0);
  row[aoff + 1] =
      std::min(1.0, static_cast<double>(adm_days) / window_days);
  return row;
}

TrajectoryTensor assemble_sequence(const PatientRecord& patient,
                                   const WindowGrid& grid,
                                   const FeatureVocabulary& vocab,
                                   const RankNormalizer& normalizer) {
  if (grid.i_max < 1 || grid.window_days <= 0)
    throw std::invalid_argument("assemble_sequence: invalid grid");
  if (patient.events.empty())
    throw std::invalid_argument("assemble_sequence: patient " +
                                patient.patient_id + " has no events");
  int anchor = grid.anchor_day;
  if (anchor < 0) {
    anchor = patient.events.front().day;
    for (const auto& e : patient.events) anchor = std::min(anchor, e.day);
  }

  std::vector<std::vector<const ClinicalEvent*>> per_window(
      static_cast<std::size_t>(grid.i_max));
  for (const auto& e : patient.events) {
    const int d = e.day - anchor;
    if (d < 0) continue;
    const int w = d / grid.window_days;
    if (w < grid.i_max) per_window[static_cast<std::size_t>(w)].push_back(&e);
  }

  // admissions shifted to the grid origin
  std::vector<cohort::AdmissionSpan> adm = patient.admissions;
  for (auto& a : adm) {
    a.start_day -= anchor;
    a.end_day -= anchor;
  }

  TrajectoryTensor t;
  t.patient_id = patient.patient_id;
  t.true_phenotype = patient.true_phenotype;
  t.x = Mat(static_cast<std::size_t>(grid.i_max), vocab.n_features());
  t.presence.assign(static_cast<std::size_t>(grid.i_max), 0);
  const std::vector<double> empty = vocab.empty_row();
  for (int w = 0; w < grid.i_max; ++w) {
    const auto& evs = per_window[static_cast<std::size_t>(w)];
    std::vector<double> row;
    if (evs.empty()) {
      row = empty;
    } else {
      t.presence[static_cast<std::size_t>(w)] = 1;
      row = aggregate_window(evs, adm, w * grid.window_days, grid.window_days,
                             vocab, normalizer);
    }
    std::copy(row.begin(), row.end(), t.x.row(static_cast<std::size_t>(w)));
  }
  t.n_w = static_cast<double>(t.length()) / static_cast<double>(grid.i_max);
  return t;
}

std::optional<int> select_index_event(const PatientRecord& patient,
                                      const IndexEventCriteria& criteria) {
  criteria.validate();
  if (patient.events.empty()) return std::nullopt;

  const ClinicalEvent* index = nullptr;
  int first_day = patient.events.front().day;
  for (const auto& e : patient.events) {
    first_day = std::min(first_day, e.day);
    if (!index && e.kind == EventKind::primary_dx &&
        matches_any_prefix(e.code, criteria.inclusion_prefixes))
      index = &e;
  }
  if (!index) return std::nullopt;
  const int d = index->day;
  if (d - first_day < criteria.min_prior_days) return std::nullopt;

  if (criteria.short_admission_rule) {
    for (const auto& a : patient.admissions) {
      if (a.start_day > d || a.end_day < d) continue;
      if (a.end_day - a.start_day >= criteria.short_admission_max_days)
        continue;
      for (const auto& e : patient.events)
        if (e.kind == EventKind::procedure && e.day > d &&
            e.day <= d + criteria.short_admission_window_days &&
            matches_any_prefix(e.code,
                               criteria.short_admission_procedure_prefixes))
          return std::nullopt;
    }
  }
  if (criteria.prior_secondary_rule) {
    for (const auto& e : patient.events)
      if (e.kind == EventKind::secondary_dx && e.day < d &&
          matches_any_prefix(e.code, criteria.prior_secondary_prefixes))
        return std::nullopt;
  }
  if (criteria.medication_rule) {
    for (const auto& e : patient.events) {
      if (e.kind != EventKind::medication ||
          !matches_any_prefix(e.code, criteria.medication_prefixes))
        continue;
      if (criteria.medication_doses.empty() || !e.value) return std::nullopt;
      for (double dose : criteria.medication_doses)
        if (*e.value == dose) return std::nullopt;
    }
  }
  if (criteria.measurement_rule) {
    for (const auto& e : patient.events) {
      if (e.kind != EventKind::lab) continue;
      for (const auto& m : criteria.measurement_rules) {
        if (!has_prefix(e.code, m.lab_prefix)) continue;
        if (!m.value_below || (e.value && *e.value < *m.value_below))
          return std::nullopt;
      }
    }
  }
  return d;
}

TrajectoryTensor align_trajectory(const TrajectoryTensor& tensor,
                                  std::optional<int> index_window,
                                  TrajectoryMode mode,
                                  const FeatureVocabulary& vocab) {
  const int i_max = static_cast<int>(tensor.x.rows());
  if (mode != TrajectoryMode::ALL && !index_window)
    throw std::invalid_argument("align_trajectory: mode " +
                                std::string(to_string(mode)) +
                                " requires an index event");
  int first = 0, last = i_max - 1;  // inclusive source range, kept in order
  if (mode != TrajectoryMode::ALL) {
    const int iw = std::clamp(*index_window, 0, i_max - 1);
    switch (mode) {
      case TrajectoryMode::E2E: first = iw; break;
      case TrajectoryMode::AFE: first = iw + 1; break;
      case TrajectoryMode::BEE: last = iw - 1; break;
      case TrajectoryMode::S2E: last = iw; break;
      default: break;
    }
  }

  TrajectoryTensor out;
  out.patient_id = tensor.patient_id;
  out.true_phenotype = tensor.true_phenotype;
  out.x = Mat(tensor.x.rows(), tensor.x.cols());
  out.presence.assign(tensor.presence.size(), 0);
  const std::vector<double> empty = vocab.empty_row();
  for (int r = 0; r < i_max; ++r)
    std::copy(empty.begin(), empty.end(), out.x.row(static_cast<std::size_t>(r)));

  int dst = 0;
  for (int src = std::max(0, first); src <= last && src < i_max; ++src, ++dst) {
    std::copy(tensor.x.row(static_cast<std::size_t>(src)),
              tensor.x.row(static_cast<std::size_t>(src)) + tensor.x.cols(),
              out.x.row(static_cast<std::size_t>(dst)));
    out.presence[static_cast<std::size_t>(dst)] =
        tensor.presence[static_cast<std::size_t>(src)];
  }
  out.n_w = static_cast<double>(out.length()) / static_cast<double>(i_max);
  return out;
}

void save_bundle(const TensorBundle& bundle, const std::string& path_prefix) {
  const std::string bin_path = path_prefix + ".bin";
  const std::string manifest_path = path_prefix + ".json";
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open for write: " + bin_path);
  for (const auto& t : bundle.tensors)
    bin.write(reinterpret_cast<const char*>(t.x.data()),
              static_cast<std::streamsize>(t.x.size() * sizeof(double)));
  bin.close();

  nlohmann::json j;
  j["grid"] = {{"window_days", bundle.grid.window_days},
               {"i_max", bundle.grid.i_max},
               {"anchor_day", bundle.grid.anchor_day}};
  j["vocab"] = bundle.vocab.to_json();
  j["normalizer"] = bundle.normalizer.to_json();
  j["n_features"] = bundle.vocab.n_features();
  j["data_file"] = bin_path.substr(bin_path.find_last_of('/') + 1);
  j["patients"] = nlohmann::json::array();
  for (const auto& t : bundle.tensors) {
    nlohmann::json jp;
    jp["patient_id"] = t.patient_id;
    jp["n_w"] = t.n_w;
    std::string pres(t.presence.size(), '0');
    for (std::size_t i = 0; i < t.presence.size(); ++i)
      if (t.presence[i]) pres[i] = '1';
    jp["presence"] = pres;
    if (t.true_phenotype) jp["true_phenotype"] = *t.true_phenotype;
    j["patients"].push_back(std::move(jp));
  }
  std::ofstream mf(manifest_path);
  if (!mf) throw std::runtime_error("cannot open for write: " + manifest_path);
  mf << j.dump(2) << '\n';
}

TensorBundle load_bundle(const std::string& path_prefix) {
  const std::string bin_path = path_prefix + ".bin";
  const std::string manifest_path = path_prefix + ".json";
  std::ifstream mf(manifest_path);
  if (!mf) throw std::runtime_error("cannot open: " + manifest_path);
  nlohmann::json j;
  mf >> j;

  TensorBundle b;
  b.grid.window_days = j.at("grid").at("window_days").get<int>();
  b.grid.i_max = j.at("grid").at("i_max").get<int>();
  b.grid.anchor_day = j.at("grid").at("anchor_day").get<int>();
  b.vocab = FeatureVocabulary::from_json(j.at("vocab"));
  b.normalizer = RankNormalizer::from_json(j.at("normalizer"));
  const std::size_t F = j.at("n_features").get<std::size_t>();
  if (F != b.vocab.n_features())
    throw std::runtime_error("load_bundle: feature count mismatch");

  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open: " + bin_path);
  for (const auto& jp : j.at("patients")) {
    TrajectoryTensor t;
    t.patient_id = jp.at("patient_id").get<std::string>();
    t.n_w = jp.at("n_w").get<double>();
    const std::string pres = jp.at("presence").get<std::string>();
    t.presence.assign(pres.size(), 0);
    for (std::size_t i = 0; i < pres.size(); ++i)
      if (pres[i] == '1') t.presence[i] = 1;
    if (jp.contains("true_phenotype"))
      t.true_phenotype = jp.at("true_phenotype").get<int>();
    t.x = Mat(static_cast<std::size_t>(b.grid.i_max), F);
    bin.read(reinterpret_cast<char*>(t.x.data()),
             static_cast<std::streamsize>(t.x.size() * sizeof(double)));
    if (!bin) throw std::runtime_error("load_bundle: truncated data file");
    b.tensors.push_back(std::move(t));
  }
  return b;
}

}  // namespace traj::prep
