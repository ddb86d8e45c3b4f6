#include "traj/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "traj/rng.hpp"

namespace traj::cohort {

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::primary_dx: return "primary_dx";
    case EventKind::secondary_dx: return "secondary_dx";
    case EventKind::procedure: return "procedure";
    case EventKind::medication: return "medication";
    case EventKind::lab: return "lab";
  }
  throw std::logic_error("bad EventKind");
}

EventKind event_kind_from_string(const std::string& s) {
  if (s == "primary_dx") return EventKind::primary_dx;
  if (s == "secondary_dx") return EventKind::secondary_dx;
  if (s == "procedure") return EventKind::procedure;
  if (s == "medication") return EventKind::medication;
  if (s == "lab") return EventKind::lab;
  throw std::invalid_argument("unknown event kind: " + s);
}

int PatientRecord::trajectory_length(int window_days, int i_max) const {
  std::vector<char> has(static_cast<std::size_t>(i_max), 0);
  for (const auto& e : events) {
    const int w = e.day / window_days;
    if (w >= 0 && w < i_max) has[static_cast<std::size_t>(w)] = 1;
  }
  return static_cast<int>(std::count(has.begin(), has.end(), 1));
}

void CohortConfig::validate() const {
  if (n_patients <= 0) throw std::invalid_argument("n_patients must be > 0");
  if (n_phenotypes <= 0) throw std::invalid_argument("n_phenotypes must be > 0");
  if (i_max < 1) throw std::invalid_argument("i_max must be >= 1");
  if (window_days <= 0) throw std::invalid_argument("window_days must be > 0");
  if (length_phenotype_correlation < 0.0 || length_phenotype_correlation > 1.0)
    throw std::invalid_argument("length_phenotype_correlation must be in [0,1]");
  if (length_distribution.kind == LengthDistribution::Kind::fixed) {
    if (length_distribution.value < 1 || length_distribution.value > i_max)
      throw std::invalid_argument("length_distribution value invalid");
  } else if (length_distribution.min < 1 || length_distribution.max > i_max ||
             length_distribution.min > length_distribution.max) {
    throw std::invalid_argument("length_distribution range invalid");
  }
  for (const auto& b : binary_codes) {
    if (b.code.empty()) throw std::invalid_argument("binary code empty");
    if (static_cast<int>(b.phenotype_rates.size()) != n_phenotypes)
      throw std::invalid_argument("binary code " + b.code +
                                  ": rate table size != n_phenotypes");
    for (double r : b.phenotype_rates)
      if (r < 0.0 || r > 1.0)
        throw std::invalid_argument("binary code " + b.code +
                                    ": rate out of [0,1]");
  }
  for (const auto& l : lab_codes) {
    if (l.code.empty()) throw std::invalid_argument("lab code empty");
    if (static_cast<int>(l.phenotype_means.size()) != n_phenotypes ||
        static_cast<int>(l.phenotype_sds.size()) != n_phenotypes)
      throw std::invalid_argument("lab code " + l.code +
                                  ": mean/sd table size != n_phenotypes");
    for (double sd : l.phenotype_sds)
      if (sd <= 0.0)
        throw std::invalid_argument("lab code " + l.code + ": sd must be > 0");
    if (l.rate < 0.0 || l.rate > 1.0)
      throw std::invalid_argument("lab code " + l.code + ": rate out of [0,1]");
  }
  if (index_event.fraction < 0.0 || index_event.fraction > 1.0)
    throw std::invalid_argument("index_event.fraction out of [0,1]");
}

namespace {

int sample_length(const CohortConfig& cfg, int phenotype, Rng& rng) {
  const auto& d = cfg.length_distribution;
  int base = d.kind == LengthDistribution::Kind::fixed
                 ? d.value
                 : static_cast<int>(rng.uniform_int(d.min, d.max));
  double offset = 0.0;
  const double rho = cfg.length_phenotype_correlation;
  if (rho > 0.0) {
    if (!cfg.phenotype_length_offsets.empty()) {
      offset = cfg.phenotype_length_offsets[static_cast<std::size_t>(
          phenotype % static_cast<int>(cfg.phenotype_length_offsets.size()))];
    } else {
      // evenly spread offsets centered at 0, spanning about half of i_max
      const double span = cfg.i_max / 2.0;
      offset = (phenotype - (cfg.n_phenotypes - 1) / 2.0) /
               std::max(1, cfg.n_phenotypes - 1) * span;
    }
  }
  const int shifted = base + static_cast<int>(std::lround(rho * offset));
  return std::clamp(shifted, 1, cfg.i_max);
}

}  // namespace

PatientRecord generate_patient(const CohortConfig& config, int index) {
  char idbuf[16];
  std::snprintf(idbuf, sizeof(idbuf), "P%06d", index);
  PatientRecord p;
  p.patient_id = idbuf;
  Rng rng(derive_seed(config.seed, p.patient_id));

  const int phenotype =
      static_cast<int>(rng.uniform_index(
          static_cast<std::uint64_t>(config.n_phenotypes)));
  p.true_phenotype = phenotype;

  const int length = sample_length(config, phenotype, rng);

  // The first `length` windows are the active ones: records are anchored at
  // their first event, so a contiguous prefix keeps the window count and the
  // first-to-last span identical — the record's "length" is then a single
  // well-defined quantity.
  std::vector<int> active;
  for (int w = 0; w < length; ++w) active.push_back(w);

  const int wd = config.window_days;
  for (int w : active) {
    const int day_lo = w * wd;
    const int day_hi = w * wd + wd - 1;
    std::size_t events_before = p.events.size();
    for (const auto& b : config.binary_codes) {
      if (rng.bernoulli(b.phenotype_rates[static_cast<std::size_t>(phenotype)])) {
        ClinicalEvent e;
        e.day = static_cast<int>(rng.uniform_int(day_lo, day_hi));
        e.kind = b.kind;
        e.code = b.code;
        p.events.push_back(e);
      }
    }
    for (const auto& l : config.lab_codes) {
      if (rng.bernoulli(l.rate)) {
        const int count = 1 + static_cast<int>(rng.uniform_index(3));
        for (int k = 0; k < count; ++k) {
          ClinicalEvent e;
          e.day = static_cast<int>(rng.uniform_int(day_lo, day_hi));
          e.kind = EventKind::lab;
          e.code = l.code;
          double v = rng.normal(l.phenotype_means[static_cast<std::size_t>(phenotype)],
                                l.phenotype_sds[static_cast<std::size_t>(phenotype)]);
          e.value = std::clamp(v, l.clip_lo, l.clip_hi);
          p.events.push_back(e);
        }
      }
    }
    if (p.events.size() == events_before) {
      // guarantee the window counts towards the trajectory length
      ClinicalEvent filler;
      filler.day = day_lo;
      filler.kind = EventKind::secondary_dx;
      filler.code = "ENC";
      p.events.push_back(filler);
    }
    if (rng.bernoulli(config.admission_rate)) {
      AdmissionSpan a;
      a.start_day = static_cast<int>(rng.uniform_int(day_lo, day_hi));
      a.end_day = std::min(day_hi, a.start_day + static_cast<int>(rng.uniform_index(7)));
      p.admissions.push_back(a);
    }
  }

  // anchor the record: the first event of window 0 lands exactly on day 0,
  // so a grid anchored at the first event day matches the generation grid
  auto first = std::min_element(
      p.events.begin(), p.events.end(),
      [](const ClinicalEvent& a, const ClinicalEvent& b) { return a.day < b.day; });
  if (first != p.events.end() && first->day != 0) first->day = 0;

  std::stable_sort(p.events.begin(), p.events.end(),
                   [](const ClinicalEvent& a, const ClinicalEvent& b) {
                     return a.day < b.day;
                   });
  return p;
}

std::vector<PatientRecord> generate_cohort(const CohortConfig& config) {
  config.validate();
  std::vector<PatientRecord> out;
  out.reserve(static_cast<std::size_t>(config.n_patients));
  for (int i = 0; i < config.n_patients; ++i)
    out.push_back(generate_patient(config, i));
  return out;
}

std::vector<PatientRecord> inject_index_events(
    const std::vector<PatientRecord>& cohort, const CohortConfig& config) {
  if (config.index_event.fraction <= 0.0 || config.index_event.codes.empty())
    return cohort;
  std::vector<PatientRecord> out = cohort;
  const auto& spec = config.index_event;
  for (auto& p : out) {
    Rng rng(derive_seed(config.seed, p.patient_id + "/index"));
    if (!rng.bernoulli(spec.fraction)) continue;
    // Place the index diagnosis at the first eligible encounter, mirroring
    // how detection later picks the first qualifying event; preferring a day
    // inside an already-active window keeps the trajectory length unchanged.
    int day = -1;
    for (const auto& e : p.events)
      if (e.day >= spec.min_day) {
        day = e.day;
        break;
      }
    if (day < 0)
      day = static_cast<int>(
          rng.uniform_int(spec.min_day, config.i_max * config.window_days - 1));
    ClinicalEvent e;
    e.day = day;
    e.kind = EventKind::primary_dx;
    e.code = spec.codes[rng.uniform_index(spec.codes.size())];
    auto pos = std::upper_bound(p.events.begin(), p.events.end(), e,
                                [](const ClinicalEvent& a, const ClinicalEvent& b) {
                                  return a.day < b.day;
                                });
    p.events.insert(pos, e);
  }
  return out;
}

CohortConfig cohort_config_from_json(const nlohmann::json& j) {
  CohortConfig c;
  c.n_patients = j.value("n_patients", c.n_patients);
  c.n_phenotypes = j.value("n_phenotypes", c.n_phenotypes);
  c.i_max = j.value("i_max", c.i_max);
  c.window_days = j.value("window_days", c.window_days);
  c.seed = j.value("seed", c.seed);
  c.length_phenotype_correlation =
      j.value("length_phenotype_correlation", c.length_phenotype_correlation);
  c.admission_rate = j.value("admission_rate", c.admission_rate);
  if (j.contains("phenotype_length_offsets"))
    c.phenotype_length_offsets =
        j.at("phenotype_length_offsets").get<std::vector<double>>();
  if (j.contains("length_distribution")) {
    const auto& d = j.at("length_distribution");
    const std::string kind = d.value("kind", std::string("uniform"));
    if (kind == "uniform") {
      c.length_distribution.kind = LengthDistribution::Kind::uniform;
      c.length_distribution.min = d.value("min", 1);
      c.length_distribution.max = d.value("max", c.i_max);
    } else if (kind == "fixed") {
      c.length_distribution.kind = LengthDistribution::Kind::fixed;
      c.length_distribution.value = d.value("value", 5);
      c.length_distribution.min = c.length_distribution.max =
          c.length_distribution.value;
    } else {
      throw std::invalid_argument("length_distribution.kind: " + kind);
    }
  } else {
    c.length_distribution.max = c.i_max;
  }
  if (j.contains("index_event")) {
    const auto& ie = j.at("index_event");
    c.index_event.codes = ie.value("codes", std::vector<std::string>{});
    c.index_event.fraction = ie.value("fraction", 0.0);
    c.index_event.min_day = ie.value("min_day", 90);
  }
  for (const auto& b : j.value("binary_codes", nlohmann::json::array())) {
    BinaryCodeSpec s;
    s.kind = event_kind_from_string(b.value("kind", std::string("secondary_dx")));
    s.code = b.at("code").get<std::string>();
    s.phenotype_rates = b.at("phenotype_rates").get<std::vector<double>>();
    c.binary_codes.push_back(std::move(s));
  }
  for (const auto& l : j.value("lab_codes", nlohmann::json::array())) {
    LabCodeSpec s;
    s.code = l.at("code").get<std::string>();
    s.phenotype_means = l.at("phenotype_means").get<std::vector<double>>();
    s.phenotype_sds = l.at("phenotype_sds").get<std::vector<double>>();
    s.rate = l.value("rate", s.rate);
    if (l.contains("clip")) {
      s.clip_lo = l.at("clip")[0].get<double>();
      s.clip_hi = l.at("clip")[1].get<double>();
    }
    c.lab_codes.push_back(std::move(s));
  }
  return c;
}

nlohmann::json cohort_config_to_json(const CohortConfig& c) {
  nlohmann::json j;
  j["n_patients"] = c.n_patients;
  j["n_phenotypes"] = c.n_phenotypes;
  j["i_max"] = c.i_max;
  j["window_days"] = c.window_days;
  j["seed"] = c.seed;
  j["length_phenotype_correlation"] = c.length_phenotype_correlation;
  j["admission_rate"] = c.admission_rate;
  if (!c.phenotype_length_offsets.empty())
    j["phenotype_length_offsets"] = c.phenotype_length_offsets;
  nlohmann::json d;
  if (c.length_distribution.kind == LengthDistribution::Kind::uniform) {
    d["kind"] = "uniform";
    d["min"] = c.length_distribution.min;
    d["max"] = c.length_distribution.max;
  } else {
    d["kind"] = "fixed";
    d["value"] = c.length_distribution.value;
  }
  j["length_distribution"] = d;
  j["index_event"] = {{"codes", c.index_event.codes},
                      {"fraction", c.index_event.fraction},
                      {"min_day", c.index_event.min_day}};
  j["binary_codes"] = nlohmann::json::array();
  for (const auto& b : c.binary_codes)
    j["binary_codes"].push_back({{"kind", to_string(b.kind)},
                                 {"code", b.code},
                                 {"phenotype_rates", b.phenotype_rates}});
  j["lab_codes"] = nlohmann::json::array();
  for (const auto& l : c.lab_codes)
    j["lab_codes"].push_back({{"code", l.code},
                              {"phenotype_means", l.phenotype_means},
                              {"phenotype_sds", l.phenotype_sds},
                              {"rate", l.rate},
                              {"clip", {l.clip_lo, l.clip_hi}}});
  return j;
}

CohortConfig default_synthetic_config() {
  CohortConfig c;
  c.n_patients = 2000;
  c.n_phenotypes = 4;
  c.i_max = 22;
  c.length_distribution.kind = LengthDistribution::Kind::uniform;
  c.length_distribution.min = 1;
  c.length_distribution.max = 22;
  c.seed = 20240901;
  c.index_event.codes = {"I50.1", "I50.9", "I11.0"};
  c.index_event.fraction = 0.5;
  c.index_event.min_day = 90;

  const EventKind kinds[4] = {EventKind::primary_dx, EventKind::secondary_dx,
                              EventKind::procedure, EventKind::medication};
  for (int i = 0; i < 60; ++i) {
    BinaryCodeSpec b;
    b.kind = kinds[i % 4];
    char buf[16];
    std::snprintf(buf, sizeof(buf), "C%02d", i);
    b.code = buf;
    b.phenotype_rates.assign(4, 0.04);
    // each phenotype has 15 characteristic codes with an elevated rate
    b.phenotype_rates[static_cast<std::size_t>(i / 15)] = 0.35;
    c.binary_codes.push_back(std::move(b));
  }
  for (int i = 0; i < 6; ++i) {
    LabCodeSpec l;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "L%02d", i);
    l.code = buf;
    l.rate = 0.4;
    l.clip_lo = 0.0;
    l.clip_hi = 200.0;
    for (int ph = 0; ph < 4; ++ph) {
      l.phenotype_means.push_back(60.0 + 20.0 * ((ph + i) % 4));
      l.phenotype_sds.push_back(12.0);
    }
    c.lab_codes.push_back(std::move(l));
  }
  return c;
}

nlohmann::json patient_to_json(const PatientRecord& p) {
  nlohmann::json j;
  j["patient_id"] = p.patient_id;
  if (p.true_phenotype) j["true_phenotype"] = *p.true_phenotype;
  j["events"] = nlohmann::json::array();
  for (const auto& e : p.events) {
    nlohmann::json je{{"day", e.day}, {"kind", to_string(e.kind)}, {"code", e.code}};
    if (e.value) je["value"] = *e.value;
    j["events"].push_back(std::move(je));
  }
  j["admissions"] = nlohmann::json::array();
  for (const auto& a : p.admissions)
    j["admissions"].push_back({{"start_day", a.start_day}, {"end_day", a.end_day}});
  return j;
}

PatientRecord patient_from_json(const nlohmann::json& j) {
  PatientRecord p;
  p.patient_id = j.at("patient_id").get<std::string>();
  if (j.contains("true_phenotype")) p.true_phenotype = j.at("true_phenotype").get<int>();
  for (const auto& je : j.value("events", nlohmann::json::array())) {
    ClinicalEvent e;
    e.day = je.at("day").get<int>();
    e.kind = event_kind_from_string(je.at("kind").get<std::string>());
    e.code = je.at("code").get<std::string>();
    if (je.contains("value")) e.value = je.at("value").get<double>();
    p.events.push_back(std::move(e));
  }
  for (const auto& ja : j.value("admissions", nlohmann::json::array())) {
    AdmissionSpan a;
    a.start_day = ja.at("start_day").get<int>();
    a.end_day = ja.at("end_day").get<int>();
    p.admissions.push_back(a);
  }
  return p;
}

void write_jsonl(const std::vector<PatientRecord>& cohort, std::ostream& os) {
  for (const auto& p : cohort) os << patient_to_json(p).dump() << '\n';
}

std::vector<PatientRecord> read_jsonl(std::istream& is) {
  std::vector<PatientRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    out.push_back(patient_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

void write_jsonl_file(const std::vector<PatientRecord>& cohort,
                      const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  write_jsonl(cohort, os);
}

std::vector<PatientRecord> read_jsonl_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_jsonl(is);
}

}  // namespace traj::cohort
