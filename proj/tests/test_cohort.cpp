#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "traj/cohort.hpp"

using namespace traj;
using namespace traj::cohort;

namespace {

CohortConfig tiny_config() {
  CohortConfig c;
  c.n_patients = 50;
  c.n_phenotypes = 1;
  c.i_max = 10;
  c.length_distribution.kind = LengthDistribution::Kind::fixed;
  c.length_distribution.value = 5;
  c.binary_codes.push_back({EventKind::secondary_dx, "A", {1.0}});
  c.admission_rate = 0.0;
  c.seed = 123;
  return c;
}

}  // namespace

TEST_CASE("rate 1 and fixed length give exactly L windows all containing the code") {
  auto cfg = tiny_config();
  auto cohort = generate_cohort(cfg);
  REQUIRE(cohort.size() == 50);
  for (const auto& p : cohort) {
    CHECK(p.trajectory_length(cfg.window_days, cfg.i_max) == 5);
    // every active window contains code A
    std::vector<int> windows_with_a(static_cast<std::size_t>(cfg.i_max), 0);
    std::vector<int> windows_with_any(static_cast<std::size_t>(cfg.i_max), 0);
    for (const auto& e : p.events) {
      const auto w = static_cast<std::size_t>(e.day / cfg.window_days);
      windows_with_any[w] = 1;
      if (e.code == "A") windows_with_a[w] = 1;
    }
    CHECK(windows_with_a == windows_with_any);
  }
}

TEST_CASE("empirical code frequency matches the configured rate") {
  auto cfg = tiny_config();
  cfg.n_patients = 2000;  // 2000 * 5 = 10000 active windows
  cfg.binary_codes[0].phenotype_rates = {0.8};
  auto cohort = generate_cohort(cfg);

  std::size_t active = 0, with_code = 0;
  for (const auto& p : cohort) {
    std::vector<int> has_any(static_cast<std::size_t>(cfg.i_max), 0);
    std::vector<int> has_code(static_cast<std::size_t>(cfg.i_max), 0);
    for (const auto& e : p.events) {
      const auto w = static_cast<std::size_t>(e.day / cfg.window_days);
      has_any[w] = 1;
      if (e.code == "A") has_code[w] = 1;
    }
    for (int w = 0; w < cfg.i_max; ++w) {
      active += static_cast<std::size_t>(has_any[static_cast<std::size_t>(w)]);
      with_code +=
          static_cast<std::size_t>(has_code[static_cast<std::size_t>(w)]);
    }
  }
  CHECK(active == 10000);
  const double freq = static_cast<double>(with_code) / static_cast<double>(active);
  CHECK(freq > 0.78);  // 3 binomial standard errors around 0.8 is +-0.012
  CHECK(freq < 0.82);
}

TEST_CASE("per-patient seeding makes generation order-independent") {
  auto cfg = tiny_config();
  auto cohort = generate_cohort(cfg);
  for (int i = cfg.n_patients - 1; i >= 0; --i) {
    auto p = generate_patient(cfg, i);
    const auto& q = cohort[static_cast<std::size_t>(i)];
    CHECK(patient_to_json(p) == patient_to_json(q));
  }
}

TEST_CASE("same config and seed reproduce the cohort exactly") {
  auto cfg = tiny_config();
  std::ostringstream a, b;
  write_jsonl(generate_cohort(cfg), a);
  write_jsonl(generate_cohort(cfg), b);
  CHECK(a.str() == b.str());
}

TEST_CASE("zero correlation keeps length independent of phenotype") {
  CohortConfig cfg = default_synthetic_config();
  cfg.n_patients = 2000;
  cfg.length_phenotype_correlation = 0.0;
  auto cohort = generate_cohort(cfg);

  // sample correlation between length and each phenotype indicator
  double worst = 0.0;
  for (int ph = 0; ph < cfg.n_phenotypes; ++ph) {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    const double n = static_cast<double>(cohort.size());
    for (const auto& p : cohort) {
      const double x =
          p.trajectory_length(cfg.window_days, cfg.i_max);
      const double y = p.true_phenotype == ph ? 1.0 : 0.0;
      sx += x;
      sy += y;
      sxx += x * x;
      syy += y * y;
      sxy += x * y;
    }
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double vx = sxx / n - (sx / n) * (sx / n);
    const double vy = syy / n - (sy / n) * (sy / n);
    worst = std::max(worst, std::abs(cov / std::sqrt(vx * vy)));
  }
  CHECK(worst < 0.05);
}

TEST_CASE("index events: fraction 0 is a no-op, fraction 1 hits everyone") {
  auto cfg = tiny_config();
  cfg.index_event.codes = {"I50.1", "I50.9"};
  cfg.index_event.fraction = 0.0;
  auto cohort = generate_cohort(cfg);
  auto untouched = inject_index_events(cohort, cfg);
  CHECK(patient_to_json(untouched[0]) == patient_to_json(cohort[0]));

  cfg.index_event.fraction = 1.0;
  cfg.index_event.min_day = 90;
  auto with_index = inject_index_events(cohort, cfg);
  for (const auto& p : with_index) {
    bool found = false;
    for (const auto& e : p.events) {
      if (e.kind != EventKind::primary_dx) continue;
      if (e.code != "I50.1" && e.code != "I50.9") continue;
      CHECK(e.day >= 90);
      found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("index injection preserves all prior events") {
  auto cfg = tiny_config();
  cfg.index_event.codes = {"I50.1"};
  cfg.index_event.fraction = 1.0;
  auto cohort = generate_cohort(cfg);
  auto with_index = inject_index_events(cohort, cfg);
  for (std::size_t i = 0; i < cohort.size(); ++i)
    CHECK(with_index[i].events.size() == cohort[i].events.size() + 1);
}

TEST_CASE("jsonl round trip is lossless") {
  auto cfg = tiny_config();
  cfg.lab_codes.push_back({"L00", {50.0}, {10.0}, 0.5, 0.0, 100.0});
  cfg.admission_rate = 0.4;
  auto cohort = generate_cohort(cfg);
  std::ostringstream os;
  write_jsonl(cohort, os);
  std::istringstream is(os.str());
  auto back = read_jsonl(is);
  REQUIRE(back.size() == cohort.size());
  for (std::size_t i = 0; i < back.size(); ++i)
    CHECK(patient_to_json(back[i]) == patient_to_json(cohort[i]));
}

TEST_CASE("invalid configs are rejected") {
  auto cfg = tiny_config();
  cfg.binary_codes[0].phenotype_rates = {1.5};
  CHECK_THROWS(cfg.validate());
  cfg = tiny_config();
  cfg.length_phenotype_correlation = -0.2;
  CHECK_THROWS(cfg.validate());
  cfg = tiny_config();
  cfg.n_patients = 0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("config json round trip") {
  auto cfg = default_synthetic_config();
  auto j = cohort_config_to_json(cfg);
  auto back = cohort_config_from_json(j);
  CHECK(cohort_config_to_json(back) == j);
}
