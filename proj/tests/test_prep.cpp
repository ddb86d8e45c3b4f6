#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>

#include "doctest.h"
#include "traj/cohort.hpp"
#include "traj/prep.hpp"

using namespace traj;
using namespace traj::prep;
using cohort::ClinicalEvent;
using cohort::EventKind;
using cohort::PatientRecord;

namespace {

PatientRecord make_patient(std::string id,
                           std::vector<ClinicalEvent> events) {
  PatientRecord p;
  p.patient_id = std::move(id);
  p.events = std::move(events);
  return p;
}

FeatureVocabulary small_vocab() {
  FeatureVocabulary v;
  v.secondary_dx = {"A", "B"};
  v.labs = {"L"};
  return v;
}

}  // namespace

TEST_CASE("vocabulary keeps codes at or above the patient-fraction threshold") {
  std::vector<PatientRecord> cohort;
  for (int i = 0; i < 100; ++i) {
    std::vector<ClinicalEvent> ev{{0, EventKind::secondary_dx, "COMMON", {}}};
    if (i == 0) ev.push_back({1, EventKind::secondary_dx, "RARE", {}});
    cohort.push_back(make_patient("P" + std::to_string(i), ev));
  }
  auto v = build_vocabulary(cohort, 0.01);
  // 1 of 100 patients = exactly 1% -> kept (paper removes "<1%")
  CHECK(v.secondary_dx == std::vector<std::string>{"COMMON", "RARE"});
  auto v2 = build_vocabulary(cohort, 0.02);
  CHECK(v2.secondary_dx == std::vector<std::string>{"COMMON"});
}

TEST_CASE("vocabulary: 1 of 3 patients is included; filtering is idempotent") {
  std::vector<PatientRecord> cohort{
      make_patient("a", {{0, EventKind::secondary_dx, "X", {}}}),
      make_patient("b", {{0, EventKind::secondary_dx, "Y", {}}}),
      make_patient("c", {{0, EventKind::secondary_dx, "Y", {}}}),
  };
  auto v = build_vocabulary(cohort, 0.01);
  CHECK(v.secondary_dx == std::vector<std::string>{"X", "Y"});

  auto v40 = build_vocabulary(cohort, 0.4);  // X at 33% drops out
  CHECK(v40.secondary_dx == std::vector<std::string>{"Y"});

  // drop filtered codes from the cohort and rebuild: same vocabulary
  auto filtered = cohort;
  for (auto& p : filtered)
    std::erase_if(p.events, [&](const ClinicalEvent& e) {
      return !v40.binary_column(e.kind, e.code).has_value();
    });
  std::erase_if(filtered, [](const PatientRecord& p) { return p.events.empty(); });
  auto again = build_vocabulary(filtered, 0.4);
  CHECK(again.to_json() == v40.to_json());
}

TEST_CASE("rank normalizer order statistics and tie handling") {
  RankNormalizer n;
  n.fit("a", {5.0, 1.0, 3.0});
  CHECK(n.transform("a", 1.0) == doctest::Approx(0.0));
  CHECK(n.transform("a", 3.0) == doctest::Approx(0.5));
  CHECK(n.transform("a", 5.0) == doctest::Approx(1.0));

  n.fit("t", {7.0, 7.0, 7.0});
  CHECK(n.transform("t", 7.0) == doctest::Approx(0.5));

  n.fit("i", {1.0, 3.0, 5.0});
  // piecewise-linear CDF between rank(3)=0.5 and rank(5)=1.0
  CHECK(n.transform("i", 4.0) == doctest::Approx(0.75));
  // out-of-range clips
  CHECK(n.transform("i", -10.0) == doctest::Approx(0.0));
  CHECK(n.transform("i", 99.0) == doctest::Approx(1.0));

  // unknown code -> mask value
  CHECK(n.transform("nope", 1.0) == doctest::Approx(kContinuousMaskValue));
}

TEST_CASE("rank normalization is invariant under monotone rescaling") {
  RankNormalizer a, b;
  a.fit("x", {1.0, 3.0, 5.0, 9.0});
  b.fit("x", {10.0, 30.0, 50.0, 90.0});  // 10x
  CHECK(a.transform("x", 3.0) == b.transform("x", 30.0));
  CHECK(a.transform("x", 9.0) == b.transform("x", 90.0));
}

TEST_CASE("aggregate_window lab statistics") {
  auto vocab = small_vocab();
  RankNormalizer n;
  n.fit("L", {2.0, 4.0, 3.0});  // -> ranks 0.0, 1.0, 0.5

  std::vector<ClinicalEvent> events{
      {3, EventKind::lab, "L", 2.0},
      {50, EventKind::lab, "L", 4.0},
      {70, EventKind::lab, "L", 3.0},
      {10, EventKind::secondary_dx, "A", {}},
      {11, EventKind::secondary_dx, "A", {}},
  };
  std::vector<const ClinicalEvent*> ptrs;
  for (const auto& e : events) ptrs.push_back(&e);

  auto row = aggregate_window(ptrs, {}, 0, 90, vocab, n);
  REQUIRE(row.size() == vocab.n_features());
  CHECK(row[*vocab.binary_column(EventKind::secondary_dx, "A")] == 1.0);
  CHECK(row[*vocab.binary_column(EventKind::secondary_dx, "B")] == 0.0);
  const std::size_t l = vocab.lab_offset(0);
  CHECK(row[l + 0] == doctest::Approx(0.0));   // min
  CHECK(row[l + 1] == doctest::Approx(1.0));   // max
  CHECK(row[l + 2] == doctest::Approx(0.5));   // mean
  CHECK(row[l + 3] == doctest::Approx(0.5));   // MAD
  CHECK(row[l + 4] == doctest::Approx(0.5));   // last (day 70 -> 3.0 -> 0.5)
  CHECK(row[l + 5] == doctest::Approx(0.3));   // count / 10
}

TEST_CASE("empty window equals the canonical empty vector") {
  auto vocab = small_vocab();
  RankNormalizer n;
  auto row = aggregate_window({}, {}, 0, 90, vocab, n);
  CHECK(row == vocab.empty_row());
  // layout: binary zeros, labs masked, admin zeros
  CHECK(row[0] == 0.0);
  CHECK(row[vocab.lab_offset(0)] == kContinuousMaskValue);
  CHECK(row[vocab.admin_offset()] == 0.0);
}

TEST_CASE("admission features count and day coverage") {
  auto vocab = small_vocab();
  RankNormalizer n;
  std::vector<cohort::AdmissionSpan> adm{{10, 19}, {40, 40}};
  auto row = aggregate_window({}, adm, 0, 90, vocab, n);
  const std::size_t a = vocab.admin_offset();
  CHECK(row[a] == doctest::Approx(2.0 / 4.0));
  CHECK(row[a + 1] > 0.0);
  CHECK(row[a + 1] <= 1.0);
}

TEST_CASE("assemble_sequence shape, presence, n_w") {
  WindowGrid grid;  // 90 days, 22 windows
  auto vocab = small_vocab();
  RankNormalizer n;
  auto p = make_patient("p", {{0, EventKind::secondary_dx, "A", {}},
                              {4 * 90 + 3, EventKind::secondary_dx, "B", {}}});
  auto t = assemble_sequence(p, grid, vocab, n);
  CHECK(t.x.rows() == 22);
  CHECK(t.x.cols() == vocab.n_features());
  CHECK(t.length() == 2);
  CHECK(t.n_w == doctest::Approx(2.0 / 22.0));
  CHECK(t.presence[0] == 1);
  CHECK(t.presence[4] == 1);
  CHECK(t.presence[1] == 0);
  // empty rows equal the canonical vector
  auto empty = vocab.empty_row();
  for (std::size_t c = 0; c < t.x.cols(); ++c) CHECK(t.x(1, c) == empty[c]);

  // determinism
  auto t2 = assemble_sequence(p, grid, vocab, n);
  CHECK(t.x.values() == t2.x.values());

  CHECK_THROWS(assemble_sequence(make_patient("empty", {}), grid, vocab, n));
}

TEST_CASE("full-presence patient has n_w = 1") {
  WindowGrid grid;
  auto vocab = small_vocab();
  RankNormalizer n;
  std::vector<ClinicalEvent> ev;
  for (int w = 0; w < 22; ++w)
    ev.push_back({w * 90, EventKind::secondary_dx, "A", {}});
  auto t = assemble_sequence(make_patient("p", std::move(ev)), grid, vocab, n);
  CHECK(t.n_w == 1.0);
}

TEST_CASE("index event selection honors inclusion and lookback") {
  auto criteria = IndexEventCriteria::heart_failure();
  auto p = make_patient("p", {{0, EventKind::secondary_dx, "A", {}},
                              {200, EventKind::primary_dx, "I50.1", {}}});
  auto day = select_index_event(p, criteria);
  REQUIRE(day.has_value());
  CHECK(*day == 200);

  // less than 90 days of prior data
  auto q = make_patient("q", {{0, EventKind::secondary_dx, "A", {}},
                              {30, EventKind::primary_dx, "I50", {}}});
  CHECK(!select_index_event(q, criteria).has_value());

  // prior secondary heart-failure diagnosis excludes
  auto r = make_patient("r", {{0, EventKind::secondary_dx, "A", {}},
                              {10, EventKind::secondary_dx, "I50.0", {}},
                              {200, EventKind::primary_dx, "I50", {}}});
  CHECK(!select_index_event(r, criteria).has_value());

  // no primary inclusion code at all
  auto s = make_patient("s", {{0, EventKind::secondary_dx, "A", {}}});
  CHECK(!select_index_event(s, criteria).has_value());
}

TEST_CASE("trajectory alignment by mode") {
  WindowGrid grid;
  auto vocab = small_vocab();
  RankNormalizer n;
  std::vector<ClinicalEvent> ev;
  for (int w = 0; w < 22; ++w)
    ev.push_back({w * 90 + w % 3, EventKind::secondary_dx,
                  w % 2 ? "A" : "B", {}});
  auto t = assemble_sequence(make_patient("p", std::move(ev)), grid, vocab, n);

  auto all = align_trajectory(t, 4, TrajectoryMode::ALL, vocab);
  CHECK(all.x.values() == t.x.values());

  auto e2e = align_trajectory(t, 4, TrajectoryMode::E2E, vocab);
  // rows 0..17 are old windows 4..21, bitwise
  for (std::size_t r = 0; r < 18; ++r)
    for (std::size_t c = 0; c < t.x.cols(); ++c)
      CHECK(e2e.x(r, c) == t.x(r + 4, c));
  auto empty = vocab.empty_row();
  for (std::size_t r = 18; r < 22; ++r)
    for (std::size_t c = 0; c < t.x.cols(); ++c)
      CHECK(e2e.x(r, c) == empty[c]);
  CHECK(e2e.length() == 18);
  CHECK(e2e.n_w == doctest::Approx(18.0 / 22.0));

  // AFE drops the index window itself
  auto afe = align_trajectory(t, 4, TrajectoryMode::AFE, vocab);
  for (std::size_t c = 0; c < t.x.cols(); ++c)
    CHECK(afe.x(0, c) == t.x(5, c));

  // BEE keeps only rows strictly before the index window
  auto bee = align_trajectory(t, 4, TrajectoryMode::BEE, vocab);
  CHECK(bee.length() == 4);
  for (std::size_t c = 0; c < t.x.cols(); ++c)
    CHECK(bee.x(3, c) == t.x(3, c));

  CHECK_THROWS(align_trajectory(t, std::nullopt, TrajectoryMode::E2E, vocab));
}

TEST_CASE("bundle save/load round trip is bit exact") {
  WindowGrid grid;
  grid.i_max = 6;
  FeatureVocabulary vocab = small_vocab();
  RankNormalizer n;
  n.fit("L", {1.0, 2.0, 5.0});

  TensorBundle b;
  b.grid = grid;
  b.vocab = vocab;
  b.normalizer = n;
  for (int i = 0; i < 3; ++i) {
    auto p = make_patient("p" + std::to_string(i),
                          {{0, EventKind::secondary_dx, "A", {}},
                           {95 * (i + 1), EventKind::lab, "L", 2.0}});
    p.true_phenotype = i % 2;
    b.tensors.push_back(assemble_sequence(p, grid, vocab, n));
    b.tensors.back().true_phenotype = p.true_phenotype;
  }

  const std::string prefix =
      (std::filesystem::temp_directory_path() / "bundle_test").string();
  save_bundle(b, prefix);
  auto back = load_bundle(prefix);
  REQUIRE(back.tensors.size() == b.tensors.size());
  for (std::size_t i = 0; i < b.tensors.size(); ++i) {
    CHECK(back.tensors[i].patient_id == b.tensors[i].patient_id);
    CHECK(back.tensors[i].x.values() == b.tensors[i].x.values());
    CHECK(back.tensors[i].presence == b.tensors[i].presence);
    CHECK(back.tensors[i].n_w == b.tensors[i].n_w);
    CHECK(back.tensors[i].true_phenotype == b.tensors[i].true_phenotype);
  }
  CHECK(back.normalizer.transform("L", 3.5) == n.transform("L", 3.5));
}
