#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "bellaudit/bell.hpp"
#include "bellaudit/errors.hpp"
#include "bellaudit/franson.hpp"
#include "bellaudit/lhv.hpp"
#include "oracles.hpp"

using namespace bellaudit;
using namespace bellaudit::franson;
using correlations::TableShape;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr PathChoice S = PathChoice::Short;
constexpr PathChoice L = PathChoice::Long;

FransonConfig ideal(std::uint64_t pairs, std::uint64_t seed = 1) {
  FransonConfig c;
  c.n_pairs = pairs;
  c.seed = seed;
  return c;
}

std::vector<double> full_circle(std::size_t n) {
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
  return p;
}

StationGeometry line_geometry(double half_separation) {
  return {{0.0, 0.0, 0.0}, {half_separation, 0.0, 0.0}, {-half_separation, 0.0, 0.0}};
}

}  // namespace

TEST_CASE("quantum postselected table") {
  FransonConfig c;
  c.phases_a = {0.0, kPi};
  c.phases_b = {0.0};
  const auto t = quantum_postselected_table(c);
  CHECK(t(0, 0, 0, 0) + t(0, 0, 1, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(t(1, 0, 0, 0) + t(1, 0, 1, 1) == doctest::Approx(0.0).epsilon(1e-15));
  c.visibility = 0.9;
  c.phases_a = {kPi / 4.0};
  CHECK(quantum_postselected_table(c).correlator(0, 0) == doctest::Approx(0.636396).epsilon(1e-6));
  CHECK(correlations::no_signaling_check(quantum_postselected_table(c)).passes());
}

TEST_CASE("config validation") {
  FransonConfig c = ideal(10);
  CHECK_NOTHROW(c.validate());
  c.coincidence_window = 3e-9;  // window / 2 >= delta_t
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = ideal(10);
  c.phases_b.clear();
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = ideal(10);
  c.visibility = 1.1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = ideal(10);
  c.detector_efficiency = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK_THROWS_AS(simulate_run(ideal(0)), DomainError);
}

TEST_CASE("kept fraction, detector efficiency and perfect correlation") {
  const auto r = simulate_run(ideal(1'000'000));
  CHECK(std::abs(r.kept_fraction() - 0.5) <= 0.002);
  CHECK(r.early + r.central + r.late == r.both_detected);
  CHECK(r.both_detected == r.n_pairs);
  // V = 1 at phase sum 0: every kept event agrees
  CHECK(empirical_table(r).correlator(0, 0) > 0.999);

  FransonConfig lossy = ideal(1'000'000, 2);
  lossy.detector_efficiency = 0.8;
  const auto l = simulate_run(lossy);
  const double expect = 0.5 * 0.8 * 0.8;
  CHECK(std::abs(l.kept_fraction() - expect) <= 3.0 * std::sqrt(expect * (1.0 - expect) / 1e6));
  const double both = static_cast<double>(l.both_detected) / 1e6;
  CHECK(std::abs(both - 0.64) <= 3.0 * std::sqrt(0.64 * 0.36 / 1e6));
}

TEST_CASE("side peaks hold the mismatched paths") {
  std::array<std::uint64_t, 3> slots{};
  std::uint64_t kept_mismatch = 0;
  FransonConfig c = ideal(20'000);
  simulate_run(c, 1, [&](const PairRecord& p) {
    slots[static_cast<std::size_t>(p.slot)] += 1;
    if (p.kept && p.path_a != p.path_b) ++kept_mismatch;
    if (p.slot == CoincidenceSlot::Central) CHECK(p.path_a == p.path_b);
  });
  CHECK(kept_mismatch == 0);
  CHECK(slots[0] > 4000);
  CHECK(slots[2] > 4000);
}

TEST_CASE("simulation is deterministic across workers and sinks") {
  FransonConfig c = ideal(200'000, 99);
  c.phases_a = full_circle(5);
  c.phases_b = {0.3, 1.1};
  c.visibility = 0.8;
  c.detector_efficiency = 0.9;
  const auto one = simulate_run(c, 1);
  CHECK(simulate_run(c, 1) == one);
  CHECK(simulate_run(c, 3) == one);
  CHECK(simulate_run(c, 8) == one);
  std::uint64_t expect_index = 0;
  bool ordered = true;
  const auto sunk = simulate_run(c, 4, [&](const PairRecord& p) {
    ordered = ordered && p.index == expect_index;
    ++expect_index;
  });
  CHECK(ordered);
  CHECK(expect_index == c.n_pairs);
  CHECK(sunk == one);
  c.seed = 100;
  CHECK_FALSE(simulate_run(c, 1) == one);

  c.setting_mode = SettingMode::Random;
  CHECK(simulate_run(c, 1) == simulate_run(c, 5));
}

TEST_CASE("kept statistics converge to the quantum table on random configs") {
  std::mt19937_64 gen(61);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> vis(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> count(1, 3);
  for (int i = 0; i < 20; ++i) {
    FransonConfig c = ideal(100'000 + 10'000 * static_cast<std::uint64_t>(i), gen());
    c.phases_a.assign(count(gen), 0.0);
    c.phases_b.assign(count(gen), 0.0);
    for (double& p : c.phases_a) p = ph(gen);
    for (double& p : c.phases_b) p = ph(gen);
    c.visibility = vis(gen);
    c.setting_mode = i % 2 ? SettingMode::Random : SettingMode::Scan;
    const auto r = simulate_run(c, 2);
    const auto q = quantum_postselected_table(c);
    const auto& s = r.shape;
    for (std::size_t x = 0; x < s.settings_a; ++x) {
      for (std::size_t y = 0; y < s.settings_b; ++y) {
        const double n = static_cast<double>(r.kept_in_cell(x, y));
        REQUIRE(n > 0);
        for (std::size_t a = 0; a < 2; ++a) {
          for (std::size_t b = 0; b < 2; ++b) {
            const double p = q(x, y, a, b);
            const double f = static_cast<double>(r.kept_counts[s.index(x, y, a, b)]) / n;
            CAPTURE(i);
            CHECK(std::abs(f - p) <= 4.0 * std::sqrt(p * (1.0 - p) / n) + 1e-12);
          }
        }
      }
    }
    CHECK(empirical_no_signaling(r, 4.0).passes());
  }
}

TEST_CASE("fringe scan at V = 0.95") {
  FransonConfig c = ideal(1'000'000, 7);
  c.phases_a = full_circle(32);
  c.phases_b = {0.4};
  c.visibility = 0.95;
  const auto scan = scan_fringe(c, 2);
  REQUIRE(scan.points.size() == 32);
  const auto fit = fit_fringe(scan);
  CHECK(std::abs(fit.amplitude - 0.95) <= 0.01);
  std::vector<double> phases, e;
  for (const auto& p : scan.points) {
    phases.push_back(p.phase_a + scan.phase_b);
    e.push_back(p.e_hat);
    CHECK(p.n_equal + p.n_unequal == p.n_kept);
  }
  CHECK(fit.amplitude == doctest::Approx(oracle::fourier_amplitude(phases, e)).epsilon(1e-9));
  CHECK(std::abs(fit.phase_offset) < 0.05);
  CHECK(fit.residual_rms < 5.0 * fit.mean_sigma);

  // the fringe table has a local model without any communication
  const auto t = empirical_table(scan.summary, TableEstimator::NoSignalingMle);
  const auto m = lhv::build_single_setting_model(t);
  CHECK(correlations::max_abs_difference(lhv::predict(m, t.shape()), t) < 1e-12);
  CHECK(empirical_no_signaling(scan.summary, 4.0).passes());
  CHECK(correlations::no_signaling_check(t).passes());
}

TEST_CASE("fringe scan at V = 0 is flat") {
  FransonConfig c = ideal(400'000, 8);
  c.phases_a = full_circle(32);
  c.visibility = 0.0;
  const auto scan = scan_fringe(c);
  for (const auto& p : scan.points) CHECK(std::abs(p.e_hat) < 3.0 * p.sigma);
  c.phases_b = {0.0, 1.0};
  CHECK_THROWS_AS(scan_fringe(c), DomainError);
}

TEST_CASE("empirical tables") {
  FransonConfig c = ideal(50'000, 9);
  c.phases_a = {0.0, 1.0};
  c.phases_b = {0.5, 2.0};
  const auto r = simulate_run(c);
  const auto raw = empirical_table(r);
  for (std::size_t k = 0; k < raw.shape().size(); ++k) {
    const auto x = k / 8, y = (k / 4) % 2;
    CHECK(raw.probs()[k] ==
          doctest::Approx(static_cast<double>(r.kept_counts[k]) / static_cast<double>(r.kept_in_cell(x, y))));
  }
  CHECK_THROWS_AS(empirical_table(r, TableEstimator::NoSignalingMle), NotApplicable);

  FransonConfig sparse = ideal(3, 9);
  sparse.phases_a = full_circle(16);
  CHECK_THROWS_AS(empirical_table(simulate_run(sparse)), ValidationError);
}

TEST_CASE("postselected value of hand-built mixtures") {
  const auto chsh = bell::chsh();
  const PathStrategy b{{1, 1}, {1, -1}, {S, L}, {S, L}};
  const PathStrategy c{{1, 1}, {1, 1}, {S, L}, {L, S}};
  const std::vector<WeightedPathStrategy> witness{{0.5, b}, {0.5, c}};
  CHECK(postselected_value(witness, chsh) == doctest::Approx(4.0).epsilon(1e-15));
  // an unequal split gives the same kept correlators
  const std::vector<WeightedPathStrategy> skewed{{0.3, b}, {0.7, c}};
  CHECK(postselected_value(skewed, chsh) == doctest::Approx(4.0).epsilon(1e-15));

  const std::vector<WeightedPathStrategy> alone{{1.0, b}};
  CHECK_THROWS_AS(postselected_value(alone, chsh), EmptyCell);
  const std::vector<WeightedPathStrategy> bad_sum{{0.5, b}, {0.4, c}};
  CHECK_THROWS_AS(postselected_value(bad_sum, chsh), ValidationError);
}

TEST_CASE("all-keep mixtures equal the unpostselected value") {
  std::mt19937_64 gen(62);
  std::uniform_int_distribution<int> bit(0, 1);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  const auto e = bell::chained_expression(3);
  const TableShape shape{3, 3, 2, 2};
  for (int i = 0; i < 50; ++i) {
    std::vector<WeightedPathStrategy> mix;
    std::vector<lhv::LocalComponent> comps;
    double sum = 0.0;
    const PathChoice path = bit(gen) ? L : S;
    for (int k = 0; k < 4; ++k) {
      PathStrategy p{{}, {}, {path, path, path}, {path, path, path}, StrategyClass::FixedPath};
      lhv::DeterministicStrategy d;
      for (std::size_t x = 0; x < 3; ++x) {
        const int r = bit(gen);
        p.outcome_a.push_back(r ? -1 : 1);
        d.response_a.push_back(static_cast<std::size_t>(r));
      }
      for (std::size_t y = 0; y < 3; ++y) {
        const int r = bit(gen);
        p.outcome_b.push_back(r ? -1 : 1);
        d.response_b.push_back(static_cast<std::size_t>(r));
      }
      const double w = u(gen);
      sum += w;
      mix.push_back({w, p});
      comps.push_back({w, d});
    }
    for (auto& m : mix) m.weight /= sum;
    for (auto& m : comps) m.weight /= sum;
    const double direct = bell::evaluate(e, lhv::predict(lhv::LocalModel(comps), shape));
    CHECK(postselected_value(mix, e) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("single fixed-path strategies stay within the CHSH bound") {
  const auto chsh = bell::chsh();
  int evaluated = 0;
  for (int o = 0; o < 16; ++o) {
    for (PathChoice pa : {S, L}) {
      for (PathChoice pb : {S, L}) {
        const PathStrategy p{{o & 8 ? -1 : 1, o & 4 ? -1 : 1}, {o & 2 ? -1 : 1, o & 1 ? -1 : 1}, {pa, pa}, {pb, pb},
                             StrategyClass::FixedPath};
        const std::vector<WeightedPathStrategy> one{{1.0, p}};
        if (pa != pb) {
          CHECK_THROWS_AS(postselected_value(one, chsh), EmptyCell);
          continue;
        }
        const double v = postselected_value(one, chsh);
        CHECK((v == 2.0 || v == -2.0 || v == 0.0));
        ++evaluated;
      }
    }
  }
  CHECK(evaluated == 32);
  const PathStrategy mixed{{1, 1}, {1, 1}, {S, L}, {S, S}, StrategyClass::FixedPath};
  CHECK_THROWS_AS(mixed.validate(), ValidationError);
}

TEST_CASE("postselected bound search") {
  const auto sd = search_postselected_bound(bell::chsh(), StrategyClass::SettingDependentPath, 4);
  CHECK(sd.value == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(sd.value >= 2.0 * std::numbers::sqrt2);
  CHECK(postselected_value(sd.witness, bell::chsh()) == sd.value);
  CHECK(sd.witness.size() == 2);

  const auto fp = search_postselected_bound(bell::chsh(), StrategyClass::FixedPath, 4);
  CHECK(fp.value == doctest::Approx(2.0).epsilon(1e-12));
  for (std::size_t n = 2; n <= 4; ++n) {
    const auto e = bell::chained_expression(n);
    const auto b = search_postselected_bound(e, StrategyClass::FixedPath, 2);
    CAPTURE(n);
    CHECK(b.value <= bell::local_bound_by_enumeration(e).value + 1e-9);
    CHECK(b.value == doctest::Approx(bell::local_bound_by_enumeration(e).value).epsilon(1e-9));
    for (const auto& w : b.witness) CHECK_NOTHROW(w.strategy.validate());
  }
}

TEST_CASE("chained n = 3 postselected bound regression") {
  const auto b = search_postselected_bound(bell::chained_expression(3), StrategyClass::SettingDependentPath, 4);
  CHECK(b.value > 4.0);
  CHECK(b.value == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(b.distinct_strategies == 464);
  CHECK(postselected_value(b.witness, bell::chained_expression(3)) == b.value);
}

TEST_CASE("postselected search refuses oversized instances") {
  CHECK_THROWS_AS(search_postselected_bound(bell::chained_expression(4), StrategyClass::SettingDependentPath, 1),
                  CapExceeded);
  PostselectedSearchOptions small;
  small.max_strategies = 32;
  CHECK_THROWS_AS(search_postselected_bound(bell::chsh(), StrategyClass::FixedPath, 1, small), CapExceeded);
}

TEST_CASE("switching-rate requirement") {
  FransonConfig c;
  auto r = required_switching_rate(c, line_geometry(9000.0));
  CHECK(r.feasible);
  CHECK(r.binding == "arm imbalance");
  CHECK(r.min_rate_hz == doctest::Approx(1.0 / 1.2e-9).epsilon(1e-12));
  CHECK(r.min_rate_hz == doctest::Approx(8.333e8).epsilon(1e-4));
  REQUIRE(r.constraints.size() == 3);

  c.delta_t = 1e-3;
  r = required_switching_rate(c, line_geometry(9000.0));
  CHECK(r.feasible);
  CHECK(r.binding.rfind("light cone", 0) == 0);
  // A's choice: before the photon reaches A (9 km of free flight at most) and
  // after the light from B's outcome could no longer reach A.
  const double c0 = spacetime::kSpeedOfLight;
  const double t = 17'500.0 * 1.468 / c0;
  const double window = 9000.0 / c0 - (t - 18000.0 / c0);
  CHECK(r.min_rate_hz == doctest::Approx(1.0 / window).epsilon(1e-9));
  CHECK(r.min_rate_hz > 1.0 / c.delta_t);

  c.delta_t = 1.2e-9;
  const auto colocated = required_switching_rate(c, line_geometry(0.0));
  CHECK_FALSE(colocated.feasible);
  CHECK(colocated.min_rate_hz == INFINITY);

  c.fiber_length_a = 100.0;
  CHECK_THROWS_AS(required_switching_rate(c, line_geometry(9000.0)), ValidationError);
}
