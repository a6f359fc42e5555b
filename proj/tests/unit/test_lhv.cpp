#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <variant>

#include "bellaudit/bell.hpp"
#include "bellaudit/errors.hpp"
#include "bellaudit/franson.hpp"
#include "bellaudit/lhv.hpp"
#include "oracles.hpp"

using namespace bellaudit;
using namespace bellaudit::lhv;
using correlations::CorrelationTable;
using correlations::TableShape;

namespace {

LocalModel random_local_model(const TableShape& s, std::size_t components, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, strategy_count(s) - 1);
  std::vector<LocalComponent> comps;
  double sum = 0.0;
  for (std::size_t i = 0; i < components; ++i) {
    comps.push_back({u(gen), strategy_at(s, pick(gen))});
    sum += comps.back().weight;
  }
  for (auto& c : comps) c.weight /= sum;
  return LocalModel(std::move(comps));
}

double chsh_of(const CorrelationTable& t) {
  return oracle::correlator(t, 0, 0) + oracle::correlator(t, 0, 1) + oracle::correlator(t, 1, 0) -
         oracle::correlator(t, 1, 1);
}

}  // namespace

TEST_CASE("prediction semantics") {
  const TableShape s{2, 2, 2, 2};
  const DeterministicStrategy st{{0, 1}, {1, 0}};
  const auto t = strategy_table(st, s);
  CHECK(t(0, 1, 0, 0) == 1.0);
  CHECK(t(1, 1, 1, 0) == 1.0);
  CHECK(t(1, 1, 1, 1) == 0.0);
  CHECK(t(1, 0, 1, 1) == 1.0);

  std::vector<LocalComponent> all;
  for (std::size_t i = 0; i < strategy_count(s); ++i) all.push_back({1.0 / 16.0, strategy_at(s, i)});
  CHECK(correlations::max_abs_difference(predict(LocalModel(all), s), CorrelationTable::uniform(s)) < 1e-15);

  const LocalModel pm({{0.5, {{0, 0}, {0, 0}}}, {0.5, {{1, 1}, {1, 1}}}});
  const auto e = predict(pm, s);
  for (std::size_t x = 0; x < 2; ++x) {
    for (std::size_t y = 0; y < 2; ++y) {
      CHECK(e.correlator(x, y) == 1.0);
      CHECK(e.marginal_a(x, y)[0] == 0.5);
    }
  }
  CHECK_THROWS_AS(predict(pm, TableShape{3, 2, 2, 2}), ShapeMismatch);
  CHECK_THROWS_AS(LocalModel({{0.5, st}}), ValidationError);
  CHECK_THROWS_AS(LocalModel({{1.5, st}, {-0.5, st}}), ValidationError);
}

TEST_CASE("strategy enumeration is lexicographic") {
  const TableShape s{2, 1, 3, 2};
  CHECK(strategy_count(s) == 18);
  CHECK(strategy_at(s, 0) == DeterministicStrategy{{0, 0}, {0}});
  CHECK(strategy_at(s, 1) == DeterministicStrategy{{0, 0}, {1}});
  CHECK(strategy_at(s, 2) == DeterministicStrategy{{0, 1}, {0}});
  CHECK(strategy_at(s, 17) == DeterministicStrategy{{2, 2}, {1}});
  CHECK_THROWS_AS(strategy_at(s, 18), ShapeMismatch);
  CHECK(strategy_count(TableShape{40, 40, 4, 4}) == SIZE_MAX);
}

TEST_CASE("single-setting model reproduces random tables") {
  std::mt19937_64 gen(41);
  std::uniform_int_distribution<std::size_t> nx(1, 5), no(2, 4);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto t = oracle::random_single_setting_table(nx(gen), no(gen), no(gen), gen);
    const LocalModel m = build_single_setting_model(t);
    worst = std::max(worst, correlations::max_abs_difference(predict(m, t.shape()), t));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("single-setting model on the A side and on a Franson scan") {
  std::mt19937_64 gen(42);
  const auto t = correlations::swap_sides(oracle::random_single_setting_table(4, 3, 2, gen));
  CHECK(correlations::max_abs_difference(predict(build_single_setting_model(t), t.shape()), t) < 1e-12);

  franson::FransonConfig c;
  c.phases_a.clear();
  for (int k = 0; k < 8; ++k) c.phases_a.push_back(k * std::numbers::pi / 4.0);
  c.phases_b = {0.3};
  const auto q = franson::quantum_postselected_table(c);
  CHECK(correlations::max_abs_difference(predict(build_single_setting_model(q), q.shape()), q) < 1e-12);

  const auto det = strategy_table({{1, 0, 1}, {1}}, TableShape{3, 1, 2, 2});
  CHECK(build_single_setting_model(det).components().size() == 1);
}

TEST_CASE("single-setting construction refuses tables it does not cover") {
  CHECK_THROWS_AS(build_single_setting_model(correlations::pr_box()), NotApplicable);
  // fixed-side marginal depends on the remote setting
  const CorrelationTable sig({2, 1, 2, 2}, {0.5, 0.0, 0.5, 0.0, 0.0, 0.5, 0.0, 0.5});
  CHECK_THROWS_AS(build_single_setting_model(sig), NotApplicable);
}

TEST_CASE("one-way communication reproduces the PR box and the Tsirelson table") {
  const auto pr = correlations::pr_box();
  const CommModel m = build_comm_model(pr);
  const auto back = predict(m, pr.shape());
  CHECK(correlations::max_abs_difference(back, pr) < 1e-12);
  CHECK(chsh_of(back) == doctest::Approx(4.0).epsilon(1e-12));

  const auto q = oracle::tsirelson_table();
  CHECK(chsh_of(q) == doctest::Approx(2.0 * std::numbers::sqrt2));
  for (Receiver r : {Receiver::A, Receiver::B}) {
    CHECK(correlations::max_abs_difference(predict(build_comm_model(q, r), q.shape()), q) < 1e-12);
  }
}

TEST_CASE("one-way communication reproduces local tables") {
  std::mt19937_64 gen(43);
  for (int i = 0; i < 20; ++i) {
    const std::size_t ex = 2 + i % 2, eb = 2 + i % 3;
    const TableShape s{ex, 2, 2, eb};
    const auto t = predict(random_local_model(s, 5, gen), s);
    CHECK(correlations::max_abs_difference(predict(build_comm_model(t), s), t) < 1e-12);
  }
}

TEST_CASE("one-way communication refuses when the sender's marginal signals") {
  // B's marginal depends on x: receiver A cannot fix that.
  const CorrelationTable t({2, 1, 2, 2}, {0.5, 0.0, 0.5, 0.0, 0.0, 0.5, 0.0, 0.5});
  CHECK_THROWS_AS(build_comm_model(t, Receiver::A), NotApplicable);
  CHECK_NOTHROW(build_comm_model(t, Receiver::B));
}

TEST_CASE("default receiver is the side with the latest outcome") {
  spacetime::ExperimentSchedule s;
  s.events = {{"a", spacetime::EventKind::Outcome, spacetime::Side::A, {0, 0, 0}, 1.0},
              {"b", spacetime::EventKind::Outcome, spacetime::Side::B, {0, 0, 0}, 2.0}};
  CHECK(default_receiver(s) == Receiver::B);
  s.events[0].time = 3.0;
  CHECK(default_receiver(s) == Receiver::A);
}

TEST_CASE("PR box is outside the local polytope with a self-checking certificate") {
  const auto r = local_polytope_membership(correlations::pr_box());
  REQUIRE(std::holds_alternative<InfeasibilityCertificate>(r));
  const auto& cert = std::get<InfeasibilityCertificate>(r);
  CHECK(cert.normalized);
  CHECK(cert.table_value == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(cert.local_max == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(cert.robustness == doctest::Approx(0.5).epsilon(1e-9));
  // independent check: the functional's maximum over the 16 strategies
  const TableShape s{2, 2, 2, 2};
  double best = -INFINITY;
  for (std::size_t i = 0; i < 16; ++i) {
    const auto d = strategy_table(strategy_at(s, i), s);
    double v = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) v += cert.coefficients[k] * d.probs()[k];
    best = std::max(best, v);
  }
  CHECK(best == doctest::Approx(cert.local_max).epsilon(1e-12));
  CHECK(cert.table_value > best + 1e-7);
}

TEST_CASE("membership agrees with the CHSH criterion on noisy Tsirelson tables") {
  for (double v : {0.5, 0.7, 0.70, 0.72, 0.8, 1.0}) {
    const auto angles_a = std::vector<double>{0.0, std::numbers::pi / 2.0};
    const auto angles_b = std::vector<double>{std::numbers::pi / 4.0, -std::numbers::pi / 4.0};
    const auto t = oracle::cos_table(angles_a, angles_b, v);
    const bool local = oracle::max_chsh_variant(t) <= 2.0;
    const auto r = local_polytope_membership(t);
    CAPTURE(v);
    CHECK(std::holds_alternative<LocalModel>(r) == local);
    if (const auto* cert = std::get_if<InfeasibilityCertificate>(&r)) {
      CHECK(cert->robustness == doctest::Approx(1.0 / (v * std::numbers::sqrt2)).epsilon(1e-7));
    }
  }
}

TEST_CASE("membership returns exact models for local and single-setting tables") {
  std::mt19937_64 gen(44);
  CHECK(std::holds_alternative<LocalModel>(local_polytope_membership(CorrelationTable::uniform({2, 2, 2, 2}))));
  for (int i = 0; i < 20; ++i) {
    const std::size_t ey = 2 + i % 2;
    const TableShape s{2, ey, 2, 2};
    const auto t = predict(random_local_model(s, 4, gen), s);
    const auto r = local_polytope_membership(t);
    REQUIRE(std::holds_alternative<LocalModel>(r));
    CHECK(correlations::max_abs_difference(predict(std::get<LocalModel>(r), s), t) < 1e-7);
  }
  std::uniform_int_distribution<std::size_t> nx(1, 3), no(2, 3);
  for (int i = 0; i < 100; ++i) {
    const auto t = oracle::random_single_setting_table(nx(gen), no(gen), no(gen), gen);
    const auto r = local_polytope_membership(t);
    REQUIRE(std::holds_alternative<LocalModel>(r));
    CHECK(correlations::max_abs_difference(predict(std::get<LocalModel>(r), t.shape()), t) < 1e-7);
    CHECK(correlations::max_abs_difference(predict(build_single_setting_model(t), t.shape()), t) < 1e-12);
  }
}

TEST_CASE("random 2222 tables: membership matches Fine's CHSH criterion") {
  std::mt19937_64 gen(45);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int nonlocal = 0;
  for (int i = 0; i < 200; ++i) {
    // no-signaling with uniform marginals: P(a,b|x,y) = (1 + (-1)^(a+b) E_xy) / 4
    std::vector<double> p(16);
    const TableShape s{2, 2, 2, 2};
    for (std::size_t x = 0; x < 2; ++x) {
      for (std::size_t y = 0; y < 2; ++y) {
        const double e = u(gen);
        for (std::size_t a = 0; a < 2; ++a)
          for (std::size_t b = 0; b < 2; ++b) p[s.index(x, y, a, b)] = (1.0 + (a == b ? e : -e)) / 4.0;
      }
    }
    const CorrelationTable t(s, p);
    const double chsh = oracle::max_chsh_variant(t);
    if (std::abs(chsh - 2.0) < 1e-6) continue;
    const bool local = chsh < 2.0;
    nonlocal += !local;
    CHECK(std::holds_alternative<LocalModel>(local_polytope_membership(t)) == local);
  }
  CHECK(nonlocal > 10);
}

TEST_CASE("signaling tables get a marginal-difference certificate") {
  const CorrelationTable t({2, 2, 2, 2}, {0.4, 0.1, 0.3, 0.2, 0.25, 0.25, 0.25, 0.25,
                                         0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25});
  const auto r = local_polytope_membership(t);
  REQUIRE(std::holds_alternative<InfeasibilityCertificate>(r));
  const auto& cert = std::get<InfeasibilityCertificate>(r);
  CHECK(cert.robustness == 0.0);
  CHECK(cert.table_value > cert.local_max + 1e-7);
  const auto values = evaluate_on_strategies(t.shape(), cert.coefficients);
  CHECK(*std::max_element(values.begin(), values.end()) <= cert.local_max + 1e-12);
}

TEST_CASE("membership refuses instances above the cap") {
  CHECK_THROWS_AS(local_polytope_membership(CorrelationTable::uniform({10, 10, 4, 4})), CapExceeded);
  CHECK_THROWS_AS(local_polytope_membership(correlations::pr_box(), 15), CapExceeded);
}

TEST_CASE("single-setting models stay small for long scans") {
  std::mt19937_64 gen(46);
  const auto t = oracle::random_single_setting_table(40, 3, 2, gen);
  const LocalModel m = build_single_setting_model(t);
  CHECK(m.components().size() <= 2 * (40 * 2 + 1));
  CHECK(correlations::max_abs_difference(predict(m, t.shape()), t) < 1e-12);
}
