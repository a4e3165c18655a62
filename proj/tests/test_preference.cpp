#include <cmath>
#include <vector>

#include "doctest.h"
#include "duelbandits/errors.hpp"
#include "duelbandits/preference.hpp"
#include "test_util.hpp"

using namespace duelbandits;

TEST_SUITE("preference") {

TEST_CASE("construction validates shape, range and complement") {
  const auto m = PreferenceMatrix::from_rows({{0.5, 0.7}, {0.3, 0.5}});
  CHECK(m.size() == 2);
  CHECK(m(0, 1) == 0.7);
  CHECK(m(1, 0) == 0.3);

  CHECK_THROWS_AS(PreferenceMatrix::from_rows({{0.5, 0.7}, {0.4, 0.5}}), ComplementViolation);
  CHECK_THROWS_AS(PreferenceMatrix::from_rows({{0.5, 0.7, 0.1}, {0.3, 0.5}}), DimensionError);
  CHECK_THROWS_AS(PreferenceMatrix::from_rows({{0.5}}), DimensionError);
  CHECK_THROWS_AS(PreferenceMatrix::from_rows({{0.5, 1.2}, {-0.2, 0.5}}), RangeError);
  CHECK_THROWS_AS(PreferenceMatrix::from_rows({{0.5, NAN}, {0.5, 0.5}}), RangeError);
  CHECK_THROWS_AS(PreferenceMatrix::from_flat(3, {0.5, 0.5}), DimensionError);

  // all-1/2 matrix is the zero-gap instance
  const auto f = PreferenceMatrix::from_rows({{0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}});
  CHECK(find_condorcet_winner(f) == Arm{0});
}

TEST_CASE("diagonal is coerced to one half, complement tolerance is 1e-9") {
  const auto m = PreferenceMatrix::from_rows({{0.9, 0.6}, {0.4, 0.1}});
  CHECK(m(0, 0) == 0.5);
  CHECK(m(1, 1) == 0.5);
  CHECK_NOTHROW(PreferenceMatrix::from_rows({{0.5, 0.6 + 5e-10}, {0.4, 0.5}}));
  CHECK_THROWS_AS(PreferenceMatrix::from_rows({{0.5, 0.6 + 5e-9}, {0.4, 0.5}}), ComplementViolation);
}

TEST_CASE("BTL from weights") {
  const std::vector<double> w13{1.0, 3.0};
  CHECK(btl_from_weights(w13)(0, 1) == doctest::Approx(0.25).epsilon(1e-15));
  for (double c : {1e-6, 0.3, 1.0, 7.5}) {
    const std::vector<double> wc{c, c};
    CHECK(btl_from_weights(wc)(0, 1) == 0.5);
  }
  const std::vector<double> bad{1.0, 0.0};
  CHECK_THROWS_AS(btl_from_weights(bad), RangeError);

  const std::vector<double> w421{4.0, 2.0, 1.0};
  const auto g = gaps(btl_from_weights(w421));
  CHECK(g.winner == 0);
  CHECK(g.eps[0] == 0.0);
  CHECK(g.eps[1] == doctest::Approx(0.16666666666666663).epsilon(1e-12));
  CHECK(g.eps[2] == doctest::Approx(0.30000000000000004).epsilon(1e-12));
  REQUIRE(g.eps_min);
  CHECK(*g.eps_min == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("generated BTL instances satisfy SST and STI; largest weight wins") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = trial < 5 ? 100 : 2 + rng.below(30);
    Rng draw = rng.split(trial);
    const auto m = generate_btl(k, draw);
    const auto rep = check_structure(m);
    CHECK(rep.total_order);
    CHECK(rep.sst);
    CHECK(rep.sti);

    // Recompute the weights from the same stream and confirm the argmax is the winner.
    Rng again = rng.split(trial);
    std::vector<double> w(k);
    for (auto& x : w) x = 1.0 - again.uniform();
    const auto best = static_cast<Arm>(std::max_element(w.begin(), w.end()) - w.begin());
    CHECK(gaps(m).winner == best);
  }
  CHECK_THROWS_AS([] { Rng r(1); return generate_btl(1, r); }(), DimensionError);
}

TEST_CASE("generators are deterministic in their seed") {
  Rng a(77), b(77), c(78);
  const auto ma = generate_btl(12, a);
  CHECK(ma == generate_btl(12, b));
  CHECK_FALSE(ma == generate_btl(12, c));
}

TEST_CASE("Condorcet-hard generator") {
  // 1-based (k=3, winner 2) becomes winner index 1.
  const auto m = generate_condorcet_hard(3, 0.1, 1);
  CHECK(m(1, 0) == doctest::Approx(0.6));
  CHECK(m(1, 2) == doctest::Approx(0.6));
  CHECK(m(0, 2) == 0.5);
  CHECK(find_condorcet_winner(m) == Arm{1});

  CHECK(generate_condorcet_hard(2, 0.4, 0)(0, 1) == doctest::Approx(0.9));

  const auto g = gaps(generate_condorcet_hard(4, 0.3, 0));
  CHECK(g.winner == 0);
  CHECK(g.eps == std::vector<double>{0.0, 0.30000000000000004, 0.30000000000000004, 0.30000000000000004});

  CHECK_THROWS_AS(generate_condorcet_hard(3, 0.0, 0), RangeError);
  CHECK_THROWS_AS(generate_condorcet_hard(3, 0.5, 0), RangeError);
  CHECK_THROWS_AS(generate_condorcet_hard(3, -0.1, 0), RangeError);
  CHECK_THROWS_AS(generate_condorcet_hard(3, 0.1, 3), RangeError);
}

TEST_CASE("Condorcet-hard: declared winner is the unique winner with eps_min = delta") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng.below(15);
    const double delta = 0.5 * (1.0 - rng.uniform());
    if (!(delta < 0.5)) continue;
    const Arm w = rng.below(k);
    const auto m = generate_condorcet_hard(k, delta, w);
    // exhaustive scan: exactly one arm weakly beats all others
    int winners = 0;
    for (Arm i = 0; i < k; ++i) {
      bool all = true;
      for (Arm j = 0; j < k; ++j) all = all && (i == j || m(i, j) >= 0.5);
      winners += all;
    }
    CHECK(winners == 1);
    CHECK(find_condorcet_winner(m) == w);
    const auto g = gaps(m);
    REQUIRE(g.eps_min);
    CHECK(*g.eps_min == doctest::Approx(delta).epsilon(1e-12));
  }
}

TEST_CASE("Condorcet winner scan") {
  const auto rps = PreferenceMatrix::from_rows({{0.5, 0.6, 0.4}, {0.4, 0.5, 0.6}, {0.6, 0.4, 0.5}});
  CHECK_FALSE(find_condorcet_winner(rps).has_value());
  CHECK_THROWS_AS(gaps(rps), NoCondorcetWinner);

  const auto f = PreferenceMatrix::from_flat(4, std::vector<double>(16, 0.5));
  const auto g = gaps(f);
  CHECK(g.winner == 0);
  CHECK_FALSE(g.eps_min.has_value());
  for (double e : g.eps) CHECK(e == 0.0);
}

TEST_CASE("SST and STI checks") {
  // order 0 > 1 > 2, with eps(0,1)=0.1, eps(1,2)=0.1, eps(0,2)=0.05
  auto three = [](double e01, double e12, double e02) {
    return PreferenceMatrix::from_rows(
        {{0.5, 0.5 + e01, 0.5 + e02}, {0.5 - e01, 0.5, 0.5 + e12}, {0.5 - e02, 0.5 - e12, 0.5}});
  };
  const auto weak = three(0.1, 0.1, 0.05);
  CHECK_FALSE(check_sst(weak));
  CHECK(check_sti(weak));

  const auto wide = three(0.2, 0.2, 0.45);
  CHECK(check_sst(wide));
  CHECK_FALSE(check_sti(wide));

  const auto rps = PreferenceMatrix::from_rows({{0.5, 0.6, 0.4}, {0.4, 0.5, 0.6}, {0.6, 0.4, 0.5}});
  const auto rep = check_structure(rps);
  CHECK_FALSE(rep.total_order);
  CHECK_FALSE(rep.sst);
  CHECK_FALSE(rep.sti);
  CHECK(rep.diagnostic.find("NoTotalOrder") != std::string::npos);
}

TEST_CASE("property: SST implies the reported order is consistent with pairwise wins") {
  Rng rng(99);
  int sst_seen = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 2 + rng.below(6);
    Rng sub = rng.split(trial);
    const auto m = trial % 2 ? generate_btl(k, sub) : testutil::random_matrix(k, sub);
    const auto rep = check_structure(m);
    if (!rep.sst) continue;
    ++sst_seen;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b) CHECK(m(rep.order[a], rep.order[b]) >= 0.5 - kStructureTolerance);
  }
  CHECK(sst_seen > 250);
}

TEST_CASE("property: complement and diagonal hold for every generator") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng.below(20);
    Rng sub = rng.split(trial);
    const auto btl = generate_btl(k, sub);
    const auto cd = generate_condorcet_hard(k, 0.01 + 0.48 * rng.uniform(), rng.below(k));
    for (const auto* m : {&btl, &cd}) {
      for (Arm i = 0; i < k; ++i) {
        CHECK((*m)(i, i) == 0.5);
        for (Arm j = 0; j < k; ++j) CHECK(std::abs((*m)(i, j) + (*m)(j, i) - 1.0) <= 1e-12);
      }
    }
  }
}

TEST_CASE("CSV parsing") {
  const auto m = parse_matrix_csv("0.5,0.7\n0.3,0.5");
  CHECK(m.size() == 2);
  CHECK(m(0, 1) == 0.7);
  CHECK(parse_matrix_csv("0.5, 0.7\r\n0.3 ,0.5\r\n\n") == m);

  CHECK_THROWS_AS(parse_matrix_csv("0.5,0.7\n0.3"), ParseError);
  CHECK_THROWS_AS(parse_matrix_csv("0.5,0.7,0.5\n0.3,0.5,0.5"), ParseError);
  CHECK_THROWS_AS(parse_matrix_csv("0.5,abc\n0.3,0.5"), ParseError);
  CHECK_THROWS_AS(parse_matrix_csv("0.5,,\n0.3,0.5"), ParseError);
  CHECK_THROWS_AS(parse_matrix_csv(""), ParseError);
  CHECK_THROWS_AS(parse_matrix_csv("0.5,0.7\n0.4,0.5"), ComplementViolation);
  CHECK_THROWS_AS(load_matrix_csv("/nonexistent/dir/matrix.csv"), IoError);
}

TEST_CASE("CSV round trip is byte-identical") {
  const auto dir = testutil::scratch("preference_csv");
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + rng.below(12);
    Rng sub = rng.split(trial);
    const auto m = trial % 2 ? generate_btl(k, sub) : testutil::random_matrix(k, sub);
    const auto f1 = dir / "a.csv", f2 = dir / "b.csv";
    write_matrix_csv(m, f1);
    const auto loaded = load_matrix_csv(f1);
    CHECK(loaded == m);
    write_matrix_csv(loaded, f2);
    CHECK(testutil::slurp(f1) == testutil::slurp(f2));
  }
  CHECK_THROWS_AS(write_matrix_csv(generate_condorcet_hard(2, 0.1, 0), dir / "missing" / "x.csv"), IoError);
}

}  // TEST_SUITE
