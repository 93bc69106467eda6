#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/QR>

#include "doctest.h"
#include "jigsaw/assignment/hungarian.hpp"
#include "jigsaw/assignment/losses.hpp"
#include "jigsaw/assignment/sinkhorn.hpp"
#include "jigsaw/error.hpp"
#include "jigsaw/rng.hpp"
#include "test_support.hpp"

using namespace jigsaw;
using namespace jigsaw::testing;
using Eigen::MatrixXd;

namespace {

// Plain alternating normalization of exp(C) in long double, no shortcuts.
Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> naive_sinkhorn(const MatrixXd& c, int iters) {
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> s = c.cast<long double>().array().exp().matrix();
  for (int k = 0; k < iters; ++k) {
    for (Eigen::Index i = 0; i < s.rows(); ++i) s.row(i) /= s.row(i).sum();
    for (Eigen::Index j = 0; j < s.cols(); ++j) s.col(j) /= s.col(j).sum();
  }
  return s;
}

double brute_force_best(const MatrixXd& m, bool maximize) {
  double best = maximize ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  for (const auto& p : permutations_of(static_cast<int>(m.rows()))) {
    double total = 0;
    for (std::size_t i = 0; i < p.size(); ++i) total += m(static_cast<Eigen::Index>(i), p[i]);
    best = maximize ? std::max(best, total) : std::min(best, total);
  }
  return best;
}

template <typename F>
Errc error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected jigsaw::Error");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("sinkhorn on hand examples") {
  const auto uniform = sinkhorn_normalize(MatrixXd::Zero(2, 2));
  CHECK(uniform.values.isApprox(MatrixXd::Constant(2, 2, 0.5), 1e-15));

  MatrixXd peaked(2, 2);
  peaked << 10, 0, 0, 10;
  const auto s = sinkhorn_normalize(peaked);
  const auto reference = naive_sinkhorn(peaked, 200);
  for (Eigen::Index k = 0; k < 4; ++k) {
    CHECK(std::abs(s.values.data()[k] - static_cast<double>(reference.data()[k])) < 1e-12);
  }
  CHECK(std::abs(s.values(0, 0) - 1.0) < 1e-4);
  CHECK(std::abs(s.values(0, 1)) < 1e-4);

  Rng rng(6);
  const MatrixXd c = random_matrix(6, 6, -1, 1, rng);
  const auto tight = sinkhorn_normalize(c, {1000, 1e-8});
  CHECK((tight.values.rowwise().sum().array() - 1).abs().maxCoeff() < 1e-8);
  CHECK((tight.values.colwise().sum().array() - 1).abs().maxCoeff() < 1e-8);
}

TEST_CASE("sinkhorn matches plain iteration and honours its tolerance") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng.below(20));
    const MatrixXd c = random_matrix(n, n, -5, 5, rng);
    const auto s = sinkhorn_normalize(c);
    CHECK((s.values.array() >= 0).all());
    if (s.iterations_used < SinkhornOptions{}.max_iters) CHECK(s.achieved_tolerance <= 1e-6);
    CHECK((s.values.rowwise().sum().array() - 1).abs().maxCoeff() <= s.achieved_tolerance + 1e-15);
    CHECK((s.values.colwise().sum().array() - 1).abs().maxCoeff() <= s.achieved_tolerance + 1e-15);
    const auto reference = naive_sinkhorn(c, s.iterations_used);
    CHECK((s.values - reference.cast<double>()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("small sinkhorn problems converge with a larger iteration budget") {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng.below(4));
    const auto s = sinkhorn_normalize(random_matrix(n, n, -5, 5, rng), {100000, 1e-6});
    CHECK(s.iterations_used < 100000);
    CHECK(s.achieved_tolerance < 1e-6);
  }
}

TEST_CASE("sinkhorn survives large ranges and rejects bad input") {
  MatrixXd wide(3, 3);
  wide << 900, 0, -900, 0, 900, 0, -900, 0, 900;
  const auto s = sinkhorn_normalize(wide);
  CHECK(s.values.allFinite());
  CHECK(std::abs(s.values(1, 1) - 1.0) < 1e-9);

  MatrixXd masked = MatrixXd::Zero(2, 2);
  masked(0, 1) = -std::numeric_limits<double>::infinity();
  const auto m = sinkhorn_normalize(masked);
  CHECK(m.values(0, 1) == 0.0);

  MatrixXd dead = MatrixXd::Zero(2, 2);
  dead.row(0).setConstant(-std::numeric_limits<double>::infinity());
  CHECK(error_code_of([&] { sinkhorn_normalize(dead); }) == Errc::Degenerate);
  CHECK(error_code_of([&] { sinkhorn_normalize(MatrixXd::Zero(2, 3)); }) == Errc::NonSquare);
  MatrixXd bad = MatrixXd::Zero(2, 2);
  bad(1, 1) = std::nan("");
  CHECK(error_code_of([&] { sinkhorn_normalize(bad); }) == Errc::InvalidArgument);

  const Eigen::MatrixXf single = Eigen::MatrixXf::Random(4, 4);
  const auto f = sinkhorn_normalize(single, {100, 1e-4});
  CHECK((f.values.rowwise().sum().array() - 1).abs().maxCoeff() < 1e-3f);
}

TEST_CASE("sinkhorn backward matches finite differences") {
  Rng rng(21);
  const SinkhornOptions fixed{10, 0.0};
  SUBCASE("zero upstream gives zero gradient") {
    const MatrixXd c = random_matrix(4, 4, -1, 1, rng);
    const auto s = sinkhorn_normalize(c, fixed);
    CHECK(sinkhorn_backward(c, s, MatrixXd::Zero(4, 4)).isZero(0));
  }
  SUBCASE("random 3x3 with ten iterations") {
    for (int trial = 0; trial < 10; ++trial) {
      const MatrixXd c = random_matrix(3, 3, -2, 2, rng);
      const MatrixXd g = random_matrix(3, 3, -1, 1, rng);
      const auto s = sinkhorn_normalize(c, fixed);
      REQUIRE(s.iterations_used == 10);
      const MatrixXd analytic = sinkhorn_backward(c, s, g);
      const MatrixXd numeric = finite_difference(
          [&](const MatrixXd& x) { return sinkhorn_normalize(x, fixed).values.cwiseProduct(g).sum(); }, c);
      CHECK(max_relative_error(analytic, numeric) < 1e-4);
    }
  }
  SUBCASE("constant upstream on symmetric cost is symmetric") {
    MatrixXd c = random_matrix(5, 5, -1, 1, rng);
    c = (c + c.transpose()).eval();
    const auto s = sinkhorn_normalize(c, fixed);
    const MatrixXd grad = sinkhorn_backward(c, s, MatrixXd::Constant(5, 5, 0.7));
    CHECK((grad - grad.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("missing iteration record") {
    DoublyStochasticMatrix<double> empty{MatrixXd::Zero(2, 2), 0.0, 0};
    CHECK(error_code_of([&] { sinkhorn_backward(MatrixXd::Zero(2, 2), empty, MatrixXd::Zero(2, 2)); }) ==
          Errc::IterationRecordMissing);
  }
}

TEST_CASE("hungarian on hand examples") {
  CHECK(hungarian_solve(MatrixXd::Identity(3, 3), true).mapping() == std::vector<int>{0, 1, 2});
  MatrixXd m(2, 2);
  m << 0.1, 0.9, 0.8, 0.2;
  CHECK(hungarian_solve(m, true).mapping() == std::vector<int>{1, 0});
  CHECK(hungarian_solve(m, false).mapping() == std::vector<int>{0, 1});
  CHECK(hungarian_solve(MatrixXd::Constant(3, 3, 0.25), true).mapping() == std::vector<int>{0, 1, 2});
  CHECK(error_code_of([&] { hungarian_solve(MatrixXd::Zero(2, 3), true); }) == Errc::NonSquare);
}

TEST_CASE("hungarian agrees with exhaustive search") {
  Rng rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    const MatrixXd m = random_matrix(6, 6, -1, 1, rng);
    const Permutation best = hungarian_solve(m, true);
    CHECK(best.is_bijection());
    CHECK(assignment_score(m, best) == doctest::Approx(brute_force_best(m, true)).epsilon(1e-12));
    const Permutation least = hungarian_solve(m, false);
    CHECK(assignment_score(m, least) == doctest::Approx(brute_force_best(m, false)).epsilon(1e-12));
  }
  // Integer scores make ties common; the optimum value must still be exact.
  for (int trial = 0; trial < 100; ++trial) {
    MatrixXd m(5, 5);
    for (Eigen::Index k = 0; k < 25; ++k) m.data()[k] = static_cast<double>(rng.below(4));
    CHECK(assignment_score(m, hungarian_solve(m, true)) == brute_force_best(m, true));
  }
}

TEST_CASE("hungarian is invariant to row and column offsets") {
  Rng rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd m = random_matrix(7, 7, 0, 1, rng);
    MatrixXd shifted = m;
    shifted.row(static_cast<Eigen::Index>(rng.below(7))).array() += rng.uniform(-3, 3);
    shifted.col(static_cast<Eigen::Index>(rng.below(7))).array() += rng.uniform(-3, 3);
    CHECK(hungarian_solve(m, true) == hungarian_solve(shifted, true));
  }
}

TEST_CASE("solve_rectangular") {
  MatrixXd one(1, 2);
  one << 0.9, 0.1;
  CHECK(solve_rectangular(one, true).mapping() == std::vector<int>{0});

  Rng rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd m = random_matrix(2, 3, -1, 1, rng);
    double best = -1e300;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        if (a != b) best = std::max(best, m(0, a) + m(1, b));
      }
    }
    const Permutation p = solve_rectangular(m, true);
    CHECK(p.slots() == 3);
    CHECK(assignment_score(m, p) == doctest::Approx(best).epsilon(1e-12));
  }
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd sq = random_matrix(5, 5, -1, 1, rng);
    CHECK(solve_rectangular(sq, true) == hungarian_solve(sq, true));
  }
  CHECK(error_code_of([&] { solve_rectangular(MatrixXd::Zero(3, 2), true); }) == Errc::MoreRowsThanColumns);
}

TEST_CASE("hungarian attention mask") {
  const Permutation id = Permutation::identity(3);
  const auto same = hungarian_attention_mask(MatrixXd(MatrixXd::Identity(3, 3)), id);
  CHECK(same.values == MatrixXd::Identity(3, 3));
  CHECK(same.popcount() == 3);

  MatrixXd swap(2, 2);
  swap << 0.1, 0.9, 0.9, 0.1;
  const auto full = hungarian_attention_mask(swap, Permutation::identity(2));
  CHECK(full.values == MatrixXd::Ones(2, 2));

  MatrixXd partial(3, 3);
  partial << 0.2, 0.7, 0.1, 0.7, 0.2, 0.1, 0.1, 0.1, 0.8;
  const auto five = hungarian_attention_mask(partial, id);
  MatrixXd expected = MatrixXd::Identity(3, 3);
  expected(0, 1) = expected(1, 0) = 1;
  CHECK(five.values == expected);
  CHECK(five.popcount() == 5);

  Rng rng(66);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<int>(2 + rng.below(7));
    const auto s = sinkhorn_normalize(random_matrix(n, n, -3, 3, rng));
    std::vector<int> gt(static_cast<std::size_t>(n));
    std::iota(gt.begin(), gt.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(gt[static_cast<std::size_t>(i)], gt[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    const auto mask = hungarian_attention_mask(s, Permutation(gt));
    CHECK(mask.popcount() >= n);
    CHECK(mask.popcount() <= 2 * n);
    for (int i = 0; i < n; ++i) CHECK(mask.values(i, gt[static_cast<std::size_t>(i)]) == 1.0);
  }
  CHECK(error_code_of([&] { hungarian_attention_mask(swap, id); }) == Errc::SizeMismatch);
}

TEST_CASE("attended BCE loss") {
  const Permutation id2 = Permutation::identity(2);
  const AttentionMask<double> ones{MatrixXd::Ones(2, 2)};
  const auto uniform = attended_bce_loss(MatrixXd(MatrixXd::Constant(2, 2, 0.5)), id2, ones);
  CHECK(std::abs(uniform.loss - 4 * std::log(2.0)) < 1e-9);

  const Permutation id4 = Permutation::identity(4);
  const MatrixXd perfect = one_hot<double>(id4);
  const auto near_zero = attended_bce_loss(perfect, id4, AttentionMask<double>{perfect});
  CHECK(near_zero.loss >= 0);
  CHECK(near_zero.loss <= 4 * std::abs(std::log(1 - kBceEpsilon)) + 1e-15);

  Rng rng(77);
  const MatrixXd s = random_matrix(4, 4, 0.05, 0.95, rng);
  const Permutation gt({2, 0, 3, 1});
  const auto mask = hungarian_attention_mask(s, gt);
  const auto result = attended_bce_loss(s, gt, mask);
  CHECK(result.loss >= 0);
  const MatrixXd numeric = finite_difference([&](const MatrixXd& x) { return attended_bce_loss(x, gt, mask).loss; }, s);
  CHECK(max_relative_error(result.gradient, numeric) < 1e-4);
  for (Eigen::Index k = 0; k < 16; ++k) {
    if (mask.values.data()[k] == 0) CHECK(result.gradient.data()[k] == 0.0);
  }
  CHECK(error_code_of([&] { attended_bce_loss(s, id2, mask); }) == Errc::SizeMismatch);
}

TEST_CASE("attended BCE through sinkhorn matches finite differences") {
  Rng rng(88);
  const SinkhornOptions fixed{10, 0.0};
  for (int trial = 0; trial < 5; ++trial) {
    const MatrixXd c = random_matrix(4, 4, -2, 2, rng);
    const Permutation gt({1, 3, 0, 2});
    const auto s = sinkhorn_normalize(c, fixed);
    const auto mask = hungarian_attention_mask(s, gt);
    const auto bce = attended_bce_loss(s.values, gt, mask);
    const MatrixXd analytic = sinkhorn_backward(c, s, bce.gradient);
    const MatrixXd numeric = finite_difference(
        [&](const MatrixXd& x) { return attended_bce_loss(sinkhorn_normalize(x, fixed).values, gt, mask).loss; }, c);
    CHECK(max_relative_error(analytic, numeric) < 1e-4);
  }
}

TEST_CASE("contrastive loss") {
  MatrixXd single(3, 1);
  single << 1, 0, 0;
  CHECK(contrastive_loss(single, single, Permutation::identity(1), 0.5).loss == 0.0);

  const MatrixXd basis = MatrixXd::Identity(2, 2);
  const auto pair = contrastive_loss(basis, basis, Permutation::identity(2), 1.0);
  const double e = std::exp(1.0);
  CHECK(std::abs(pair.loss - (-std::log(e / (e + 1)))) < 1e-9);
  CHECK(pair.loss == doctest::Approx(0.3133).epsilon(1e-4));

  Rng rng(99);
  const MatrixXd pieces = random_matrix(16, 8, -1, 1, rng);
  const MatrixXd slots = random_matrix(16, 8, -1, 1, rng);
  const Permutation gt({3, 1, 4, 0, 7, 5, 2, 6});
  const double tau = 0.7;
  const auto result = contrastive_loss(pieces, slots, gt, tau);
  const MatrixXd dp = finite_difference([&](const MatrixXd& x) { return contrastive_loss(x, slots, gt, tau).loss; }, pieces);
  const MatrixXd ds = finite_difference([&](const MatrixXd& x) { return contrastive_loss(pieces, x, gt, tau).loss; }, slots);
  CHECK(max_relative_error(result.piece_gradient, dp) < 1e-4);
  CHECK(max_relative_error(result.slot_gradient, ds) < 1e-4);

  // A common orthogonal rotation preserves every dot product.
  const MatrixXd q = Eigen::HouseholderQR<MatrixXd>(random_matrix(16, 16, -1, 1, rng)).householderQ();
  CHECK(contrastive_loss(MatrixXd(q * pieces), MatrixXd(q * slots), gt, tau).loss == doctest::Approx(result.loss).epsilon(1e-12));

  CHECK(error_code_of([&] { contrastive_loss(pieces, slots, gt, 0.0); }) == Errc::NonPositiveTemperature);
  CHECK(error_code_of([&] { contrastive_loss(pieces, MatrixXd(slots.topRows(8)), gt, tau); }) == Errc::SizeMismatch);
}
