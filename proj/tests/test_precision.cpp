#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "xebstat/bigfloat.hpp"
#include "xebstat/linalg.hpp"

using namespace xebstat;

namespace {

DenseMatrix<BigFloat> random_matrix(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseMatrix<BigFloat> m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = BigFloat(dist(rng));
  return m;
}

}  // namespace

TEST_CASE("PrecisionContext enforces the 53-bit floor and is scoped") {
  REQUIRE_THROWS_AS(PrecisionContext(52), ConfigError);
  REQUIRE(PrecisionContext::active_bits() == 256);
  {
    PrecisionContext::Use use(128);
    REQUIRE(PrecisionContext::active_bits() == 128);
    BigFloat x(1.5);
    REQUIRE(x.precision() == 128);
  }
  REQUIRE(PrecisionContext::active_bits() == 256);
}

TEST_CASE("BigFloat rejects mixed-precision arithmetic but lifts literals") {
  BigFloat a(2.0);
  BigFloat b;
  {
    PrecisionContext::Use use(128);
    b = BigFloat(3.0);
  }
  REQUIRE(b.precision() == 128);
  REQUIRE_THROWS_AS(a + b, NumericError);
  REQUIRE(a + 1 == BigFloat(3.0));
  REQUIRE((a * 0.5) == BigFloat(1.0));
}

TEST_CASE("matvec identity and shear examples") {
  auto id3 = DenseMatrix<BigFloat>::identity(3);
  std::vector<BigFloat> v{BigFloat(1.0), BigFloat(2.0), BigFloat(3.0)};
  auto r = matvec(id3, v);
  REQUIRE(r[0] == v[0]);
  REQUIRE(r[1] == v[1]);
  REQUIRE(r[2] == v[2]);

  DenseMatrix<BigFloat> shear(2, 2);
  shear(0, 0) = BigFloat(1.0);
  shear(0, 1) = BigFloat(1.0);
  shear(1, 1) = BigFloat(1.0);
  std::vector<BigFloat> ones{BigFloat(1.0), BigFloat(1.0)};
  auto s = matvec(shear, ones);
  REQUIRE(s[0] == BigFloat(2.0));
  REQUIRE(s[1] == BigFloat(1.0));

  REQUIRE_THROWS_AS(matvec(shear, v), ConfigError);
}

TEST_CASE("eig_dense on a diagonal matrix returns the leading entries") {
  DenseMatrix<BigFloat> d(3, 3);
  d(0, 0) = BigFloat(1.0);
  d(1, 1) = BigFloat(0.4);
  d(2, 2) = BigFloat(0.1);
  auto eig = eig_dense(d, 2);
  REQUIRE(eig.pairs.size() == 2);
  REQUIRE(to_double(eig.pairs[0].value) == Catch::Approx(1.0));
  REQUIRE(to_double(eig.pairs[1].value) == Catch::Approx(0.4));
  REQUIRE_FALSE(eig.pairs[0].is_complex);
}

TEST_CASE("eig_dense triangular example with left eigenvector (1,1)") {
  DenseMatrix<BigFloat> t(2, 2);
  t(0, 0) = BigFloat(1.0);
  t(0, 1) = BigFloat(0.5);
  t(1, 1) = BigFloat(0.5);
  auto eig = eig_dense(t, 2);
  REQUIRE(to_double(eig.pairs[0].value) == Catch::Approx(1.0));
  REQUIRE(to_double(eig.pairs[1].value) == Catch::Approx(0.5));
  // Left vector of the unit eigenvalue is proportional to (1, 1).
  const auto& w = eig.pairs[0].left;
  REQUIRE(to_double(abs(w[0] - w[1])) < 1e-60);
}

TEST_CASE("eig_dense random matrices: residual bounds and trace identity") {
  std::mt19937_64 rng(20240817);
  for (int rep = 0; rep < 4; ++rep) {
    std::size_t n = 10 + 3 * rep;
    auto m = random_matrix(n, rng);
    auto eig = eig_dense(m, n);  // residuals are enforced internally
    BigFloat sum(0.0);
    for (const auto& p : eig.pairs) sum += p.value;
    BigFloat tr(0.0);
    for (std::size_t i = 0; i < n; ++i) tr += m(i, i);
    REQUIRE(to_double(abs(sum - tr)) < 1e-60);

    // Spot-check the right residual of the leading pair explicitly.
    const auto& lead = eig.pairs[0];
    if (!lead.is_complex) {
      auto mv = matvec(m, lead.right);
      BigFloat worst(0.0);
      for (std::size_t i = 0; i < n; ++i) {
        BigFloat d = abs(mv[i] - lead.value * lead.right[i]);
        if (d > worst) worst = d;
      }
      REQUIRE(worst <= half_precision_tol<BigFloat>() * m.infinity_norm());
    }
  }
}

TEST_CASE("eig_dense flags complex pairs") {
  // Rotation by 90 degrees: eigenvalues +/- i.
  DenseMatrix<BigFloat> r(2, 2);
  r(0, 1) = BigFloat(-1.0);
  r(1, 0) = BigFloat(1.0);
  auto eig = eig_dense(r, 2);
  REQUIRE(eig.pairs[0].is_complex);
  REQUIRE(eig.pairs[1].is_complex);
  REQUIRE(to_double(abs(eig.pairs[0].imag)) == Catch::Approx(1.0));
}

TEST_CASE("svd_truncate threshold logic matches the stated cases") {
  DenseMatrix<BigFloat> d(2, 2);
  d(0, 0) = BigFloat(1.0);
  auto full = svd_truncate(d, BigFloat(0.0));
  REQUIRE(full.sigma.size() == 1);  // the exact zero is always discardable
  REQUIRE(to_double(full.discarded_weight) == 0.0);

  DenseMatrix<BigFloat> d2(2, 2);
  d2(0, 0) = BigFloat(3.0);
  d2(1, 1) = BigFloat(4.0);
  auto r = svd_truncate(d2, BigFloat(8.99));
  REQUIRE(r.sigma.size() == 2);  // discarding sigma=3 would cost 9 > 8.99
  REQUIRE(to_double(r.sigma[0]) == Catch::Approx(4.0));
  REQUIRE(to_double(r.sigma[1]) == Catch::Approx(3.0));
}

TEST_CASE("svd_truncate reconstruction and orthonormality on random input") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseMatrix<BigFloat> a(8, 8);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) a(i, j) = BigFloat(dist(rng));
  auto r = svd_truncate(a, BigFloat::from_string("1e-50"));

  // Reconstruction error at most 1e-24 in max norm.
  DenseMatrix<BigFloat> rec(8, 8);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      BigFloat acc(0.0);
      for (std::size_t k = 0; k < r.sigma.size(); ++k)
        acc += r.u(i, k) * r.sigma[k] * r.v(j, k);
      rec(i, j) = acc;
    }
  REQUIRE(to_double(max_abs_diff(a, rec)) < 1e-24);

  // Singular values nonnegative and descending; U, V orthonormal columns.
  for (std::size_t k = 0; k + 1 < r.sigma.size(); ++k) {
    REQUIRE(r.sigma[k] >= r.sigma[k + 1]);
    REQUIRE(r.sigma[k + 1] >= 0);
  }
  BigFloat tol = half_precision_tol<BigFloat>();
  for (std::size_t c1 = 0; c1 < r.sigma.size(); ++c1)
    for (std::size_t c2 = 0; c2 <= c1; ++c2) {
      BigFloat du(0.0), dv(0.0);
      for (std::size_t i = 0; i < 8; ++i) {
        du += r.u(i, c1) * r.u(i, c2);
        dv += r.v(i, c1) * r.v(i, c2);
      }
      BigFloat expect = (c1 == c2) ? BigFloat(1.0) : BigFloat(0.0);
      REQUIRE(abs(du - expect) <= tol);
      REQUIRE(abs(dv - expect) <= tol);
    }
}

TEST_CASE("svd_truncate handles wide matrices by transposition") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseMatrix<BigFloat> a(2, 6);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 6; ++j) a(i, j) = BigFloat(dist(rng));
  auto r = svd_truncate(a, BigFloat(0.0));
  REQUIRE(r.u.rows() == 2);
  REQUIRE(r.v.rows() == 6);
  DenseMatrix<BigFloat> rec(2, 6);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      BigFloat acc(0.0);
      for (std::size_t k = 0; k < r.sigma.size(); ++k) acc += r.u(i, k) * r.sigma[k] * r.v(j, k);
      rec(i, j) = acc;
    }
  REQUIRE(to_double(max_abs_diff(a, rec)) < 1e-70);
}

TEST_CASE("operations are deterministic: repeated runs are bit-identical") {
  std::mt19937_64 rng(5150);
  auto m = random_matrix(12, rng);
  auto run = [&]() {
    std::ostringstream os;
    auto eig = eig_dense(m, 12);
    for (const auto& p : eig.pairs) {
      os << format_real(p.value) << '|' << format_real(p.imag) << '|';
      for (const auto& x : p.right) os << format_real(x) << ',';
    }
    return os.str();
  };
  REQUIRE(run() == run());
}

TEST_CASE("linear_fit examples and degenerate input") {
  std::vector<BigFloat> xs{BigFloat(0.0), BigFloat(1.0)};
  std::vector<BigFloat> ys{BigFloat(1.0), BigFloat(2.0)};
  auto f = linear_fit(xs, ys);
  REQUIRE(to_double(f.slope) == Catch::Approx(1.0));
  REQUIRE(to_double(f.intercept) == Catch::Approx(1.0));

  std::vector<BigFloat> xs2{BigFloat(0.0), BigFloat(1.0), BigFloat(2.0)};
  std::vector<BigFloat> ys2{BigFloat(5.0), BigFloat(5.0), BigFloat(5.0)};
  auto g = linear_fit(xs2, ys2);
  REQUIRE(to_double(abs(g.slope)) < 1e-70);

  std::vector<BigFloat> bad_x{BigFloat(2.0), BigFloat(2.0)};
  REQUIRE_THROWS_AS(linear_fit(bad_x, ys), NumericError);
  std::vector<BigFloat> one_x{BigFloat(2.0)};
  std::vector<BigFloat> one_y{BigFloat(2.0)};
  REQUIRE_THROWS_AS(linear_fit(one_x, one_y), ConfigError);
}
