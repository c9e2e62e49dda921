#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "xebstat/noise.hpp"

using namespace xebstat;

namespace {

using xebstat::cos;
using xebstat::sin;
using xebstat::sqrt;

/// Random mixed-unitary (hence unital) qubit channel.
template <class Real>
KrausChannel<Real> random_unital_channel(std::mt19937_64& rng, int n_ops) {
  std::uniform_real_distribution<double> dist(0.0, 6.283185307179586);
  std::uniform_real_distribution<double> wdist(0.1, 1.0);
  std::vector<double> weights(n_ops);
  double total = 0;
  for (auto& w : weights) {
    w = wdist(rng);
    total += w;
  }
  KrausChannel<Real> ch;
  ch.q = 2;
  for (int k = 0; k < n_ops; ++k) {
    Real a(real_from<Real>(dist(rng))), b(real_from<Real>(dist(rng))), c(real_from<Real>(dist(rng)));
    Real cb = cos(b / 2), sb = sin(b / 2);
    Complex<Real> epa(cos((a + c) / 2), sin((a + c) / 2));
    Complex<Real> ema(cos((a - c) / 2), sin((a - c) / 2));
    ComplexMatrix<Real> u(2, 2);
    u(0, 0) = conj(epa) * cb;
    u(0, 1) = -(conj(ema) * sb);
    u(1, 0) = ema * sb;
    u(1, 1) = epa * cb;
    Real w = sqrt(real_from<Real>(weights[k] / total));
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) u(i, j) = u(i, j) * w;
    ch.ops.push_back(std::move(u));
  }
  return ch;
}

/// Average state infidelity over the six-state 2-design.
template <class Real>
Real design_infidelity(const KrausChannel<Real>& ch) {
  std::vector<ComplexMatrix<Real>> states;
  Real h = Real(1) / 2;
  auto mk = [&](Complex<Real> a00, Complex<Real> a01, Complex<Real> a10, Complex<Real> a11) {
    ComplexMatrix<Real> rho(2, 2);
    rho(0, 0) = a00;
    rho(0, 1) = a01;
    rho(1, 0) = a10;
    rho(1, 1) = a11;
    states.push_back(rho);
  };
  Complex<Real> zero(Real(0), Real(0)), one(Real(1), Real(0)), half(h, Real(0));
  Complex<Real> ih(Real(0), h), mih(Real(0), -h);
  mk(one, zero, zero, zero);          // |0>
  mk(zero, zero, zero, one);          // |1>
  mk(half, half, half, half);         // |+>
  mk(half, -half, -half, half);       // |->
  mk(half, mih, ih, half);            // |+i>
  mk(half, ih, mih, half);            // |-i>
  Real acc(0);
  for (const auto& rho : states) {
    ComplexMatrix<Real> out(2, 2);
    for (const auto& k : ch.ops) out = out + k * rho * k.adjoint();
    acc += (rho * out).trace().re;
  }
  return Real(1) - acc / 6;
}

}  // namespace

TEST_CASE("identity channel has trivial parameters") {
  using R = BigFloat;
  auto p = stat_params_from_kraus(identity_channel<R>(2));
  REQUIRE(to_double(abs(p.r)) < 1e-70);
  REQUIRE(to_double(abs(p.u - 1)) < 1e-70);
  REQUIRE(to_double(abs(p.mu)) < 1e-70);
  REQUIRE(to_double(abs(p.gamma1)) < 1e-70);
  REQUIRE(to_double(abs(p.gamma2)) < 1e-70);
  REQUIRE(to_double(abs(p.delta2)) < 1e-70);
  auto n2 = two_copy_update(p);
  REQUIRE(to_double(abs(n2(0, 0) - 1)) < 1e-70);
  REQUIRE(to_double(abs(n2(1, 1) - 1)) < 1e-70);
}

TEST_CASE("depolarizing(p): r = p/2, gamma1 = p, epsilon = 3p/4, Y1 = 4 - 3p") {
  using R = BigFloat;
  R p = R(1) / 100;
  auto s = stat_params_from_kraus(depolarizing_channel(p));
  REQUIRE(to_double(abs(s.r - p / 2)) < 1e-70);
  REQUIRE(to_double(abs(s.gamma1 - p)) < 1e-70);
  REQUIRE(to_double(abs(s.epsilon - p * 3 / 4)) < 1e-70);
  REQUIRE(to_double(abs(s.y1 - (R(4) - p * 3))) < 1e-70);
  REQUIRE(to_double(abs(s.mu)) < 1e-70);
  // y1 = q^2 - r q (q+1) consistency
  REQUIRE(to_double(abs(s.y1 - (R(4) - s.r * 6))) < 1e-70);
  auto n1 = one_copy_update(s);
  REQUIRE(to_double(abs(n1(0, 1) - R(1) / 100)) < 1e-70);
  REQUIRE(to_double(abs(n1(1, 1) - R(99) / 100)) < 1e-70);
}

TEST_CASE("depolarizing gamma1 is linear in p") {
  using R = BigFloat;
  for (int i = 1; i <= 10; ++i) {
    R p = R(static_cast<long>(i)) / 50;
    auto s = stat_params_from_kraus(depolarizing_channel(p));
    REQUIRE(to_double(abs(s.gamma1 - p)) < 1e-60);
  }
}

TEST_CASE("amplitude damping: mu = 2 eta^2, delta2 = mu / (q (q^2 - 1))") {
  using R = BigFloat;
  R eta = R(1) / 10;
  auto s = stat_params_from_kraus(amplitude_damping_channel(eta));
  REQUIRE(to_double(abs(s.mu - eta * eta * 2)) < 1e-70);
  REQUIRE(to_double(abs(s.delta2 - eta * eta * 2 / 6)) < 1e-70);
  REQUIRE(to_double(s.delta2) == Catch::Approx(0.0033333333333).epsilon(1e-9));
  auto n2 = two_copy_update(s);
  REQUIRE(to_double(abs(n2(1, 0) - s.delta2)) < 1e-70);
  REQUIRE(to_double(abs(n2(0, 0) + n2(1, 0) - 1)) < 1e-70);  // columns sum to 1
}

TEST_CASE("one-copy update of the identity component is channel-independent") {
  using R = BigFloat;
  // Tr(N1(I/q^2) SWAP) = 1/q for any channel, including non-unital ones.
  auto check = [](const KrausChannel<R>& ch) {
    ComplexMatrix<R> eye = ComplexMatrix<R>::identity(4);
    auto swap = detail::swap_operator<R>(2);
    R val = detail::trace_against_swap(detail::one_copy_apply(ch, eye), 2) / 4;
    REQUIRE(to_double(abs(val - R(1) / 2)) < 1e-70);
  };
  check(amplitude_damping_channel(R(3) / 10));
  check(depolarizing_channel(R(1) / 20));
  check(dephasing_channel(R(1) / 5));
}

TEST_CASE("random unital channels: mu = 0 and gamma2 = 1 - u") {
  using R = double;
  std::mt19937_64 rng(20240202);
  for (int rep = 0; rep < 1000; ++rep) {
    auto ch = random_unital_channel<R>(rng, 2 + rep % 3);
    auto s = stat_params_from_kraus(ch);
    REQUIRE(std::abs(s.mu) < 1e-10);
    REQUIRE(std::abs(s.gamma2 - (1.0 - s.u)) < 1e-10);
    REQUIRE(s.gamma1 >= -1e-12);
    REQUIRE(s.gamma1 <= 2.0 + 1e-12);
    auto n1 = one_copy_update(s);
    REQUIRE(std::abs(n1(0, 0) + n1(1, 0) - 1.0) < 1e-12);
    REQUIRE(std::abs(n1(0, 1) + n1(1, 1) - 1.0) < 1e-12);
  }
}

TEST_CASE("design-averaged infidelity matches the Y1-derived r") {
  using R = BigFloat;
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    auto ch = random_unital_channel<R>(rng, 3);
    auto s = stat_params_from_kraus(ch);
    REQUIRE(to_double(abs(design_infidelity(ch) - s.r)) < 1e-10);
  }
  auto ad = amplitude_damping_channel(BigFloat(0.25));
  auto s = stat_params_from_kraus(ad);
  REQUIRE(to_double(abs(design_infidelity(ad) - s.r)) < 1e-10);
}

TEST_CASE("gamma_from_epsilon conversion and range") {
  using R = BigFloat;
  REQUIRE(to_double(gamma_from_epsilon(R(0), 2)) == 0.0);
  REQUIRE(to_double(gamma_from_epsilon(R(3) / 100, 2)) == Catch::Approx(0.04));
  REQUIRE(to_double(gamma_from_epsilon(R(3) / 4, 2)) == Catch::Approx(1.0));
  REQUIRE_THROWS_AS(gamma_from_epsilon(R(8) / 10, 2), ConfigError);
  REQUIRE_THROWS_AS(gamma_from_epsilon(R(-1) / 10, 2), ConfigError);
}

TEST_CASE("completeness violations are rejected") {
  using R = BigFloat;
  KrausChannel<R> bad;
  bad.q = 2;
  ComplexMatrix<R> half = ComplexMatrix<R>::identity(2);
  half(0, 0) = Complex<R>(R(1) / 2, R(0));
  bad.ops.push_back(half);
  REQUIRE_THROWS_AS(stat_params_from_kraus(bad), ConfigError);
}
