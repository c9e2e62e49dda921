#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "xebstat/gates.hpp"

using namespace xebstat;

namespace {

using xebstat::atan;
using xebstat::cos;
using xebstat::sin;

template <class Real>
Real pi_val() {
  return atan(Real(1)) * 4;
}

template <class Real>
ComplexMatrix<Real> random_single_qubit(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.0, 6.283185307179586);
  Real a(real_from<Real>(dist(rng))), b(real_from<Real>(dist(rng))), c(real_from<Real>(dist(rng)));
  // U = Rz(a) Ry(b) Rz(c)
  ComplexMatrix<Real> u(2, 2);
  Real cb = cos(b / 2), sb = sin(b / 2);
  Complex<Real> epa(cos((a + c) / 2), sin((a + c) / 2));
  Complex<Real> ema(cos((a - c) / 2), sin((a - c) / 2));
  u(0, 0) = conj(epa) * cb;
  u(0, 1) = -(conj(ema) * sb);
  u(1, 0) = ema * sb;
  u(1, 1) = epa * cb;
  return u;
}

}  // namespace

TEST_CASE("canonical invariants reproduce the named-gate table") {
  using R = BigFloat;
  R pi = pi_val<R>();
  auto check = [](const CanonicalGate<R>& g, double g1, double g2) {
    auto inv = invariants_from_canonical(g);
    REQUIRE(to_double(abs(inv.abs_g1 - real_from<R>(g1))) < 1e-70);
    REQUIRE(to_double(abs(inv.g2 - real_from<R>(g2))) < 1e-70);
  };
  check({pi / 2, R(0), R(0)}, 0.0, 1.0);        // CNOT
  check({pi / 2, pi / 2, pi / 2}, 1.0, -3.0);   // SWAP
  check({R(0), R(0), R(0)}, 1.0, 3.0);          // identity / single-qubit
  check({pi / 2, pi / 2, R(0)}, 0.0, -1.0);     // iSWAP
}

TEST_CASE("unitary-route invariants agree with the canonical closed forms") {
  using R = BigFloat;
  R pi = pi_val<R>();
  CanonicalGate<R> cnot{pi / 2, R(0), R(0)};
  auto u = canonical_unitary(cnot);
  auto inv = invariants_from_unitary(u);
  REQUIRE(to_double(abs(inv.abs_g1)) < 1e-60);
  REQUIRE(to_double(abs(inv.g2 - 1)) < 1e-60);

  CanonicalGate<R> iswap{pi / 2, pi / 2, R(0)};
  auto inv2 = invariants_from_unitary(canonical_unitary(iswap));
  REQUIRE(to_double(abs(inv2.abs_g1)) < 1e-60);
  REQUIRE(to_double(abs(inv2.g2 + 1)) < 1e-60);

  // Non-unitary input is rejected.
  ComplexMatrix<R> bad = ComplexMatrix<R>::identity(4);
  bad(0, 0) = Complex<R>(R(2), R(0));
  REQUIRE_THROWS_AS(invariants_from_unitary(bad), ConfigError);
}

TEST_CASE("local invariance under single-qubit dressings") {
  using R = double;
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  int n_checked = 0;
  for (int rep = 0; rep < 200; ++rep) {
    CanonicalGate<R> g{dist(rng), dist(rng), dist(rng)};
    auto want = invariants_from_canonical(g);
    auto u = canonical_unitary(g);
    auto a = random_single_qubit<R>(rng);
    auto b = random_single_qubit<R>(rng);
    auto c = random_single_qubit<R>(rng);
    auto d = random_single_qubit<R>(rng);
    auto dressed = kron(a, b) * u * kron(c, d);
    auto got = invariants_from_unitary(dressed);
    REQUIRE(std::abs(got.abs_g1 - want.abs_g1) < 1e-10);
    REQUIRE(std::abs(got.g2 - want.g2) < 1e-10);
    ++n_checked;
  }
  REQUIRE(n_checked == 200);
}

TEST_CASE("stat params: Haar, CNOT, iSWAP rows") {
  using R = BigFloat;
  auto haar = haar_stat_params<R>();
  REQUIRE(haar.alpha == R(1));
  REQUIRE(haar.beta == R(0));

  GateInvariants<R> cnot_inv{R(0), R(1)};
  auto cnot = stat_params_from_invariants(cnot_inv);
  REQUIRE(to_double(abs(cnot.alpha - R(10) / 9)) < 1e-70);
  REQUIRE(to_double(abs(cnot.beta + R(2) / 9)) < 1e-70);

  GateInvariants<R> iswap_inv{R(0), R(-1)};
  auto isw = stat_params_from_invariants(iswap_inv);
  REQUIRE(to_double(abs(isw.alpha - R(10) / 9)) < 1e-70);
  REQUIRE(to_double(abs(isw.beta - R(1) / 9)) < 1e-70);
}

TEST_CASE("fSim family closed forms and boundary lines") {
  using R = BigFloat;
  R pi = pi_val<R>();
  // theta = pi/2 line: alpha = 5(1+cos phi)/9, beta = (5-4 cos phi)/9.
  for (double phid : {0.3, 1.0, 2.2}) {
    R phi = real_from<R>(phid);
    auto p = fsim_params(pi / 2, phi);
    REQUIRE(to_double(abs(p.alpha - (1 + cos(phi)) * 5 / 9)) < 1e-70);
    REQUIRE(to_double(abs(p.beta - (R(5) - cos(phi) * 4) / 9)) < 1e-70);
    auto rc = region_check(p);
    REQUIRE(rc.cls == RegionClass::on_boundary);
    REQUIRE(rc.on_upper);
  }
  // theta = 0 line: alpha = 5(1-cos phi)/9, beta = -(1-cos phi)/9.
  for (double phid : {0.4, 1.7, 3.0}) {
    R phi = real_from<R>(phid);
    auto p = fsim_params(R(0), phi);
    REQUIRE(to_double(abs(p.alpha - (1 - cos(phi)) * 5 / 9)) < 1e-70);
    REQUIRE(to_double(abs(p.beta + (1 - cos(phi)) / 9)) < 1e-70);
    auto rc = region_check(p);
    REQUIRE(rc.cls == RegionClass::on_boundary);
    REQUIRE(rc.on_lower);
  }
  // fsim(pi/2, pi/6)
  auto p = fsim_params(pi / 2, pi / 6);
  REQUIRE(to_double(p.alpha) == Catch::Approx(1.0366807798802437).epsilon(1e-12));
  REQUIRE(to_double(p.beta) == Catch::Approx(0.1706553760958051).epsilon(1e-12));
  // Closed forms agree with the canonical-angle route (c1=c2=theta, c3=phi/2).
  auto inv = invariants_from_canonical(fsim_canonical(pi / 2, pi / 6));
  auto p2 = stat_params_from_invariants(inv);
  REQUIRE(to_double(abs(p.alpha - p2.alpha)) < 1e-70);
  REQUIRE(to_double(abs(p.beta - p2.beta)) < 1e-70);
}

TEST_CASE("perfect entanglers: maximal alpha, CNOT and iSWAP endpoints") {
  using R = BigFloat;
  R pi = pi_val<R>();
  auto p0 = pe_params(R(0));
  REQUIRE(to_double(abs(p0.alpha - R(10) / 9)) < 1e-70);
  REQUIRE(to_double(abs(p0.beta - R(1) / 9)) < 1e-70);  // iSWAP-equivalent
  auto p4 = pe_params(pi / 4);
  REQUIRE(to_double(abs(p4.beta + R(2) / 9)) < 1e-70);  // CNOT-equivalent
  // |G1| = 0 along the family.
  for (double phid : {0.2, 0.9, 1.4}) {
    auto inv = invariants_from_canonical(pe_canonical(real_from<R>(phid)));
    REQUIRE(to_double(abs(inv.abs_g1)) < 1e-70);
  }
}

TEST_CASE("swap_compose maps between the fSim boundary lines and is an involution") {
  using R = BigFloat;
  R pi = pi_val<R>();
  for (double phid : {0.3, 1.2, 2.8}) {
    R phi = real_from<R>(phid);
    auto low = fsim_params(R(0), phi);
    auto composed = swap_compose(low);
    REQUIRE(to_double(abs(composed.beta - (R(5) + cos(phi) * 4) / 9)) < 1e-70);
    auto twice = swap_compose(composed);
    REQUIRE(to_double(abs(twice.beta - low.beta)) < 1e-70);
    REQUIRE(to_double(abs(twice.alpha - low.alpha)) < 1e-70);
  }
  auto haar = swap_compose(haar_stat_params<R>());
  REQUIRE(haar.alpha == R(1));
  REQUIRE(to_double(abs(haar.beta)) < 1e-70);
  // identity -> SWAP
  GateStatParams<R> ident{R(0), R(0), 2};
  auto sw = swap_compose(ident);
  REQUIRE(sw.alpha == R(0));
  REQUIRE(sw.beta == R(1));
}

TEST_CASE("region_check classifies interior, boundary, outside") {
  using R = BigFloat;
  GateStatParams<R> iswap{R(10) / 9, R(1) / 9, 2};
  REQUIRE(region_check(iswap).cls == RegionClass::on_boundary);
  REQUIRE(region_check(iswap).on_upper);

  GateStatParams<R> outside{R(1), R(1) / 2, 2};
  REQUIRE(region_check(outside).cls == RegionClass::outside);

  REQUIRE(region_check(haar_stat_params<R>()).cls == RegionClass::interior);
}

TEST_CASE("every random canonical gate lands inside the region") {
  using R = double;
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> dist(-3.2, 3.2);
  for (int rep = 0; rep < 10000; ++rep) {
    CanonicalGate<R> g{dist(rng), dist(rng), dist(rng)};
    auto p = stat_params_from_invariants(invariants_from_canonical(g));
    auto rc = region_check(p);
    REQUIRE(rc.cls != RegionClass::outside);
    // Entangling power identity e_p = 2(1-|G1|)/9 = alpha/5.
    auto inv = invariants_from_canonical(g);
    REQUIRE(std::abs(entangling_power(inv) - p.alpha / 5) < 1e-14);
  }
}

TEST_CASE("Gao-basis parameters for Table rows") {
  using R = BigFloat;
  auto haar = gao_basis(haar_stat_params<R>());
  REQUIRE(to_double(abs(haar.R - R(3) / 5)) < 1e-70);
  REQUIRE(to_double(abs(haar.D - R(4) / 5)) < 1e-70);
  REQUIRE(haar.eta == R(3));

  GateStatParams<R> swap{R(0), R(1), 2};
  auto g = gao_basis(swap);
  REQUIRE(to_double(abs(g.R)) < 1e-70);
  REQUIRE(to_double(abs(g.D - 1)) < 1e-70);

  GateStatParams<R> cnot{R(10) / 9, R(-2) / 9, 2};
  auto c = gao_basis(cnot);
  REQUIRE(to_double(abs(c.R - R(2) / 3)) < 1e-70);
  REQUIRE(to_double(abs(c.D - R(2) / 3)) < 1e-70);
}

TEST_CASE("the fixed Haar-lookalike gate reproduces (alpha, beta) = (1, 0)") {
  using R = BigFloat;
  auto g = haar_lookalike_gate<R>();
  auto inv = invariants_from_canonical(g);
  REQUIRE(to_double(abs(inv.abs_g1 - R(1) / 10)) < 1e-70);
  auto p = stat_params_from_invariants(inv);
  REQUIRE(to_double(abs(p.alpha - 1)) < 1e-12);
  REQUIRE(to_double(abs(p.beta)) < 1e-12);
  REQUIRE(region_check(p).cls == RegionClass::interior);
}
