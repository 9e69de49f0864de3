#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "condwalk/edgeworth.hpp"
#include "support/oracles.hpp"

using namespace condwalk;

namespace {

CumulantSet identity_cumulants(int d, double c3_diag = 0.0, double c4_diag = 0.0) {
  Tensor3 c3(d);
  Tensor4 c4(d);
  for (int j = 0; j < d; ++j) {
    c3(j, j, j) = c3_diag;
    c4(j, j, j, j) = c4_diag;
  }
  return CumulantSet::from(Matrix::Identity(d, d), std::move(c3), std::move(c4));
}

// standardized Exp(1) summand: kappa = 1, c3 = 2, c4 = 6
CumulantSet standardized_exponential() { return identity_cumulants(1, 2.0, 6.0); }

}  // namespace

TEST_CASE("hermite polynomials at reference points") {
  CumulantSet std1 = identity_cumulants(1);
  Vector two(1);
  two << 2.0;
  int idx3[3] = {0, 0, 0};
  CHECK(hermite_tensor(3, idx3, two, std1) == doctest::Approx(2.0));  // He3(2) = 8 - 6

  Vector zero1 = Vector::Zero(1);
  CHECK(hermite_tensor(3, idx3, zero1, std1) == doctest::Approx(0.0));

  CumulantSet std2 = identity_cumulants(2);
  Vector zero2 = Vector::Zero(2);
  int odd[3] = {0, 1, 1};
  CHECK(hermite_tensor(3, odd, zero2, std2) == doctest::Approx(0.0));

  int mixed4[4] = {0, 0, 1, 1};
  CHECK(hermite_tensor(4, mixed4, zero2, std2) == doctest::Approx(1.0));
  int same4[4] = {0, 0, 0, 0};
  CHECK(hermite_tensor(4, same4, zero2, std2) == doctest::Approx(3.0));  // He4(0)
  int same6[6] = {0, 0, 0, 0, 0, 0};
  CHECK(hermite_tensor(6, same6, zero1, std1) == doctest::Approx(-15.0));  // He6(0)

  CHECK_THROWS_AS(hermite_tensor(5, idx3, zero1, std1), ConfigError);
}

TEST_CASE("permutation brackets expand to the documented term counts") {
  CHECK(permutation_bracket_terms(3, 1) == 3);
  CHECK(permutation_bracket_terms(4, 1) == 6);
  CHECK(permutation_bracket_terms(4, 2) == 3);
  CHECK(permutation_bracket_terms(6, 1) == 15);
  CHECK(permutation_bracket_terms(6, 2) == 45);
  CHECK(permutation_bracket_terms(6, 3) == 15);
}

TEST_CASE("generating identity: h equals normalized gaussian derivatives") {
  // (-1)^k d_{i1}..d_{ik} n_d(x; 0, kappa) = h_{i1..ik}(x) n_d(x; 0, kappa),
  // checked by nested finite differences at random points and index tuples.
  RngStream rng(2024);
  Matrix corr(2, 2);
  corr << 1.0, 0.3, 0.3, 1.3;
  std::vector<CumulantSet> cases = {identity_cumulants(1), identity_cumulants(2),
                                    identity_cumulants(3),
                                    CumulantSet::from(corr, Tensor3(2), Tensor4(2))};
  int accepted = 0;
  while (accepted < 120) {
    CumulantSet& cum = cases[static_cast<std::size_t>(rng.uniform() * cases.size())];
    const int d = cum.dim();
    const int order = std::vector<int>{3, 4, 6}[static_cast<std::size_t>(rng.uniform() * 3)];
    std::vector<int> indices(static_cast<std::size_t>(order));
    for (int& idx : indices) idx = static_cast<int>(rng.uniform() * d);
    Vector x(d);
    for (int j = 0; j < d; ++j) x(j) = 3.0 * rng.uniform() - 1.5;

    const double exact = hermite_tensor(order, indices, x, cum);
    if (std::abs(exact) < 1e-2) continue;  // keep the relative error well-defined

    // density normalized by its center value: same derivative ratio, far
    // better conditioned in the tails
    const double log_center = gaussian_log_density(x, Vector::Zero(d), cum.kappa);
    auto density = [&](const Vector& p) {
      return std::exp(gaussian_log_density(p, Vector::Zero(d), cum.kappa) - log_center);
    };
    const double derivative = oracles::mixed_partial_hi(density, x, indices, 0.2);
    const double sign = (order % 2 == 0) ? 1.0 : -1.0;
    const double via_fd = sign * derivative;
    CHECK(std::abs(via_fd - exact) / std::abs(exact) <= 1e-4);
    ++accepted;
  }
}

TEST_CASE("q3 and q4") {
  SUBCASE("symmetric laws have vanishing q3") {
    CumulantSet cum = identity_cumulants(2, 0.0, 1.5);
    RngStream rng(4);
    for (int i = 0; i < 10; ++i) {
      Vector x(2);
      x << 4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0;
      CHECK(q3(cum, x) == doctest::Approx(0.0));
    }
  }

  SUBCASE("gaussian cumulants kill q4") {
    CumulantSet cum = identity_cumulants(2);
    Vector x(2);
    x << 0.7, -0.4;
    CHECK(q4(cum, x) == doctest::Approx(0.0));
  }

  SUBCASE("standardized exponential at the origin") {
    CumulantSet cum = standardized_exponential();
    Vector zero = Vector::Zero(1);
    CHECK(q3(cum, zero) == doctest::Approx(0.0));
    // (6/24) He4(0) + (4/72) He6(0) = 3/4 - 5/6 = -1/12
    CHECK(q4(cum, zero) == doctest::Approx(-1.0 / 12.0).epsilon(1e-12));
  }
}

TEST_CASE("q3 and q4 integrate to zero against the gaussian") {
  SUBCASE("d = 1") {
    CumulantSet cum = standardized_exponential();
    auto weighted = [&](double x, auto&& q) {
      Vector v(1);
      v << x;
      return oracles::normal_pdf(x) * q(cum, v);
    };
    const double i3 =
        oracles::simpson([&](double x) { return weighted(x, q3); }, -10.0, 10.0, 4000);
    const double i4 =
        oracles::simpson([&](double x) { return weighted(x, q4); }, -10.0, 10.0, 4000);
    CHECK(std::abs(i3) <= 1e-6);
    CHECK(std::abs(i4) <= 1e-6);
  }

  SUBCASE("d = 2, cross cumulants") {
    Tensor3 c3(2);
    // a symmetric tensor with off-diagonal mass
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l) c3(i, j, l) = 0.3 * ((i + j + l) % 2 == 0 ? 1.0 : 0.5);
    Tensor4 c4(2);
    c4(0, 0, 0, 0) = 1.2;
    c4(1, 1, 1, 1) = 0.7;
    CumulantSet cum = CumulantSet::from(Matrix::Identity(2, 2), std::move(c3), std::move(c4));

    auto normal2 = [](double x, double y) {
      return std::exp(-0.5 * (x * x + y * y)) / (2.0 * M_PI);
    };
    const double i3 = oracles::simpson2(
        [&](double x, double y) {
          Vector v(2);
          v << x, y;
          return normal2(x, y) * q3(cum, v);
        },
        -8.0, 8.0, -8.0, 8.0, 160);
    const double i4 = oracles::simpson2(
        [&](double x, double y) {
          Vector v(2);
          v << x, y;
          return normal2(x, y) * q4(cum, v);
        },
        -8.0, 8.0, -8.0, 8.0, 160);
    CHECK(std::abs(i3) <= 1e-6);
    CHECK(std::abs(i4) <= 1e-6);
    // hence the order-4 density integrates to one
    const double total = oracles::simpson2(
        [&](double x, double y) {
          Vector v(2);
          v << x, y;
          return std::exp(edgeworth_log_density(cum, 30, v).log_density);
        },
        -8.0, 8.0, -8.0, 8.0, 160);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-5));
  }
}

TEST_CASE("edgeworth log-density") {
  SUBCASE("gaussian summands reduce to the normal density") {
    CumulantSet cum = identity_cumulants(2);
    RngStream rng(9);
    for (int n : {2, 10, 100}) {
      Vector x(2);
      x << 3.0 * rng.uniform() - 1.5, 3.0 * rng.uniform() - 1.5;
      EdgeworthValue v = edgeworth_log_density(cum, n, x);
      CHECK(v.log_density == doctest::Approx(standard_normal_log_density(x)).epsilon(1e-12));
      CHECK(!v.clamped);
    }
  }

  SUBCASE("standardized exponential at the origin, n = 10") {
    CumulantSet cum = standardized_exponential();
    EdgeworthValue v = edgeworth_log_density(cum, 10, Vector::Zero(1));
    // n(0) (1 + q4(0)/10) with q4(0) = -1/12
    const double expected = std::log(oracles::normal_pdf(0.0) * (1.0 - 1.0 / 120.0));
    CHECK(v.log_density == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(-0.927307).epsilon(1e-5));
  }

  SUBCASE("accuracy improves from n = 10 to n = 20 (gamma oracle)") {
    CumulantSet cum = standardized_exponential();
    auto sup_error = [&](int n) {
      double worst = 0.0;
      for (double z = -2.5; z <= 4.0; z += 0.01) {
        Vector v(1);
        v << z;
        const double approx = std::exp(edgeworth_log_density(cum, n, v).log_density);
        worst = std::max(worst, std::abs(approx - oracles::standardized_gamma_pdf(z, n)));
      }
      return worst;
    };
    CHECK(sup_error(20) < sup_error(10));
  }

  SUBCASE("left-tail negativity is clamped and flagged") {
    CumulantSet cum = standardized_exponential();
    Vector far(1);
    far << -3.0;  // the cubic correction pushes the bracket negative here
    EdgeworthValue v = edgeworth_log_density(cum, 5, far);
    CHECK(v.clamped);
    CHECK(v.factor <= 0.0);
    CHECK(std::isfinite(v.log_density));
  }
}

TEST_CASE("standardize transports cumulants to identity covariance") {
  auto exp1 = make_exponential(1.0);
  Vector t = Vector::Zero(1);
  CumulantSet raw = CumulantSet::at_tilt(*exp1, t);
  CumulantSet std_cum = standardize(raw);
  CHECK(std_cum.kappa(0, 0) == doctest::Approx(1.0));
  CHECK(std_cum.c3(0, 0, 0) == doctest::Approx(2.0));  // skewness of Exp(1)
  CHECK(std_cum.c4(0, 0, 0, 0) == doctest::Approx(6.0));
}

TEST_CASE("delta diagnostics") {
  CHECK(delta_diagnostics(identity_cumulants(1)).delta1 == doctest::Approx(0.125));
  CHECK(delta_diagnostics(identity_cumulants(1)).delta == doctest::Approx(0.125));

  DeltaDiagnostics d2 = delta_diagnostics(identity_cumulants(2));
  CHECK(d2.delta1 == doctest::Approx(0.25));
  CHECK(d2.delta2 == doctest::Approx(0.0));
  CHECK(d2.delta == doctest::Approx(0.25));

  DeltaDiagnostics skewed = delta_diagnostics(identity_cumulants(1, 2.0));
  CHECK(skewed.delta2 == doctest::Approx(5.0 / 6.0));
  CHECK(skewed.delta == doctest::Approx(0.125 - 5.0 / 6.0).epsilon(1e-10));
}
