#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mbg/series.hpp"
#include "support/oracles.hpp"
#include "support/quadrature.hpp"

using mbg::GeneratorH;
using mbg::Partition;
using mbg::SeriesFamily;
using mbg::SymMatrix;

namespace ts = testsupport;

namespace {
SymMatrix scalar1(double v) { return SymMatrix::diagonal({v}); }
}  // namespace

TEST_CASE("type-1 constant: h == 1 collapses to the beta function") {
  for (double a : {1.0, 2.0, 3.5}) {
    for (double b : {1.0, 2.5}) {
      const auto sv = mbg::constant_type1(a, b, scalar1(0.7), GeneratorH::one(), 10);
      REQUIRE(sv.value == Catch::Approx(ts::beta_fn(a, b)).epsilon(1e-12));
      REQUIRE(sv.converged);
    }
  }
  const auto sv2 =
      mbg::constant_type1(2.0, 2.0, SymMatrix::diagonal({0.5, 1.0}), GeneratorH::one(), 10);
  REQUIRE(sv2.value ==
          Catch::Approx(std::exp(mbg::mv_beta_log(2.0, 2.0, 2))).epsilon(1e-12));
}

TEST_CASE("type-1 constant vs scalar Kummer oracle") {
  const auto sv = mbg::constant_type1(2.0, 3.0, scalar1(0.7), GeneratorH::exp_neg(), 30);
  const double expect = ts::beta_fn(2.0, 3.0) * ts::scalar_1f1(2.0, 5.0, -0.7);
  REQUIRE(sv.value == Catch::Approx(expect).epsilon(1e-10));
  REQUIRE(sv.converged);
}

TEST_CASE("type-1 constant vs quadrature at m=1") {
  const double a = 2.5, b = 1.5, phi = 1.3;
  for (const auto& h : {GeneratorH::exp_neg(), GeneratorH::polynomial({1.0, 0.5, 0.25})}) {
    const auto sv = mbg::constant_type1(a, b, scalar1(phi), h, 30);
    const double expect = ts::integrate(
        [&](double x) {
          return std::pow(x, a - 1.0) * std::pow(1.0 - x, b - 1.0) * h.eval(phi * x);
        },
        0.0, 1.0, 1e-13);
    REQUIRE(sv.value == Catch::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("type-2 constant: h == 1 and the polynomial oracle") {
  const auto sv0 = mbg::constant_type2(2.0, 5.0, scalar1(0.4), GeneratorH::one(), 10);
  REQUIRE(sv0.value == Catch::Approx(ts::beta_fn(2.0, 5.0)).epsilon(1e-12));
  REQUIRE_FALSE(sv0.formal);

  const double phi = 0.7;
  const auto sv = mbg::constant_type2(2.0, 5.0, scalar1(phi), GeneratorH::polynomial({1.0, 1.0}), 10);
  const double closed = ts::beta_fn(2.0, 5.0) + phi * ts::beta_fn(3.0, 4.0);
  REQUIRE(sv.value == Catch::Approx(closed).epsilon(1e-12));
  const double quad = ts::integrate_semi_infinite([&](double x) {
    return std::pow(x, 1.0) * std::pow(1.0 + x, -7.0) * (1.0 + phi * x);
  });
  REQUIRE(sv.value == Catch::Approx(quad).epsilon(1e-9));
}

TEST_CASE("type-2 constant flags formal truncations") {
  REQUIRE_THROWS_AS(
      mbg::constant_type2(2.0, 5.0, scalar1(0.4), GeneratorH::exp_neg(), 20, false),
      mbg::domain_error);
  const auto sv =
      mbg::constant_type2(2.0, 5.0, scalar1(0.4), GeneratorH::exp_neg(), 20, true);
  REQUIRE(sv.formal);
  // The retained terms stop where the per-term integral diverges, so the
  // formal value only approximates the true integral; the binding check for
  // such cases is the Monte Carlo route.
  const double quad = ts::integrate_semi_infinite([&](double x) {
    return x * std::pow(1.0 + x, -7.0) * std::exp(-0.4 * x);
  });
  REQUIRE(sv.value == Catch::Approx(quad).epsilon(1e-2));
}

TEST_CASE("type-2 rejects when nothing is defined") {
  // b=1, m=1: every t>=1 term is invalid, and h has no t=0 coefficient.
  REQUIRE_THROWS_AS(
      mbg::constant_type2(2.0, 1.0, scalar1(0.4), GeneratorH::polynomial({0.0, 1.0}), 10, true),
      mbg::domain_error);
}

TEST_CASE("type-3 scalar constant: plain case is 1/2") {
  const auto sv = mbg::constant_type3_scalar(1.0, 1.0, 0.0, 1, GeneratorH::one(), 24);
  REQUIRE(sv.value == Catch::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("type-3 scalar constant vs quadrature") {
  const double a = 2.0, b = 2.0, phi = 0.5;
  const auto sv = mbg::constant_type3_scalar(a, b, phi, 1, GeneratorH::exp_neg(), 26);
  const double expect = ts::integrate(
      [&](double x) {
        return x * (1.0 - x) * std::pow(1.0 + x, -4.0) * std::exp(-phi * x);
      },
      0.0, 1.0, 1e-13);
  REQUIRE(sv.value == Catch::Approx(expect).epsilon(1e-8));

  // another parameter point, h == 1
  const auto sv2 = mbg::constant_type3_scalar(1.5, 2.5, 0.0, 1, GeneratorH::one(), 26);
  const double expect2 = ts::integrate(
      [&](double x) {
        return std::pow(x, 0.5) * std::pow(1.0 - x, 1.5) * std::pow(1.0 + x, -4.0);
      },
      0.0, 1.0, 1e-13);
  REQUIRE(sv2.value == Catch::Approx(expect2).epsilon(1e-8));
}

TEST_CASE("type-3 rejects general Phi") {
  REQUIRE_THROWS_AS(
      mbg::det_moment(SeriesFamily::type3_scalar, 2.0, 2.0, SymMatrix::diagonal({0.3, 0.6}),
                      GeneratorH::one(), 1.0, 20),
      mbg::domain_error);
}

TEST_CASE("determinant moments: scalar reductions") {
  const auto m1 =
      mbg::det_moment(SeriesFamily::type1, 2.0, 3.0, scalar1(0.0), GeneratorH::one(), 1.0, 10);
  REQUIRE(m1.value == Catch::Approx(0.4).epsilon(1e-12));  // a/(a+b)

  const auto m2 =
      mbg::det_moment(SeriesFamily::type2, 2.0, 3.0, scalar1(0.0), GeneratorH::one(), 1.0, 10);
  REQUIRE(m2.value == Catch::Approx(1.0).epsilon(1e-12));  // a/(b-1)

  const auto m2b =
      mbg::det_moment(SeriesFamily::type2, 3.0, 5.0, scalar1(0.0), GeneratorH::one(), 2.0, 10);
  // E X^2 for beta-prime: (a)_2 / ((b-1)(b-2)) = 12/12
  REQUIRE(m2b.value == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("determinant moment r=0 is exactly 1") {
  for (auto family : {SeriesFamily::type1, SeriesFamily::type2, SeriesFamily::type3_scalar}) {
    const auto mv = mbg::det_moment(family, 2.0, 4.0, scalar1(0.5), GeneratorH::exp_neg(), 0.0,
                                    16, true);
    REQUIRE(mv.value == Catch::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("determinant moment vs quadrature at m=1") {
  const double a = 2.0, b = 3.0, phi = 0.8;
  auto kernel1 = [&](double x) {
    return std::pow(x, a - 1.0) * std::pow(1.0 - x, b - 1.0) * std::exp(-phi * x);
  };
  const double e1 = ts::integrate([&](double x) { return x * kernel1(x); }, 0.0, 1.0) /
                    ts::integrate(kernel1, 0.0, 1.0);
  const auto s1 =
      mbg::det_moment(SeriesFamily::type1, a, b, scalar1(phi), GeneratorH::exp_neg(), 1.0, 30);
  REQUIRE(s1.value == Catch::Approx(e1).epsilon(1e-9));

  auto kernel3 = [&](double x) {
    return std::pow(x, a - 1.0) * std::pow(1.0 - x, b - 1.0) * std::pow(1.0 + x, -(a + b)) *
           std::exp(-phi * x);
  };
  const double e3 = ts::integrate([&](double x) { return x * kernel3(x); }, 0.0, 1.0) /
                    ts::integrate(kernel3, 0.0, 1.0);
  const auto s3 = mbg::det_moment(SeriesFamily::type3_scalar, a, b, scalar1(phi),
                                  GeneratorH::exp_neg(), 1.0, 26);
  REQUIRE(s3.value == Catch::Approx(e3).epsilon(1e-7));

  // type 2 with a polynomial generator, fully valid terms
  const double bp = 6.0;
  auto kernel2 = [&](double x) {
    return std::pow(x, a - 1.0) * std::pow(1.0 + x, -(a + bp)) * (1.0 + phi * x);
  };
  const double e2 = ts::integrate_semi_infinite([&](double x) { return x * kernel2(x); }) /
                    ts::integrate_semi_infinite(kernel2);
  const auto s2 = mbg::det_moment(SeriesFamily::type2, a, bp, scalar1(phi),
                                  GeneratorH::polynomial({1.0, 1.0}), 1.0, 20);
  REQUIRE(s2.value == Catch::Approx(e2).epsilon(1e-9));
}

TEST_CASE("matrix-argument 1F1") {
  REQUIRE(mbg::hypergeom_1f1_matrix(2.0, 3.0, SymMatrix::diagonal({0.0, 0.0}), 10).value ==
          Catch::Approx(1.0));

  // m=1 reduction against the independent scalar series
  for (double x : {-0.9, -0.3, 0.4, 1.2}) {
    const auto sv = mbg::hypergeom_1f1_matrix(1.7, 3.2, scalar1(x), 40);
    REQUIRE(sv.value == Catch::Approx(ts::scalar_1f1(1.7, 3.2, x)).epsilon(1e-10));
  }

  // a == c collapses to etr(X)
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> unif(-0.6, 0.9);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::MatrixXd e(2, 2);
    const double x01 = unif(rng);
    e << unif(rng), x01, x01, unif(rng);
    const SymMatrix x(e);
    const auto sv = mbg::hypergeom_1f1_matrix(2.4, 2.4, x, 36);
    REQUIRE(sv.value == Catch::Approx(std::exp(x.trace())).epsilon(1e-8));
  }
}

TEST_CASE("Renyi entropy scalar cases") {
  // uniform on (0,1): zero entropy for every order
  for (double nu : {0.5, 2.0, 3.0}) {
    REQUIRE(mbg::renyi_entropy(SeriesFamily::type1, 1.0, 1.0, scalar1(0.0), GeneratorH::one(),
                               nu, 10) == Catch::Approx(0.0).margin(1e-11));
  }
  // Beta(2,2), nu=2: -log(6/5)
  const double r = mbg::renyi_entropy(SeriesFamily::type1, 2.0, 2.0, scalar1(0.0),
                                      GeneratorH::one(), 2.0, 10);
  REQUIRE(r == Catch::Approx(-std::log(1.2)).epsilon(1e-10));
}

TEST_CASE("Renyi entropy vs quadrature with a generator") {
  const double a = 2.0, b = 3.0, phi = 0.9, nu = 1.6;
  const auto h = GeneratorH::exp_neg();
  auto kernel = [&](double x) {
    return std::pow(x, a - 1.0) * std::pow(1.0 - x, b - 1.0) * std::exp(-phi * x);
  };
  const double z = ts::integrate(kernel, 0.0, 1.0);
  const double inu =
      ts::integrate([&](double x) { return std::pow(kernel(x) / z, nu); }, 0.0, 1.0);
  const double expect = std::log(inu) / (1.0 - nu);
  REQUIRE(mbg::renyi_entropy(SeriesFamily::type1, a, b, scalar1(phi), h, nu, 30) ==
          Catch::Approx(expect).epsilon(1e-9));
}

TEST_CASE("Renyi entropy reports the admissible order range") {
  try {
    mbg::renyi_entropy(SeriesFamily::type1, 1.2, 1.2, SymMatrix::identity(2),
                       GeneratorH::one(), 4.0, 10);
    FAIL("expected domain_error");
  } catch (const mbg::domain_error& e) {
    REQUIRE(std::string(e.what()).find("admissible") != std::string::npos);
  }
}

TEST_CASE("Shannon entropy scalar cases") {
  const auto flat =
      mbg::shannon_entropy(SeriesFamily::type1, 1.0, 1.0, scalar1(0.0), GeneratorH::one(), 10);
  REQUIRE(flat.value == Catch::Approx(0.0).margin(1e-9));

  const auto beta22 =
      mbg::shannon_entropy(SeriesFamily::type1, 2.0, 2.0, scalar1(0.0), GeneratorH::one(), 10);
  const double expect = -ts::integrate(
      [&](double x) {
        const double f = 6.0 * x * (1.0 - x);
        return f > 0.0 ? f * std::log(f) : 0.0;
      },
      0.0, 1.0, 1e-13);
  REQUIRE(beta22.value == Catch::Approx(expect).margin(5e-7));
  REQUIRE(beta22.extrapolation_error < 1e-6);

  // with a generator, against quadrature
  const double a = 2.0, b = 3.0, phi = 0.9;
  auto kernel = [&](double x) {
    return std::pow(x, a - 1.0) * std::pow(1.0 - x, b - 1.0) * std::exp(-phi * x);
  };
  const double z = ts::integrate(kernel, 0.0, 1.0);
  const double es = -ts::integrate(
      [&](double x) {
        const double f = kernel(x) / z;
        return f > 0.0 ? f * std::log(f) : 0.0;
      },
      0.0, 1.0, 1e-13);
  const auto got = mbg::shannon_entropy(SeriesFamily::type1, a, b, scalar1(phi),
                                        GeneratorH::exp_neg(), 30);
  REQUIRE(got.value == Catch::Approx(es).margin(5e-7));
}

TEST_CASE("determinant-generator constants") {
  // kind 1, h == 1: plain beta
  REQUIRE(mbg::det_generator_constant(1, 2.0, 3.0, scalar1(0.8), GeneratorH::one(), 10).value ==
          Catch::Approx(ts::beta_fn(2.0, 3.0)).epsilon(1e-12));
  REQUIRE(mbg::det_generator_constant(1, 2.0, 2.0, SymMatrix::diagonal({0.5, 1.0}),
                                      GeneratorH::one(), 10)
              .value == Catch::Approx(std::exp(mbg::mv_beta_log(2.0, 2.0, 2))).epsilon(1e-12));

  // kind 1, m=1 with a generator: quadrature oracle
  const double a = 2.0, b = 3.0, phi = 0.7;
  const auto h = GeneratorH::exp_neg();
  const auto k1 = mbg::det_generator_constant(1, a, b, scalar1(phi), h, 30);
  const double q1 = ts::integrate(
      [&](double x) {
        return std::pow(x, a - 1.0) * std::pow(1.0 - x, b - 1.0) * std::exp(-phi * x);
      },
      0.0, 1.0, 1e-13);
  REQUIRE(k1.value == Catch::Approx(q1).epsilon(1e-10));

  // kind 2, m=1 polynomial generator: quadrature oracle
  const double b2 = 6.0;
  const auto k2 = mbg::det_generator_constant(2, a, b2, scalar1(phi),
                                              GeneratorH::polynomial({1.0, 1.0}), 10);
  const double q2 = ts::integrate_semi_infinite([&](double x) {
    return std::pow(x, a - 1.0) * std::pow(1.0 + x, -(a + b2)) * (1.0 + phi * x);
  });
  REQUIRE(k2.value == Catch::Approx(q2).epsilon(1e-9));
  REQUIRE_THROWS_AS(
      mbg::det_generator_constant(2, a, 2.0, scalar1(phi), GeneratorH::exp_neg(), 10, false),
      mbg::domain_error);

  // kind 3: quadrature-backed values, including the h(x)=x case
  const auto k3a = mbg::det_generator_constant(3, 1.0, 1.0, scalar1(1.0), GeneratorH::one(), 24);
  REQUIRE(k3a.value == Catch::Approx(0.5).epsilon(1e-9));
  const auto k3b = mbg::det_generator_constant(3, 1.0, 1.0, scalar1(1.0),
                                               GeneratorH::polynomial({0.0, 1.0}), 24);
  REQUIRE(k3b.value == Catch::Approx(std::log(2.0) - 0.5).epsilon(1e-8));
}

TEST_CASE("tail estimates bound the T+5 refinement when converged") {
  struct Case {
    double a, b, phi;
  } cases[] = {{2.0, 3.0, 0.7}, {3.0, 3.0, 1.2}};
  for (const auto& c : cases) {
    const SymMatrix phi2 = SymMatrix::diagonal({c.phi, 0.5 * c.phi});
    const auto coarse = mbg::constant_type1(c.a, c.b, phi2, GeneratorH::exp_neg(), 20);
    const auto fine = mbg::constant_type1(c.a, c.b, phi2, GeneratorH::exp_neg(), 25);
    REQUIRE(coarse.converged);
    REQUIRE(std::abs(fine.value - coarse.value) <= coarse.tail_estimate + 1e-15);
  }
}

TEST_CASE("truncation degree is validated") {
  REQUIRE_THROWS_AS(
      mbg::constant_type1(2.0, 2.0, scalar1(0.5), GeneratorH::one(), 50),
      mbg::domain_error);
}
