#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "mpconv/errors.hpp"
#include "mpconv/mp_law.hpp"

using namespace mpconv;
using std::numbers::pi;

namespace {

// Composite Simpson with an even number of panels.
template <typename F>
auto simpson(F f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  auto s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * (h / 3.0);
}

cplx fixed_point_residual(const MPLaw& law, ComplexPoint z) {
  const cplx s = symmetrized_stieltjes(law, z).value;
  return s + 1.0 / fixed_point_denominator(law.y(), z.z(), s);
}

}  // namespace

TEST_SUITE("mp_law") {
  TEST_CASE("support edges") {
    const MPLaw law(1.0);
    CHECK(law.a() == 0.0);
    CHECK(law.b() == 4.0);
    CHECK(law.atom_at_zero() == 0.0);
    const MPLaw two(2.0);
    CHECK(two.atom_at_zero() == doctest::Approx(0.5));
    CHECK_THROWS_AS(MPLaw(0.0), ConfigError);
  }

  TEST_CASE("density outside the support is zero") {
    const MPLaw law(0.25);
    CHECK(mp_pdf(law, 0.1) == 0.0);
    CHECK(mp_pdf(law, 2.5) == 0.0);
    CHECK(mp_pdf(law, -1.0) == 0.0);
  }

  TEST_CASE("density value at y = 0.25, x = 1") {
    // (1/(2 pi 0.25)) sqrt(1.25 * 0.75), evaluated to 30 digits
    CHECK(mp_pdf(MPLaw(0.25), 1.0) == doctest::Approx(0.616404444061499805564969094343).epsilon(1e-15));
  }

  TEST_CASE("cdf edges") {
    for (double y : {0.25, 0.5, 1.0}) {
      const MPLaw law(y);
      CHECK(mp_cdf(law, law.b()) == 1.0);
      CHECK(mp_cdf(law, law.a()) - law.atom_at_zero() == 0.0);
      CHECK(mp_cdf(law, -0.5) == 0.0);
    }
    const MPLaw two(2.0);
    CHECK(mp_cdf(two, 0.0) == doctest::Approx(0.5));
    CHECK(mp_cdf(two, -1e-300) == 0.0);
  }

  TEST_CASE("F_1(2) against a trapezoid oracle") {
    // x = t^2 turns f_1(x) dx into sqrt(4 - t^2)/pi dt on [0, sqrt 2].
    const int m = 1000000;
    const double hi = std::sqrt(2.0), h = hi / m;
    double s = 0.5 * (std::sqrt(4.0) + std::sqrt(2.0)) / pi;
    for (int i = 1; i < m; ++i) {
      const double t = i * h;
      s += std::sqrt(4.0 - t * t) / pi;
    }
    const double trapezoid = s * h;
    const double closed_form = 0.5 + 1.0 / pi;
    CHECK(std::abs(trapezoid - closed_form) < 1e-10);
    CHECK(std::abs(mp_cdf(MPLaw(1.0), 2.0) - trapezoid) < 1e-8);
  }

  TEST_CASE("normalization") {
    for (double y : {0.1, 0.25, 0.5, 0.9, 1.0, 2.0}) {
      const MPLaw law(y);
      CHECK(std::abs(law.atom_at_zero() + mp_continuous_mass(law) - 1.0) <= 1e-8);
    }
  }

  TEST_CASE("cdf derivative matches the density") {
    for (double y : {0.25, 1.0}) {
      const MPLaw law(y);
      const double h = 1e-5;
      for (int i = 1; i <= 50; ++i) {
        const double x = law.a() + (law.b() - law.a()) * i / 51.0;
        const double d = (mp_cdf(law, x + h) - mp_cdf(law, x - h)) / (2 * h);
        CHECK(std::abs(d - mp_pdf(law, x)) <= 1e-5);
      }
    }
  }

  TEST_CASE("cdf is monotone") {
    const MPLaw law(0.5);
    double prev = 0;
    for (int i = 0; i <= 400; ++i) {
      const double f = mp_cdf(law, -0.1 + 3.2 * i / 400.0);
      CHECK(f >= prev);
      prev = f;
    }
  }

  TEST_CASE("Stieltjes inversion recovers the density") {
    const MPLaw law(0.5);
    double worst = 0;
    for (int i = 0; i <= 100; ++i) {
      const double x = law.a() + 0.1 + (law.b() - law.a() - 0.2) * i / 100.0;
      const double approx = mp_stieltjes(law, {x, 1e-4}).value.imag() / pi;
      worst = std::max(worst, std::abs(approx - mp_pdf(law, x)));
    }
    CHECK(worst <= 1e-2);
  }

  TEST_CASE("Herglotz property on a 200-point grid") {
    for (double y : {0.25, 1.0, 2.0}) {
      const MPLaw law(y);
      for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 10; ++j) {
          const ComplexPoint z{-1.0 + 7.0 * i / 19.0, 0.01 + 0.99 * j / 9.0};
          CHECK(mp_stieltjes(law, z).value.imag() > 0.0);
        }
    }
  }

  TEST_CASE("tail behaviour -1/z") {
    const MPLaw law(0.5);
    for (double angle : {0.1, 0.5, 1.0, 2.0, 3.0}) {
      const cplx z = std::polar(1e3, angle);
      const cplx s = mp_stieltjes(law, {z.real(), z.imag()}).value;
      CHECK(std::abs(s + 1.0 / z) / std::abs(1.0 / z) <= 10.0 / std::abs(z));
    }
  }

  TEST_CASE("y = 1, z = i against quadrature") {
    // Adaptive quadrature of f_1(x)/(x - i) on [0, 4] at 30 digits.
    const cplx oracle(0.30024259022012041915890982075, 0.624810533843826581226870428865);
    const MPLaw law(1.0);
    CHECK(std::abs(mp_stieltjes(law, {0.0, 1.0}).value - oracle) <= 1e-6);
    CHECK(std::abs(mp_stieltjes_quadrature(law, {0.0, 1.0}) - oracle) <= 1e-6);
    // x = 4 sin^2(phi), integrated by composite Simpson
    const cplx simp = simpson([](double phi) {
      const double s = std::sin(phi), c = std::cos(phi);
      return cplx(4.0 * c * c / pi) / (4.0 * s * s - cplx(0.0, 1.0));
    }, 0.0, pi / 2, 2000);
    CHECK(std::abs(simp - oracle) <= 1e-10);
  }

  TEST_CASE("quadratic branch agrees with quadrature") {
    for (double y : {0.25, 0.5, 1.0, 2.0}) {
      const MPLaw law(y);
      for (double u : {-0.5, 0.3, 1.0, 2.5, 5.0})
        for (double v : {0.05, 0.3, 1.0}) {
          const ComplexPoint z{u, v};
          CHECK(std::abs(mp_stieltjes(law, z).value - mp_stieltjes_quadrature(law, z)) <= 1e-6);
        }
    }
  }

  TEST_CASE("symmetrized transform fixed point on a 20 x 10 grid") {
    for (double y : {0.5, 1.0}) {
      const MPLaw law(y);
      for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 10; ++j) {
          const ComplexPoint z{-3.0 + 6.0 * i / 19.0, 0.05 + 0.95 * j / 9.0};
          CHECK(std::abs(fixed_point_residual(law, z)) <= 1e-10);
          CHECK(symmetrized_stieltjes(law, z).value.imag() > 0.0);
        }
    }
  }

  TEST_CASE("symmetrized transform equals z s_y(z^2)") {
    const MPLaw law(0.5);
    for (double u : {0.2, 0.7, 1.3, 2.0})
      for (double v : {0.05, 0.4}) {
        const cplx z(u, v);
        const cplx w = z * z;  // upper half-plane for u > 0
        const cplx expected = z * mp_stieltjes(law, {w.real(), w.imag()}).value;
        CHECK(std::abs(symmetrized_stieltjes(law, {u, v}).value - expected) <= 1e-12);
      }
  }

  TEST_CASE("symmetrized transform is odd") {
    const MPLaw law(1.0);
    for (double u : {0.1, 0.9, 2.5}) {
      const cplx s = symmetrized_stieltjes(law, {u, 0.3}).value;
      const cplx r = symmetrized_stieltjes(law, {-u, 0.3}).value;
      CHECK(std::abs(r + std::conj(s)) <= 1e-14);
    }
  }

  TEST_CASE("denominator modulus is 1/|s~| and at least sqrt(y)") {
    for (double y : {0.25, 0.5, 1.0}) {
      const MPLaw law(y);
      for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 10; ++j) {
          const ComplexPoint z{-3.0 + 6.0 * i / 19.0, 0.05 + 0.95 * j / 9.0};
          const cplx s = symmetrized_stieltjes(law, z).value;
          const double mod = std::abs(fixed_point_denominator(y, z.z(), s));
          CHECK(mod == doctest::Approx(1.0 / std::abs(s)).epsilon(1e-12));
          CHECK(mod >= std::sqrt(y) * (1.0 - 1e-12));
        }
    }
  }

  TEST_CASE("|q| <= 1/sqrt(y) on 500 random points") {
    std::mt19937_64 eng(5);
    std::uniform_real_distribution<double> u(-4.0, 4.0), v(1e-3, 3.0);
    for (double y : {0.25, 0.5, 1.0}) {
      for (int i = 0; i < 500; ++i) {
        const ComplexPoint z{u(eng), v(eng)};
        const cplx q = q_func(y, z);
        CHECK(q.imag() > 0.0);
        CHECK(std::abs(q) <= 1.0 / std::sqrt(y) * (1.0 + 1e-12));
        CHECK(std::abs(y * q * q + z.z() * q + 1.0) <= 1e-12 * (1.0 + std::abs(z.z())));
      }
    }
  }

  TEST_CASE("q is the rescaled semicircle transform") {
    // semicircle on [-2, 2]: x = 2 sin(phi), density sqrt(4 - x^2)/(2 pi)
    for (double y : {0.5, 1.0}) {
      for (double u : {-1.0, 0.0, 0.8}) {
        const ComplexPoint z{u, 0.5};
        const cplx w = z.z() / std::sqrt(y);
        const cplx sc = simpson([&](double phi) {
          const double c = std::cos(phi);
          return cplx(2.0 * c * c / pi) / (2.0 * std::sin(phi) - w);
        }, -pi / 2, pi / 2, 4000);
        CHECK(std::abs(q_func(y, z) - sc / std::sqrt(y)) <= 1e-9);
      }
    }
  }

  TEST_CASE("q tail behaviour") {
    const cplx z(800.0, 600.0);
    CHECK(std::abs(q_func(1.0, {800.0, 600.0}) + 1.0 / z) <= 1e-8);
  }

  TEST_CASE("symmetrized density") {
    for (double y : {0.5, 1.0}) {
      const MPLaw law(y);
      for (int i = 0; i < 100; ++i) {
        const double x = -2.5 + 5.0 * i / 99.0;
        CHECK(symmetrized_mp_pdf(law, x) == symmetrized_mp_pdf(law, -x));
        if (x * x < law.a() || x * x > law.b()) CHECK(symmetrized_mp_pdf(law, x) == 0.0);
      }
    }
    // symmetrized density is |x| f_y(x^2)
    const MPLaw law(0.5);
    CHECK(symmetrized_mp_pdf(law, 1.1) == doctest::Approx(1.1 * mp_pdf(law, 1.21)));
    CHECK(symmetrized_mp_cdf(law, 0.0) == 0.5);
    CHECK(symmetrized_mp_cdf(law, -10.0) == 0.0);
    CHECK(symmetrized_mp_cdf(law, 10.0) == 1.0);
  }

  TEST_CASE("density sup is reported next to the stated bound") {
    const DensitySup s = symmetrized_density_sup(MPLaw(1.0));
    CHECK(s.measured == doctest::Approx(1.0 / pi));
    CHECK(s.arg_x == 0.0);
    CHECK(s.stated_bound == doctest::Approx(1.0 / (2.0 * pi)));
  }

  TEST_CASE("points must be in the upper half-plane") {
    CHECK_THROWS_AS(mp_stieltjes(MPLaw(1.0), {1.0, 0.0}), ContractError);
    CHECK_THROWS_AS(symmetrized_stieltjes(MPLaw(1.0), {1.0, -0.1}), ContractError);
  }
}
