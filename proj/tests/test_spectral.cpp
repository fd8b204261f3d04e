#include <cmath>
#include <sstream>

#include "doctest.h"
#include "mpconv/errors.hpp"
#include "mpconv/spectral.hpp"
#include "support.hpp"

using namespace mpconv;

TEST_SUITE("spectral") {
  TEST_CASE("identity of order 5") {
    const auto s = symmetric_eigenvalues(RealMatrix::identity(5));
    CHECK(s.source_dim == 5);
    for (double v : s.eigenvalues) CHECK(v == doctest::Approx(1.0));
  }

  TEST_CASE("diagonal matrix sorted") {
    RealMatrix m(3, 3);
    m(0, 0) = 3;
    m(1, 1) = -1;
    m(2, 2) = 7;
    const auto s = symmetric_eigenvalues(m).eigenvalues;
    CHECK(s == std::vector<double>{-1, 3, 7});
  }

  TEST_CASE("random 20x20 against Sturm bisection") {
    const RealMatrix m = testsupport::random_symmetric(20, 3);
    const Tridiagonal t = tridiagonalize(m);
    const auto oracle = testsupport::bisection_eigenvalues(t.diag, t.offdiag);
    const auto s = symmetric_eigenvalues(m).eigenvalues;
    for (std::size_t i = 0; i < 20; ++i) CHECK(std::abs(s[i] - oracle[i]) < 1e-8);
    // Similarity invariants tie the tridiagonal form back to m.
    double tr = 0, fro = 0, sum = 0, sum2 = 0;
    for (std::size_t i = 0; i < 20; ++i) {
      tr += m(i, i);
      for (std::size_t j = 0; j < 20; ++j) fro += m(i, j) * m(i, j);
      sum += oracle[i];
      sum2 += oracle[i] * oracle[i];
    }
    CHECK(sum == doctest::Approx(tr).epsilon(1e-10));
    CHECK(sum2 == doctest::Approx(fro).epsilon(1e-10));
  }

  TEST_CASE("non-symmetric input is rejected") {
    RealMatrix m = RealMatrix::identity(3);
    m(0, 2) = 1e-3;
    CHECK_THROWS_AS(symmetric_eigenvalues(m), ContractError);
  }

  TEST_CASE("eigenpair residuals are backward stable up to order 200") {
    for (std::size_t n : {1u, 2u, 17u, 200u}) {
      const RealMatrix m = testsupport::random_symmetric(n, n);
      const auto eig = symmetric_eigen(m);
      const double norm = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
      CHECK(eigen_residual(m, eig) <= 1e-9 * norm);
      const auto only = symmetric_eigenvalues(m).eigenvalues;
      for (std::size_t i = 0; i < n; ++i) CHECK(only[i] == doctest::Approx(eig.values[i]));
    }
  }

  TEST_CASE("covariance spectrum is nonnegative") {
    const auto x = testsupport::random_sample(30, 30, 8);
    const auto s = covariance_spectrum(covariance_matrix(x));
    CHECK(s.eigenvalues.front() >= 0.0);
    CHECK(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
  }

  TEST_CASE("esd of a single eigenvalue") {
    const auto f = esd({{2.0}, 1});
    CHECK(f(1.999) == 0.0);
    CHECK(f(2.0) == 1.0);
    CHECK(f.left_limit(2.0) == 0.0);
  }

  TEST_CASE("esd merges ties") {
    const auto f = esd({{1.0, 1.0, 3.0}, 3});
    CHECK(f.size() == 2);
    CHECK(f(1.0) == doctest::Approx(2.0 / 3.0));
    CHECK(f(2.9) == doctest::Approx(2.0 / 3.0));
    CHECK(f(3.0) == 1.0);
    CHECK(f(-5.0) == 0.0);
  }

  TEST_CASE("esd at the largest eigenvalue is exactly 1") {
    const auto s = covariance_spectrum(covariance_matrix(testsupport::random_sample(13, 20, 1)));
    CHECK(esd(s)(s.eigenvalues.back()) == 1.0);
  }

  TEST_CASE("empty spectrum is rejected") { CHECK_THROWS_AS(esd({{}, 0}), ContractError); }

  TEST_CASE("pooled esd equals the esd of the union") {
    std::vector<Spectrum> parts{{{0.5, 1.0, 2.0}, 3}, {{1.0, 1.5, 4.0}, 3}};
    const auto pooled = pooled_esd(parts);
    const auto direct = esd({{0.5, 1.0, 1.0, 1.5, 2.0, 4.0}, 6});
    for (double x : {0.0, 0.5, 0.9, 1.0, 1.2, 1.5, 3.0, 4.0}) CHECK(pooled(x) == direct(x));
  }

  TEST_CASE("symmetrizing a unit atom at 4") {
    const auto g = symmetrize_cdf(esd({{4.0}, 1}));
    CHECK(g.size() == 2);
    CHECK(g.jump_points()[0] == -2.0);
    CHECK(g.jump_points()[1] == 2.0);
    CHECK(g(-2.0) == 0.5);
    CHECK(g(1.0) == 0.5);
    CHECK(g(2.0) == 1.0);
  }

  TEST_CASE("symmetric mass around zero") {
    const auto f = esd({{0.0, 0.0, 1.0, 4.0}, 4});
    const auto g = symmetrize_cdf(f);
    const double below = g.left_limit(0.0), above = 1.0 - g(0.0);
    CHECK(below == doctest::Approx(above));
    CHECK(g(0.0) - g.left_limit(0.0) == doctest::Approx(f(0.0)));
  }

  TEST_CASE("negative support is rejected") {
    CHECK_THROWS_AS(symmetrize_cdf(esd({{-1.0, 2.0}, 2})), ContractError);
  }

  TEST_CASE("squaring and folding recovers F at every jump") {
    const auto s = covariance_spectrum(covariance_matrix(testsupport::random_sample(9, 15, 6)));
    const auto f = esd(s);
    const auto g = symmetrize_cdf(f);
    for (double x : f.jump_points()) CHECK(2.0 * g(std::sqrt(x)) - 1.0 == doctest::Approx(f(x)).epsilon(1e-15));
  }

  TEST_CASE("symmetrized ESD of W equals the ESD of eig(H)") {
    const auto x = testsupport::random_sample(6, 10, 17);
    const auto g = symmetrize_cdf(esd(covariance_spectrum(covariance_matrix(x))));
    const auto mu = symmetric_eigenvalues(hermitization(x).values).eigenvalues;
    // Drop the n - p structural zeros of H: the 4 eigenvalues closest to 0.
    std::vector<double> by_abs = mu;
    std::sort(by_abs.begin(), by_abs.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    std::vector<double> nonzero(by_abs.begin() + 4, by_abs.end());
    std::sort(nonzero.begin(), nonzero.end());
    REQUIRE(nonzero.size() == 12);
    for (std::size_t i = 0; i < nonzero.size(); ++i) {
      const double x_i = nonzero[i];
      CHECK(g(x_i + 1e-9) == doctest::Approx((i + 1) / 12.0));
      CHECK(g(x_i - 1e-9) == doctest::Approx(i / 12.0));
    }
  }

  TEST_CASE("csv export") {
    std::ostringstream out;
    write_csv(out, esd({{1.0, 3.0}, 2}));
    CHECK(out.str() == "x,F\n1,0.5\n3,1\n");
  }
}
