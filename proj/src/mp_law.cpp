#include "mpconv/mp_law.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "mpconv/errors.hpp"

namespace mpconv {

namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kPi = std::numbers::pi;
constexpr unsigned kMaxDepth = 25;
constexpr unsigned kCdfMaxDepth = 12;
constexpr double kCdfTolerance = 1e-10;

// Density times dx/dtheta under x = a + (b - a) sin^2(theta). The square-root
// edge factors cancel against the Jacobian, leaving a smooth integrand.
double substituted_density(const MPLaw& law, double theta) {
  const double s = std::sin(theta), c = std::cos(theta);
  const double w = law.b() - law.a();
  if (law.a() == 0.0) return w * c * c / (kPi * law.y());
  const double x = law.a() + w * s * s;
  return w * w * s * s * c * c / (kPi * law.y() * x);
}

double integrate_density(const MPLaw& law, double theta_hi) {
  if (theta_hi <= 0.0) return 0.0;
  double err = 0.0;
  const double r = gauss_kronrod<double, 15>::integrate(
      [&](double t) { return substituted_density(law, t); }, 0.0, theta_hi, kCdfMaxDepth, 1e-12,
      &err);
  if (!(err <= kCdfTolerance)) throw NumericalError("mp_cdf: quadrature did not converge");
  return r;
}

}  // namespace

MPLaw::MPLaw(double y) : y_(y) {
  if (!(y > 0.0) || !std::isfinite(y)) throw ConfigError("MP law requires y > 0");
  const double r = std::sqrt(y);
  a_ = (1.0 - r) * (1.0 - r);
  b_ = (1.0 + r) * (1.0 + r);
  atom_ = y > 1.0 ? 1.0 - 1.0 / y : 0.0;
}

void ComplexPoint::require_upper() const {
  if (!(v > 0.0)) throw ContractError("point must lie in the open upper half-plane (v > 0)");
}

double mp_pdf(const MPLaw& law, double x) {
  if (!(x > law.a() && x < law.b()) || x <= 0.0) return 0.0;
  return std::sqrt((law.b() - x) * (x - law.a())) / (2.0 * kPi * x * law.y());
}

double mp_continuous_mass(const MPLaw& law) { return integrate_density(law, kPi / 2.0); }

double mp_cdf(const MPLaw& law, double x) {
  if (x < 0.0) return 0.0;
  if (x <= law.a()) return law.atom_at_zero();
  if (x >= law.b()) return 1.0;
  const double t = std::asin(std::sqrt((x - law.a()) / (law.b() - law.a())));
  const double f = law.atom_at_zero() + integrate_density(law, t);
  return std::clamp(f, 0.0, 1.0);
}

double symmetrized_mp_pdf(const MPLaw& law, double x) {
  const double x2 = x * x;
  if (law.a() == 0.0) {
    if (x2 >= law.b()) return 0.0;
    return std::sqrt(law.b() - x2) / (2.0 * kPi * law.y());
  }
  if (!(x2 > law.a() && x2 < law.b())) return 0.0;
  return std::sqrt((x2 - law.a()) * (law.b() - x2)) / (2.0 * kPi * law.y() * std::abs(x));
}

double symmetrized_mp_cdf(const MPLaw& law, double x) {
  if (x >= 0.0) return 0.5 * (1.0 + mp_cdf(law, x * x));
  return 0.5 * (1.0 - mp_cdf(law, x * x));
}

DensitySup symmetrized_density_sup(const MPLaw& law, std::size_t grid_points) {
  const double lo = std::sqrt(law.a()), hi = std::sqrt(law.b());
  DensitySup out{0.0, lo, 1.0 / (kPi * std::sqrt(law.y()) * (1.0 + std::sqrt(law.y())))};
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    const double f = symmetrized_mp_pdf(law, x);
    if (f > out.measured) {
      out.measured = f;
      out.arg_x = x;
    }
  }
  return out;
}

cplx herglotz_root(cplx a, cplx b) {
  const cplx sq = std::sqrt(b * b - 4.0 * a);
  const cplx q = std::real(std::conj(b) * sq) >= 0.0 ? -0.5 * (b + sq) : -0.5 * (b - sq);
  const cplx r1 = q / a;
  const cplx r2 = 1.0 / q;
  const bool up1 = r1.imag() > 0.0, up2 = r2.imag() > 0.0;
  if (up1 == up2) throw NumericalError("Stieltjes branch selection failed");
  return up1 ? r1 : r2;
}

StieltjesValue mp_stieltjes(const MPLaw& law, ComplexPoint z) {
  z.require_upper();
  const double y = law.y();
  const cplx w = z.z();
  return {herglotz_root(y * w, w + y - 1.0), z};
}

cplx mp_stieltjes_quadrature(const MPLaw& law, ComplexPoint z) {
  z.require_upper();
  const cplx w = z.z();
  const double span = law.b() - law.a();
  auto kernel = [&](double theta) {
    const double s = std::sin(theta);
    const double x = law.a() + span * s * s;
    return substituted_density(law, theta) / (x - w);
  };
  double err_re = 0.0, err_im = 0.0;
  const double re = gauss_kronrod<double, 15>::integrate(
      [&](double t) { return kernel(t).real(); }, 0.0, kPi / 2.0, kMaxDepth, 1e-11, &err_re);
  const double im = gauss_kronrod<double, 15>::integrate(
      [&](double t) { return kernel(t).imag(); }, 0.0, kPi / 2.0, kMaxDepth, 1e-11, &err_im);
  if (!(err_re < 1e-8 && err_im < 1e-8))
    throw NumericalError("Stieltjes quadrature did not converge");
  cplx s{re, im};
  if (law.atom_at_zero() > 0.0) s += law.atom_at_zero() / (0.0 - w);
  return s;
}

cplx fixed_point_denominator(double y, cplx z, cplx s) { return z + y * s + (y - 1.0) / z; }

StieltjesValue symmetrized_stieltjes(const MPLaw& law, ComplexPoint z) {
  z.require_upper();
  const double y = law.y();
  const cplx w = z.z();
  return {herglotz_root(cplx(y, 0.0), w + (y - 1.0) / w), z};
}

cplx q_func(double y, ComplexPoint z) {
  z.require_upper();
  if (!(y > 0.0)) throw ConfigError("q_func requires y > 0");
  return herglotz_root(cplx(y, 0.0), z.z());
}

}  // namespace mpconv
