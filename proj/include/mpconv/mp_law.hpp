#pragma once

// Marchenko-Pastur law for aspect ratio y = p/n: density, distribution
// function, Stieltjes transform, and the symmetrized law of sign*sqrt(xi).

#include "mpconv/matrix.hpp"

namespace mpconv {

class MPLaw {
 public:
  explicit MPLaw(double y);

  double y() const { return y_; }
  double a() const { return a_; }  // (1 - sqrt y)^2
  double b() const { return b_; }  // (1 + sqrt y)^2
  double atom_at_zero() const { return atom_; }

 private:
  double y_, a_, b_, atom_;
};

/// A point of the open upper half-plane.
struct ComplexPoint {
  double u = 0.0;
  double v = 1.0;

  cplx z() const { return {u, v}; }
  /// Throws ContractError unless v > 0.
  void require_upper() const;
};

struct StieltjesValue {
  cplx value;
  ComplexPoint z;
};

/// Density of the continuous part (the atom at 0 for y > 1 is excluded).
/// Unbounded as x -> 0 when y = 1.
double mp_pdf(const MPLaw& law, double x);

/// F_y(x), atom included, absolute accuracy 1e-10.
double mp_cdf(const MPLaw& law, double x);

/// Integral of mp_pdf over [a, b].
double mp_continuous_mass(const MPLaw& law);

/// Density of the symmetrized law, |x| f_y(x^2). Finite everywhere.
double symmetrized_mp_pdf(const MPLaw& law, double x);

/// (1 + sgn(x) F_y(x^2)) / 2, right-continuous at 0.
double symmetrized_mp_cdf(const MPLaw& law, double x);

struct DensitySup {
  double measured;     // max of symmetrized_mp_pdf over the grid
  double arg_x;
  double stated_bound; // 1 / (pi sqrt(y) (1 + sqrt(y)))
};

/// Grid maximization of the symmetrized density on [sqrt a, sqrt b].
DensitySup symmetrized_density_sup(const MPLaw& law, std::size_t grid_points = 100001);

/// Root of y z s^2 + (z + y - 1) s + 1 = 0 with Im s > 0.
StieltjesValue mp_stieltjes(const MPLaw& law, ComplexPoint z);

/// Same transform by adaptive quadrature of f_y(x)/(x - z) plus the atom.
cplx mp_stieltjes_quadrature(const MPLaw& law, ComplexPoint z);

/// z s_y(z^2), the transform of the symmetrized law. Evaluated as the
/// Im > 0 root of y s^2 + (z + (y-1)/z) s + 1 = 0.
StieltjesValue symmetrized_stieltjes(const MPLaw& law, ComplexPoint z);

/// -(z - sqrt(z^2 - 4y)) / (2y) on the branch with Im q > 0.
cplx q_func(double y, ComplexPoint z);

/// z + y s + (y - 1)/z: the denominator of the symmetrized fixed point.
cplx fixed_point_denominator(double y, cplx z, cplx s);

/// Root of a s^2 + b s + 1 = 0 with positive imaginary part, computed
/// without cancellation. Throws NumericalError unless exactly one root
/// lies in the open upper half-plane.
cplx herglotz_root(cplx a, cplx b);

}  // namespace mpconv
