#pragma once

#include <span>
#include <vector>

#include "mpconv/matrix.hpp"

namespace mpconv {

/// LU factorization with partial pivoting of a dense complex matrix.
class ComplexLU {
 public:
  explicit ComplexLU(ComplexMatrix a);

  std::vector<cplx> solve(std::span<const cplx> rhs) const;
  /// Column `j` of the inverse.
  std::vector<cplx> inverse_column(std::size_t j) const;
  ComplexMatrix inverse() const;
  std::size_t order() const { return lu_.rows(); }

 private:
  ComplexMatrix lu_;
  std::vector<std::size_t> perm_;
};

/// M - z I as a complex matrix.
ComplexMatrix shift(const RealMatrix& m, cplx z);

ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix to_complex(const RealMatrix& m);

/// max |A B - I|.
double identity_residual(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace mpconv
