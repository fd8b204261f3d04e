#pragma once

// Data-parallel kernels. Every kernel has an OpenMP version and a serial
// reference; both produce bit-identical results because each output slot
// is written by exactly one iteration with a fixed accumulation order.

#include <cstddef>
#include <functional>

#include "mpconv/matrix.hpp"

namespace mpconv {

enum class Execution { serial, parallel };

void set_thread_count(int threads);
int thread_count();

namespace kernels {

/// scale * X * X^T (rows of X are the p variables).
RealMatrix gram(const RealMatrix& x, double scale, Execution exec = Execution::parallel);

/// Naive triple loop, no symmetry exploitation. Test oracle.
RealMatrix gram_reference(const RealMatrix& x, double scale);

/// Runs body(i) for i in [0, count). Bodies must only write to slot i.
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body,
                    Execution exec = Execution::parallel);

/// Neumaier-compensated sum in index order.
double compensated_sum(std::span<const double> values);
cplx compensated_sum(std::span<const cplx> values);

}  // namespace kernels
}  // namespace mpconv
