#include "mpconv/kernels.hpp"

#include <omp.h>

#include <exception>
#include <mutex>

namespace mpconv {

void set_thread_count(int threads) {
  if (threads < 1) threads = omp_get_num_procs();
  omp_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

namespace kernels {

namespace {

// Dot product of two rows with a fixed summation order.
inline double row_dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

RealMatrix gram(const RealMatrix& x, double scale, Execution exec) {
  const auto p = static_cast<std::ptrdiff_t>(x.rows());
  RealMatrix w(x.rows(), x.rows());
#pragma omp parallel for schedule(dynamic, 4) if (exec == Execution::parallel)
  for (std::ptrdiff_t i = 0; i < p; ++i) {
    const auto ri = x.row(static_cast<std::size_t>(i));
    for (std::ptrdiff_t j = 0; j <= i; ++j) {
      const double v = scale * row_dot(ri, x.row(static_cast<std::size_t>(j)));
      w(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = v;
      w(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = v;
    }
  }
  return w;
}

RealMatrix gram_reference(const RealMatrix& x, double scale) {
  RealMatrix w(x.rows(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < x.cols(); ++k) s += x(i, k) * x(j, k);
      w(i, j) = scale * s;
    }
  return w;
}

void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body,
                    Execution exec) {
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

double compensated_sum(std::span<const double> values) {
  double sum = 0.0, c = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      c += (sum - t) + v;
    else
      c += (v - t) + sum;
    sum = t;
  }
  return sum + c;
}

cplx compensated_sum(std::span<const cplx> values) {
  std::vector<double> re(values.size()), im(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    re[i] = values[i].real();
    im[i] = values[i].imag();
  }
  return {compensated_sum(re), compensated_sum(im)};
}

}  // namespace kernels
}  // namespace mpconv
