#pragma once

// Random sample matrices X (p x n) with i.i.d. mean-0 variance-1 entries,
// optional Bernoulli sparsification, and the two derived matrices:
// the covariance W = X X^T / n and the Hermitization
//
//     H = [ 0          X^T / sqrt(n) ]     (first block: order n)
//         [ X/sqrt(n)  0             ]     (second block: order p)
//
// In the sparse ensemble the factor 1/n becomes 1/(n p_n).

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "mpconv/kernels.hpp"
#include "mpconv/matrix.hpp"

namespace mpconv {

struct EntryDist {
  enum class Kind { rademacher, gaussian, uniform_scaled, two_point };
  Kind kind = Kind::rademacher;
  double q = 0.5;  // two_point only

  static EntryDist rademacher() { return {Kind::rademacher, 0.5}; }
  static EntryDist gaussian() { return {Kind::gaussian, 0.5}; }
  static EntryDist uniform_scaled() { return {Kind::uniform_scaled, 0.5}; }
  static EntryDist two_point(double q) { return {Kind::two_point, q}; }

  /// Analytic E X^4.
  double fourth_moment() const;
  std::string name() const;
  void validate() const;

  bool operator==(const EntryDist&) const = default;
};

struct EnsembleConfig {
  std::size_t n = 1;
  std::size_t p = 1;
  EntryDist entry_dist;
  std::optional<double> sparsity;
  std::uint64_t base_seed = 0;

  double y() const { return static_cast<double>(p) / static_cast<double>(n); }
  double sparsity_or_one() const { return sparsity.value_or(1.0); }
  /// Factor applied to raw (masked) entries: 1/sqrt(n p_n).
  double entry_scale() const;
  void validate() const;

  bool operator==(const EnsembleConfig&) const = default;
};

struct SampleMatrix {
  RealMatrix entries;  // p x n, mask already applied, not rescaled
  EnsembleConfig config;
  std::uint64_t replicate_index = 0;
};

struct CovarianceMatrix {
  RealMatrix values;  // p x p
  double y = 1.0;
};

struct HermitizationMatrix {
  RealMatrix values;  // (n+p) x (n+p)
  std::size_t n = 0;
  std::size_t p = 0;
};

/// Seed of an independent stream for (base_seed, replicate, stream).
std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t replicate, std::uint64_t stream);

SampleMatrix sample_matrix(const EnsembleConfig& config, std::uint64_t replicate_index);

CovarianceMatrix covariance_matrix(const SampleMatrix& x, Execution exec = Execution::parallel);

HermitizationMatrix hermitization(const SampleMatrix& x);

void to_json(nlohmann::json& j, const EntryDist& d);
void from_json(const nlohmann::json& j, EntryDist& d);
void to_json(nlohmann::json& j, const EnsembleConfig& c);
void from_json(const nlohmann::json& j, EnsembleConfig& c);

}  // namespace mpconv
