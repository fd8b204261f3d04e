#pragma once

// Experiment plans, rate sweeps over n (dense) and n p_n (sparse), log-log
// rate fits, and CSV/JSON result files.

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mpconv/distance.hpp"
#include "mpconv/ensemble.hpp"
#include "mpconv/kernels.hpp"
#include "mpconv/spectral.hpp"

namespace mpconv {

struct CaseSpec {
  std::size_t n = 0;
  std::size_t p = 0;
  EntryDist entry_dist;
  std::optional<double> sparsity;

  EnsembleConfig ensemble(std::uint64_t base_seed) const;
  bool operator==(const CaseSpec&) const = default;
};

struct VSchedule {
  enum class Kind { fixed, scaled };
  Kind kind = Kind::fixed;
  double value = 0.5;  // v itself, or c in v = c n^{-1/2}

  double at(std::size_t n) const;
};

struct ExperimentPlan {
  std::vector<CaseSpec> cases;
  std::size_t replicates = 100;
  VSchedule v_schedule;
  std::uint64_t base_seed = 0;
  std::filesystem::path output_path;

  /// Throws PlanError for an empty plan, invalid cases, or replicates < 1.
  void validate() const;
};

void to_json(nlohmann::json& j, const CaseSpec& c);
void from_json(const nlohmann::json& j, CaseSpec& c);
void to_json(nlohmann::json& j, const VSchedule& v);
void from_json(const nlohmann::json& j, VSchedule& v);
void to_json(nlohmann::json& j, const ExperimentPlan& p);
void from_json(const nlohmann::json& j, ExperimentPlan& p);

enum class FitVariable { n, np_n };

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  FitVariable x_variable = FitVariable::n;
};

/// Ordinary least squares of log(delta) on log(x). Throws PlanError with
/// fewer than 3 distinct x, ContractError for a nonpositive x or delta.
RateFit fit_rate(std::span<const std::pair<double, double>> points,
                 FitVariable x_variable = FitVariable::n);

void to_json(nlohmann::json& j, const RateFit& f);

struct CaseResult {
  CaseSpec spec;
  DistanceSummary distances;
  EmpiricalCDF pooled;  // averaged ESD over the replicates
};

struct RateSweepResult {
  std::vector<CaseResult> cases;
  RateFit fit_delta_p;
  RateFit fit_delta_p_star;
};

/// Dense cases with a common p/n. Writes sweep.csv and sweep.json to
/// plan.output_path when it is nonempty.
RateSweepResult run_rate_sweep(const ExperimentPlan& plan, Execution exec = Execution::parallel);

struct SparseCaseResult {
  CaseSpec spec;
  double np_n = 0.0;
  DistanceSummary vs_law;     // against F_y
  KolmogorovResult vs_dense;  // averaged sparse ESD against averaged dense ESD
  EmpiricalCDF pooled;
};

struct SparseSweepResult {
  std::vector<SparseCaseResult> cases;
  RateFit fit_vs_law;
  std::optional<RateFit> fit_vs_dense;  // absent with fewer than 3 positive points
};

/// Cases share n and p and differ in sparsity; n p_n >= 16 required.
/// Writes sparse.csv and sparse.json when plan.output_path is nonempty.
SparseSweepResult run_sparse_sweep(const ExperimentPlan& plan,
                                   Execution exec = Execution::parallel);

/// Overlay files for one case, named by `tag`:
///   overlay_<tag>.csv       source,x,F  (ESD jumps, then the 2000-point MP grid)
///   overlay_sym_<tag>.csv   the same for the symmetrized laws
void emit_plot_data(const std::filesystem::path& dir, const std::string& tag,
                    const EmpiricalCDF& pooled, double y);

/// n,p,y,dist,sparsity,replicates,delta_p,se_p,delta_p_star,se_star,seed
std::string sweep_table_csv(std::span<const CaseResult> cases, std::size_t replicates,
                            std::uint64_t seed);

inline constexpr std::size_t kPlotGridPoints = 2000;

}  // namespace mpconv
