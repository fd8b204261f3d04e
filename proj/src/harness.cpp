#include "mpconv/harness.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "mpconv/errors.hpp"
#include "mpconv/io.hpp"
#include "mpconv/mp_law.hpp"

namespace mpconv {
namespace {

using io::format_double;

std::string case_tag(const CaseSpec& c) {
  std::string tag = "n" + std::to_string(c.n) + "_p" + std::to_string(c.p);
  if (c.sparsity) tag += "_s" + format_double(*c.sparsity);
  return tag;
}

std::string sparsity_text(const std::optional<double>& s) {
  return s ? format_double(*s) : std::string("none");
}

void require_fit_design(const std::vector<double>& xs) {
  if (std::set<double>(xs.begin(), xs.end()).size() < 3)
    throw PlanError("rate fit needs at least 3 distinct x values");
}

nlohmann::json kolmogorov_json(const KolmogorovResult& k) {
  return {{"delta", k.delta},
          {"arg_x", k.arg_x},
          {"side", k.side == Side::left_limit ? "left_limit" : "right_value"}};
}

// The plan as recorded in result files; the output location is left out so
// that results do not depend on where they are written.
nlohmann::json recorded_plan(const ExperimentPlan& plan) {
  nlohmann::json j = plan;
  j.erase("output_path");
  return j;
}

}  // namespace

EnsembleConfig CaseSpec::ensemble(std::uint64_t base_seed) const {
  EnsembleConfig c;
  c.n = n;
  c.p = p;
  c.entry_dist = entry_dist;
  c.sparsity = sparsity;
  c.base_seed = base_seed;
  c.validate();
  return c;
}

double VSchedule::at(std::size_t n) const {
  return kind == Kind::fixed ? value : value / std::sqrt(static_cast<double>(n));
}

void ExperimentPlan::validate() const {
  if (cases.empty()) throw PlanError("plan has no cases");
  if (replicates < 1) throw PlanError("plan needs replicates >= 1");
  if (!(v_schedule.value > 0.0)) throw PlanError("v schedule value must be positive");
  for (const auto& c : cases) {
    try {
      c.ensemble(base_seed);
    } catch (const ConfigError& e) {
      throw PlanError(std::string("invalid case: ") + e.what());
    }
  }
}

void to_json(nlohmann::json& j, const CaseSpec& c) {
  j = {{"n", c.n}, {"p", c.p}, {"entry_dist", c.entry_dist}};
  j["sparsity"] = c.sparsity ? nlohmann::json(*c.sparsity) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, CaseSpec& c) {
  c.n = j.at("n").get<std::size_t>();
  c.p = j.at("p").get<std::size_t>();
  c.entry_dist = j.value("entry_dist", nlohmann::json("rademacher")).get<EntryDist>();
  if (j.contains("sparsity") && !j.at("sparsity").is_null())
    c.sparsity = j.at("sparsity").get<double>();
  else
    c.sparsity.reset();
}

void to_json(nlohmann::json& j, const VSchedule& v) {
  j = {{v.kind == VSchedule::Kind::fixed ? "fixed" : "scaled", v.value}};
}

void from_json(const nlohmann::json& j, VSchedule& v) {
  if (j.contains("fixed")) {
    v = {VSchedule::Kind::fixed, j.at("fixed").get<double>()};
  } else if (j.contains("scaled")) {
    v = {VSchedule::Kind::scaled, j.at("scaled").get<double>()};
  } else {
    throw PlanError("v_schedule must be {\"fixed\": v} or {\"scaled\": c}");
  }
}

void to_json(nlohmann::json& j, const ExperimentPlan& p) {
  j = {{"cases", p.cases},
       {"replicates", p.replicates},
       {"v_schedule", p.v_schedule},
       {"base_seed", p.base_seed},
       {"output_path", p.output_path.generic_string()}};
}

void from_json(const nlohmann::json& j, ExperimentPlan& p) {
  try {
    p.cases = j.at("cases").get<std::vector<CaseSpec>>();
    p.replicates = j.value("replicates", std::size_t{100});
    if (j.contains("v_schedule"))
      p.v_schedule = j.at("v_schedule").get<VSchedule>();
    else
      p.v_schedule = {};
    p.base_seed = j.value("base_seed", std::uint64_t{0});
    p.output_path = j.value("output_path", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw PlanError(std::string("plan: ") + e.what());
  } catch (const ConfigError& e) {
    throw PlanError(std::string("plan: ") + e.what());
  }
}

RateFit fit_rate(std::span<const std::pair<double, double>> points, FitVariable x_variable) {
  std::vector<double> lx, ly;
  for (const auto& [x, d] : points) {
    if (!(x > 0.0)) throw ContractError("fit_rate: x must be positive");
    if (!(d > 0.0)) throw ContractError("fit_rate: delta must be positive");
    lx.push_back(std::log(x));
    ly.push_back(std::log(d));
  }
  require_fit_design(lx);
  const double m = static_cast<double>(lx.size());
  const double mx = kernels::compensated_sum(lx) / m;
  const double my = kernels::compensated_sum(ly) / m;
  std::vector<double> sxx(lx.size()), sxy(lx.size()), syy(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double dx = lx[i] - mx, dy = ly[i] - my;
    sxx[i] = dx * dx;
    sxy[i] = dx * dy;
    syy[i] = dy * dy;
  }
  const double Sxx = kernels::compensated_sum(sxx);
  const double Sxy = kernels::compensated_sum(sxy);
  const double Syy = kernels::compensated_sum(syy);

  RateFit f;
  f.x_variable = x_variable;
  f.slope = Sxy / Sxx;
  f.intercept = my - f.slope * mx;
  std::vector<double> res(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (f.intercept + f.slope * lx[i]);
    res[i] = e * e;
  }
  const double sse = kernels::compensated_sum(res);
  f.slope_stderr = std::sqrt(sse / (m - 2.0) / Sxx);
  f.r_squared = Syy > 0.0 ? std::clamp(1.0 - sse / Syy, 0.0, 1.0) : 1.0;
  return f;
}

void to_json(nlohmann::json& j, const RateFit& f) {
  j = {{"slope", f.slope},
       {"intercept", f.intercept},
       {"slope_stderr", f.slope_stderr},
       {"r_squared", f.r_squared},
       {"x_variable", f.x_variable == FitVariable::n ? "n" : "np_n"}};
}

std::string sweep_table_csv(std::span<const CaseResult> cases, std::size_t replicates,
                            std::uint64_t seed) {
  std::ostringstream out;
  out << "n,p,y,dist,sparsity,replicates,delta_p,se_p,delta_p_star,se_star,seed\n";
  for (const auto& c : cases) {
    const double y = static_cast<double>(c.spec.p) / static_cast<double>(c.spec.n);
    out << c.spec.n << ',' << c.spec.p << ',' << format_double(y) << ','
        << c.spec.entry_dist.name() << ',' << sparsity_text(c.spec.sparsity) << ','
        << replicates << ',' << format_double(c.distances.delta_p.delta) << ','
        << format_double(c.distances.se_p) << ',' << format_double(c.distances.delta_p_star)
        << ',' << format_double(c.distances.se_star) << ',' << seed << '\n';
  }
  return out.str();
}

RateSweepResult run_rate_sweep(const ExperimentPlan& plan, Execution exec) {
  plan.validate();
  if (plan.replicates < 8) throw PlanError("fitted sweeps need replicates >= 8");
  const double y0 = static_cast<double>(plan.cases.front().p) /
                    static_cast<double>(plan.cases.front().n);
  std::vector<double> ns;
  for (const auto& c : plan.cases) {
    if (c.sparsity) throw PlanError("rate sweep cases must be dense (no sparsity)");
    const double y = static_cast<double>(c.p) / static_cast<double>(c.n);
    if (std::abs(y - y0) > 1e-12) throw PlanError("rate sweep cases must share p/n");
    ns.push_back(std::log(static_cast<double>(c.n)));
  }
  require_fit_design(ns);

  RateSweepResult result;
  for (const auto& c : plan.cases) {
    const EnsembleConfig cfg = c.ensemble(plan.base_seed);
    const auto spectra = sample_spectra(cfg, plan.replicates, 0, exec);
    CaseResult cr{c, distances_from_spectra(spectra, MPLaw(cfg.y()), exec), pooled_esd(spectra)};
    result.cases.push_back(std::move(cr));
  }
  std::vector<std::pair<double, double>> pts_p, pts_star;
  for (const auto& c : result.cases) {
    pts_p.emplace_back(static_cast<double>(c.spec.n), c.distances.delta_p.delta);
    pts_star.emplace_back(static_cast<double>(c.spec.n), c.distances.delta_p_star);
  }
  result.fit_delta_p = fit_rate(pts_p, FitVariable::n);
  result.fit_delta_p_star = fit_rate(pts_star, FitVariable::n);

  if (!plan.output_path.empty()) {
    io::write_text(plan.output_path / "sweep.csv",
                   sweep_table_csv(result.cases, plan.replicates, plan.base_seed));
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : result.cases)
      rows.push_back({{"n", c.spec.n},
                      {"p", c.spec.p},
                      {"y", static_cast<double>(c.spec.p) / static_cast<double>(c.spec.n)},
                      {"dist", c.spec.entry_dist},
                      {"replicates", plan.replicates},
                      {"delta_p", kolmogorov_json(c.distances.delta_p)},
                      {"se_p", c.distances.se_p},
                      {"delta_p_star", c.distances.delta_p_star},
                      {"se_star", c.distances.se_star},
                      {"seed", plan.base_seed}});
    io::write_json(plan.output_path / "sweep.json",
                   {{"plan", recorded_plan(plan)},
                    {"cases", rows},
                    {"fit_delta_p", result.fit_delta_p},
                    {"fit_delta_p_star", result.fit_delta_p_star}});
    for (const auto& c : result.cases)
      emit_plot_data(plan.output_path, case_tag(c.spec), c.pooled,
                     static_cast<double>(c.spec.p) / static_cast<double>(c.spec.n));
  }
  return result;
}

SparseSweepResult run_sparse_sweep(const ExperimentPlan& plan, Execution exec) {
  plan.validate();
  if (plan.replicates < 8) throw PlanError("fitted sweeps need replicates >= 8");
  const CaseSpec& first = plan.cases.front();
  std::vector<double> npn;
  for (const auto& c : plan.cases) {
    if (!c.sparsity) throw PlanError("sparse sweep cases must set sparsity");
    if (c.n != first.n || c.p != first.p || !(c.entry_dist == first.entry_dist))
      throw PlanError("sparse sweep cases must share n, p and entry_dist");
    const double v = static_cast<double>(c.n) * *c.sparsity;
    if (v < 16.0) throw PlanError("n p_n = " + format_double(v) + " is below 16");
    npn.push_back(v);
  }
  require_fit_design(npn);

  CaseSpec dense_spec = first;
  dense_spec.sparsity.reset();
  const EnsembleConfig dense_cfg = dense_spec.ensemble(plan.base_seed);
  const auto dense_spectra = sample_spectra(dense_cfg, plan.replicates, 0, exec);
  const EmpiricalCDF dense_pooled = pooled_esd(dense_spectra);
  const MPLaw law(dense_cfg.y());

  SparseSweepResult result;
  for (const auto& c : plan.cases) {
    const EnsembleConfig cfg = c.ensemble(plan.base_seed);
    // p_n = 1 applies no mask and uses the same entry stream as the dense case.
    const auto spectra = *c.sparsity == 1.0 ? dense_spectra
                                            : sample_spectra(cfg, plan.replicates, 0, exec);
    SparseCaseResult r;
    r.spec = c;
    r.np_n = static_cast<double>(c.n) * *c.sparsity;
    r.vs_law = distances_from_spectra(spectra, law, exec);
    r.pooled = pooled_esd(spectra);
    r.vs_dense = kolmogorov_step_vs_step(r.pooled, dense_pooled);
    result.cases.push_back(std::move(r));
  }

  std::vector<std::pair<double, double>> pts_law, pts_dense;
  for (const auto& r : result.cases) {
    pts_law.emplace_back(r.np_n, r.vs_law.delta_p.delta);
    if (r.vs_dense.delta > 0.0) pts_dense.emplace_back(r.np_n, r.vs_dense.delta);
  }
  result.fit_vs_law = fit_rate(pts_law, FitVariable::np_n);
  std::set<double> dense_x;
  for (const auto& [x, d] : pts_dense) dense_x.insert(x);
  if (dense_x.size() >= 3) result.fit_vs_dense = fit_rate(pts_dense, FitVariable::np_n);

  if (!plan.output_path.empty()) {
    std::ostringstream csv;
    csv << "# delta_vs_law: sup_x |E F_p^(eps)(x) - F_y(x)|\n"
        << "# delta_vs_dense: sup_x |E F_p^(eps)(x) - E F_p(x)|, dense ensemble with the same "
           "seeds\n"
        << "n,p,sparsity,np_n,replicates,delta_vs_law,se_vs_law,delta_star_vs_law,se_star,"
           "delta_vs_dense,seed\n";
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : result.cases) {
      csv << r.spec.n << ',' << r.spec.p << ',' << format_double(*r.spec.sparsity) << ','
          << format_double(r.np_n) << ',' << plan.replicates << ','
          << format_double(r.vs_law.delta_p.delta) << ',' << format_double(r.vs_law.se_p) << ','
          << format_double(r.vs_law.delta_p_star) << ',' << format_double(r.vs_law.se_star)
          << ',' << format_double(r.vs_dense.delta) << ',' << plan.base_seed << '\n';
      rows.push_back({{"n", r.spec.n},
                      {"p", r.spec.p},
                      {"sparsity", *r.spec.sparsity},
                      {"np_n", r.np_n},
                      {"dist", r.spec.entry_dist},
                      {"replicates", plan.replicates},
                      {"delta_vs_law", kolmogorov_json(r.vs_law.delta_p)},
                      {"se_vs_law", r.vs_law.se_p},
                      {"delta_star_vs_law", r.vs_law.delta_p_star},
                      {"se_star", r.vs_law.se_star},
                      {"delta_vs_dense", kolmogorov_json(r.vs_dense)},
                      {"seed", plan.base_seed}});
    }
    io::write_text(plan.output_path / "sparse.csv", csv.str());
    nlohmann::json doc{{"plan", recorded_plan(plan)}, {"cases", rows}, {"fit_vs_law", result.fit_vs_law}};
    doc["fit_vs_dense"] =
        result.fit_vs_dense ? nlohmann::json(*result.fit_vs_dense) : nlohmann::json(nullptr);
    io::write_json(plan.output_path / "sparse.json", doc);
    for (const auto& r : result.cases)
      emit_plot_data(plan.output_path, case_tag(r.spec), r.pooled, law.y());
  }
  return result;
}

void emit_plot_data(const std::filesystem::path& dir, const std::string& tag,
                    const EmpiricalCDF& pooled, double y) {
  const MPLaw law(y);
  auto grid = [](double lo, double hi, std::size_t i) {
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kPlotGridPoints - 1);
  };

  std::ostringstream out;
  out << "source,x,F\n";
  for (std::size_t i = 0; i < pooled.size(); ++i)
    out << "esd," << format_double(pooled.jump_points()[i]) << ','
        << format_double(pooled.cumulative_at(i)) << '\n';
  const double pad = 0.05 * (law.b() - law.a());
  const double lo = law.a() - pad, hi = law.b() + pad;
  for (std::size_t i = 0; i < kPlotGridPoints; ++i) {
    const double x = grid(lo, hi, i);
    out << "mp," << format_double(x) << ',' << format_double(mp_cdf(law, x)) << '\n';
  }
  io::write_text(dir / ("overlay_" + tag + ".csv"), out.str());

  const EmpiricalCDF sym = symmetrize_cdf(pooled);
  std::ostringstream so;
  so << "source,x,F\n";
  for (std::size_t i = 0; i < sym.size(); ++i)
    so << "esd_sym," << format_double(sym.jump_points()[i]) << ','
       << format_double(sym.cumulative_at(i)) << '\n';
  const double edge = 1.05 * std::sqrt(law.b());
  for (std::size_t i = 0; i < kPlotGridPoints; ++i) {
    const double x = grid(-edge, edge, i);
    so << "mp_sym," << format_double(x) << ',' << format_double(symmetrized_mp_cdf(law, x))
       << '\n';
  }
  io::write_text(dir / ("overlay_sym_" + tag + ".csv"), so.str());
}

}  // namespace mpconv
