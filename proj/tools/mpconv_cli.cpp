// Command-line front end: sample, law, distance, diag, rate, sparse.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "mpconv/distance.hpp"
#include "mpconv/errors.hpp"
#include "mpconv/harness.hpp"
#include "mpconv/io.hpp"
#include "mpconv/mp_law.hpp"
#include "mpconv/resolvent.hpp"
#include "mpconv/spectral.hpp"

namespace {

using namespace mpconv;
using nlohmann::json;
using io::format_double;

struct Common {
  std::string config;
  std::string out = ".";
  int threads = 0;
  std::optional<std::uint64_t> seed;
};

json load(const Common& c) {
  try {
    return io::read_json(c.config);
  } catch (const json::exception& e) {
    throw ConfigError(c.config + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
}

EnsembleConfig ensemble_from(const json& j, const Common& c) {
  EnsembleConfig e;
  try {
    e = j.get<EnsembleConfig>();
  } catch (const json::exception& ex) {
    throw ConfigError(ex.what());
  }
  if (c.seed) e.base_seed = *c.seed;
  return e;
}

ComplexPoint point_from(const json& j) {
  ComplexPoint z{j.at("u").get<double>(), j.at("v").get<double>()};
  z.require_upper();
  return z;
}

json cjson(cplx v) { return json::array({v.real(), v.imag()}); }

void cmd_sample(const Common& c) {
  const json j = load(c);
  const EnsembleConfig cfg = ensemble_from(j.contains("ensemble") ? j.at("ensemble") : j, c);
  const std::uint64_t replicate = j.value("replicate", std::uint64_t{0});
  const SampleMatrix x = sample_matrix(cfg, replicate);
  const Spectrum spec = covariance_spectrum(covariance_matrix(x));
  std::ostringstream s;
  s << "index,lambda\n";
  for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i)
    s << i << ',' << format_double(spec.eigenvalues[i]) << '\n';
  io::write_text(std::filesystem::path(c.out) / "spectrum.csv", s.str());
  std::ostringstream e;
  write_csv(e, esd(spec));
  io::write_text(std::filesystem::path(c.out) / "esd.csv", e.str());
  const auto d = kolmogorov_step_vs_cdf(esd(spec), mp_cdf_evaluator(MPLaw(cfg.y())));
  io::write_json(std::filesystem::path(c.out) / "sample.json",
                 {{"ensemble", cfg},
                  {"replicate", replicate},
                  {"lambda_min", spec.eigenvalues.front()},
                  {"lambda_max", spec.eigenvalues.back()},
                  {"kolmogorov_to_law", d.delta}});
}

void cmd_law(const Common& c) {
  const json j = load(c);
  const MPLaw law(j.at("y").get<double>());
  const std::size_t points = j.value("grid_points", kPlotGridPoints);
  if (points < 2) throw ConfigError("grid_points must be >= 2");
  const double pad = 0.05 * (law.b() - law.a());
  std::ostringstream s;
  s << "x,pdf,cdf\n";
  for (std::size_t i = 0; i < points; ++i) {
    const double x = law.a() - pad + (law.b() - law.a() + 2 * pad) * i / double(points - 1);
    s << format_double(x) << ',' << format_double(x > law.a() && x < law.b() ? mp_pdf(law, x) : 0.0)
      << ',' << format_double(mp_cdf(law, x)) << '\n';
  }
  io::write_text(std::filesystem::path(c.out) / "law.csv", s.str());
  std::ostringstream t;
  t << "x,pdf,cdf\n";
  const double edge = 1.05 * std::sqrt(law.b());
  for (std::size_t i = 0; i < points; ++i) {
    const double x = -edge + 2 * edge * i / double(points - 1);
    t << format_double(x) << ',' << format_double(symmetrized_mp_pdf(law, x)) << ','
      << format_double(symmetrized_mp_cdf(law, x)) << '\n';
  }
  io::write_text(std::filesystem::path(c.out) / "law_sym.csv", t.str());

  json transforms = json::array();
  for (const auto& zj : j.value("z", json::array())) {
    const ComplexPoint z = point_from(zj);
    const cplx st = symmetrized_stieltjes(law, z).value;
    transforms.push_back({{"z", {{"u", z.u}, {"v", z.v}}},
                          {"s", cjson(mp_stieltjes(law, z).value)},
                          {"s_quadrature", cjson(mp_stieltjes_quadrature(law, z))},
                          {"s_sym", cjson(st)},
                          {"denominator_modulus",
                           std::abs(fixed_point_denominator(law.y(), z.z(), st))}});
  }
  const DensitySup sup = symmetrized_density_sup(law);
  io::write_json(std::filesystem::path(c.out) / "law.json",
                 {{"y", law.y()},
                  {"a", law.a()},
                  {"b", law.b()},
                  {"atom", law.atom_at_zero()},
                  {"continuous_mass", mp_continuous_mass(law)},
                  {"symmetrized_density_sup",
                   {{"measured", sup.measured}, {"arg_x", sup.arg_x}, {"stated_bound", sup.stated_bound}}},
                  {"transforms", transforms}});
}

void cmd_distance(const Common& c) {
  const json j = load(c);
  const EnsembleConfig cfg = ensemble_from(j.at("ensemble"), c);
  const std::size_t reps = j.value("replicates", std::size_t{100});
  if (reps < 2) throw PlanError("distance needs replicates >= 2");
  const auto spectra = sample_spectra(cfg, reps);
  const DistanceSummary d = distances_from_spectra(spectra, MPLaw(cfg.y()));
  const std::filesystem::path out(c.out);
  io::write_json(out / "distance.json", {{"ensemble", cfg},
                                         {"replicates", reps},
                                         {"delta_p", d.delta_p.delta},
                                         {"arg_x", d.delta_p.arg_x},
                                         {"se_p", d.se_p},
                                         {"delta_p_star", d.delta_p_star},
                                         {"se_star", d.se_star},
                                         {"per_replicate", d.per_replicate}});
  emit_plot_data(out, "n" + std::to_string(cfg.n) + "_p" + std::to_string(cfg.p), pooled_esd(spectra),
                 cfg.y());
  if (j.contains("smoothing")) {
    const json& s = j.at("smoothing");
    const MPLaw law(cfg.y());
    const double edge = 1.0 + std::sqrt(cfg.y());
    const SmoothingReport r = smoothing_terms(
        symmetrized_empirical_transform(spectra),
        [law](cplx z) { return symmetrized_stieltjes(law, {z.real(), z.imag()}).value; },
        s.at("v").get<double>(), s.value("V", 1.0), -edge, edge);
    io::write_json(out / "smoothing.json", {{"v", r.v},
                                            {"V", r.V},
                                            {"x_lo", r.x_lo},
                                            {"x_hi", r.x_hi},
                                            {"term_horizontal", r.term_horizontal},
                                            {"horizontal_tail", r.horizontal_tail},
                                            {"term_vertical", r.term_vertical},
                                            {"vertical_arg_x", r.vertical_arg_x},
                                            {"term_v", r.term_v}});
  }
}

LemmaSweepConfig sweep_from(const json& j, const Common& c) {
  LemmaSweepConfig s;
  if (j.contains("entry_dist")) s.entry_dist = j.at("entry_dist").get<EntryDist>();
  s.y = j.value("y", 1.0);
  if (j.contains("sparsity") && !j.at("sparsity").is_null()) s.sparsity = j.at("sparsity").get<double>();
  if (j.contains("ns")) s.ns = j.at("ns").get<std::vector<std::size_t>>();
  if (j.contains("us")) s.us = j.at("us").get<std::vector<double>>();
  if (j.contains("v_scale")) s.v_scale = j.at("v_scale").get<double>();
  if (j.contains("fixed_vs")) s.fixed_vs = j.at("fixed_vs").get<std::vector<double>>();
  s.replicates = j.value("replicates", s.replicates);
  s.rows_per_replicate = j.value("rows_per_replicate", s.rows_per_replicate);
  s.base_seed = c.seed.value_or(j.value("base_seed", std::uint64_t{0}));
  return s;
}

void cmd_diag(const Common& c) {
  const json j = load(c);
  const std::filesystem::path out(c.out);
  json doc;
  if (j.contains("ensemble")) {
    const EnsembleConfig cfg = ensemble_from(j.at("ensemble"), c);
    const ComplexPoint z = point_from(j.at("z"));
    doc["n"] = cfg.n;
    doc["p"] = cfg.p;
    doc["y"] = cfg.y();
    doc["z"] = {{"u", z.u}, {"v", z.v}};

    const SampleMatrix x = sample_matrix(cfg, 0);
    const HermitizationMatrix h = hermitization(x);
    const ResolventSample r = resolvent(h, z);
    const TraceResiduals tr = trace_identities(r, cfg.y(), z);
    double schur = 0.0, inter = 0.0;
    for (const std::size_t k : {std::size_t{0}, cfg.n}) {
      schur = std::max(schur, schur_check(h, z, k));
      inter = std::max(inter, interlacing_check(h, z, k).lhs * z.v);
    }
    doc["identity_residuals"] = {{"inverse", r.inverse_residual},
                                 {"block_formula", verify_block_formula(x, z)},
                                 {"trace_first", tr.first},
                                 {"trace_second", tr.second},
                                 {"schur", schur},
                                 {"interlacing_lhs_times_v", inter}};
    const std::size_t reps = j.value("replicates", std::size_t{100});
    doc["epsilon"] = epsilon_ensemble(cfg, z, reps, j.value("audit_replicates", std::size_t{4}),
                                      j.value("rows_per_replicate", std::size_t{8}));
    if (j.contains("herglotz")) {
      const json& hg = j.at("herglotz");
      std::vector<ComplexPoint> grid;
      const std::size_t m = hg.value("points", std::size_t{41});
      const double lo = hg.at("u_min").get<double>(), hi = hg.at("u_max").get<double>();
      for (std::size_t i = 0; i < m; ++i)
        grid.push_back({m == 1 ? lo : lo + (hi - lo) * i / double(m - 1), hg.at("v").get<double>()});
      doc["herglotz"] = herglotz_region_check(cfg, grid, reps);
    }
  }
  if (j.contains("sweep")) {
    const LemmaSweepReport rep = lemma_bound_sweep(sweep_from(j.at("sweep"), c));
    doc["moment_table"] = rep.rows;
    std::ostringstream s;
    s << "n,p,u,v,scaled_v,e_eps1_sq,e_eps2_sq,max_eps3_nv,e_eps4_sq,e_eps4_4th,mean_rkk_sq,"
         "ratio_eps1,ratio_eps2,ratio_eps4_bound,ratio_eps4,ratio_eps4_4th\n";
    for (const auto& r : rep.rows)
      s << r.n << ',' << r.p << ',' << format_double(r.u) << ',' << format_double(r.v) << ','
        << r.scaled_v << ',' << format_double(r.e_eps1_sq) << ',' << format_double(r.e_eps2_sq)
        << ',' << format_double(r.max_eps3_scaled) << ',' << format_double(r.e_eps4_sq) << ','
        << format_double(r.e_eps4_4th) << ',' << format_double(r.mean_rkk_sq) << ','
        << format_double(r.ratio_eps1) << ',' << format_double(r.ratio_eps2) << ','
        << format_double(r.ratio_eps4_bound) << ',' << format_double(r.ratio_eps4) << ','
        << format_double(r.ratio_eps4_4th) << '\n';
    io::write_text(out / "moment_table.csv", s.str());
  }
  if (doc.is_null()) throw ConfigError("diag config needs \"ensemble\" and \"z\", or \"sweep\"");
  io::write_json(out / "diag.json", doc);
}

ExperimentPlan plan_from(const Common& c) {
  ExperimentPlan plan = load(c).get<ExperimentPlan>();
  if (c.seed) plan.base_seed = *c.seed;
  plan.output_path = c.out;
  return plan;
}

void cmd_rate(const Common& c) {
  const RateSweepResult r = run_rate_sweep(plan_from(c));
  std::printf("slope(delta_p) = %.4f  r2 = %.4f\nslope(delta_p*) = %.4f  r2 = %.4f\n",
              r.fit_delta_p.slope, r.fit_delta_p.r_squared, r.fit_delta_p_star.slope,
              r.fit_delta_p_star.r_squared);
}

void cmd_sparse(const Common& c) {
  const SparseSweepResult r = run_sparse_sweep(plan_from(c));
  std::printf("slope over np_n (vs F_y) = %.4f  r2 = %.4f\n", r.fit_vs_law.slope,
              r.fit_vs_law.r_squared);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Marchenko-Pastur convergence experiments"};
  app.require_subcommand(1);
  Common common;
  std::uint64_t seed = 0;
  using Handler = void (*)(const Common&);
  const std::vector<std::pair<std::string, Handler>> commands = {
      {"sample", cmd_sample}, {"law", cmd_law},   {"distance", cmd_distance},
      {"diag", cmd_diag},     {"rate", cmd_rate}, {"sparse", cmd_sparse}};
  std::vector<std::pair<CLI::App*, Handler>> subs;
  std::vector<CLI::Option*> seed_opts;
  for (const auto& [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", common.config, "JSON configuration file")->required();
    sub->add_option("--out", common.out, "output directory");
    sub->add_option("--threads", common.threads, "worker threads (0: runtime default)");
    seed_opts.push_back(sub->add_option("--seed", seed, "override base_seed"));
    subs.emplace_back(sub, fn);
  }
  CLI11_PARSE(app, argc, argv);
  for (auto* o : seed_opts)
    if (o->count() > 0) common.seed = seed;

  try {
    if (common.threads > 0) set_thread_count(common.threads);
    for (const auto& [sub, fn] : subs)
      if (sub->parsed()) fn(common);
  } catch (const PlanError& e) {
    std::cerr << "plan error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const IdentityViolation& e) {
    std::cerr << "identity violation: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
