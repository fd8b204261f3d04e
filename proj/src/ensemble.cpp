#include "mpconv/ensemble.hpp"

#include <cmath>
#include <random>

#include "mpconv/errors.hpp"

namespace mpconv {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kEntryStream = 0;
constexpr std::uint64_t kMaskStream = 1;

}  // namespace

double EntryDist::fourth_moment() const {
  switch (kind) {
    case Kind::rademacher:
      return 1.0;
    case Kind::gaussian:
      return 3.0;
    case Kind::uniform_scaled:
      return 9.0 / 5.0;
    case Kind::two_point:
      return (1.0 - q) * (1.0 - q) / q + q * q / (1.0 - q);
  }
  return 0.0;
}

std::string EntryDist::name() const {
  switch (kind) {
    case Kind::rademacher:
      return "rademacher";
    case Kind::gaussian:
      return "gaussian";
    case Kind::uniform_scaled:
      return "uniform_scaled";
    case Kind::two_point:
      return "two_point";
  }
  return "unknown";
}

void EntryDist::validate() const {
  if (kind == Kind::two_point && !(q > 0.0 && q < 1.0))
    throw ConfigError("two_point: q must lie in (0,1) for a mean-0 variance-1 law, got " +
                      std::to_string(q));
}

double EnsembleConfig::entry_scale() const {
  return 1.0 / std::sqrt(static_cast<double>(n) * sparsity_or_one());
}

void EnsembleConfig::validate() const {
  if (n == 0 || p == 0) throw ConfigError("n and p must be positive");
  if (p > n) throw ConfigError("sampling requires p <= n (y <= 1)");
  if (sparsity && !(*sparsity > 0.0 && *sparsity <= 1.0))
    throw ConfigError("sparsity must lie in (0,1]");
  entry_dist.validate();
}

std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t replicate, std::uint64_t stream) {
  return splitmix64(splitmix64(splitmix64(base_seed) ^ replicate) ^ (stream + 0x5bd1e995ULL));
}

SampleMatrix sample_matrix(const EnsembleConfig& config, std::uint64_t replicate_index) {
  config.validate();
  SampleMatrix out{RealMatrix(config.p, config.n), config, replicate_index};
  std::mt19937_64 engine(stream_seed(config.base_seed, replicate_index, kEntryStream));
  auto data = out.entries.data();

  const EntryDist& d = config.entry_dist;
  switch (d.kind) {
    case EntryDist::Kind::rademacher:
      for (auto& v : data) v = (engine() >> 63) ? 1.0 : -1.0;
      break;
    case EntryDist::Kind::gaussian: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (auto& v : data) v = normal(engine);
      break;
    }
    case EntryDist::Kind::uniform_scaled: {
      const double h = std::sqrt(3.0);
      std::uniform_real_distribution<double> uni(-h, h);
      for (auto& v : data) v = uni(engine);
      break;
    }
    case EntryDist::Kind::two_point: {
      const double hi = std::sqrt((1.0 - d.q) / d.q);
      const double lo = -std::sqrt(d.q / (1.0 - d.q));
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      for (auto& v : data) v = uni(engine) < d.q ? hi : lo;
      break;
    }
  }

  if (config.sparsity && *config.sparsity < 1.0) {
    std::mt19937_64 mask_engine(stream_seed(config.base_seed, replicate_index, kMaskStream));
    std::bernoulli_distribution keep(*config.sparsity);
    for (auto& v : data)
      if (!keep(mask_engine)) v = 0.0;
  }
  return out;
}

CovarianceMatrix covariance_matrix(const SampleMatrix& x, Execution exec) {
  const double scale = 1.0 / (static_cast<double>(x.config.n) * x.config.sparsity_or_one());
  return {kernels::gram(x.entries, scale, exec), x.config.y()};
}

HermitizationMatrix hermitization(const SampleMatrix& x) {
  const std::size_t n = x.config.n, p = x.config.p;
  const double s = x.config.entry_scale();
  HermitizationMatrix h{RealMatrix(n + p, n + p), n, p};
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double v = s * x.entries(i, j);
      h.values(j, n + i) = v;
      h.values(n + i, j) = v;
    }
  return h;
}

void to_json(nlohmann::json& j, const EntryDist& d) {
  if (d.kind == EntryDist::Kind::two_point)
    j = {{"two_point", {{"q", d.q}}}};
  else
    j = d.name();
}

void from_json(const nlohmann::json& j, EntryDist& d) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "rademacher")
      d = EntryDist::rademacher();
    else if (s == "gaussian")
      d = EntryDist::gaussian();
    else if (s == "uniform_scaled")
      d = EntryDist::uniform_scaled();
    else
      throw ConfigError("unknown entry_dist '" + s + "'");
    return;
  }
  if (j.is_object() && j.contains("two_point")) {
    d = EntryDist::two_point(j.at("two_point").at("q").get<double>());
    d.validate();
    return;
  }
  throw ConfigError("entry_dist must be a string or {\"two_point\": {\"q\": ...}}");
}

void to_json(nlohmann::json& j, const EnsembleConfig& c) {
  j = {{"n", c.n}, {"p", c.p}, {"entry_dist", c.entry_dist}, {"base_seed", c.base_seed}};
  j["sparsity"] = c.sparsity ? nlohmann::json(*c.sparsity) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, EnsembleConfig& c) {
  try {
    c.n = j.at("n").get<std::size_t>();
    c.p = j.at("p").get<std::size_t>();
    c.entry_dist = j.value("entry_dist", nlohmann::json("rademacher")).get<EntryDist>();
    c.base_seed = j.value("base_seed", std::uint64_t{0});
    if (j.contains("sparsity") && !j.at("sparsity").is_null())
      c.sparsity = j.at("sparsity").get<double>();
    else
      c.sparsity.reset();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("ensemble config: ") + e.what());
  }
  c.validate();
}

}  // namespace mpconv
