#include "mil/data/synth.hpp"

#include <cmath>
#include <algorithm>
#include <fstream>

#include "mil/data/errors.hpp"
#include "mil/data/manifest.hpp"
#include "mil/errors.hpp"
#include "mil/numerics/rng.hpp"

namespace mil {
namespace {

using nlohmann::json;

Tensor random_direction(std::size_t d, Rng& rng) {
  Tensor v({1, d});
  for (auto& x : v.values()) x = rng.normal();
  return v;
}

double norm2(const Tensor& v) {
  double s = 0.0;
  for (double x : v.values()) s += x * x;
  return std::sqrt(s);
}

void remove_component(Tensor& v, const Tensor& unit) {
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) d += v[i] * unit[i];
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * unit[i];
}

void normalize(Tensor& v) {
  const double n = norm2(v);
  for (auto& x : v.values()) x /= n;
}

std::array<double, kTissueClassCount> bag_mixture(const SynthSpec& spec, Rng& rng) {
  std::array<double, kTissueClassCount> p = spec.tissue_mixture;
  double sum = p[0] + p[1] + p[2];
  for (auto& x : p) x /= sum;
  if (spec.mixture_concentration <= 0.0) return p;
  sum = 0.0;
  for (auto& x : p) {
    x = x > 0.0 ? rng.gamma(spec.mixture_concentration * x) : 0.0;
    sum += x;
  }
  for (auto& x : p) x /= sum;
  return p;
}

TissueLabel draw_tissue(const std::array<double, kTissueClassCount>& p, Rng& rng) {
  const double u = rng.uniform();
  if (u < p[0]) return TissueLabel::CA;
  if (u < p[0] + p[1]) return TissueLabel::CS;
  return TissueLabel::BG;
}

std::string bag_name(std::size_t i, std::size_t n) {
  const std::size_t width = std::max<std::size_t>(4, std::to_string(n > 0 ? n - 1 : 0).size());
  std::string digits = std::to_string(i);
  return "bag_" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

}  // namespace

void SynthSpec::validate() const {
  auto fail = [](const std::string& m) { throw ParameterError("synth spec: " + m); };
  if (n_bags < 2) fail("n_bags must be at least 2");
  if (min_patches < 1 || max_patches < min_patches) fail("need 1 <= min_patches <= max_patches");
  if (d_kv < 2) fail("d_kv must be at least 2");
  if (!(positive_rate > 0.0 && positive_rate < 1.0)) fail("positive_rate must be in (0, 1)");
  if (!std::isfinite(signal_strength) || signal_strength < 0.0) fail("signal_strength must be >= 0");
  if (!(signal_fraction >= 0.0 && signal_fraction <= 1.0)) fail("signal_fraction must be in [0, 1]");
  double sum = 0.0;
  for (double r : tissue_mixture) {
    if (!std::isfinite(r) || r < 0.0) fail("tissue_mixture entries must be >= 0");
    sum += r;
  }
  if (sum <= 0.0) fail("tissue_mixture must not be all zero");
  if (!std::isfinite(mixture_concentration) || mixture_concentration < 0.0) fail("mixture_concentration must be >= 0");
  if (!std::isfinite(tissue_separation) || tissue_separation < 0.0) fail("tissue_separation must be >= 0");
  if (!std::isfinite(noise_std) || noise_std <= 0.0) fail("noise_std must be > 0");
  if (task.empty()) fail("task must be non-empty");
  const std::size_t pos = positive_count();
  if (pos == 0 || pos == n_bags) fail("positive_rate leaves one class empty");
}

std::size_t SynthSpec::positive_count() const {
  return static_cast<std::size_t>(std::llround(positive_rate * static_cast<double>(n_bags)));
}

void to_json(json& j, const SynthSpec& s) {
  j = json{{"n_bags", s.n_bags},
           {"min_patches", s.min_patches},
           {"max_patches", s.max_patches},
           {"d_kv", s.d_kv},
           {"positive_rate", s.positive_rate},
           {"signal_strength", s.signal_strength},
           {"signal_fraction", s.signal_fraction},
           {"tissue_mixture", s.tissue_mixture},
           {"mixture_concentration", s.mixture_concentration},
           {"tissue_separation", s.tissue_separation},
           {"noise_std", s.noise_std},
           {"task", s.task}};
}

void from_json(const json& j, SynthSpec& s) {
  SynthSpec d;
  for (const auto& [key, _] : j.items()) {
    static const char* known[] = {"n_bags",         "min_patches",           "max_patches",      "d_kv",
                                  "positive_rate",  "signal_strength",       "signal_fraction",  "tissue_mixture",
                                  "tissue_separation", "mixture_concentration", "noise_std",     "task",
                                  "seed"};
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ParameterError("synth spec: unknown field '" + key + "'");
  }
  s.n_bags = j.value("n_bags", d.n_bags);
  s.min_patches = j.value("min_patches", d.min_patches);
  s.max_patches = j.value("max_patches", d.max_patches);
  s.d_kv = j.value("d_kv", d.d_kv);
  s.positive_rate = j.value("positive_rate", d.positive_rate);
  s.signal_strength = j.value("signal_strength", d.signal_strength);
  s.signal_fraction = j.value("signal_fraction", d.signal_fraction);
  s.tissue_mixture = j.value("tissue_mixture", d.tissue_mixture);
  s.mixture_concentration = j.value("mixture_concentration", d.mixture_concentration);
  s.tissue_separation = j.value("tissue_separation", d.tissue_separation);
  s.noise_std = j.value("noise_std", d.noise_std);
  s.task = j.value("task", d.task);
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError("cannot open synth spec " + path.string());
  SynthSpec spec;
  try {
    spec = json::parse(in).get<SynthSpec>();
  } catch (const json::exception& e) {
    throw ParameterError("synth spec " + path.string() + ": " + e.what());
  }
  spec.validate();
  return spec;
}

SynthGeometry synth_geometry(const SynthSpec& spec, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "synth/geometry"));
  SynthGeometry g;
  for (std::size_t t = 0; t < kTissueClassCount; ++t) {
    Tensor m = random_direction(spec.d_kv, rng);
    normalize(m);
    for (auto& x : m.values()) x *= spec.tissue_separation;
    g.tissue_means.push_back(std::move(m));
  }
  g.signal_ca = random_direction(spec.d_kv, rng);
  g.signal_cs = random_direction(spec.d_kv, rng);
  // Keep the planted directions clear of the tissue means when there is room,
  // so the signal is not confounded with tissue composition.
  std::vector<Tensor> basis;
  if (spec.d_kv >= kTissueClassCount + 2 && spec.tissue_separation > 0.0) {
    for (const auto& m : g.tissue_means) {
      Tensor b = m;
      for (const auto& prev : basis) remove_component(b, prev);
      normalize(b);
      basis.push_back(std::move(b));
    }
  }
  for (const auto& b : basis) remove_component(g.signal_ca, b);
  normalize(g.signal_ca);
  for (const auto& b : basis) remove_component(g.signal_cs, b);
  remove_component(g.signal_cs, g.signal_ca);
  normalize(g.signal_cs);
  return g;
}

std::vector<Bag> synth_bags(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  const SynthGeometry geo = synth_geometry(spec, seed);
  const std::size_t d = spec.d_kv;

  std::vector<int> labels(spec.n_bags, 0);
  for (std::size_t i = 0; i < spec.positive_count(); ++i) labels[i] = 1;
  Rng label_rng(derive_seed(seed, "synth/labels"));
  label_rng.shuffle(labels);

  std::vector<Bag> bags;
  bags.reserve(spec.n_bags);
  for (std::size_t b = 0; b < spec.n_bags; ++b) {
    const std::string id = bag_name(b, spec.n_bags);
    Rng rng(derive_seed(seed, "synth/" + id));
    const std::size_t np = rng.uniform_int(spec.min_patches, spec.max_patches);
    const auto mix = bag_mixture(spec, rng);

    Bag bag;
    bag.bag_id = id;
    bag.label = labels[b];
    bag.task = spec.task;
    bag.tissue.resize(np);
    bag.embeddings = Tensor({np, d});
    for (std::size_t p = 0; p < np; ++p) {
      const TissueLabel t = draw_tissue(mix, rng);
      bag.tissue[p] = t;
      const Tensor& mean = geo.tissue_means[static_cast<std::size_t>(t)];
      double shift = 0.0;
      const Tensor* dir = nullptr;
      if (bag.label == 1 && t == TissueLabel::CA) {
        if (rng.uniform() < spec.signal_fraction) {
          shift = spec.signal_strength * spec.noise_std;
          dir = &geo.signal_ca;
        }
      } else if (bag.label == 1 && t == TissueLabel::CS) {
        shift = 0.5 * spec.signal_strength * spec.noise_std;
        dir = &geo.signal_cs;
      }
      auto row = bag.embeddings.row(p);
      for (std::size_t k = 0; k < d; ++k) {
        double v = mean[k] + spec.noise_std * rng.normal();
        if (dir) v += shift * (*dir)[k];
        row[k] = static_cast<double>(static_cast<float>(v));
      }
    }
    bags.push_back(std::move(bag));
  }
  return bags;
}

std::filesystem::path synth_generate(const SynthSpec& spec, std::uint64_t seed, const std::filesystem::path& dir) {
  const auto bags = synth_bags(spec, seed);
  const auto manifest = write_dataset(dir, bags);
  json meta = spec;
  meta["seed"] = seed;
  std::ofstream out(dir / "synth_spec.json", std::ios::trunc);
  out << meta.dump(2) << '\n';
  if (!out) throw DataError("cannot write " + (dir / "synth_spec.json").string());
  return manifest;
}

}  // namespace mil
