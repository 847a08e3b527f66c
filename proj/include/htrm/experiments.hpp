#pragma once

// Figure-level experiments and probes. Each one collects spectra (from the
// eigenvalue cache when possible), reduces them single-threaded in trial
// order and returns CSV tables plus a JSON summary, so outputs depend only
// on the configuration and never on the worker count.
//
// Trial t of a sample family draws from make_stream(master_seed, family, t).
// The family tag names the ensemble rather than the experiment, so figures
// built on the same configurations share draws and cache files.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "averaged_semicircle.hpp"
#include "config.hpp"
#include "densities.hpp"
#include "eigen_cache.hpp"
#include "ensembles.hpp"
#include "errors.hpp"
#include "freeprob.hpp"
#include "output.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "spectral_stats.hpp"

namespace htrm {

// ---- spectra --------------------------------------------------------------

inline std::string family_tag(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::inverse_ginibre_sum: return "inverse-ginibre-sum";
    case EnsembleKind::inverse_ginibre_direct_sum: return "inverse-ginibre-direct-sum";
    case EnsembleKind::gue: return "gue";
    case EnsembleKind::stable_gue: return "stable-gue";
  }
  return "?";
}

struct SpectrumSource {
  std::uint64_t master_seed = 20211;
  int workers = 0;
  std::string cache_dir;  // empty: no cache
};

inline SpectrumSource source_of(const RunConfig& cfg) {
  return {cfg.master_seed, cfg.workers, cfg.cache ? cfg.resolved_cache_dir() : std::string()};
}

struct SpectrumSet {
  EnsembleSpec spec;
  std::string tag;
  std::vector<std::vector<double>> spectra;  // one ascending spectrum per trial
};

/// Spectra of `trials` draws. A suffix on the family tag gives an independent copy.
inline SpectrumSet collect_spectra(const EnsembleSpec& spec, std::uint64_t trials, const SpectrumSource& src,
                                   const std::string& tag_suffix = "") {
  spec.validate();
  SpectrumSet out{spec, family_tag(spec.kind) + tag_suffix, {}};
  const EigenCacheHeader header{spec, src.master_seed, out.tag, trials};
  std::filesystem::path file;
  if (!src.cache_dir.empty()) {
    file = std::filesystem::path(src.cache_dir) / eigen_cache_name(header);
    if (std::filesystem::exists(file)) {
      try {
        out.spectra = read_eigen_cache(file, header);
        return out;
      } catch (const CacheMismatch& e) {
        std::cerr << "warning: " << e.what() << "; regenerating\n";
      }
    }
  }
  out.spectra.resize(trials);
  std::vector<std::uint64_t> resamples(trials, 0);
  parallel_for(trials, src.workers, [&](std::size_t t) {
    Stream rng = make_stream(src.master_seed, out.tag, t);
    out.spectra[t] = eigenvalues(sample(spec, rng, &resamples[t]));
  });
  if (const auto r = std::accumulate(resamples.begin(), resamples.end(), std::uint64_t{0}); r > 0) {
    std::cerr << "note: " << r << " near-singular Ginibre draws were resampled\n";
  }
  if (!file.empty()) write_eigen_cache(file, header, out.spectra);
  return out;
}

/// Eigenvalues of (H1 + H2) / 2^(1/alpha) for two independent stable GUE draws.
inline std::vector<std::vector<double>> collect_stable_pair_sums(int n, double alpha, std::uint64_t trials,
                                                                 const SpectrumSource& src) {
  std::vector<std::vector<double>> out(trials);
  const double scale = std::pow(2.0, -1.0 / alpha);
  parallel_for(trials, src.workers, [&](std::size_t t) {
    Stream rng = make_stream(src.master_seed, "stable-gue-pair", t);
    ComplexMatrix h = sample_stable_gue(n, alpha, rng);
    h.entries += sample_stable_gue(n, alpha, rng).entries;
    h.entries *= scale;
    out[t] = eigenvalues(h);
  });
  return out;
}

/// Draws from the GUE Wigner surmise: a Maxwell variable with variance parameter pi/8.
inline std::vector<double> wigner_surmise_sample(std::size_t count, std::uint64_t master_seed,
                                                 const std::string& tag) {
  Stream rng = make_stream(master_seed, tag, 0);
  std::normal_distribution<double> g(0.0, 1.0);
  const double sd = std::sqrt(std::numbers::pi / 8.0);
  std::vector<double> out(count);
  for (double& s : out) {
    const double a = g(rng);
    const double b = g(rng);
    const double c = g(rng);
    s = sd * std::sqrt(a * a + b * b + c * c);
  }
  return out;
}

inline std::vector<double> pooled(const std::vector<std::vector<double>>& spectra) {
  std::vector<double> out;
  for (const auto& s : spectra) out.insert(out.end(), s.begin(), s.end());
  return out;
}

// ---- tail variables ---------------------------------------------------------

/// Factor bringing eigenvalues onto the scale of the rescaled sum Y_L; the
/// direct-sum blocks are drawn without the L^-(M+1) factor.
inline double sum_scale(const EnsembleSpec& s) {
  return s.kind == EnsembleKind::inverse_ginibre_direct_sum ? std::pow(static_cast<double>(s.l), -(s.m + 1.0)) : 1.0;
}

/// tail_variable of the `count` largest eigenvalues, ascending (largest eigenvalue first).
inline std::vector<double> top_tail_variables(const std::vector<double>& spectrum, const EnsembleSpec& spec,
                                              int count) {
  const double k = sum_scale(spec);
  const auto n = static_cast<int>(spectrum.size());
  std::vector<double> z;
  for (int i = 0; i < std::min(count, n); ++i) z.push_back(tail_variable(k * spectrum[n - 1 - i], spec.n, spec.m));
  return z;
}

/// Expected number of tail levels of Y_L with z below x (all M = 1 closed form; larger M by quadrature).
inline double tail_count_below(double x, int l, int m) {
  const double ll = static_cast<double>(l);
  if (m == 1) return ll * bessel_hard_edge_count(x / ll);
  auto f = [&](double t) { return meijer_kernel_density(t, m); };
  return ll * boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, 0.0, x / ll, 5, 1e-6);
}

/// Inverted-variable cut w_c above which the expected number of levels is `expected`.
inline double tail_window_cut(double expected, int l, int m) {
  // count below z = 1/w grows with z; solve count(1/w) = expected for w
  auto f = [&](double z) { return tail_count_below(z, l, m) - expected; };
  double hi = 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  std::uintmax_t iters = 100;
  const auto r = boost::math::tools::bisect(f, 0.0, hi, boost::math::tools::eps_tolerance<double>(30), iters);
  return 1.0 / (0.5 * (r.first + r.second));
}

/// Soft-edge cut s_c above which the Airy process has `expected` points on average.
inline double soft_edge_window_cut(double expected) {
  auto above = [](double s) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(airy_edge_density, s, 12.0, 10, 1e-10);
  };
  auto f = [&](double s) { return above(s) - expected; };
  std::uintmax_t iters = 100;
  const auto r = boost::math::tools::bisect(f, -30.0, 6.0, boost::math::tools::eps_tolerance<double>(30), iters);
  return 0.5 * (r.first + r.second);
}

// ---- shared pieces ------------------------------------------------------------

inline Json config_echo(const RunConfig& c) {
  // execution parameters (workers, paths, cache switch) are left out so that
  // outputs are comparable across machines and worker counts
  Json j;
  j["kind"] = to_string(c.ensemble.kind);
  j["n"] = c.ensemble.n;
  j["m"] = c.ensemble.m;
  j["l"] = c.ensemble.l;
  j["alpha"] = c.ensemble.alpha;
  j["sigma"] = c.ensemble.sigma;
  j["trials"] = c.trials;
  j["seed"] = c.master_seed;
  j["bin_macro"] = c.bin_macro;
  j["bin_micro"] = c.bin_micro;
  j["bin_spacing"] = c.bin_spacing;
  j["bin_unfolded"] = c.bin_unfolded;
  j["l_list"] = c.l_list;
  j["m_list"] = c.m_list;
  j["n_list"] = c.n_list;
  j["k_list"] = c.k_list;
  j["alpha_list"] = c.alpha_list;
  return j;
}

inline Json new_summary(const std::string& experiment, const RunConfig& cfg) {
  Json j;
  j["experiment"] = experiment;
  j["config"] = config_echo(cfg);
  j["comparisons"] = Json::array();
  return j;
}

inline void add_histogram_rows(CsvTable& t, const std::string& series, const DensityEstimate& h, Normalization norm,
                               const std::function<double(double)>& ref) {
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double a = h.left(i);
    t.add({series, to_string(h.tag), to_string(norm), fmt(a), fmt(h.width), std::to_string(h.counts[i]),
           fmt(h.height(i)), ref ? fmt(bin_average(ref, a, a + h.width)) : std::string("")});
  }
}

inline void add_spacing_rows(CsvTable& t, const std::string& series, int k, const std::vector<double>& values,
                             double width, double hi = 4.0) {
  DensityEstimate h(VariableTag::unfolded, 0.0, hi, width);
  for (double v : values) h.add(v);
  h.total_weight = static_cast<double>(values.size());
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double a = h.left(i);
    t.add({series, std::to_string(k), fmt(a), fmt(width), fmt(values.empty() ? 0.0 : h.height(i)),
           fmt(bin_average(poisson_spacing, a, a + width)), fmt(bin_average(wigner_surmise, a, a + width))});
  }
}

inline EnsembleSpec sum_spec(const RunConfig& cfg, int l, int m) {
  EnsembleSpec s = cfg.ensemble;
  s.kind = EnsembleKind::inverse_ginibre_sum;
  s.l = l;
  s.m = m;
  return s;
}

// ---- figures ------------------------------------------------------------------

/// Macroscopic density of N^M Y_L against the inverse Fuss-Catalan law (inverse Marchenko-Pastur for M = 1).
inline ExperimentResult run_macro(const RunConfig& cfg) {
  const int m = cfg.ensemble.m;
  ExperimentResult r{new_summary("macro", cfg), {density_table("macro-density")}};
  const SpectrumSource src = source_of(cfg);
  const auto ref = [m](double x) { return inverse_fuss_catalan_density(x, m); };
  AnalyticDensity law{"inverse_fuss_catalan", ref, 1.0 / fuss_catalan_edge(m),
                      std::numeric_limits<double>::infinity(), Normalization::probability,
                      m == 1 ? std::function<double(double)>(inv_mp_cdf) : nullptr};
  for (int l : cfg.l_list) {
    const auto set = collect_spectra(sum_spec(cfg, l, m), cfg.trials, src);
    DensityEstimate h(VariableTag::macroscopic, cfg.macro_lo, cfg.macro_hi, cfg.bin_macro);
    std::vector<double> values;
    for (const auto& s : set.spectra) {
      for (double v : s) {
        values.push_back(macroscopic_scale(set.spec) * v);
        h.add(values.back());
      }
    }
    h.total_weight = static_cast<double>(values.size());
    const auto cmp = compare_bins(h, ref, cfg.min_expected_macro);
    const std::string series = "L=" + std::to_string(l);
    add_histogram_rows(r.tables[0], series, h, Normalization::probability, ref);
    r.summary["comparisons"].push_back({{"series", series},
                                        {"L", l},
                                        {"ks", ks_against_density(values, law, cfg.macro_lo, cfg.macro_hi)},
                                        {"max_bin_dev", cmp.max_rel_dev},
                                        {"bins_used", cmp.bins_used},
                                        {"worst_bin_left", h.left(cmp.worst_bin)},
                                        {"n_eff", values.size()}});
  }
  return r;
}

/// Smallest eigenvalues in the soft-edge variable against the Airy density.
inline ExperimentResult run_softedge(const RunConfig& cfg) {
  if (cfg.ensemble.m != 1) throw InvalidConfig("softedge: the Airy edge at 1/(4N) needs M = 1");
  ExperimentResult r{new_summary("softedge", cfg), {density_table("softedge-density")}};
  const SpectrumSource src = source_of(cfg);
  const double cut = soft_edge_window_cut(0.5 * cfg.edge_count);
  const double top = 6.0;
  AnalyticDensity airy{"airy", airy_edge_density, -std::numeric_limits<double>::infinity(), top,
                       Normalization::per_eigenvalue, nullptr};
  r.summary["window"] = {{"lo", cut}, {"hi", top}, {"expected_levels_above_lo", 0.5 * cfg.edge_count}};
  for (int l : cfg.l_list) {
    const auto set = collect_spectra(sum_spec(cfg, l, 1), cfg.trials, src);
    DensityEstimate h(VariableTag::soft_edge, -8.0, 4.0, cfg.bin_micro);
    std::vector<double> values;
    for (const auto& s : set.spectra) {
      for (int i = 0; i < std::min<int>(cfg.edge_count, static_cast<int>(s.size())); ++i) {
        values.push_back(soft_edge_variable(s[i], set.spec.n));
        h.add(values.back());
      }
    }
    h.total_weight = static_cast<double>(set.spectra.size());
    const std::string series = "L=" + std::to_string(l);
    add_histogram_rows(r.tables[0], series, h, Normalization::per_eigenvalue, airy_edge_density);
    r.summary["comparisons"].push_back({{"series", series},
                                        {"L", l},
                                        {"ks", ks_against_density(values, airy, cut, top)},
                                        {"n_eff", std::count_if(values.begin(), values.end(),
                                                                [&](double v) { return v >= cut && v <= top; })}});
  }
  return r;
}

/// Largest eigenvalues in the inverted tail variable against L^2 rho_inv(L w).
inline ExperimentResult run_tail(const RunConfig& cfg) {
  const int m = cfg.ensemble.m;
  ExperimentResult r{new_summary("tail", cfg), {density_table("tail-density")}};
  const SpectrumSource src = source_of(cfg);
  for (int l : cfg.l_list) {
    const auto set = collect_spectra(sum_spec(cfg, l, m), cfg.trials, src);
    const auto ref = [l, m](double w) { return tail_density_L(w, l, m); };
    const double cut = tail_window_cut(0.5 * cfg.tail_count, l, m);
    DensityEstimate h(VariableTag::inverted_tail, 0.0, 10.0, cfg.bin_micro);
    std::vector<double> values;
    for (const auto& s : set.spectra) {
      for (double z : top_tail_variables(s, set.spec, cfg.tail_count)) {
        values.push_back(1.0 / z);
        h.add(values.back());
      }
    }
    h.total_weight = static_cast<double>(set.spectra.size());
    // only bins fully above the cut carry complete counts
    const auto cmp = compare_bins(h, ref, cfg.min_expected_tail, cut);
    AnalyticDensity law{"tail_L", ref, 0.0, std::numeric_limits<double>::infinity(), Normalization::per_eigenvalue,
                        nullptr};
    const std::string series = "L=" + std::to_string(l);
    add_histogram_rows(r.tables[0], series, h, Normalization::per_eigenvalue, ref);
    r.summary["comparisons"].push_back({{"series", series},
                                        {"L", l},
                                        {"window_lo", cut},
                                        {"ks", ks_against_density(values, law, cut, 50.0)},
                                        {"max_bin_dev", cmp.max_rel_dev},
                                        {"bins_used", cmp.bins_used},
                                        {"worst_bin_left", h.left(cmp.worst_bin)},
                                        {"n_eff", std::count_if(values.begin(), values.end(),
                                                                [&](double v) { return v >= cut; })}});
  }
  return r;
}

/// Individual largest eigenvalues and their rank-run clusters, sum against direct sum.
inline ExperimentResult run_tail_individual(const RunConfig& cfg) {
  const int m = cfg.ensemble.m;
  const int ranks = cfg.spacing_count + 1;
  ExperimentResult r{new_summary("tail-individual", cfg), {density_table("tail-individual-density")}};
  const SpectrumSource src = source_of(cfg);
  for (int l : cfg.l_list) {
    const auto sum = collect_spectra(sum_spec(cfg, l, m), cfg.trials, src);
    EnsembleSpec dspec = sum.spec;
    dspec.kind = EnsembleKind::inverse_ginibre_direct_sum;
    const auto direct = collect_spectra(dspec, cfg.trials, src);
    const auto ref = [l, m](double w) { return tail_density_L(w, l, m); };
    // inverted variable per rank (rank 0 is the largest eigenvalue)
    auto by_rank = [&](const SpectrumSet& set) {
      std::vector<std::vector<double>> out(ranks);
      for (const auto& s : set.spectra) {
        const auto z = top_tail_variables(s, set.spec, ranks);
        for (int k = 0; k < ranks; ++k) out[k].push_back(1.0 / z[k]);
      }
      return out;
    };
    const auto sum_ranks = by_rank(sum);
    const auto direct_ranks = by_rank(direct);
    for (int k = 0; k < ranks; ++k) {
      DensityEstimate h(VariableTag::inverted_tail, 0.0, 10.0, 0.1);
      for (double v : sum_ranks[k]) h.add(v);
      h.total_weight = static_cast<double>(sum.spectra.size());
      add_histogram_rows(r.tables[0], "L=" + std::to_string(l) + " rank=" + std::to_string(k + 1), h,
                         Normalization::per_eigenvalue, ref);
    }
    // clusters of L consecutive ranks
    for (int c = 0; c * l < ranks; ++c) {
      std::vector<double> a;
      std::vector<double> b;
      for (int k = c * l; k < std::min(ranks, (c + 1) * l); ++k) {
        a.insert(a.end(), sum_ranks[k].begin(), sum_ranks[k].end());
        b.insert(b.end(), direct_ranks[k].begin(), direct_ranks[k].end());
      }
      DensityEstimate h(VariableTag::inverted_tail, 0.0, 10.0, cfg.bin_micro);
      for (double v : a) h.add(v);
      h.total_weight = static_cast<double>(sum.spectra.size());
      const std::string series = "L=" + std::to_string(l) + " cluster=" + std::to_string(c + 1);
      add_histogram_rows(r.tables[0], series, h, Normalization::per_eigenvalue, ref);
      r.summary["comparisons"].push_back(
          {{"series", series}, {"L", l}, {"cluster", c + 1}, {"ks_sum_vs_direct", ks_two_sample(a, b)}, {"n_eff", a.size()}});
    }
  }
  return r;
}

/// Per-k spacing series between the largest eigenvalues in the tail variable (k = 1 is the top gap).
inline std::vector<SpacingSeries> tail_spacings(const SpectrumSet& set, int count) {
  std::vector<std::vector<double>> z;
  z.reserve(set.spectra.size());
  for (const auto& s : set.spectra) z.push_back(top_tail_variables(s, set.spec, count + 1));
  std::vector<SpacingSeries> out;
  for (int k = 1; k <= count; ++k) out.push_back(spacing_distribution(z, k));
  return out;
}

/// Spacings of the largest eigenvalues: sum against direct sum against the Wigner surmise.
inline ExperimentResult run_spacing_sum_vs_direct(const RunConfig& cfg) {
  const int m = cfg.ensemble.m;
  ExperimentResult r{new_summary("spacing-sum-vs-direct", cfg), {spacing_table("spacing-sum-vs-direct")}};
  const SpectrumSource src = source_of(cfg);
  for (int l : cfg.l_list) {
    const auto sum = collect_spectra(sum_spec(cfg, l, m), cfg.trials, src);
    EnsembleSpec dspec = sum.spec;
    dspec.kind = EnsembleKind::inverse_ginibre_direct_sum;
    const auto direct = collect_spectra(dspec, cfg.trials, src);
    const auto a = tail_spacings(sum, cfg.spacing_count);
    const auto b = tail_spacings(direct, cfg.spacing_count);
    for (int k = 1; k <= cfg.spacing_count; ++k) {
      const auto& sa = a[k - 1].values;
      const auto& sb = b[k - 1].values;
      const bool within = k % l != 0;
      Json c = {{"series", "L=" + std::to_string(l) + " k=" + std::to_string(k)},
                {"L", l},
                {"k", k},
                {"within_cluster", within},
                {"ks", ks_two_sample(sa, sb)},
                {"ks_sum_vs_poisson", ks_against_cdf(sa, poisson_spacing_cdf)},
                {"n_eff", sa.size()}};
      if (within) {
        auto w = wigner_surmise_sample(sa.size(), cfg.master_seed,
                                       "wigner-surmise/L=" + std::to_string(l) + "/k=" + std::to_string(k));
        SpacingSeries ws{k, std::move(w), 0.0};
        normalize_by_mean(ws);
        c["ks_sum_vs_wigner"] = ks_two_sample(sa, ws.values);
      }
      r.summary["comparisons"].push_back(c);
      add_spacing_rows(r.tables[0], "sum L=" + std::to_string(l), k, sa, cfg.bin_spacing);
      add_spacing_rows(r.tables[0], "direct L=" + std::to_string(l), k, sb, cfg.bin_spacing);
    }
  }
  return r;
}

/// Stable GUE macroscopic density against the averaged semicircle and the Cauchy law with the same value at 0.
inline ExperimentResult run_cauchy_compare(const RunConfig& cfg) {
  EnsembleSpec spec = cfg.ensemble;
  spec.kind = EnsembleKind::stable_gue;
  const double alpha = spec.alpha;
  const auto table = averaged_semicircle_table(alpha);
  const double c = cfg.cauchy_c > 0.0 ? cfg.cauchy_c : std::numbers::pi * table->rho(0.0);
  ExperimentResult r{new_summary("cauchy-compare", cfg), {density_table("cauchy-compare-density")}};
  const auto set = collect_spectra(spec, cfg.trials, source_of(cfg));
  DensityEstimate h(VariableTag::macroscopic, -6.0, 6.0, cfg.bin_macro);
  std::vector<double> values;
  for (const auto& s : set.spectra) {
    for (double v : s) {
      values.push_back(macroscopic_scale(spec) * v);
      h.add(values.back());
    }
  }
  h.total_weight = static_cast<double>(values.size());
  const auto rho = [&](double x) { return table->rho(x); };
  const auto cl = [c](double x) { return cauchy_density(x, c); };
  add_histogram_rows(r.tables[0], "averaged_semicircle", h, Normalization::probability, rho);
  add_histogram_rows(r.tables[0], "cauchy", h, Normalization::probability, cl);
  const auto mu_cdf = [&](double x) { return 0.5 + table->mu(x); };
  const auto cl_cdf = [c](double x) { return 0.5 + std::atan(x / c) / std::numbers::pi; };
  constexpr double inf = std::numeric_limits<double>::infinity();
  AnalyticDensity d1{"averaged_semicircle", rho, -inf, inf, Normalization::probability, mu_cdf};
  AnalyticDensity d2{"cauchy", cl, -inf, inf, Normalization::probability, cl_cdf};
  const auto b1 = compare_bins(h, rho, cfg.min_expected_macro);
  const auto b2 = compare_bins(h, cl, cfg.min_expected_macro);
  r.summary["cauchy_c"] = c;
  r.summary["rho_alpha_at_2"] = table->rho(2.0);
  r.summary["rho_cauchy_at_2"] = cl(2.0);
  r.summary["relative_difference_at_2"] = std::abs(cl(2.0) / table->rho(2.0) - 1.0);
  r.summary["comparisons"].push_back({{"series", "averaged_semicircle"},
                                      {"ks", ks_against_density(values, d1, -6.0, 6.0)},
                                      {"max_bin_dev", b1.max_rel_dev},
                                      {"n_eff", values.size()}});
  r.summary["comparisons"].push_back({{"series", "cauchy"},
                                      {"ks", ks_against_density(values, d2, -6.0, 6.0)},
                                      {"max_bin_dev", b2.max_rel_dev},
                                      {"n_eff", values.size()}});
  return r;
}

inline SpectrumSet stable_spectra(const RunConfig& cfg, int n, double alpha) {
  EnsembleSpec spec = cfg.ensemble;
  spec.kind = EnsembleKind::stable_gue;
  spec.n = n;
  spec.alpha = alpha;
  return collect_spectra(spec, cfg.trials, source_of(cfg));
}

inline std::vector<std::vector<double>> unfolded(const SpectrumSet& set) {
  std::vector<std::vector<double>> out;
  out.reserve(set.spectra.size());
  for (const auto& s : set.spectra) out.push_back(unfold(SpectrumSample{s, set.spec, 0}, set.spec.alpha));
  return out;
}

inline double ks_uniform(const std::vector<double>& mu) {
  return ks_against_cdf(mu, [](double x) { return std::clamp(x + 0.5, 0.0, 1.0); });
}

/// Unfolded stable GUE spectra against the uniform law on (-1/2, 1/2).
inline ExperimentResult run_stable_density(const RunConfig& cfg) {
  ExperimentResult r{new_summary("stable-density", cfg), {density_table("stable-density")}};
  for (double alpha : cfg.alpha_list) {
    const auto set = stable_spectra(cfg, cfg.ensemble.n, alpha);
    const auto mu = unfolded(set);
    const auto values = pooled(mu);
    DensityEstimate h(VariableTag::unfolded, -0.5, 0.5, cfg.bin_unfolded);
    for (double v : values) h.add(v);
    h.total_weight = static_cast<double>(values.size());
    const std::string series = "alpha=" + fmt(alpha);
    add_histogram_rows(r.tables[0], series, h, Normalization::probability, [](double) { return 1.0; });
    const auto [hi, lo] = mean_extreme_position(mu);
    r.summary["comparisons"].push_back({{"series", series},
                                        {"alpha", alpha},
                                        {"ks", ks_uniform(values)},
                                        {"mean_largest", hi},
                                        {"mean_smallest", lo},
                                        {"n_eff", values.size()}});
  }
  return r;
}

/// p_k and p_{N-k} of unfolded stable GUE spectra.
inline ExperimentResult run_stable_spacing(const RunConfig& cfg) {
  ExperimentResult r{new_summary("stable-spacing", cfg), {spacing_table("stable-spacing")}};
  const int n = cfg.ensemble.n;
  for (double alpha : cfg.alpha_list) {
    const auto mu = unfolded(stable_spectra(cfg, n, alpha));
    for (int k : cfg.k_list) {
      if (k >= n) continue;
      const auto low = spacing_distribution(mu, k);
      const auto high = spacing_distribution(mu, n - k);
      const std::string series = "alpha=" + fmt(alpha);
      add_spacing_rows(r.tables[0], series, k, low.values, cfg.bin_spacing);
      add_spacing_rows(r.tables[0], series, n - k, high.values, cfg.bin_spacing);
      r.summary["comparisons"].push_back({{"series", series + " k=" + std::to_string(k)},
                                          {"alpha", alpha},
                                          {"k", k},
                                          {"ks_k_vs_n_minus_k", ks_two_sample(low.values, high.values)},
                                          {"ks_vs_poisson", ks_against_cdf(low.values, poisson_spacing_cdf)},
                                          {"ks_vs_wigner", ks_against_cdf(low.values, wigner_surmise_cdf)},
                                          {"n_eff", low.values.size()}});
    }
  }
  return r;
}

// ---- probes -------------------------------------------------------------------

/// Spacing statistics near base points lambda_0 = N^gamma of Y_L^(M), unfolded by the pooled counting function.
inline ExperimentResult run_transition_scan(const RunConfig& cfg) {
  const int m = cfg.ensemble.m;
  if (m < 2) throw InvalidConfig("transition-scan needs M >= 2");
  const int n = cfg.ensemble.n;
  std::vector<double> gammas = cfg.gamma_list;
  if (gammas.empty()) {
    const double g0 = 1.0 - m - 0.5;
    for (int i = 0; i <= 10; ++i) gammas.push_back(g0 + (1.0 - g0) * i / 10.0);
  }
  ExperimentResult r{new_summary("transition-scan", cfg), {}};
  const auto set = collect_spectra(sum_spec(cfg, cfg.ensemble.l, m), cfg.trials, source_of(cfg));
  auto all = pooled(set.spectra);
  std::sort(all.begin(), all.end());
  const double trials = static_cast<double>(set.spectra.size());
  auto counting = [&](double x) {
    return static_cast<double>(std::lower_bound(all.begin(), all.end(), x) - all.begin()) / trials;
  };
  std::vector<double> ks_p;
  for (double g : gammas) {
    const double base = std::pow(static_cast<double>(n), g);
    const double u0 = counting(base);
    std::vector<double> gaps;
    for (const auto& s : set.spectra) {
      const int w = std::min<int>(cfg.scan_window, static_cast<int>(s.size()));
      int start = static_cast<int>(std::lround(u0 - 0.5 * w));
      start = std::clamp(start, 0, static_cast<int>(s.size()) - w);
      for (int i = start; i + 1 < start + w; ++i) gaps.push_back(counting(s[i + 1]) - counting(s[i]));
    }
    SpacingSeries series{1, std::move(gaps), 0.0};
    normalize_by_mean(series);
    const double kp = ks_against_cdf(series.values, poisson_spacing_cdf);
    ks_p.push_back(kp);
    r.summary["comparisons"].push_back({{"gamma", g},
                                        {"base_point", base},
                                        {"mean_rank_below_base", u0},
                                        {"ks_vs_poisson", kp},
                                        {"ks_vs_wigner", ks_against_cdf(series.values, wigner_surmise_cdf)},
                                        {"n_eff", series.values.size()}});
  }
  r.summary["critical_gamma"] = 1.0 - m;
  r.summary["ks_poisson_nonincreasing_in_gamma"] = std::is_sorted(ks_p.rbegin(), ks_p.rend());
  return r;
}

struct ClusterSpacings {
  std::vector<double> within;
  std::vector<double> between;
};

/// Spacings of the `window` largest eigenvalues of Y_L (M = 1), unfolded with the
/// counting function of L superposed hard-edge processes, normalized per k, and
/// split into within-cluster and between-cluster gaps.
inline ClusterSpacings cluster_spacings(const SpectrumSet& set, int window) {
  const int l = set.spec.l;
  std::vector<std::vector<double>> u;
  for (const auto& s : set.spectra) {
    auto z = top_tail_variables(s, set.spec, window);
    for (double& v : z) v = tail_count_below(v, l, 1);
    u.push_back(std::move(z));
  }
  ClusterSpacings out;
  for (int k = 1; k < window; ++k) {
    const auto sp = spacing_distribution(u, k);
    auto& dst = (k % l != 0) ? out.within : out.between;
    dst.insert(dst.end(), sp.values.begin(), sp.values.end());
  }
  return out;
}

/// Within-cluster spacing statistics against e^{-s} as L grows.
inline ExperimentResult run_poisson_probe(const RunConfig& cfg) {
  if (cfg.ensemble.m != 1) throw InvalidConfig("poisson-probe: tail unfolding is implemented for M = 1");
  ExperimentResult r{new_summary("poisson-probe", cfg), {spacing_table("poisson-probe")}};
  const SpectrumSource src = source_of(cfg);
  std::vector<double> ks_within;
  for (int l : cfg.l_list) {
    const auto set = collect_spectra(sum_spec(cfg, l, 1), cfg.trials, src);
    const auto cs = cluster_spacings(set, cfg.probe_window);
    Json c = {{"series", "L=" + std::to_string(l)}, {"L", l}};
    if (cs.within.empty()) {
      c["ks_within_vs_poisson"] = nullptr;
    } else {
      c["ks_within_vs_poisson"] = ks_against_cdf(cs.within, poisson_spacing_cdf);
      ks_within.push_back(c["ks_within_vs_poisson"].get<double>());
      add_spacing_rows(r.tables[0], "within L=" + std::to_string(l), 0, cs.within, cfg.bin_spacing);
    }
    c["ks_between_vs_poisson"] = cs.between.empty() ? Json(nullptr) : Json(ks_against_cdf(cs.between, poisson_spacing_cdf));
    if (!cs.between.empty()) add_spacing_rows(r.tables[0], "between L=" + std::to_string(l), 0, cs.between, cfg.bin_spacing);
    c["n_within"] = cs.within.size();
    c["n_between"] = cs.between.size();
    r.summary["comparisons"].push_back(c);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < ks_within.size(); ++i) decreasing = decreasing && ks_within[i] < ks_within[i - 1];
  r.summary["ks_within_strictly_decreasing"] = decreasing;
  return r;
}

/// Mean unfolded position of the largest and smallest eigenvalue against N.
inline ExperimentResult run_saturation_probe(const RunConfig& cfg) {
  ExperimentResult r{new_summary("saturation-probe", cfg), {}};
  for (double alpha : cfg.alpha_list) {
    Json rows = Json::array();
    double previous = NAN;
    for (int n : cfg.n_list) {
      const auto [hi, lo] = mean_extreme_position(unfolded(stable_spectra(cfg, n, alpha)));
      rows.push_back({{"n", n},
                      {"mean_largest", hi},
                      {"mean_smallest", lo},
                      {"mirror_asymmetry", hi + lo},
                      {"inside_open_interval", hi < 0.5 && lo > -0.5},
                      {"increment", std::isnan(previous) ? Json(nullptr) : Json(hi - previous)}});
      previous = hi;
    }
    r.summary["comparisons"].push_back({{"alpha", alpha}, {"by_n", rows}});
  }
  return r;
}

inline Json deviation_json(const DeviationReport& d) {
  Json pts = Json::array();
  for (const auto& p : d.points) {
    Json e = {{"y_re", p.y.real()}, {"y_im", p.y.imag()}};
    if (p.r) {
      e["r_re"] = p.r->real();
      e["r_im"] = p.r->imag();
    } else {
      e["flagged"] = true;
    }
    pts.push_back(e);
  }
  return {{"max_rel_dev", d.max_rel_dev}, {"used", d.used}, {"flagged", d.flagged}, {"points", pts}};
}

inline void warn_flagged(const std::string& what, const DeviationReport& d) {
  if (d.flagged > 0) std::cerr << "warning: " << what << ": " << d.flagged << " y-grid points failed to converge and were excluded\n";
}

inline EmpiricalGreen macroscopic_green(const SpectrumSet& set, double extra_scale = 1.0) {
  std::vector<double> v;
  const double k = macroscopic_scale(set.spec) * extra_scale;
  for (const auto& s : set.spectra) {
    for (double x : s) v.push_back(k * x);
  }
  return EmpiricalGreen(std::move(v));
}

/// Numerical R-transform of N^M Y_L against the heavy-tailed fixed point, plus additivity, scaling and S checks.
inline ExperimentResult run_freeprob_check(const RunConfig& cfg) {
  ExperimentResult r{new_summary("freeprob-check", cfg), {}};
  const SpectrumSource src = source_of(cfg);
  for (int m : cfg.m_list) {
    const auto grid = heavy_tail_y_grid(m, cfg.min_im_z, static_cast<std::size_t>(cfg.y_points));
    const auto theory = [m](cplx y) { return r_transform_heavy_tail(y, m); };
    for (int l : cfg.l_list) {
      const auto g = macroscopic_green(collect_spectra(sum_spec(cfg, l, m), cfg.trials, src));
      const auto d = r_deviation(g, grid, theory);
      warn_flagged("R-transform M=" + std::to_string(m) + " L=" + std::to_string(l), d);
      Json c = {{"check", "r_transform"}, {"M", m}, {"L", l}, {"n_eff", g.size()}};
      c.update(deviation_json(d));
      r.summary["comparisons"].push_back(c);
    }
    // two independent copies A, B of Y_1 and their unscaled sum 2^(M+1) Y_2
    const auto a_set = collect_spectra(sum_spec(cfg, 1, m), cfg.trials, src);
    const auto a = macroscopic_green(a_set);
    const auto b = macroscopic_green(collect_spectra(sum_spec(cfg, 1, m), cfg.trials, src, "/independent"));
    const auto y2 = collect_spectra(sum_spec(cfg, 2, m), cfg.trials, src);
    const double up = std::pow(2.0, m + 1.0);
    const auto add = check_r_additivity(a, b, macroscopic_green(y2, up), grid);
    warn_flagged("additivity M=" + std::to_string(m), add);
    Json ca = {{"check", "r_additivity"}, {"M", m}};
    ca.update(deviation_json(add));
    r.summary["comparisons"].push_back(ca);
    const auto sc = check_r_scaling(macroscopic_green(y2, up), macroscopic_green(y2), 1.0 / up, grid);
    warn_flagged("scaling M=" + std::to_string(m), sc);
    Json cs = {{"check", "r_scaling"}, {"M", m}, {"mu", 1.0 / up}};
    cs.update(deviation_json(sc));
    r.summary["comparisons"].push_back(cs);
    // S(chi) = (-chi)^M
    Json s_rows = Json::array();
    double worst = 0.0;
    for (double chi : {-0.2, -0.4, -0.6, -0.8}) {
      const double s = s_transform_numeric([&](double y) { return r_transform_numeric_real(a, y); }, chi);
      const double expect = std::pow(-chi, m);
      worst = std::max(worst, std::abs(s / expect - 1.0));
      s_rows.push_back({{"chi", chi}, {"s", s}, {"expected", expect}});
    }
    r.summary["comparisons"].push_back({{"check", "s_transform"}, {"M", m}, {"max_rel_dev", worst}, {"points", s_rows}});
  }
  return r;
}

// ---- reference curves ---------------------------------------------------------

/// Named reference curve; parameters come from the configuration (m, l, alpha, cauchy_c).
inline AnalyticDensity make_reference(const std::string& name, const RunConfig& cfg) {
  const int m = cfg.ensemble.m;
  const int l = cfg.ensemble.l;
  const double alpha = cfg.ensemble.alpha;
  constexpr double inf = std::numeric_limits<double>::infinity();
  using N = Normalization;
  if (name == "mp") return {name, mp_density, 0.0, 4.0, N::probability, nullptr};
  if (name == "inv_mp") return {name, inv_mp_density, 0.25, inf, N::probability, inv_mp_cdf};
  if (name == "airy") return {name, airy_edge_density, -inf, inf, N::per_eigenvalue, nullptr};
  if (name == "bessel") return {name, bessel_hard_edge_density, 0.0, inf, N::mean_spacing_one, bessel_hard_edge_count};
  if (name == "inv_bessel") return {name, inverse_bessel_density, 0.0, inf, N::per_eigenvalue, nullptr};
  if (name == "tail_L") return {name, [l, m](double x) { return tail_density_L(x, l, m); }, 0.0, inf, N::per_eigenvalue, nullptr};
  if (name == "fuss_catalan") {
    return {name, [m](double x) { return fuss_catalan_density(x, m); }, 0.0, fuss_catalan_edge(m), N::probability, nullptr};
  }
  if (name == "meijer_kernel") {
    return {name, [m](double x) { return meijer_kernel_density(x, m); }, 0.0, inf, N::mean_spacing_one, nullptr};
  }
  if (name == "inv_meijer") {
    return {name, [m](double x) { return inverse_meijer_density(x, m); }, 0.0, inf, N::per_eigenvalue, nullptr};
  }
  if (name == "poisson") return {name, poisson_spacing, 0.0, inf, N::probability, poisson_spacing_cdf};
  if (name == "wigner") return {name, wigner_surmise, 0.0, inf, N::probability, wigner_surmise_cdf};
  if (name == "averaged_semicircle") {
    auto t = averaged_semicircle_table(alpha);
    return {name, [t](double x) { return t->rho(x); }, -inf, inf, N::probability,
            [t](double x) { return 0.5 + t->mu(x); }};
  }
  if (name == "unfolding_map") {
    auto t = averaged_semicircle_table(alpha);
    return {name, [t](double x) { return t->mu(x); }, -inf, inf, N::probability, nullptr};
  }
  if (name == "cauchy") {
    const double c = cfg.cauchy_c > 0.0 ? cfg.cauchy_c : std::numbers::pi * averaged_semicircle(0.0, alpha);
    return {name, [c](double x) { return cauchy_density(x, c); }, -inf, inf, N::probability, nullptr};
  }
  throw InvalidConfig("reference: unknown density '" + name + "'");
}

inline ExperimentResult run_reference(const RunConfig& cfg) {
  const auto d = make_reference(cfg.density, cfg);
  CsvTable t{"reference-" + cfg.density, {"lambda", "rho"}, {}};
  for (int i = 0; i < cfg.grid_points; ++i) {
    const double x = cfg.grid_lo + (cfg.grid_hi - cfg.grid_lo) * i / (cfg.grid_points - 1);
    t.add({fmt(x), fmt(d(x))});
  }
  Json s;
  s["experiment"] = "reference";
  s["density"] = cfg.density;
  s["normalization"] = to_string(d.normalization);
  s["support"] = {d.lo, d.hi};
  return {s, {t}};
}

// ---- dispatch -----------------------------------------------------------------

inline const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names = {"macro",      "softedge",          "tail",
                                                 "tail-individual", "spacing-sum-vs-direct", "cauchy-compare",
                                                 "stable-density",  "stable-spacing"};
  return names;
}

inline ExperimentResult run_experiment(const RunConfig& cfg) {
  cfg.validate();
  set_semicircle_cache_dir(cfg.cache ? cfg.resolved_cache_dir() : "");
  const auto& e = cfg.experiment;
  if (e == "macro") return run_macro(cfg);
  if (e == "softedge") return run_softedge(cfg);
  if (e == "tail") return run_tail(cfg);
  if (e == "tail-individual") return run_tail_individual(cfg);
  if (e == "spacing-sum-vs-direct") return run_spacing_sum_vs_direct(cfg);
  if (e == "cauchy-compare") return run_cauchy_compare(cfg);
  if (e == "stable-density") return run_stable_density(cfg);
  if (e == "stable-spacing") return run_stable_spacing(cfg);
  if (e == "transition-scan") return run_transition_scan(cfg);
  if (e == "poisson-probe") return run_poisson_probe(cfg);
  if (e == "saturation-probe") return run_saturation_probe(cfg);
  if (e == "freeprob-check") return run_freeprob_check(cfg);
  if (e == "reference") return run_reference(cfg);
  throw InvalidConfig("unknown experiment '" + e + "'");
}

}  // namespace htrm
