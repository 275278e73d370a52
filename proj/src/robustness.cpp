#include "spinseq/robustness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <numbers>
#include <ostream>
#include <thread>

#ifndef SPINSEQ_VERSION
#define SPINSEQ_VERSION "dev"
#endif

namespace spinseq {

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (int k = 0; k < n; ++k) v[k] = lo + (hi - lo) * k / (n - 1);
  return v;
}

void require_increasing(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw Error(ErrorCode::BadValue, "grid axis is empty", name);
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!std::isfinite(v[k])) throw Error(ErrorCode::BadValue, "grid value is not finite", name);
    if (k > 0 && !(v[k] > v[k - 1])) {
      throw Error(ErrorCode::BadValue, "grid axis must be strictly increasing", name);
    }
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Runs body(k) for k in [0, n) on up to `threads` workers. Results are
// written by index, so the outcome does not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, int threads, F&& body) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) body(k);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

ScanGrid ScanGrid::linspace(double d_lo, double d_hi, int n_delta, double r_lo, double r_hi,
                            int n_rabi) {
  if (n_delta < 1 || n_rabi < 1) {
    throw Error(ErrorCode::BadValue, "grid needs at least one point per axis", "grid");
  }
  ScanGrid g{spinseq::linspace(d_lo, d_hi, n_delta), spinseq::linspace(r_lo, r_hi, n_rabi)};
  g.validate();
  return g;
}

ScanGrid ScanGrid::default_grid() { return linspace(-0.5, 0.5, 41, -0.3, 0.3, 41); }

void ScanGrid::validate() const {
  require_increasing(delta_over_omega, "grid.delta_over_omega");
  require_increasing(rabi_rel, "grid.rabi_error_over_omega");
}

std::vector<double> Heatmap::row(std::size_t i_rabi) const {
  const std::size_t n = grid.delta_over_omega.size();
  return {values.begin() + static_cast<std::ptrdiff_t>(i_rabi * n),
          values.begin() + static_cast<std::ptrdiff_t>((i_rabi + 1) * n)};
}

std::size_t Heatmap::failures() const {
  return static_cast<std::size_t>(
      std::count_if(reasons.begin(), reasons.end(), [](const auto& r) { return !r.empty(); }));
}

double polarization_at(const Schedule& sch, const DnpParams& p, double delta_over_omega,
                       double rabi_rel) {
  const ErrorModel e{delta_over_omega * sch.omega_rabi, rabi_rel};
  return final_polarization(sch, p, e);
}

Heatmap scan(const SchemeSpec& spec, const DnpParams& p, const ScanGrid& grid,
             const ScanOptions& opt) {
  grid.validate();
  Schedule sch = build_schedule(p, spec);
  if (spec.n_reps > 0) {
    sch.n_reps = spec.n_reps;
  } else {
    sch.n_reps = select_repetitions(sch, p, opt.n_max);
  }
  if (std::isinf(sch.omega_rabi)) {
    throw Error(ErrorCode::BadValue, "scan axes are relative to omega_rabi, which must be finite",
                "omega_rabi");
  }

  Heatmap h;
  h.grid = grid;
  h.values.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  h.reasons.assign(grid.size(), std::string{});
  h.meta = HeatmapMeta{spec, p, sch.n_reps, utc_timestamp(), SPINSEQ_VERSION};

  const std::size_t nd = grid.delta_over_omega.size();
  parallel_for(grid.size(), opt.threads, [&](std::size_t k) {
    const double d = grid.delta_over_omega[k % nd];
    const double r = grid.rabi_rel[k / nd];
    try {
      h.values[k] = polarization_at(sch, p, d, r);
    } catch (const std::exception& ex) {
      h.reasons[k] = ex.what();
    }
  });
  return h;
}

void write_heatmap_csv(std::ostream& os, const Heatmap& h) {
  os << "delta_over_omega,rabi_error_over_omega,polarization\n";
  const std::size_t nd = h.grid.delta_over_omega.size();
  char buf[96];
  for (std::size_t k = 0; k < h.values.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", h.grid.delta_over_omega[k % nd],
                  h.grid.rabi_rel[k / nd], h.values[k]);
    os << buf;
  }
}

nlohmann::json heatmap_metadata(const Heatmap& h) {
  nlohmann::json failures = nlohmann::json::array();
  const std::size_t nd = h.grid.delta_over_omega.size();
  for (std::size_t k = 0; k < h.reasons.size(); ++k) {
    if (h.reasons[k].empty()) continue;
    failures.push_back({{"delta_over_omega", h.grid.delta_over_omega[k % nd]},
                        {"rabi_error_over_omega", h.grid.rabi_rel[k / nd]},
                        {"reason", h.reasons[k]}});
  }
  return {{"scheme", std::string(to_string(h.meta.spec.scheme))},
          {"scheme_spec", h.meta.spec},
          {"params", h.meta.params},
          {"n_reps", h.meta.n_reps},
          {"grid",
           {{"delta_over_omega", h.grid.delta_over_omega},
            {"rabi_error_over_omega", h.grid.rabi_rel}}},
          {"rows", h.grid.rabi_rel.size()},
          {"cols", h.grid.delta_over_omega.size()},
          {"failures", std::move(failures)},
          {"timestamp", h.meta.timestamp},
          {"version", h.meta.version}};
}

std::vector<RegimePanel> multi_regime_scan(const SchemeSpec& spec, const DnpParams& base,
                                           int a_halvings, int omega_halvings,
                                           const ScanGrid& grid, const ScanOptions& opt) {
  if (a_halvings < 0 || omega_halvings < 0) {
    throw Error(ErrorCode::BadValue, "halving counts must be >= 0", "halvings");
  }
  if (base.a_perp == 0.0) {
    throw Error(ErrorCode::BadValue, "multi-regime scan needs a_perp != 0", "a_perp");
  }
  const double t_ref = 2.0 * std::numbers::pi / std::abs(base.a_perp);
  std::vector<RegimePanel> panels;
  for (int i = 0; i <= a_halvings; ++i) {
    for (int j = 0; j <= omega_halvings; ++j) {
      RegimePanel panel;
      panel.a_halvings = i;
      panel.omega_halvings = j;
      panel.params = base;
      panel.params.a_perp = std::ldexp(base.a_perp, -i);
      panel.params.omega_I = std::ldexp(base.omega_I, -j);
      panel.heatmap = scan(spec, panel.params, grid, opt);
      Schedule sch = build_schedule(panel.params, spec);
      sch.n_reps = panel.heatmap.meta.n_reps;
      panel.transfer_time = sch.total_duration();
      panel.t_fin_ratio = panel.transfer_time / t_ref;
      panels.push_back(std::move(panel));
    }
  }
  return panels;
}

nlohmann::json multi_regime_metadata(const std::vector<RegimePanel>& panels) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : panels) {
    nlohmann::json m = heatmap_metadata(p.heatmap);
    m["a_halvings"] = p.a_halvings;
    m["omega_halvings"] = p.omega_halvings;
    m["transfer_time"] = p.transfer_time;
    m["t_fin_ratio"] = p.t_fin_ratio;
    arr.push_back(std::move(m));
  }
  return {{"panels", std::move(arr)}};
}

double threshold_half_width(const std::function<double(double)>& f, double threshold,
                            double x_max, int steps) {
  if (!(x_max > 0.0) || steps < 1) {
    throw Error(ErrorCode::InvalidArgument, "half-width search needs x_max > 0 and steps >= 1");
  }
  if (!(f(0.0) >= threshold)) return 0.0;
  const auto edge = [&](double sign) {
    const double h = x_max / steps;
    double inside = 0.0;
    for (int k = 1; k <= steps; ++k) {
      const double x = k * h;
      if (!(f(sign * x) >= threshold)) {
        double lo = inside;
        double hi = x;
        for (int it = 0; it < 60 && hi - lo > 1e-12 * x_max; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (f(sign * mid) >= threshold) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        return 0.5 * (lo + hi);
      }
      inside = x;
    }
    return x_max;
  };
  return 0.5 * (edge(1.0) + edge(-1.0));
}

int count_offset_bands(const std::vector<double>& delta, const std::vector<double>& values,
                       double threshold) {
  if (delta.size() != values.size()) {
    throw Error(ErrorCode::DimensionMismatch, "delta and value rows differ in length");
  }
  int bands = 0;
  std::size_t k = 0;
  while (k < values.size()) {
    if (!(values[k] >= threshold)) {
      ++k;
      continue;
    }
    std::size_t end = k;
    while (end + 1 < values.size() && values[end + 1] >= threshold) ++end;
    if (!(delta[k] <= 0.0 && delta[end] >= 0.0)) ++bands;
    k = end + 1;
  }
  return bands;
}

std::vector<double> delta_profile(const Heatmap& h) {
  const std::size_t nd = h.grid.delta_over_omega.size();
  std::vector<double> best(nd, -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < h.values.size(); ++k) {
    if (!std::isnan(h.values[k])) best[k % nd] = std::max(best[k % nd], h.values[k]);
  }
  return best;
}

int count_sidebands(const Heatmap& h, double threshold) {
  return count_offset_bands(h.grid.delta_over_omega, delta_profile(h), threshold);
}

}  // namespace spinseq
