#pragma once

// Transferred polarization over grids of detuning and Rabi-amplitude error.

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "spinseq/propagator.hpp"

namespace spinseq {

struct ScanGrid {
  std::vector<double> delta_over_omega;  // Delta / Omega
  std::vector<double> rabi_rel;          // Omega_error / Omega

  // n evenly spaced points on [lo, hi] for each axis.
  static ScanGrid linspace(double d_lo, double d_hi, int n_delta, double r_lo, double r_hi,
                           int n_rabi);
  // Delta/Omega in [-0.5, 0.5], Omega_error/Omega in [-0.3, 0.3], 41 x 41.
  static ScanGrid default_grid();

  void validate() const;
  std::size_t size() const { return delta_over_omega.size() * rabi_rel.size(); }

  friend bool operator==(const ScanGrid&, const ScanGrid&) = default;
};

struct HeatmapMeta {
  SchemeSpec spec;
  DnpParams params;
  int n_reps = 0;
  std::string timestamp;  // UTC, ISO 8601
  std::string version;
};

struct Heatmap {
  ScanGrid grid;
  // Row-major: rabi_rel outer, delta inner. NaN where the point failed.
  std::vector<double> values;
  std::vector<std::string> reasons;  // empty string where the point succeeded
  HeatmapMeta meta;

  double at(std::size_t i_rabi, std::size_t j_delta) const {
    return values[i_rabi * grid.delta_over_omega.size() + j_delta];
  }
  std::vector<double> row(std::size_t i_rabi) const;
  std::size_t failures() const;
};

struct ScanOptions {
  int threads = 1;
  int n_max = 0;  // repetition cap for N selection; 0 = default
};

// N is taken from spec.n_reps if set, otherwise selected once at the
// error-free point. Each grid point is independent; failures are recorded.
Heatmap scan(const SchemeSpec& spec, const DnpParams& p, const ScanGrid& grid,
             const ScanOptions& opt = {});

// Signed polarization at a single error point for an already built schedule.
double polarization_at(const Schedule& sch, const DnpParams& p, double delta_over_omega,
                       double rabi_rel);

void write_heatmap_csv(std::ostream& os, const Heatmap& h);
nlohmann::json heatmap_metadata(const Heatmap& h);

struct RegimePanel {
  int a_halvings = 0;
  int omega_halvings = 0;
  DnpParams params;
  Heatmap heatmap;
  double transfer_time = 0.0;
  // transfer_time / (2 pi / |A| of the base parameters)
  double t_fin_ratio = 0.0;
};

// Panels (i, j) for i = 0..a_halvings, j = 0..omega_halvings with
// A -> A / 2^i and wI -> wI / 2^j; N is re-selected per panel.
std::vector<RegimePanel> multi_regime_scan(const SchemeSpec& spec, const DnpParams& base,
                                           int a_halvings, int omega_halvings,
                                           const ScanGrid& grid, const ScanOptions& opt = {});

nlohmann::json multi_regime_metadata(const std::vector<RegimePanel>& panels);

// Distance from x = 0 to where f first drops below `threshold`, averaged
// over both directions; edges are bracketed on a step grid up to `x_max`
// and refined by bisection. Returns 0 if f(0) < threshold; a side that
// never drops counts as x_max.
double threshold_half_width(const std::function<double(double)>& f, double threshold,
                            double x_max, int steps = 200);

// Maximal runs of consecutive Delta points with polarization >= threshold
// in one heatmap row that do not contain Delta = 0.
int count_offset_bands(const std::vector<double>& delta, const std::vector<double>& values,
                       double threshold);

// Best polarization over all Rabi-error rows, per Delta column.
std::vector<double> delta_profile(const Heatmap& h);

// Delta side-bands: runs of the column profile at or above `threshold`
// separated from the band through Delta = 0.
int count_sidebands(const Heatmap& h, double threshold);

}  // namespace spinseq
