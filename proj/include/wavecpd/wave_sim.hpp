#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wavecpd/dataset.hpp"

namespace wavecpd {

using DamageMatrix = std::array<std::array<double, kBlanket>, kBlanket>;

/// Relative density of the damaged 5x5 patch used in the reference experiment.
inline constexpr DamageMatrix kDefaultDamage = {{
    {0.5000, 0.3316, 0.2816, 0.3316, 0.5000},
    {0.3316, 0.1876, 0.1408, 0.1876, 0.3316},
    {0.2816, 0.1408, 0.0704, 0.1408, 0.2816},
    {0.3316, 0.1876, 0.1408, 0.1876, 0.3316},
    {0.5000, 0.3316, 0.2816, 0.3316, 0.5000},
}};

/// Material on a d x d node grid. Fields are row-major; row is z, column is x.
struct MediumSpec {
  int d = 0;
  double dx = 0.0;
  std::vector<double> rho;
  std::vector<double> vp;
  std::vector<double> vs;

  void validate() const;
  double vp_max() const;
  double vs_min() const;
  std::string hash() const;
};

MediumSpec build_medium(int d, double dx, double rho0, double vp0, double vs0, NodeIndex damage_center,
                        const DamageMatrix& damage);

struct SourceSpec {
  NodeIndex position;
  double f0 = 15.0;
  double amplitude = 1.0;
  double t0 = 0.1;
};

enum class Boundary { rigid, sponge };

struct BoundaryConfig {
  Boundary kind = Boundary::sponge;
  int sponge_width = 10;
  double sponge_strength = 0.0015;
};

struct SimConfig {
  double total_time = 1.5;
  double truncate_time = 0.5;
  int n_frames = 119;
  double dt = 0.0;  // 0 selects the largest aligned step allowed by cfl_safety
  double cfl_safety = 0.5;
  BoundaryConfig boundary;
};

/// Step counts derived from a validated SimConfig.
struct SamplingPlan {
  double dt = 0.0;
  std::int64_t total_steps = 0;
  std::int64_t truncate_steps = 0;
  std::int64_t steps_per_frame = 0;
};

/// Staggered-grid state. All five arrays are d x d; entries outside each
/// component's active region stay zero.
///   txx, tzz at nodes (i, j)        vx at (i, j + 1/2)
///   vz at (i + 1/2, j)              txz at (i + 1/2, j + 1/2)
struct WaveField {
  int d = 0;
  std::vector<double> vx, vz, txx, tzz, txz;
  double t = 0.0;
  std::int64_t step_index = 0;

  static WaveField zeros(int d);
  /// vz averaged onto the nodes.
  std::vector<double> vz_at_nodes() const;
  double max_abs() const;

  friend bool operator==(const WaveField&, const WaveField&) = default;
};

double cfl_timestep(const MediumSpec& m, double cfl_safety);
double ricker(double t, double f0, double t0);

void validate_source(const SourceSpec& s, const MediumSpec& m);
SamplingPlan plan_sampling(const SimConfig& c, const MediumSpec& m);

/// Precomputed staggered material coefficients and boundary tapers for one
/// (medium, dt, boundary) triple.
class Propagator {
 public:
  Propagator(const MediumSpec& m, double dt, BoundaryConfig boundary = {});

  /// One leapfrog update (velocities, then stresses, then taper). OpenMP over rows.
  void step(WaveField& f) const;
  /// Adds the source increment `value` to vz split evenly across the two vz
  /// points straddling `node`.
  void inject(WaveField& f, NodeIndex node, double value) const;

  int d() const { return d_; }
  double dt() const { return dt_; }
  const BoundaryConfig& boundary() const { return boundary_; }

  // Coefficients are public to the serial reference kernel.
  std::vector<double> bx, bz;           // dt / (rho dx) at vx and vz points
  std::vector<double> lam2mu, lam, mu;  // dt / dx scaled Lame parameters at nodes
  std::vector<double> mu_xz;            // dt / dx scaled shear modulus at txz points
  std::vector<double> taper_vx, taper_vz, taper_node, taper_xz;

 private:
  int d_;
  double dt_;
  BoundaryConfig boundary_;
};

/// Returns the field advanced by one step; throws ErrorKind::instability on a
/// non-finite result.
WaveField step(const WaveField& f, const MediumSpec& m, double dt, const BoundaryConfig& boundary = {});

/// Integrates from t = 0 and records vz at nodes after truncation.
WaveDataset simulate(const MediumSpec& m, const SourceSpec& s, const SimConfig& c, std::uint64_t seed = 0);

namespace reference {

/// Straightforward serial version of Propagator::step, one grid point at a
/// time with bounds-checked neighbour reads.
void step(const Propagator& p, WaveField& f);

}  // namespace reference

/// Medium, source and solver settings read from a JSON document.
struct SimulationSetup {
  MediumSpec medium;
  SourceSpec source;
  SimConfig sim;
  std::uint64_t seed = 0;
};

/// Missing keys take the reference-experiment defaults. Validation errors name
/// the offending field and carry ErrorKind::invalid_argument.
SimulationSetup parse_simulation_config(const nlohmann::json& doc);
nlohmann::json to_json(const SourceSpec& s);
nlohmann::json to_json(const SimConfig& c, const SamplingPlan& plan);

}  // namespace wavecpd
