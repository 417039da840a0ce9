#include "wavecpd/wave_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wavecpd/error.hpp"
#include "wavecpd/io.hpp"

namespace wavecpd {

namespace {

std::size_t idx(int d, int i, int j) { return static_cast<std::size_t>(i) * d + j; }

// Taper factor at fractional grid position `p` (in nodes) along one axis.
double sponge_factor(double p, int d, const BoundaryConfig& b) {
  if (b.kind != Boundary::sponge) return 1.0;
  const double edge = std::min(p, static_cast<double>(d - 1) - p);
  const double depth = static_cast<double>(b.sponge_width) - edge;
  if (depth <= 0.0) return 1.0;
  return std::exp(-b.sponge_strength * depth * depth);
}

double max_abs_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
    m = std::max(m, std::abs(x));
  }
  return m;
}

}  // namespace

void MediumSpec::validate() const {
  require(d >= 7, "medium: d must be >= 7 (got " + std::to_string(d) + ")");
  require(dx > 0.0 && std::isfinite(dx), "medium: dx must be positive");
  const std::size_t n = static_cast<std::size_t>(d) * d;
  require(rho.size() == n && vp.size() == n && vs.size() == n, "medium: field sizes do not match d*d");
  for (std::size_t k = 0; k < n; ++k) {
    const std::string at = " at node (" + std::to_string(k / d) + "," + std::to_string(k % d) + ")";
    require(rho[k] > 0.0 && std::isfinite(rho[k]), "medium: rho must be positive" + at);
    require(vp[k] > 0.0 && std::isfinite(vp[k]), "medium: vp must be positive" + at);
    require(vs[k] >= 0.0 && vs[k] < vp[k], "medium: vs must satisfy 0 <= vs < vp" + at);
  }
}

double MediumSpec::vp_max() const { return vp.empty() ? 0.0 : *std::max_element(vp.begin(), vp.end()); }
double MediumSpec::vs_min() const { return vs.empty() ? 0.0 : *std::min_element(vs.begin(), vs.end()); }

std::string MediumSpec::hash() const {
  const double head[2] = {static_cast<double>(d), dx};
  auto h = io::fnv1a(head);
  h = io::fnv1a(rho, h);
  h = io::fnv1a(vp, h);
  h = io::fnv1a(vs, h);
  return io::hex64(h);
}

MediumSpec build_medium(int d, double dx, double rho0, double vp0, double vs0, NodeIndex damage_center,
                        const DamageMatrix& damage) {
  require(rho0 > 0.0 && vp0 > 0.0 && vs0 >= 0.0, "build_medium: base values must be positive");
  require(d >= 1, "build_medium: d must be positive");
  const int r0 = damage_center.row - kBlanketRadius;
  const int c0 = damage_center.col - kBlanketRadius;
  const int r1 = damage_center.row + kBlanketRadius;
  const int c1 = damage_center.col + kBlanketRadius;
  if (r0 < 0 || c0 < 0 || r1 >= d || c1 >= d)
    fail(ErrorKind::invalid_argument,
         "build_medium: damage patch centred at (" + std::to_string(damage_center.row) + ", " +
             std::to_string(damage_center.col) + ") covers rows " + std::to_string(r0) + ".." + std::to_string(r1) + ", cols " +
             std::to_string(c0) + ".." + std::to_string(c1) + " exceeds grid 0.." + std::to_string(d - 1));
  for (int a = 0; a < kBlanket; ++a)
    for (int b = 0; b < kBlanket; ++b) {
      const double v = damage[a][b];
      if (!(v > 0.0 && v <= 1.0))
        fail(ErrorKind::invalid_argument, "build_medium: damage multiplier [" + std::to_string(a) + "][" +
                                              std::to_string(b) + "] must be in (0, 1]");
    }

  MediumSpec m;
  m.d = d;
  m.dx = dx;
  const std::size_t n = static_cast<std::size_t>(d) * d;
  m.rho.assign(n, rho0);
  m.vp.assign(n, vp0);
  m.vs.assign(n, vs0);
  for (int a = 0; a < kBlanket; ++a)
    for (int b = 0; b < kBlanket; ++b) m.rho[idx(d, r0 + a, c0 + b)] = rho0 * damage[a][b];
  m.validate();
  return m;
}

WaveField WaveField::zeros(int d) {
  WaveField f;
  f.d = d;
  const std::size_t n = static_cast<std::size_t>(d) * d;
  f.vx.assign(n, 0.0);
  f.vz.assign(n, 0.0);
  f.txx.assign(n, 0.0);
  f.tzz.assign(n, 0.0);
  f.txz.assign(n, 0.0);
  return f;
}

std::vector<double> WaveField::vz_at_nodes() const {
  std::vector<double> out(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double above = i > 0 ? vz[idx(d, i - 1, j)] : 0.0;
      const double below = i < d - 1 ? vz[idx(d, i, j)] : 0.0;
      out[idx(d, i, j)] = 0.5 * (above + below);
    }
  return out;
}

double WaveField::max_abs() const {
  return std::max({max_abs_of(vx), max_abs_of(vz), max_abs_of(txx), max_abs_of(tzz), max_abs_of(txz)});
}

double cfl_timestep(const MediumSpec& m, double cfl_safety) {
  require(cfl_safety > 0.0 && cfl_safety <= 1.0, "cfl_safety must be in (0, 1]");
  require(m.d > 0 && m.dx > 0.0 && !m.vp.empty(), "cfl_timestep: invalid medium");
  const double vmax = m.vp_max();
  require(vmax > 0.0 && std::isfinite(vmax), "cfl_timestep: invalid medium");
  return cfl_safety * m.dx / (vmax * std::numbers::sqrt2);
}

double ricker(double t, double f0, double t0) {
  const double a = std::numbers::pi * f0 * (t - t0);
  const double a2 = a * a;
  return (1.0 - 2.0 * a2) * std::exp(-a2);
}

void validate_source(const SourceSpec& s, const MediumSpec& m) {
  const int d = m.d;
  require(s.position.row >= 1 && s.position.row <= d - 2 && s.position.col >= 1 && s.position.col <= d - 2,
          "source.position (" + std::to_string(s.position.row) + "," + std::to_string(s.position.col) +
              ") must be inside the grid, off the outer ring");
  require(s.f0 > 0.0 && std::isfinite(s.f0), "source.f0 must be positive");
  const double f_max = m.vs_min() / (10.0 * m.dx);
  require(s.f0 <= f_max * (1.0 + 1e-12),
          "source.f0 = " + io::format_double(s.f0) + " Hz exceeds " + io::format_double(f_max) +
              " Hz (10 nodes per shear wavelength)");
  require(std::isfinite(s.amplitude), "source.amplitude must be finite");
  require(std::isfinite(s.t0), "source.t0 must be finite");
}

SamplingPlan plan_sampling(const SimConfig& c, const MediumSpec& m) {
  require(c.total_time > 0.0 && std::isfinite(c.total_time), "sim.total_time must be positive");
  require(c.truncate_time >= 0.0, "sim.truncate_time must be non-negative");
  require(c.truncate_time < c.total_time, "sim.truncate_time must be < sim.total_time");
  require(c.n_frames >= 2, "sim.n_frames must be >= 2");
  require(c.cfl_safety > 0.0 && c.cfl_safety <= 1.0, "sim.cfl_safety must be in (0, 1]");
  if (c.boundary.kind == Boundary::sponge) {
    require(c.boundary.sponge_width >= 0, "sim.sponge_width must be non-negative");
    require(c.boundary.sponge_strength >= 0.0, "sim.sponge_strength must be non-negative");
  }

  const double dt_max = cfl_timestep(m, c.cfl_safety);
  const double spacing = (c.total_time - c.truncate_time) / c.n_frames;
  SamplingPlan plan;
  if (c.dt > 0.0) {
    require(c.dt <= dt_max * (1.0 + 1e-12),
            "sim.dt = " + io::format_double(c.dt) + " exceeds the CFL limit " + io::format_double(dt_max));
    plan.dt = c.dt;
  } else {
    require(c.dt == 0.0, "sim.dt must be positive (or 0 for automatic)");
    const auto n = static_cast<std::int64_t>(std::ceil(spacing / dt_max - 1e-9));
    plan.dt = spacing / static_cast<double>(std::max<std::int64_t>(n, 1));
  }

  const auto aligned = [&](double span, std::int64_t& steps) {
    steps = std::llround(span / plan.dt);
    return std::abs(static_cast<double>(steps) * plan.dt - span) <= 1e-9 * std::max(span, plan.dt);
  };
  require(aligned(spacing, plan.steps_per_frame) && plan.steps_per_frame >= 1,
          "sim.dt = " + io::format_double(plan.dt) + " s does not divide the frame spacing " +
              io::format_double(spacing) + " s set by sim.n_frames");
  require(aligned(c.truncate_time, plan.truncate_steps),
          "sim.truncate_time is not a multiple of sim.dt = " + io::format_double(plan.dt) + " s");
  plan.total_steps = plan.truncate_steps + static_cast<std::int64_t>(c.n_frames) * plan.steps_per_frame;
  return plan;
}

Propagator::Propagator(const MediumSpec& m, double dt, BoundaryConfig boundary)
    : d_(m.d), dt_(dt), boundary_(boundary) {
  m.validate();
  require(dt > 0.0, "propagator: dt must be positive");
  require(dt <= cfl_timestep(m, 1.0) * (1.0 + 1e-12), "propagator: dt violates the CFL condition");
  const int d = d_;
  const std::size_t n = static_cast<std::size_t>(d) * d;
  const double s = dt / m.dx;
  bx.assign(n, 0.0);
  bz.assign(n, 0.0);
  lam2mu.assign(n, 0.0);
  lam.assign(n, 0.0);
  mu.assign(n, 0.0);
  mu_xz.assign(n, 0.0);
  taper_vx.assign(n, 1.0);
  taper_vz.assign(n, 1.0);
  taper_node.assign(n, 1.0);
  taper_xz.assign(n, 1.0);

  std::vector<double> shear(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double mu_k = m.rho[k] * m.vs[k] * m.vs[k];
    const double lam_k = m.rho[k] * (m.vp[k] * m.vp[k] - 2.0 * m.vs[k] * m.vs[k]);
    shear[k] = mu_k;
    lam2mu[k] = s * (lam_k + 2.0 * mu_k);
    lam[k] = s * lam_k;
    mu[k] = s * mu_k;
  }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const auto k = idx(d, i, j);
      if (j < d - 1) bx[k] = s / (0.5 * (m.rho[k] + m.rho[idx(d, i, j + 1)]));
      if (i < d - 1) bz[k] = s / (0.5 * (m.rho[k] + m.rho[idx(d, i + 1, j)]));
      if (i < d - 1 && j < d - 1) {
        const double a = shear[k], b = shear[idx(d, i, j + 1)], c = shear[idx(d, i + 1, j)],
                     e = shear[idx(d, i + 1, j + 1)];
        // Harmonic mean; zero if any corner is a fluid.
        mu_xz[k] = (a > 0 && b > 0 && c > 0 && e > 0) ? s * 4.0 / (1.0 / a + 1.0 / b + 1.0 / c + 1.0 / e) : 0.0;
      }
      const double gi = sponge_factor(i, d, boundary_), gj = sponge_factor(j, d, boundary_);
      const double gih = sponge_factor(i + 0.5, d, boundary_), gjh = sponge_factor(j + 0.5, d, boundary_);
      taper_node[k] = gi * gj;
      taper_vx[k] = gi * gjh;
      taper_vz[k] = gih * gj;
      taper_xz[k] = gih * gjh;
    }
}

void Propagator::step(WaveField& f) const {
  require(f.d == d_, "propagator: field size does not match medium");
  const int d = d_;
  double* vx = f.vx.data();
  double* vz = f.vz.data();
  double* txx = f.txx.data();
  double* tzz = f.tzz.data();
  double* txz = f.txz.data();
  const bool taper = boundary_.kind == Boundary::sponge;

  // vx active on rows 1..d-2, columns 0..d-2; vz active on rows 0..d-2, columns 1..d-2.
#pragma omp parallel for schedule(static)
  for (int i = 0; i < d - 1; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) * d;
    if (i >= 1) {
      const std::size_t up = row - d;
      for (int j = 0; j < d - 1; ++j) {
        const std::size_t k = row + j;
        vx[k] += bx[k] * ((txx[k + 1] - txx[k]) + (txz[k] - txz[up + j]));
      }
    }
    const std::size_t down = row + d;
    for (int j = 1; j < d - 1; ++j) {
      const std::size_t k = row + j;
      vz[k] += bz[k] * ((txz[k] - txz[k - 1]) + (tzz[down + j] - tzz[k]));
    }
  }

#pragma omp parallel for schedule(static)
  for (int i = 0; i < d; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) {
      const std::size_t k = row + j;
      const double dvx = vx[k] - (j > 0 ? vx[k - 1] : 0.0);
      const double dvz = vz[k] - (i > 0 ? vz[k - d] : 0.0);
      txx[k] += lam2mu[k] * dvx + lam[k] * dvz;
      tzz[k] += lam[k] * dvx + lam2mu[k] * dvz;
    }
    if (i < d - 1)
      for (int j = 0; j < d - 1; ++j) {
        const std::size_t k = row + j;
        txz[k] += mu_xz[k] * ((vx[k + d] - vx[k]) + (vz[k + 1] - vz[k]));
      }
  }

  if (taper) {
    const std::size_t n = static_cast<std::size_t>(d) * d;
#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < n; ++k) {
      vx[k] *= taper_vx[k];
      vz[k] *= taper_vz[k];
      txx[k] *= taper_node[k];
      tzz[k] *= taper_node[k];
      txz[k] *= taper_xz[k];
    }
  }

  ++f.step_index;
  f.t = static_cast<double>(f.step_index) * dt_;
  if (!std::isfinite(f.max_abs()))
    fail(ErrorKind::instability, "solver instability: non-finite field at step " + std::to_string(f.step_index));
}

void Propagator::inject(WaveField& f, NodeIndex node, double value) const {
  const int d = d_;
  require(node.row >= 1 && node.row <= d - 2 && node.col >= 1 && node.col <= d - 2,
          "inject: node must be off the outer ring");
  f.vz[idx(d, node.row - 1, node.col)] += 0.5 * value;
  f.vz[idx(d, node.row, node.col)] += 0.5 * value;
}

WaveField step(const WaveField& f, const MediumSpec& m, double dt, const BoundaryConfig& boundary) {
  Propagator p(m, dt, boundary);
  WaveField out = f;
  p.step(out);
  return out;
}

WaveDataset simulate(const MediumSpec& m, const SourceSpec& s, const SimConfig& c, std::uint64_t seed) {
  m.validate();
  validate_source(s, m);
  const SamplingPlan plan = plan_sampling(c, m);
  const Propagator prop(m, plan.dt, c.boundary);

  WaveDataset ds;
  ds.d = m.d;
  ds.frame_dt = static_cast<double>(plan.steps_per_frame) * plan.dt;
  ds.frames.reserve(static_cast<std::size_t>(c.n_frames));

  WaveField f = WaveField::zeros(m.d);
  for (std::int64_t n = 0; n < plan.total_steps; ++n) {
    const double t = static_cast<double>(n) * plan.dt;
    prop.inject(f, s.position, plan.dt * s.amplitude * ricker(t, s.f0, s.t0));
    prop.step(f);
    const std::int64_t done = n + 1;
    if (done > plan.truncate_steps && (done - plan.truncate_steps) % plan.steps_per_frame == 0) {
      GridFrame frame;
      frame.values = f.vz_at_nodes();
      frame.time_index = static_cast<std::int64_t>(ds.frames.size());
      ds.frames.push_back(std::move(frame));
    }
  }

  ds.provenance = {
      {"generator", "wave-sim"},
      {"observable", "vz_at_nodes"},
      {"medium_hash", m.hash()},
      {"medium", {{"d", m.d}, {"dx", m.dx}, {"vp_max", m.vp_max()}, {"vs_min", m.vs_min()}}},
      {"source", to_json(s)},
      {"sim", to_json(c, plan)},
      {"seed", seed},
  };
  return ds;
}

}  // namespace wavecpd
