#include <doctest.h>

#include <cmath>
#include <limits>

#include "sim_helpers.hpp"
#include "wavecpd/error.hpp"

using namespace wavecpd;
using namespace simtest;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected wavecpd::Error");
  return ErrorKind::io;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& s, const std::string& sub) { return s.find(sub) != std::string::npos; }

MediumSpec default_medium() { return build_medium(50, 10.0, 2200.0, 3000.0, 1800.0, {23, 23}, kDefaultDamage); }

}  // namespace

TEST_CASE("build_medium") {
  const MediumSpec m = default_medium();
  CHECK(m.rho[at(50, 23, 23)] == doctest::Approx(154.88).epsilon(1e-12));
  CHECK(m.rho[at(50, 21, 21)] == doctest::Approx(1100.0).epsilon(1e-12));
  CHECK(m.rho[at(50, 20, 23)] == 2200.0);
  CHECK(m.rho[at(50, 0, 0)] == 2200.0);
  for (std::size_t k = 0; k < m.vp.size(); ++k) {
    REQUIRE(m.vp[k] == 3000.0);
    REQUIRE(m.vs[k] == 1800.0);
  }

  const MediumSpec h = homogeneous(50);
  for (double r : h.rho) REQUIRE(r == 2200.0);

  CHECK(kind_of([] { build_medium(50, 10.0, 2200.0, 3000.0, 1800.0, {1, 1}, kDefaultDamage); }) ==
        ErrorKind::invalid_argument);
  const std::string msg = message_of([] { build_medium(50, 10.0, 2200.0, 3000.0, 1800.0, {1, 1}, kDefaultDamage); });
  CHECK(contains(msg, "(1, 1)"));
  CHECK(kind_of([] { build_medium(50, 10.0, 2200.0, 3000.0, 1800.0, {48, 20}, kDefaultDamage); }) ==
        ErrorKind::invalid_argument);
  // (2,2) and (47,47) are the extreme valid centres
  CHECK_NOTHROW(build_medium(50, 10.0, 2200.0, 3000.0, 1800.0, {2, 2}, kDefaultDamage));
  CHECK_NOTHROW(build_medium(50, 10.0, 2200.0, 3000.0, 1800.0, {47, 47}, kDefaultDamage));

  DamageMatrix bad = ones();
  bad[2][3] = 0.0;
  CHECK(kind_of([&] { build_medium(50, 10.0, 2200.0, 3000.0, 1800.0, {23, 23}, bad); }) ==
        ErrorKind::invalid_argument);
  bad[2][3] = -0.5;
  CHECK(kind_of([&] { build_medium(50, 10.0, 2200.0, 3000.0, 1800.0, {23, 23}, bad); }) ==
        ErrorKind::invalid_argument);
  bad[2][3] = std::numeric_limits<double>::quiet_NaN();
  CHECK(kind_of([&] { build_medium(50, 10.0, 2200.0, 3000.0, 1800.0, {23, 23}, bad); }) ==
        ErrorKind::invalid_argument);

  CHECK(kind_of([] { build_medium(4, 10.0, 2200.0, 3000.0, 1800.0, {2, 2}, ones()); }) ==
        ErrorKind::invalid_argument);
  CHECK(kind_of([] { build_medium(50, -1.0, 2200.0, 3000.0, 1800.0, {23, 23}, ones()); }) ==
        ErrorKind::invalid_argument);
  CHECK(kind_of([] { build_medium(50, 10.0, 2200.0, 3000.0, 3500.0, {23, 23}, ones()); }) ==
        ErrorKind::invalid_argument);
}

TEST_CASE("medium hash tracks content") {
  const MediumSpec a = default_medium();
  const MediumSpec b = homogeneous(50);
  CHECK(a.hash() == default_medium().hash());
  CHECK(a.hash() != b.hash());
}

TEST_CASE("cfl_timestep") {
  const MediumSpec m = homogeneous(50);
  CHECK(cfl_timestep(m, 0.5) == doctest::Approx(0.5 * 10.0 / (3000.0 * std::sqrt(2.0))).epsilon(1e-14));
  CHECK(cfl_timestep(m, 0.5) == doctest::Approx(1.1785e-3).epsilon(1e-4));
  CHECK(cfl_timestep(m, 1.0) == doctest::Approx(2.357e-3).epsilon(1e-4));

  const MediumSpec fast = build_medium(50, 10.0, 2200.0, 6000.0, 1800.0, {23, 23}, ones());
  CHECK(cfl_timestep(fast, 0.5) == doctest::Approx(cfl_timestep(m, 0.5) / 2).epsilon(1e-14));

  CHECK(kind_of([&] { cfl_timestep(m, 0.0); }) == ErrorKind::invalid_argument);
  CHECK(kind_of([&] { cfl_timestep(m, 1.5); }) == ErrorKind::invalid_argument);
  CHECK(kind_of([] { cfl_timestep(MediumSpec{}, 0.5); }) == ErrorKind::invalid_argument);
}

TEST_CASE("ricker") {
  CHECK(ricker(0.1, 15.0, 0.1) == 1.0);
  const double a = M_PI * 15.0 * 0.02;
  CHECK(ricker(0.12, 15.0, 0.1) == doctest::Approx((1 - 2 * a * a) * std::exp(-a * a)).epsilon(1e-14));
  CHECK(ricker(0.08, 15.0, 0.1) == doctest::Approx(ricker(0.12, 15.0, 0.1)).epsilon(1e-14));
}

TEST_CASE("step: zero fixed point and linearity") {
  const MediumSpec m = default_medium();
  const double dt = cfl_timestep(m, 0.5);
  for (Boundary b : {Boundary::rigid, Boundary::sponge}) {
    const BoundaryConfig bc{b, 10, 0.0015};
    const WaveField z = WaveField::zeros(50);
    const WaveField z1 = step(z, m, dt, bc);
    CHECK(max_abs(z1.vx) == 0.0);
    CHECK(max_abs(z1.vz) == 0.0);
    CHECK(max_abs(z1.txx) == 0.0);
    CHECK(max_abs(z1.tzz) == 0.0);
    CHECK(max_abs(z1.txz) == 0.0);
    CHECK(z1.step_index == 1);

    const WaveField f = random_field(50, 7);
    WaveField g = f;
    for (auto* v : {&g.vx, &g.vz, &g.txx, &g.tzz, &g.txz})
      for (double& x : *v) x *= -2.75;
    const WaveField sf = step(f, m, dt, bc);
    WaveField sg = step(g, m, dt, bc);
    for (auto* v : {&sg.vx, &sg.vz, &sg.txx, &sg.tzz, &sg.txz})
      for (double& x : *v) x /= -2.75;
    CHECK(field_rel_diff(sf, sg) < 1e-14);
  }
}

TEST_CASE("step: equivariance under the four reflections in a homogeneous medium") {
  for (int d : {21, 24}) {
    const MediumSpec m = homogeneous(d);
    const double dt = cfl_timestep(m, 0.5);
    for (Boundary b : {Boundary::rigid, Boundary::sponge}) {
      const Propagator p(m, dt, {b, 5, 0.01});
      WaveField f = random_field(d, 11 + d);
      WaveField fx = mirror_x(f), fz = mirror_z(f), ft = transpose(f), fa = anti_transpose(f);
      for (int k = 0; k < 25; ++k)
        for (WaveField* w : {&f, &fx, &fz, &ft, &fa}) p.step(*w);
      CAPTURE(d);
      CHECK(field_rel_diff(mirror_x(f), fx) < 1e-10);
      CHECK(field_rel_diff(mirror_z(f), fz) < 1e-10);
      CHECK(field_rel_diff(transpose(f), ft) < 1e-10);
      CHECK(field_rel_diff(anti_transpose(f), fa) < 1e-10);
    }
  }
}

TEST_CASE("step: centred explosive impulse stays symmetric") {
  const int d = 31;
  const MediumSpec m = homogeneous(d);
  const Propagator p(m, cfl_timestep(m, 0.5), {Boundary::sponge, 6, 0.01});
  WaveField f = WaveField::zeros(d);
  f.txx[at(d, 15, 15)] = 1.0;
  f.tzz[at(d, 15, 15)] = 1.0;
  for (int k = 0; k < 40; ++k) p.step(f);
  CHECK(f.max_abs() > 0.0);
  CHECK(field_rel_diff(f, mirror_x(f)) < 1e-10);
  CHECK(field_rel_diff(f, mirror_z(f)) < 1e-10);
  CHECK(field_rel_diff(f, transpose(f)) < 1e-10);
  CHECK(field_rel_diff(f, anti_transpose(f)) < 1e-10);
}

TEST_CASE("step: OpenMP kernel matches the serial reference bit for bit") {
  const MediumSpec m = default_medium();
  for (Boundary b : {Boundary::rigid, Boundary::sponge}) {
    const Propagator p(m, cfl_timestep(m, 0.5), {b, 10, 0.0015});
    WaveField fast = random_field(50, 3), ref = fast;
    for (int k = 0; k < 30; ++k) {
      p.step(fast);
      reference::step(p, ref);
    }
    CHECK(fast == ref);
  }
}

TEST_CASE("step: non-finite values raise instability with the step index") {
  const MediumSpec m = homogeneous(20);
  const Propagator p(m, cfl_timestep(m, 0.5), {Boundary::rigid, 0, 0.0});
  WaveField f = WaveField::zeros(20);
  f.step_index = 41;
  f.txx[at(20, 10, 10)] = std::numeric_limits<double>::infinity();
  const std::string msg = message_of([&] { p.step(f); });
  CHECK(contains(msg, "42"));
  WaveField g = WaveField::zeros(20);
  g.txx[at(20, 10, 10)] = std::numeric_limits<double>::quiet_NaN();
  CHECK(kind_of([&] { p.step(g); }) == ErrorKind::instability);
  // a dt beyond the stability limit is refused up front
  CHECK(kind_of([&] { Propagator(m, 1.01 * cfl_timestep(m, 1.0)); }) == ErrorKind::invalid_argument);
}

TEST_CASE("plan_sampling and source validation") {
  const MediumSpec m = default_medium();
  const SamplingPlan plan = plan_sampling(SimConfig{}, m);
  CHECK(plan.steps_per_frame == 8);
  CHECK(plan.dt == doctest::Approx(1.0 / (119.0 * 8.0)).epsilon(1e-14));
  CHECK(plan.dt <= cfl_timestep(m, 0.5));
  CHECK(plan.total_steps == 1428);
  CHECK(plan.truncate_steps == 476);

  SimConfig c;
  c.truncate_time = 1.5;
  CHECK(contains(message_of([&] { plan_sampling(c, m); }), "sim.truncate_time"));
  c = {};
  c.n_frames = 0;
  CHECK(contains(message_of([&] { plan_sampling(c, m); }), "sim.n_frames"));
  c = {};
  c.dt = 1e-3;  // 1/119 s frame spacing is not a multiple of 1e-3
  CHECK(kind_of([&] { plan_sampling(c, m); }) == ErrorKind::invalid_argument);
  CHECK(contains(message_of([&] { plan_sampling(c, m); }), "sim.dt"));
  c.dt = 1.0 / 119.0 / 2.0;  // aligned but beyond the CFL limit
  CHECK(contains(message_of([&] { plan_sampling(c, m); }), "sim.dt"));
  c.dt = 1.0 / 119.0 / 10.0;
  CHECK(plan_sampling(c, m).steps_per_frame == 10);

  CHECK_NOTHROW(validate_source(SourceSpec{{10, 10}, 15.0, 1.0, 0.1}, m));
  CHECK(kind_of([&] { validate_source(SourceSpec{{0, 10}, 15.0, 1.0, 0.1}, m); }) == ErrorKind::invalid_argument);
  CHECK(kind_of([&] { validate_source(SourceSpec{{10, 49}, 15.0, 1.0, 0.1}, m); }) == ErrorKind::invalid_argument);
  // fewer than 10 points per shortest wavelength
  CHECK(kind_of([&] { validate_source(SourceSpec{{10, 10}, 40.0, 1.0, 0.1}, m); }) == ErrorKind::invalid_argument);
}

TEST_CASE("simulate: default protocol shape, provenance and determinism") {
  const MediumSpec m = default_medium();
  const SourceSpec s{{10, 10}, 15.0, 1.0, 0.1};
  const WaveDataset a = simulate(m, s, SimConfig{}, 5);
  REQUIRE(a.frames.size() == 119);
  CHECK(a.d == 50);
  CHECK(a.frame_dt * 119 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.frames.front().time_index == 0);
  CHECK(a.frames.back().time_index == 118);
  CHECK_NOTHROW(a.validate());
  CHECK(a.provenance.at("medium_hash") == m.hash());
  CHECK(a.provenance.at("seed") == 5);
  CHECK(a.provenance.at("observable") == "vz_at_nodes");
  CHECK(!a.standardization.applied);

  const WaveDataset b = simulate(m, s, SimConfig{}, 5);
  CHECK(a == b);

  double peak = 0.0;
  for (const auto& fr : a.frames) peak = std::max(peak, max_abs(fr.values));
  CHECK(peak > 0.0);
}

TEST_CASE("simulate: zero amplitude gives zero frames") {
  const WaveDataset z = simulate(default_medium(), SourceSpec{{10, 10}, 15.0, 0.0, 0.1}, SimConfig{});
  REQUIRE(z.frames.size() == 119);
  for (const auto& fr : z.frames)
    for (double v : fr.values) REQUIRE(v == 0.0);
}

TEST_CASE("simulate: linear in amplitude") {
  const MediumSpec m = default_medium();
  const WaveDataset one = simulate(m, SourceSpec{{10, 10}, 15.0, 1.0, 0.1}, SimConfig{});
  for (double a : {3.7, -0.25, 1e4}) {
    const WaveDataset scaled = simulate(m, SourceSpec{{10, 10}, 15.0, a, 0.1}, SimConfig{});
    double worst = 0.0, scale = 0.0;
    for (std::size_t f = 0; f < one.frames.size(); ++f)
      for (std::size_t k = 0; k < one.frames[f].values.size(); ++k) {
        worst = std::max(worst, std::abs(scaled.frames[f].values[k] - a * one.frames[f].values[k]));
        scale = std::max(scale, std::abs(scaled.frames[f].values[k]));
      }
    CAPTURE(a);
    CHECK(worst <= 1e-12 * scale);
  }
}

TEST_CASE("simulate: centre source in a homogeneous medium gives mirror-symmetric frames") {
  for (Boundary b : {Boundary::rigid, Boundary::sponge}) {
    const int d = 41;
    const MediumSpec m = homogeneous(d);
    SimConfig c;
    c.total_time = 0.6;
    c.truncate_time = 0.1;
    c.n_frames = 50;
    c.boundary = {b, 8, 0.004};
    const WaveDataset ds = simulate(m, SourceSpec{{20, 20}, 15.0, 1.0, 0.1}, c);
    double worst = 0.0, scale = 0.0;
    for (const auto& fr : ds.frames)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          const double v = fr.values[at(d, i, j)];
          scale = std::max(scale, std::abs(v));
          worst = std::max(worst, std::abs(v - fr.values[at(d, i, d - 1 - j)]));
          worst = std::max(worst, std::abs(v - fr.values[at(d, d - 1 - i, j)]));
        }
    CHECK(scale > 0.0);
    CHECK(worst <= 1e-10 * scale);
  }
}

TEST_CASE("stability over the default protocol") {
  const MediumSpec m = default_medium();
  const SimConfig c;
  const SamplingPlan plan = plan_sampling(c, m);
  const SourceSpec s{{10, 10}, 15.0, 1.0, 0.1};
  const Propagator p(m, plan.dt, c.boundary);
  WaveField f = WaveField::zeros(m.d);
  double vel = 0.0, stress = 0.0;
  for (std::int64_t n = 0; n < plan.total_steps; ++n) {
    p.inject(f, s.position, plan.dt * s.amplitude * ricker(n * plan.dt, s.f0, s.t0));
    p.step(f);
    vel = std::max({vel, max_abs(f.vx), max_abs(f.vz)});
    stress = std::max({stress, max_abs(f.txx), max_abs(f.tzz), max_abs(f.txz)});
  }
  MESSAGE("peak velocity " << vel << ", peak stress " << stress);
  CHECK(std::isfinite(vel));
  CHECK(std::isfinite(stress));
  CHECK(vel < 1e6 * s.amplitude);
  CHECK(stress < 1e6 * s.amplitude);
}

TEST_CASE("second-order convergence") {
  // dt is tied to dx so that both halve together; the reference is dx/4.
  const double dx = 20.0, dt = 2.5e-3;
  const int steps = 20;
  const ConvergenceRun c1 = gaussian_pulse_run(dx, dt, steps);
  const ConvergenceRun c2 = gaussian_pulse_run(dx / 2, dt / 2, 2 * steps);
  const ConvergenceRun ref = gaussian_pulse_run(dx / 4, dt / 4, 4 * steps);
  const double e1 = rms_error_on_coarse(c1, ref), e2 = rms_error_on_coarse(c2, ref);
  const double ratio = e1 / e2;
  MESSAGE("errors " << e1 << " " << e2 << " ratio " << ratio);
  CHECK(ratio >= 3.0);
  CHECK(ratio <= 5.0);
}

TEST_CASE("simulation config parsing") {
  using nlohmann::json;
  const SimulationSetup def = parse_simulation_config(json::object());
  CHECK(def.medium.d == 50);
  CHECK(def.medium.rho[at(50, 23, 23)] == doctest::Approx(154.88));
  CHECK(def.source.position == NodeIndex{10, 10});
  CHECK(def.sim.n_frames == 119);
  CHECK(plan_sampling(def.sim, def.medium).steps_per_frame == 8);

  const SimulationSetup s = parse_simulation_config(json::parse(R"({
    "medium": {"d": 20, "dx": 10, "damage_center": [9, 9]},
    "source": {"position": [4, 4], "amplitude": 2.0},
    "sim": {"boundary": "rigid", "n_frames": 50},
    "seed": 9})"));
  CHECK(s.medium.d == 20);
  CHECK(s.source.amplitude == 2.0);
  CHECK(s.sim.boundary.kind == Boundary::rigid);
  CHECK(s.seed == 9);

  const auto error_names = [](const char* text, const char* name) {
    const std::string msg = message_of([&] { parse_simulation_config(json::parse(text)); });
    CAPTURE(msg);
    CHECK(contains(msg, name));
  };
  error_names(R"({"sim": {"truncate_time": 1.5}})", "sim.truncate_time");
  error_names(R"({"sim": {"truncate_time": 2.0, "total_time": 1.5}})", "sim.truncate_time");
  error_names(R"({"sim": {"n_frames": "many"}})", "sim.n_frames");
  error_names(R"({"sim": {"dt": 0.01}})", "sim.dt");
  error_names(R"({"sim": {"boundary": "absorbing"}})", "sim.boundary");
  error_names(R"({"sim": {"frames": 3}})", "sim.frames");
  error_names(R"({"medium": {"d": 3}})", "medium.d");
  error_names(R"({"medium": {"damage_center": [1, 1]}})", "medium.damage_center");
  error_names(R"({"medium": {"damage_matrix": [[1]]}})", "medium.damage_matrix");
  error_names(R"({"source": {"position": [0, 3]}})", "source.position");
  error_names(R"({"source": {"f0": 40}})", "source.f0");
  error_names(R"({"extra": 1})", "extra");
}
