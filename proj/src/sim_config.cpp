#include <string>

#include "wavecpd/error.hpp"
#include "wavecpd/wave_sim.hpp"

namespace wavecpd {

namespace {

using nlohmann::json;

// Reads `obj[key]` as T, falling back to `fallback`; type errors name the field.
template <typename T>
T field(const json& obj, const char* section, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::invalid_argument, std::string(section) + "." + key + ": wrong type");
  }
}

NodeIndex node_field(const json& obj, const char* section, const char* key, NodeIndex fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
    fail(ErrorKind::invalid_argument, std::string(section) + "." + key + ": expected [row, col]");
  return {v[0].get<int>(), v[1].get<int>()};
}

const json& section(const json& doc, const char* name) {
  static const json empty = json::object();
  if (!doc.contains(name)) return empty;
  const auto& s = doc.at(name);
  if (!s.is_object()) fail(ErrorKind::invalid_argument, std::string(name) + ": expected an object");
  return s;
}

void reject_unknown(const json& obj, const char* name, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) fail(ErrorKind::invalid_argument, std::string(name) + "." + key + ": unknown key");
  }
}

}  // namespace

SimulationSetup parse_simulation_config(const json& doc) {
  if (!doc.is_object()) fail(ErrorKind::invalid_argument, "config: expected a JSON object");
  SimulationSetup out;
  for (const auto& [key, value] : doc.items())
    if (key != "medium" && key != "source" && key != "sim" && key != "seed")
      fail(ErrorKind::invalid_argument, key + ": unknown section");

  const auto& med = section(doc, "medium");
  reject_unknown(med, "medium", {"d", "dx", "rho0", "vp0", "vs0", "damage_center", "damage_matrix"});
  const int d = field(med, "medium", "d", 50);
  const double dx = field(med, "medium", "dx", 10.0);
  const double rho0 = field(med, "medium", "rho0", 2200.0);
  const double vp0 = field(med, "medium", "vp0", 3000.0);
  const double vs0 = field(med, "medium", "vs0", 0.6 * vp0);
  const NodeIndex damage_center = node_field(med, "medium", "damage_center", {23, 23});
  DamageMatrix damage = kDefaultDamage;
  if (med.contains("damage_matrix")) {
    const auto& m = med.at("damage_matrix");
    if (!m.is_array() || m.size() != kBlanket)
      fail(ErrorKind::invalid_argument, "medium.damage_matrix: expected 5 rows of 5 numbers");
    for (int a = 0; a < kBlanket; ++a) {
      if (!m[a].is_array() || m[a].size() != kBlanket)
        fail(ErrorKind::invalid_argument, "medium.damage_matrix: expected 5 rows of 5 numbers");
      for (int b = 0; b < kBlanket; ++b) {
        if (!m[a][b].is_number())
          fail(ErrorKind::invalid_argument, "medium.damage_matrix: non-numeric entry");
        damage[a][b] = m[a][b].get<double>();
      }
    }
  }
  require(d >= 7, "medium.d must be >= 7");
  require(dx > 0.0, "medium.dx must be positive");
  require(rho0 > 0.0, "medium.rho0 must be positive");
  require(vp0 > 0.0, "medium.vp0 must be positive");
  require(vs0 >= 0.0 && vs0 < vp0, "medium.vs0 must satisfy 0 <= vs0 < vp0");
  try {
    out.medium = build_medium(d, dx, rho0, vp0, vs0, damage_center, damage);
  } catch (const Error& e) {
    fail(ErrorKind::invalid_argument, std::string("medium.damage_center/damage_matrix: ") + e.what());
  }

  const auto& src = section(doc, "source");
  reject_unknown(src, "source", {"position", "f0", "amplitude", "t0"});
  out.source.position = node_field(src, "source", "position", {10, 10});
  out.source.f0 = field(src, "source", "f0", 15.0);
  out.source.amplitude = field(src, "source", "amplitude", 1.0);
  out.source.t0 = field(src, "source", "t0", out.source.f0 > 0 ? 1.5 / out.source.f0 : 0.0);
  validate_source(out.source, out.medium);

  const auto& sim = section(doc, "sim");
  reject_unknown(sim, "sim", {"total_time", "truncate_time", "n_frames", "dt", "cfl_safety", "boundary",
                              "sponge_width", "sponge_strength"});
  out.sim.total_time = field(sim, "sim", "total_time", 1.5);
  out.sim.truncate_time = field(sim, "sim", "truncate_time", 0.5);
  out.sim.n_frames = field(sim, "sim", "n_frames", 119);
  out.sim.dt = field(sim, "sim", "dt", 0.0);
  out.sim.cfl_safety = field(sim, "sim", "cfl_safety", 0.5);
  const auto boundary = field(sim, "sim", "boundary", std::string("sponge"));
  if (boundary == "sponge")
    out.sim.boundary.kind = Boundary::sponge;
  else if (boundary == "rigid")
    out.sim.boundary.kind = Boundary::rigid;
  else
    fail(ErrorKind::invalid_argument, "sim.boundary: expected \"sponge\" or \"rigid\"");
  out.sim.boundary.sponge_width = field(sim, "sim", "sponge_width", 10);
  out.sim.boundary.sponge_strength = field(sim, "sim", "sponge_strength", 0.0015);
  plan_sampling(out.sim, out.medium);

  out.seed = field(doc, "config", "seed", std::uint64_t{0});
  return out;
}

nlohmann::json to_json(const SourceSpec& s) {
  return {{"position", {s.position.row, s.position.col}}, {"f0", s.f0}, {"amplitude", s.amplitude}, {"t0", s.t0}};
}

nlohmann::json to_json(const SimConfig& c, const SamplingPlan& plan) {
  return {
      {"total_time", c.total_time},
      {"truncate_time", c.truncate_time},
      {"n_frames", c.n_frames},
      {"dt", plan.dt},
      {"steps_per_frame", plan.steps_per_frame},
      {"cfl_safety", c.cfl_safety},
      {"boundary", c.boundary.kind == Boundary::sponge ? "sponge" : "rigid"},
      {"sponge_width", c.boundary.sponge_width},
      {"sponge_strength", c.boundary.sponge_strength},
  };
}

}  // namespace wavecpd
