#include <cmath>

#include "wavecpd/error.hpp"
#include "wavecpd/wave_sim.hpp"

namespace wavecpd::reference {

namespace {

// Reads a component at (i, j), returning zero outside its active region.
struct Component {
  const std::vector<double>& v;
  int d;
  int row_lo, row_hi, col_lo, col_hi;

  double operator()(int i, int j) const {
    if (i < row_lo || i > row_hi || j < col_lo || j > col_hi) return 0.0;
    return v[static_cast<std::size_t>(i) * d + j];
  }
};

}  // namespace

void step(const Propagator& p, WaveField& f) {
  const int d = p.d();
  require(f.d == d, "reference::step: field size does not match medium");
  const auto at = [d](int i, int j) { return static_cast<std::size_t>(i) * d + j; };

  {
    const Component txx{f.txx, d, 0, d - 1, 0, d - 1};
    const Component tzz{f.tzz, d, 0, d - 1, 0, d - 1};
    const Component txz{f.txz, d, 0, d - 2, 0, d - 2};
    for (int i = 1; i <= d - 2; ++i)
      for (int j = 0; j <= d - 2; ++j)
        f.vx[at(i, j)] += p.bx[at(i, j)] * ((txx(i, j + 1) - txx(i, j)) + (txz(i, j) - txz(i - 1, j)));
    for (int i = 0; i <= d - 2; ++i)
      for (int j = 1; j <= d - 2; ++j)
        f.vz[at(i, j)] += p.bz[at(i, j)] * ((txz(i, j) - txz(i, j - 1)) + (tzz(i + 1, j) - tzz(i, j)));
  }
  {
    const Component vx{f.vx, d, 1, d - 2, 0, d - 2};
    const Component vz{f.vz, d, 0, d - 2, 1, d - 2};
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double dvx = vx(i, j) - vx(i, j - 1);
        const double dvz = vz(i, j) - vz(i - 1, j);
        f.txx[at(i, j)] += p.lam2mu[at(i, j)] * dvx + p.lam[at(i, j)] * dvz;
        f.tzz[at(i, j)] += p.lam[at(i, j)] * dvx + p.lam2mu[at(i, j)] * dvz;
      }
    for (int i = 0; i <= d - 2; ++i)
      for (int j = 0; j <= d - 2; ++j)
        f.txz[at(i, j)] += p.mu_xz[at(i, j)] * ((vx(i + 1, j) - vx(i, j)) + (vz(i, j + 1) - vz(i, j)));
  }

  if (p.boundary().kind == Boundary::sponge)
    for (std::size_t k = 0; k < f.vx.size(); ++k) {
      f.vx[k] *= p.taper_vx[k];
      f.vz[k] *= p.taper_vz[k];
      f.txx[k] *= p.taper_node[k];
      f.tzz[k] *= p.taper_node[k];
      f.txz[k] *= p.taper_xz[k];
    }

  ++f.step_index;
  f.t = static_cast<double>(f.step_index) * p.dt();
  for (const auto* v : {&f.vx, &f.vz, &f.txx, &f.tzz, &f.txz})
    for (double x : *v)
      if (!std::isfinite(x))
        fail(ErrorKind::instability, "solver instability: non-finite field at step " + std::to_string(f.step_index));
}

}  // namespace wavecpd::reference
