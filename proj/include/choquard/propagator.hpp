#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "choquard/field.hpp"
#include "choquard/fft.hpp"
#include "choquard/params.hpp"
#include "choquard/potential.hpp"
#include "choquard/resample.hpp"
#include "choquard/riesz.hpp"

namespace choquard {

class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EvolveError : public std::runtime_error {
 public:
  EvolveError(const std::string& msg, long step) : std::runtime_error(msg), step_index(step) {}
  long step_index;
};

/// psi0(x) = eps^-gamma (U + w)(eps^-beta x) exp(i x.v / eps) on the target
/// grid, with the profile moved over by exact Fourier evaluation.  Hard
/// preconditions: at least 8 target cells across the dilated profile
/// half-width, and at least 8 cells per phase wavelength.
inline ScalarField build_initial_data(const ScalarField& profile,
                                      const ModelParams& mp,
                                      const GridSpec& target) {
  const double ht = target.spacing();
  const double hw = profile_half_width(profile);
  const double scaled_hw = hw * std::pow(mp.eps, mp.beta);
  if (scaled_hw < 8.0 * ht)
    throw ResolutionError(
        "initial data: dilated profile half-width " + std::to_string(scaled_hw) +
        " spans fewer than 8 grid cells (h = " + std::to_string(ht) + ")");
  const double vnorm = mp.v_norm();
  if (vnorm > 0.0) {
    const double wavelength = 2.0 * std::numbers::pi * mp.eps / vnorm;
    if (wavelength < 8.0 * ht)
      throw ResolutionError(
          "initial data: phase wavelength " + std::to_string(wavelength) +
          " spans fewer than 8 grid cells (h = " + std::to_string(ht) + ")");
  }

  ScalarField prof = resample_dilate(profile, std::pow(mp.eps, -mp.beta), target);
  ScalarField psi0 = ScalarField::zeros(target, PayloadKind::Complex);
  const double amp = std::pow(mp.eps, -mp.gamma);
  for (std::size_t i = 0; i < psi0.size(); ++i) {
    const Vec3 x = target.point(i);
    double ph = 0.0;
    for (int d = 0; d < target.dim; ++d) ph += x[d] * mp.v[d];
    ph /= mp.eps;
    psi0.data[i] = amp * prof.data[i].real() *
                   std::exp(std::complex<double>(0.0, ph));
  }
  const double c0 = charge(profile);
  const double c1 = charge(psi0);
  if (std::abs(c1 - c0) > 1e-8 * c0)
    throw std::runtime_error("initial data: charge mismatch " +
                             std::to_string(std::abs(c1 - c0) / c0) +
                             " after rescaling (tails clipped or profile "
                             "under-resolved)");
  return psi0;
}

struct AdmissibilityReport {
  double charge_match = 0.0;      // | ||U+w||^2 - sigma |
  double w_norm = 0.0;            // H1 norm of w
  double w_bound = 0.0;           // K eps^(2(beta-1))
  double grad_S_sup = 0.0;
  double potential_moment = 0.0;  // int V u_eps^2(0)
  double K = 0.0;
  bool admissible = false;
  std::string violation;          // empty when admissible
};

/// The four conditions of the admissible set; w measured in H1.
inline AdmissibilityReport check_admissibility(const ScalarField& U,
                                               const ScalarField* w,
                                               double S0_gradient_sup,
                                               const PotentialSpec& V,
                                               const ModelParams& mp, double K) {
  AdmissibilityReport rep;
  rep.K = K;
  rep.grad_S_sup = S0_gradient_sup;
  const GridSpec& g = U.grid;
  ScalarField combined = U;
  if (w) {
    if (!(w->grid == g))
      throw std::invalid_argument("check_admissibility: grid mismatch");
    for (std::size_t i = 0; i < combined.size(); ++i)
      combined.data[i] += w->data[i];
    rep.w_norm = std::sqrt(charge(*w) + grad_norm_sq(*w));
  }
  const double sigma = charge(U);
  rep.charge_match = std::abs(charge(combined) - sigma);
  rep.w_bound = K * std::pow(mp.eps, 2.0 * (mp.beta - 1.0));
  // int V(x) u_eps^2(0, x) dx = int V(eps^beta y) (U+w)^2(y) dy by the charge
  // normalization; V evaluated in closed form at the dilated points
  const double scale = std::pow(mp.eps, mp.beta);
  double moment = 0.0;
  for (std::size_t i = 0; i < combined.size(); ++i) {
    Vec3 y = g.point(i);
    for (int d = 0; d < 3; ++d) y[d] *= scale;
    moment += potential_eval(V, y, g.dim) * std::norm(combined.data[i]);
  }
  rep.potential_moment = moment * g.cell_volume();

  if (rep.charge_match > 1e-6 * sigma)
    rep.violation = "charge: ||U+w||^2 != ||U||^2";
  else if (!(rep.w_norm < rep.w_bound))
    rep.violation = "w: H1 norm not below K eps^(2(beta-1))";
  else if (!(rep.grad_S_sup <= K))
    rep.violation = "phase: sup |grad S0| exceeds K";
  else if (!(rep.potential_moment <= K))
    rep.violation = "potential moment exceeds K";
  rep.admissible = rep.violation.empty();
  return rep;
}

/// Strang-split integrator for the rescaled problem: half potential phase,
/// full kinetic step in spectral space, half potential phase.  The nonlocal
/// multiplier W depends only on |psi|, which the phase substeps leave
/// untouched, so W carries over from the closing half-step of one step to the
/// opening half-step of the next; one convolution per step.
class Propagator {
 public:
  Propagator(const ScalarField& psi0, const ModelParams& mp, const PotentialSpec& V,
             std::shared_ptr<const RieszOperator> riesz, double dt,
             double kappa_coeff = -1.0)
      : grid_(psi0.grid),
        mp_(mp),
        riesz_(std::move(riesz)),
        dt_(dt),
        kappa_(kappa_coeff >= 0.0 ? kappa_coeff : kappa(mp)),
        ct_(std::vector<int>(static_cast<std::size_t>(psi0.grid.dim), psi0.grid.n)) {
    if (!(dt > 0.0)) throw std::invalid_argument("propagator: dt must be positive");
    psi_.assign(psi0.data.begin(), psi0.data.end());
    Vg_.resize(grid_.npoints());
    auto [vf, gf] = sample_on_grid(V, grid_);
    for (std::size_t i = 0; i < Vg_.size(); ++i) Vg_[i] = vf.data[i].real();
    (void)gf;
    W_.assign(grid_.npoints(), 0.0);
    gbuf_.resize(grid_.npoints());
    conv_.resize(grid_.npoints());
    build_kinetic_phase();
    charge0_ = current_charge();
  }

  const GridSpec& grid() const { return grid_; }
  const ModelParams& params() const { return mp_; }
  double t() const { return t_; }
  double dt() const { return dt_; }
  long steps_taken() const { return step_; }
  double kappa_coeff() const { return kappa_; }
  double charge_initial() const { return charge0_; }

  ScalarField psi() const {
    ScalarField f = ScalarField::zeros(grid_, PayloadKind::Complex);
    std::copy(psi_.begin(), psi_.end(), f.data.begin());
    return f;
  }

  double current_charge() const {
    double s = 0.0;
    for (const auto& z : psi_) s += std::norm(z);
    return s * grid_.cell_volume();
  }

  /// Largest dt allowed by the phase-resolution rule
  /// dt <= c_t eps / max(|V| + kappa |W|), evaluated on the given state.
  static double resolution_dt(const ScalarField& psi0, const ModelParams& mp,
                              const PotentialSpec& V, const RieszOperator& riesz,
                              double c_t = 0.5, double kappa_coeff = -1.0) {
    const GridSpec& g = psi0.grid;
    const double kap = kappa_coeff >= 0.0 ? kappa_coeff : kappa(mp);
    std::vector<double> gb(g.npoints()), cv(g.npoints());
    for (std::size_t i = 0; i < gb.size(); ++i)
      gb[i] = std::pow(std::abs(psi0.data[i]), mp.p);
    riesz.convolve_raw(gb.data(), cv.data());
    double m = 0.0;
    for (std::size_t i = 0; i < gb.size(); ++i) {
      const Vec3 x = g.point(i);
      const double au = std::abs(psi0.data[i]);
      const double wmod =
          au > 0.0 ? cv[i] * std::pow(au, mp.p - 2.0) : 0.0;
      m = std::max(m, std::abs(potential_eval(V, x, g.dim)) + kap * std::abs(wmod));
    }
    if (!(m > 0.0)) return c_t * mp.eps;  // free linear flight: no phase limit
    return c_t * mp.eps / m;
  }

  void step() {
    if (!W_valid_) compute_W();
    phase_half_step();
    kinetic_step();
    compute_W();
    phase_half_step();
    t_ += dt_;
    ++step_;
  }

 private:
  void build_kinetic_phase() {
    const int n = grid_.n;
    const int n1 = grid_.dim >= 2 ? n : 1;
    const int n2 = grid_.dim >= 3 ? n : 1;
    expK_.resize(grid_.npoints());
    std::size_t i = 0;
    for (int i0 = 0; i0 < n; ++i0) {
      const double k0 = grid_.wavenumber(i0);
      for (int i1 = 0; i1 < n1; ++i1) {
        const double k1 = grid_.dim >= 2 ? grid_.wavenumber(i1) : 0.0;
        for (int i2 = 0; i2 < n2; ++i2, ++i) {
          const double k2 = grid_.dim >= 3 ? grid_.wavenumber(i2) : 0.0;
          const double ph = -dt_ * mp_.eps * 0.5 * (k0 * k0 + k1 * k1 + k2 * k2);
          expK_[i] = std::exp(std::complex<double>(0.0, ph));
        }
      }
    }
  }

  void compute_W() {
    double mx = 0.0;
    for (std::size_t i = 0; i < psi_.size(); ++i) {
      const double a = std::abs(psi_[i]);
      gbuf_[i] = std::pow(a, mp_.p);
      mx = std::max(mx, a);
    }
    if (!std::isfinite(mx))
      throw EvolveError("propagator: non-finite field", step_);
    riesz_->convolve_raw(gbuf_.data(), conv_.data());
    if (mp_.p == 2.0) {
      std::copy(conv_.begin(), conv_.end(), W_.begin());
    } else {
      for (std::size_t i = 0; i < psi_.size(); ++i) {
        const double a = std::abs(psi_[i]);
        W_[i] = a > 0.0 ? conv_[i] * std::pow(a, mp_.p - 2.0) : 0.0;
      }
    }
    W_valid_ = true;
  }

  void phase_half_step() {
    const double c = -0.5 * dt_ / mp_.eps;
    for (std::size_t i = 0; i < psi_.size(); ++i) {
      const double ph = c * (Vg_[i] - kappa_ * W_[i]);
      psi_[i] *= std::complex<double>(std::cos(ph), std::sin(ph));
    }
    // |psi| untouched: W stays valid
  }

  void kinetic_step() {
    std::copy(psi_.begin(), psi_.end(), ct_.data());
    ct_.forward();
    std::complex<double>* d = ct_.data();
    for (std::size_t i = 0; i < psi_.size(); ++i) d[i] *= expK_[i];
    ct_.backward();
    const double inv = 1.0 / static_cast<double>(ct_.size());
    for (std::size_t i = 0; i < psi_.size(); ++i) psi_[i] = d[i] * inv;
    W_valid_ = false;
  }

  GridSpec grid_;
  ModelParams mp_;
  std::shared_ptr<const RieszOperator> riesz_;
  double dt_;
  double kappa_;
  ComplexTransform ct_;
  std::vector<std::complex<double>> psi_;
  std::vector<std::complex<double>> expK_;
  std::vector<double> Vg_, W_, gbuf_, conv_;
  bool W_valid_ = false;
  double t_ = 0.0;
  long step_ = 0;
  double charge0_ = 0.0;
};

/// Advance to time T (T/dt rounded to whole steps), invoking the callback at
/// t = 0, every `stride` steps, and at the final step.  Escalates the
/// boundary-touch condition to a failure.
inline void evolve(Propagator& prop, double T, long stride,
                   const std::function<void(Propagator&)>& callback) {
  if (!(T >= 0.0)) throw std::invalid_argument("evolve: T must be >= 0");
  if (stride < 1) stride = 1;
  const long nsteps = T > 0.0 ? static_cast<long>(std::llround(T / prop.dt())) : 0;
  auto guard = [&]() {
    ScalarField f = prop.psi();
    const Vec3 q = barycenter(f);
    const double outside = mass_outside_ball(f, q, f.grid.L / 2.0);
    if (outside > 1e-4)
      throw EvolveError("evolve: field touches the box boundary (mass outside " +
                            std::to_string(outside) + ")",
                        prop.steps_taken());
  };
  guard();
  callback(prop);
  for (long k = 1; k <= nsteps; ++k) {
    prop.step();
    if (k % stride == 0 || k == nsteps) {
      guard();
      callback(prop);
    }
  }
}

}  // namespace choquard
