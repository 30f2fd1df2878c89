#pragma once

// Quadrature energies
//   ½||∇u||² − (1/q)∫ w |u|^q − (η/p) τ(||∇u||) ∫ |u|^p
// with w = h(εx) (non-autonomous) or w ≡ μ (autonomous), τ ≡ 1 when the
// functional is not truncated.

#include <cmath>
#include <optional>
#include <vector>

#include "normsol/error.hpp"
#include "normsol/field.hpp"
#include "normsol/landscape.hpp"
#include "normsol/potential.hpp"

namespace normsol {

struct EnergyParts {
  double grad_sq = 0.0;    // ||∇u||_2^2
  double sub = 0.0;        // ∫ w |u|^q
  double super = 0.0;      // ∫ |u|^p
  double tau = 1.0;        // τ(||∇u||_2)
};

class EnergyModel {
 public:
  EnergyModel(const Grid& grid, std::vector<double> weight, double q, double p, double eta,
              std::optional<TruncationProfile> truncation = std::nullopt)
      : grid_(grid), weight_(std::move(weight)), q_(q), p_(p), eta_(eta), truncation_(truncation) {
    grid.validate();
    detail::require(weight_.size() == grid.size(), "weight size does not match grid");
  }

  const Grid& grid() const { return grid_; }
  const std::optional<TruncationProfile>& truncation() const { return truncation_; }

  /// Same functional with τ ≡ 1.
  EnergyModel untruncated() const { return EnergyModel(grid_, weight_, q_, p_, eta_); }

  EnergyParts parts(const Field& u) const {
    check(u);
    EnergyParts e;
    e.grad_sq = grad_norm_sq(u);
    long double sub = 0.0L, super = 0.0L;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double m = std::abs(u[i]);
      sub += weight_[i] * std::pow(m, q_);
      super += std::pow(m, p_);
    }
    const double dv = grid_.cell_volume();
    e.sub = static_cast<double>(sub) * dv;
    e.super = static_cast<double>(super) * dv;
    e.tau = truncation_ ? tau(std::sqrt(e.grad_sq), *truncation_) : 1.0;
    return e;
  }

  double energy(const EnergyParts& e) const {
    return 0.5 * e.grad_sq - e.sub / q_ - eta_ / p_ * e.tau * e.super;
  }

  double energy(const Field& u) const { return energy(parts(u)); }

  /// L²-gradient
  ///   (1 − (η/p) τ'(σ) ∫|u|^p / σ)(−Δu) − w|u|^{q−2}u − η τ(σ) |u|^{p−2}u,  σ = ||∇u||_2.
  Field gradient(const Field& u) const {
    check(u);
    const double sigma = grad_norm(u);
    double t = 1.0, kinetic_factor = 1.0;
    if (truncation_) {
      t = tau(sigma, *truncation_);
      const double tp = tau_prime(sigma, *truncation_);
      if (tp != 0.0) kinetic_factor = 1.0 - eta_ / p_ * tp * lp_power(u, p_) / sigma;
    }
    Field g = neg_laplacian(u);
    g *= Complex(kinetic_factor);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double m = std::abs(u[i]);
      if (m == 0.0) continue;
      const double coeff = weight_[i] * std::pow(m, q_ - 2.0) + eta_ * t * std::pow(m, p_ - 2.0);
      g[i] -= coeff * u[i];
    }
    if (u.is_real()) g.make_real();
    return g;
  }

 private:
  void check(const Field& u) const { detail::require(u.grid() == grid_, "field grid differs from model grid"); }

  Grid grid_;
  std::vector<double> weight_;
  double q_, p_, eta_;
  std::optional<TruncationProfile> truncation_;
};

inline EnergyModel full_model(const ProblemParams& params, const PotentialSpec& potential, const Grid& grid) {
  return EnergyModel(grid, sample_potential(potential, grid, params.epsilon), params.q, params.p, params.eta);
}

inline EnergyModel truncated_model(const ProblemParams& params, const PotentialSpec& potential, const Grid& grid,
                                   const TruncationProfile& profile) {
  return EnergyModel(grid, sample_potential(potential, grid, params.epsilon), params.q, params.p, params.eta,
                     profile);
}

inline EnergyModel autonomous_model(const ProblemParams& params, double mu, const Grid& grid,
                                    std::optional<TruncationProfile> profile = std::nullopt) {
  detail::require(mu > 0.0, "mu must be positive");
  return EnergyModel(grid, std::vector<double>(grid.size(), mu), params.q, params.p, params.eta, profile);
}

inline double energy_full(const Field& u, const ProblemParams& params, const PotentialSpec& potential) {
  return full_model(params, potential, u.grid()).energy(u);
}

inline double energy_truncated(const Field& u, const ProblemParams& params, const PotentialSpec& potential,
                               const TruncationProfile& profile) {
  return truncated_model(params, potential, u.grid(), profile).energy(u);
}

inline double j_mu(const Field& u, double mu, const ProblemParams& params) {
  return autonomous_model(params, mu, u.grid()).energy(u);
}

inline double j_mu_truncated(const Field& u, double mu, const ProblemParams& params,
                             const TruncationProfile& profile) {
  return autonomous_model(params, mu, u.grid(), profile).energy(u);
}

inline Field gradient_truncated(const Field& u, const ProblemParams& params, const PotentialSpec& potential,
                                const TruncationProfile& profile) {
  return truncated_model(params, potential, u.grid(), profile).gradient(u);
}

}  // namespace normsol
