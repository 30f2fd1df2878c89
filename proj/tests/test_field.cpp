#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "support.hpp"

using namespace normsol;
using namespace normsol::testing;

namespace {

Field gaussian(const Grid& g, double w, double amp = 1.0, Point c = {0.0, 0.0, 0.0}) {
  return Field::sample(g, [&](const Point& x) {
    double r2 = 0.0;
    for (int d = 0; d < g.N; ++d) r2 += (x[d] - c[d]) * (x[d] - c[d]);
    return amp * std::exp(-0.5 * r2 / (w * w));
  });
}

// Periodic second-order central differences, summed over axes.
double fd_grad_norm_sq(const Field& u) {
  const auto& g = u.grid();
  const double h = g.spacing();
  long double s = 0.0L;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto idx = g.indices(i);
    for (int d = 0; d < g.N; ++d) {
      auto fwd = idx, bwd = idx;
      fwd[d] = (idx[d] + 1) % g.M;
      bwd[d] = (idx[d] + g.M - 1) % g.M;
      auto flat = [&](const std::array<int, 3>& k) {
        std::size_t f = 0;
        for (int e = 0; e < g.N; ++e) f = f * g.M + k[e];
        return f;
      };
      s += std::norm((u[flat(fwd)] - u[flat(bwd)]) / (2.0 * h));
    }
  }
  return static_cast<double>(s) * g.cell_volume();
}

Field scaled_to_grad(Field u, double sigma) {
  u *= Complex(sigma / grad_norm(u));
  return u;
}

}  // namespace

TEST(Quadrature, ConstantMass) {
  for (int N : {1, 2, 3}) {
    const Grid g{N, 12.5, 16};
    const Field u = Field::sample(g, [](const Point&) { return 0.7; });
    EXPECT_NEAR(mass(u) / (0.49 * std::pow(12.5, N)), 1.0, 1e-14);
    EXPECT_EQ(grad_norm_sq(u), 0.0);
  }
}

TEST(Quadrature, GaussianMass) {
  for (int N : {1, 2, 3}) {
    const Grid g{N, 60.0, N == 3 ? 64 : 128};
    const double w = 2.5;
    const Field u = gaussian(g, w);
    EXPECT_NEAR(mass(u) / std::pow(std::numbers::pi * w * w, 0.5 * N), 1.0, 1e-10) << "N = " << N;
    // ‖∇u‖² = (N/2) w^{-2} ∫|u|².
    EXPECT_NEAR(grad_norm_sq(u) / (0.5 * N / (w * w) * mass(u)), 1.0, 1e-10);
    // ∫|u|^4 = (π w²/2)^{N/2}
    EXPECT_NEAR(lp_power(u, 4.0) / std::pow(0.5 * std::numbers::pi * w * w, 0.5 * N), 1.0, 1e-10);
  }
}

TEST(Quadrature, ParsevalAgainstFiniteDifferences) {
  double prev_err = 0.0;
  for (int M : {128, 256, 512}) {
    const Grid g{1, 40.0, M};
    const Field u = gaussian(g, 1.5, 1.0, {0.3, 0.0, 0.0});
    const double spec = grad_norm_sq(u);
    const double err = std::abs(fd_grad_norm_sq(u) - spec) / spec;
    const double h = g.spacing();
    EXPECT_LT(err, 0.5 * h * h);
    if (prev_err > 0.0) {
      EXPECT_NEAR(prev_err / err, 4.0, 0.1);
    }
    prev_err = err;
  }
  const Grid g2{2, 40.0, 128};
  const Field v = gaussian(g2, 2.0);
  const double h = g2.spacing();
  EXPECT_LT(std::abs(fd_grad_norm_sq(v) - grad_norm_sq(v)) / grad_norm_sq(v), 0.5 * h * h);
}

TEST(Normalize, Properties) {
  std::mt19937_64 rng(11);
  const Grid g = desk_grid();
  for (int k = 0; k < 20; ++k) {
    const Field u = random_localized(g, rng, k % 2 == 1);
    const Field n = normalize_to_mass(u, 0.5);
    EXPECT_NEAR(mass(n) / 0.25, 1.0, 1e-14);
    const Field again = normalize_to_mass(n, 0.5);
    for (std::size_t i = 0; i < n.size(); ++i) EXPECT_NEAR(std::abs(again[i] - n[i]), 0.0, 1e-15);
    const Field scaled = normalize_to_mass(3.7 * u, 0.5);
    for (std::size_t i = 0; i < n.size(); ++i) EXPECT_NEAR(std::abs(scaled[i] - n[i]), 0.0, 1e-15);
  }
  try {
    normalize_to_mass(Field(g), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroField);
  }
}

TEST(Dilate, IdentityAndMass) {
  const Grid g{1, 200.0, 512};
  const Field u = gaussian(g, 4.0);
  const Field same = dilate(u, 1.0);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(same[i], u[i]);
  for (double t : {0.5, 0.8, 1.6, 2.0}) {
    const Field ut = dilate(u, t);
    EXPECT_NEAR(mass(ut) / mass(u), 1.0, 1e-10) << "t = " << t;
    EXPECT_NEAR(grad_norm(ut) / grad_norm(u), t, 1e-8 * t) << "t = " << t;
    EXPECT_TRUE(ut.is_real());
  }
  const Grid g2{2, 60.0, 64};
  const Field v = gaussian(g2, 3.0, 1.0, {1.0, -2.0, 0.0});
  const Field vt = dilate(v, 0.7);
  EXPECT_NEAR(mass(vt) / mass(v), 1.0, 1e-10);
  EXPECT_NEAR(grad_norm(vt) / grad_norm(v), 0.7, 1e-8);
}

TEST(Dilate, SupportOverflow) {
  const Grid g{1, 200.0, 512};
  try {
    dilate(gaussian(g, 10.0), 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SupportOverflow);
  }
}

TEST(Dilate, AutonomousEnergyScaling) {
  const auto prm = desk_params();
  const auto rep = compute_landscape(prm, 1.0);
  const Grid g{1, 400.0, 1024};
  const Field u = normalize_to_mass(gaussian(g, 6.0, 1.0, {2.0, 0.0, 0.0}), prm.a);
  const auto model = autonomous_model(prm, 0.75, g, rep.profile());
  const auto base = model.parts(u);
  const double gq = prm.q * rep.gamma_q, gp = prm.p * rep.gamma_p;
  for (double t : {0.3, 0.6, 1.5}) {
    const auto e = model.parts(dilate(u, t));
    EXPECT_NEAR(e.grad_sq / (t * t * base.grad_sq), 1.0, 1e-6);
    EXPECT_NEAR(e.sub / (std::pow(t, gq) * base.sub), 1.0, 1e-6);
    EXPECT_NEAR(e.super / (std::pow(t, gp) * base.super), 1.0, 1e-6);
    const double sigma = t * std::sqrt(base.grad_sq);
    // parts().sub already carries the weight μ.
    const double expect = 0.5 * t * t * base.grad_sq - 1.0 / prm.q * std::pow(t, gq) * base.sub -
                          prm.eta / prm.p * tau(sigma, rep.profile()) * std::pow(t, gp) * base.super;
    EXPECT_NEAR(model.energy(e) / expect, 1.0, 1e-6) << "t = " << t;
  }
}

TEST(Energy, PlateauAgreement) {
  const auto prm = desk_params();
  const auto pot = desk_potential();
  const auto rep = compute_landscape(prm, pot.h_max);
  const Grid g = desk_grid();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> width(15.0, 60.0), shift(-100.0, 100.0);
  for (int k = 0; k < 30; ++k) {
    const Field u = normalize_to_mass(gaussian(g, width(rng), 1.0, {shift(rng), 0.0, 0.0}), prm.a);
    ASSERT_LT(grad_norm(u), rep.R0);
    EXPECT_EQ(energy_truncated(u, prm, pot, rep.profile()), energy_full(u, prm, pot));
    EXPECT_EQ(j_mu_truncated(u, 0.8, prm, rep.profile()), j_mu(u, 0.8, prm));
  }
}

TEST(Energy, TruncatedLowerBound) {
  const auto prm = desk_params();
  const auto pot = desk_potential();
  const auto rep = compute_landscape(prm, pot.h_max);
  const auto c = rep.constants();
  const Grid g = desk_grid();
  const auto model = truncated_model(prm, pot, g, rep.profile());
  std::mt19937_64 rng(17);
  for (int k = 0; k < 200; ++k) {
    const Field u = normalize_to_mass(random_localized(g, rng, k % 3 == 0), prm.a);
    const double e = model.energy(u);
    EXPECT_GE(e, g_bar(grad_norm(u), prm, pot.h_max, c, rep.profile())) << "sample " << k;
    // h <= h_max pointwise, so the autonomous bound at h_max sits below as well.
    EXPECT_GE(e, j_mu_truncated(u, pot.h_max, prm, rep.profile()) - 1e-15 * std::abs(e));
  }
}

TEST(Energy, SmallDilationIsNegative) {
  const auto prm = desk_params();
  const auto rep = compute_landscape(prm, 1.0);
  const Grid g{1, 16384.0, 8192};
  for (double mu : {0.5, 1.0}) {
    const Field u = normalize_to_mass(gaussian(g, 8.0), prm.a);
    const Field ut = dilate(u, 1e-2);
    EXPECT_LT(j_mu_truncated(ut, mu, prm, rep.profile()), 0.0);
  }
}

class GradientCheck : public ::testing::TestWithParam<double> {};

TEST_P(GradientCheck, DirectionalDerivative) {
  const auto prm = desk_params();
  const auto pot = desk_potential();
  const auto rep = compute_landscape(prm, pot.h_max);
  const double sigma = GetParam() * rep.R0;
  // Resolve the profile finely enough that the spectral derivative is exact.
  const Grid g{1, 256.0, 1024};
  Field u = Field::sample(g, [](const Point& x) {
    return std::exp(-0.5 * x[0] * x[0] / 25.0) * (1.0 + 0.3 * std::sin(x[0] / 3.0));
  });
  u = scaled_to_grad(u, sigma);
  const auto model = truncated_model(prm, pot, g, rep.profile());
  const Field grad = model.gradient(u);
  EXPECT_TRUE(grad.is_real());
  std::mt19937_64 rng(23);
  const double delta = 1e-5;
  for (int k = 0; k < 20; ++k) {
    // Directions live where u lives; far-away bumps give derivatives below
    // the roundoff of the energy and make the difference quotient useless.
    std::uniform_real_distribution<double> coef(-0.5, 0.5), freq(0.05, 2.0), ph(0.0, 6.283);
    const double c1 = coef(rng), c2 = coef(rng), c3 = coef(rng), k1 = freq(rng), k2 = freq(rng), p1 = ph(rng);
    Field phi = u;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double x = g.coordinate(static_cast<int>(i));
      const double env = std::exp(-0.5 * x * x / 64.0);
      phi[i] = u[i] * (1.0 + c1 * std::cos(k1 * x + p1)) + c2 * env * std::sin(k2 * x) * std::abs(u[0] + u[g.M / 2]) +
               c3 * env * std::abs(u[g.M / 2]);
    }
    phi *= Complex(l2_norm(u) / l2_norm(phi));
    Field up = u, um = u;
    up.axpy(delta, phi);
    um.axpy(-delta, phi);
    const double fd = (model.energy(up) - model.energy(um)) / (2.0 * delta);
    const double an = real_inner(grad, phi);
    EXPECT_NEAR(an / fd, 1.0, 1e-6) << "sigma = " << sigma << ", direction " << k;
  }
}

// Below the plateau edge, inside the transition band, and beyond R1.
INSTANTIATE_TEST_SUITE_P(Regimes, GradientCheck, ::testing::Values(0.5, 5000.0, 12000.0));

TEST(Gradient, PlateauMatchesFullDerivative) {
  const auto prm = desk_params();
  const auto pot = desk_potential();
  const auto rep = compute_landscape(prm, pot.h_max);
  const Grid g = desk_grid();
  const Field u = normalize_to_mass(gaussian(g, 30.0, 1.0, {12.0, 0.0, 0.0}), prm.a);
  ASSERT_LT(grad_norm(u), rep.R0);
  const Field gt = gradient_truncated(u, prm, pot, rep.profile());
  const Field gf = full_model(prm, pot, g).gradient(u);
  const auto w = sample_potential(pot, g, prm.epsilon);
  const Field lap = neg_laplacian(u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    EXPECT_EQ(gt[i], gf[i]);
    const double m = std::abs(u[i]);
    const Complex expect = lap[i] - w[i] * std::pow(m, prm.q - 2) * u[i] - prm.eta * std::pow(m, prm.p - 2) * u[i];
    EXPECT_NEAR(std::abs(gt[i] - expect), 0.0, 1e-15);
  }
}

TEST(Gradient, ZeroField) {
  const auto prm = desk_params();
  const auto pot = desk_potential();
  const auto rep = compute_landscape(prm, pot.h_max);
  const Field g = gradient_truncated(Field(desk_grid()), prm, pot, rep.profile());
  for (const auto& z : g.values()) EXPECT_EQ(z, Complex(0.0));
}

TEST(Laplacian, Symmetric) {
  std::mt19937_64 rng(29);
  for (int N : {1, 2}) {
    const Grid g{N, 128.0, N == 1 ? 512 : 64};
    for (int k = 0; k < 10; ++k) {
      const Field u = random_localized(g, rng, true);
      const Field v = random_localized(g, rng, true);
      Complex rhs = 0.0;
      for (int d = 0; d < N; ++d) rhs += inner(partial(u, d), partial(v, d));
      const Complex lhs = inner(neg_laplacian(u), v);
      EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST(GagliardoNirenberg, HoldsOnRandomFields) {
  std::mt19937_64 rng(31);
  struct Case {
    int N;
    double t;
    int M;
  };
  for (const auto& cs : {Case{1, 4.0, 1024}, Case{1, 8.0, 1024}, Case{1, 3.0, 1024}, Case{2, 4.0, 128}}) {
    const Grid g{cs.N, 256.0, cs.M};
    const double C = gn_constant(cs.N, cs.t);
    const double gam = gamma(cs.t, cs.N);
    for (int k = 0; k < 50; ++k) {
      const Field u = random_localized(g, rng, k % 2 == 0);
      const double lhs = lp_norm(u, cs.t);
      const double rhs = C * std::pow(l2_norm(u), 1.0 - gam) * std::pow(grad_norm(u), gam);
      EXPECT_LE(lhs, rhs * (1.0 + 1e-3)) << "N = " << cs.N << ", t = " << cs.t;
    }
  }
}

TEST(Invariance, GlobalPhase) {
  const auto prm = desk_params();
  const auto pot = desk_potential();
  const auto rep = compute_landscape(prm, pot.h_max);
  const Grid g = desk_grid();
  std::mt19937_64 rng(37);
  for (int k = 0; k < 10; ++k) {
    const Field u = normalize_to_mass(random_localized(g, rng, true), prm.a);
    const Field v = std::polar(1.0, 0.3 + k) * u;
    EXPECT_NEAR(energy_full(v, prm, pot), energy_full(u, prm, pot), 1e-12 * std::abs(energy_full(u, prm, pot)));
    EXPECT_NEAR(energy_truncated(v, prm, pot, rep.profile()), energy_truncated(u, prm, pot, rep.profile()),
                1e-12 * std::abs(energy_truncated(u, prm, pot, rep.profile())));
    EXPECT_NEAR(j_mu(v, 0.7, prm), j_mu(u, 0.7, prm), 1e-12 * std::abs(j_mu(u, 0.7, prm)));
  }
}

TEST(Invariance, WholeCellTranslation) {
  const auto prm = desk_params();
  const auto rep = compute_landscape(prm, 1.0);
  std::mt19937_64 rng(41);
  for (int N : {1, 2}) {
    const Grid g{N, 128.0, N == 1 ? 256 : 64};
    const Field u = normalize_to_mass(random_localized(g, rng, true), prm.a);
    for (int shift : {1, 7, 30}) {
      Field v(g);
      for (std::size_t i = 0; i < u.size(); ++i) {
        auto idx = g.indices(i);
        idx[0] = (idx[0] + shift) % g.M;
        std::size_t f = 0;
        for (int d = 0; d < N; ++d) f = f * g.M + idx[d];
        v[f] = u[i];
      }
      EXPECT_NEAR(j_mu(v, 0.9, prm), j_mu(u, 0.9, prm), 1e-12 * std::abs(j_mu(u, 0.9, prm)));
      EXPECT_NEAR(j_mu_truncated(v, 0.9, prm, rep.profile()), j_mu_truncated(u, 0.9, prm, rep.profile()),
                  1e-12 * std::abs(j_mu(u, 0.9, prm)));
    }
  }
}

TEST(Translate, MatchesShiftedSample) {
  const Grid g{1, 100.0, 256};
  const Field u = gaussian(g, 3.0);
  const Field v = translate(u, {7.3, 0.0, 0.0});
  const Field expect = gaussian(g, 3.0, 1.0, {7.3, 0.0, 0.0});
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(std::abs(v[i] - expect[i]), 0.0, 1e-12);
}

TEST(BoundaryFraction, Shell) {
  const Grid g{1, 100.0, 256};
  EXPECT_LT(boundary_mass_fraction(gaussian(g, 3.0)), 1e-30);
  const Field flat = Field::sample(g, [](const Point&) { return 1.0; });
  EXPECT_NEAR(boundary_mass_fraction(flat), 0.1, 1e-2);
}

TEST(NsfFormat, RoundTrip) {
  std::mt19937_64 rng(43);
  for (bool cplx : {false, true}) {
    for (int N : {1, 2}) {
      const Grid g{N, 77.5, N == 1 ? 128 : 32};
      const Field u = random_localized(g, rng, cplx);
      std::stringstream ss;
      write_nsf(ss, u);
      const std::string bytes = ss.str();
      EXPECT_EQ(bytes.substr(0, 4), "NSF1");
      EXPECT_EQ(bytes.size(), 4 + 4 + 4 + 8 + 1 + u.size() * 8 * (cplx ? 2 : 1));
      EXPECT_EQ(static_cast<unsigned char>(bytes[20]), cplx ? 1 : 0);
      const Field back = read_nsf(ss);
      EXPECT_EQ(back.grid(), g);
      for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(back[i], u[i]);
    }
  }
}

TEST(NsfFormat, RejectsGarbage) {
  std::stringstream bad("NSF2....");
  EXPECT_THROW(read_nsf(bad), Error);
  const Field u = gaussian(Grid{1, 10.0, 16}, 1.0);
  std::stringstream ss;
  write_nsf(ss, u);
  std::stringstream cut(ss.str().substr(0, 40));
  EXPECT_THROW(read_nsf(cut), Error);
}

TEST(Csv, AxisProfile) {
  const Grid g{2, 20.0, 16};
  const Field u = gaussian(g, 2.0);
  std::ostringstream os;
  write_axis_profile_csv(os, u);
  std::istringstream is(os.str());
  std::string line;
  int rows = 0;
  std::getline(is, line);
  EXPECT_EQ(line, "x,re,im,abs2");
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 16);
}
