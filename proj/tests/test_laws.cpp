#include <cmath>
#include <vector>

#include "doctest.h"
#include "mrca/errors.hpp"
#include "mrca/laws.hpp"
#include "oracles.hpp"

using namespace mrca;

namespace {

const Quadratic kQuad{1.0, 1.0};
const Stable kStable{1.0, 1.0, 0.5};
const Custom kCustom{1.0, 1.0, {{1.0, 1.0}}};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

const oracle::QuadraticForms kQ{1.0, 1.0};

}  // namespace

TEST_SUITE("laws") {
  TEST_CASE("laplace_Z") {
    const auto quad = StationaryLaw::make(kQuad);
    CHECK(quad.laplace_Z(2.0) == doctest::Approx(0.25).epsilon(1e-14));
    for (double l : {0.1, 1.0, 7.0}) CHECK(quad.laplace_Z(l) == doctest::Approx(std::pow(2.0 / (2.0 + l), 2)).epsilon(1e-14));
    CHECK(quad.laplace_Z(0.0) == 1.0);
    CHECK_THROWS_AS((void)quad.laplace_Z(-1.0), DomainError);

    // exp(-∫_0^40 ψ̃'(u(1,s)) ds) with the stable closed-form u
    const auto stable = StationaryLaw::make(kStable);
    const Mechanism m(kStable);
    const oracle::StableForms s{1.0, 1.0, 0.5};
    const double integral = oracle::quad([&](double r) { return m.psi_tilde_prime(s.u(1.0, r)); }, 0.0, 40.0);
    CHECK(rel(stable.laplace_Z(1.0), std::exp(-integral)) <= 1e-6);
    CHECK(stable.laplace_Z(0.0) == 1.0);
  }

  TEST_CASE("laplace_Z is decreasing and log-convex") {
    for (const MechanismSpec& spec : {MechanismSpec(kQuad), MechanismSpec(kStable), MechanismSpec(kCustom)}) {
      const auto law = StationaryLaw::make(spec);
      const std::vector<double> grid{0.0, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4};
      for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        CHECK(law.laplace_Z(grid[i]) < law.laplace_Z(grid[i - 1]));
      }
      for (double l : {0.5, 1.0, 4.0}) {
        const double h = 0.25;
        CHECK(std::log(law.laplace_Z(l)) <=
              0.5 * (std::log(law.laplace_Z(l - h)) + std::log(law.laplace_Z(l + h))) + 1e-14);
      }
    }
  }

  TEST_CASE("quadratic Z density transform") {
    const auto law = StationaryLaw::make(kQuad);
    for (double l : {0.5, 1.0, 5.0}) {
      const double via_density = oracle::quad_inf([&](double z) { return 4.0 * z * std::exp(-(2.0 + l) * z); }, 0.0);
      CHECK(rel(law.laplace_Z(l), via_density) <= 1e-8);
    }
  }

  TEST_CASE("mean_Z_tilted") {
    const auto quad = StationaryLaw::make(kQuad);
    CHECK(quad.mean_Z_tilted(2.0) == doctest::Approx(0.125).epsilon(1e-14));
    // Gamma(2, rate 2) tilted mean ∫ z e^{-λz} 4 z e^{-2z} dz
    const double gamma_oracle = oracle::quad_inf([](double z) { return 4.0 * z * z * std::exp(-4.0 * z); }, 0.0);
    CHECK(rel(quad.mean_Z_tilted(2.0), gamma_oracle) <= 1e-10);
    CHECK(rel(quad.mean_Z_tilted(1e-7), quad.mean_Z()) <= 1e-6);
    CHECK(rel(StationaryLaw::make(kCustom).mean_Z_tilted(1e-7), Mechanism(kCustom).mean_stationary()) <= 1e-6);
    CHECK_THROWS_AS((void)quad.mean_Z_tilted(0.0), DomainError);

    for (const MechanismSpec& spec : {MechanismSpec(kQuad), MechanismSpec(kStable), MechanismSpec(kCustom)}) {
      const auto law = StationaryLaw::make(spec);
      for (double l : {0.3, 1.0, 4.0}) {
        const double h = 1e-5 * l;
        const double fd = -(law.laplace_Z(l + h) - law.laplace_Z(l - h)) / (2.0 * h);
        CHECK(rel(law.mean_Z_tilted(l), fd) <= 1e-5);
      }
    }
  }

  TEST_CASE("cdf_A") {
    const auto quad = StationaryLaw::make(kQuad);
    CHECK(quad.cdf_A(1.0) == doctest::Approx(std::pow(1.0 - std::exp(-2.0), 2)).epsilon(1e-14));
    CHECK(quad.cdf_A(0.0) == 0.0);
    CHECK_THROWS_AS((void)quad.cdf_A(-0.1), DomainError);
    const auto generic = StationaryLaw::make(kQuad, {}, Route::generic);
    for (double t : {0.1, 1.0, 5.0}) CHECK(rel(generic.cdf_A(t), quad.cdf_A(t)) <= 1e-6);

    // same quantity through the Laplace transform of Z
    for (const MechanismSpec& spec : {MechanismSpec(kQuad), MechanismSpec(kStable), MechanismSpec(kCustom)}) {
      const auto law = StationaryLaw::make(spec);
      double prev = 0.0;
      for (double t : {0.05, 0.1, 1.0, 5.0, 20.0}) {
        const double v = law.cdf_A(t);
        CHECK(std::abs(v - law.laplace_Z(law.cumulant().c_of(t))) <= 1e-10 * v);
        CHECK(v > prev);
        prev = v;
      }
      CHECK(1.0 - law.cdf_A(60.0 / law.cumulant().alpha()) <= 1e-12);
    }

    // stable tail: Λ(t) = −2 log(1 − e^{-t/2}) + log(1 + √c(t)) with κ = α = 1
    const auto stable = StationaryLaw::make(kStable);
    const oracle::StableForms sf{1.0, 1.0, 0.5};
    for (const auto [t, tol] : {std::pair{5.0, 1e-8}, std::pair{20.0, 1e-8}, std::pair{40.0, 1e-4}}) {
      const double big_lambda = -2.0 * std::log1p(-std::exp(-t / 2.0)) + std::log1p(std::sqrt(sf.c(t)));
      CHECK(rel(1.0 - stable.cdf_A(t), -std::expm1(-big_lambda)) <= tol);
    }
  }

  TEST_CASE("pdf_A") {
    const auto quad = StationaryLaw::make(kQuad);
    for (double t : {0.1, 1.0, 3.0}) {
      CHECK(quad.pdf_A(t) == doctest::Approx(4.0 * std::exp(-2.0 * t) * (1.0 - std::exp(-2.0 * t))).epsilon(1e-13));
    }
    CHECK_THROWS_AS((void)quad.pdf_A(0.0), DomainError);
    for (const MechanismSpec& spec : {MechanismSpec(kQuad), MechanismSpec(kStable), MechanismSpec(kCustom)}) {
      const auto law = StationaryLaw::make(spec);
      const double total = oracle::quad([&](double t) { return law.pdf_A(t); }, 0.0, 1.0, 1e-10) +
                           oracle::quad_inf([&](double t) { return law.pdf_A(t); }, 1.0, 1e-10);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
      const double h = 1e-5;
      CHECK(rel(law.pdf_A(1.0), (law.cdf_A(1.0 + h) - law.cdf_A(1.0 - h)) / (2.0 * h)) <= 1e-5);
    }
  }

  TEST_CASE("laplace_ZA_given_A") {
    const auto quad = StationaryLaw::make(kQuad);
    const double c1 = kQ.c(1.0);
    CHECK(quad.laplace_ZA_given_A(0.0, 1.0) == 1.0);
    for (double l : {0.2, 1.0, 3.0}) {
      CHECK(quad.laplace_ZA_given_A(l, 1.0) == doctest::Approx(std::pow((2.0 + c1) / (2.0 + c1 + l), 2)).epsilon(1e-12));
    }
    const double h = 1e-6;
    CHECK(rel((1.0 - quad.laplace_ZA_given_A(h, 1.0)) / h, 2.0 / (2.0 + c1)) <= 1e-5);
    for (double l : {0.5, 2.0}) CHECK(rel(quad.laplace_ZA_given_A(l, 40.0), quad.laplace_Z(l)) <= 1e-12);
    CHECK_THROWS_AS((void)quad.laplace_ZA_given_A(1.0, 0.0), DomainError);
  }

  TEST_CASE("mean_ZA_given_A") {
    const auto quad = StationaryLaw::make(kQuad);
    CHECK(quad.mean_ZA_given_A(1.0) == doctest::Approx(2.0 / (2.0 + 2.0 / (std::exp(2.0) - 1.0))).epsilon(1e-14));
    // mean of Gamma(2, 2θ + c(t))
    const double rate = 2.0 + kQ.c(1.0);
    const double gamma_mean = oracle::quad_inf([&](double z) { return z * rate * rate * z * std::exp(-rate * z); }, 0.0);
    CHECK(rel(quad.mean_ZA_given_A(1.0), gamma_mean) <= 1e-10);

    for (const MechanismSpec& spec : {MechanismSpec(kQuad), MechanismSpec(kCustom)}) {
      const auto law = StationaryLaw::make(spec);
      double prev = 0.0;
      for (double t : {1.0, 5.0, 20.0}) {
        const double v = law.mean_ZA_given_A(t);
        CHECK(v > prev);
        CHECK(v <= law.mean_Z());
        prev = v;
      }
      CHECK(rel(prev, law.mean_Z()) <= 1e-6);
    }
  }

  TEST_CASE("laplace_ZI_given_A") {
    const auto quad = StationaryLaw::make(kQuad);
    const double c1 = kQ.c(1.0);
    CHECK(quad.laplace_ZI_given_A(0.0, 1.0) == 1.0);
    CHECK(quad.laplace_ZI_given_A(1.0, 1.0) == doctest::Approx(std::pow((2.0 + c1) / (3.0 + c1), 2)).epsilon(1e-12));
    const Mechanism m(kQuad);
    const double direct = oracle::quad([&](double s) { return m.psi_tilde_prime(kQ.u(1.0, s)); }, 0.0, 1.0);
    CHECK(rel(quad.laplace_ZI_given_A(1.0, 1.0), std::exp(-direct)) <= 1e-10);
    for (double g : {0.5, 3.0}) {
      const double c = kQ.c(2.0);
      CHECK(rel(quad.laplace_ZI_given_A(g, 2.0), std::pow((2.0 + c) / (2.0 + c + g), 2)) <= 1e-12);
    }
    CHECK(quad.laplace_ZI_given_A(1.0, 1e-9) == doctest::Approx(1.0).epsilon(1e-8));
  }

  TEST_CASE("laplace_ZO_given_A") {
    const auto quad = StationaryLaw::make(kQuad);
    const double c1 = kQ.c(1.0);
    CHECK(quad.laplace_ZO_given_A(0.0, 1.0) == 1.0);
    CHECK(quad.laplace_ZO_given_A(1.0, 1.0) == doctest::Approx((2.0 + c1) / (3.0 + c1)).epsilon(1e-12));
    const Mechanism m(kQuad);
    const double ratio = (m.psi_tilde_prime(c1) - m.psi_tilde_prime(kQ.u(1.0, 1.0))) / m.psi_tilde_prime(c1);
    CHECK(rel(quad.laplace_ZO_given_A(1.0, 1.0), ratio) <= 1e-12);
    for (const MechanismSpec& spec : {MechanismSpec(kQuad), MechanismSpec(kStable), MechanismSpec(kCustom)}) {
      const auto law = StationaryLaw::make(spec);
      CHECK(law.laplace_ZO_given_A(1e14, 1.0) < 1e-5);
    }
  }

  TEST_CASE("laplace_ZAplus_given_A") {
    const auto quad = StationaryLaw::make(kQuad);
    for (double l : {0.2, 1.0, 5.0}) {
      CHECK(quad.laplace_ZAplus_given_A(l, 1.0) == doctest::Approx(quad.laplace_ZA_given_A(l, 1.0)).epsilon(1e-13));
    }
    const auto custom = StationaryLaw::make(kCustom);
    const Mechanism m(kCustom);
    const double c = custom.cumulant().c_of(1.0);
    const double factor = (m.psi_prime(1.0 + c) - m.psi_prime(1.0)) / (m.psi_prime(c) - m.psi_prime(0.0));
    CHECK(rel(custom.laplace_ZAplus_given_A(1.0, 1.0), custom.laplace_ZA_given_A(1.0, 1.0) * factor) <= 1e-12);
    CHECK(custom.laplace_ZAplus_given_A(1.0, 1.0) < custom.laplace_ZA_given_A(1.0, 1.0));
    CHECK(custom.laplace_ZAplus_given_A(1e-9, 1.0) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK_THROWS_AS((void)custom.laplace_ZAplus_given_A(0.0, 1.0), DomainError);
  }

  TEST_CASE("joint transform factorizes") {
    const std::vector<double> grid{0.3, 1.0, 4.0};
    for (const MechanismSpec& spec : {MechanismSpec(kQuad), MechanismSpec(kStable), MechanismSpec(kCustom)}) {
      const auto law = StationaryLaw::make(spec);
      for (double l : grid)
        for (double g : grid)
          for (double e : grid)
            for (double t : grid) {
              const double product = law.pdf_A(t) * law.laplace_ZA_given_A(l, t) * law.laplace_ZI_given_A(g, t) *
                                     law.laplace_ZO_given_A(e, t);
              CHECK(rel(law.joint_transform(l, g, e, t), product) <= 1e-8);
            }
      CHECK(rel(law.joint_transform(0.0, 0.0, 0.0, 1.0), law.pdf_A(1.0)) <= 1e-12);
    }
  }

  TEST_CASE("transform-level dominance") {
    for (const MechanismSpec& spec : {MechanismSpec(kQuad), MechanismSpec(kStable), MechanismSpec(kCustom)}) {
      const auto law = StationaryLaw::make(spec);
      for (double l : {0.1, 0.5, 1.0, 2.0, 5.0})
        for (double t : {0.1, 0.5, 1.0, 2.0, 5.0}) CHECK(law.laplace_ZA_given_A(l, t) >= law.laplace_Z(l));
    }
  }

  TEST_CASE("N^A pmf and pgf") {
    const auto quad = StationaryLaw::make(kQuad);
    for (double t : {0.1, 1.0, 5.0}) {
      CHECK(quad.pmf_NA_given_A(1, t) == 1.0);
      CHECK(quad.pmf_NA_given_A(2, t) == 0.0);
      CHECK(quad.mean_NA_given_A(t) == doctest::Approx(1.0).epsilon(1e-14));
    }
    const auto stable = StationaryLaw::make(kStable);
    for (double t : {0.1, 1.0, 5.0}) {
      CHECK(stable.pmf_NA_given_A(1, t) == doctest::Approx(0.5).epsilon(1e-14));
      CHECK(stable.pmf_NA_given_A(2, t) == doctest::Approx(0.125).epsilon(1e-14));
      for (double a : {0.0, 0.25, 0.5, 0.9}) {
        CHECK(stable.pgf_NA_given_A(a, t) == doctest::Approx(1.0 - std::sqrt(1.0 - a)).epsilon(1e-12));
      }
      CHECK(std::isinf(stable.mean_NA_given_A(t)));
    }
    // α0 Π_{k=1}^{n-1}(k-α0)/n! by the product itself
    for (int n = 1; n <= 12; ++n) {
      double p = 0.5;
      for (int k = 1; k < n; ++k) p *= (k - 0.5);
      for (int k = 2; k <= n; ++k) p /= k;
      CHECK(rel(stable.pmf_NA_given_A(n, 1.0), p) <= 1e-13);
    }
    CHECK(stable.pgf_NA_given_A(1.0, 1.0) == 1.0);
    CHECK(stable.pgf_NA_given_A(1.0 - 1e-12, 1.0) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK_THROWS_AS((void)stable.pgf_NA_given_A(1.5, 1.0), DomainError);
    CHECK_THROWS_AS((void)stable.pmf_NA_given_A(0, 1.0), DomainError);
    CHECK_THROWS_AS((void)stable.pmf_NA_given_A(1, 0.0), DomainError);

    const auto custom = StationaryLaw::make(kCustom);
    for (double t : {0.1, 1.0, 5.0}) {
      double series = 0.0;
      double total = 0.0;
      for (int n = 1; n <= 30; ++n) {
        series += std::pow(0.5, n) * custom.pmf_NA_given_A(n, t);
        total += custom.pmf_NA_given_A(n, t);
      }
      CHECK(std::abs(series - custom.pgf_NA_given_A(0.5, t)) <= 1e-8);
      if (t >= 1.0) CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(custom.pgf_NA_given_A(0.0, t) == doctest::Approx(0.0).epsilon(1e-15));
    }
  }

  TEST_CASE("mean_NA_given_A") {
    const auto custom = StationaryLaw::make(kCustom);
    CHECK(custom.mean_NA_given_A(0.1) > custom.mean_NA_given_A(1.0));
    CHECK(custom.mean_NA_given_A(1.0) > custom.mean_NA_given_A(5.0));
    CHECK(custom.mean_NA_given_A(20.0) == doctest::Approx(1.0).epsilon(1e-3));
    // Σ n P(N^A = n)
    double mean = 0.0;
    for (int n = 1; n <= 60; ++n) mean += n * custom.pmf_NA_given_A(n, 1.0);
    CHECK(rel(custom.mean_NA_given_A(1.0), mean) <= 1e-10);
  }

  TEST_CASE("moment_An") {
    const auto quad = StationaryLaw::make(kQuad);
    for (double T : {0.2, 1.0, 3.0}) {
      CHECK(quad.moment_An(1, 0.0, T) == doctest::Approx(1.0 - std::exp(-2.0 * T)).epsilon(1e-13));
    }
    CHECK(quad.moment_An(2, 0.0, kInfinity) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(quad.moment_An(2, 0.0, 60.0) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(quad.moment_An(1, 0.5, kInfinity) == doctest::Approx(2.0 / 2.5 * std::pow(2.0 / 2.5, 2)).epsilon(1e-13));

    // generic route of the quadratic against its closed form
    const auto generic = StationaryLaw::make(kQuad, {}, Route::generic);
    for (int n = 1; n <= 3; ++n) {
      for (double l : {0.5, 1.0, 3.0}) {
        CAPTURE(n);
        CAPTURE(l);
        CHECK(rel(generic.moment_An(n, l, 1.0), quad.moment_An(n, l, 1.0)) <= 1e-4);
      }
    }

    // custom n = 1, λ = T = 1 against a Richardson-refined central difference
    // of η ↦ ψ(u(1+η,1))/ψ(1+η), computed with the ODE u
    const Mechanism m(kCustom);
    const auto custom = StationaryLaw::make(kCustom);
    auto ratio = [&](double mu) { return m.psi(oracle::ode_u([&](double v) { return m.psi(v); }, mu, 1.0)) / m.psi(mu); };
    auto d1 = [&](double h) { return (ratio(1.0 + h) - ratio(1.0 - h)) / (2.0 * h); };
    const double h = 1e-2;
    const double refined = (4.0 * d1(h / 2) - d1(h)) / 3.0;
    const double expected = custom.laplace_Z(1.0) * (-refined) / ratio(1.0);
    CHECK(rel(custom.moment_An(1, 1.0, 1.0), expected) <= 1e-5);

    CHECK_THROWS_AS((void)custom.moment_An(5, 1.0, 1.0), CapabilityError);
    CHECK_THROWS_AS((void)StationaryLaw::make(kStable).moment_An(1, 0.0, 1.0), DomainError);
    CHECK(StationaryLaw::make(kStable).moment_An(1, 1.0, 1.0) > 0.0);
    CHECK_THROWS_AS((void)quad.moment_An(0, 1.0, 1.0), DomainError);
  }

  TEST_CASE("moment_An as T grows approaches the tilted moments") {
    // E[Z e^{-λZ}] at T large
    for (const MechanismSpec& spec : {MechanismSpec(kQuad), MechanismSpec(kCustom)}) {
      const auto law = StationaryLaw::make(spec);
      CHECK(rel(law.moment_An(1, 1.0, 30.0), law.mean_Z_tilted(1.0)) <= 1e-5);
    }
  }

  TEST_CASE("cdf_A1_quadratic") {
    const auto quad = StationaryLaw::make(kQuad);
    auto closed = [](double t) {
      const double s = 1.0 - std::exp(-2.0 * t);
      return 2.0 * (s / (1.0 - s)) * (1.0 + (s / (1.0 - s)) * std::log(s));
    };
    for (double t : {0.1, 0.3, 1.0, 5.0}) {
      CHECK(rel(quad.cdf_A1_quadratic(t), closed(t)) <= 1e-9);
      CHECK(quad.cdf_A1_quadratic(t) >= std::pow(1.0 - std::exp(-2.0 * t), 2));
    }
    CHECK(quad.cdf_A1_quadratic(40.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(quad.cdf_A1_quadratic(1e-8) < 1e-7);
    CHECK(quad.cdf_A1_quadratic(0.0) == 0.0);
    CHECK_THROWS_AS((void)StationaryLaw::make(kStable).cdf_A1_quadratic(1.0), CapabilityError);
  }
}
