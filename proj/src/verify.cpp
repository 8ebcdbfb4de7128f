#include "mrca/verify.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/numeric/odeint.hpp>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "mrca/errors.hpp"
#include "mrca/sampler.hpp"
#include "mrca/stats.hpp"

namespace mrca {

namespace {

using Clock = std::chrono::steady_clock;

class Stopwatch {
public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(Clock::now()) {}
  [[nodiscard]] std::uint64_t ms() const {
    if (!enabled_) return 0;
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start_).count());
  }

private:
  bool enabled_;
  Clock::time_point start_;
};

McReport make_report(std::string name, double estimate, double std_error, double target, double tolerance,
                     std::uint64_t n, std::uint64_t seed) {
  McReport r;
  r.study_name = std::move(name);
  r.estimate = estimate;
  r.std_error = std_error;
  r.target = target;
  r.tolerance = tolerance;
  r.n = n;
  r.seed = seed;
  r.pass = std::abs(estimate - target) <= tolerance;  // NaN fails
  return r;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

const Quadratic& require_quadratic(const StationaryLaw& law, const char* who) {
  const auto* q = std::get_if<Quadratic>(&law.mechanism().spec());
  if (q == nullptr) throw CapabilityError(std::string(who) + ": requires the quadratic mechanism");
  return *q;
}

void require_n(const McOptions& opt, const char* who) {
  if (opt.n == 0) throw DomainError(std::string(who) + ": n must be >= 1");
}

double rel_residual(double a, double b) {
  const double scale = std::max(std::abs(b), std::numeric_limits<double>::min());
  return std::abs(a - b) / scale;
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t k) { return seed ^ ((k + 1) * 0x9E3779B97F4A7C15ULL); }

std::vector<AncestorSample> draw_ancestors(const StationaryLaw& law, double s, const McOptions& opt,
                                           std::uint64_t seed) {
  std::vector<AncestorSample> out(opt.n);
  for_each_block(opt.n, seed, opt.threads, [&](std::size_t b, std::size_t e, RngStream& rng) {
    for (std::size_t i = b; i < e; ++i) out[i] = sample_ancestors_quadratic(law, s, rng);
  });
  return out;
}

template <class F>
double de_integrate_half_line(F f, double a, double tol) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([&](double x) { return f(a + x); }, tol);
}

template <class F>
double de_integrate(F f, double a, double b, double tol) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, a, b, tol);
}

McReport identity_report(std::string name, double max_residual, double tolerance, std::size_t points) {
  return make_report(std::move(name), max_residual, 0.0, 0.0, tolerance, points, 0);
}

}  // namespace

nlohmann::ordered_json to_json(const McReport& r) {
  nlohmann::ordered_json j;
  j["study_name"] = r.study_name;
  j["estimate"] = r.estimate;
  j["std_error"] = r.std_error;
  j["target"] = r.target;
  j["tolerance"] = r.tolerance;
  j["n"] = r.n;
  j["seed"] = r.seed;
  j["verdict"] = r.pass ? "pass" : "fail";
  j["runtime_ms"] = r.runtime_ms;
  return j;
}

std::pair<McReport, McReport> study_bottleneck(const StationaryLaw& law, const McOptions& opt) {
  require_quadratic(law, "study_bottleneck");
  require_n(opt, "study_bottleneck");
  const Stopwatch sw(opt.record_timing);
  std::vector<double> below(opt.n);
  std::vector<double> za(opt.n);
  std::vector<double> z(opt.n);
  for_each_block(opt.n, opt.seed, opt.threads, [&](std::size_t b, std::size_t e, RngStream& rng) {
    for (std::size_t i = b; i < e; ++i) {
      const MrcaSample m = sample_mrca_quadratic(law, rng);
      below[i] = m.Z_A < m.Z ? 1.0 : 0.0;
      za[i] = m.Z_A;
      z[i] = m.Z;
    }
  });
  const double nn = static_cast<double>(opt.n);
  const double target_p = 11.0 / 16.0;
  const auto freq = stats::moments(below);
  McReport p = make_report("bottleneck_probability", freq.mean, std::sqrt(freq.mean * (1.0 - freq.mean) / nn),
                           target_p, 3.0 * std::sqrt(target_p * (1.0 - target_p) / nn), opt.n, opt.seed);

  const auto mza = stats::moments(za);
  const auto mz = stats::moments(z);
  const double ratio = mza.mean / mz.mean;
  // delta method: Var(R̂) ≈ Var(Z^A - R Z) / (n E[Z]²)
  std::vector<double> resid(opt.n);
  for (std::size_t i = 0; i < opt.n; ++i) resid[i] = za[i] - ratio * z[i];
  const double se = std::sqrt(stats::moments(resid).variance / nn) / mz.mean;
  McReport r = make_report("bottleneck_mean_ratio", ratio, se, 2.0 / 3.0, 3.0 * se, opt.n, opt.seed);
  p.runtime_ms = r.runtime_ms = sw.ms();
  return {p, r};
}

std::vector<McReport> study_bottleneck_conditional(const StationaryLaw& law, const McOptions& opt, double t_lo,
                                                   double t_hi, double width) {
  require_quadratic(law, "study_bottleneck_conditional");
  require_n(opt, "study_bottleneck_conditional");
  if (!(t_lo >= 0.0 && t_hi > t_lo && width > 0.0)) throw DomainError("study_bottleneck_conditional: bad bins");
  const Stopwatch sw(opt.record_timing);
  const auto bins = static_cast<std::size_t>(std::llround((t_hi - t_lo) / width));
  std::vector<double> a(opt.n);
  std::vector<unsigned char> below(opt.n);
  for_each_block(opt.n, opt.seed, opt.threads, [&](std::size_t b, std::size_t e, RngStream& rng) {
    for (std::size_t i = b; i < e; ++i) {
      const MrcaSample m = sample_mrca_quadratic(law, rng);
      a[i] = m.A;
      below[i] = m.Z_A < m.Z ? 1 : 0;
    }
  });
  std::vector<std::uint64_t> count(bins, 0);
  std::vector<std::uint64_t> hits(bins, 0);
  for (std::size_t i = 0; i < opt.n; ++i) {
    if (a[i] < t_lo || a[i] >= t_lo + static_cast<double>(bins) * width) continue;
    const auto k = std::min(bins - 1, static_cast<std::size_t>((a[i] - t_lo) / width));
    ++count[k];
    hits[k] += below[i];
  }
  const double target = 11.0 / 16.0;
  std::vector<McReport> out;
  for (std::size_t k = 0; k < bins; ++k) {
    const double lo = t_lo + static_cast<double>(k) * width;
    const double m = static_cast<double>(count[k]);
    const double p = m > 0 ? static_cast<double>(hits[k]) / m : std::numeric_limits<double>::quiet_NaN();
    McReport r = make_report("bottleneck_conditional[" + fmt(lo) + "," + fmt(lo + width) + ")", p,
                             m > 0 ? std::sqrt(p * (1.0 - p) / m) : 0.0, target,
                             m > 0 ? 3.0 * std::sqrt(target * (1.0 - target) / m) : 1.0, count[k], opt.seed);
    if (count[k] == 0) r.note = "empty bin";
    out.push_back(std::move(r));
  }
  for (auto& r : out) r.runtime_ms = sw.ms();
  return out;
}

McReport study_tmrca_law(const StationaryLaw& law, const McOptions& opt, std::function<double(double)> target_cdf,
                         std::string name) {
  const auto& q = require_quadratic(law, "study_tmrca_law");
  require_n(opt, "study_tmrca_law");
  const Stopwatch sw(opt.record_timing);
  if (!target_cdf) {
    const double rate = 2.0 * q.theta * q.beta;
    target_cdf = [rate](double t) {
      const double f = -std::expm1(-rate * t);
      return f * f;
    };
  }
  std::vector<double> a(opt.n);
  for_each_block(opt.n, opt.seed, opt.threads, [&](std::size_t b, std::size_t e, RngStream& rng) {
    for (std::size_t i = b; i < e; ++i) a[i] = sample_mrca_quadratic(law, rng).A;
  });
  const double d = stats::ks_statistic(std::move(a), target_cdf);
  McReport r = make_report(std::move(name), d, 0.0, 0.0, 2.2 / std::sqrt(static_cast<double>(opt.n)), opt.n, opt.seed);
  if (opt.n < 1000) r.note = "low power: KS threshold 2.2/sqrt(n) is wide";
  r.runtime_ms = sw.ms();
  return r;
}

McReport study_stationary_size(const StationaryLaw& law, const McOptions& opt) {
  const auto& q = require_quadratic(law, "study_stationary_size");
  require_n(opt, "study_stationary_size");
  const Stopwatch sw(opt.record_timing);
  std::vector<double> z(opt.n);
  for_each_block(opt.n, opt.seed, opt.threads, [&](std::size_t b, std::size_t e, RngStream& rng) {
    for (std::size_t i = b; i < e; ++i) z[i] = sample_Z_quadratic(law, rng);
  });
  const double rate = 2.0 * q.theta;
  const double d = stats::ks_statistic(std::move(z), [rate](double x) {
    return x <= 0.0 ? 0.0 : -std::expm1(-rate * x) - rate * x * std::exp(-rate * x);
  });
  McReport r = make_report("stationary_size", d, 0.0, 0.0, 2.2 / std::sqrt(static_cast<double>(opt.n)), opt.n, opt.seed);
  r.runtime_ms = sw.ms();
  return r;
}

std::vector<McReport> study_ancestor_transform(const StationaryLaw& law, double s, const std::vector<double>& etas,
                                               const std::vector<double>& lambdas, const McOptions& opt) {
  require_quadratic(law, "study_ancestor_transform");
  require_n(opt, "study_ancestor_transform");
  if (!(s > 0.0)) throw DomainError("study_ancestor_transform: s must be > 0");
  const Stopwatch sw(opt.record_timing);
  const auto draws = draw_ancestors(law, s, opt, opt.seed);
  const auto& ev = law.cumulant();
  const double c = ev.c_of(s);
  std::vector<McReport> out;
  std::vector<double> w(opt.n);
  for (double eta : etas) {
    for (double lambda : lambdas) {
      for (std::size_t i = 0; i < opt.n; ++i) {
        w[i] = std::exp(-eta * static_cast<double>(draws[i].M) - lambda * draws[i].Z_now);
      }
      const auto m = stats::moments(w);
      const double decay = std::exp(-eta);
      const double target =
          std::exp(-ev.int_psi_tilde_u(lambda, 0.0, s)) * law.laplace_Z((1.0 - decay) * c + decay * ev.u_of(lambda, s));
      out.push_back(make_report("ancestor_transform[eta=" + fmt(eta) + ",lambda=" + fmt(lambda) + "]", m.mean,
                                m.std_error(), target, 3.0 * m.std_error(), opt.n, opt.seed));
    }
  }
  for (auto& r : out) r.runtime_ms = sw.ms();
  return out;
}

std::vector<McReport> study_ancestor_convergence(const StationaryLaw& law, const std::vector<double>& s_grid,
                                                 const McOptions& opt, double cap) {
  const auto& q = require_quadratic(law, "study_ancestor_convergence");
  require_n(opt, "study_ancestor_convergence");
  if (s_grid.empty()) throw DomainError("study_ancestor_convergence: empty grid");
  for (std::size_t k = 0; k < s_grid.size(); ++k) {
    if (!(s_grid[k] > 0.0)) throw DomainError("study_ancestor_convergence: grid must be positive");
    if (k > 0 && !(s_grid[k] < s_grid[k - 1])) {
      throw DomainError("study_ancestor_convergence: grid must be strictly decreasing");
    }
  }
  const Stopwatch sw(opt.record_timing);
  const double mean_z = law.mean_Z();
  std::vector<McReport> out;
  std::vector<double> abs_dev;
  for (std::size_t k = 0; k < s_grid.size(); ++k) {
    const double s = s_grid[k];
    const std::uint64_t seed = sub_seed(opt.seed, k);
    const auto draws = draw_ancestors(law, s, opt, seed);
    const double c = law.cumulant().c_of(s);
    std::vector<double> scaled(opt.n);
    std::vector<double> dev(opt.n);
    for (std::size_t i = 0; i < opt.n; ++i) {
      scaled[i] = static_cast<double>(draws[i].M) / c;
      dev[i] = std::abs(scaled[i] - draws[i].Z_now);
    }
    const auto ms = stats::moments(scaled);
    out.push_back(make_report("ancestor_mean[s=" + fmt(s) + "]", ms.mean, ms.std_error(), mean_z,
                              3.0 * ms.std_error(), opt.n, seed));
    const auto md = stats::moments(dev);
    // E|X| <= sqrt(E X²) = sqrt(1/(θ c(s)))
    McReport r = make_report("ancestor_abs_dev[s=" + fmt(s) + "]", md.mean, md.std_error(), 0.0,
                             std::sqrt(1.0 / (q.theta * c)), opt.n, seed);
    abs_dev.push_back(md.mean);
    out.push_back(std::move(r));
  }
  if (abs_dev.size() >= 2) {
    std::uint64_t violations = 0;
    for (std::size_t k = 1; k < abs_dev.size(); ++k) {
      if (!(abs_dev[k] < abs_dev[k - 1])) ++violations;
    }
    if (!(abs_dev.back() < cap)) ++violations;
    McReport r = make_report("ancestor_convergence_monotone", static_cast<double>(violations), 0.0, 0.0, 0.5,
                             opt.n, opt.seed);
    r.note = "estimate counts order violations plus last value >= cap " + fmt(cap);
    out.push_back(std::move(r));
  }
  for (auto& r : out) r.runtime_ms = sw.ms();
  return out;
}

std::pair<McReport, McReport> study_fluctuations(const StationaryLaw& law, double s, const McOptions& opt) {
  const auto& q = require_quadratic(law, "study_fluctuations");
  require_n(opt, "study_fluctuations");
  if (!(s > 0.0)) throw DomainError("study_fluctuations: s must be > 0");
  const Stopwatch sw(opt.record_timing);
  const auto draws = draw_ancestors(law, s, opt, opt.seed);
  const double c = law.cumulant().c_of(s);
  const double scale = std::sqrt(c * law.mean_Z());
  std::vector<double> x(opt.n);
  for (std::size_t i = 0; i < opt.n; ++i) x[i] = scale * (static_cast<double>(draws[i].M) / c - draws[i].Z_now);
  const auto m = stats::moments(x);
  std::vector<double> sq(opt.n);
  for (std::size_t i = 0; i < opt.n; ++i) sq[i] = (x[i] - m.mean) * (x[i] - m.mean);
  const double var_se = stats::moments(sq).std_error();
  const double target = 1.0 / (q.theta * q.theta);
  McReport var = make_report("fluctuation_variance[s=" + fmt(s) + "]", m.variance, var_se, target, 0.05 * target,
                             opt.n, opt.seed);
  if (!var.pass) var.note = "asymptotic regime not reached";
  McReport mean = make_report("fluctuation_mean[s=" + fmt(s) + "]", m.mean, m.std_error(), 0.0,
                              3.0 * m.std_error(), opt.n, opt.seed);
  var.runtime_ms = mean.runtime_ms = sw.ms();
  return {var, mean};
}

McReport study_na_stable(double alpha0, const McOptions& opt, std::optional<double> pmf_alpha0) {
  require_n(opt, "study_na_stable");
  const double reference = pmf_alpha0.value_or(alpha0);
  if (!(alpha0 > 0.0 && alpha0 <= 1.0) || !(reference > 0.0 && reference <= 1.0)) {
    throw DomainError("study_na_stable: alpha0 must lie in (0, 1]");
  }
  const Stopwatch sw(opt.record_timing);
  std::vector<std::uint64_t> draws(opt.n);
  for_each_block(opt.n, opt.seed, opt.threads, [&](std::size_t b, std::size_t e, RngStream& rng) {
    for (std::size_t i = b; i < e; ++i) draws[i] = sample_NA_stable(alpha0, rng);
  });
  const std::string name = "na_stable[alpha0=" + fmt(alpha0) + (pmf_alpha0 ? ",pmf=" + fmt(reference) : "") + "]";

  if (reference == 1.0) {
    // degenerate law: exact check of P(N^A = 1) = 1
    const auto ones = static_cast<double>(std::count(draws.begin(), draws.end(), std::uint64_t{1}));
    const double freq = ones / static_cast<double>(opt.n);
    McReport r = make_report(name, freq, 0.0, 1.0, 0.5 / static_cast<double>(opt.n), opt.n, opt.seed);
    r.note = "degenerate pmf: exact frequency check";
    r.runtime_ms = sw.ms();
    return r;
  }

  constexpr std::size_t kCells = 11;  // {1..10} and the tail {> 10}
  std::array<std::uint64_t, kCells> observed{};
  for (auto d : draws) ++observed[std::min<std::uint64_t>(d, kCells) - 1];
  std::array<double, kCells> probs{};
  for (std::size_t k = 1; k < kCells; ++k) probs[k - 1] = pmf_NA_stable(reference, k);
  probs[kCells - 1] = survival_NA_stable(reference, kCells - 1);
  const double stat = stats::chi_square_statistic(observed, probs);
  McReport r = make_report(name, stat, 0.0, 0.0, stats::chi_square_quantile_999(static_cast<int>(kCells) - 1), opt.n,
                           opt.seed);
  r.runtime_ms = sw.ms();
  return r;
}

McReport study_window_count(const StationaryLaw& law, double d, const McOptions& opt) {
  require_n(opt, "study_window_count");
  if (!(d > 0.0)) throw DomainError("study_window_count: d must be > 0");
  const Stopwatch sw(opt.record_timing);
  std::vector<double> counts(opt.n);
  for_each_block(opt.n, opt.seed, opt.threads, [&](std::size_t b, std::size_t e, RngStream& rng) {
    for (std::size_t i = b; i < e; ++i) counts[i] = static_cast<double>(sample_window_count(law, d, rng));
  });
  const auto m = stats::moments(counts);
  const double target = law.cumulant().lambda_window(d);
  McReport r = make_report("window_count[d=" + fmt(d) + "]", m.mean, m.std_error(), target,
                           3.0 * std::sqrt(target / static_cast<double>(opt.n)), opt.n, opt.seed);
  r.runtime_ms = sw.ms();
  return r;
}

double u_by_ode(const Mechanism& mech, double lambda, double t, double rel_tol) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 1>;
  if (t == 0.0 || lambda == 0.0) return lambda;
  State x{lambda};
  auto rhs = [&](const State& y, State& dydt, double) { dydt[0] = -mech.psi(std::max(y[0], 0.0)); };
  auto stepper = odeint::make_controlled(1e-300, rel_tol, odeint::runge_kutta_dopri5<State>());
  const double dt0 = std::min(t, 1e-3 / std::max(1.0, mech.psi_prime(lambda)));
  odeint::integrate_adaptive(stepper, rhs, x, 0.0, t, dt0);
  return x[0];
}

double kappa_by_quadrature(const Mechanism& mech, double tol) {
  const double alpha = mech.alpha();
  const double upper = de_integrate_half_line([&](double v) { return 1.0 / mech.psi(v); }, 1.0, tol);
  const double lower = de_integrate(
      [&](double v) {
        const double p = mech.psi(v);
        // ψ - αv near 0 without cancellation
        double tilde = p - alpha * v;
        if (v < 1e-6) {
          tilde = mech.kind() == MechanismKind::stable ? mech.leading_term(v) : 0.5 * mech.psi_second_at_zero() * v * v;
        }
        return tilde / (alpha * p) / v;
      },
      0.0, 1.0, tol);
  return std::exp(alpha * (upper - lower));
}

std::vector<McReport> study_transform_identities(const StationaryLaw& law, const TransformGrids& g, double quad_tol) {
  const auto& ev = law.cumulant();
  const auto& mech = law.mechanism();
  const bool closed = ev.closed_form();
  const double route_tol = closed ? 1e-8 : 1e-6;
  std::vector<McReport> out;

  {
    double worst = 0.0;
    std::size_t pts = 0;
    for (double l : g.lambdas) {
      for (double t : g.ts) {
        for (double s : g.ss) {
          worst = std::max(worst, rel_residual(ev.u_of(ev.u_of(l, t), s), ev.u_of(l, t + s)));
          ++pts;
        }
      }
    }
    out.push_back(identity_report("semigroup", worst, route_tol, pts));
  }
  {
    double worst = 0.0;
    std::size_t pts = 0;
    for (double t : g.ts) {
      for (double s : g.ss) {
        worst = std::max(worst, rel_residual(ev.u_of(ev.c_of(t), s), ev.c_of(t + s)));
        ++pts;
      }
    }
    out.push_back(identity_report("flow_through_c", worst, route_tol, pts));
  }
  {
    double worst = 0.0;
    std::size_t pts = 0;
    for (double l : g.lambdas) {
      for (double t : g.ts) {
        worst = std::max(worst, rel_residual(ev.u_of(l, t), u_by_ode(mech, l, t)));
        ++pts;
      }
    }
    out.push_back(identity_report("semigroup_vs_ode", worst, route_tol, pts));
  }
  if (closed) {
    const CumulantEvaluator generic(mech, ev.tolerances(), Route::generic);
    double worst = 0.0;
    std::size_t pts = 0;
    for (double t : g.ts) {
      worst = std::max(worst, rel_residual(generic.c_of(t), ev.c_of(t)));
      ++pts;
      for (double l : g.lambdas) {
        worst = std::max(worst, rel_residual(generic.u_of(l, t), ev.u_of(l, t)));
        ++pts;
      }
    }
    out.push_back(identity_report("generic_vs_closed_form", worst, 1e-6, pts));
  }
  out.push_back(identity_report("kappa_quadrature", rel_residual(ev.kappa(), kappa_by_quadrature(mech)), route_tol, 1));
  {
    double worst = 0.0;
    for (double l : g.laplace_lambdas) {
      const double integral = de_integrate_half_line(
          [&](double s) { return mech.psi_tilde_prime(ev.u_of(l, s)); }, 0.0, quad_tol);
      worst = std::max(worst, rel_residual(law.laplace_Z(l), std::exp(-integral)));
    }
    out.push_back(identity_report("laplace_dual_route", worst, route_tol, g.laplace_lambdas.size()));
  }
  if (const auto* q = std::get_if<Quadratic>(&mech.spec())) {
    const double r = 2.0 * q->theta;
    double worst = 0.0;
    for (double l : g.laplace_lambdas) {
      const double integral =
          de_integrate_half_line([&](double z) { return r * r * z * std::exp(-(r + l) * z); }, 0.0, quad_tol);
      worst = std::max(worst, rel_residual(law.laplace_Z(l), integral));
    }
    out.push_back(identity_report("laplace_vs_gamma_density", worst, 1e-8, g.laplace_lambdas.size()));
  }
  {
    double worst = 0.0;
    std::size_t pts = 0;
    for (double l : g.lambdas) {
      for (double gm : g.lambdas) {
        for (double eta : g.lambdas) {
          for (double t : g.ts) {
            const double product = law.pdf_A(t) * law.laplace_ZA_given_A(l, t) * law.laplace_ZI_given_A(gm, t) *
                                   law.laplace_ZO_given_A(eta, t);
            worst = std::max(worst, rel_residual(law.joint_transform(l, gm, eta, t), product));
            ++pts;
          }
        }
      }
    }
    out.push_back(identity_report("factorization", worst, 1e-8, pts));
  }
  {
    double violation = 0.0;
    std::size_t pts = 0;
    for (double l : g.lambdas) {
      for (double t : g.ts) {
        violation = std::max(violation, law.laplace_Z(l) - law.laplace_ZA_given_A(l, t));
        ++pts;
      }
    }
    // one-sided: only a shortfall of the tilted transform counts
    McReport r = identity_report("dominance", std::max(0.0, violation), 4.0 * std::numeric_limits<double>::epsilon(), pts);
    r.note = "estimate is max(0, laplace_Z - laplace_ZA_given_A)";
    out.push_back(std::move(r));
  }
  {
    double worst = 0.0;
    for (double t : g.ts) worst = std::max(worst, std::abs(law.cdf_A(t) - law.laplace_Z(ev.c_of(t))));
    out.push_back(identity_report("cdf_A_two_routes", worst, 1e-10, g.ts.size()));
  }
  {
    double worst = 0.0;
    for (double d : g.ts) {
      const double integral =
          de_integrate_half_line([&](double r) { return mech.psi_tilde_prime(ev.c_of(r)); }, d, quad_tol);
      worst = std::max(worst, rel_residual(ev.lambda_window(d), integral));
    }
    out.push_back(identity_report("lambda_window_quadrature", worst, 1e-7, g.ts.size()));
  }
  {
    auto density = [&](double t) { return t < 1e-100 ? 0.0 : law.pdf_A(t); };
    const double mass = de_integrate(density, 0.0, 1.0, quad_tol) + de_integrate_half_line(density, 1.0, quad_tol);
    out.push_back(identity_report("pdf_A_normalization", std::abs(mass - 1.0), 1e-6, 1));
  }
  return out;
}

namespace {

struct StudyEntry {
  std::size_t default_n;
  std::function<std::vector<McReport>(const StationaryLaw&, const StudyPlan&, const McOptions&)> run;
};

const std::map<std::string, StudyEntry>& registry() {
  static const std::map<std::string, StudyEntry> table = {
      {"bottleneck",
       {1'000'000,
        [](const StationaryLaw& law, const StudyPlan&, const McOptions& o) {
          auto [p, r] = study_bottleneck(law, o);
          return std::vector<McReport>{p, r};
        }}},
      {"bottleneck_conditional",
       {1'000'000, [](const StationaryLaw& law, const StudyPlan&, const McOptions& o) {
          return study_bottleneck_conditional(law, o);
        }}},
      {"tmrca_law",
       {100'000, [](const StationaryLaw& law, const StudyPlan&, const McOptions& o) {
          return std::vector<McReport>{study_tmrca_law(law, o)};
        }}},
      {"tmrca_law_negative_control",
       {100'000,
        [](const StationaryLaw& law, const StudyPlan&, const McOptions& o) {
          const auto& q = require_quadratic(law, "tmrca_law_negative_control");
          const double rate = q.theta * q.beta;  // half the true rate
          auto wrong = [rate](double t) {
            const double f = -std::expm1(-rate * t);
            return f * f;
          };
          return std::vector<McReport>{study_tmrca_law(law, o, wrong, "tmrca_law_negative_control")};
        }}},
      {"stationary_size",
       {100'000, [](const StationaryLaw& law, const StudyPlan&, const McOptions& o) {
          return std::vector<McReport>{study_stationary_size(law, o)};
        }}},
      {"ancestor_transform",
       {100'000, [](const StationaryLaw& law, const StudyPlan& p, const McOptions& o) {
          return study_ancestor_transform(law, p.transform_s, {0.3, 1.0}, {0.3, 1.0}, o);
        }}},
      {"ancestor_convergence",
       {100'000, [](const StationaryLaw& law, const StudyPlan& p, const McOptions& o) {
          return study_ancestor_convergence(law, p.s_grid, o, p.convergence_cap);
        }}},
      {"fluctuations",
       {1'000'000,
        [](const StationaryLaw& law, const StudyPlan& p, const McOptions& o) {
          auto [v, m] = study_fluctuations(law, p.fluctuation_s, o);
          return std::vector<McReport>{v, m};
        }}},
      {"window_count",
       {100'000, [](const StationaryLaw& law, const StudyPlan& p, const McOptions& o) {
          return std::vector<McReport>{study_window_count(law, p.window_d, o)};
        }}},
      {"na_stable",
       {100'000,
        [](const StationaryLaw& law, const StudyPlan& p, const McOptions& o) {
          const auto* st = std::get_if<Stable>(&law.mechanism().spec());
          return std::vector<McReport>{study_na_stable(st ? st->alpha0 : p.alpha0, o)};
        }}},
      {"na_stable_negative_control",
       {100'000,
        [](const StationaryLaw& law, const StudyPlan& p, const McOptions& o) {
          const auto* st = std::get_if<Stable>(&law.mechanism().spec());
          const double a0 = st ? st->alpha0 : p.alpha0;
          const double wrong = a0 <= 0.6 ? a0 + 0.2 : a0 - 0.2;
          return std::vector<McReport>{study_na_stable(a0, o, wrong)};
        }}},
      {"transform_identities",
       {0, [](const StationaryLaw& law, const StudyPlan& p, const McOptions&) {
          return study_transform_identities(law, p.grids, p.quad_tol);
        }}},
  };
  return table;
}

}  // namespace

std::vector<std::string> known_studies() {
  std::vector<std::string> names;
  for (const auto& [name, entry] : registry()) names.push_back(name);
  return names;
}

std::vector<std::string> default_study_list(const StationaryLaw& law) {
  if (law.mechanism().kind() == MechanismKind::quadratic) {
    return {"bottleneck",         "bottleneck_conditional", "tmrca_law",    "stationary_size",
            "ancestor_transform", "ancestor_convergence",   "fluctuations", "window_count",
            "na_stable",          "transform_identities"};
  }
  return {"window_count", "na_stable", "transform_identities"};
}

std::vector<McReport> run_study(const std::string& name, const StationaryLaw& law, const StudyPlan& plan) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw ConfigError("unknown study '" + name + "'");
  McOptions o;
  o.n = plan.n.value_or(it->second.default_n);
  o.seed = plan.seed;
  o.threads = plan.threads;
  o.record_timing = plan.record_timing;
  const Stopwatch sw(plan.record_timing);
  auto reports = it->second.run(law, plan, o);
  if (it->second.default_n == 0) {
    for (auto& r : reports) r.runtime_ms = sw.ms();
  }
  return reports;
}

}  // namespace mrca
