#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "hazlab/errors.hpp"
#include "hazlab/experiments.hpp"
#include "hazlab/kernels.hpp"
#include "hazlab/posterior.hpp"
#include "hazlab/statistics.hpp"
#include "oracles.hpp"

using namespace hazlab;

namespace {

std::vector<Observation> obs(std::initializer_list<std::pair<double, bool>> items) {
  std::vector<Observation> out;
  for (auto [t, c] : items) out.push_back({t, c});
  return out;
}

// int_0^inf v^n e^{-v K} rho(dv), with the exponent combined to avoid 0 * inf
double tau_oracle(double n, double sigma, double gamma, double K) {
  auto f = [&](double v) {
    return v > 0.0 ? std::exp((n - 1.0 - sigma) * std::log(v) - (gamma + K) * v - std::lgamma(1.0 - sigma)) : 0.0;
  };
  return oracle::tanh_sinh(f, 0.0, INFINITY, {1.0});
}

// max over grid points g of |F_n(g) - F(g)|, a lower bound of the KS statistic
double grid_ks(std::vector<double> draws, const std::vector<double>& grid, const std::vector<double>& cdf) {
  std::sort(draws.begin(), draws.end());
  double d = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double below = static_cast<double>(std::upper_bound(draws.begin(), draws.end(), grid[i]) - draws.begin());
    d = std::max(d, std::abs(below / draws.size() - cdf[i]));
  }
  return d;
}

}  // namespace

TEST_CASE("K_m") {
  const PosteriorModel one(KernelSpec::dykstra_laud(), {0.0, 1.0}, obs({{5.0, false}}));
  for (double x : {0.0, 1.0, 4.9, 5.0, 7.0}) CHECK(one.K_m(x) == doctest::Approx(std::max(5.0 - x, 0.0)));
  // adding an observation, exact or censored, never decreases K_m
  for (const auto& k : {KernelSpec::dykstra_laud(), KernelSpec::rectangular(1.0), KernelSpec::ornstein_uhlenbeck(1.5)}) {
    const PosteriorModel a(k, {0.3, 1.0}, obs({{2.0, false}, {3.0, true}}));
    const PosteriorModel b(k, {0.3, 1.0}, obs({{2.0, false}, {3.0, true}, {1.2, true}}));
    for (double x = 0.0; x < 6.0; x += 0.13) {
      CHECK(b.K_m(x) >= a.K_m(x));
      CHECK(a.K_m(x) >= 0.0);
    }
  }
}

TEST_CASE("tau_n closed form") {
  // sigma = 0, K + gamma = 2  ->  int v e^{-2v} / v dv = 1/2
  const PosteriorModel m0(KernelSpec::dykstra_laud(), {0.0, 1.0}, obs({{1.0, false}}));
  CHECK(m0.tau_n(1, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(tau_oracle(1, 0.0, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-10));
  // n = 2, sigma = 0.5, K + gamma = 1  ->  Gamma(1.5) / Gamma(0.5) = 1/2
  const PosteriorModel m1(KernelSpec::dykstra_laud(), {0.5, 1.0}, obs({{1.0, false}}));
  CHECK(m1.tau_n(2, 3.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(tau_oracle(2, 0.5, 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-10));
  // general agreement with quadrature and strict decrease in K_m
  const PosteriorModel m(KernelSpec::ornstein_uhlenbeck(1.0), {0.35, 1.7}, obs({{1.0, false}, {2.5, true}}));
  double prev = INFINITY;
  for (double x : {3.0, 2.0, 1.5, 1.0, 0.5, 0.0}) {
    for (int n : {1, 2, 4}) CHECK(m.tau_n(n, x) == doctest::Approx(tau_oracle(n, 0.35, 1.7, m.K_m(x))).epsilon(1e-9));
    const double t = m.tau_n(2, x);
    if (m.K_m(x) > 0.0) CHECK(t < prev);
    prev = t;
  }
  CHECK_THROWS_AS(m.tau_n(0, 1.0), DomainError);
}

TEST_CASE("posterior intensity and the sandwich bounds") {
  const GeneralizedGammaIntensity in(0.3, 1.2);
  const PosteriorModel empty(KernelSpec::dykstra_laud(), in, {});
  for (double v : {0.01, 0.5, 3.0})
    CHECK(empty.posterior_intensity(v, 1.0) == doctest::Approx(levy_density(in, v)));
  RngStream rng(5);
  for (const auto& k : {KernelSpec::dykstra_laud(), KernelSpec::rectangular(0.7), KernelSpec::ornstein_uhlenbeck(2.0)}) {
    const PosteriorModel m(k, in, obs({{0.8, false}, {2.1, true}, {3.3, false}, {1.7, false}}));
    for (int i = 0; i < 2000; ++i) {
      const double v = std::exp(6.0 * rng.uniform() - 4.0), x = 5.0 * rng.uniform();
      const double post = m.posterior_intensity(v, x);
      const double prior = levy_density(in, v);
      CHECK(m.lower_bound_intensity(v, x) <= post * (1 + 1e-12));
      CHECK(post <= prior * (1 + 1e-12));
      // the tilt is a gamma shift
      CHECK(post == doctest::Approx(levy_density(in.tilted(m.K_m(x)), v) * std::exp(-0.0)).epsilon(1e-10));
    }
  }
}

TEST_CASE("jump law is Gamma(n - sigma, gamma + K_m)") {
  // three exact times at 1, one cluster at 2/3: K_m = 1, rate 2
  const PosteriorModel m(KernelSpec::dykstra_laud(), {0.5, 1.0}, obs({{1.0, false}, {1.0, false}, {1.0, false}}));
  PosteriorState s(m, {0, 0, 0}, {Cluster{2.0 / 3.0, 3, 0.0, 0.0}});
  CHECK(s.clusters()[0].tilt == doctest::Approx(1.0));
  RngStream rng(99);
  std::vector<double> j(100000);
  for (auto& x : j) {
    s.sample_fixed_jumps(rng);
    x = s.clusters()[0].jump;
  }
  const auto sum = summarize(j);
  CHECK(std::abs(sum.mean - 1.25) < 3 * sum.se_mean);
  CHECK(std::abs(sum.variance - 0.625) < 3 * sum.se_variance);
  // n = 1, sigma = 0, K_m = 0: exponential with rate gamma
  const PosteriorModel e(KernelSpec::dykstra_laud(), {0.0, 2.0}, obs({{1.0, false}}));
  PosteriorState se(e, {0}, {Cluster{1.0, 1, 0.0, 0.0}});
  for (auto& x : j) {
    se.sample_fixed_jumps(rng);
    x = se.clusters()[0].jump;
  }
  const auto s2 = summarize(j);
  CHECK(std::abs(s2.mean - 0.5) < 3 * s2.se_mean);
  CHECK(std::abs(s2.variance - 0.25) < 3 * s2.se_variance);
}

TEST_CASE("single latent location, DL, sigma = 0") {
  const double y = 3.0, g = 1.5;
  const PosteriorModel m(KernelSpec::dykstra_laud(), {0.0, g}, obs({{y, false}}));
  const double ys[] = {y};
  const double Z = std::log((y + g) / g);
  CHECK(m.location_mass(ys) == doctest::Approx(Z).epsilon(1e-10));
  CHECK(m.fresh_weight(0) == doctest::Approx(Z).epsilon(1e-10));
  RngStream rng(3);
  std::vector<double> d(20000);
  for (auto& x : d) x = m.sample_location(ys, rng);
  std::vector<double> grid, cdf;
  for (int i = 1; i < 300; ++i) {
    const double x = y * i / 300.0;
    grid.push_back(x);
    cdf.push_back(std::log((y + g) / (y - x + g)) / Z);
  }
  CHECK(*std::max_element(d.begin(), d.end()) <= y);
  CHECK(grid_ks(d, grid, cdf) < 1.63 / std::sqrt(20000.0));
}

TEST_CASE("property: latent location sampler matches its density") {
  struct Case {
    KernelSpec k;
    BaseMeasure base;
    std::vector<double> members;
  };
  const std::vector<Case> cases{
      {KernelSpec::dykstra_laud(), BaseMeasure::lebesgue(), {2.0, 3.5}},
      {KernelSpec::rectangular(1.2), BaseMeasure::lebesgue(), {2.0, 3.5}},
      {KernelSpec::ornstein_uhlenbeck(1.3), BaseMeasure::lebesgue(), {2.0}},
      {KernelSpec::ornstein_uhlenbeck(1.3), BaseMeasure::lebesgue(), {2.0, 3.5}},
      {KernelSpec::exponential(), BaseMeasure::inverse_weibull(), {2.0}},
      {KernelSpec::exponential(), BaseMeasure::inverse_weibull(), {2.0, 3.5}},
  };
  for (const auto& c : cases) {
    const GeneralizedGammaIntensity in(0.4, 0.8, c.base);
    const PosteriorModel m(c.k, in, obs({{2.0, false}, {3.5, false}, {5.0, true}}));
    const int n = static_cast<int>(c.members.size());
    auto density = [&](double x) {
      if (!(x > 0.0)) return 0.0;
      double p = m.tau_n(n, x) * in.base.density(x);
      for (double y : c.members) p *= eval_kernel(c.k, y, x);
      return p;
    };
    const double hi = c.k.kind == KernelKind::exponential ? 400.0 : 6.0;
    std::vector<double> cuts = m.tilt_kinks();
    cuts.push_back(1.0);
    const double Z = oracle::tanh_sinh(density, 0.0, c.k.kind == KernelKind::exponential ? INFINITY : hi, cuts);
    CAPTURE(c.k.name());
    CAPTURE(n);
    CHECK(m.location_mass(c.members) == doctest::Approx(Z).epsilon(1e-8));
    RngStream rng(41 + n);
    std::vector<double> d(20000);
    for (auto& x : d) x = m.sample_location(c.members, rng);
    std::vector<double> grid, cdf;
    double acc = 0.0, prev = 0.0;
    const int G = 120;
    for (int i = 1; i <= G; ++i) {
      const double x = c.k.kind == KernelKind::exponential ? 0.02 * std::pow(hi / 0.02, double(i) / G) : hi * i / G;
      std::vector<double> inner;
      for (double kk : cuts)
        if (kk > prev && kk < x) inner.push_back(kk);
      acc += oracle::tanh_sinh(density, prev, x, inner);
      if (i == 1) acc += oracle::tanh_sinh(density, 0.0, prev > 0 ? prev : 0.0);
      grid.push_back(x);
      cdf.push_back(acc / Z);
      prev = x;
    }
    CHECK(grid_ks(d, grid, cdf) < 1.63 / std::sqrt(20000.0));
  }
}

TEST_CASE("Gibbs partition law matches enumeration on a discrete toy") {
  std::vector<double> loc, mass;
  for (int i = 0; i < 10; ++i) {
    loc.push_back(0.25 + 0.5 * i);
    mass.push_back(0.2 + 0.1 * (i % 3));
  }
  const GeneralizedGammaIntensity in(0.4, 1.0, BaseMeasure::discrete(loc, mass));
  const double y1 = 3.0, y2 = 5.0;
  const PosteriorModel m(KernelSpec::dykstra_laud(), in, obs({{y1, false}, {y2, false}}));
  auto k = [&](double y, double x) { return eval_kernel(m.kernel(), y, x); };
  // Theorem-style enumeration: partitions {12} and {1}{2}
  double M2 = 0.0, M1a = 0.0, M1b = 0.0;
  for (std::size_t i = 0; i < loc.size(); ++i) {
    M2 += mass[i] * m.tau_n(2, loc[i]) * k(y1, loc[i]) * k(y2, loc[i]);
    M1a += mass[i] * m.tau_n(1, loc[i]) * k(y1, loc[i]);
    M1b += mass[i] * m.tau_n(1, loc[i]) * k(y2, loc[i]);
  }
  const double Z = M2 + M1a * M1b;
  std::vector<double> exact_loc(loc.size());
  for (std::size_t i = 0; i < loc.size(); ++i)
    exact_loc[i] = mass[i] * k(y1, loc[i]) * (m.tau_n(2, loc[i]) * k(y2, loc[i]) + m.tau_n(1, loc[i]) * M1b) / Z;

  for (bool refresh : {true, false}) {
    RngStream rng(2024);
    PosteriorState s(m, rng);
    for (int i = 0; i < 1000; ++i) s.gibbs_sweep(rng, refresh);
    const int sweeps = 100000;
    double together = 0.0;
    std::vector<double> hits(loc.size(), 0.0);
    for (int i = 0; i < sweeps; ++i) {
      s.gibbs_sweep(rng, refresh);
      if (i % 1000 == 0) s.check_invariants();
      const auto& lab = s.labels();
      together += lab[0] == lab[1];
      const double x = s.clusters()[lab[0]].location;
      hits[std::lower_bound(loc.begin(), loc.end(), x - 1e-12) - loc.begin()] += 1.0;
    }
    const double p = together / sweeps;
    CAPTURE(refresh);
    CHECK(std::abs(p - M2 / Z) < 0.02);  // TV over the two partitions
    double tv = 0.0;
    for (std::size_t i = 0; i < loc.size(); ++i) tv += 0.5 * std::abs(hits[i] / sweeps - exact_loc[i]);
    CHECK(tv < 0.02);
  }
}

TEST_CASE("censored observations never spawn clusters") {
  const PosteriorModel m(KernelSpec::ornstein_uhlenbeck(1.0), {0.2, 1.0},
                         obs({{1.0, true}, {2.0, false}, {3.0, true}, {0.5, true}}));
  CHECK(m.exact_count() == 1);
  CHECK(m.K_m(0.2) > PosteriorModel(KernelSpec::ornstein_uhlenbeck(1.0), {0.2, 1.0}, obs({{2.0, false}})).K_m(0.2));
  RngStream rng(1);
  PosteriorState s(m, rng);
  for (int i = 0; i < 50; ++i) {
    s.gibbs_sweep(rng);
    CHECK(s.labels().size() == 1);
    CHECK(s.clusters().size() == 1);
    CHECK(s.clusters()[0].location <= 2.0);
  }
}

TEST_CASE("no data: the posterior is the prior") {
  const GeneralizedGammaIntensity in(0.3, 1.0);
  const PosteriorModel m(KernelSpec::ornstein_uhlenbeck(2.0), in, {});
  TruncationPolicy pol;
  pol.budget = 1e-3;
  RngStream a(7), b(7);
  const auto post = sample_posterior_crm(m, {0.0, 20.0}, pol, a);
  const auto prior = sample_crm(in, {0.0, 20.0}, pol, b);
  REQUIRE(post.atoms.size() == prior.atoms.size());
  for (std::size_t i = 0; i < post.atoms.size(); ++i) {
    CHECK(post.atoms[i].location == prior.atoms[i].location);
    CHECK(post.atoms[i].weight == prior.atoms[i].weight);
  }
  for (double T : {1.0, 10.0})
    CHECK(posterior_mean_cumulative_hazard(m, T) ==
          doctest::Approx(prior_moments(m.kernel(), TiltedIntensity::prior(in), T).mean_cumulative));
  RngStream r(1);
  PosteriorState s(m, r);
  CHECK(s.clusters().empty());
  CHECK(sample_posterior_hazard(s, {0.0, 20.0}, pol, r).fixed_atoms.empty());
}

TEST_CASE("thinned CRM mean matches the tilted first moment") {
  const GeneralizedGammaIntensity in(0.3, 1.0);
  const PosteriorModel m(KernelSpec::dykstra_laud(), in, obs({{1.5, false}, {2.5, false}, {4.0, true}}));
  const double T = 5.0;
  TruncationPolicy pol;
  pol.budget = 1e-4;
  WindowSampler ws(in.base, {0.0, T});
  std::vector<double> H(10000);
  for (std::size_t i = 0; i < H.size(); ++i) {
    RngStream rng = RngStream::derive(11, i);
    HazardRealization r;
    r.kernel = m.kernel();
    r.crm = sample_posterior_crm(m, {0.0, T}, pol, ws, rng);
    H[i] = cumulative_hazard(r, T);
  }
  const auto s = summarize(H);
  const double target = posterior_mean_cumulative_hazard(m, T);
  // quadrature oracle of int (T - x) (gamma + K_m(x))^{sigma - 1} dx
  const double oracle_mean = oracle::tanh_sinh(
      [&](double x) { return (T - x) * std::pow(1.0 + m.K_m(x), -0.7); }, 0.0, T, {1.5, 2.5, 4.0});
  CHECK(target == doctest::Approx(oracle_mean).epsilon(1e-9));
  CHECK(std::abs(s.mean - target) < 3 * s.se_mean);
  CHECK(target < prior_moments(m.kernel(), m.prior_field(), T).mean_cumulative);
}

TEST_CASE("thinning and direct posterior samplers agree") {
  const GeneralizedGammaIntensity in(0.0, 1.0);
  const PosteriorModel m(KernelSpec::dykstra_laud(), in, obs({{2.0, false}, {4.0, true}}));
  const double T = 6.0, eps = 1e-2;
  TruncationPolicy pol;
  pol.jump_floor = eps;
  pol.budget = 1.0;  // the floor is set explicitly; the dropped mass is irrelevant here
  const int R = 400;
  std::vector<double> thin(4 * R), direct(R);
  for (int i = 0; i < 4 * R; ++i) {
    RngStream rng = RngStream::derive(5, 0, i);
    HazardRealization h;
    h.kernel = m.kernel();
    h.crm = sample_posterior_crm(m, {0.0, T}, pol, rng);
    thin[i] = cumulative_hazard(h, T);
  }
  for (int i = 0; i < R; ++i) {
    RngStream rng = RngStream::derive(5, 1, i);
    HazardRealization h;
    h.kernel = m.kernel();
    h.crm = sample_posterior_crm_direct(m, {0.0, T}, eps, rng);
    for (const auto& a : h.crm.atoms) CHECK(a.weight >= eps);
    CHECK(std::is_sorted(h.crm.atoms.begin(), h.crm.atoms.end(),
                         [](const Atom& x, const Atom& y) { return x.location < y.location; }));
    direct[i] = cumulative_hazard(h, T);
  }
  const auto a = summarize(thin), b = summarize(direct);
  CHECK(std::abs(a.mean - b.mean) < 3 * std::hypot(a.se_mean, b.se_mean));
  CHECK(std::abs(a.variance - b.variance) < 3 * std::hypot(a.se_variance, b.se_variance));
  CHECK(ks_two_sample(thin, direct).p_value > 0.01);
}

TEST_CASE("posterior predictive survival on a discrete toy") {
  std::vector<double> loc{0.5, 1.0, 1.5, 2.0, 2.5, 3.0}, mass{0.3, 0.5, 0.2, 0.4, 0.6, 0.3};
  for (double sigma : {0.0, 0.5}) {
    const double g = 1.0, y = 2.2;
    const GeneralizedGammaIntensity in(sigma, g, BaseMeasure::discrete(loc, mass));
    const PosteriorModel m(KernelSpec::dykstra_laud(), in, obs({{y, false}, {1.2, true}}));
    TruncationPolicy pol;
    pol.budget = 1e-2;
    const double eps = jump_floor_for_budget(in, pol.budget);
    // the sampled CRM keeps jumps above eps only, so the oracle does too
    auto psi_eps = [&](double K, double u) {
      if (u == 0.0) return 0.0;
      return oracle::tanh_sinh(
          [&](double v) {
            return -std::expm1(-u * v) * std::exp(-(g + K) * v - (1 + sigma) * std::log(v) - std::lgamma(1 - sigma));
          },
          eps, INFINITY, {1.0});
    };
    auto exact = [&](double t) {
      double crm = 0.0, latent = 0.0, Z = 0.0;
      for (std::size_t i = 0; i < loc.size(); ++i) {
        const double K = m.K_m(loc[i]), a = std::max(t - loc[i], 0.0);
        crm += mass[i] * psi_eps(K, a);
        if (loc[i] <= y) {
          const double w = mass[i] * m.tau_n(1, loc[i]);
          Z += w;
          latent += w * std::pow((g + K) / (g + K + a), 1.0 - sigma);
        }
      }
      return std::exp(-crm) * latent / Z;
    };
    const std::vector<double> ts{0.7, 1.8, 2.6, 3.5};
    std::vector<std::vector<double>> S(ts.size(), std::vector<double>(20000));
    for (int i = 0; i < 20000; ++i) {
      RngStream rng = RngStream::derive(17, i);
      PosteriorState s(m, rng);  // n = 1: exact latent draw
      const auto h = sample_posterior_hazard(s, {0.0, 4.0}, pol, rng);
      REQUIRE(h.crm.jump_floor == eps);
      CHECK(hazard_at(h, y) > 0.0);
      for (std::size_t j = 0; j < ts.size(); ++j) S[j][i] = std::exp(-cumulative_hazard(h, ts[j]));
    }
    for (std::size_t j = 0; j < ts.size(); ++j) {
      const auto s = summarize(S[j]);
      CAPTURE(sigma);
      CAPTURE(ts[j]);
      CHECK(std::abs(s.mean - exact(ts[j])) < 3 * s.se_mean);
    }
  }
}

TEST_CASE("posterior kT3 never exceeds the prior kT3") {
  for (const auto& k : {KernelSpec::dykstra_laud(), KernelSpec::ornstein_uhlenbeck(1.0), KernelSpec::rectangular(0.5)}) {
    const PosteriorModel m(k, {0.25, 1.0}, obs({{1.0, false}, {2.0, true}, {3.0, false}}));
    const auto post = m.posterior_field(), prior = m.prior_field();
    for (double T : {5.0, 20.0})
      for (double x = 0.0; x < T; x += T / 7.0) {
        const double a = kT3(k, post, 1.0, x, T), b = kT3(k, prior, 1.0, x, T);
        CHECK(a >= 0.0);
        CHECK(a <= b * (1 + 1e-9));
      }
  }
}

TEST_CASE("OU centring A_T decays like 1/T") {
  const PosteriorModel m(KernelSpec::ornstein_uhlenbeck(2.0), {0.0, 1.0}, obs({{0.7, false}, {1.4, false}}));
  const std::vector<Atom> atoms{{0.5, 1.3}, {1.0, 0.4}};
  std::vector<double> lt, la;
  for (double T : {100.0, 300.0, 1000.0, 3000.0}) {
    const double A = centering_A_T(m, atoms, T);
    CHECK(A > 0.0);
    lt.push_back(std::log(T));
    la.push_back(std::log(A));
  }
  CHECK(least_squares(lt, la).slope == doctest::Approx(-1.0).epsilon(0.1));
  CHECK(centering_A_T(m, {}, 100.0) == 0.0);
}

TEST_CASE("DL posterior mean expansion for one observation") {
  for (double sigma : {0.0, 0.4})
    for (double g : {1.0, 2.5}) {
      const double Y = 3.0;
      const PosteriorModel m(KernelSpec::dykstra_laud(), {sigma, g}, obs({{Y, false}}));
      const double base = std::pow(g, sigma - 1.0);
      const double inner = sigma == 0.0 ? std::log((Y + g) / g) : (std::pow(Y + g, sigma) - std::pow(g, sigma)) / sigma;
      auto residual = [&](double T) {
        return posterior_mean_cumulative_hazard(m, T) - T * T * base / 2 + T * (Y * base - inner);
      };
      const double r0 = residual(100.0);
      for (double T : {1e3, 1e4}) {
        CAPTURE(sigma);
        CAPTURE(T);
        CHECK(std::abs(residual(T)) < 10.0 * std::abs(r0));
        // the residual is the T-free constant -int_0^Y x ((Y - x + g)^{sigma-1} - g^{sigma-1}) dx
        CHECK(residual(T) == doctest::Approx(r0).epsilon(1e-6));
      }
    }
}

TEST_CASE("checkpoint resumes the chain exactly") {
  const PosteriorModel m(KernelSpec::ornstein_uhlenbeck(1.0), {0.3, 1.0},
                         obs({{0.5, false}, {1.1, false}, {1.3, true}, {2.0, false}, {0.9, false}}));
  RngStream rng(77);
  PosteriorState s(m, rng);
  for (int i = 0; i < 20; ++i) s.gibbs_sweep(rng);
  const auto cp = s.checkpoint(rng, 20);
  CHECK(cp.sweeps == 20);
  PosteriorState t(m, cp.labels, cp.clusters);
  RngStream rng2(0);
  rng2.restore(cp.rng_state);
  for (int i = 0; i < 15; ++i) {
    s.gibbs_sweep(rng);
    t.gibbs_sweep(rng2);
  }
  s.sample_fixed_jumps(rng);
  t.sample_fixed_jumps(rng2);
  CHECK(s.labels() == t.labels());
  REQUIRE(s.clusters().size() == t.clusters().size());
  for (std::size_t j = 0; j < s.clusters().size(); ++j) {
    CHECK(s.clusters()[j].location == t.clusters()[j].location);
    CHECK(s.clusters()[j].jump == t.clusters()[j].jump);
  }
  CHECK_THROWS_AS(PosteriorState(m, {0, 0}, cp.clusters), ConfigurationError);
}

TEST_CASE("conditional mean hazard averages the sampled hazards") {
  const PosteriorModel m(KernelSpec::dykstra_laud(), {0.2, 1.0}, obs({{1.0, false}, {2.0, false}, {2.5, true}}));
  RngStream rng(4);
  PosteriorState s(m, rng);
  for (int i = 0; i < 10; ++i) s.gibbs_sweep(rng);
  TruncationPolicy pol;
  pol.budget = 1e-4;
  for (double t : {0.5, 1.5, 3.0}) {
    std::vector<double> h(4000);
    for (auto& v : h) v = hazard_at(sample_posterior_hazard(s, {0.0, 3.0}, pol, rng), t);
    const auto sum = summarize(h);
    CHECK(std::abs(sum.mean - conditional_mean_hazard(s, t)) < 3 * sum.se_mean);
  }
}
