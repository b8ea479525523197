#include "hazlab/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "hazlab/errors.hpp"

namespace hazlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Proposal for latent locations: the density prod_j k(y_j, x) lambda'(x),
// expressed in a variable u (u = x, or u = 1/x for the exponential kernel).
struct Proposal {
  double lo = 0.0, hi = 0.0;
  bool reciprocal = false;
  std::function<double(double)> cdf;
  std::function<double(double)> quantile;

  double to_x(double u) const {
    if (!reciprocal) return u;
    if (u <= 0.0) return kInf;
    if (std::isinf(u)) return 0.0;
    return 1.0 / u;
  }
};

Proposal make_proposal(const KernelSpec& k, const BaseMeasure& base, std::span<const double> ys) {
  const double y_min = *std::min_element(ys.begin(), ys.end());
  const double y_max = *std::max_element(ys.begin(), ys.end());
  const double n = static_cast<double>(ys.size());
  Proposal p;
  auto uniform = [&p](double a, double b) {
    if (!(b > a)) throw DegenerateSupportError("latent location has empty support");
    p.lo = a;
    p.hi = b;
    p.cdf = [a, b](double u) { return std::clamp((u - a) / (b - a), 0.0, 1.0); };
    p.quantile = [a, b](double q) { return a + q * (b - a); };
  };
  if (k.kind == KernelKind::exponential) {
    if (base.kind() != BaseMeasureKind::inverse_weibull)
      throw UnsupportedError("exponential kernel latent sampler needs the inverse-Weibull base");
    const double shape = n - 0.5;
    const double rate = std::accumulate(ys.begin(), ys.end(), 0.0) + 1.0;
    p.lo = 0.0;
    p.hi = kInf;
    p.reciprocal = true;
    p.cdf = [shape, rate](double z) {
      if (std::isinf(z)) return 1.0;
      return z <= 0.0 ? 0.0 : boost::math::gamma_p(shape, rate * z);
    };
    p.quantile = [shape, rate](double q) { return boost::math::gamma_p_inv(shape, q) / rate; };
    return p;
  }
  if (base.kind() != BaseMeasureKind::lebesgue)
    throw UnsupportedError("latent sampler for " + k.name() + " needs the Lebesgue base measure");
  switch (k.kind) {
    case KernelKind::dykstra_laud:
      uniform(0.0, y_min);
      break;
    case KernelKind::rectangular:
      uniform(std::max(0.0, y_max - k.param), y_min + k.param);
      break;
    case KernelKind::ornstein_uhlenbeck: {
      // density proportional to e^{n kappa x} on [0, y_min]
      const double r = n * k.param;
      const double b = y_min;
      if (!(b > 0.0)) throw DegenerateSupportError("latent location has empty support");
      p.lo = 0.0;
      p.hi = b;
      p.cdf = [r, b](double x) {
        x = std::clamp(x, 0.0, b);
        return std::exp(r * (x - b)) * std::expm1(-r * x) / std::expm1(-r * b);
      };
      p.quantile = [r, b](double q) {
        return std::clamp(b + std::log(q + (1.0 - q) * std::exp(-r * b)) / r, 0.0, b);
      };
      break;
    }
    case KernelKind::exponential:
      break;
  }
  return p;
}

struct Cell {
  double a, b, ca, cb, log_r_max;
};

}  // namespace

PosteriorModel::PosteriorModel(KernelSpec kernel, GeneralizedGammaIntensity intensity,
                               std::vector<Observation> data)
    : kernel_(kernel), intensity_(std::move(intensity)), data_(std::move(data)) {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!(data_[i].time > 0.0)) throw DomainError("observation times must be positive");
    if (!data_[i].censored) exact_.push_back(i);
  }
  fresh_weights_.reserve(exact_.size());
  for (std::size_t i : exact_) {
    const double y[] = {data_[i].time};
    double w = location_mass(y);
    if (!(w > 0.0)) throw DegenerateSupportError("kernel vanishes at an observation");
    fresh_weights_.push_back(w);
  }
}

double PosteriorModel::max_time() const {
  double m = 0.0;
  for (const auto& o : data_) m = std::max(m, o.time);
  return m;
}

double PosteriorModel::K_m(double x) const {
  double s = 0.0;
  for (const auto& o : data_) s += time_integral(kernel_, x, o.time);
  return s;
}

double PosteriorModel::tau_n(int n, double x) const {
  if (n < 1) throw DomainError("tau_n needs n >= 1");
  return tilted_moment(intensity_, n, K_m(x));
}

double PosteriorModel::posterior_intensity(double v, double x) const {
  return std::exp(-v * K_m(x)) * levy_density(intensity_, v) * intensity_.base.density(x);
}

double PosteriorModel::lower_bound_intensity(double v, double x) const {
  const double bound = static_cast<double>(data_.size()) * time_integral(kernel_, x, max_time());
  return std::exp(-v * bound) * levy_density(intensity_, v) * intensity_.base.density(x);
}

std::vector<double> PosteriorModel::tilt_kinks() const {
  std::vector<double> k;
  if (kernel_.kind == KernelKind::exponential) return k;
  for (const auto& o : data_) {
    k.push_back(o.time);
    if (kernel_.kind == KernelKind::rectangular) {
      k.push_back(o.time - kernel_.param);
      k.push_back(o.time + kernel_.param);
    }
  }
  if (kernel_.kind == KernelKind::rectangular) k.push_back(kernel_.param);
  std::erase_if(k, [](double v) { return !(v > 0.0); });
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  return k;
}

TiltedIntensity PosteriorModel::prior_field() const { return TiltedIntensity::prior(intensity_); }

TiltedIntensity PosteriorModel::posterior_field() const {
  if (data_.empty()) return prior_field();
  return TiltedIntensity{intensity_, [this](double x) { return K_m(x); }, tilt_kinks()};
}

TiltedIntensity PosteriorModel::lower_bound_field() const {
  if (data_.empty()) return prior_field();
  const double n = static_cast<double>(data_.size());
  const double y = max_time();
  const KernelSpec k = kernel_;
  std::vector<double> kinks{y};
  if (k.kind == KernelKind::rectangular) kinks = {y - k.param, y + k.param, k.param};
  if (k.kind == KernelKind::exponential) kinks.clear();
  std::erase_if(kinks, [](double v) { return !(v > 0.0); });
  return TiltedIntensity{intensity_, [k, n, y](double x) { return n * time_integral(k, x, y); },
                         kinks};
}

double PosteriorModel::location_mass(std::span<const double> ys) const {
  const int n = static_cast<int>(ys.size());
  auto f = [&](double x) {
    double p = tau_n(n, x);
    for (double y : ys) p *= eval_kernel(kernel_, y, x);
    return p;
  };
  const BaseMeasure& base = intensity_.base;
  if (base.is_discrete()) return base.integrate(f, 0.0, kInf);
  const double y_min = *std::min_element(ys.begin(), ys.end());
  const double y_max = *std::max_element(ys.begin(), ys.end());
  double lo = 0.0, hi = kInf;
  switch (kernel_.kind) {
    case KernelKind::dykstra_laud:
    case KernelKind::ornstein_uhlenbeck:
      hi = y_min;
      break;
    case KernelKind::rectangular:
      lo = std::max(0.0, y_max - kernel_.param);
      hi = y_min + kernel_.param;
      break;
    case KernelKind::exponential:
      break;
  }
  auto breaks = tilt_kinks();
  if (kernel_.kind == KernelKind::exponential)
    for (double b : {0.05, 0.2, 1.0, 5.0, 25.0}) breaks.push_back(b * (1.0 + y_max));
  QuadratureOptions o;
  o.rel_tol = 1e-12;
  return base.integrate([&](double x) { return x > 0.0 || kernel_.kind != KernelKind::exponential ? f(x) : 0.0; },
                        lo, hi, breaks, o);
}

double PosteriorModel::sample_location(std::span<const double> ys, RngStream& rng) const {
  if (ys.empty()) throw DomainError("sample_location needs at least one member");
  const int n = static_cast<int>(ys.size());
  const BaseMeasure& base = intensity_.base;
  if (base.is_discrete()) {
    const auto& loc = base.atom_locations();
    const auto& mass = base.atom_masses();
    std::vector<double> cum(loc.size());
    double c = 0.0;
    for (std::size_t a = 0; a < loc.size(); ++a) {
      double w = mass[a] * tau_n(n, loc[a]);
      for (double y : ys) w *= eval_kernel(kernel_, y, loc[a]);
      c += w;
      cum[a] = c;
    }
    if (!(c > 0.0)) throw DegenerateSupportError("no atom supports the cluster");
    const double u = rng.uniform() * c;
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    if (it == cum.end()) --it;
    return loc[static_cast<std::size_t>(it - cum.begin())];
  }

  // Envelope: proposal q times max of r = (gamma / (gamma + K_m))^{n - sigma}
  // over cells on which K_m is monotone and r varies by at most a factor 2.
  const Proposal p = make_proposal(kernel_, base, ys);
  const double expo = n - intensity_.sigma;
  const double lg = std::log(intensity_.gamma);
  auto log_r = [&](double u) { return expo * (lg - std::log(intensity_.gamma + K_m(p.to_x(u)))); };

  std::vector<double> nodes{p.lo, p.hi};
  for (double kink : tilt_kinks()) {
    double u = p.reciprocal ? 1.0 / kink : kink;
    if (u > p.lo && u < p.hi) nodes.push_back(u);
  }
  for (int i = 1; i < 16; ++i) nodes.push_back(p.quantile(i / 16.0));
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  std::vector<Cell> cells;
  const double log2 = std::log(2.0);
  struct Pending {
    double a, b, ca, cb, la, lb;
    int depth;
  };
  std::vector<Pending> stack;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    double a = nodes[i], b = nodes[i + 1];
    stack.push_back({a, b, p.cdf(a), p.cdf(b), log_r(a), log_r(b), 0});
  }
  while (!stack.empty()) {
    Pending c = stack.back();
    stack.pop_back();
    const double mass = c.cb - c.ca;
    if (std::abs(c.la - c.lb) > log2 && c.depth < 60 && mass > 1e-300) {
      double m = p.quantile(0.5 * (c.ca + c.cb));
      if (!(m > c.a && m < c.b) && std::isfinite(c.b)) m = 0.5 * (c.a + c.b);
      if (m > c.a && m < c.b) {
        const double cm = p.cdf(m), lm = log_r(m);
        stack.push_back({c.a, m, c.ca, cm, c.la, lm, c.depth + 1});
        stack.push_back({m, c.b, cm, c.cb, lm, c.lb, c.depth + 1});
        continue;
      }
    }
    if (mass > 0.0) cells.push_back({c.a, c.b, c.ca, c.cb, std::max(c.la, c.lb)});
  }
  if (cells.empty()) throw DegenerateSupportError("latent location proposal has no mass");
  double top = -kInf;
  for (const auto& c : cells) top = std::max(top, c.log_r_max);
  std::vector<double> cum(cells.size());
  double total = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    total += (cells[i].cb - cells[i].ca) * std::exp(cells[i].log_r_max - top);
    cum[i] = total;
  }
  for (int attempt = 0; attempt < 1'000'000; ++attempt) {
    auto it = std::upper_bound(cum.begin(), cum.end(), rng.uniform() * total);
    if (it == cum.end()) --it;
    const Cell& c = cells[static_cast<std::size_t>(it - cum.begin())];
    double u = p.quantile(c.ca + rng.uniform() * (c.cb - c.ca));
    u = std::clamp(u, c.a, c.b);
    const double x = p.to_x(u);
    if (std::log(rng.uniform()) <= log_r(u) - c.log_r_max && x > 0.0 && std::isfinite(x)) return x;
  }
  throw DegenerateSupportError("latent location sampler failed to accept");
}

PosteriorState::PosteriorState(const PosteriorModel& model, RngStream& rng) : model_(&model) {
  const auto& exact = model.exact_indices();
  labels_.resize(exact.size());
  for (std::size_t e = 0; e < exact.size(); ++e) {
    const double y[] = {model.data()[exact[e]].time};
    Cluster c;
    c.location = model.sample_location(y, rng);
    c.size = 1;
    c.tilt = model.K_m(c.location);
    clusters_.push_back(c);
    labels_[e] = static_cast<int>(e);
  }
  sample_fixed_jumps(rng);
}

PosteriorState::PosteriorState(const PosteriorModel& model, std::vector<int> labels,
                               std::vector<Cluster> clusters)
    : model_(&model), labels_(std::move(labels)), clusters_(std::move(clusters)) {
  if (labels_.size() != model.exact_count())
    throw ConfigurationError("labels do not match the exact observations");
  for (auto& c : clusters_) c.tilt = model.K_m(c.location);
  check_invariants();
}

std::vector<Atom> PosteriorState::fixed_atoms() const {
  std::vector<Atom> a;
  a.reserve(clusters_.size());
  for (const auto& c : clusters_) a.push_back({c.location, c.jump});
  return a;
}

std::vector<double> PosteriorState::member_times(std::size_t cluster) const {
  std::vector<double> ys;
  const auto& exact = model_->exact_indices();
  for (std::size_t e = 0; e < labels_.size(); ++e)
    if (labels_[e] == static_cast<int>(cluster)) ys.push_back(model_->data()[exact[e]].time);
  return ys;
}

void PosteriorState::remove_from_cluster(std::size_t e) {
  const int j = labels_[e];
  labels_[e] = -1;
  if (--clusters_[j].size > 0) return;
  const int last = static_cast<int>(clusters_.size()) - 1;
  if (j != last) {
    clusters_[j] = clusters_[last];
    for (auto& l : labels_)
      if (l == last) l = j;
  }
  clusters_.pop_back();
}

void PosteriorState::gibbs_sweep(RngStream& rng, bool refresh_locations) {
  const PosteriorModel& m = *model_;
  const auto& exact = m.exact_indices();
  const double sigma = m.intensity().sigma, gamma = m.intensity().gamma;
  std::vector<double> w;
  for (std::size_t e = 0; e < exact.size(); ++e) {
    const double y = m.data()[exact[e]].time;
    remove_from_cluster(e);
    w.resize(clusters_.size() + 1);
    double total = 0.0;
    for (std::size_t j = 0; j < clusters_.size(); ++j) {
      const Cluster& c = clusters_[j];
      total += eval_kernel(m.kernel(), y, c.location) * (c.size - sigma) / (gamma + c.tilt);
      w[j] = total;
    }
    total += m.fresh_weight(e);
    w.back() = total;
    const double u = rng.uniform() * total;
    std::size_t pick = static_cast<std::size_t>(std::upper_bound(w.begin(), w.end(), u) - w.begin());
    if (pick >= w.size()) pick = w.size() - 1;
    if (pick == clusters_.size()) {
      const double ys[] = {y};
      Cluster c;
      c.location = m.sample_location(ys, rng);
      c.size = 1;
      c.tilt = m.K_m(c.location);
      clusters_.push_back(c);
    } else {
      clusters_[pick].size += 1;
    }
    labels_[e] = static_cast<int>(pick);
  }
  if (refresh_locations) {
    std::vector<std::vector<double>> members(clusters_.size());
    for (std::size_t e = 0; e < labels_.size(); ++e)
      members[labels_[e]].push_back(m.data()[exact[e]].time);
    for (std::size_t j = 0; j < clusters_.size(); ++j) {
      clusters_[j].location = m.sample_location(members[j], rng);
      clusters_[j].tilt = m.K_m(clusters_[j].location);
    }
  }
}

void PosteriorState::sample_fixed_jumps(RngStream& rng) {
  const auto& in = model_->intensity();
  for (auto& c : clusters_) c.jump = rng.gamma(c.size - in.sigma, in.gamma + c.tilt);
}

std::vector<int> PosteriorState::canonical_partition() const {
  std::vector<int> map(clusters_.size(), -1), out(labels_.size());
  int next = 0;
  for (std::size_t e = 0; e < labels_.size(); ++e) {
    int& slot = map[labels_[e]];
    if (slot < 0) slot = next++;
    out[e] = slot;
  }
  return out;
}

void PosteriorState::check_invariants() const {
  std::vector<int> count(clusters_.size(), 0);
  const auto& exact = model_->exact_indices();
  for (std::size_t e = 0; e < labels_.size(); ++e) {
    const int l = labels_[e];
    if (l < 0 || l >= static_cast<int>(clusters_.size()))
      throw ConfigurationError("label out of range");
    ++count[l];
    if (!(eval_kernel(model_->kernel(), model_->data()[exact[e]].time, clusters_[l].location) > 0.0))
      throw ConfigurationError("cluster location outside the kernel support of a member");
  }
  for (std::size_t j = 0; j < clusters_.size(); ++j)
    if (count[j] != clusters_[j].size || count[j] < 1)
      throw ConfigurationError("cluster sizes are inconsistent");
  if (std::accumulate(count.begin(), count.end(), 0) != static_cast<int>(model_->exact_count()))
    throw ConfigurationError("cluster sizes do not sum to the number of exact observations");
}

PosteriorCheckpoint PosteriorState::checkpoint(const RngStream& rng, std::uint64_t sweeps) const {
  return {labels_, clusters_, rng.serialize(), sweeps};
}

CrmRealization sample_posterior_crm(const PosteriorModel& model, Window window,
                                    const TruncationPolicy& policy, RngStream& rng) {
  WindowSampler sampler(model.intensity().base, window);
  return sample_posterior_crm(model, window, policy, sampler, rng);
}

CrmRealization sample_posterior_crm(const PosteriorModel& model, Window window,
                                    const TruncationPolicy& policy, const WindowSampler& sampler,
                                    RngStream& rng) {
  CrmRealization prior = sample_crm(model.intensity(), window, policy, sampler, rng);
  if (model.data().empty()) return prior;
  std::size_t kept = 0;
  for (const auto& a : prior.atoms) {
    const double keep = std::exp(-a.weight * model.K_m(a.location));
    if (rng.uniform() < keep) prior.atoms[kept++] = a;
  }
  prior.atoms.resize(kept);
  return prior;
}

CrmRealization sample_posterior_crm_direct(const PosteriorModel& model, Window window,
                                           double jump_floor, RngStream& rng) {
  const auto& in = model.intensity();
  if (in.base.is_discrete()) throw UnsupportedError("direct sampler needs a continuous base");
  // Composite Gauss-Legendre nodes over the window, split at the tilt kinks.
  std::vector<double> edges{window.lower, window.upper};
  for (double k : model.tilt_kinks())
    if (k > window.lower && k < window.upper) edges.push_back(k);
  std::sort(edges.begin(), edges.end());
  using Rule = boost::math::quadrature::gauss<double, 20>;
  std::vector<double> node_rate, node_weight;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    const int panels = 16;
    const double h = (edges[s + 1] - edges[s]) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = edges[s] + (p + 0.5) * h;
      for (std::size_t i = 0; i < Rule::abscissa().size(); ++i) {
        for (int sgn : {-1, 1}) {
          const double x = mid + sgn * 0.5 * h * Rule::abscissa()[i];
          node_rate.push_back(model.K_m(x));
          node_weight.push_back(0.5 * h * Rule::weights()[i] * in.base.density(x));
        }
      }
    }
  }
  auto tail = [&](double v) {
    double s = 0.0;
    for (std::size_t q = 0; q < node_rate.size(); ++q)
      s += node_weight[q] * tail_mass(in.tilted(node_rate[q]), v);
    return s;
  };
  auto rho_total = [&](double v) {
    double s = 0.0;
    for (std::size_t q = 0; q < node_rate.size(); ++q)
      s += node_weight[q] * std::exp(-v * node_rate[q]);
    return s * levy_density(in, v);
  };
  CrmRealization out;
  out.window = window;
  out.jump_floor = jump_floor;
  out.window_mass = in.base.window_mass(window.lower, window.upper);
  out.expected_dropped_mass = out.window_mass * small_jump_mass(in, jump_floor);
  const double level = tail(jump_floor);
  WindowSampler sampler(in.base, window);
  double arrival = rng.exponential();
  double v = jump_floor;
  while (arrival <= level) {
    // Newton in log v on the nonhomogeneous tail mass; jumps decrease, so the
    // previous jump brackets the next one from above.
    double lo = std::log(jump_floor), hi = kInf;
    double y = std::log(out.atoms.empty() ? std::max(1.0, jump_floor) : v);
    for (int it = 0; it < 200; ++it) {
      const double n = tail(std::exp(y));
      const double f = std::log(n) - std::log(arrival);
      if (std::abs(f) < 1e-13) break;
      if (f > 0.0)
        lo = y;
      else
        hi = y;
      double next = y + f * n / (std::exp(y) * rho_total(std::exp(y)));
      if (!(next > lo && next < hi)) next = std::isfinite(hi) ? 0.5 * (lo + hi) : y + 1.0;
      if (std::abs(next - y) < 1e-14 * std::max(1.0, std::abs(y))) {
        y = next;
        break;
      }
      y = next;
    }
    v = std::max(std::exp(y), jump_floor);
    // location given the jump: lambda restricted to the window, tilted by e^{-v K_m}
    double x;
    do {
      x = sampler.sample(rng);
    } while (rng.uniform() >= std::exp(-v * model.K_m(x)));
    out.atoms.push_back({x, v});
    arrival += rng.exponential();
  }
  std::sort(out.atoms.begin(), out.atoms.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  return out;
}

HazardRealization sample_posterior_hazard(PosteriorState& state, Window window,
                                          const TruncationPolicy& policy, RngStream& rng) {
  WindowSampler sampler(state.model().intensity().base, window);
  return sample_posterior_hazard(state, window, policy, sampler, rng);
}

HazardRealization sample_posterior_hazard(PosteriorState& state, Window window,
                                          const TruncationPolicy& policy,
                                          const WindowSampler& sampler, RngStream& rng) {
  state.sample_fixed_jumps(rng);
  HazardRealization r;
  r.kernel = state.model().kernel();
  r.crm = sample_posterior_crm(state.model(), window, policy, sampler, rng);
  r.fixed_atoms = state.fixed_atoms();
  return r;
}

double posterior_mean_cumulative_hazard(const PosteriorModel& model, double T) {
  return prior_moments(model.kernel(), model.posterior_field(), T).mean_cumulative;
}

double centering_A_T(const PosteriorModel& model, std::span<const Atom> fixed_atoms, double T) {
  const auto field = model.posterior_field();
  double total = 0.0;
  for (const auto& a : fixed_atoms)
    total += 2.0 * a.weight * kT3(model.kernel(), field, 1.0, a.location, T);
  return total;
}

double conditional_mean_hazard(const PosteriorState& state, double t) {
  const PosteriorModel& m = state.model();
  double h = mean_hazard(m.kernel(), m.posterior_field(), t);
  for (const auto& c : state.clusters())
    h += eval_kernel(m.kernel(), t, c.location) * (c.size - m.intensity().sigma) /
         (m.intensity().gamma + c.tilt);
  return h;
}

}  // namespace hazlab
