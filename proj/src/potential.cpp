#include "abohm/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

#include "abohm/quadrature.hpp"
#include "json.hpp"

namespace abohm::potential {

namespace {

constexpr int kBumpKnots = 1025;

double bump_raw(double t) {
  return t < 1.0 ? std::exp(-1.0 / (1.0 - t)) : 0.0;
}

struct Step {
  double s = 0.0, d1 = 0.0, d2 = 0.0;
};

// C-infinity step a/(a+b), a = exp(-1/u), b = exp(-1/(1-u)); exact 0/1 with
// vanishing derivatives outside a hair inside [0,1] where the exponentials
// underflow anyway.
Step smoothstep(double u) {
  if (u <= 1e-8) return {0.0, 0.0, 0.0};
  if (u >= 1.0 - 1e-8) return {1.0, 0.0, 0.0};
  double v = 1.0 - u;
  double a = std::exp(-1.0 / u), b = std::exp(-1.0 / v);
  double iu2 = 1.0 / (u * u), iv2 = 1.0 / (v * v);
  double D = a + b;
  double c = iu2 + iv2;
  double N = a * b * c;
  double Dp = a * iu2 - b * iv2;
  double Np =
      a * b * ((iu2 - iv2) * c + 2.0 * (1.0 / (v * v * v) - 1.0 / (u * u * u)));
  Step st;
  st.s = a / D;
  st.d1 = N / (D * D);
  st.d2 = Np / (D * D) - 2.0 * N * Dp / (D * D * D);
  return st;
}

const GaussRule& gauss8() {
  static const GaussRule r(8);
  return r;
}

const GaussRule& gauss16() {
  static const GaussRule r(16);
  return r;
}

// escort target near t = 2: T(t) = -log(4-t^2)/2, written against 2-t so the
// values stay accurate when t hugs 2 (2-t is exact for t in [1,2])
double log_target(double t, double tm) { return -0.5 * std::log(tm * (2.0 + t)); }
double log_target_d1(double t, double tm) { return t / (tm * (2.0 + t)); }
double log_target_d2(double t, double tm) {
  double f = tm * (2.0 + t);
  return (4.0 + t * t) / (f * f);
}

}  // namespace

double BumpProfile::density(double t) const {
  return t >= 1.0 ? 0.0 : c0 * bump_raw(std::max(t, 0.0));
}

double BumpProfile::mass_fraction(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return F_table.back();
  int knots = (int)F_table.size();
  double x = t * (knots - 1);
  int i = std::min((int)x, knots - 2);
  double ti = double(i) / (knots - 1);
  double tail_piece = gauss64().integrate(
      ti, t, [this](double u) { return kTwoPi * c0 * bump_raw(u) * u; });
  return F_table[i] + tail_piece;
}

double BumpProfile::tail(double t) const {
  if (t >= 1.0) return 0.0;
  t = std::max(t, 0.0);
  int knots = (int)G_table.size();
  double x = t * (knots - 1);
  int i = std::min((int)x, knots - 2);
  double tn = double(i + 1) / (knots - 1);
  double head = gauss64().integrate(
      t, tn, [this](double s) { return mass_fraction(s) / s; });
  return G_table[i + 1] + head;
}

BumpProfile normalize_bump() {
  BumpProfile bp;
  double I = adaptive_simpson([](double r) { return bump_raw(r) * r; }, 0.0,
                              1.0, 1e-13);
  bp.c0 = 1.0 / (kTwoPi * I);

  bp.F_table.assign(kBumpKnots, 0.0);
  double step = 1.0 / (kBumpKnots - 1);
  for (int i = 1; i < kBumpKnots; ++i) {
    double a = (i - 1) * step, b = i * step;
    bp.F_table[i] =
        bp.F_table[i - 1] +
        gauss64().integrate(
            a, b, [&bp](double u) { return kTwoPi * bp.c0 * bump_raw(u) * u; });
  }

  bp.G_table.assign(kBumpKnots, 0.0);
  for (int i = kBumpKnots - 2; i >= 0; --i) {
    double a = i * step, b = (i + 1) * step;
    bp.G_table[i] =
        bp.G_table[i + 1] +
        gauss64().integrate(
            a, b, [&bp](double s) { return bp.mass_fraction(s) / s; });
  }
  return bp;
}

FieldEval charge_eval(const RadialCharge& c, const BumpProfile& bump,
                      Complex z) {
  FieldEval out;
  double mu = c.mu.value();
  Complex d = z - c.center;
  double r = std::abs(d);
  if (r >= c.rho) {
    out.phi = mu * std::log(r);
    out.grad = mu * d / (r * r);
    out.lap = 0.0;
    return out;
  }
  double t = r / c.rho;
  out.phi = mu * (std::log(c.rho) - bump.tail(t));
  out.grad = (r > 0.0) ? Complex(mu * bump.mass_fraction(t) / (r * r)) * d
                       : Complex(0.0, 0.0);
  out.lap = kTwoPi * mu * bump.density(t) / (c.rho * c.rho);
  return out;
}

double CutoffWindow::value(double t) const {
  if (t <= t_lo) return 1.0;
  if (t >= t_hi) return 0.0;
  return 1.0 - smoothstep((t - t_lo) / (t_hi - t_lo)).s;
}

double CutoffWindow::d1(double t) const {
  if (t <= t_lo || t >= t_hi) return 0.0;
  double w = t_hi - t_lo;
  return -smoothstep((t - t_lo) / w).d1 / w;
}

double CutoffWindow::d2(double t) const {
  if (t <= t_lo || t >= t_hi) return 0.0;
  double w = t_hi - t_lo;
  return -smoothstep((t - t_lo) / w).d2 / (w * w);
}

namespace {

constexpr int kRampKnots = 513;
constexpr double kRampEnd = 1.5;

// chi2'' on the ramp is kappa * S(3(t-1)); these helpers integrate it
// against the stored cumulative knot tables so ramp evaluation is exact to
// quadrature precision at any t.
double ramp_slope_at(const ConvexEscort& e, double t) {
  double h = (kRampEnd - 1.0) / (kRampKnots - 1);
  int i = std::min((int)((t - 1.0) / h), kRampKnots - 2);
  i = std::max(i, 0);
  double ti = 1.0 + i * h;
  return e.ramp_d1[i] +
         e.kappa * gauss8().integrate(ti, t, [](double u) {
           return smoothstep(3.0 * (u - 1.0)).s;
         });
}

double ramp_value_at(const ConvexEscort& e, double t) {
  double h = (kRampEnd - 1.0) / (kRampKnots - 1);
  int i = std::min((int)((t - 1.0) / h), kRampKnots - 2);
  i = std::max(i, 0);
  double ti = 1.0 + i * h;
  return e.ramp_val[i] + gauss8().integrate(ti, t, [&e](double u) {
           return ramp_slope_at(e, u);
         });
}

// integral over the blend of (1-W)(T'-s0), from blend coordinate v0 to 1;
// the damping (1-W) keeps the integrand bounded even when q hugs 2
double blend_tail(const ConvexEscort& e, double v0) {
  double span = e.q - e.p;
  return gauss64().integrate(v0, 1.0, [&e, span](double v) {
    double tm = e.two_minus_q + span * (1.0 - v);
    double u = 2.0 - tm;
    return span * (1.0 - smoothstep(v).s) * (log_target_d1(u, tm) - e.s0);
  });
}

}  // namespace

double ConvexEscort::value(double t) const {
  if (t <= 1.0) return 0.0;
  if (t < kRampEnd) return ramp_value_at(*this, t);
  if (t <= p) return val_ramp_end + s0 * (t - kRampEnd);
  require(t < 2.0, "outside-domain", "escort is defined on t < 2");
  double tm = 2.0 - t;
  if (t >= q) return log_target(t, tm);
  double v0 = (t - p) / (q - p);
  return log_target(t, tm) + blend_tail(*this, v0);
}

double ConvexEscort::d1(double t) const {
  if (t <= 1.0) return 0.0;
  if (t < kRampEnd) return ramp_slope_at(*this, t);
  if (t <= p) return s0;
  require(t < 2.0, "outside-domain", "escort is defined on t < 2");
  double tm = 2.0 - t;
  if (t >= q) return log_target_d1(t, tm);
  double w = smoothstep((t - p) / (q - p)).s;
  return (1.0 - w) * s0 + w * log_target_d1(t, tm);
}

double ConvexEscort::d2(double t) const {
  if (t <= 1.0) return 0.0;
  if (t < kRampEnd) return kappa * smoothstep(3.0 * (t - 1.0)).s;
  if (t <= p) return 0.0;
  require(t < 2.0, "outside-domain", "escort is defined on t < 2");
  double tm = 2.0 - t;
  if (t >= q) return log_target_d2(t, tm);
  Step st = smoothstep((t - p) / (q - p));
  return st.d1 / (q - p) * (log_target_d1(t, tm) - s0) +
         st.s * log_target_d2(t, tm);
}

ConvexEscort make_escort(double kappa) {
  require(kappa > 0.0, "invalid-params", "escort curvature must be positive");
  ConvexEscort e;
  e.kappa = kappa;

  e.ramp_d1.assign(kRampKnots, 0.0);
  e.ramp_val.assign(kRampKnots, 0.0);
  double h = (kRampEnd - 1.0) / (kRampKnots - 1);
  for (int i = 1; i < kRampKnots; ++i) {
    double a = 1.0 + (i - 1) * h, b = 1.0 + i * h;
    e.ramp_d1[i] = e.ramp_d1[i - 1] +
                   kappa * gauss16().integrate(a, b, [](double u) {
                     return smoothstep(3.0 * (u - 1.0)).s;
                   });
    e.ramp_val[i] = e.ramp_val[i - 1] +
                    gauss16().integrate(a, b, [&e](double u) {
                      return ramp_slope_at(e, u);
                    });
  }
  e.s0 = e.ramp_d1.back();
  e.val_ramp_end = e.ramp_val.back();

  // earliest admissible blend start: where the log-form slope catches the
  // plateau slope (stable closed form of the quadratic root)
  double p_floor =
      2.0 - 4.0 / (4.0 * e.s0 + 1.0 + std::sqrt(1.0 + 16.0 * e.s0 * e.s0));
  p_floor = std::max(p_floor, kRampEnd);

  // mismatch between the plateau line arriving at p and the budget the
  // damped blend can absorb before q; root in q gives an exact value and
  // slope match at q
  auto mismatch = [&](double tmq) {
    double q = 2.0 - tmq;
    double pp = std::max(p_floor, 2.0 - 64.0 * tmq);
    ConvexEscort trial = e;
    trial.p = pp;
    trial.q = q;
    trial.two_minus_p = 2.0 - pp;
    trial.two_minus_q = tmq;
    double line_p = e.val_ramp_end + e.s0 * (pp - kRampEnd);
    return line_p - log_target(pp, 2.0 - pp) - blend_tail(trial, 0.0);
  };

  double tmq_hi = (2.0 - p_floor) * (1.0 - 1e-3);
  require(mismatch(tmq_hi) > 0.0, "invalid-params",
          "escort blend bracket failed at the plateau end");
  double tmq_lo = tmq_hi;
  while (mismatch(tmq_lo) > 0.0) {
    tmq_lo *= 0.25;
    if (tmq_lo < 1e-15)
      fail("invalid-params",
           "escort curvature too large to blend onto the log form in double "
           "precision");
  }
  double la = std::log(tmq_lo), lb = std::log(tmq_hi);
  for (int it = 0; it < 200; ++it) {
    double lm = 0.5 * (la + lb);
    if (mismatch(std::exp(lm)) > 0.0)
      lb = lm;
    else
      la = lm;
  }
  double tmq = std::exp(0.5 * (la + lb));
  e.q = 2.0 - tmq;
  e.p = std::max(p_floor, 2.0 - 64.0 * tmq);
  e.two_minus_q = tmq;
  e.two_minus_p = 2.0 - e.p;
  require(e.q > e.p, "invalid-params", "escort blend interval collapsed");
  return e;
}

FieldEval PotentialField::eval(Complex z) const {
  FieldEval base;
  for (const auto& c : charges) {
    FieldEval ce = charge_eval(c, bump, z);
    base.phi += ce.phi;
    base.grad += ce.grad;
    base.lap += ce.lap;
  }
  for (const auto& f : point_fluxes) {
    Complex d = z - f.center;
    double r2 = std::norm(d);
    require(r2 > 0.0, "singular-eval",
            "point-flux potential requested at its singular center");
    base.phi += f.alpha * 0.5 * std::log(r2);
    base.grad += f.alpha * d / r2;
  }
  if (!extended) return base;
  double t = std::abs(z);
  if (t <= 1.0) return base;
  require(t < 2.0, "outside-domain", "extended field is defined on |z| < 2");
  const ConvexEscort& e = *escort;
  double w = window.value(t), w1 = window.d1(t), w2 = window.d2(t);
  double c2v = e.value(t), c21 = e.d1(t), c22 = e.d2(t);
  Complex rhat = z / t;
  double radial = base.grad.real() * rhat.real() + base.grad.imag() * rhat.imag();
  FieldEval out;
  out.phi = base.phi * w + c2v;
  out.grad = base.grad * w + (base.phi * w1 + c21) * rhat;
  out.lap = base.lap * w + 2.0 * w1 * radial + base.phi * (w2 + w1 / t) +
            (c22 + c21 / t);
  return out;
}

double PotentialField::lap(Complex z) const {
  if (extended) return eval(z).lap;
  double acc = 0.0;
  for (const auto& c : charges) {
    Complex d = z - c.center;
    // squared-norm reject: the contribution vanishes outside the support, and
    // the margin keeps the exact branch in charge of borderline radii
    if (std::norm(d) >= c.rho * c.rho * 1.0000001) continue;
    double r = std::abs(d);
    if (r >= c.rho) continue;
    acc += kTwoPi * c.mu.value() * bump.density(r / c.rho) / (c.rho * c.rho);
  }
  for (const auto& f : point_fluxes)
    require(std::norm(z - f.center) > 0.0, "singular-eval",
            "point-flux potential requested at its singular center");
  return acc;
}

double PotentialField::total_flux() const {
  double s = 0.0;
  for (const auto& c : charges) s += c.mu.value();
  for (const auto& f : point_fluxes) s += f.alpha;
  return s;
}

double PotentialField::flux_in_disk(Complex c, double R) const {
  double mass = 0.0;
  for (const auto& ch : charges) {
    double d = std::abs(ch.center - c);
    if (d + ch.rho <= R) {
      mass += ch.mu.value() * bump.mass_fraction(1.0);
      continue;
    }
    if (d - ch.rho >= R) continue;
    // partial overlap: integrate density times the angular overlap measure
    double lo = std::max(0.0, d - R), hi = std::min(ch.rho, d + R);
    if (hi <= lo) continue;
    auto segment = [&](double s) {
      double ang;
      if (s <= R - d)
        ang = kTwoPi;
      else if (s >= d + R || s <= d - R)
        ang = 0.0;
      else {
        double cosv = (d * d + s * s - R * R) / (2.0 * d * s);
        ang = 2.0 * std::acos(std::clamp(cosv, -1.0, 1.0));
      }
      return bump.density(s / ch.rho) * ang * s;
    };
    double kink = std::abs(R - d);
    double acc = 0.0;
    if (kink > lo && kink < hi) {
      acc += gauss64().integrate(lo, kink, segment);
      acc += gauss64().integrate(kink, hi, segment);
    } else {
      acc += gauss64().integrate(lo, hi, segment);
    }
    mass += ch.mu.value() / (ch.rho * ch.rho) * acc;
  }
  for (const auto& f : point_fluxes)
    if (std::abs(f.center - c) < R) mass += f.alpha;
  return mass;
}

std::string PotentialField::to_json() const {
  nlohmann::json j;
  j["charges"] = nlohmann::json::array();
  for (const auto& c : charges) {
    j["charges"].push_back({{"re", c.center.real()},
                            {"im", c.center.imag()},
                            {"rho", c.rho},
                            {"mu", {c.mu.num, c.mu.den}}});
  }
  j["point_fluxes"] = nlohmann::json::array();
  for (const auto& f : point_fluxes) {
    j["point_fluxes"].push_back(
        {{"re", f.center.real()}, {"im", f.center.imag()}, {"alpha", f.alpha}});
  }
  j["extended"] = extended;
  if (escort) j["escort_kappa"] = escort->kappa;
  return j.dump(2);
}

PotentialField PotentialField::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  PotentialField f;
  f.bump = normalize_bump();
  for (const auto& c : j.at("charges")) {
    RadialCharge rc;
    rc.center = Complex(c.at("re").get<double>(), c.at("im").get<double>());
    rc.rho = c.at("rho").get<double>();
    rc.mu = Rational(c.at("mu")[0].get<std::int64_t>(),
                     c.at("mu")[1].get<std::int64_t>());
    f.charges.push_back(rc);
  }
  for (const auto& p : j.at("point_fluxes")) {
    PointFlux pf;
    pf.center = Complex(p.at("re").get<double>(), p.at("im").get<double>());
    pf.alpha = p.at("alpha").get<double>();
    f.point_fluxes.push_back(pf);
  }
  f.extended = j.at("extended").get<bool>();
  if (f.extended) f.escort = make_escort(j.at("escort_kappa").get<double>());
  return f;
}

namespace {

std::int64_t capped_pow(std::int64_t b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > 63) return 64;  // anything past 63 only needs to read as "too big"
    r *= b;
  }
  return r;
}

}  // namespace

MuSchedule schedule_mu(const std::vector<geometry::Generation>& gens,
                       const std::vector<geometry::SubfamilyPartition>& parts,
                       const geometry::ThickSetParams& params,
                       std::int64_t n_max,
                       std::optional<Rational> leftover_override) {
  params.validate();
  require(!gens.empty(), "invalid-params", "no generations to schedule");
  require(parts.size() >= gens.size(), "invalid-params",
          "subfamily partitions missing for some generations");
  require(n_max >= 2, "invalid-params", "n_max must be at least N_1 = 2");
  require(n_max <= (std::int64_t(1) << 59), "invalid-params",
          "n_max too large for exact dyadic weights");

  MuSchedule sched;
  sched.n_max = n_max;
  for (std::size_t gi = 0; gi < gens.size(); ++gi) {
    const auto& gen = gens[gi];
    const auto& part = parts[gi];
    require(part.k == gen.k && part.assignment.size() == gen.size(),
            "invalid-params", "partition does not align with its generation");
    int k = gen.k;
    GenerationMu gm;
    gm.k = k;
    std::int64_t ek = capped_pow(params.B, k - 1);
    std::int64_t ek1 = capped_pow(params.B, k);
    gm.pieces_feasible = ek <= 62;
    gm.pieces = gm.pieces_feasible ? (std::int64_t(1) << ek) : 0;
    bool next_feasible = ek1 <= 62;
    std::int64_t pieces_next = next_feasible ? (std::int64_t(1) << ek1) : 0;

    if (leftover_override)
      gm.leftover = *leftover_override;
    else if (next_feasible)
      gm.leftover = Rational(1, pieces_next);
    else
      gm.leftover = Rational(1, 4 * n_max);

    double cap = params.nu[k - 1] * params.eps(k) * params.eps(k);
    require(gm.leftover.value() <= cap * (1.0 + 1e-12), "invalid-params",
            "leftover flux exceeds the nu_k eps_k^2 cap");
    require(gm.leftover.num > 0, "invalid-params",
            "leftover flux must be positive");

    gm.mu.assign(gen.size(), gm.leftover);
    gm.assigned.assign(gen.size(), 0);

    if (gm.pieces_feasible && gm.pieces < 2 * n_max) {
      std::vector<std::vector<std::size_t>> members(part.subfamilies());
      for (std::size_t j = 0; j < gen.size(); ++j)
        members[(std::size_t)part.assignment[j]].push_back(j);
      std::vector<std::size_t> cursor(members.size(), 0);

      std::int64_t upper = next_feasible
                               ? std::min<std::int64_t>(pieces_next, 2 * n_max)
                               : 2 * n_max;
      std::int64_t mandatory =
          next_feasible ? std::min<std::int64_t>(pieces_next, n_max) : n_max;
      for (std::int64_t n_lo = gm.pieces; n_lo < upper; n_lo *= 2) {
        MuBlock blk;
        blk.k = k;
        blk.n_lo = n_lo;
        blk.n_hi = 2 * n_lo;
        blk.mu = Rational(1, 4 * n_lo);
        require(blk.mu.value() <= cap * (1.0 + 1e-12), "invalid-params",
                "scheduled flux exceeds the nu_k eps_k^2 cap");
        bool complete = true;
        for (std::size_t s = 0; s < members.size(); ++s) {
          if (cursor[s] >= members[s].size()) {
            complete = false;
            break;
          }
          blk.disks.push_back(members[s][cursor[s]]);
        }
        if (!complete) {
          if (n_lo < mandatory)
            fail("insufficient-disks",
                 "subfamily exhausted; first uncovered n = " +
                     std::to_string(n_lo));
          break;
        }
        for (std::size_t s = 0; s < members.size(); ++s) {
          std::size_t disk = members[s][cursor[s]++];
          gm.mu[disk] = blk.mu;
          gm.assigned[disk] = 1;
        }
        sched.blocks.push_back(std::move(blk));
      }
    }
    sched.gens.push_back(std::move(gm));
  }
  return sched;
}

PotentialField assemble_phi(const std::vector<geometry::Generation>& gens,
                            const MuSchedule& schedule,
                            const BumpProfile& bump, int truncate_k) {
  require(truncate_k >= 0 && truncate_k <= (int)gens.size(), "invalid-params",
          "truncation level outside the built generations");
  PotentialField f;
  f.bump = bump;
  for (std::size_t gi = 0; gi < gens.size(); ++gi) {
    if (gens[gi].k > truncate_k) continue;
    const auto& gm = schedule.gens.at(gi);
    require(gm.mu.size() == gens[gi].size(), "invalid-params",
            "schedule does not match generation size");
    for (std::size_t j = 0; j < gens[gi].size(); ++j)
      f.charges.push_back({gens[gi].centers[j], gens[gi].rho, gm.mu[j]});
  }
  return f;
}

namespace {

// hashed buckets over one generation's centers at the cone radius, so the
// per-node min only touches nearby disks
struct ConeSet {
  double rho = 0.0;
  double rim = 0.0;      // eps^2/4, where the cone reaches 1
  double inv_log = 0.0;  // 1 / log(rim/rho)
  double pitch = 0.0;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> buckets;
  const std::vector<Complex>* centers = nullptr;

  static std::int64_t key(int ix, int iy) {
    return (std::int64_t(ix) << 32) ^ (std::int64_t(iy) & 0xffffffff);
  }
  void build(const geometry::Generation& g) {
    rho = g.rho;
    rim = g.eps * g.eps / 4.0;
    require(rim > rho, "invalid-params",
            "cone is undefined unless rho < eps^2/4");
    inv_log = 1.0 / std::log(rim / rho);
    pitch = rim;
    centers = &g.centers;
    for (std::size_t j = 0; j < g.centers.size(); ++j) {
      int ix = (int)std::floor(g.centers[j].real() / pitch);
      int iy = (int)std::floor(g.centers[j].imag() / pitch);
      buckets[key(ix, iy)].push_back(j);
    }
  }
  // min of the clamped cone over nearby disks; id identifies the active
  // disk, -1 when no disk is near enough to matter
  double min_cone(Complex z, std::int64_t& id) const {
    int ix = (int)std::floor(z.real() / pitch);
    int iy = (int)std::floor(z.imag() / pitch);
    double best = 1.0;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        auto it = buckets.find(key(ix + dx, iy + dy));
        if (it == buckets.end()) continue;
        for (std::size_t j : it->second) {
          double r = std::abs(z - (*centers)[j]);
          if (r >= rim) continue;
          double f = r <= rho ? 0.0 : std::log(r / rho) * inv_log;
          if (f < best) {
            best = f;
            id = (std::int64_t)j;
          }
        }
      }
    }
    return best;
  }
};

}  // namespace

TrialFunction trial_F(const std::vector<geometry::Generation>& gens, int k,
                      const grid::GridSpec& spec) {
  require(k >= 0 && k <= (int)gens.size(), "invalid-params",
          "trial level outside the built generations");
  TrialFunction tf;
  tf.mesh = build_grid(spec);
  const grid::Grid& g = tf.mesh;

  std::vector<ConeSet> cones(k);
  for (int l = 1; l <= k; ++l) cones[l - 1].build(gens[l - 1]);

  struct NodeState {
    double value = 0.0;
    std::int64_t active = -1;  // (generation << 40) | disk, -1 when smooth
  };

  auto eval = [&](Complex z, NodeState& st) {
    double base = 1.0 - std::norm(z);
    if (base <= 0.0) {
      st.value = 0.0;
      st.active = -2;  // outside the domain
      return;
    }
    double factor = 1.0;
    st.active = -1;
    for (int l = 0; l < k; ++l) {
      std::int64_t id = -1;
      double f = cones[l].min_cone(z, id);
      if (f < factor && id >= 0) {
        factor = f;
        st.active = (std::int64_t(l) << 40) | id;
      }
    }
    st.value = base * std::clamp(factor, 0.0, 1.0);
  };

  std::vector<NodeState> state(g.size());
  double h = g.h();
  tf.samples.resize(g.size());
  tf.sup_norm = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    eval(g.nodes[i], state[i]);
    tf.samples[i] = state[i].value;
    sum_sq += state[i].value * state[i].value;
    tf.sup_norm = std::max(tf.sup_norm, state[i].value);
  }
  tf.norm_l2 = std::sqrt(sum_sq * h * h);

  // Dirichlet energy over edges; rims of the cones are only Lipschitz, so
  // an edge whose endpoints see different active disks is split at its
  // midpoint and the larger one-sided slope is used (conservative upward)
  double energy = 0.0;
  auto edge_term = [&](std::size_t a, int ni, int nj) {
    int idx = g.at(ni, nj);
    double fa = tf.samples[a];
    if (idx < 0) {
      energy += fa * fa;  // boundary edge, zero outside, slope fa/h
      return;
    }
    std::size_t b = (std::size_t)idx;
    double fb = tf.samples[b];
    if (state[a].active == state[b].active) {
      double d = fb - fa;
      energy += d * d;
      return;
    }
    Complex mid = 0.5 * (g.nodes[a] + g.nodes[b]);
    NodeState ms;
    eval(mid, ms);
    double s1 = 2.0 * (ms.value - fa);
    double s2 = 2.0 * (fb - ms.value);
    double d = std::max(std::abs(s1), std::abs(s2));
    energy += d * d;
  };
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto [i, j] = g.node_ij[a];
    edge_term(a, i + 1, j);
    edge_term(a, i, j + 1);
    // boundary edges on the low sides too, counted once from the inside
    if (g.at(i - 1, j) < 0) energy += tf.samples[a] * tf.samples[a];
    if (g.at(i, j - 1) < 0) energy += tf.samples[a] * tf.samples[a];
  }
  tf.norm_grad_l2 = std::sqrt(energy);  // (d/h)^2 * h^2 = d^2
  return tf;
}

double mollify(const PotentialField& field, double delta, Complex z) {
  require(delta > 0.0, "invalid-params", "mollifier scale must be positive");
  const int kAngular = 64;
  double acc = 0.0;
  const GaussRule& g = gauss64();
  double mid = 0.5 * delta, half = 0.5 * delta;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    double r = mid + half * g.nodes[i];
    double ring = 0.0;
    for (int m = 0; m < kAngular; ++m) {
      double th = kTwoPi * m / kAngular;
      ring += field.phi(z - Complex(r * std::cos(th), r * std::sin(th)));
    }
    ring /= kAngular;
    acc += g.weights[i] * half * field.bump.density(r / delta) * ring * r;
  }
  return kTwoPi / (delta * delta) * acc;
}

PotentialField extend_to_psi(const PotentialField& field,
                             const CutoffWindow& window, double kappa) {
  require(!field.extended, "invalid-params", "field is already extended");
  for (const auto& c : field.charges)
    require(std::abs(c.center) + c.rho <= 1.0 + 1e-9, "invalid-params",
            "charge support leaves the unit disk");
  for (const auto& f : field.point_fluxes)
    require(std::abs(f.center) < 1.0, "invalid-params",
            "point flux outside the unit disk");

  PotentialField out = field;
  out.extended = true;
  out.window = window;
  out.escort = make_escort(kappa);

  double tol = -1e-8 * std::max(1.0, kappa);
  auto probe = [&](Complex z) {
    double lap = out.eval(z).lap;
    if (lap < tol)
      fail("not-subharmonic",
           "extension Laplacian dips to " + std::to_string(lap) + " at |z| = " +
               std::to_string(std::abs(z)) + "; raise the escort curvature");
  };

  // coarse grid over the transition annulus
  for (int j = 0; j < 129; ++j) {
    for (int i = 0; i < 129; ++i) {
      Complex z(-2.0 + 4.0 * i / 128.0, -2.0 + 4.0 * j / 128.0);
      double t = std::abs(z);
      if (t > 1.0 + 1e-6 && t < 2.0 - 1e-6) probe(z);
    }
  }
  // radial scans at a fan of angles, plus a geometric refinement toward 2
  // that resolves the blend interval
  double tmq = out.escort->two_minus_q;
  for (int a = 0; a < 16; ++a) {
    double th = kTwoPi * a / 16.0 + 0.05;
    Complex dir(std::cos(th), std::sin(th));
    for (int j = 1; j < 4096; ++j) {
      double t = 1.0 + j * (1.0 - 1e-6) / 4096.0;
      probe(t * dir);
    }
    for (int j = 0; j < 160; ++j) {
      double x = tmq * std::exp2(j / 8.0);
      if (x >= 0.5) break;
      probe((2.0 - x) * dir);
    }
  }

  // growth toward the boundary: the log form must have taken over and be
  // visibly escaping
  double q = out.escort->q;
  double t1 = 2.0 - tmq * 1e-3;
  Complex dir(std::cos(0.3), std::sin(0.3));
  if (t1 > q && t1 < 2.0) {
    double at_q = out.eval(q * dir).phi;
    double at_t1 = out.eval(t1 * dir).phi;
    require(at_t1 > at_q + 3.0, "not-subharmonic",
            "extension fails to escape toward the outer boundary");
  } else {
    double tl = 2.0 - std::max(tmq / 8.0, 1e-15);
    require(out.escort->d1(tl) > 10.0 * (out.escort->s0 + 1.0),
            "not-subharmonic",
            "extension fails to escape toward the outer boundary");
  }
  return out;
}

}  // namespace abohm::potential
