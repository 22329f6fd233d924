#include "fpt/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fpt/error.hpp"

namespace fpt {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Moments of (J - shift) from moments of J.
double shifted_moment(const double* m, int r, double shift) {
    double s = 0.0;
    for (int i = 0; i <= r; ++i) {
        double c = binom(r, i) * std::pow(-shift, r - i);
        if (c == 0.0) continue;
        s += c * m[i];
    }
    return s;
}

const TailFamily& tilted_base(const TiltedHeavy& t) {
    if (!t.base) fail(ErrorCode::InvalidModel, "TiltedHeavy without base law");
    return *t.base;
}

// Integral of Gbar over [y, inf) for a Pareto tail.
double pareto_integrated_tail(const ParetoLike& p, double y) {
    double kink = p.scale - p.shift;
    double tail_part = p.scale / (p.index - 1.0);
    if (y >= kink) return tail_part * std::pow((y + p.shift) / p.scale, 1.0 - p.index);
    return (kink - y) + tail_part;
}

std::vector<double> kinks(const TailFamily& f) {
    return std::visit(overloaded{[](const ParetoLike& p) { return std::vector<double>{p.scale - p.shift}; },
                                 [](const TiltedHeavy& t) { return kinks(tilted_base(t)); },
                                 [](const auto&) { return std::vector<double>{}; }},
                      f.kind);
}

// Integral over [y, inf) of u^k exp(s u) P(J > u).
double weighted_tail_integral(const TailFamily& f, double s, double y, int k) {
    if (const auto* t = std::get_if<TiltedHeavy>(&f.kind)) {
        const TailFamily& base = tilted_base(*t);
        double c = s - t->tilt;
        if (c == 0.0) {
            if (k == 0 && y <= 0.0) return jump::raw_moment(base, 1);
            if (k == 0)
                if (const auto* p = std::get_if<ParetoLike>(&base.kind)) return pareto_integrated_tail(*p, y);
            if (y <= 0.0) return jump::raw_moment(base, k + 1) / (k + 1);
        }
        auto fn = [&](double u) {
            double v = std::exp(c * u) * jump::tail(base, u);
            return k == 0 ? v : v * std::pow(u, k);
        };
        return integrate(fn, std::max(y, 0.0), kInf, 1e-11, kinks(base));
    }
    auto fn = [&](double u) {
        double lt = -jump::g(f, u) + s * u;
        double v = std::exp(lt);
        return k == 0 ? v : v * std::pow(u, k);
    };
    return integrate(fn, std::max(y, 0.0), kInf, 1e-11, kinks(f));
}

// Solves F(y) = target for increasing F on [lo, inf) by bracketing then safeguarded Newton.
double solve_increasing(const std::function<double(double)>& F, const std::function<double(double)>& dF,
                        double target, double lo) {
    double hi = std::max(1.0, 2.0 * std::abs(lo) + 1.0);
    int guard = 0;
    while (F(hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 2000) fail(ErrorCode::NoBracket, "tail inversion bracket search failed");
    }
    double y = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double fy = F(y) - target;
        if (fy == 0.0) return y;
        if (fy > 0) hi = y;
        else lo = y;
        double d = dF(y);
        double next = (d > 0 && std::isfinite(d)) ? y - fy / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - y) <= 1e-13 * std::max(1.0, std::abs(y))) return next;
        y = next;
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(hi))) return y;
    }
    return y;
}

}  // namespace

std::string TailFamily::name() const {
    return std::visit(overloaded{[](const ParetoLike&) { return std::string("pareto"); },
                                 [](const WeibullLike&) { return std::string("weibull"); },
                                 [](const ExponentialFamily&) { return std::string("exponential"); },
                                 [](const TiltedHeavy&) { return std::string("tilted_heavy"); },
                                 [](const LatticePMF&) { return std::string("lattice"); },
                                 [](const UserAnalytic&) { return std::string("user_analytic"); }},
                      kind);
}

TiltedHeavy make_tilted(double tilt, TailFamily base) {
    return TiltedHeavy{tilt, std::make_shared<const TailFamily>(std::move(base))};
}

bool MgfValue::finite() const { return std::isfinite(value); }

// ---------------------------------------------------------------- jump laws

namespace jump {

void validate(const TailFamily& f) {
    std::visit(overloaded{
                   [](const ParetoLike& p) {
                       if (!(p.index > 1.0) || !(p.scale > 0.0) || p.shift < 0.0 || p.shift > p.scale)
                           fail(ErrorCode::InvalidModel, "pareto needs index > 1, scale > 0, 0 <= shift <= scale");
                   },
                   [](const WeibullLike& w) {
                       if (!(w.shape > 0.0 && w.shape < 1.0) || !(w.rate > 0.0))
                           fail(ErrorCode::InvalidModel, "weibull needs shape in (0,1) and rate > 0");
                   },
                   [](const ExponentialFamily& e) {
                       if (!(e.rate > 0.0)) fail(ErrorCode::InvalidModel, "exponential needs rate > 0");
                   },
                   [](const TiltedHeavy& t) {
                       if (!(t.tilt > 0.0)) fail(ErrorCode::InvalidModel, "tilted_heavy needs tilt > 0");
                       const TailFamily& base = tilted_base(t);
                       validate(base);
                       if (!is_heavy(base)) fail(ErrorCode::InvalidModel, "tilted_heavy base must be heavy-tailed");
                   },
                   [](const LatticePMF&) {
                       fail(ErrorCode::InvalidModel, "lattice pmf is not a nonnegative jump law");
                   },
                   [](const UserAnalytic& u) {
                       if (!u.g) fail(ErrorCode::InvalidModel, "user_analytic needs g");
                   }},
               f.kind);
}

double tail(const TailFamily& f, double y) {
    return std::visit(overloaded{[y](const ParetoLike& p) {
                                     double z = y + p.shift;
                                     return z < p.scale ? 1.0 : std::pow(z / p.scale, -p.index);
                                 },
                                 [y](const WeibullLike& w) { return y <= 0 ? 1.0 : std::exp(-w.rate * std::pow(y, w.shape)); },
                                 [y](const ExponentialFamily& e) { return y <= 0 ? 1.0 : std::exp(-e.rate * y); },
                                 [y](const TiltedHeavy& t) {
                                     return y <= 0 ? 1.0 : std::exp(-t.tilt * y) * tail(tilted_base(t), y);
                                 },
                                 [](const LatticePMF&) -> double {
                                     fail(ErrorCode::InvalidModel, "lattice pmf is not a jump law");
                                 },
                                 [y](const UserAnalytic& u) { return std::exp(-u.g(y)); }},
                      f.kind);
}

double g(const TailFamily& f, double y) {
    return std::visit(overloaded{[y](const ParetoLike& p) {
                                     double z = y + p.shift;
                                     return z < p.scale ? 0.0 : p.index * std::log(z / p.scale);
                                 },
                                 [y](const WeibullLike& w) { return y <= 0 ? 0.0 : w.rate * std::pow(y, w.shape); },
                                 [y](const ExponentialFamily& e) { return y <= 0 ? 0.0 : e.rate * y; },
                                 [y](const TiltedHeavy& t) { return y <= 0 ? 0.0 : t.tilt * y + g(tilted_base(t), y); },
                                 [](const LatticePMF&) -> double {
                                     fail(ErrorCode::InvalidModel, "lattice pmf is not a jump law");
                                 },
                                 [y](const UserAnalytic& u) { return u.g(y); }},
                      f.kind);
}

double g1(const TailFamily& f, double y) {
    return std::visit(overloaded{[y](const ParetoLike& p) {
                                     double z = y + p.shift;
                                     return z < p.scale ? 0.0 : p.index / z;
                                 },
                                 [y](const WeibullLike& w) {
                                     return y <= 0 ? 0.0 : w.rate * w.shape * std::pow(y, w.shape - 1.0);
                                 },
                                 [](const ExponentialFamily& e) { return e.rate; },
                                 [y](const TiltedHeavy& t) { return t.tilt + g1(tilted_base(t), y); },
                                 [](const LatticePMF&) -> double {
                                     fail(ErrorCode::Unsupported, "lattice law has no smooth log-tail");
                                 },
                                 [y](const UserAnalytic& u) {
                                     if (!u.g1) fail(ErrorCode::Unsupported, "user_analytic without g'");
                                     return u.g1(y);
                                 }},
                      f.kind);
}

double g2(const TailFamily& f, double y) {
    return std::visit(overloaded{[y](const ParetoLike& p) {
                                     double z = y + p.shift;
                                     return z < p.scale ? 0.0 : -p.index / (z * z);
                                 },
                                 [y](const WeibullLike& w) {
                                     return y <= 0 ? 0.0
                                                   : w.rate * w.shape * (w.shape - 1.0) * std::pow(y, w.shape - 2.0);
                                 },
                                 [](const ExponentialFamily&) { return 0.0; },
                                 [y](const TiltedHeavy& t) { return g2(tilted_base(t), y); },
                                 [](const LatticePMF&) -> double {
                                     fail(ErrorCode::Unsupported, "lattice law has no smooth log-tail");
                                 },
                                 [y](const UserAnalytic& u) {
                                     if (!u.g2) fail(ErrorCode::Unsupported, "user_analytic without g''");
                                     return u.g2(y);
                                 }},
                      f.kind);
}

double mgf_sup(const TailFamily& f) {
    return std::visit(overloaded{[](const ExponentialFamily& e) { return e.rate; },
                                 [](const TiltedHeavy& t) { return t.tilt; },
                                 [](const LatticePMF&) { return kInf; },
                                 [](const auto&) { return 0.0; }},
                      f.kind);
}

bool mgf_finite_at_sup(const TailFamily& f) {
    return std::visit(overloaded{[](const ExponentialFamily&) { return false; },
                                 [](const TiltedHeavy& t) { return std::isfinite(raw_moment(tilted_base(t), 1)); },
                                 [](const LatticePMF&) { return false; },
                                 [](const auto&) { return true; }},
                      f.kind);
}

MgfValue mgf(const TailFamily& f, double s) {
    if (s < 0.0) fail(ErrorCode::InvalidModel, "mgf evaluated at negative argument");
    if (s == 0.0) return {1.0, raw_moment(f, 1), raw_moment(f, 2)};
    if (const auto* e = std::get_if<ExponentialFamily>(&f.kind)) {
        if (s >= e->rate) return {kInf, kInf, kInf};
        double d = e->rate - s;
        return {e->rate / d, e->rate / (d * d), 2.0 * e->rate / (d * d * d)};
    }
    if (const auto* t = std::get_if<TiltedHeavy>(&f.kind)) {
        if (s > t->tilt) return {kInf, kInf, kInf};
        const TailFamily& base = tilted_base(*t);
        // m = 1 + s I0, m' = I0 + s I1, m'' = 2 I1 + s I2 with I_k = int u^k e^{su} P(J>u) du.
        double I[3];
        for (int k = 0; k < 3; ++k) {
            if (s == t->tilt && !std::isfinite(raw_moment(base, k + 1))) {
                I[k] = kInf;
                continue;
            }
            I[k] = weighted_tail_integral(f, s, 0.0, k);
        }
        return {1.0 + s * I[0], I[0] + s * I[1], 2.0 * I[1] + s * I[2]};
    }
    return {kInf, kInf, kInf};
}

double raw_moment(const TailFamily& f, int r) {
    if (r == 0) return 1.0;
    return std::visit(
        overloaded{[r](const ParetoLike& p) {
                       double m[8];
                       for (int i = 0; i <= r; ++i)
                           m[i] = i < p.index ? p.index * std::pow(p.scale, i) / (p.index - i) : kInf;
                       if (!std::isfinite(m[r])) return kInf;
                       return shifted_moment(m, r, p.shift);
                   },
                   [r](const WeibullLike& w) { return std::tgamma(1.0 + r / w.shape) * std::pow(w.rate, -r / w.shape); },
                   [r](const ExponentialFamily& e) { return std::tgamma(r + 1.0) / std::pow(e.rate, r); },
                   [r, &f](const TiltedHeavy& t) {
                       const TailFamily& base = tilted_base(t);
                       auto fn = [&](double u) { return r * std::pow(u, r - 1) * std::exp(-t.tilt * u) * tail(base, u); };
                       return integrate(fn, 0.0, kInf, 1e-11, kinks(f));
                   },
                   [](const LatticePMF&) -> double { fail(ErrorCode::InvalidModel, "lattice pmf is not a jump law"); },
                   [r](const UserAnalytic& u) {
                       auto fn = [&](double y) { return r * std::pow(y, r - 1) * std::exp(-u.g(y)); };
                       return integrate(fn, 0.0, kInf, 1e-10);
                   }},
        f.kind);
}

double support_min(const TailFamily& f) {
    if (const auto* p = std::get_if<ParetoLike>(&f.kind)) return p->scale - p->shift;
    return 0.0;
}

bool is_heavy(const TailFamily& f) { return mgf_sup(f) == 0.0; }

double quantile_tail(const TailFamily& f, double u) {
    if (!(u > 0.0 && u <= 1.0)) fail(ErrorCode::InvalidModel, "tail level outside (0, 1]");
    if (u == 1.0) return support_min(f);
    return std::visit(overloaded{[u](const ParetoLike& p) { return p.scale * std::pow(u, -1.0 / p.index) - p.shift; },
                                 [u](const WeibullLike& w) { return std::pow(-std::log(u) / w.rate, 1.0 / w.shape); },
                                 [u](const ExponentialFamily& e) { return -std::log(u) / e.rate; },
                                 [u, &f](const auto&) {
                                     return solve_increasing([&](double y) { return g(f, y); },
                                                             [&](double y) { return g1(f, y); }, -std::log(u),
                                                             support_min(f));
                                 }},
                      f.kind);
}

double tilted_tail(const TailFamily& f, double s, double y) {
    if (s == 0.0) return tail(f, y);
    if (y <= support_min(f)) return 1.0;
    if (const auto* e = std::get_if<ExponentialFamily>(&f.kind)) return std::exp(-(e->rate - s) * y);
    MgfValue m = mgf(f, s);
    if (!m.finite()) fail(ErrorCode::TiltUnavailable, "tilt outside the mgf domain");
    // E[e^{sJ}; J > y] = e^{sy} P(J > y) + s int_y^inf e^{su} P(J > u) du.
    double head = std::exp(s * y - g(f, y));
    if (const auto* t = std::get_if<TiltedHeavy>(&f.kind)) head = std::exp((s - t->tilt) * y) * tail(tilted_base(*t), y);
    return (head + s * weighted_tail_integral(f, s, y, 0)) / m.value;
}

double quantile_tilted_tail(const TailFamily& f, double s, double u) {
    if (s == 0.0) return quantile_tail(f, u);
    if (const auto* e = std::get_if<ExponentialFamily>(&f.kind)) {
        if (s >= e->rate) fail(ErrorCode::TiltUnavailable, "tilt outside the mgf domain");
        return -std::log(u) / (e->rate - s);
    }
    if (!(u > 0.0 && u <= 1.0)) fail(ErrorCode::InvalidModel, "tail level outside (0, 1]");
    if (u == 1.0) return support_min(f);
    double m = mgf(f, s).value;
    if (!std::isfinite(m)) fail(ErrorCode::TiltUnavailable, "tilt outside the mgf domain");
    // Newton on -log of the tilted tail; its derivative is the tilted hazard.
    auto F = [&](double y) { return -std::log(tilted_tail(f, s, y)); };
    auto dF = [&](double y) {
        double tt = tilted_tail(f, s, y);
        double dens = std::exp(s * y - g(f, y)) * g1(f, y) / m;
        return dens / tt;
    };
    return solve_increasing(F, dF, -std::log(u), support_min(f));
}

}  // namespace jump

// ---------------------------------------------------------------- regime tags

const char* to_string(RegimeTag r) {
    switch (r) {
        case RegimeTag::HeavyI: return "HeavyI";
        case RegimeTag::HeavyII: return "HeavyII";
        case RegimeTag::Cramer: return "Cramer";
        case RegimeTag::Intermediate: return "Intermediate";
    }
    return "?";
}

RegimeTag parse_regime(const std::string& s) {
    if (s == "HeavyI") return RegimeTag::HeavyI;
    if (s == "HeavyII") return RegimeTag::HeavyII;
    if (s == "Cramer") return RegimeTag::Cramer;
    if (s == "Intermediate") return RegimeTag::Intermediate;
    fail(ErrorCode::InvalidModel, "unknown regime '" + s + "'");
}

// ---------------------------------------------------------------- increment model

void IncrementModel::finish_moments(const double raw[5]) {
    mean_ = raw[1];
    variance_ = raw[2] - raw[1] * raw[1];
    double m1 = raw[1];
    double k3 = raw[3] - 3.0 * raw[2] * m1 + 2.0 * m1 * m1 * m1;
    double k4 = raw[4] - 4.0 * raw[3] * m1 - 3.0 * raw[2] * raw[2] + 12.0 * raw[2] * m1 * m1 - 6.0 * std::pow(m1, 4);
    if (std::isfinite(k3)) k3_ = k3;
    if (std::isfinite(k4)) k4_ = k4;
    if (!std::isfinite(raw[2])) variance_ = kInf;
}

IncrementModel IncrementModel::lattice(LatticePMF pmf) {
    if (!(pmf.span > 0.0)) fail(ErrorCode::InvalidModel, "lattice span must be positive");
    if (pmf.offsets.empty() || pmf.offsets.size() != pmf.masses.size())
        fail(ErrorCode::InvalidModel, "lattice offsets and masses must be nonempty and of equal length");
    double total = 0.0;
    for (double m : pmf.masses) {
        if (!(m >= 0.0)) fail(ErrorCode::InvalidModel, "lattice masses must be nonnegative");
        total += m;
    }
    if (std::abs(total - 1.0) > 1e-12) fail(ErrorCode::InvalidModel, "lattice masses must sum to 1");
    IncrementModel out(Kind::Lattice, TailFamily(pmf));
    double raw[5] = {1, 0, 0, 0, 0};
    long g = 0;
    for (std::size_t i = 0; i < pmf.offsets.size(); ++i) {
        double x = pmf.span * pmf.offsets[i];
        for (int r = 1; r < 5; ++r) raw[r] += pmf.masses[i] * std::pow(x, r);
        if (pmf.masses[i] > 0) g = std::gcd(g, std::labs(pmf.offsets[i] - pmf.offsets[0]));
    }
    out.finish_moments(raw);
    out.s_max_ = kInf;
    out.lattice_span_ = pmf.span * static_cast<double>(g == 0 ? 1 : g);
    double off = std::fmod(pmf.span * pmf.offsets[0], out.lattice_span_);
    if (off < 0) off += out.lattice_span_;
    out.lattice_offset_ = off;
    return out;
}

IncrementModel IncrementModel::jump(TailFamily law, double prob, double shift, double atom) {
    jump::validate(law);
    if (!(prob > 0.0 && prob <= 1.0)) fail(ErrorCode::InvalidModel, "jump probability must lie in (0, 1]");
    IncrementModel out(Kind::Jump, std::move(law));
    out.prob_ = prob;
    out.shift_ = shift;
    out.atom_ = atom;
    double mj[5];
    for (int r = 0; r < 5; ++r) mj[r] = jump::raw_moment(out.family_, r);
    double raw[5];
    for (int r = 0; r < 5; ++r) {
        double jm = std::isfinite(mj[r]) ? shifted_moment(mj, r, shift) : kInf;
        raw[r] = prob * jm + (1.0 - prob) * std::pow(-atom, r);
    }
    out.finish_moments(raw);
    out.s_max_ = jump::mgf_sup(out.family_);
    return out;
}

IncrementModel IncrementModel::compound_poisson(double rate, TailFamily service, double drift) {
    jump::validate(service);
    if (!(rate > 0.0)) fail(ErrorCode::InvalidModel, "arrival rate must be positive");
    if (!(drift > 0.0)) fail(ErrorCode::InvalidModel, "drift must be positive");
    if (jump::support_min(service) < 0.0) fail(ErrorCode::InvalidModel, "service law must be nonnegative");
    IncrementModel out(Kind::CompoundPoisson, std::move(service));
    out.rate_ = rate;
    out.drift_ = drift;
    double mb[5];
    for (int r = 0; r < 5; ++r) mb[r] = jump::raw_moment(out.family_, r);
    out.mean_ = rate * mb[1] - drift;
    out.variance_ = rate * mb[2];
    if (std::isfinite(mb[3])) out.k3_ = rate * mb[3];
    if (std::isfinite(mb[4])) out.k4_ = rate * mb[4];
    out.s_max_ = jump::mgf_sup(out.family_);
    return out;
}

IncrementModel IncrementModel::declared(UserAnalytic law, double mean, double variance,
                                        std::optional<double> cumulant3, std::optional<double> cumulant4,
                                        double mgf_domain_sup) {
    if (!law.g) fail(ErrorCode::InvalidModel, "declared law needs g");
    if (!(variance > 0.0)) fail(ErrorCode::InvalidModel, "declared variance must be positive");
    IncrementModel out(Kind::Declared, TailFamily(std::move(law)));
    out.mean_ = mean;
    out.variance_ = variance;
    out.k3_ = cumulant3;
    out.k4_ = cumulant4;
    out.s_max_ = mgf_domain_sup;
    return out;
}

const LatticePMF& IncrementModel::pmf() const {
    const auto* p = std::get_if<LatticePMF>(&family_.kind);
    if (!p) fail(ErrorCode::InvalidModel, "model is not a lattice walk");
    return *p;
}

std::optional<double> IncrementModel::tail_index() const {
    if (const auto* w = std::get_if<WeibullLike>(&family_.kind)) return w->shape;
    if (const auto* u = std::get_if<UserAnalytic>(&family_.kind))
        if (u->index > 0) return u->index;
    return std::nullopt;
}

double IncrementModel::tail(double y) const {
    switch (kind_) {
        case Kind::Lattice: {
            const LatticePMF& p = pmf();
            double s = 0.0;
            for (std::size_t i = 0; i < p.offsets.size(); ++i)
                if (p.span * p.offsets[i] > y) s += p.masses[i];
            return std::min(1.0, s);
        }
        case Kind::Jump: {
            double t = prob_ * jump::tail(family_, y + shift_);
            if (-atom_ > y) t += 1.0 - prob_;
            return std::min(1.0, t);
        }
        case Kind::CompoundPoisson:
            return std::min(1.0, rate_ * jump::tail(family_, y));
        case Kind::Declared:
            return std::exp(-std::get<UserAnalytic>(family_.kind).g(y));
    }
    return 0.0;
}

double IncrementModel::log_tail(double y) const {
    switch (kind_) {
        case Kind::Jump:
            if (y >= -atom_ || prob_ == 1.0) return jump::g(family_, y + shift_) - std::log(prob_);
            return -std::log(tail(y));
        case Kind::CompoundPoisson:
            return jump::g(family_, y) - std::log(rate_);
        case Kind::Declared:
            return std::get<UserAnalytic>(family_.kind).g(y);
        case Kind::Lattice:
            return -std::log(tail(y));
    }
    return 0.0;
}

double IncrementModel::log_tail_d1(double y) const {
    switch (kind_) {
        case Kind::Jump: return jump::g1(family_, y + shift_);
        case Kind::CompoundPoisson: return jump::g1(family_, y);
        case Kind::Declared: return jump::g1(family_, y);
        case Kind::Lattice: break;
    }
    fail(ErrorCode::Unsupported, "lattice law has no smooth log-tail");
}

double IncrementModel::log_tail_d2(double y) const {
    switch (kind_) {
        case Kind::Jump: return jump::g2(family_, y + shift_);
        case Kind::CompoundPoisson: return jump::g2(family_, y);
        case Kind::Declared: return jump::g2(family_, y);
        case Kind::Lattice: break;
    }
    fail(ErrorCode::Unsupported, "lattice law has no smooth log-tail");
}

bool IncrementModel::mgf_finite_at_sup() const {
    switch (kind_) {
        case Kind::Lattice: return false;
        case Kind::Declared: return s_max_ == 0.0;
        default: return jump::mgf_finite_at_sup(family_);
    }
}

MgfValue IncrementModel::mgf(double s) const {
    if (s < 0.0) fail(ErrorCode::InvalidModel, "mgf evaluated at negative argument");
    if (s == 0.0) {
        double second = variance_ + mean_ * mean_;
        return {1.0, mean_, second};
    }
    if (s > s_max_ || (s == s_max_ && !mgf_finite_at_sup())) return {kInf, kInf, kInf};
    switch (kind_) {
        case Kind::Lattice: {
            const LatticePMF& p = pmf();
            MgfValue m{0.0, 0.0, 0.0};
            for (std::size_t i = 0; i < p.offsets.size(); ++i) {
                double x = p.span * p.offsets[i];
                double w = p.masses[i] * std::exp(s * x);
                m.value += w;
                m.d1 += w * x;
                m.d2 += w * x * x;
            }
            return m;
        }
        case Kind::Jump: {
            MgfValue j = jump::mgf(family_, s);
            double e = std::exp(-s * shift_);
            double d = shift_;
            MgfValue m;
            m.value = prob_ * e * j.value;
            m.d1 = prob_ * e * (j.d1 - d * j.value);
            m.d2 = prob_ * e * (j.d2 - 2.0 * d * j.d1 + d * d * j.value);
            if (prob_ < 1.0) {
                double a = (1.0 - prob_) * std::exp(-s * atom_);
                m.value += a;
                m.d1 += -atom_ * a;
                m.d2 += atom_ * atom_ * a;
            }
            return m;
        }
        case Kind::CompoundPoisson: {
            MgfValue b = jump::mgf(family_, s);
            double v = std::exp(rate_ * (b.value - 1.0) - drift_ * s);
            double l1 = rate_ * b.d1 - drift_;
            return {v, v * l1, v * (l1 * l1 + rate_ * b.d2)};
        }
        case Kind::Declared:
            break;
    }
    return {kInf, kInf, kInf};
}

double IncrementModel::sample(Stream& rng) const { return tilted_sampler(0.0)(rng); }

std::function<double(Stream&)> IncrementModel::tilted_sampler(double s) const {
    if (kind_ == Kind::Declared) fail(ErrorCode::TiltUnavailable, "declared laws cannot be sampled");
    if (s < 0.0) fail(ErrorCode::TiltUnavailable, "negative tilt");
    if (s > 0.0) {
        MgfValue m = mgf(s);
        if (!m.finite()) fail(ErrorCode::TiltUnavailable, "tilt outside the mgf domain");
    }
    switch (kind_) {
        case Kind::Lattice: {
            const LatticePMF& p = pmf();
            std::vector<double> cum;
            std::vector<double> vals;
            double total = 0.0;
            for (std::size_t i = 0; i < p.offsets.size(); ++i) {
                double x = p.span * p.offsets[i];
                total += p.masses[i] * std::exp(s * x);
                cum.push_back(total);
                vals.push_back(x);
            }
            for (double& c : cum) c /= total;
            cum.back() = 1.0;
            return [cum, vals](Stream& rng) {
                double u = rng.uniform();
                std::size_t i = std::upper_bound(cum.begin(), cum.end(), u) - cum.begin();
                return vals[std::min(i, vals.size() - 1)];
            };
        }
        case Kind::Jump: {
            double wj = prob_;
            double wa = 1.0 - prob_;
            if (s > 0.0) {
                wj = prob_ * std::exp(-s * shift_) * jump::mgf(family_, s).value;
                wa = (1.0 - prob_) * std::exp(-s * atom_);
            }
            double pj = wj / (wj + wa);
            TailFamily law = family_;
            double shift = shift_, atom = atom_;
            return [pj, law, shift, atom, s](Stream& rng) {
                if (pj < 1.0 && rng.uniform() >= pj) return -atom;
                return jump::quantile_tilted_tail(law, s, rng.uniform_pos()) - shift;
            };
        }
        case Kind::CompoundPoisson: {
            double rate = s > 0.0 ? rate_ * jump::mgf(family_, s).value : rate_;
            TailFamily law = family_;
            double drift = drift_;
            return [rate, law, drift, s](Stream& rng) {
                double t = rng.exponential(rate);
                double sum = 0.0;
                while (t <= 1.0) {
                    sum += jump::quantile_tilted_tail(law, s, rng.uniform_pos());
                    t += rng.exponential(rate);
                }
                return sum - drift;
            };
        }
        case Kind::Declared:
            break;
    }
    fail(ErrorCode::TiltUnavailable, "law cannot be sampled");
}

// ---------------------------------------------------------------- M/G/1

MG1Model::MG1Model(double arrival_rate, TailFamily service) : lambda_(arrival_rate), service_(std::move(service)) {
    if (!(lambda_ > 0.0)) fail(ErrorCode::InvalidModel, "arrival rate must be positive");
    jump::validate(service_);
    if (jump::support_min(service_) < 0.0) fail(ErrorCode::InvalidModel, "service law must be nonnegative");
    service_mean_ = jump::raw_moment(service_, 1);
    if (!std::isfinite(service_mean_)) fail(ErrorCode::InvalidModel, "service mean must be finite");
}

IncrementModel MG1Model::induced_increment() const {
    if (load() >= 1.0) {
        std::ostringstream os;
        os << "load " << load() << " >= 1";
        fail(ErrorCode::UnstableSystem, os.str());
    }
    return IncrementModel::compound_poisson(lambda_, service_, 1.0);
}

// ---------------------------------------------------------------- sanity checks

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

double estimated_index(const IncrementModel& m) {
    if (auto b = m.tail_index()) return *b;
    double y = 1e6;
    double gy = m.log_tail(y);
    return y * m.log_tail_d1(y) / gy;
}

}  // namespace

std::vector<Finding> sanity_check(const IncrementModel& model, RegimeTag regime, const SanityOptions& opts) {
    std::vector<Finding> out;
    auto add = [&out](std::string name, bool ok, std::string detail) {
        out.push_back({std::move(name), ok, std::move(detail)});
    };
    bool negative = model.mean() < 0.0;
    add("negative drift", negative, "mean = " + fmt(model.mean()));

    switch (regime) {
        case RegimeTag::HeavyI: {
            bool heavy = model.mgf_domain_sup() == 0.0;
            add("heavy-tail precondition", heavy,
                heavy ? "mgf infinite for every s > 0" : "mgf finite up to s = " + fmt(model.mgf_domain_sup()));
            if (!negative) break;
            double a = -model.mean();
            double kappa = 2.0;
            if (const auto* p = std::get_if<ParetoLike>(&model.family().kind)) kappa = std::min(2.0, p->index);
            double prev = kInf;
            bool ok = true;
            std::string detail;
            for (double n : {1e2, 1e3, 1e4}) {
                double y = n * a;
                double r = model.tail(y - std::pow(y, 1.0 / kappa)) / model.tail(y);
                double dev = std::abs(r - 1.0);
                if (!(dev <= prev + 1e-12)) ok = false;
                prev = dev;
                detail += "n=" + fmt(n) + ": " + fmt(r) + "; ";
            }
            if (!(prev <= opts.insensitivity_tol)) ok = false;
            add("insensitivity ratio", ok, detail);
            break;
        }
        case RegimeTag::HeavyII: {
            bool heavy = model.mgf_domain_sup() == 0.0;
            add("heavy-tail precondition", heavy, "mgf domain sup = " + fmt(model.mgf_domain_sup()));
            if (model.kind() == IncrementModel::Kind::Lattice) {
                add("smooth log-tail", false, "lattice laws have no smooth g");
                break;
            }
            bool mono = true;
            double prev = -kInf;
            for (int i = 0; i <= 40; ++i) {
                double y = 10.0 * std::pow(1e5, i / 40.0);
                double v = model.log_tail_d2(y);
                if (v < prev - 1e-12 * std::abs(prev)) mono = false;
                prev = v;
            }
            add("g'' nondecreasing", mono, "checked on 41 log-spaced points in [10, 1e6]");
            double beta = estimated_index(model);
            double y = 1e6;
            double ratio = y * model.log_tail_d2(y) / model.log_tail_d1(y);
            add("regular variation of g'", std::abs(ratio - (beta - 1.0)) <= opts.index_tol,
                "y g''/g' = " + fmt(ratio) + " vs beta-1 = " + fmt(beta - 1.0));
            if (!(beta > 0.0 && beta < 1.0)) {
                add("index range", false, "beta = " + fmt(beta) + " outside (0,1)");
                break;
            }
            int k = static_cast<int>(std::floor(beta / (1.0 - beta)));
            if (k == 0)
                add("cramer series order", false, "k=0: tails lighter threshold not met; consider HeavyI");
            else if (k > 2)
                add("cramer series order", false, "k=" + std::to_string(k) + " > 2 unsupported");
            else
                add("cramer series order", true, "k=" + std::to_string(k));
            if (k >= 1) {
                bool have = model.cumulant3().has_value() && (k < 2 || model.cumulant4().has_value());
                add("cumulants available", have, have ? "ok" : "missing cumulants for the series");
            }
            break;
        }
        case RegimeTag::Cramer: {
            double smax = model.mgf_domain_sup();
            add("light tail", smax > 0.0, "mgf domain sup = " + fmt(smax));
            if (!(smax > 0.0) || !negative) break;
            double s = std::isfinite(smax) ? std::min(1.0, smax / 2.0) : 1.0;
            double cap = std::isfinite(smax) ? 0.999999 * smax : kInf;
            bool found = false;
            for (int i = 0; i < 200; ++i) {
                MgfValue m = model.mgf(s);
                if (m.finite() && m.d1 > 0.0) {
                    found = true;
                    break;
                }
                if (s >= cap) break;
                s = std::min(2.0 * s, cap);
            }
            add("interior root of m'", found, found ? "sign change found below " + fmt(s) : "m' < 0 up to the domain edge");
            break;
        }
        case RegimeTag::Intermediate: {
            double smax = model.mgf_domain_sup();
            bool tilted = std::holds_alternative<TiltedHeavy>(model.family().kind);
            add("tilted heavy family", tilted, model.family().name());
            if (!(smax > 0.0 && std::isfinite(smax))) {
                add("finite mgf edge", false, "mgf domain sup = " + fmt(smax));
                break;
            }
            MgfValue m = model.mgf(smax);
            bool neg = m.finite() && std::isfinite(m.d1) && m.d1 < 0.0;
            add("m' < 0 up to s_max", neg, "m'(s_max) = " + fmt(m.d1));
            double delta = -m.d1 / m.value;
            add("finite delta", std::isfinite(delta) && delta > 0.0, "delta = " + fmt(delta));
            break;
        }
    }
    return out;
}

}  // namespace fpt
