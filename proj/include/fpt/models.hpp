#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fpt/numeric.hpp"
#include "fpt/rng.hpp"

namespace fpt {

struct TailFamily;

// P(J > y) = ((y + shift)/scale)^(-index) once y + shift >= scale, 1 below.
// shift = 0 is the classical Pareto law on [scale, inf); shift = scale gives (1 + y/scale)^(-index).
struct ParetoLike {
    double index = 2.0;
    double scale = 1.0;
    double shift = 0.0;
};

// P(J > y) = exp(-rate * y^shape), y >= 0.
struct WeibullLike {
    double shape = 0.5;
    double rate = 1.0;
};

struct ExponentialFamily {
    double rate = 1.0;
};

// P(J > y) = exp(-tilt * y) * Gbar(y) with Gbar the tail of a heavy base law.
struct TiltedHeavy {
    double tilt = 1.0;
    std::shared_ptr<const TailFamily> base;
};

// Support points span * offsets[i] with probabilities masses[i].
struct LatticePMF {
    double span = 1.0;
    std::vector<long> offsets;
    std::vector<double> masses;
};

// tail = exp(-g). The derivative callables are used by the HeavyII machinery.
// index is the declared regular-variation index of g (0 when undeclared).
struct UserAnalytic {
    std::function<double(double)> g;
    std::function<double(double)> g1;
    std::function<double(double)> g2;
    double index = 0.0;
};

struct TailFamily {
    using Kind = std::variant<ParetoLike, WeibullLike, ExponentialFamily, TiltedHeavy, LatticePMF, UserAnalytic>;
    Kind kind;

    template <class T>
    TailFamily(T family) : kind(std::move(family)) {}

    std::string name() const;
};

TiltedHeavy make_tilted(double tilt, TailFamily base);

struct MgfValue {
    double value = 1.0;
    double d1 = 0.0;
    double d2 = 0.0;
    bool finite() const;
};

// Functions of a nonnegative jump law J described by a TailFamily
// (Pareto, Weibull, Exponential, TiltedHeavy, UserAnalytic).
namespace jump {
void validate(const TailFamily& f);
double tail(const TailFamily& f, double y);
double g(const TailFamily& f, double y);
double g1(const TailFamily& f, double y);
double g2(const TailFamily& f, double y);
double mgf_sup(const TailFamily& f);
bool mgf_finite_at_sup(const TailFamily& f);
MgfValue mgf(const TailFamily& f, double s);
double raw_moment(const TailFamily& f, int r);
// Inverse of the tail: returns y with P(J > y) = u for u in (0, 1].
double quantile_tail(const TailFamily& f, double u);
// Tail of the law reweighted by exp(s*y)/m(s).
double tilted_tail(const TailFamily& f, double s, double y);
double quantile_tilted_tail(const TailFamily& f, double s, double u);
bool is_heavy(const TailFamily& f);
// Lower end of the support.
double support_min(const TailFamily& f);
}  // namespace jump

enum class RegimeTag { HeavyI, HeavyII, Cramer, Intermediate };
const char* to_string(RegimeTag r);
RegimeTag parse_regime(const std::string& s);

class IncrementModel {
public:
    enum class Kind { Lattice, Jump, CompoundPoisson, Declared };

    // xi = span * offset with the given masses.
    static IncrementModel lattice(LatticePMF pmf);
    // xi = J - shift with probability prob, otherwise -atom.
    static IncrementModel jump(TailFamily law, double prob = 1.0, double shift = 0.0, double atom = 0.0);
    // xi = B_1 + ... + B_N - drift, N ~ Poisson(rate).
    static IncrementModel compound_poisson(double rate, TailFamily service, double drift = 1.0);
    // Law known only through g = -ln tail and declared moments.
    static IncrementModel declared(UserAnalytic law, double mean, double variance,
                                   std::optional<double> cumulant3 = std::nullopt,
                                   std::optional<double> cumulant4 = std::nullopt,
                                   double mgf_domain_sup = 0.0);

    Kind kind() const { return kind_; }
    const TailFamily& family() const { return family_; }

    double tail(double y) const;
    double log_tail(double y) const;
    double log_tail_d1(double y) const;
    double log_tail_d2(double y) const;

    MgfValue mgf(double s) const;
    double mgf_domain_sup() const { return s_max_; }
    bool mgf_finite_at_sup() const;

    double mean() const { return mean_; }
    double variance() const { return variance_; }
    std::optional<double> cumulant3() const { return k3_; }
    std::optional<double> cumulant4() const { return k4_; }
    // Declared regular-variation index of g when the family carries one (Weibull shape, UserAnalytic index).
    std::optional<double> tail_index() const;

    double lattice_span() const { return lattice_span_; }
    // Support lies in lattice_offset + lattice_span * Z.
    double lattice_offset() const { return lattice_offset_; }
    const LatticePMF& pmf() const;

    double jump_prob() const { return prob_; }
    double jump_shift() const { return shift_; }
    double atom() const { return atom_; }
    double rate() const { return rate_; }
    double drift() const { return drift_; }

    bool samplable() const { return kind_ != Kind::Declared; }
    double sample(Stream& rng) const;
    // Sampler for the increment law reweighted by exp(s*xi)/m(s).
    std::function<double(Stream&)> tilted_sampler(double s) const;

private:
    IncrementModel(Kind kind, TailFamily family) : kind_(kind), family_(std::move(family)) {}
    void finish_moments(const double raw[5]);

    Kind kind_;
    TailFamily family_;
    double prob_ = 1.0, shift_ = 0.0, atom_ = 0.0;
    double rate_ = 0.0, drift_ = 0.0;
    double mean_ = 0.0, variance_ = 0.0;
    std::optional<double> k3_, k4_;
    double s_max_ = 0.0;
    double lattice_span_ = 0.0, lattice_offset_ = 0.0;
};

class MG1Model {
public:
    MG1Model(double arrival_rate, TailFamily service);

    double arrival_rate() const { return lambda_; }
    const TailFamily& service() const { return service_; }
    double service_mean() const { return service_mean_; }
    double load() const { return lambda_ * service_mean_; }
    MgfValue service_mgf(double s) const { return jump::mgf(service_, s); }

    // Law of X_1 = sum_{i <= N(1)} B_i - 1. Throws UnstableSystem when load >= 1.
    IncrementModel induced_increment() const;

private:
    double lambda_;
    TailFamily service_;
    double service_mean_;
};

struct Finding {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SanityOptions {
    double insensitivity_tol = 0.25;
    double index_tol = 0.05;
};

// Advisory precondition checks for a declared regime; never throws on failed checks.
std::vector<Finding> sanity_check(const IncrementModel& model, RegimeTag regime,
                                  const SanityOptions& opts = {});

}  // namespace fpt
