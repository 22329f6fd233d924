#include "fpt/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "fpt/error.hpp"

namespace fpt {

using nlohmann::json;

namespace {

// Object reader that rejects unknown keys and wrong types with a path-qualified message.
class Obj {
public:
    Obj(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
        for (const auto& [k, v] : j.items())
            if (!allowed.count(k)) throw ConfigError(path_ + ": unknown key '" + k + "'");
    }

    bool has(const std::string& k) const { return j_.contains(k); }

    double number(const std::string& k) const {
        const json& v = at(k);
        if (!v.is_number()) throw ConfigError(key(k) + ": expected a number");
        double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(key(k) + ": must be finite");
        return d;
    }
    double number(const std::string& k, double def) const { return has(k) ? number(k) : def; }

    long integer(const std::string& k) const {
        const json& v = at(k);
        if (!v.is_number_integer()) throw ConfigError(key(k) + ": expected an integer");
        return v.get<long>();
    }
    long integer(const std::string& k, long def) const { return has(k) ? integer(k) : def; }

    std::string string(const std::string& k) const {
        const json& v = at(k);
        if (!v.is_string()) throw ConfigError(key(k) + ": expected a string");
        return v.get<std::string>();
    }
    std::string string(const std::string& k, const std::string& def) const { return has(k) ? string(k) : def; }

    const json& at(const std::string& k) const {
        if (!has(k)) throw ConfigError(path_ + ": missing key '" + k + "'");
        return j_.at(k);
    }
    std::string key(const std::string& k) const { return path_ + "." + k; }

private:
    const json& j_;
    std::string path_;
};

template <class F>
auto guard(const std::string& what, F f) {
    try {
        return f();
    } catch (const Error& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

TailFamily family_at(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("family") || !j["family"].is_string())
        throw ConfigError(path + ": expected an object with a 'family' string");
    std::string fam = j["family"].get<std::string>();
    if (fam == "pareto") {
        Obj o(j, path, {"family", "index", "scale", "shift"});
        return ParetoLike{o.number("index"), o.number("scale", 1.0), o.number("shift", 0.0)};
    }
    if (fam == "weibull") {
        Obj o(j, path, {"family", "shape", "rate"});
        return WeibullLike{o.number("shape"), o.number("rate", 1.0)};
    }
    if (fam == "exponential") {
        Obj o(j, path, {"family", "rate"});
        return ExponentialFamily{o.number("rate")};
    }
    if (fam == "tilted_heavy") {
        Obj o(j, path, {"family", "tilt", "base"});
        return make_tilted(o.number("tilt"), family_at(o.at("base"), path + ".base"));
    }
    throw ConfigError(path + ": unknown family '" + fam + "'");
}

// g(y) = c y^beta for y > 0.
UserAnalytic power_log_tail(double c, double beta) {
    UserAnalytic u;
    u.index = beta;
    u.g = [c, beta](double y) { return y > 0.0 ? c * std::pow(y, beta) : 0.0; };
    u.g1 = [c, beta](double y) { return y > 0.0 ? c * beta * std::pow(y, beta - 1.0) : 0.0; };
    u.g2 = [c, beta](double y) { return y > 0.0 ? c * beta * (beta - 1.0) * std::pow(y, beta - 2.0) : 0.0; };
    return u;
}

IncrementModel model_at(const json& j) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw ConfigError("model: expected an object with a 'type' string");
    std::string type = j["type"].get<std::string>();
    if (type == "lattice") {
        Obj o(j, "model", {"type", "span", "offsets", "masses"});
        LatticePMF p;
        p.span = o.number("span", 1.0);
        try {
            p.offsets = o.at("offsets").get<std::vector<long>>();
            p.masses = o.at("masses").get<std::vector<double>>();
        } catch (const json::exception&) {
            throw ConfigError("model: offsets must be integers and masses numbers");
        }
        return guard("model", [&] { return IncrementModel::lattice(p); });
    }
    if (type == "jump") {
        Obj o(j, "model", {"type", "law", "prob", "shift", "atom"});
        TailFamily law = family_at(o.at("law"), "model.law");
        return guard("model", [&] {
            return IncrementModel::jump(law, o.number("prob", 1.0), o.number("shift", 0.0), o.number("atom", 0.0));
        });
    }
    if (type == "compound_poisson") {
        Obj o(j, "model", {"type", "rate", "service", "drift"});
        TailFamily service = family_at(o.at("service"), "model.service");
        return guard("model",
                     [&] { return IncrementModel::compound_poisson(o.number("rate"), service, o.number("drift", 1.0)); });
    }
    if (type == "declared") {
        Obj o(j, "model", {"type", "coefficient", "index", "mean", "variance", "cumulant3", "cumulant4"});
        double c = o.number("coefficient"), beta = o.number("index");
        if (!(c > 0.0) || !(beta > 0.0 && beta < 1.0))
            throw ConfigError("model: declared log-tail needs coefficient > 0 and 0 < index < 1");
        std::optional<double> k3, k4;
        if (o.has("cumulant3")) k3 = o.number("cumulant3");
        if (o.has("cumulant4")) k4 = o.number("cumulant4");
        return guard("model", [&] {
            return IncrementModel::declared(power_log_tail(c, beta), o.number("mean"), o.number("variance"), k3, k4);
        });
    }
    throw ConfigError("model: unknown type '" + type + "'");
}

Question parse_question(const std::string& s) {
    if (s == "passage_rw") return Question::PassageRw;
    if (s == "passage_levy") return Question::PassageLevy;
    if (s == "busy_period") return Question::BusyPeriod;
    if (s == "large_deviation") return Question::LargeDeviation;
    if (s == "prefactor") return Question::Prefactor;
    if (s == "classcheck") return Question::Classcheck;
    throw ConfigError("question: unknown value '" + s + "'");
}

}  // namespace

const char* to_string(Question q) {
    switch (q) {
        case Question::PassageRw: return "passage_rw";
        case Question::PassageLevy: return "passage_levy";
        case Question::BusyPeriod: return "busy_period";
        case Question::LargeDeviation: return "large_deviation";
        case Question::Prefactor: return "prefactor";
        case Question::Classcheck: return "classcheck";
    }
    return "?";
}

TailFamily parse_family(const json& j) { return family_at(j, "family"); }

const IncrementModel& RunConfig::increment() const {
    if (model) return *model;
    throw ConfigError("no random-walk model configured");
}

RunConfig parse_config(const json& j) {
    Obj o(j, "config", {"model", "mg1", "regime", "question", "x", "y", "horizons", "samples", "seed", "workers",
                        "tolerances", "sequence", "output"});
    RunConfig c;
    c.resolved = j;
    c.question = parse_question(o.string("question", "passage_rw"));
    c.resolved["question"] = to_string(c.question);

    if (o.has("model") && o.has("mg1")) throw ConfigError("config: give either model or mg1, not both");
    if (o.has("mg1")) {
        Obj m(o.at("mg1"), "mg1", {"arrival_rate", "service"});
        TailFamily service = family_at(m.at("service"), "mg1.service");
        c.mg1.emplace(guard("mg1", [&] { return MG1Model(m.number("arrival_rate"), service); }));
        c.model.emplace(guard("mg1", [&] { return c.mg1->induced_increment(); }));
    } else if (o.has("model")) {
        c.model.emplace(model_at(o.at("model")));
    }

    if (o.has("regime")) {
        c.regime = guard("regime", [&] { return parse_regime(o.string("regime")); });
    }

    c.x = o.number("x", 1.0);
    if (c.x < 0.0) throw ConfigError("config.x: must be nonnegative");
    c.resolved["x"] = c.x;
    c.y = o.number("y", 0.0);
    c.resolved["y"] = c.y;
    c.samples = static_cast<std::uint64_t>(o.integer("samples", 100000));
    if (o.integer("samples", 100000) < 1) throw ConfigError("config.samples: must be positive");
    c.resolved["samples"] = c.samples;
    long seed = o.integer("seed", 0);
    if (seed < 0) throw ConfigError("config.seed: must be nonnegative");
    c.seed = static_cast<std::uint64_t>(seed);
    c.resolved["seed"] = c.seed;
    long workers = o.integer("workers", 1);
    if (workers < 1) throw ConfigError("config.workers: must be positive");
    c.workers = static_cast<unsigned>(workers);
    c.resolved["workers"] = c.workers;

    if (o.has("horizons")) {
        const json& h = o.at("horizons");
        if (!h.is_array()) throw ConfigError("config.horizons: expected an array");
        for (const auto& v : h) {
            if (!v.is_number() || !(v.get<double>() > 0.0))
                throw ConfigError("config.horizons: entries must be positive numbers");
            c.horizons.push_back(v.get<double>());
        }
    }
    c.resolved["horizons"] = c.horizons;

    json tol = json::object();
    if (o.has("tolerances")) {
        Obj t(o.at("tolerances"), "tolerances", {"series", "series_max_K"});
        c.series_tol = t.number("series", c.series_tol);
        c.series_max_K = t.integer("series_max_K", c.series_max_K);
        if (!(c.series_tol > 0.0) || c.series_max_K < 16) throw ConfigError("tolerances: out of range");
    }
    tol["series"] = c.series_tol;
    tol["series_max_K"] = c.series_max_K;
    c.resolved["tolerances"] = tol;

    if (o.has("sequence")) {
        Obj s(o.at("sequence"), "sequence", {"builtin", "exponent", "gamma", "max_n"});
        c.sequence.builtin = s.string("builtin");
        static const std::set<std::string> names{"power", "petrov", "constant", "exp_square"};
        if (!names.count(c.sequence.builtin)) throw ConfigError("sequence.builtin: unknown '" + c.sequence.builtin + "'");
        c.sequence.exponent = s.number("exponent", c.sequence.exponent);
        c.sequence.gamma = s.number("gamma", c.sequence.gamma);
        c.sequence.max_n = s.integer("max_n", c.sequence.max_n);
        if (c.sequence.gamma < 0.0 || c.sequence.max_n < 20) throw ConfigError("sequence: out of range");
        c.resolved["sequence"] = {{"builtin", c.sequence.builtin},
                                  {"exponent", c.sequence.exponent},
                                  {"gamma", c.sequence.gamma},
                                  {"max_n", c.sequence.max_n}};
    }

    json out = json::object();
    if (o.has("output")) {
        Obj p(o.at("output"), "output", {"dir", "prefix"});
        c.output_dir = p.string("dir", "");
        c.output_prefix = p.string("prefix", c.output_prefix);
    }
    out["dir"] = c.output_dir;
    out["prefix"] = c.output_prefix;
    c.resolved["output"] = out;

    // Physical constraints checked before any dispatch.
    switch (c.question) {
        case Question::Classcheck:
            if (c.sequence.builtin.empty() && !c.model) throw ConfigError("classcheck needs a sequence or a model");
            break;
        case Question::PassageLevy:
        case Question::BusyPeriod:
            if (!c.mg1) throw ConfigError(std::string(to_string(c.question)) + " needs an mg1 block");
            [[fallthrough]];
        default:
            if (!c.model) throw ConfigError(std::string(to_string(c.question)) + " needs a model or mg1 block");
            if (!(c.model->mean() < 0.0)) throw ConfigError("the increment mean must be negative");
            break;
    }
    if (c.regime) c.resolved["regime"] = to_string(*c.regime);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

}  // namespace fpt
