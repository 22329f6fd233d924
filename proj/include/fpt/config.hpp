#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpt/models.hpp"

namespace fpt {

// Malformed or physically invalid configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Question { PassageRw, PassageLevy, BusyPeriod, LargeDeviation, Prefactor, Classcheck };
const char* to_string(Question q);

struct SequenceConfig {
    std::string builtin;  // power, petrov, constant, exp_square
    double exponent = 1.5;
    double gamma = 0.0;
    long max_n = 10000;
};

struct RunConfig {
    nlohmann::json resolved;  // input with every default filled in
    std::optional<IncrementModel> model;
    std::optional<MG1Model> mg1;
    std::optional<RegimeTag> regime;
    Question question = Question::PassageRw;
    double x = 1.0;
    double y = 0.0;  // level for large_deviation
    std::vector<double> horizons;
    std::uint64_t samples = 100000;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    double series_tol = 1e-4;
    long series_max_K = 10000;
    std::string output_dir;
    std::string output_prefix = "fpt";
    SequenceConfig sequence;

    // Increment law of the walk: the model itself or the M/G/1 induced increment.
    const IncrementModel& increment() const;
};

TailFamily parse_family(const nlohmann::json& j);
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

}  // namespace fpt
