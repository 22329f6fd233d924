#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace fpt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Adaptive Gauss-Kronrod over [a, b) with optional interior breakpoints.
// b may be +inf. Throws QuadratureFailure if the error estimate misses rel_tol.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10, const std::vector<double>& breaks = {});

// Root of a monotone-sign function on [lo, hi]; f(lo) and f(hi) must differ in sign.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double rel_tol = 1e-14, int max_iter = 400);

// Full linear convolution. Uses direct summation when the shorter input has at
// most direct_limit points, FFTW otherwise.
std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b,
                             std::size_t direct_limit = 512);
std::vector<double> convolve_direct(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> convolve_fft(const std::vector<double>& a, const std::vector<double>& b);

// Stable log(exp(a) + exp(b)).
double log_add(double a, double b);

}  // namespace fpt
