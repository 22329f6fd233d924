#include "fpt/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fftw3.h>

#include "fpt/error.hpp"

namespace fpt {

namespace {

double integrate_piece(const std::function<double(double)>& f, double a, double b, double rel_tol,
                       double& l1_out) {
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0;
    double l1 = 0.0;
    double value = gauss_kronrod<double, 61>::integrate(f, a, b, 20, rel_tol, &err, &l1);
    if (!std::isfinite(value)) {
        std::ostringstream os;
        os << "non-finite integral on [" << a << ", " << b << ")";
        fail(ErrorCode::QuadratureFailure, os.str());
    }
    // Boost reports a conservative error; allow a modest factor before giving up.
    if (err > 50.0 * rel_tol * std::max(l1, 1e-300)) {
        std::ostringstream os;
        os << "error estimate " << err << " exceeds tolerance on [" << a << ", " << b << ")";
        fail(ErrorCode::QuadratureFailure, os.str());
    }
    l1_out = l1;
    return value;
}

std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 const std::vector<double>& breaks) {
    std::vector<double> pts{a};
    for (double p : breaks)
        if (p > a && p < b) pts.push_back(p);
    std::sort(pts.begin() + 1, pts.end());
    pts.push_back(b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1] <= pts[i]) continue;
        double l1 = 0.0;
        total += integrate_piece(f, pts[i], pts[i + 1], rel_tol, l1);
    }
    return total;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double rel_tol,
              int max_iter) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0)) fail(ErrorCode::NoBracket, "bisection endpoints share sign");
    for (int i = 0; i < max_iter; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo <= rel_tol * std::max(std::abs(lo), std::abs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> convolve_direct(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    const std::vector<double>& s = a.size() <= b.size() ? a : b;
    const std::vector<double>& l = a.size() <= b.size() ? b : a;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double si = s[i];
        if (si == 0.0) continue;
        double* o = out.data() + i;
        for (std::size_t j = 0; j < l.size(); ++j) o[j] += si * l[j];
    }
    return out;
}

std::vector<double> convolve_fft(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    std::size_t n_out = a.size() + b.size() - 1;
    std::size_t n = 1;
    while (n < n_out) n <<= 1;
    std::size_t nc = n / 2 + 1;

    double* ra = fftw_alloc_real(n);
    double* rb = fftw_alloc_real(n);
    fftw_complex* ca = fftw_alloc_complex(nc);
    fftw_complex* cb = fftw_alloc_complex(nc);
    fftw_plan pa, pb, pinv;
    {
        // FFTW planning is not thread safe.
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        pa = fftw_plan_dft_r2c_1d(static_cast<int>(n), ra, ca, FFTW_ESTIMATE);
        pb = fftw_plan_dft_r2c_1d(static_cast<int>(n), rb, cb, FFTW_ESTIMATE);
        pinv = fftw_plan_dft_c2r_1d(static_cast<int>(n), ca, ra, FFTW_ESTIMATE);
    }
    std::fill(ra, ra + n, 0.0);
    std::fill(rb, rb + n, 0.0);
    std::copy(a.begin(), a.end(), ra);
    std::copy(b.begin(), b.end(), rb);
    fftw_execute(pa);
    fftw_execute(pb);
    for (std::size_t k = 0; k < nc; ++k) {
        double re = ca[k][0] * cb[k][0] - ca[k][1] * cb[k][1];
        double im = ca[k][0] * cb[k][1] + ca[k][1] * cb[k][0];
        ca[k][0] = re;
        ca[k][1] = im;
    }
    fftw_execute(pinv);
    std::vector<double> out(n_out);
    double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n_out; ++i) out[i] = ra[i] * scale;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(pa);
        fftw_destroy_plan(pb);
        fftw_destroy_plan(pinv);
    }
    fftw_free(ra);
    fftw_free(rb);
    fftw_free(ca);
    fftw_free(cb);
    return out;
}

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b,
                             std::size_t direct_limit) {
    if (std::min(a.size(), b.size()) <= direct_limit) return convolve_direct(a, b);
    return convolve_fft(a, b);
}

double log_add(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace fpt
