#include "mopul/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace mopul {

std::uint64_t Rng::mix(std::uint64_t v) {
    // splitmix64 finalizer
    v += kPhi;
    v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
    v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
    return v ^ (v >> 31);
}

Rng Rng::derive(std::string_view label, std::uint64_t index) const {
    std::uint64_t h = state_;
    for (char ch : label) h = mix(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(ch)));
    h = mix(h ^ index);
    Rng child(0);
    child.state_ = h;
    return child;
}

std::uint64_t Rng::next_u64() {
    state_ += kPhi;
    std::uint64_t v = state_;
    v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
    v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
    return v ^ (v >> 31);
}

double Rng::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_uniform(double lo, double hi) { return lo + (hi - lo) * next_uniform(); }

double Rng::next_normal() {
    // Shift into (0, 1): a raw 0 would send the inverse CDF to -inf.
    const double u = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    return inverse_normal_cdf(u);
}

double Rng::next_normal(double mean, double stddev) { return mean + stddev * next_normal(); }

Vector Rng::uniform_vector(Index dim, double lo, double hi) {
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v(i) = next_uniform(lo, hi);
    return v;
}

Vector Rng::normal_vector(Index dim, double mean, double stddev) {
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v(i) = next_normal(mean, stddev);
    return v;
}

Matrix Rng::normal_matrix(Index rows, Index cols, double mean, double stddev) {
    Matrix m(rows, cols);
    // Row-major fill so the draw order matches reading the matrix.
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = next_normal(mean, stddev);
    return m;
}

double inverse_normal_cdf(double u) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("inverse_normal_cdf needs u in (0,1)");

    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;

    double x;
    if (u < plow) {
        const double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= 1.0 - plow) {
        const double q = u - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - u));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // One Halley step against the exact CDF brings the error near machine
    // precision across the whole range.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - u;
    const double g = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x -= g / (1.0 + 0.5 * x * g);
    return x;
}

}  // namespace mopul
