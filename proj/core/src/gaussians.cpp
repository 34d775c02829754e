#include "safeclf/gaussians.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "safeclf/errors.hpp"

namespace safeclf {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;
constexpr double kInvSqrt2 = 0.7071067811865475244;

// 32-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; symmetric).
constexpr std::array<double, 16> kGlNodes = {
    0.0483076656877383162, 0.1444719615827964934, 0.2392873622521370745,
    0.3318686022821276497, 0.4213512761306353454, 0.5068999089322293900,
    0.5877157572407623290, 0.6630442669302152009, 0.7321821187402896804,
    0.7944837959679424070, 0.8493676137325699701, 0.8963211557660521240,
    0.9349060759377396892, 0.9647622555875064308, 0.9856115115452683354,
    0.9972638618494815635};
constexpr std::array<double, 16> kGlWeights = {
    0.0965400885147278006, 0.0956387200792748594, 0.0938443990808045654,
    0.0911738786957638847, 0.0876520930044038111, 0.0833119242269467552,
    0.0781938957870703065, 0.0723457941088485062, 0.0658222227763618468,
    0.0586840934785355471, 0.0509980592623761762, 0.0428358980222266807,
    0.0342738629130214331, 0.0253920653092620595, 0.0162743947309056706,
    0.0070186100094700966};

}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_pdf_over_cdf(double x) {
    if (x > -6.0) {
        return normal_pdf(x) / normal_cdf(x);
    }
    // Laplace continued fraction for the Mills ratio Phi(x)/phi(x) at x << 0:
    //   Phi(x)/phi(x) = 1/(t + 1/(t + 2/(t + 3/(t + ...)))),  t = -x.
    const double t = -x;
    double frac = 0.0;
    for (int k = 60; k >= 1; --k) {
        frac = static_cast<double>(k) / (t + frac);
    }
    return t + frac;
}

double bivariate_normal_cdf(double h, double k, double rho) {
    rho = std::clamp(rho, -1.0, 1.0);
    if (rho == 1.0) return normal_cdf(std::min(h, k));
    if (rho == -1.0) return std::max(0.0, normal_cdf(h) + normal_cdf(k) - 1.0);

    // P(X<=h, Y<=k; rho) = Phi(h)Phi(k)
    //   + (1/2pi) * Int_0^asin(rho) exp(-(h^2 - 2hk sin t + k^2)/(2 cos^2 t)) dt.
    const double upper = std::asin(rho);
    const double half = 0.5 * upper;
    double integral = 0.0;
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
        for (const double s : {half * (1.0 - kGlNodes[i]), half * (1.0 + kGlNodes[i])}) {
            const double sin_s = std::sin(s);
            const double cos2_s = 1.0 - sin_s * sin_s;
            const double expo = -(h * h - 2.0 * h * k * sin_s + k * k) / (2.0 * cos2_s);
            integral += kGlWeights[i] * std::exp(expo);
        }
    }
    integral *= half / (2.0 * M_PI);
    const double p = normal_cdf(h) * normal_cdf(k) + integral;
    return std::clamp(p, 0.0, 1.0);
}

Eigen::Vector2d truncated_bivariate_mean(double h, double k, double rho) {
    rho = std::clamp(rho, -1.0, 1.0);
    const double p = bivariate_normal_cdf(h, k, rho);
    if (!(p > 0.0)) {
        throw EmptyIntersectionError(
            "truncated_bivariate_mean: truncated region has zero probability mass");
    }
    const double s = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    double ex, ey;
    if (s == 0.0) {
        // Degenerate correlation: X = +/-Y almost surely.
        if (rho > 0.0) {
            const double b = std::min(h, k);
            ex = -normal_pdf(b) / normal_cdf(b);
            ey = ex;
        } else {
            // X = -Y, truncation X <= h, -X <= k  =>  -k <= X <= h.
            ex = truncated_interval_mean(-k, h);
            ey = -ex;
        }
        return {ex, ey};
    }
    // Tallis moments specialized to upper truncation (derived from the
    // standard lower-truncation form by reflection):
    //   E[X] * P = -( phi(h) Phi((k - rho h)/s) + rho phi(k) Phi((h - rho k)/s) ).
    ex = -(normal_pdf(h) * normal_cdf((k - rho * h) / s) +
           rho * normal_pdf(k) * normal_cdf((h - rho * k) / s)) /
         p;
    ey = -(normal_pdf(k) * normal_cdf((h - rho * k) / s) +
           rho * normal_pdf(h) * normal_cdf((k - rho * h) / s)) /
         p;
    return {ex, ey};
}

double truncated_interval_mean(double lo, double hi) {
    if (!(hi > lo)) {
        throw EmptyIntersectionError("truncated_interval_mean: empty interval");
    }
    const double mass = normal_cdf(hi) - normal_cdf(lo);
    if (!(mass > 0.0)) {
        // Mass underflows far in a tail; the truncated law concentrates at the
        // interval end closest to the origin.
        return (lo > 0.0) ? lo : hi;
    }
    return (normal_pdf(lo) - normal_pdf(hi)) / mass;
}

}  // namespace safeclf
