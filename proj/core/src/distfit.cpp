#include "limitlab/distfit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "limitlab/common.hpp"

namespace limitlab {

namespace {

constexpr double kAsymptoticBranch = -1.5;
constexpr int kFractionTerms = 500;

// F_n = x + n / F_{n+1} for x = -r > 0, evaluated backwards; returns F_1..F_4.
std::array<double, 4> mills_fraction(double x) noexcept {
    double f = x;
    std::array<double, 4> out{};
    for (int n = kFractionTerms; n >= 1; --n) {
        f = x + n / f;
        if (n <= 4) out[static_cast<std::size_t>(n - 1)] = f;
    }
    return out;
}

double r_plus_q(double r) noexcept {
    if (r < kAsymptoticBranch) return 1.0 / mills_fraction(-r)[1];
    return r + mills_q(r);
}

}  // namespace

double normal_pdf(double x) noexcept { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double mills_q(double r) noexcept {
    if (r < kAsymptoticBranch) return mills_fraction(-r)[0];
    return normal_pdf(r) / normal_cdf(r);
}

double truncated_variance_factor(double r) noexcept {
    if (r < kAsymptoticBranch) {
        const double x = -r;
        const auto f = mills_fraction(x);
        return (x + 4.0 / f[2] - 3.0 / f[3]) / (f[2] * f[1] * f[1]);
    }
    const double q = mills_q(r);
    return 1.0 - q * (r + q);
}

double r_prime(double r) noexcept { return r_plus_q(r) / std::sqrt(truncated_variance_factor(r)); }

double truncnorm_pdf(double x, double mu, double sigma) {
    if (!(sigma > 0.0)) throw std::domain_error("truncnorm_pdf: sigma must be positive");
    if (x < 0.0) return 0.0;
    const double r = mu / sigma;
    const double z = (x - mu) / sigma;
    if (r < kAsymptoticBranch) return std::exp(0.5 * (r * r - z * z)) * mills_q(r) / sigma;
    return normal_pdf(z) / (sigma * normal_cdf(r));
}

RootSolution solve_r(double target) {
    constexpr double kLow = -40.0;
    if (!(target > 0.0) || !std::isfinite(target))
        throw std::domain_error("solve_r: r' must be a positive finite number");
    const double floor_value = r_prime(kLow);
    if (target < floor_value)
        throw std::domain_error("solve_r: r' = " + format_real(target) + " is below r'(-40) = " +
                                format_real(floor_value));

    double lo = kLow, hi = std::max(40.0, 2.0 * target);
    double f_lo = floor_value - target, f_hi = r_prime(hi) - target;
    RootSolution out;
    if (f_lo == 0.0) return {lo, 0, 0.0};

    double best = lo, best_f = f_lo;
    double last_width = hi - lo;
    for (out.iterations = 1; out.iterations <= 200; ++out.iterations) {
        double x = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        const double margin = 1e-3 * (hi - lo);
        // Fall back to bisection when the secant point hugs an endpoint or
        // the bracket is not shrinking fast enough.
        if (!(x > lo + margin && x < hi - margin) || (out.iterations % 3 == 0 && hi - lo > 0.5 * last_width))
            x = 0.5 * (lo + hi);
        if (out.iterations % 3 == 0) last_width = hi - lo;

        const double fx = r_prime(x) - target;
        if (std::abs(fx) < std::abs(best_f)) {
            best = x;
            best_f = fx;
        }
        if (fx == 0.0) break;
        if (fx < 0.0) {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    out.r = best;
    out.residual = best_f;
    if (!(std::abs(out.residual) <= 1e-10))
        throw NumericalError("solve_r: no convergence for r' = " + format_real(target) +
                             " (residual " + format_real(out.residual) + ")");
    return out;
}

std::string_view to_string(FitMethod m) noexcept { return m == FitMethod::ols ? "OLS" : "MLE"; }

TruncNormalFit fit_mle(std::span<const double> samples) {
    if (samples.size() < 2) throw std::domain_error("fit_mle: need at least two samples");
    for (double v : samples)
        if (!(v > 0.0) || !std::isfinite(v)) throw std::domain_error("fit_mle: samples must be positive and finite");
    const auto n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double v : samples) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / n);
    if (!(sd > 0.0)) throw std::domain_error("fit_mle: samples have zero variance");

    const auto root = solve_r(mean / sd);
    TruncNormalFit fit;
    fit.method = FitMethod::mle;
    fit.sigma = sd / std::sqrt(truncated_variance_factor(root.r));
    fit.mu = root.r * fit.sigma;
    fit.sample_mean = mean;
    fit.sample_sd = sd;
    fit.iterations = root.iterations;
    fit.residual = root.residual;
    fit.n = samples.size();
    return fit;
}

TruncNormalFit fit_ols(std::span<const HistogramBin> histogram) {
    const auto informative =
        std::count_if(histogram.begin(), histogram.end(), [](const HistogramBin& b) { return b.density > 0.0; });
    if (informative < 3) throw std::domain_error("fit_ols: need at least three bins with positive density");

    double cmin = std::numeric_limits<double>::infinity(), cmax = -cmin;
    for (const auto& b : histogram) {
        cmin = std::min(cmin, b.center);
        cmax = std::max(cmax, b.center);
    }
    const double range = cmax - cmin;

    auto rss = [&](double mu, double sigma) {
        double s = 0.0;
        for (const auto& b : histogram) {
            const double e = truncnorm_pdf(b.center, mu, sigma) - b.density;
            s += e * e;
        }
        return s;
    };

    constexpr int kGrid = 100;
    double best_mu = cmin, best_sigma = range / kGrid, best = std::numeric_limits<double>::infinity();
    const double mu_step0 = range / (kGrid - 1);
    const double sigma_step0 = range / kGrid;
    for (int i = 0; i < kGrid; ++i) {
        const double mu = cmin + i * mu_step0;
        for (int j = 1; j <= kGrid; ++j) {
            const double sigma = j * sigma_step0;
            const double v = rss(mu, sigma);
            if (v < best) {
                best = v;
                best_mu = mu;
                best_sigma = sigma;
            }
        }
    }

    double mu_step = mu_step0, sigma_step = sigma_step0;
    for (int pass = 0; pass < 3; ++pass) {
        const double mu_c = best_mu, sigma_c = best_sigma;
        const double dmu = mu_step / 50.0, dsigma = sigma_step / 50.0;
        for (int i = -50; i <= 50; ++i) {
            const double mu = mu_c + i * dmu;
            for (int j = -50; j <= 50; ++j) {
                const double sigma = sigma_c + j * dsigma;
                if (!(sigma > 0.0)) continue;
                const double v = rss(mu, sigma);
                if (v < best) {
                    best = v;
                    best_mu = mu;
                    best_sigma = sigma;
                }
            }
        }
        mu_step = dmu;
        sigma_step = dsigma;
    }

    TruncNormalFit fit;
    fit.method = FitMethod::ols;
    fit.mu = best_mu;
    fit.sigma = best_sigma;
    fit.rss = best;
    fit.n = histogram.size();
    return fit;
}

std::vector<HistogramBin> estimate_pdf(std::span<const double> values, double bin_width) {
    if (values.empty()) throw std::domain_error("estimate_pdf: no values");
    if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw std::domain_error("estimate_pdf: bad bin width");
    std::vector<std::size_t> counts;
    for (double v : values) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::domain_error("estimate_pdf: values must be finite and >= 0");
        const auto k = static_cast<std::size_t>(std::floor(v / bin_width));
        if (k >= counts.size()) counts.resize(k + 1, 0);
        ++counts[k];
    }
    const double norm = static_cast<double>(values.size()) * bin_width;
    std::vector<HistogramBin> out(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        out[k].left = static_cast<double>(k) * bin_width;
        out[k].center = (static_cast<double>(k) + 0.5) * bin_width;
        out[k].count = counts[k];
        out[k].density = static_cast<double>(counts[k]) / norm;
    }
    return out;
}

}  // namespace limitlab
