#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace limitlab {

// Standard normal density and distribution function.
double normal_pdf(double x) noexcept;
double normal_cdf(double x) noexcept;

/// Density of N(mu, sigma^2) conditioned on x > 0. Zero for x < 0.
/// Throws std::domain_error if sigma <= 0.
double truncnorm_pdf(double x, double mu, double sigma);

/// Q(r) = phi(r) / Phi(r). Uses a continued fraction for r < -1.5.
double mills_q(double r) noexcept;

/// 1 - Q(r) * (r + Q(r)): variance of the truncated standard form,
/// Var(X | X > 0) / sigma^2 at r = mu / sigma.
double truncated_variance_factor(double r) noexcept;

/// r'(r) = (r + Q(r)) / sqrt(1 - Q(r)(r + Q(r))), the mean-to-deviation
/// ratio of the truncated normal. Strictly increasing, r'(r) > max(1, r).
double r_prime(double r) noexcept;

struct RootSolution {
    double r = 0.0;
    int iterations = 0;
    double residual = 0.0; // r_prime(r) - target
};

/// Inverts r_prime. The search is bracketed on [-40, max(40, 2 * target)].
/// Throws std::domain_error for targets that are not positive or lie below
/// r_prime(-40), and NumericalError if the residual stays above 1e-10.
RootSolution solve_r(double target);

enum class FitMethod : std::uint8_t { ols, mle };
std::string_view to_string(FitMethod m) noexcept;

struct TruncNormalFit {
    double mu = 0.0;
    double sigma = 1.0;
    FitMethod method = FitMethod::mle;
    // MLE diagnostics.
    double sample_mean = 0.0;
    double sample_sd = 0.0;
    int iterations = 0;
    double residual = 0.0;
    // OLS diagnostics.
    double rss = 0.0;
    std::size_t n = 0; // samples (MLE) or bins (OLS)
};

/// Moment-matching fit: r from the sample mean / standard deviation ratio
/// (population moments), then sigma and mu. Needs >= 2 positive samples
/// with nonzero spread (std::domain_error otherwise).
TruncNormalFit fit_mle(std::span<const double> samples);

struct HistogramBin {
    double left = 0.0;
    double center = 0.0;
    std::size_t count = 0;
    double density = 0.0;
};

/// Least-squares fit of truncnorm_pdf to (center, density) pairs.
/// A 100 x 100 grid with mu over [min, max] of the centers and sigma over
/// (0, max - min], then three refinement passes each covering +/- one
/// previous step at 1/50 of it. Needs >= 3 bins with positive density.
TruncNormalFit fit_ols(std::span<const HistogramBin> histogram);

/// Left-closed bins [k w, (k+1) w) from 0 up to the bin of the largest
/// value, density = count / (n w). Throws std::domain_error for empty
/// input, a non-positive width or a negative value.
std::vector<HistogramBin> estimate_pdf(std::span<const double> values, double bin_width);

}  // namespace limitlab
