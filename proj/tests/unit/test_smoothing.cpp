#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nonlocalqm/bandlimit.hpp"
#include "nonlocalqm/smoothing.hpp"

using namespace nonlocalqm;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::invalid_state;
}

double max_diff(const WaveFunction& a, const WaveFunction& b) {
    return (a.amplitudes - b.amplitudes).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(GaussianSmooth, ConvolutionAndSpectralRoutesAgree) {
    const ModelParams p{1.0, 1.0, 0.5, 4.0};
    const Grid1D g = make_grid(512, -20, 20);
    std::mt19937_64 rng(8);
    for (int t = 0; t < 5; ++t) {
        const WaveFunction psi = random_state(g, rng);
        EXPECT_LE(max_diff(gaussian_smooth(psi, p), gaussian_smooth_convolution(psi, p)), 1e-10);
    }
}

TEST(GaussianSmooth, GaussianWidthsAddInQuadrature) {
    const ModelParams p{1.0, 1.0, 0.6, 4.0};
    const Grid1D g = make_grid(512, -20, 20);
    const double sigma = 1.3, x0 = 0.7;
    const WaveFunction in = WaveFunction::from_function(g, [&](double x) {
        const double u = (x - x0) / sigma;
        return cplx(std::exp(-0.5 * u * u));
    });
    const WaveFunction out = gaussian_smooth(in, p);
    const double s2 = sigma * sigma + p.l_P * p.l_P / 2;
    double worst = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double u = g.position(i) - x0;
        const double expect = sigma / std::sqrt(s2) * std::exp(-0.5 * u * u / s2);
        worst = std::max(worst, std::abs(out.amplitudes[static_cast<Eigen::Index>(i)] - expect));
    }
    EXPECT_LE(worst, 1e-12);
    EXPECT_NEAR(observables(out.normalized()).mean_x, x0, 1e-12);
}

TEST(GaussianSmooth, ConstantsAndPlaneWaves) {
    const ModelParams p{1.0, 1.0, 0.4, 4.0};
    const Grid1D g = make_grid(256, -10, 10);
    const WaveFunction c = WaveFunction::from_function(g, [](double) { return cplx(2.0, -1.0); });
    EXPECT_LE(max_diff(gaussian_smooth(c, p), c), 1e-14);
    EXPECT_LE(max_diff(gaussian_smooth_convolution(c, p), c), 1e-12);
    const double k0 = g.wavenumber(128 + 9);
    const WaveFunction w = WaveFunction::from_function(g, [&](double x) { return std::polar(1.0, k0 * x); });
    WaveFunction expect = w;
    expect.amplitudes *= std::exp(-k0 * k0 * p.l_P * p.l_P / 4);
    EXPECT_LE(max_diff(gaussian_smooth(w, p), expect), 1e-13);
}

TEST(GaussianSmooth, LinearContractionAndWarning) {
    const ModelParams p{1.0, 1.0, 0.4, 4.0};
    const Grid1D g = make_grid(256, -10, 10);
    std::mt19937_64 rng(21);
    for (int t = 0; t < 50; ++t) {
        const WaveFunction a = random_state(g, rng), b = random_state(g, rng);
        const cplx alpha(0.3, -1.2), beta(-2.0, 0.5);
        WaveFunction ab = a;
        ab.amplitudes = alpha * a.amplitudes + beta * b.amplitudes;
        WaveFunction lin = a;
        lin.amplitudes = alpha * gaussian_smooth(a, p).amplitudes + beta * gaussian_smooth(b, p).amplitudes;
        EXPECT_LE(max_diff(gaussian_smooth(ab, p), lin), 1e-12);
        EXPECT_LT(gaussian_smooth(a, p).norm(), a.norm());
    }
    std::vector<std::string> warnings;
    gaussian_smooth(random_state(g, rng), ModelParams{1, 1, 0.1, 4}, &warnings);
    EXPECT_EQ(warnings.size(), 1u);
}

TEST(Deconvolve, SpectralRoundTripOnBandLimitedInputs) {
    const ModelParams p{1.0, 1.0, 0.5, 4.0};
    const Grid1D g = make_grid(512, -20, 20);
    std::mt19937_64 rng(12);
    for (int t = 0; t < 20; ++t) {
        const WaveFunction psi = random_bandlimited_state(g, p, rng);
        const DeconvolutionResult r = deconvolve(gaussian_smooth(psi, p), p);
        EXPECT_LE(max_diff(r.psi, psi), 1e-8 * psi.amplitudes.cwiseAbs().maxCoeff());
        EXPECT_LE(r.discarded_fraction, 1e-20);
        EXPECT_TRUE(r.warnings.empty());
    }
}

TEST(Deconvolve, SpectralLinearity) {
    const ModelParams p{1.0, 1.0, 0.5, 4.0};
    const Grid1D g = make_grid(256, -20, 20);
    std::mt19937_64 rng(13);
    const WaveFunction a = random_bandlimited_state(g, p, rng), b = random_bandlimited_state(g, p, rng);
    WaveFunction ab = a;
    ab.amplitudes = 2.0 * a.amplitudes - cplx(0, 1) * b.amplitudes;
    const Eigen::VectorXcd lin =
        2.0 * deconvolve(a, p).psi.amplitudes - cplx(0, 1) * deconvolve(b, p).psi.amplitudes;
    EXPECT_LE((deconvolve(ab, p).psi.amplitudes - lin).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Deconvolve, SpikeAtNyquistIsIllPosed) {
    const ModelParams p{1.0, 1.0, 0.5, 4.0};
    const Grid1D g = make_grid(256, -20, 20);
    WaveFunction spike = WaveFunction::zeros(g);
    spike.amplitudes[128] = 1.0;
    DeconvolutionConfig cfg;
    cfg.k_max = g.nyquist_wavenumber();
    EXPECT_EQ(kind_of([&] { deconvolve(spike, p, cfg); }), ErrorKind::ill_posed_input);
    cfg.k_max = 2 * g.nyquist_wavenumber();
    EXPECT_EQ(kind_of([&] { deconvolve(spike, p, cfg); }), ErrorKind::invalid_argument);
    // Within the model band the spike is merely truncated, with a warning.
    const DeconvolutionResult r = deconvolve(spike, p);
    EXPECT_GT(r.discarded_fraction, 0.1);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Deconvolve, HermiteSeriesConvergesWithOrder) {
    const ModelParams p{1.0, 1.0, 0.5, 6.0};
    const Grid1D g = make_grid(2048, -51.2, 51.2);  // l_P / dx = 10
    const WaveFunction psi = gaussian_packet(g, 0.5, 2.0, 0.8);
    const WaveFunction tilde = gaussian_smooth(psi, p);
    std::vector<double> errors;
    for (int n : {1, 2, 4, 8}) {
        DeconvolutionConfig cfg;
        cfg.method = DeconvolutionMethod::hermite_series;
        cfg.n_max = n;
        errors.push_back(max_diff(deconvolve(tilde, p, cfg).psi, psi));
    }
    for (std::size_t i = 1; i < errors.size(); ++i) EXPECT_LT(errors[i], errors[i - 1]);
    EXPECT_LE(errors.back(), 1e-8);
}

TEST(Deconvolve, SeriesCoefficientsAndFirstTerm) {
    EXPECT_DOUBLE_EQ(hermite_series_coefficient(1), -0.25);
    EXPECT_DOUBLE_EQ(hermite_series_coefficient(2), 3.0 / 32.0);
    EXPECT_DOUBLE_EQ(hermite_series_coefficient(3), -7.0 / 384.0);
    EXPECT_EQ(hermite(0, 0.3), 1.0);
    EXPECT_DOUBLE_EQ(hermite(4, 0.5), 16 * 0.0625 - 48 * 0.25 + 12);

    const ModelParams p{1.0, 1.0, 0.2, 6.0};
    const Grid1D g = make_grid(1024, -20.48, 20.48);  // l_P / dx = 5
    const WaveFunction tilde = gaussian_packet(g, 0.0, 1.5, 0.4);
    const WaveFunction term = hermite_series_term(tilde, p, 1);
    // Equals -(l^2/4) (B psi~)'' exactly ...
    const WaveFunction smoothed = gaussian_smooth(tilde, p);
    const WaveFunction d2 = apply_wavenumber_multiplier(smoothed, [](double k) { return -k * k; });
    EXPECT_LE((term.amplitudes + p.l_P * p.l_P / 4 * d2.amplitudes).cwiseAbs().maxCoeff(), 1e-10);
    // ... and -(l^2/4) psi~'' up to O(l^4), checked against central differences.
    const double dx = g.spacing();
    double worst = 0;
    for (Eigen::Index i = 2; i + 2 < static_cast<Eigen::Index>(g.size()); ++i) {
        const cplx fd = (-tilde.amplitudes[i + 2] + 16.0 * tilde.amplitudes[i + 1] - 30.0 * tilde.amplitudes[i] +
                         16.0 * tilde.amplitudes[i - 1] - tilde.amplitudes[i - 2]) /
                        (12 * dx * dx);
        worst = std::max(worst, std::abs(term.amplitudes[i] + p.l_P * p.l_P / 4 * fd));
    }
    EXPECT_LE(worst, 1e-4);
}
