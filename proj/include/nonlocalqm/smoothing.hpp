#pragma once

// Gaussian coarse-graining B = exp(l_P^2 d^2/dx^2 / 4), its spectral inverse
// and the truncated Hermite-series inverse.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nonlocalqm/error.hpp"
#include "nonlocalqm/evolution.hpp"
#include "nonlocalqm/grid.hpp"
#include "nonlocalqm/potential.hpp"

namespace nonlocalqm {

inline void smoothing_warnings(const Grid1D& g, const ModelParams& p, std::vector<std::string>* warnings) {
    if (warnings && p.l_P < 2.0 * g.spacing())
        warnings->push_back("l_P = " + std::to_string(p.l_P) + " is below two grid spacings; kernel under-resolved");
}

/// B psi by multiplying lattice modes with exp(-k^2 l_P^2 / 4).
inline WaveFunction gaussian_smooth(const WaveFunction& psi, const ModelParams& p,
                                    std::vector<std::string>* warnings = nullptr) {
    p.validate("gaussian_smooth");
    smoothing_warnings(psi.grid, p, warnings);
    return apply_wavenumber_multiplier(psi, [&](double k) { return smearing_factor(k, p.l_P); });
}

/// B psi as the periodic midpoint-rule convolution with f(xi) dx, |xi| <= 8 l_P.
inline WaveFunction gaussian_smooth_convolution(const WaveFunction& psi, const ModelParams& p,
                                                std::vector<std::string>* warnings = nullptr) {
    p.validate("gaussian_smooth_convolution");
    smoothing_warnings(psi.grid, p, warnings);
    const auto n = static_cast<long>(psi.grid.size());
    const double dx = psi.grid.spacing();
    const long reach = std::min<long>(static_cast<long>(std::floor(gaussian_truncation * p.l_P / dx)), n / 2 - 1);
    std::vector<double> w(static_cast<std::size_t>(2 * reach + 1));
    for (long m = -reach; m <= reach; ++m)
        w[static_cast<std::size_t>(m + reach)] = gaussian_kernel(static_cast<double>(m) * dx, p.l_P) * dx;
    WaveFunction out = psi;
    for (long i = 0; i < n; ++i) {
        cplx acc = 0;
        for (long m = -reach; m <= reach; ++m) acc += w[static_cast<std::size_t>(m + reach)] * psi.amplitudes[((i - m) % n + n) % n];
        out.amplitudes[i] = acc;
    }
    return out;
}

enum class DeconvolutionMethod { spectral, hermite_series };

struct DeconvolutionConfig {
    DeconvolutionMethod method = DeconvolutionMethod::spectral;
    /// Spectral band limit in wavenumber; <= 0 means beta / hbar.
    double k_max = 0;
    int n_max = 4;
    /// Relative spectral mass allowed above k_max before a warning is issued.
    double tolerance = 1e-10;
    /// Output/input norm ratio treated as blow-up.
    double amplification_limit = 1e3;
};

struct DeconvolutionResult {
    WaveFunction psi;
    double amplification = 0;
    double discarded_fraction = 0;
    std::vector<std::string> warnings;
};

/// Coefficient (-1)^n (2^n - 1) / (4^n n!) of the n-th series term.
inline double hermite_series_coefficient(int n) {
    double c = 1.0;
    for (int k = 1; k <= n; ++k) c *= -1.0 / (4.0 * k);
    return c * (std::pow(2.0, n) - 1.0);
}

/// Physicists' Hermite polynomial by the three-term recurrence.
inline double hermite(int n, double t) {
    if (n == 0) return 1.0;
    double h0 = 1.0, h1 = 2.0 * t;
    for (int k = 1; k < n; ++k) {
        const double h2 = 2.0 * t * h1 - 2.0 * k * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

/// n-th series term: c_n int dxi psi~(x - xi) H_2n(xi/l) f(xi), window |xi| <= 10 l.
inline WaveFunction hermite_series_term(const WaveFunction& psi_tilde, const ModelParams& p, int n) {
    require(n >= 1, ErrorKind::invalid_argument, "hermite_series_term", "order must be >= 1");
    const auto m = static_cast<long>(psi_tilde.grid.size());
    const double dx = psi_tilde.grid.spacing();
    const double l = p.l_P;
    const long reach = std::min<long>(static_cast<long>(std::floor(10.0 * l / dx)), m / 2 - 1);
    const double c = hermite_series_coefficient(n);
    std::vector<double> w(static_cast<std::size_t>(2 * reach + 1));
    for (long s = -reach; s <= reach; ++s) {
        const double xi = static_cast<double>(s) * dx;
        w[static_cast<std::size_t>(s + reach)] = c * hermite(2 * n, xi / l) * gaussian_kernel(xi, l) * dx;
    }
    WaveFunction out = psi_tilde;
    for (long i = 0; i < m; ++i) {
        cplx acc = 0;
        for (long s = -reach; s <= reach; ++s)
            acc += w[static_cast<std::size_t>(s + reach)] * psi_tilde.amplitudes[((i - s) % m + m) % m];
        out.amplitudes[i] = acc;
    }
    return out;
}

/// Recovers psi from psi~ = B psi.
inline DeconvolutionResult deconvolve(const WaveFunction& psi_tilde, const ModelParams& p,
                                      const DeconvolutionConfig& cfg = {}) {
    constexpr std::string_view op = "deconvolve";
    p.validate(op);
    require(psi_tilde.representation == Representation::position, ErrorKind::invalid_argument, op,
            "expects a position-space state");
    const double in_norm = psi_tilde.norm();
    DeconvolutionResult r{psi_tilde, 1.0, 0.0, {}};
    smoothing_warnings(psi_tilde.grid, p, &r.warnings);

    if (cfg.method == DeconvolutionMethod::spectral) {
        const double k_max = cfg.k_max > 0 ? cfg.k_max : p.beta / p.hbar;
        require(k_max <= psi_tilde.grid.nyquist_wavenumber() * (1 + 1e-12), ErrorKind::invalid_argument, op,
                "k_max exceeds the grid Nyquist wavenumber");
        Eigen::VectorXcd f = detail::fft_forward(psi_tilde.amplitudes);
        const double total = f.squaredNorm();
        double dropped = 0;
        for (Eigen::Index q = 0; q < f.size(); ++q) {
            const double k = psi_tilde.grid.fft_wavenumber(static_cast<std::size_t>(q));
            if (std::abs(k) <= k_max) {
                f[q] /= smearing_factor(k, p.l_P);
            } else {
                dropped += std::norm(f[q]);
                f[q] = 0;
            }
        }
        r.discarded_fraction = total > 0 ? dropped / total : 0.0;
        if (r.discarded_fraction > cfg.tolerance)
            r.warnings.push_back("spectral mass above k_max (" + std::to_string(r.discarded_fraction) +
                                 " of the total) was discarded");
        r.psi.amplitudes = detail::fft_inverse(f);
    } else {
        require(cfg.n_max >= 1, ErrorKind::invalid_argument, op, "n_max must be >= 1");
        for (int n = 1; n <= cfg.n_max; ++n) r.psi.amplitudes += hermite_series_term(psi_tilde, p, n).amplitudes;
    }
    require(r.psi.finite(), ErrorKind::ill_posed_input, op, "non-finite output");
    r.amplification = in_norm > 0 ? r.psi.norm() / in_norm : 1.0;
    require(r.amplification <= cfg.amplification_limit, ErrorKind::ill_posed_input, op,
            "output norm is " + std::to_string(r.amplification) + " times the input norm (limit " +
                std::to_string(cfg.amplification_limit) + "); inverting the Gaussian amplifies the high modes");
    return r;
}

}  // namespace nonlocalqm
