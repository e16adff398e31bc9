#pragma once

// Uniform periodic 1D grid, lattice Fourier transforms between position and
// momentum representation, and wavefunction moments.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "nonlocalqm/error.hpp"

namespace nonlocalqm {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

/// Physical constants and deformation scales. `beta` is the hard momentum
/// cutoff; the usual choice is beta = hbar / l_P (see `with_l_P`).
struct ModelParams {
    double hbar = 1.0;
    double mass = 1.0;
    double l_P = 0.1;
    double beta = 10.0;

    static ModelParams with_l_P(double l_P, double hbar = 1.0, double mass = 1.0) {
        return ModelParams{hbar, mass, l_P, hbar / l_P};
    }

    double k_P() const { return 1.0 / l_P; }

    void validate(std::string_view op = "ModelParams") const {
        const bool ok = std::isfinite(hbar) && std::isfinite(mass) && std::isfinite(l_P) &&
                        std::isfinite(beta) && hbar > 0 && mass > 0 && l_P > 0 && beta > 0;
        require(ok, ErrorKind::invalid_argument, op,
                "hbar, mass, l_P and beta must be finite and strictly positive");
        const double ratio = beta * l_P / hbar;
        require(std::isfinite(ratio) && ratio > 0, ErrorKind::invalid_argument, op,
                "beta*l_P/hbar must be finite and positive");
    }
};

/// Cell-centred periodic grid: x_i = x_min + (i + 1/2) dx, dx = (x_max - x_min)/n.
/// The conjugate wavenumber lattice is k_j = (j - n/2) 2pi/L, ascending.
class Grid1D {
public:
    static Grid1D make(std::size_t n_points, double x_min, double x_max) {
        constexpr std::string_view op = "make_grid";
        require(n_points >= 16 && (n_points & (n_points - 1)) == 0, ErrorKind::invalid_argument, op,
                "n_points must be a power of two >= 16, got " + std::to_string(n_points));
        require(std::isfinite(x_min) && std::isfinite(x_max) && x_max > x_min,
                ErrorKind::invalid_argument, op, "degenerate domain: need x_max > x_min");
        return Grid1D(n_points, x_min, x_max);
    }

    std::size_t size() const { return n_; }
    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    double length() const { return x_max_ - x_min_; }
    double spacing() const { return dx_; }

    double position(std::size_t i) const { return x_min_ + (static_cast<double>(i) + 0.5) * dx_; }
    Eigen::VectorXd positions() const {
        Eigen::VectorXd x(n_);
        for (std::size_t i = 0; i < n_; ++i) x[i] = position(i);
        return x;
    }

    double wavenumber_spacing() const { return 2.0 * pi / length(); }
    double nyquist_wavenumber() const { return pi / dx_; }
    /// Ascending lattice index j -> k_j.
    double wavenumber(std::size_t j) const {
        return (static_cast<double>(j) - static_cast<double>(n_ / 2)) * wavenumber_spacing();
    }
    /// FFT-ordered index q -> k_q.
    double fft_wavenumber(std::size_t q) const {
        const auto n = static_cast<long>(n_);
        long s = static_cast<long>(q);
        if (s >= n / 2) s -= n;
        return static_cast<double>(s) * wavenumber_spacing();
    }
    Eigen::VectorXd wavenumbers() const {
        Eigen::VectorXd k(n_);
        for (std::size_t j = 0; j < n_; ++j) k[j] = wavenumber(j);
        return k;
    }
    Eigen::VectorXd momenta(double hbar) const { return hbar * wavenumbers(); }
    double momentum_spacing(double hbar) const { return hbar * wavenumber_spacing(); }
    /// Half-width of the momentum lattice, pi*hbar/dx.
    double momentum_span(double hbar) const { return hbar * nyquist_wavenumber(); }

    /// Wraps a displacement into [-L/2, L/2).
    double minimum_image(double d) const {
        const double L = length();
        return d - L * std::floor(d / L + 0.5);
    }

    bool operator==(const Grid1D& o) const {
        return n_ == o.n_ && x_min_ == o.x_min_ && x_max_ == o.x_max_;
    }

private:
    Grid1D(std::size_t n, double a, double b)
        : n_(n), x_min_(a), x_max_(b), dx_((b - a) / static_cast<double>(n)) {}

    std::size_t n_;
    double x_min_;
    double x_max_;
    double dx_;
};

inline Grid1D make_grid(std::size_t n_points, double x_min, double x_max) {
    return Grid1D::make(n_points, x_min, x_max);
}

enum class Representation { position, momentum };
enum class TransformDirection { position_to_momentum, momentum_to_position };

/// Complex amplitudes on a grid. In the momentum representation amplitude j
/// belongs to p_j = hbar * grid.wavenumber(j) and `hbar` records the scale.
struct WaveFunction {
    Grid1D grid;
    Eigen::VectorXcd amplitudes;
    Representation representation = Representation::position;
    double hbar = 1.0;

    static WaveFunction zeros(const Grid1D& g) {
        return WaveFunction{g, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(g.size()))};
    }

    static WaveFunction from_function(const Grid1D& g, const std::function<cplx(double)>& f) {
        WaveFunction psi = zeros(g);
        for (std::size_t i = 0; i < g.size(); ++i) psi.amplitudes[static_cast<Eigen::Index>(i)] = f(g.position(i));
        return psi;
    }

    /// Measure of one lattice cell (dx or dp).
    double cell() const {
        return representation == Representation::position ? grid.spacing()
                                                          : grid.momentum_spacing(hbar);
    }
    double norm_squared() const { return amplitudes.squaredNorm() * cell(); }
    double norm() const { return std::sqrt(norm_squared()); }

    WaveFunction normalized() const {
        const double n = norm();
        require(n > 0 && std::isfinite(n), ErrorKind::invalid_state, "normalize", "zero or non-finite norm");
        WaveFunction out = *this;
        out.amplitudes /= n;
        return out;
    }

    /// Inner product <this|other> with the cell measure.
    cplx inner(const WaveFunction& other) const {
        return amplitudes.dot(other.amplitudes) * cell();
    }

    bool finite() const { return amplitudes.allFinite(); }
};

namespace detail {

// Unscaled forward DFT: out_q = sum_j in_j exp(-2 pi i q j / n).
inline Eigen::VectorXcd fft_forward(const Eigen::VectorXcd& in) {
    Eigen::FFT<double> fft;
    Eigen::VectorXcd out(in.size());
    fft.fwd(out, in);
    return out;
}

// Inverse DFT including the 1/n factor.
inline Eigen::VectorXcd fft_inverse(const Eigen::VectorXcd& in) {
    Eigen::FFT<double> fft;
    Eigen::VectorXcd out(in.size());
    fft.inv(out, in);
    return out;
}

inline std::size_t fft_to_ascending(std::size_t q, std::size_t n) { return (q + n / 2) % n; }

}  // namespace detail

/// Lattice version of psi(x) = (2 pi hbar)^{-1/2} \int dp chi(p) e^{ipx/hbar}.
/// The position offset phase is kept so chi samples the continuum transform.
inline WaveFunction transform(const WaveFunction& psi, TransformDirection dir, double hbar = 1.0) {
    constexpr std::string_view op = "transform";
    require(hbar > 0, ErrorKind::invalid_argument, op, "hbar must be positive");
    require(static_cast<std::size_t>(psi.amplitudes.size()) == psi.grid.size(),
            ErrorKind::invalid_argument, op, "amplitude count does not match grid");
    const Grid1D& g = psi.grid;
    const std::size_t n = g.size();
    const double x0 = g.position(0);
    const double dx = g.spacing();
    const double dp = g.momentum_spacing(hbar);
    const double root = std::sqrt(2.0 * pi * hbar);

    if (dir == TransformDirection::position_to_momentum) {
        require(psi.representation == Representation::position, ErrorKind::invalid_argument, op,
                "input is not in the position representation");
        const Eigen::VectorXcd f = detail::fft_forward(psi.amplitudes);
        WaveFunction chi{g, Eigen::VectorXcd(static_cast<Eigen::Index>(n)), Representation::momentum, hbar};
        for (std::size_t q = 0; q < n; ++q) {
            const double k = g.fft_wavenumber(q);
            const cplx phase = std::polar(1.0, -k * x0);
            chi.amplitudes[static_cast<Eigen::Index>(detail::fft_to_ascending(q, n))] =
                (dx / root) * phase * f[static_cast<Eigen::Index>(q)];
        }
        return chi;
    }

    require(psi.representation == Representation::momentum, ErrorKind::invalid_argument, op,
            "input is not in the momentum representation");
    require(std::abs(psi.hbar - hbar) <= 1e-15 * hbar, ErrorKind::invalid_argument, op,
            "hbar differs from the one used for the forward transform");
    Eigen::VectorXcd f(static_cast<Eigen::Index>(n));
    for (std::size_t q = 0; q < n; ++q) {
        const double k = g.fft_wavenumber(q);
        f[static_cast<Eigen::Index>(q)] =
            std::polar(1.0, k * x0) * psi.amplitudes[static_cast<Eigen::Index>(detail::fft_to_ascending(q, n))];
    }
    const Eigen::VectorXcd a = detail::fft_inverse(f);
    WaveFunction out{g, (static_cast<double>(n) * dp / root) * a, Representation::position, 1.0};
    return out;
}

/// Applies a multiplier g(k) diagonal in the lattice wavenumber basis to a
/// position-space state.
inline WaveFunction apply_wavenumber_multiplier(const WaveFunction& psi,
                                                const std::function<cplx(double)>& multiplier) {
    require(psi.representation == Representation::position, ErrorKind::invalid_argument,
            "apply_wavenumber_multiplier", "input is not in the position representation");
    Eigen::VectorXcd f = detail::fft_forward(psi.amplitudes);
    for (Eigen::Index q = 0; q < f.size(); ++q)
        f[q] *= multiplier(psi.grid.fft_wavenumber(static_cast<std::size_t>(q)));
    WaveFunction out = psi;
    out.amplitudes = detail::fft_inverse(f);
    return out;
}

/// Spectral derivative d/dx of a position-space state.
inline WaveFunction spectral_derivative(const WaveFunction& psi, int order = 1) {
    return apply_wavenumber_multiplier(psi, [order](double k) {
        return std::pow(cplx(0.0, k), order);
    });
}

struct Observables {
    double norm = 0;
    double mean_x = 0;
    double delta_x = 0;
    double mean_p = 0;
    double delta_p = 0;
    /// Positional spread l = sqrt(<(x - <x>)^2>); equals delta_x in 1D.
    double spread_l = 0;
};

/// Moments by midpoint sums; momentum moments in the momentum representation.
inline Observables observables(const WaveFunction& psi, double hbar = 1.0) {
    constexpr std::string_view op = "observables";
    require(psi.representation == Representation::position, ErrorKind::invalid_argument, op,
            "expects a position-space state");
    require(psi.finite(), ErrorKind::invalid_state, op, "non-finite amplitudes");
    const double n2 = psi.norm_squared();
    require(n2 > 0, ErrorKind::invalid_state, op, "zero-norm state");

    Observables o;
    o.norm = std::sqrt(n2);
    const Eigen::VectorXd rho = psi.amplitudes.cwiseAbs2() * psi.grid.spacing() / n2;
    const Eigen::VectorXd x = psi.grid.positions();
    o.mean_x = rho.dot(x);
    o.delta_x = std::sqrt(std::max(0.0, rho.dot((x.array() - o.mean_x).square().matrix())));
    o.spread_l = o.delta_x;

    const WaveFunction chi = transform(psi, TransformDirection::position_to_momentum, hbar);
    const Eigen::VectorXd w = chi.amplitudes.cwiseAbs2() * chi.cell();
    const double wsum = w.sum();
    const Eigen::VectorXd p = psi.grid.momenta(hbar);
    o.mean_p = w.dot(p) / wsum;
    o.delta_p = std::sqrt(std::max(0.0, w.dot((p.array() - o.mean_p).square().matrix()) / wsum));
    return o;
}

/// Probability mass within `cells` grid cells of either domain edge.
inline double boundary_mass(const WaveFunction& psi, std::size_t cells = 8) {
    const auto c = static_cast<Eigen::Index>(std::min<std::size_t>(cells, psi.grid.size() / 2));
    const double edge = psi.amplitudes.head(c).squaredNorm() + psi.amplitudes.tail(c).squaredNorm();
    return edge / psi.amplitudes.squaredNorm();
}

/// Normalised Gaussian packet exp(-(x-x0)^2 / (2 sigma^2) + i p0 x / hbar).
inline WaveFunction gaussian_packet(const Grid1D& g, double x0, double sigma, double p0 = 0.0,
                                    double hbar = 1.0) {
    require(sigma > 0, ErrorKind::invalid_argument, "gaussian_packet", "sigma must be positive");
    return WaveFunction::from_function(g, [=](double x) {
               const double u = (x - x0) / sigma;
               return std::polar(std::exp(-0.5 * u * u), p0 * x / hbar);
           })
        .normalized();
}

}  // namespace nonlocalqm
