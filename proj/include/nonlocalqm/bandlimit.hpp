#pragma once

// Hard momentum cutoff: projector onto |p| < beta, its sinc kernel, the
// sampling series, the hbar/4beta bound and the translation-built momentum.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nonlocalqm/error.hpp"
#include "nonlocalqm/grid.hpp"
#include "nonlocalqm/operator_matrix.hpp"
#include "nonlocalqm/potential.hpp"

namespace nonlocalqm {

/// A mode belongs to the band when |p| < beta (strict).
inline bool in_band(double p, double beta) { return std::abs(p) < beta; }

/// Largest s with s*dp < beta, i.e. the band is k-lattice indices |s| <= K.
inline long band_half_count(const Grid1D& g, const ModelParams& p) {
    const double dp = g.momentum_spacing(p.hbar);
    long k = static_cast<long>(std::floor(p.beta / dp));
    while (k > 0 && !in_band(static_cast<double>(k) * dp, p.beta)) --k;
    return k;
}

inline void require_below_nyquist(const Grid1D& g, const ModelParams& p, std::string_view op) {
    require(p.beta < g.momentum_span(p.hbar), ErrorKind::invalid_argument, op,
            "beta = " + std::to_string(p.beta) + " is not below the grid Nyquist momentum " +
                std::to_string(g.momentum_span(p.hbar)));
}

struct ProjectionReport {
    double input_norm = 0;
    double projected_norm = 0;
    double leakage_norm = 0;
    bool bandlimited_flag = false;
    double tolerance = 0;
};

/// Spectral projector: zeroes every lattice mode with |p| >= beta.
inline WaveFunction project_spectral(const WaveFunction& psi, const ModelParams& p) {
    return apply_wavenumber_multiplier(psi, [&](double k) { return in_band(p.hbar * k, p.beta) ? 1.0 : 0.0; });
}

/// Pi psi together with the norm bookkeeping. `tolerance` is relative to the
/// input norm.
inline std::pair<WaveFunction, ProjectionReport> project(const WaveFunction& psi, const ModelParams& p,
                                                         double tolerance = 1e-10) {
    p.validate("project");
    WaveFunction out = project_spectral(psi, p);
    ProjectionReport r;
    r.input_norm = psi.norm();
    r.projected_norm = out.norm();
    WaveFunction rest = psi;
    rest.amplitudes -= out.amplitudes;
    r.leakage_norm = rest.norm();
    r.tolerance = tolerance;
    r.bandlimited_flag = r.leakage_norm <= tolerance * r.input_norm;
    return {std::move(out), r};
}

enum class SincKernelForm {
    /// Image-summed kernel on the periodic domain; equals the spectral projector.
    periodic,
    /// Literal dx sin(beta (x_i - x_j)/hbar) / (pi (x_i - x_j)).
    truncated,
};

/// Sinc kernel times the quadrature weight dx.
inline OperatorMatrix sinc_kernel_matrix(const Grid1D& g, const ModelParams& p,
                                         SincKernelForm form = SincKernelForm::periodic) {
    constexpr std::string_view op = "sinc_kernel_matrix";
    p.validate(op);
    require_below_nyquist(g, p, op);
    const auto n = static_cast<Eigen::Index>(g.size());
    const double dx = g.spacing();
    Eigen::MatrixXd m(n, n);
    std::string provenance;
    if (form == SincKernelForm::periodic) {
        // Dirichlet kernel sum_{|s|<=K} e^{2 pi i s m / n} / n.
        const long K = band_half_count(g, p);
        std::vector<double> c(static_cast<std::size_t>(n));
        c[0] = static_cast<double>(2 * K + 1) / static_cast<double>(n);
        for (Eigen::Index d = 1; d <= n / 2; ++d) {
            const double t = pi * static_cast<double>(d) / static_cast<double>(n);
            const double v = std::sin(static_cast<double>(2 * K + 1) * t) / (static_cast<double>(n) * std::sin(t));
            c[static_cast<std::size_t>(d)] = v;
            c[static_cast<std::size_t>(n - d)] = v;
        }
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) m(i, j) = c[static_cast<std::size_t>((i - j + n) % n)];
        provenance = "sinc projector, periodic image sum";
    } else {
        const double diag = dx * p.beta / (pi * p.hbar);
        for (Eigen::Index i = 0; i < n; ++i) {
            m(i, i) = diag;
            for (Eigen::Index j = 0; j < i; ++j) {
                const double d = static_cast<double>(i - j) * dx;
                m(i, j) = m(j, i) = dx * std::sin(p.beta * d / p.hbar) / (pi * d);
            }
        }
        provenance = "sinc projector, truncated to the domain";
    }
    OperatorMatrix out = make_operator(g, m.cast<cplx>(), provenance);
    out.hbar = p.hbar;
    out.band_cutoff = p.beta;
    return out;
}

enum class SamplingBoundary {
    /// Finite cardinal series sum_j psi(x_j) sinc(beta x/hbar - pi j).
    open,
    /// The samples are one period of a periodic function; uses the periodic
    /// cardinal kernel, which is exact for band-limited periodic data.
    periodic,
};

/// Samples psi(x_j) at x_j = j * spacing for j = first_index, first_index+1, ...
struct SampleSet {
    long first_index = 0;
    double spacing = 0;
    std::vector<cplx> values;

    double position(std::size_t k) const { return static_cast<double>(first_index + static_cast<long>(k)) * spacing; }

    static SampleSet of(const std::function<cplx(double)>& f, long first, long last, double spacing) {
        SampleSet s{first, spacing, {}};
        for (long j = first; j <= last; ++j) s.values.push_back(f(static_cast<double>(j) * spacing));
        return s;
    }
};

/// Natural sampling step hbar pi / beta.
inline double sampling_step(const ModelParams& p) { return p.hbar * pi / p.beta; }

namespace detail {

inline double sinc(double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; }

// Periodic cardinal function for N samples, u in units of the sample step.
inline double periodic_cardinal(double u, std::size_t n_samples) {
    const auto N = static_cast<double>(n_samples);
    const double s = std::sin(pi * u / N);
    if (std::abs(s) < 1e-14) return 1.0;
    if (n_samples % 2 == 1) return std::sin(pi * u) / (N * s);
    return std::sin(pi * u) * std::cos(pi * u / N) / (N * s);
}

}  // namespace detail

inline WaveFunction sampling_reconstruct(const SampleSet& samples, const Grid1D& g, const ModelParams& p,
                                         SamplingBoundary boundary = SamplingBoundary::open) {
    constexpr std::string_view op = "sampling_reconstruct";
    p.validate(op);
    const double step = sampling_step(p);
    require(std::abs(samples.spacing - step) <= 1e-12 * step, ErrorKind::invalid_argument, op,
            "sample spacing must equal hbar*pi/beta = " + std::to_string(step));
    require(!samples.values.empty(), ErrorKind::invalid_argument, op, "no samples");
    const std::size_t count = samples.values.size();
    const double first = samples.position(0);
    const double last = samples.position(count - 1);

    WaveFunction out = WaveFunction::zeros(g);
    if (boundary == SamplingBoundary::open) {
        require(first <= g.x_min() + step && last >= g.x_max() - step, ErrorKind::invalid_argument, op,
                "sample lattice does not cover the grid domain");
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double t = p.beta * g.position(i) / p.hbar;
            cplx acc = 0.0;
            for (std::size_t k = 0; k < count; ++k) {
                if (samples.values[k] == cplx(0.0)) continue;
                acc += samples.values[k] *
                       detail::sinc(t - pi * static_cast<double>(samples.first_index + static_cast<long>(k)));
            }
            out.amplitudes[static_cast<Eigen::Index>(i)] = acc;
        }
        return out;
    }

    const double period = static_cast<double>(count) * step;
    require(std::abs(period - g.length()) <= 1e-10 * g.length(), ErrorKind::invalid_argument, op,
            "periodic reconstruction needs count * spacing equal to the domain length");
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.position(i);
        cplx acc = 0.0;
        for (std::size_t k = 0; k < count; ++k)
            acc += samples.values[k] * detail::periodic_cardinal((x - samples.position(k)) / step, count);
        out.amplitudes[static_cast<Eigen::Index>(i)] = acc;
    }
    return out;
}

/// ||(1 - Pi)(V psi0)|| / ||V psi0||: how far the potential term pushes a
/// band-limited state out of the band.
inline double projection_leakage(const WaveFunction& psi0, const PotentialSpec& potential, const ModelParams& p,
                                 double band_tolerance = 1e-10) {
    constexpr std::string_view op = "projection_leakage";
    const auto [unused, r0] = project(psi0, p, band_tolerance);
    (void)unused;
    require(r0.bandlimited_flag, ErrorKind::precondition_violation, op,
            "input is not band-limited (relative leakage " + std::to_string(r0.leakage_norm / r0.input_norm) + ")");
    const Eigen::VectorXd v = build_potential(potential, psi0.grid, p);
    WaveFunction vpsi = psi0;
    vpsi.amplitudes = v.cast<cplx>().cwiseProduct(psi0.amplitudes);
    const double total = vpsi.norm();
    require(total > 0.0 && std::isfinite(total), ErrorKind::undefined_ratio, op, "V*psi0 vanishes identically");
    const auto [projected, r] = project(vpsi, p);
    (void)projected;
    return r.leakage_norm / total;
}

struct UncertaintyCheck {
    double delta_x = 0;
    double bound = 0;
    double ratio = 0;
    bool satisfied = false;
    double leakage = 0;
};

/// Delta x against hbar/(4 beta) for a band-limited state.
inline UncertaintyCheck uncertainty_bound_check(const WaveFunction& psi, const ModelParams& p,
                                                double band_tolerance = 1e-10) {
    constexpr std::string_view op = "uncertainty_bound_check";
    const auto [unused, r] = project(psi, p, band_tolerance);
    (void)unused;
    require(r.input_norm > 0, ErrorKind::invalid_state, op, "zero-norm state");
    require(r.bandlimited_flag, ErrorKind::precondition_violation, op,
            "state is not band-limited (relative leakage " + std::to_string(r.leakage_norm / r.input_norm) +
                "); the bound only holds for |p| < beta");
    UncertaintyCheck c;
    c.delta_x = observables(psi, p.hbar).delta_x;
    c.bound = p.hbar / (4.0 * p.beta);
    c.ratio = c.delta_x / c.bound;
    c.satisfied = c.delta_x >= c.bound;
    c.leakage = r.leakage_norm / r.input_norm;
    return c;
}

/// Translation step hbar pi / (2 beta) in grid cells; must be an integer.
inline long deformed_momentum_shift(const Grid1D& g, const ModelParams& p) {
    constexpr std::string_view op = "deformed_momentum_apply";
    const double a = p.hbar * pi / (2.0 * p.beta);
    const double cells = a / g.spacing();
    const double r = std::round(cells);
    require(r >= 1 && std::abs(cells - r) <= 1e-9 * std::max(1.0, cells), ErrorKind::invalid_argument, op,
            "translation step hbar*pi/(2 beta) = " + std::to_string(a) +
                " is not an integer multiple of the grid spacing " + std::to_string(g.spacing()));
    return static_cast<long>(r);
}

/// P psi = (beta / (i pi)) (U(a) - U(-a)) psi with U(a) psi(x) = psi(x + a).
inline WaveFunction deformed_momentum_apply(const WaveFunction& psi, const ModelParams& p) {
    p.validate("deformed_momentum_apply");
    require(psi.representation == Representation::position, ErrorKind::invalid_argument, "deformed_momentum_apply",
            "expects a position-space state");
    const long s = deformed_momentum_shift(psi.grid, p);
    const auto n = static_cast<long>(psi.grid.size());
    const cplx pref = p.beta / (cplx(0.0, 1.0) * pi);
    WaveFunction out = psi;
    for (long i = 0; i < n; ++i) {
        const cplx fwd = psi.amplitudes[(i + s) % n];
        const cplx bwd = psi.amplitudes[((i - s) % n + n) % n];
        out.amplitudes[i] = pref * (fwd - bwd);
    }
    return out;
}

/// Same operator as a momentum multiplier (2 beta / pi) sin(pi p / (2 beta)).
inline WaveFunction deformed_momentum_spectral(const WaveFunction& psi, const ModelParams& p) {
    return apply_wavenumber_multiplier(
        psi, [&](double k) { return 2.0 * p.beta / pi * std::sin(pi * p.hbar * k / (2.0 * p.beta)); });
}

/// Random complex chi on the band (Gaussian components), zero outside,
/// returned normalised in position space.
inline WaveFunction random_bandlimited_state(const Grid1D& g, const ModelParams& p, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    const auto n = g.size();
    WaveFunction chi{g, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n)), Representation::momentum, p.hbar};
    for (std::size_t j = 0; j < n; ++j)
        if (in_band(p.hbar * g.wavenumber(j), p.beta))
            chi.amplitudes[static_cast<Eigen::Index>(j)] = cplx(normal(rng), normal(rng));
    return transform(chi, TransformDirection::momentum_to_position, p.hbar).normalized();
}

/// Random complex amplitudes on every node, normalised.
inline WaveFunction random_state(const Grid1D& g, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    WaveFunction psi = WaveFunction::zeros(g);
    for (Eigen::Index i = 0; i < psi.amplitudes.size(); ++i) psi.amplitudes[i] = cplx(normal(rng), normal(rng));
    return psi.normalized();
}

/// Probability mass of nodes with a <= x < b.
inline double interval_mass(const WaveFunction& psi, double a, double b) {
    double m = 0;
    for (std::size_t i = 0; i < psi.grid.size(); ++i) {
        const double x = psi.grid.position(i);
        if (x >= a && x < b) m += std::norm(psi.amplitudes[static_cast<Eigen::Index>(i)]);
    }
    return m * psi.grid.spacing();
}

}  // namespace nonlocalqm
