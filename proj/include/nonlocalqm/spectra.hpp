#pragma once

// Eigenanalysis of Hamiltonian variants, first-order energy shifts of the
// Gaussian variants, and convergence studies.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "nonlocalqm/bandlimit.hpp"
#include "nonlocalqm/eigensolver.hpp"
#include "nonlocalqm/error.hpp"
#include "nonlocalqm/grid.hpp"
#include "nonlocalqm/hamiltonian.hpp"
#include "nonlocalqm/operator_matrix.hpp"
#include "nonlocalqm/potential.hpp"

namespace nonlocalqm {

struct SpectrumResult {
    std::string variant;
    Eigen::VectorXd eigenvalues;  // ascending (real parts for non-Hermitian input)
    std::optional<Eigen::VectorXcd> complex_eigenvalues;
    std::vector<WaveFunction> eigenvectors;  // unit norm with the dx measure
    std::vector<double> residuals;           // ||H psi - E psi|| for unit vectors
    double operator_norm = 0;                // max-entry norm of H
    std::vector<std::string> warnings;

    std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
};

struct DiagonalizeOptions {
    bool non_hermitian_allowed = false;
    double hermiticity_tolerance = 1e-10;
};

namespace detail {

// Orthonormal plane waves e^{i k_s x} / sqrt(n) for the band modes.
inline Eigen::MatrixXcd band_basis(const Grid1D& g, double beta, double hbar) {
    std::vector<std::size_t> modes;
    for (std::size_t j = 0; j < g.size(); ++j)
        if (in_band(hbar * g.wavenumber(j), beta)) modes.push_back(j);
    const auto n = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXcd u(n, static_cast<Eigen::Index>(modes.size()));
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        const double k = g.wavenumber(modes[static_cast<std::size_t>(c)]);
        for (Eigen::Index i = 0; i < n; ++i) u(i, c) = std::polar(norm, k * g.position(static_cast<std::size_t>(i)));
    }
    return u;
}

// Rotates a unit vector so its largest component is real and positive.
inline Eigen::VectorXcd fix_phase(Eigen::VectorXcd v) {
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (std::abs(v[imax]) > 0) v *= std::conj(v[imax]) / std::abs(v[imax]);
    return v;
}

}  // namespace detail

/// Lowest `n_levels` eigenpairs of `op`.
inline SpectrumResult diagonalize(const OperatorMatrix& op, std::size_t n_levels, const DiagonalizeOptions& opt = {}) {
    constexpr std::string_view name = "diagonalize";
    const auto n = op.dimension();
    require(n_levels >= 1 && static_cast<Eigen::Index>(n_levels) <= n, ErrorKind::invalid_argument, name,
            "n_levels must lie in [1, dimension]");
    const double hnorm = op.entries.cwiseAbs().maxCoeff();
    const bool hermitian = op.hermiticity_defect <= opt.hermiticity_tolerance * std::max(1.0, hnorm);
    require(hermitian || opt.non_hermitian_allowed, ErrorKind::precondition_violation, name,
            "operator '" + op.provenance + "' is not Hermitian (defect " + std::to_string(op.hermiticity_defect) +
                "); set non_hermitian_allowed to obtain the complex spectrum");

    SpectrumResult r;
    r.variant = op.variant ? op.variant->name() : op.provenance;
    r.operator_norm = hnorm;
    r.warnings = op.warnings;
    const double sqrt_dx = std::sqrt(op.grid.spacing());

    Eigen::MatrixXcd vectors;
    if (hermitian) {
        if (op.band_restricted) {
            const Eigen::MatrixXcd u = detail::band_basis(op.grid, op.band_cutoff, op.hbar);
            require(static_cast<Eigen::Index>(n_levels) <= u.cols(), ErrorKind::invalid_argument, name,
                    "more levels requested than band modes available");
            const Eigen::MatrixXcd hb = u.adjoint() * op.entries * u;
            const HermitianEigen e = hermitian_eigen_lowest(hb, static_cast<Eigen::Index>(n_levels));
            r.eigenvalues = e.values;
            vectors = u * e.vectors;
        } else {
            const HermitianEigen e = hermitian_eigen_lowest(op.entries, static_cast<Eigen::Index>(n_levels));
            r.eigenvalues = e.values;
            vectors = e.vectors;
        }
    } else {
        Eigen::MatrixXcd h = op.entries;
        if (op.band_restricted) {
            const Eigen::MatrixXcd u = detail::band_basis(op.grid, op.band_cutoff, op.hbar);
            h = u.adjoint() * op.entries * u;
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(h);
            require(ces.info() == Eigen::Success, ErrorKind::invalid_state, name, "complex eigensolver failed");
            vectors = u * ces.eigenvectors();
            r.complex_eigenvalues = ces.eigenvalues();
        } else {
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(h);
            require(ces.info() == Eigen::Success, ErrorKind::invalid_state, name, "complex eigensolver failed");
            vectors = ces.eigenvectors();
            r.complex_eigenvalues = ces.eigenvalues();
        }
        std::vector<Eigen::Index> order(static_cast<std::size_t>(r.complex_eigenvalues->size()));
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
        const Eigen::VectorXcd ev = *r.complex_eigenvalues;
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            return ev[a].real() < ev[b].real() || (ev[a].real() == ev[b].real() && ev[a].imag() < ev[b].imag());
        });
        order.resize(n_levels);
        Eigen::VectorXcd sorted(static_cast<Eigen::Index>(n_levels));
        Eigen::MatrixXcd sorted_vectors(n, static_cast<Eigen::Index>(n_levels));
        for (std::size_t i = 0; i < n_levels; ++i) {
            sorted[static_cast<Eigen::Index>(i)] = ev[order[i]];
            sorted_vectors.col(static_cast<Eigen::Index>(i)) = vectors.col(order[i]).normalized();
        }
        r.complex_eigenvalues = sorted;
        r.eigenvalues = sorted.real();
        vectors = sorted_vectors;
    }

    for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(n_levels); ++c) {
        const Eigen::VectorXcd v = detail::fix_phase(vectors.col(c));
        const cplx e = r.complex_eigenvalues ? (*r.complex_eigenvalues)[c] : cplx(r.eigenvalues[c]);
        r.residuals.push_back((op.entries * v - e * v).norm());
        r.eigenvectors.push_back(WaveFunction{op.grid, v / sqrt_dx, Representation::position, 1.0});
    }
    return r;
}

/// Max |<psi_i|psi_j> - delta_ij| over the returned eigenvectors.
inline double orthonormality_defect(const SpectrumResult& s) {
    double worst = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            worst = std::max(worst, std::abs(s.eigenvectors[i].inner(s.eigenvectors[j]) - (i == j ? 1.0 : 0.0)));
    return worst;
}

/// Hard-wall reference on [-half_width, half_width]: spectral kinetic energy in
/// the DST-II sine basis on n cell-centred nodes plus V inside the box.
inline SpectrumResult dirichlet_reference(const PotentialSpec& spec, double half_width, std::size_t n,
                                          const ModelParams& p, std::size_t n_levels) {
    constexpr std::string_view op = "dirichlet_reference";
    require(half_width > 0, ErrorKind::invalid_argument, op, "half_width must be positive");
    const Grid1D g = Grid1D::make(n, -half_width, half_width);
    const auto m = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd s(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index k = 0; k < m; ++k) {
            const double scale = std::sqrt(2.0 / static_cast<double>(m)) * (k == m - 1 ? 1.0 / std::sqrt(2.0) : 1.0);
            s(i, k) = scale * std::sin(pi * static_cast<double>(k + 1) * (static_cast<double>(i) + 0.5) /
                                       static_cast<double>(m));
        }
    Eigen::VectorXd e(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const double kk = pi * static_cast<double>(k + 1) / (2.0 * half_width);
        e[k] = p.hbar * p.hbar * kk * kk / (2.0 * p.mass);
    }
    Eigen::MatrixXd h = s * e.asDiagonal() * s.transpose();
    h = 0.5 * (h + h.transpose()).eval();
    for (Eigen::Index i = 0; i < m; ++i) h(i, i) += spec.value(g.position(static_cast<std::size_t>(i)), p);
    OperatorMatrix om = make_operator(g, h.cast<cplx>(), "Dirichlet sine-basis reference");
    SpectrumResult r = diagonalize(om, n_levels);
    r.variant = "dirichlet_reference";
    return r;
}

struct ShiftResult {
    std::vector<double> shifts;
    std::string method;  // "taylor" or "integral"
    std::vector<std::string> warnings;
};

/// Potential part of a Gaussian variant as a matrix.
inline Eigen::MatrixXd smeared_potential_operator(VariantTag tag, const PotentialSpec& spec, const Grid1D& g,
                                                  const ModelParams& p) {
    if (tag == VariantTag::gaussian_midpoint) return detail::gaussian_midpoint_term(spec, g, p);
    require(tag == VariantTag::gaussian_simple, ErrorKind::invalid_argument, "smeared_potential_operator",
            "only gaussian_midpoint and gaussian_simple have first-order shift formulas");
    return smeared_potential(spec, g, p.l_P, p).asDiagonal();
}

/// First-order shifts of the Gaussian variants from standard eigenstates.
/// midpoint: (l_P^2/4) [ int |psi|^2 V''/4 - int V |psi'|^2 ];
/// simple:   (l_P^2/4) int |psi|^2 V''.
/// Potentials that are not twice differentiable use <psi|(V_smeared - V)|psi>.
inline ShiftResult perturbative_shifts(const SpectrumResult& standard, const PotentialSpec& spec, const ModelParams& p,
                                       VariantTag tag) {
    constexpr std::string_view op = "perturbative_shifts";
    require(tag == VariantTag::gaussian_midpoint || tag == VariantTag::gaussian_simple, ErrorKind::invalid_argument,
            op, "variant must be gaussian_midpoint or gaussian_simple");
    require(standard.size() > 0, ErrorKind::invalid_argument, op, "empty spectrum");
    ShiftResult r;
    const Grid1D& g = standard.eigenvectors.front().grid;
    const double pref = p.l_P * p.l_P / 4.0;

    if (!spec.smooth() && !spec.is_tabulated()) {
        r.method = "integral";
        r.warnings.push_back("potential '" + spec.name() +
                             "' is not twice differentiable; Taylor formula invalid at the seam, using the "
                             "non-expanded smeared-potential integral");
        const Eigen::MatrixXd m = smeared_potential_operator(tag, spec, g, p);
        const Eigen::VectorXd v = build_potential(spec, g, p);
        for (const WaveFunction& psi : standard.eigenvectors) {
            Eigen::VectorXcd d = m.cast<cplx>() * psi.amplitudes - v.cast<cplx>().cwiseProduct(psi.amplitudes);
            r.shifts.push_back((psi.amplitudes.dot(d) * g.spacing()).real() / psi.norm_squared());
        }
        return r;
    }

    r.method = "taylor";
    const double h = g.spacing();
    Eigen::VectorXd v(static_cast<Eigen::Index>(g.size()));
    Eigen::VectorXd v2(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = spec.value(g.position(i), p);
        v2[static_cast<Eigen::Index>(i)] = potential_second_derivative(spec, g.position(i), h, p);
    }
    for (const WaveFunction& psi : standard.eigenvectors) {
        const Eigen::VectorXd rho = psi.amplitudes.cwiseAbs2();
        const double n2 = rho.sum() * h;
        const double curv = rho.dot(v2) * h / n2;
        if (tag == VariantTag::gaussian_simple) {
            r.shifts.push_back(pref * curv);
        } else {
            const WaveFunction d = spectral_derivative(psi);
            const double grad = d.amplitudes.cwiseAbs2().dot(v) * h / n2;
            r.shifts.push_back(pref * (curv / 4.0 - grad));
        }
    }
    return r;
}

struct ConvergenceResult {
    std::vector<double> l_values;
    std::vector<double> shifts;  // E_mod - E_std for the chosen level
    bool fitted = false;
    double slope = 0;
    double intercept = 0;
    double fit_residual = 0;  // rms of log-log residuals
    std::string message;
};

/// Least-squares line through (log x, log y).
inline void loglog_fit(const std::vector<double>& x, const std::vector<double>& y, double& slope, double& intercept,
                       double& rms) {
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = std::log(x[i]);
        const double b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    intercept = (sy - slope * sx) / n;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = std::log(y[i]) - (intercept + slope * std::log(x[i]));
        ss += e * e;
    }
    rms = std::sqrt(ss / n);
}

/// Ground-state (or `level`) shift against l_P and its log-log slope. l_P = 0
/// means the delta kernel, i.e. the standard operator.
inline ConvergenceResult convergence_study(const HamiltonianVariant& variant, const PotentialSpec& spec,
                                           const Grid1D& g, const ModelParams& p, const std::vector<double>& l_values,
                                           std::size_t level = 0) {
    constexpr std::string_view op = "convergence_study";
    require(!l_values.empty(), ErrorKind::invalid_argument, op, "empty l_P list");
    const std::size_t levels = level + 1;
    const double e_std =
        diagonalize(build_hamiltonian(VariantTag::standard, spec, g, p), levels).eigenvalues[static_cast<Eigen::Index>(level)];
    ConvergenceResult r;
    std::vector<double> xs, ys;
    for (double l : l_values) {
        require(l >= 0 && std::isfinite(l), ErrorKind::invalid_argument, op, "l_P values must be finite and >= 0");
        double shift = 0.0;
        if (l > 0) {
            ModelParams q = p;
            q.l_P = l;
            const double e = diagonalize(build_hamiltonian(variant, spec, g, q), levels)
                                 .eigenvalues[static_cast<Eigen::Index>(level)];
            shift = e - e_std;
            xs.push_back(l);
            ys.push_back(std::abs(shift));
        }
        r.l_values.push_back(l);
        r.shifts.push_back(shift);
    }
    if (xs.size() < 2) {
        r.message = "fewer than two positive l_P values";
        return r;
    }
    std::vector<std::size_t> idx(xs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (!(ys[idx[i]] > ys[idx[i - 1]]) || ys[idx[i - 1]] == 0.0) {
            r.message = "shift is not monotone in l_P; no fit reported";
            return r;
        }
    loglog_fit(xs, ys, r.slope, r.intercept, r.fit_residual);
    r.fitted = true;
    return r;
}

struct GridStability {
    std::vector<std::size_t> sizes;             // n, 2n, 4n
    std::vector<Eigen::VectorXd> levels;        // per size
    Eigen::VectorXd direct_change;              // |E(2n) - E(n)| / |E(2n)|
    Eigen::VectorXd extrapolated;               // Richardson value from (2n, 4n)
    Eigen::VectorXd extrapolated_change;        // |R(2n,4n) - R(n,2n)| / |R(2n,4n)|
};

/// Low-lying levels at n, 2n and 4n points on the same domain, with
/// second-order Richardson extrapolation.
inline GridStability grid_stability(const HamiltonianVariant& variant, const PotentialSpec& spec, std::size_t n,
                                    double x_min, double x_max, const ModelParams& p, std::size_t n_levels,
                                    const BuildOptions& opt = {}) {
    GridStability s;
    for (std::size_t m : {n, 2 * n, 4 * n}) {
        const Grid1D g = Grid1D::make(m, x_min, x_max);
        s.sizes.push_back(m);
        s.levels.push_back(diagonalize(build_hamiltonian(variant, spec, g, p, opt), n_levels).eigenvalues);
    }
    const Eigen::ArrayXd e1 = s.levels[0].array(), e2 = s.levels[1].array(), e4 = s.levels[2].array();
    s.direct_change = ((e2 - e1).abs() / e2.abs()).matrix();
    const Eigen::ArrayXd r1 = (4.0 * e2 - e1) / 3.0;
    const Eigen::ArrayXd r2 = (4.0 * e4 - e2) / 3.0;
    s.extrapolated = r2.matrix();
    s.extrapolated_change = ((r2 - r1).abs() / r2.abs()).matrix();
    return s;
}

}  // namespace nonlocalqm
