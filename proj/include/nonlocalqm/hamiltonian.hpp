#pragma once

// Dense Hamiltonians for every variant: standard, the band-limited
// erste/zweite/hermitisch forms and the Gaussian-smeared nonlocal forms.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nonlocalqm/bandlimit.hpp"
#include "nonlocalqm/error.hpp"
#include "nonlocalqm/grid.hpp"
#include "nonlocalqm/operator_matrix.hpp"
#include "nonlocalqm/potential.hpp"

namespace nonlocalqm {

struct BuildOptions {
    /// erste as P (T + V) P on the band (diagonalizable) instead of P (T + V).
    bool project_erste = false;
    /// hermitisch1/hermitisch2: sandwich the whole operator between projectors.
    bool reproject = false;
    SincKernelForm sinc_form = SincKernelForm::periodic;
};

/// Weight of the nonlocal term in weighted_hybrid.
struct WeightPolicy {
    enum class Mode { fixed, spread_rule };
    Mode mode = Mode::fixed;
    double w1 = 1.0;
    double alpha = 1.0;

    static WeightPolicy fixed(double w1) {
        require(w1 >= 0 && w1 <= 1, ErrorKind::invalid_argument, "WeightPolicy", "w1 must lie in [0, 1]");
        return {Mode::fixed, w1, 1.0};
    }
    static WeightPolicy spread_rule(double alpha) {
        require(alpha >= 0 && std::isfinite(alpha), ErrorKind::invalid_argument, "WeightPolicy",
                "alpha must be finite and non-negative");
        return {Mode::spread_rule, 1.0, alpha};
    }

    /// w1 = min(1, (l_P / spread)^alpha) for the spread rule.
    double resolve(double spread, double l_P) const {
        if (mode == Mode::fixed) return w1;
        require(spread > 0, ErrorKind::invalid_state, "WeightPolicy", "spread must be positive");
        return std::min(1.0, std::pow(l_P / spread, alpha));
    }
    double resolve(const WaveFunction& psi, const ModelParams& p) const {
        return mode == Mode::fixed ? w1 : resolve(observables(psi, p.hbar).spread_l, p.l_P);
    }
};

/// Spectral kinetic energy -hbar^2/(2m) d^2/dx^2 as a dense circulant.
inline Eigen::MatrixXd kinetic_matrix(const Grid1D& g, const ModelParams& p) {
    const auto n = static_cast<Eigen::Index>(g.size());
    Eigen::VectorXcd t(n);
    for (Eigen::Index q = 0; q < n; ++q) {
        const double pk = p.hbar * g.fft_wavenumber(static_cast<std::size_t>(q));
        t[q] = pk * pk / (2.0 * p.mass);
    }
    const Eigen::VectorXcd c = detail::fft_inverse(t);
    std::vector<double> row(static_cast<std::size_t>(n));
    row[0] = c[0].real();
    for (Eigen::Index m = 1; m < n; ++m) row[static_cast<std::size_t>(m)] = 0.5 * (c[m].real() + c[n - m].real());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) k(i, j) = row[static_cast<std::size_t>((i - j + n) % n)];
    return k;
}

/// Discrete Gaussian weights e^{-d^2/w^2} on the lattice, normalised so each
/// row sums to one and cut at |d| > 8 w. Row i holds W(x_i - x_j) for the
/// minimum-image displacement.
inline std::vector<double> gaussian_lattice_weights(const Grid1D& g, double width, long& reach) {
    const double dx = g.spacing();
    reach = static_cast<long>(std::floor(gaussian_truncation * width / dx));
    reach = std::min<long>(reach, static_cast<long>(g.size() / 2) - 1);
    std::vector<double> w(static_cast<std::size_t>(2 * reach + 1));
    double sum = 0;
    for (long m = -reach; m <= reach; ++m) {
        const double d = static_cast<double>(m) * dx;
        sum += (w[static_cast<std::size_t>(m + reach)] = std::exp(-(d * d) / (width * width)));
    }
    for (double& v : w) v /= sum;
    return w;
}

namespace detail {

inline void require_gaussian_domain(const Grid1D& g, const ModelParams& p, std::string_view op) {
    require(g.length() >= 2.0 * gaussian_truncation * p.l_P, ErrorKind::invalid_argument, op,
            "domain length must be at least 16 l_P for the Gaussian kernel");
}

// V at the minimum-image midpoint of nodes i and j.
inline double midpoint_value(const PotentialSpec& spec, const Grid1D& g, const ModelParams& p, Eigen::Index i,
                             Eigen::Index j) {
    const double xi = g.position(static_cast<std::size_t>(i));
    const double d = g.minimum_image(g.position(static_cast<std::size_t>(j)) - xi);
    return spec.regularized_value(xi + 0.5 * d, p);
}

// sum_j W(x_i - x_j) V((x_i + x_j)/2) psi_j as a matrix.
inline Eigen::MatrixXd gaussian_midpoint_term(const PotentialSpec& spec, const Grid1D& g, const ModelParams& p) {
    const auto n = static_cast<long>(g.size());
    long reach = 0;
    const std::vector<double> w = gaussian_lattice_weights(g, p.l_P, reach);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (long i = 0; i < n; ++i)
        for (long s = -reach; s <= reach; ++s) {
            const long j = ((i + s) % n + n) % n;
            m(i, j) += w[static_cast<std::size_t>(s + reach)] * midpoint_value(spec, g, p, i, j);
        }
    return 0.5 * (m + m.transpose());
}

}  // namespace detail

/// Builds the Hamiltonian of the requested variant.
inline OperatorMatrix build_hamiltonian(const HamiltonianVariant& variant, const PotentialSpec& spec,
                                        const Grid1D& g, const ModelParams& p, const BuildOptions& opt = {}) {
    constexpr std::string_view op = "build_hamiltonian";
    p.validate(op);
    spec.validate(p);
    if (variant.tag == VariantTag::weighted_hybrid)
        require(variant.w1 >= 0 && variant.w1 <= 1, ErrorKind::invalid_argument, op, "w1 must lie in [0, 1]");
    if (variant.uses_sinc_kernel()) require_below_nyquist(g, p, op);
    if (variant.uses_gaussian_kernel()) detail::require_gaussian_domain(g, p, op);

    const auto n = static_cast<Eigen::Index>(g.size());
    const Eigen::MatrixXd t = kinetic_matrix(g, p);
    const Eigen::VectorXd v = build_potential(spec, g, p);
    Eigen::MatrixXcd h;
    std::string provenance;
    bool band_restricted = false;
    std::vector<std::string> warnings;

    auto sinc = [&] { return sinc_kernel_matrix(g, p, opt.sinc_form).entries.real().eval(); };

    switch (variant.tag) {
        case VariantTag::standard: {
            Eigen::MatrixXd m = t;
            m.diagonal() += v;
            h = m.cast<cplx>();
            provenance = "standard: -hbar^2/2m d^2/dx^2 + V(x)";
            break;
        }
        case VariantTag::erste: {
            const Eigen::MatrixXd pk = sinc();
            Eigen::MatrixXd tv = t;
            tv.diagonal() += v;
            if (opt.project_erste) {
                h = (pk * tv * pk).cast<cplx>();
                band_restricted = true;
                provenance = "erste, P (T + V) P on the band";
            } else {
                h = (pk * tv).cast<cplx>();
                provenance = "erste, P (T + V)";
            }
            break;
        }
        case VariantTag::zweite: {
            const Eigen::MatrixXd pk = sinc();
            h = (t + pk * v.asDiagonal()).cast<cplx>();
            provenance = "zweite, T + P V";
            break;
        }
        case VariantTag::hermitisch1:
        case VariantTag::hermitisch2: {
            const Eigen::MatrixXd pk = sinc();
            Eigen::MatrixXd pot(n, n);
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j)
                    pot(i, j) = variant.tag == VariantTag::hermitisch1
                                    ? pk(i, j) * 0.5 * (v[i] + v[j])
                                    : pk(i, j) * detail::midpoint_value(spec, g, p, i, j);
            pot = (0.5 * (pot + pot.transpose())).eval();
            Eigen::MatrixXd m = t + pot;
            if (opt.reproject) {
                m = pk * m * pk;
                band_restricted = true;
            }
            h = m.cast<cplx>();
            provenance = variant.tag == VariantTag::hermitisch1 ? "hermitisch1, K(x,y) (V(x)+V(y))/2"
                                                                 : "hermitisch2, K(x,y) V((x+y)/2)";
            if (opt.reproject) provenance += ", reprojected";
            break;
        }
        case VariantTag::gaussian_midpoint: {
            h = (t + detail::gaussian_midpoint_term(spec, g, p)).cast<cplx>();
            provenance = "Grundgleichung, f(|x-y|) V((x+y)/2)";
            break;
        }
        case VariantTag::gaussian_simple: {
            Eigen::MatrixXd m = t;
            m.diagonal() += smeared_potential(spec, g, p.l_P, p);
            h = m.cast<cplx>();
            provenance = "einfache Version, (f * V)(x)";
            break;
        }
        case VariantTag::weighted_hybrid: {
            Eigen::MatrixXd m = t;
            if (variant.w1 > 0) m += variant.w1 * detail::gaussian_midpoint_term(spec, g, p);
            if (variant.w2() > 0) m.diagonal() += variant.w2() * smeared_potential(spec, g, 0.5 * p.l_P, p);
            h = m.cast<cplx>();
            provenance = "weighted hybrid, w1 f(|x-y|) V((x+y)/2) + w2 int f(xi) V(x - xi/2)";
            break;
        }
    }
    if (variant.uses_gaussian_kernel() && p.l_P < 2.0 * g.spacing())
        warnings.push_back("l_P is below two grid spacings; the Gaussian kernel is under-resolved");

    OperatorMatrix out = make_operator(g, std::move(h), provenance, variant);
    out.band_restricted = band_restricted;
    out.band_cutoff = variant.uses_sinc_kernel() ? p.beta : 0.0;
    out.hbar = p.hbar;
    out.warnings = std::move(warnings);
    return out;
}

inline OperatorMatrix build_hamiltonian(VariantTag tag, const PotentialSpec& spec, const Grid1D& g,
                                        const ModelParams& p, const BuildOptions& opt = {}) {
    return build_hamiltonian(HamiltonianVariant::of(tag), spec, g, p, opt);
}

}  // namespace nonlocalqm
