#pragma once

// Declarative 1D potentials and their Gaussian-smeared versions.

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <Eigen/Dense>

#include "nonlocalqm/error.hpp"
#include "nonlocalqm/grid.hpp"

namespace nonlocalqm {

namespace potentials {

struct Free {};
/// 0 inside |x| < half_width, `wall` outside.
struct SquareWell {
    double half_width;
    double wall;
};
/// Square well whose wall is pinned to beta^2 / 2m.
struct CutoffWell {
    double half_width;
};
struct Harmonic {
    double omega;
};
/// m w^2 x^2 / 2 inside |x| < beta / (m w), plateau beta^2 / 2m outside.
struct CutoffHarmonic {
    double omega;
};
/// Values on the cell centres of [x_min, x_max); periodic linear interpolation
/// in between.
struct Tabulated {
    double x_min;
    double x_max;
    std::vector<double> values;
};

}  // namespace potentials

class PotentialSpec {
public:
    using Kind = std::variant<potentials::Free, potentials::SquareWell, potentials::CutoffWell,
                              potentials::Harmonic, potentials::CutoffHarmonic, potentials::Tabulated>;

    PotentialSpec() = default;
    explicit PotentialSpec(Kind k) : kind_(std::move(k)) {}

    static PotentialSpec free() { return PotentialSpec(potentials::Free{}); }
    static PotentialSpec square_well(double l, double v0) { return PotentialSpec(potentials::SquareWell{l, v0}); }
    static PotentialSpec cutoff_well(double l) { return PotentialSpec(potentials::CutoffWell{l}); }
    static PotentialSpec harmonic(double omega) { return PotentialSpec(potentials::Harmonic{omega}); }
    static PotentialSpec cutoff_harmonic(double omega) { return PotentialSpec(potentials::CutoffHarmonic{omega}); }
    static PotentialSpec tabulated(const Grid1D& g, std::vector<double> values) {
        return PotentialSpec(potentials::Tabulated{g.x_min(), g.x_max(), std::move(values)});
    }
    static PotentialSpec tabulated(const Grid1D& g, const std::function<double(double)>& f) {
        std::vector<double> v(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.position(i));
        return tabulated(g, std::move(v));
    }

    const Kind& kind() const { return kind_; }

    std::string name() const {
        return std::visit(
            [](const auto& k) -> std::string {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, potentials::Free>) return "free";
                else if constexpr (std::is_same_v<T, potentials::SquareWell>) return "square_well";
                else if constexpr (std::is_same_v<T, potentials::CutoffWell>) return "cutoff_well";
                else if constexpr (std::is_same_v<T, potentials::Harmonic>) return "harmonic";
                else if constexpr (std::is_same_v<T, potentials::CutoffHarmonic>) return "cutoff_harmonic";
                else return "tabulated";
            },
            kind_);
    }

    void validate(const ModelParams& p) const {
        constexpr std::string_view op = "PotentialSpec";
        std::visit(
            [&](const auto& k) {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, potentials::SquareWell>) {
                    require(k.half_width > 0 && k.wall >= 0, ErrorKind::invalid_argument, op,
                            "square_well needs l > 0 and V0 >= 0");
                } else if constexpr (std::is_same_v<T, potentials::CutoffWell>) {
                    require(k.half_width > 0, ErrorKind::invalid_argument, op, "cutoff_well needs l > 0");
                } else if constexpr (std::is_same_v<T, potentials::Harmonic> ||
                                     std::is_same_v<T, potentials::CutoffHarmonic>) {
                    require(k.omega > 0, ErrorKind::invalid_argument, op, "oscillator needs omega > 0");
                } else if constexpr (std::is_same_v<T, potentials::Tabulated>) {
                    require(!k.values.empty() && k.x_max > k.x_min, ErrorKind::invalid_argument, op,
                            "tabulated potential needs values on a non-degenerate domain");
                }
            },
            kind_);
        p.validate(op);
    }

    /// Wall height beta^2 / 2m used by the cutoff variants.
    static double plateau(const ModelParams& p) { return p.beta * p.beta / (2.0 * p.mass); }

    /// V(x). Points exactly on a wall belong to the wall.
    double value(double x, const ModelParams& p) const {
        return std::visit(
            [&](const auto& k) -> double {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, potentials::Free>) {
                    return 0.0;
                } else if constexpr (std::is_same_v<T, potentials::SquareWell>) {
                    return std::abs(x) >= k.half_width ? k.wall : 0.0;
                } else if constexpr (std::is_same_v<T, potentials::CutoffWell>) {
                    return std::abs(x) >= k.half_width ? plateau(p) : 0.0;
                } else if constexpr (std::is_same_v<T, potentials::Harmonic>) {
                    return 0.5 * p.mass * k.omega * k.omega * x * x;
                } else if constexpr (std::is_same_v<T, potentials::CutoffHarmonic>) {
                    const double seam = p.beta / (p.mass * k.omega);
                    return std::abs(x) >= seam ? plateau(p) : 0.5 * p.mass * k.omega * k.omega * x * x;
                } else {
                    return tabulated_value(k, x);
                }
            },
            kind_);
    }

    /// V(x) with jumps replaced by the mean of the one-sided limits, which keeps
    /// midpoint sums second-order accurate across a wall.
    double regularized_value(double x, const ModelParams& p) const {
        const double jump = jump_location(p);
        if (jump > 0) {
            const double tol = 1e-12 * std::max(1.0, jump);
            if (std::abs(std::abs(x) - jump) <= tol) return 0.5 * (value(0.0, p) + wall_value(p));
        }
        return value(x, p);
    }

    /// Positions of jumps and kinks, used to split quadrature panels.
    std::vector<double> breakpoints(const ModelParams& p) const {
        return std::visit(
            [&](const auto& k) -> std::vector<double> {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, potentials::SquareWell> || std::is_same_v<T, potentials::CutoffWell>)
                    return {-k.half_width, k.half_width};
                else if constexpr (std::is_same_v<T, potentials::CutoffHarmonic>) {
                    const double s = p.beta / (p.mass * k.omega);
                    return {-s, s};
                } else
                    return {};
            },
            kind_);
    }

    bool has_jump() const {
        return std::holds_alternative<potentials::SquareWell>(kind_) ||
               std::holds_alternative<potentials::CutoffWell>(kind_);
    }
    /// True when V is twice differentiable everywhere (Taylor-based formulas apply).
    bool smooth() const {
        return std::holds_alternative<potentials::Free>(kind_) || std::holds_alternative<potentials::Harmonic>(kind_);
    }
    bool is_tabulated() const { return std::holds_alternative<potentials::Tabulated>(kind_); }
    const potentials::Tabulated* as_tabulated() const { return std::get_if<potentials::Tabulated>(&kind_); }

private:
    double jump_location(const ModelParams&) const {
        if (auto* w = std::get_if<potentials::SquareWell>(&kind_)) return w->half_width;
        if (auto* w = std::get_if<potentials::CutoffWell>(&kind_)) return w->half_width;
        return -1.0;
    }
    double wall_value(const ModelParams& p) const {
        if (auto* w = std::get_if<potentials::SquareWell>(&kind_)) return w->wall;
        return plateau(p);
    }

    static double tabulated_value(const potentials::Tabulated& t, double x) {
        const auto n = static_cast<long>(t.values.size());
        const double L = t.x_max - t.x_min;
        const double h = L / static_cast<double>(n);
        double u = (x - t.x_min) / h - 0.5;
        u -= static_cast<double>(n) * std::floor(u / static_cast<double>(n));
        const long i0 = static_cast<long>(std::floor(u)) % n;
        const long i1 = (i0 + 1) % n;
        const double f = u - std::floor(u);
        return (1.0 - f) * t.values[static_cast<std::size_t>(i0)] + f * t.values[static_cast<std::size_t>(i1)];
    }

    Kind kind_ = potentials::Free{};
};

/// V on the grid nodes.
inline Eigen::VectorXd build_potential(const PotentialSpec& spec, const Grid1D& g, const ModelParams& p) {
    constexpr std::string_view op = "build_potential";
    spec.validate(p);
    if (const auto* t = spec.as_tabulated()) {
        require(t->values.size() == g.size(), ErrorKind::invalid_argument, op,
                "tabulated potential has " + std::to_string(t->values.size()) + " values for a grid of " +
                    std::to_string(g.size()));
        require(t->x_min == g.x_min() && t->x_max == g.x_max(), ErrorKind::invalid_argument, op,
                "tabulated potential domain differs from the grid domain");
        return Eigen::Map<const Eigen::VectorXd>(t->values.data(), static_cast<Eigen::Index>(t->values.size()));
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) v[static_cast<Eigen::Index>(i)] = spec.value(g.position(i), p);
    return v;
}

/// Normalised 1D Gaussian (pi w^2)^{-1/2} exp(-xi^2 / w^2).
inline double gaussian_kernel(double xi, double width) {
    return std::exp(-(xi * xi) / (width * width)) / (std::sqrt(pi) * width);
}

/// Gaussian kernels are cut off beyond this many widths (relative tail < 1e-27).
inline constexpr double gaussian_truncation = 8.0;

/// (f_w * V)(x) = \int dxi f_w(xi) V(x - xi) by composite Gauss-Legendre
/// quadrature split at the potential's jumps and kinks.
inline double smeared_value(const PotentialSpec& spec, double x, double width, const ModelParams& p) {
    if (width <= 0) return spec.value(x, p);
    const double reach = gaussian_truncation * width;
    std::vector<double> cuts{-reach, reach};
    for (double b : spec.breakpoints(p)) {
        const double xi = x - b;
        if (xi > -reach && xi < reach) cuts.push_back(xi);
    }
    std::sort(cuts.begin(), cuts.end());
    auto integrand = [&](double xi) { return gaussian_kernel(xi, width) * spec.value(x - xi, p); };
    double total = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double a = cuts[s];
        const double b = cuts[s + 1];
        if (b - a <= 0) continue;
        const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / (0.5 * width))));
        const double h = (b - a) / panels;
        for (int k = 0; k < panels; ++k)
            total += boost::math::quadrature::gauss<double, 20>::integrate(integrand, a + k * h, a + (k + 1) * h);
    }
    return total;
}

/// Smeared potential on the grid nodes. Tabulated data are convolved with the
/// normalised discrete kernel on their own lattice.
inline Eigen::VectorXd smeared_potential(const PotentialSpec& spec, const Grid1D& g, double width,
                                         const ModelParams& p) {
    const auto n = static_cast<Eigen::Index>(g.size());
    Eigen::VectorXd out(n);
    if (spec.is_tabulated()) {
        const Eigen::VectorXd v = build_potential(spec, g, p);
        if (width <= 0) return v;
        const double dx = g.spacing();
        const long reach = static_cast<long>(std::floor(gaussian_truncation * width / dx));
        std::vector<double> w(static_cast<std::size_t>(2 * reach + 1));
        double sum = 0;
        for (long m = -reach; m <= reach; ++m) sum += (w[static_cast<std::size_t>(m + reach)] = gaussian_kernel(m * dx, width));
        for (Eigen::Index i = 0; i < n; ++i) {
            double acc = 0;
            for (long m = -reach; m <= reach; ++m) {
                long j = (static_cast<long>(i) - m) % static_cast<long>(n);
                if (j < 0) j += n;
                acc += w[static_cast<std::size_t>(m + reach)] * v[j];
            }
            out[i] = acc / sum;
        }
        return out;
    }
    for (Eigen::Index i = 0; i < n; ++i) out[i] = smeared_value(spec, g.position(static_cast<std::size_t>(i)), width, p);
    return out;
}

/// Fourth-order central differences of V.
inline double potential_first_derivative(const PotentialSpec& spec, double x, double h, const ModelParams& p) {
    return (spec.value(x - 2 * h, p) - 8 * spec.value(x - h, p) + 8 * spec.value(x + h, p) -
            spec.value(x + 2 * h, p)) /
           (12 * h);
}

inline double potential_second_derivative(const PotentialSpec& spec, double x, double h, const ModelParams& p) {
    return (-spec.value(x - 2 * h, p) + 16 * spec.value(x - h, p) - 30 * spec.value(x, p) +
            16 * spec.value(x + h, p) - spec.value(x + 2 * h, p)) /
           (12 * h * h);
}

}  // namespace nonlocalqm
