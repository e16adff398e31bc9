#pragma once

// Momentum reparametrisations P = f(p) and the deformed Weyl-Heisenberg
// algebras they induce: [X, P] = i hbar f'(f^{-1}(P)).

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nonlocalqm/error.hpp"
#include "nonlocalqm/grid.hpp"

namespace nonlocalqm {

enum class MapTag { tan, tanh, sin, identity };

inline std::string to_string(MapTag t) {
    switch (t) {
        case MapTag::tan: return "tan";
        case MapTag::tanh: return "tanh";
        case MapTag::sin: return "sin";
        case MapTag::identity: return "identity";
    }
    return "unknown";
}

inline MapTag map_tag_from_string(const std::string& s) {
    for (MapTag t : {MapTag::tan, MapTag::tanh, MapTag::sin, MapTag::identity})
        if (to_string(t) == s) return t;
    fail(ErrorKind::invalid_argument, "map_tag_from_string", "unknown deformation map '" + s + "'");
}

/// tan:  P = (2b/pi) tan(pi p / 2b),   [X,P] = i hbar (1 + pi^2 P^2 / 4b^2)
/// tanh: p = b tanh(P / b),            [X,P] = i hbar / (1 - tanh^2(P/b))
/// sin:  P = (2b/pi) sin(pi p / 2b),   stated [X,P] = i hbar sqrt(1 - pi^2 P^2 / b^2), |P| < b/pi
/// identity: P = p.
struct DeformationMap {
    MapTag tag = MapTag::identity;
    double beta = 1.0;

    double p_limit() const { return tag == MapTag::identity ? std::numeric_limits<double>::infinity() : beta; }
    /// Half-width of the stated P domain.
    double P_limit() const { return tag == MapTag::sin ? beta / pi : std::numeric_limits<double>::infinity(); }

    double forward(double p) const {
        constexpr std::string_view op = "DeformationMap::forward";
        switch (tag) {
            case MapTag::tan:
                require(std::abs(p) < beta, ErrorKind::invalid_argument, op, "tan map needs |p| < beta");
                return 2.0 * beta / pi * std::tan(pi * p / (2.0 * beta));
            case MapTag::tanh:
                require(std::abs(p) < beta, ErrorKind::invalid_argument, op, "tanh map needs |p| < beta");
                return beta * std::atanh(p / beta);
            case MapTag::sin:
                require(std::abs(p) <= beta, ErrorKind::invalid_argument, op, "sin map needs |p| <= beta");
                return 2.0 * beta / pi * std::sin(pi * p / (2.0 * beta));
            case MapTag::identity: return p;
        }
        return p;
    }

    double inverse(double P) const {
        switch (tag) {
            case MapTag::tan: return 2.0 * beta / pi * std::atan(pi * P / (2.0 * beta));
            case MapTag::tanh: return beta * std::tanh(P / beta);
            case MapTag::sin: {
                const double s = pi * P / (2.0 * beta);
                require(std::abs(s) <= 1.0, ErrorKind::invalid_argument, "DeformationMap::inverse",
                        "sin map image is |P| <= 2 beta / pi");
                return 2.0 * beta / pi * std::asin(s);
            }
            case MapTag::identity: return P;
        }
        return P;
    }

    /// f'(p)
    double derivative(double p) const {
        switch (tag) {
            case MapTag::tan: {
                const double c = std::cos(pi * p / (2.0 * beta));
                return 1.0 / (c * c);
            }
            case MapTag::tanh: return 1.0 / (1.0 - (p / beta) * (p / beta));
            case MapTag::sin: return std::cos(pi * p / (2.0 * beta));
            case MapTag::identity: return 1.0;
        }
        return 1.0;
    }

    /// f'(f^{-1}(P)): the coefficient the replacement x -> i hbar f' d/dP produces.
    double stretch(double P) const {
        switch (tag) {
            case MapTag::tan: return 1.0 + pi * pi * P * P / (4.0 * beta * beta);
            case MapTag::tanh: {
                const double c = std::cosh(P / beta);
                return c * c;
            }
            case MapTag::sin: return std::sqrt(std::max(0.0, 1.0 - pi * pi * P * P / (4.0 * beta * beta)));
            case MapTag::identity: return 1.0;
        }
        return 1.0;
    }

    /// C(P) as printed alongside each map.
    double stated_commutator(double P) const {
        switch (tag) {
            case MapTag::tan: return 1.0 + pi * pi * P * P / (4.0 * beta * beta);
            case MapTag::tanh: {
                const double t = std::tanh(P / beta);
                return 1.0 / (1.0 - t * t);
            }
            case MapTag::sin:
                require(std::abs(P) < P_limit(), ErrorKind::invalid_argument, "DeformationMap::stated_commutator",
                        "sin map commutator is only stated for P^2 < beta^2 / pi^2");
                return std::sqrt(1.0 - pi * pi * P * P / (beta * beta));
            case MapTag::identity: return 1.0;
        }
        return 1.0;
    }

    /// Measure weight d f^{-1}(P) / dP of the deformed scalar product.
    double measure_weight(double P) const { return 1.0 / stretch(P); }
};

inline DeformationMap make_map(MapTag tag, const ModelParams& p) {
    p.validate("make_map");
    return DeformationMap{tag, p.beta};
}

/// A state sampled on a uniform P lattice (the lattice nodes are the P values).
struct DeformedState {
    Grid1D lattice;
    Eigen::VectorXcd values;
};

/// C-infinity bump exp(-1 / (1 - u^2)), u = (P - center) / radius.
struct Bump {
    double center = 0;
    double radius = 1;

    double operator()(double P) const {
        const double u = (P - center) / radius;
        return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
    }
    DeformedState sample(const Grid1D& lattice) const {
        require(radius > 0, ErrorKind::invalid_argument, "Bump", "radius must be positive");
        DeformedState s{lattice, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(lattice.size()))};
        for (std::size_t i = 0; i < lattice.size(); ++i) s.values[static_cast<Eigen::Index>(i)] = (*this)(lattice.position(i));
        return s;
    }
};

/// Eighth-order central first derivative; values beyond the lattice are zero.
inline Eigen::VectorXcd fd_derivative8(const Eigen::VectorXcd& v, double h) {
    static constexpr std::array<double, 4> c{4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    const Eigen::Index n = v.size();
    Eigen::VectorXcd d = Eigen::VectorXcd::Zero(n);
    auto at = [&](Eigen::Index i) { return (i < 0 || i >= n) ? cplx(0.0) : v[i]; };
    for (Eigen::Index i = 0; i < n; ++i) {
        cplx acc = 0;
        for (Eigen::Index k = 1; k <= 4; ++k) acc += c[static_cast<std::size_t>(k - 1)] * (at(i + k) - at(i - k));
        d[i] = acc / h;
    }
    return d;
}

/// X psi = i hbar f'(f^{-1}(P)) dpsi/dP.
inline Eigen::VectorXcd apply_deformed_position(const DeformationMap& map, const DeformedState& s, double hbar) {
    const Eigen::VectorXcd d = fd_derivative8(s.values, s.lattice.spacing());
    Eigen::VectorXcd out(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i)
        out[i] = cplx(0.0, hbar) * map.stretch(s.lattice.position(static_cast<std::size_t>(i))) * d[i];
    return out;
}

struct CommutatorReport {
    std::string map;
    /// ||([X,P] - i hbar C_stated(P)) psi|| / (hbar ||psi||)
    double residual_stated = 0;
    /// Same against f'(f^{-1}(P)).
    double residual_derived = 0;
    /// Derived residual on a lattice with half as many nodes.
    double residual_derived_coarse = 0;
    /// log2(coarse / fine): approaches 8 in the asymptotic regime.
    double observed_order = 0;
};

namespace detail {

inline double commutator_defect(const DeformationMap& map, const DeformedState& s, double hbar, bool stated) {
    const auto n = static_cast<Eigen::Index>(s.lattice.size());
    Eigen::VectorXcd pv(n);
    for (Eigen::Index i = 0; i < n; ++i) pv[i] = s.lattice.position(static_cast<std::size_t>(i)) * s.values[i];
    const Eigen::VectorXcd xp = apply_deformed_position(map, DeformedState{s.lattice, pv}, hbar);
    const Eigen::VectorXcd x = apply_deformed_position(map, s, hbar);
    Eigen::VectorXcd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double P = s.lattice.position(static_cast<std::size_t>(i));
        const double c = stated ? map.stated_commutator(P) : map.stretch(P);
        r[i] = xp[i] - P * x[i] - cplx(0.0, hbar) * c * s.values[i];
    }
    return r.norm() / (hbar * s.values.norm());
}

}  // namespace detail

/// Applies ([X, P] - i hbar C(P)) to a bump on the given P lattice, and again
/// on a lattice with half the nodes for the observed order.
inline CommutatorReport commutator_residual(const DeformationMap& map, const Grid1D& lattice, const Bump& bump,
                                            const ModelParams& p) {
    constexpr std::string_view op = "commutator_residual";
    p.validate(op);
    require(lattice.x_min() > -map.P_limit() && lattice.x_max() < map.P_limit(), ErrorKind::invalid_argument, op,
            "P lattice extends beyond the map's stated domain |P| < " + std::to_string(map.P_limit()));
    const double margin = 0.1 * lattice.length();
    require(bump.radius > 0 && bump.center - bump.radius >= lattice.x_min() + margin &&
                bump.center + bump.radius <= lattice.x_max() - margin,
            ErrorKind::precondition_violation, op, "test state has support within 10% of the lattice edge");
    const DeformedState s = bump.sample(lattice);
    require(s.values.cwiseAbs().maxCoeff() > 0, ErrorKind::invalid_argument, op, "bump is not resolved by the lattice");

    CommutatorReport r;
    r.map = to_string(map.tag);
    r.residual_stated = detail::commutator_defect(map, s, p.hbar, true);
    r.residual_derived = detail::commutator_defect(map, s, p.hbar, false);
    const Grid1D coarse = Grid1D::make(std::max<std::size_t>(16, lattice.size() / 2), lattice.x_min(), lattice.x_max());
    r.residual_derived_coarse = detail::commutator_defect(map, bump.sample(coarse), p.hbar, false);
    r.observed_order = std::log2(r.residual_derived_coarse / r.residual_derived);
    return r;
}

/// Deformed scalar product int dP w(P) a*(P) b(P) by the midpoint rule.
inline cplx deformed_inner(const DeformationMap& map, const Grid1D& lattice, const Eigen::VectorXcd& a,
                           const Eigen::VectorXcd& b) {
    cplx acc = 0;
    for (std::size_t i = 0; i < lattice.size(); ++i)
        acc += map.measure_weight(lattice.position(i)) * std::conj(a[static_cast<Eigen::Index>(i)]) *
               b[static_cast<Eigen::Index>(i)];
    return acc * lattice.spacing();
}

struct Dispersion {
    std::vector<double> energy;
    /// f(p) for the same inputs read as undeformed momenta; empty when any
    /// input lies outside |p| < beta.
    std::vector<double> p_picture;
};

/// Kinetic energy T(P) = f^{-1}(P)^2 / 2m:
/// tan (2b^2/pi^2 m) arctan^2(pi P / 2b), tanh (b^2/2m) tanh^2(P/b), sin p^2/2m.
inline Dispersion deformed_dispersion(MapTag tag, const std::vector<double>& values, const ModelParams& p) {
    constexpr std::string_view op = "deformed_dispersion";
    const DeformationMap map = make_map(tag, p);
    Dispersion d;
    bool p_ok = true;
    for (double P : values) {
        require(std::isfinite(P) || (tag != MapTag::sin && std::isinf(P)), ErrorKind::invalid_argument, op,
                "momentum values must be finite");
        require(std::abs(P) < map.P_limit(), ErrorKind::invalid_argument, op,
                "value " + std::to_string(P) + " outside the map's domain |P| < " + std::to_string(map.P_limit()));
        double t = 0;
        const double b = p.beta;
        switch (tag) {
            case MapTag::tan: {
                const double a = std::atan(pi * P / (2.0 * b));
                t = 2.0 * b * b / (pi * pi * p.mass) * a * a;
                break;
            }
            case MapTag::tanh: {
                const double h = std::tanh(P / b);
                t = b * b * h * h / (2.0 * p.mass);
                break;
            }
            case MapTag::sin:
            case MapTag::identity: {
                const double q = map.inverse(P);
                t = q * q / (2.0 * p.mass);
                break;
            }
        }
        d.energy.push_back(t);
        if (!(std::abs(P) < map.p_limit())) p_ok = false;
    }
    if (p_ok)
        for (double v : values) d.p_picture.push_back(map.forward(v));
    return d;
}

}  // namespace nonlocalqm
