#pragma once

// Classical flows: the modified Hamiltonian p^2/2m + V(r) exp(-l_P^2 p^2 / 4 hbar^2),
// the theta(beta - |p|) cutoff dynamics, and orbit diagnostics.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <Eigen/Dense>

#include "nonlocalqm/error.hpp"
#include "nonlocalqm/grid.hpp"

namespace nonlocalqm {

struct ClassicalState {
    Eigen::VectorXd position;
    Eigen::VectorXd momentum;
    double time = 0;

    Eigen::Index dim() const { return position.size(); }
    bool finite() const { return position.allFinite() && momentum.allFinite() && std::isfinite(time); }

    static ClassicalState make(Eigen::VectorXd r, Eigen::VectorXd p, double t = 0) {
        require(r.size() >= 1 && r.size() <= 3 && r.size() == p.size(), ErrorKind::invalid_argument, "ClassicalState",
                "position and momentum must share a dimension between 1 and 3");
        ClassicalState s{std::move(r), std::move(p), t};
        require(s.finite(), ErrorKind::invalid_argument, "ClassicalState", "non-finite components");
        return s;
    }
};

struct ClassicalPotential {
    enum class Kind { kepler, harmonic, custom };
    Kind kind = Kind::kepler;
    double strength = 1.0;  // V = -strength / |r|
    double omega = 1.0;     // V = m omega^2 |r|^2 / 2
    std::function<double(const Eigen::VectorXd&)> value_fn;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient_fn;

    static ClassicalPotential kepler(double strength) {
        require(strength > 0, ErrorKind::invalid_argument, "ClassicalPotential", "Kepler strength must be positive");
        ClassicalPotential v;
        v.kind = Kind::kepler;
        v.strength = strength;
        return v;
    }
    static ClassicalPotential harmonic(double omega) {
        require(omega > 0, ErrorKind::invalid_argument, "ClassicalPotential", "omega must be positive");
        ClassicalPotential v;
        v.kind = Kind::harmonic;
        v.omega = omega;
        return v;
    }
    static ClassicalPotential custom(std::function<double(const Eigen::VectorXd&)> value,
                                     std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient) {
        ClassicalPotential v;
        v.kind = Kind::custom;
        v.value_fn = std::move(value);
        v.gradient_fn = std::move(gradient);
        return v;
    }

    std::string name() const {
        return kind == Kind::kepler ? "kepler" : kind == Kind::harmonic ? "harmonic" : "custom";
    }

    double value(const Eigen::VectorXd& r, double mass) const {
        switch (kind) {
            case Kind::kepler: {
                const double d = r.norm();
                require(d > 0, ErrorKind::singularity, "ClassicalPotential", "Kepler potential is singular at r = 0");
                return -strength / d;
            }
            case Kind::harmonic: return 0.5 * mass * omega * omega * r.squaredNorm();
            case Kind::custom: return value_fn(r);
        }
        return 0;
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& r, double mass) const {
        switch (kind) {
            case Kind::kepler: {
                const double d = r.norm();
                require(d > 0, ErrorKind::singularity, "ClassicalPotential", "Kepler potential is singular at r = 0");
                return strength * r / (d * d * d);
            }
            case Kind::harmonic: return mass * omega * omega * r;
            case Kind::custom: return gradient_fn(r);
        }
        return Eigen::VectorXd::Zero(r.size());
    }
};

/// hbar, mass, l_P >= 0 (0 is the Newtonian limit) and beta for the theta cutoff.
inline void validate_classical(const ModelParams& p, std::string_view op) {
    require(std::isfinite(p.hbar) && p.hbar > 0 && std::isfinite(p.mass) && p.mass > 0 && std::isfinite(p.l_P) &&
                p.l_P >= 0 && std::isfinite(p.beta) && p.beta > 0,
            ErrorKind::invalid_argument, op, "need hbar, mass, beta > 0 and l_P >= 0");
}

/// l_P^2 p^2 / (4 hbar^2)
inline double suppression_exponent(double momentum, const ModelParams& p) {
    const double u = p.l_P * momentum / p.hbar;
    return 0.25 * u * u;
}

/// exp(-exponent), taken as exactly zero beyond exponent 700.
inline double suppression_value(double exponent) { return exponent > 700.0 ? 0.0 : std::exp(-exponent); }

struct Derivatives {
    Eigen::VectorXd rdot;
    Eigen::VectorXd pdot;
};

/// r' = p/m - (l_P^2 V p / 2 hbar^2) e^{-eps},  p' = -grad V e^{-eps}.
inline Derivatives modified_rhs(const ClassicalState& s, const ClassicalPotential& v, const ModelParams& p) {
    constexpr std::string_view op = "modified_rhs";
    require(s.finite(), ErrorKind::invalid_argument, op, "non-finite state");
    const double f = suppression_value(suppression_exponent(s.momentum.norm(), p));
    const double value = v.value(s.position, p.mass);
    Derivatives d;
    d.rdot = s.momentum / p.mass;
    if (f > 0 && p.l_P > 0) d.rdot -= (p.l_P * p.l_P * value / (2.0 * p.hbar * p.hbar)) * f * s.momentum;
    d.pdot = -f * v.gradient(s.position, p.mass);
    return d;
}

/// H = p^2/2m + V(r) e^{-l_P^2 p^2 / 4 hbar^2}
inline double modified_hamiltonian(const ClassicalState& s, const ClassicalPotential& v, const ModelParams& p) {
    return s.momentum.squaredNorm() / (2.0 * p.mass) +
           v.value(s.position, p.mass) * suppression_value(suppression_exponent(s.momentum.norm(), p));
}

enum class ThetaMode { potential_only, full_hamiltonian };

inline std::string to_string(ThetaMode m) {
    return m == ThetaMode::potential_only ? "potential_only" : "full_hamiltonian";
}

/// Dynamics with V -> V theta(beta - |p|) or H -> H theta(beta - |p|).
inline Derivatives theta_cutoff_rhs(const ClassicalState& s, const ClassicalPotential& v, const ModelParams& p,
                                    ThetaMode mode, std::vector<std::string>* warnings = nullptr) {
    constexpr std::string_view op = "theta_cutoff_rhs";
    require(s.finite(), ErrorKind::invalid_argument, op, "non-finite state");
    const double pn = s.momentum.norm();
    if (warnings && std::abs(pn - p.beta) <= 1e-12 * std::max(1.0, p.beta))
        warnings->push_back("|p| is within 1e-12 of beta: the theta step is discontinuous here");
    const bool inside = pn < p.beta;
    Derivatives d;
    if (mode == ThetaMode::full_hamiltonian && !inside) {
        d.rdot = Eigen::VectorXd::Zero(s.dim());
        d.pdot = Eigen::VectorXd::Zero(s.dim());
        return d;
    }
    d.rdot = s.momentum / p.mass;
    d.pdot = inside ? Eigen::VectorXd(-v.gradient(s.position, p.mass)) : Eigen::VectorXd::Zero(s.dim());
    return d;
}

inline Derivatives newtonian_rhs(const ClassicalState& s, const ClassicalPotential& v, const ModelParams& p) {
    return Derivatives{s.momentum / p.mass, -v.gradient(s.position, p.mass)};
}

struct SuppressionReport {
    double momentum = 0;
    double exponent = 0;
    int sign = 1;
    double log10_factor = 0;  // log10 of exp(-exponent)
    double factor = 1;        // 0 once it underflows
};

/// Suppression exp(-l_P^2 p^2 / 4 hbar^2) for p = mass * speed.
inline SuppressionReport suppression_factor(double mass, double speed, const ModelParams& p) {
    constexpr std::string_view op = "suppression_factor";
    require(mass > 0 && speed >= 0 && std::isfinite(mass) && std::isfinite(speed), ErrorKind::invalid_argument, op,
            "mass must be positive and speed non-negative");
    validate_classical(p, op);
    SuppressionReport r;
    r.momentum = mass * speed;
    r.exponent = suppression_exponent(r.momentum, p);
    r.log10_factor = -r.exponent / std::log(10.0);
    r.factor = r.exponent > 700.0 ? 0.0 : std::exp(-r.exponent);
    return r;
}

/// l_eff = l_P / n^alpha (composite-body scaling rule).
inline double effective_planck_length(double l_P, double n_constituents, double alpha) {
    require(l_P >= 0 && n_constituents >= 1 && alpha >= 0, ErrorKind::invalid_argument, "effective_planck_length",
            "need l_P >= 0, n >= 1 and alpha >= 0");
    return l_P / std::pow(n_constituents, alpha);
}

enum class Dynamics { newtonian, modified, theta_potential_only, theta_full_hamiltonian };

inline std::string to_string(Dynamics d) {
    switch (d) {
        case Dynamics::newtonian: return "newtonian";
        case Dynamics::modified: return "modified";
        case Dynamics::theta_potential_only: return "theta_potential_only";
        case Dynamics::theta_full_hamiltonian: return "theta_full_hamiltonian";
    }
    return "unknown";
}

struct OrbitOptions {
    Dynamics dynamics = Dynamics::modified;
    double tol = 1e-10;       // relative and absolute, in scaled units
    std::size_t samples = 2000;
};

struct OrbitResult {
    std::vector<ClassicalState> frames;  // equally spaced in time
    std::vector<double> energy;
    double energy_drift = 0;  // max |H - H_0| / max(|H_0|, tiny)
    std::vector<double> perihelion_times;
    std::vector<double> perihelion_angles;  // unwrapped, radians
    std::vector<double> perihelion_radii;
    std::size_t cutoff_crossings = 0;
    std::vector<std::string> warnings;
};

/// Integration failure carrying the trajectory up to the failure.
class OrbitFailure : public Error {
public:
    OrbitFailure(const std::string& message, OrbitResult partial)
        : Error(ErrorKind::integration_failure, "integrate_orbit", message), partial_(std::move(partial)) {}
    const OrbitResult& partial() const noexcept { return partial_; }

private:
    OrbitResult partial_;
};

inline double orbit_energy(const ClassicalState& s, const ClassicalPotential& v, const ModelParams& p, Dynamics d) {
    switch (d) {
        case Dynamics::modified: return modified_hamiltonian(s, v, p);
        case Dynamics::newtonian: return s.momentum.squaredNorm() / (2.0 * p.mass) + v.value(s.position, p.mass);
        case Dynamics::theta_potential_only:
        case Dynamics::theta_full_hamiltonian: {
            const double kin = s.momentum.squaredNorm() / (2.0 * p.mass);
            if (s.momentum.norm() < p.beta) return kin + v.value(s.position, p.mass);
            return d == Dynamics::theta_potential_only ? kin : 0.0;
        }
    }
    return 0;
}

namespace detail {

// Parabolic vertex through equally spaced (-h, y0), (0, y1), (h, y2).
inline double vertex_offset(double y0, double y1, double y2, double h) {
    const double den = y0 - 2.0 * y1 + y2;
    return den == 0.0 ? 0.0 : 0.5 * h * (y0 - y2) / den;
}

inline double parabola_at(double y0, double y1, double y2, double h, double x) {
    return y1 + (y2 - y0) / (2.0 * h) * x + (y0 - 2.0 * y1 + y2) / (2.0 * h * h) * x * x;
}

inline void extract_perihelia(OrbitResult& r, double h) {
    const std::size_t n = r.frames.size();
    if (n < 3) return;
    std::vector<double> radius(n), angle(n);
    for (std::size_t i = 0; i < n; ++i) {
        radius[i] = r.frames[i].position.norm();
        const auto& x = r.frames[i].position;
        angle[i] = x.size() >= 2 ? std::atan2(x[1], x[0]) : 0.0;
        if (i > 0) {
            while (angle[i] - angle[i - 1] > pi) angle[i] -= 2 * pi;
            while (angle[i] - angle[i - 1] < -pi) angle[i] += 2 * pi;
        }
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(radius[i] < radius[i - 1] && radius[i] <= radius[i + 1])) continue;
        const double d = vertex_offset(radius[i - 1], radius[i], radius[i + 1], h);
        r.perihelion_times.push_back(r.frames[i].time + d);
        r.perihelion_radii.push_back(parabola_at(radius[i - 1], radius[i], radius[i + 1], h, d));
        r.perihelion_angles.push_back(parabola_at(angle[i - 1], angle[i], angle[i + 1], h, d));
    }
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) integration with dense output, sampled at
/// `samples` equal intervals. Theta dynamics stop at each |p| = beta crossing
/// (bisection to 1e-10 in time) and restart on the far side.
inline OrbitResult integrate_orbit(const ClassicalState& s0, const ClassicalPotential& v, const ModelParams& p,
                                   double t_end, const OrbitOptions& opt = {}) {
    namespace ode = boost::numeric::odeint;
    constexpr std::string_view op = "integrate_orbit";
    validate_classical(p, op);
    require(s0.finite() && s0.dim() >= 1 && s0.dim() <= 3 && s0.momentum.size() == s0.dim(),
            ErrorKind::invalid_argument, op, "invalid initial state");
    require(t_end > s0.time, ErrorKind::invalid_argument, op, "t_end must exceed the initial time");
    require(opt.tol > 0 && opt.samples >= 2, ErrorKind::invalid_argument, op, "need tol > 0 and samples >= 2");
    (void)v.value(s0.position, p.mass);

    const Eigen::Index d = s0.dim();
    // Power-of-two scales keep the rescaling exact.
    auto pow2 = [](double x) { return std::exp2(std::round(std::log2(std::max(x, 1e-300)))); };
    const double r_scale = pow2(s0.position.norm());
    double p_norm = s0.momentum.norm();
    if (p_norm == 0) p_norm = std::sqrt(2.0 * p.mass * std::abs(v.value(s0.position, p.mass)));
    const double p_scale = pow2(p_norm);

    using State = std::vector<double>;
    auto unpack = [&](const State& y, double t) {
        ClassicalState s{Eigen::VectorXd(d), Eigen::VectorXd(d), t};
        for (Eigen::Index i = 0; i < d; ++i) {
            s.position[i] = y[static_cast<std::size_t>(i)] * r_scale;
            s.momentum[i] = y[static_cast<std::size_t>(d + i)] * p_scale;
        }
        return s;
    };
    State y0(static_cast<std::size_t>(2 * d));
    for (Eigen::Index i = 0; i < d; ++i) {
        y0[static_cast<std::size_t>(i)] = s0.position[i] / r_scale;
        y0[static_cast<std::size_t>(d + i)] = s0.momentum[i] / p_scale;
    }

    OrbitResult result;
    std::vector<std::string>* warn = &result.warnings;
    auto system = [&](const State& y, State& dy, double t) {
        const ClassicalState s = unpack(y, t);
        Derivatives der;
        switch (opt.dynamics) {
            case Dynamics::newtonian: der = newtonian_rhs(s, v, p); break;
            case Dynamics::modified: der = modified_rhs(s, v, p); break;
            case Dynamics::theta_potential_only: der = theta_cutoff_rhs(s, v, p, ThetaMode::potential_only); break;
            case Dynamics::theta_full_hamiltonian: der = theta_cutoff_rhs(s, v, p, ThetaMode::full_hamiltonian); break;
        }
        for (Eigen::Index i = 0; i < d; ++i) {
            dy[static_cast<std::size_t>(i)] = der.rdot[i] / r_scale;
            dy[static_cast<std::size_t>(d + i)] = der.pdot[i] / p_scale;
        }
    };
    const bool theta = opt.dynamics == Dynamics::theta_potential_only || opt.dynamics == Dynamics::theta_full_hamiltonian;
    auto gap = [&](const State& y) {
        double n2 = 0;
        for (Eigen::Index i = 0; i < d; ++i) n2 += y[static_cast<std::size_t>(d + i)] * y[static_cast<std::size_t>(d + i)];
        return std::sqrt(n2) * p_scale - p.beta;
    };
    if (theta) theta_cutoff_rhs(s0, v, p, ThetaMode::potential_only, warn);

    const double t0 = s0.time;
    const double h = (t_end - t0) / static_cast<double>(opt.samples);
    auto stepper = ode::make_dense_output(opt.tol, opt.tol, ode::runge_kutta_dopri5<State>());
    stepper.initialize(y0, t0, h / 10.0);

    std::size_t next = 0;
    State tmp(y0.size());
    auto emit_until = [&](double t_hi) {
        while (next <= opt.samples) {
            const double ts = next == opt.samples ? t_end : t0 + static_cast<double>(next) * h;
            if (ts > t_hi) break;
            stepper.calc_state(ts, tmp);
            ClassicalState s = unpack(tmp, ts);
            result.energy.push_back(orbit_energy(s, v, p, opt.dynamics));
            result.frames.push_back(std::move(s));
            ++next;
        }
    };
    auto fail_with = [&](const std::string& why) {
        detail::extract_perihelia(result, h);
        throw OrbitFailure(why, result);
    };

    result.frames.push_back(s0);
    result.energy.push_back(orbit_energy(s0, v, p, opt.dynamics));
    next = 1;
    try {
        while (next <= opt.samples) {
            const auto [ta, tb] = stepper.do_step(system);
            if (!(tb > ta) || tb - ta < 1e-14 * std::max(1.0, std::abs(tb)))
                fail_with("step size underflow at t = " + std::to_string(ta));
            for (double c : stepper.current_state())
                if (!std::isfinite(c)) fail_with("non-finite state at t = " + std::to_string(tb));
            if (theta) {
                const double ga = gap(stepper.previous_state());
                const double gb = gap(stepper.current_state());
                if ((ga < 0) != (gb < 0)) {
                    double lo = ta, hi = tb;
                    while (hi - lo > 1e-10 * std::max(1.0, std::abs(hi))) {
                        const double mid = 0.5 * (lo + hi);
                        stepper.calc_state(mid, tmp);
                        ((gap(tmp) < 0) == (ga < 0) ? lo : hi) = mid;
                    }
                    emit_until(lo);
                    stepper.calc_state(hi, tmp);
                    const State far = tmp;
                    ++result.cutoff_crossings;
                    theta_cutoff_rhs(unpack(far, hi), v, p, ThetaMode::potential_only, warn);
                    stepper.initialize(far, hi, std::max(h / 10.0, tb - hi));
                    continue;
                }
            }
            emit_until(tb);
        }
    } catch (const OrbitFailure&) {
        throw;
    } catch (const Error& e) {
        fail_with(e.what());
    } catch (const ode::step_adjustment_error& e) {
        fail_with(std::string("step adjustment failed: ") + e.what());
    }

    const double e0 = result.energy.front();
    for (double e : result.energy)
        result.energy_drift = std::max(result.energy_drift, std::abs(e - e0) / std::max(std::abs(e0), 1e-300));
    detail::extract_perihelia(result, h);
    return result;
}

/// max_k |r_a(t_k) - r_b(t_k)| / max_k |r_b(t_k)| for runs sampled alike.
inline double max_relative_deviation(const OrbitResult& a, const OrbitResult& b) {
    require(a.frames.size() == b.frames.size(), ErrorKind::invalid_argument, "max_relative_deviation",
            "trajectories are sampled differently");
    double dev = 0, scale = 0;
    for (std::size_t i = 0; i < a.frames.size(); ++i) {
        dev = std::max(dev, (a.frames[i].position - b.frames[i].position).norm());
        scale = std::max(scale, b.frames[i].position.norm());
    }
    return scale > 0 ? dev / scale : dev;
}

}  // namespace nonlocalqm
