#pragma once

// Time propagation under Hermitian operators and the momentum-space packet
// smearing g(k) -> g(k) exp(-k^2 l_P^2 / 4).

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/LU>

#include "nonlocalqm/eigensolver.hpp"
#include "nonlocalqm/error.hpp"
#include "nonlocalqm/grid.hpp"
#include "nonlocalqm/operator_matrix.hpp"

namespace nonlocalqm {

enum class PropagationMethod { exact_eigenbasis, crank_nicolson };

inline std::string to_string(PropagationMethod m) {
    return m == PropagationMethod::exact_eigenbasis ? "exact_eigenbasis" : "crank_nicolson";
}

struct PropagationConfig {
    double dt = 1e-2;
    std::size_t n_steps = 100;
    PropagationMethod method = PropagationMethod::exact_eigenbasis;
    /// Keep every k-th frame (the first and last frames are always kept).
    std::size_t store_every = 1;
    /// Propagate with exp(+iHt/hbar) instead.
    bool backward = false;

    void validate() const {
        require(dt > 0 && std::isfinite(dt), ErrorKind::invalid_argument, "PropagationConfig", "dt must be positive");
        require(n_steps >= 1, ErrorKind::invalid_argument, "PropagationConfig", "n_steps must be >= 1");
        require(store_every >= 1, ErrorKind::invalid_argument, "PropagationConfig", "store_every must be >= 1");
    }
};

struct Frame {
    double time = 0;
    WaveFunction psi;
    double norm = 0;
    double energy = 0;
};

struct Trajectory {
    std::vector<Frame> frames;
    double norm_drift = 0;    // max |norm - norm_0| / norm_0 over stored frames
    double energy_drift = 0;  // max |<H> - <H>_0| / max(1, |<H>_0|)

    const WaveFunction& final_state() const { return frames.back().psi; }
};

/// Solves i hbar d/dt psi = H psi from psi0.
inline Trajectory propagate(const WaveFunction& psi0, const OperatorMatrix& op, const PropagationConfig& cfg) {
    constexpr std::string_view name = "propagate";
    cfg.validate();
    require(psi0.representation == Representation::position && psi0.grid == op.grid, ErrorKind::invalid_argument,
            name, "initial state and operator live on different grids");
    const double hnorm = op.entries.cwiseAbs().maxCoeff();
    require(op.hermiticity_defect <= 1e-10 * std::max(1.0, hnorm), ErrorKind::precondition_violation, name,
            "operator '" + op.provenance + "' is not Hermitian (defect " + std::to_string(op.hermiticity_defect) +
                ")");
    const double hbar = op.hbar;
    const double sign = cfg.backward ? -1.0 : 1.0;
    const double dx = op.grid.spacing();

    Trajectory tr;
    auto record = [&](std::size_t step, const Eigen::VectorXcd& a) {
        Frame f{static_cast<double>(step) * cfg.dt * sign, WaveFunction{op.grid, a, Representation::position, 1.0}, 0,
                0};
        const double n2 = a.squaredNorm();
        f.norm = std::sqrt(n2 * dx);
        f.energy = (a.dot(op.entries * a)).real() / n2;
        tr.frames.push_back(std::move(f));
    };

    if (cfg.method == PropagationMethod::exact_eigenbasis) {
        const HermitianEigen e = hermitian_eigen(op.entries);
        Eigen::VectorXcd c = e.vectors.adjoint() * psi0.amplitudes;
        Eigen::VectorXcd phase(c.size());
        for (Eigen::Index k = 0; k < c.size(); ++k) phase[k] = std::polar(1.0, -sign * e.values[k] * cfg.dt / hbar);
        record(0, psi0.amplitudes);
        for (std::size_t s = 1; s <= cfg.n_steps; ++s) {
            c = c.cwiseProduct(phase);
            if (s % cfg.store_every == 0 || s == cfg.n_steps) record(s, e.vectors * c);
        }
    } else {
        const auto n = op.dimension();
        const cplx half(0.0, sign * cfg.dt / (2.0 * hbar));
        const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
        const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(id + half * op.entries);
        const Eigen::MatrixXcd step = lu.solve(id - half * op.entries);
        Eigen::VectorXcd a = psi0.amplitudes;
        record(0, a);
        for (std::size_t s = 1; s <= cfg.n_steps; ++s) {
            a = step * a;
            if (s % cfg.store_every == 0 || s == cfg.n_steps) record(s, a);
        }
    }

    const double n0 = tr.frames.front().norm;
    const double e0 = tr.frames.front().energy;
    for (const Frame& f : tr.frames) {
        tr.norm_drift = std::max(tr.norm_drift, std::abs(f.norm - n0) / n0);
        tr.energy_drift = std::max(tr.energy_drift, std::abs(f.energy - e0) / std::max(1.0, std::abs(e0)));
    }
    return tr;
}

/// exp(-k^2 l^2 / 4), the transform of the normalised Gaussian kernel.
inline double smearing_factor(double k, double l) { return std::exp(-k * k * l * l / 4.0); }

/// g(k) -> g(k) exp(-k^2 l_P^2 / 4) for a momentum-space amplitude (k = p/hbar).
inline WaveFunction smear_packet(const WaveFunction& gk, const ModelParams& p) {
    require(gk.representation == Representation::momentum, ErrorKind::invalid_argument, "smear_packet",
            "expects a momentum-space amplitude");
    WaveFunction out = gk;
    for (std::size_t j = 0; j < gk.grid.size(); ++j)
        out.amplitudes[static_cast<Eigen::Index>(j)] *= smearing_factor(gk.grid.wavenumber(j), p.l_P);
    return out;
}

}  // namespace nonlocalqm
