#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nonlocalqm/error.hpp"
#include "nonlocalqm/grid.hpp"

namespace nonlocalqm {

enum class VariantTag {
    standard,
    erste,
    zweite,
    hermitisch1,
    hermitisch2,
    gaussian_midpoint,
    gaussian_simple,
    weighted_hybrid,
};

inline std::string to_string(VariantTag tag) {
    switch (tag) {
        case VariantTag::standard: return "standard";
        case VariantTag::erste: return "erste";
        case VariantTag::zweite: return "zweite";
        case VariantTag::hermitisch1: return "hermitisch1";
        case VariantTag::hermitisch2: return "hermitisch2";
        case VariantTag::gaussian_midpoint: return "gaussian_midpoint";
        case VariantTag::gaussian_simple: return "gaussian_simple";
        case VariantTag::weighted_hybrid: return "weighted_hybrid";
    }
    return "unknown";
}

inline VariantTag variant_tag_from_string(const std::string& s) {
    for (VariantTag t : {VariantTag::standard, VariantTag::erste, VariantTag::zweite, VariantTag::hermitisch1,
                         VariantTag::hermitisch2, VariantTag::gaussian_midpoint, VariantTag::gaussian_simple,
                         VariantTag::weighted_hybrid})
        if (to_string(t) == s) return t;
    fail(ErrorKind::invalid_argument, "variant_tag_from_string", "unknown Hamiltonian variant '" + s + "'");
}

/// Which Schroedinger operator to build. `w1` is only read by weighted_hybrid.
struct HamiltonianVariant {
    VariantTag tag = VariantTag::standard;
    double w1 = 1.0;

    static HamiltonianVariant of(VariantTag t) { return {t, 1.0}; }
    static HamiltonianVariant weighted_hybrid(double w1) {
        require(w1 >= 0.0 && w1 <= 1.0, ErrorKind::invalid_argument, "weighted_hybrid", "w1 must lie in [0, 1]");
        return {VariantTag::weighted_hybrid, w1};
    }

    double w2() const { return 1.0 - w1; }
    std::string name() const { return to_string(tag); }

    bool uses_sinc_kernel() const {
        return tag == VariantTag::erste || tag == VariantTag::zweite || tag == VariantTag::hermitisch1 ||
               tag == VariantTag::hermitisch2;
    }
    bool uses_gaussian_kernel() const {
        return tag == VariantTag::gaussian_midpoint || tag == VariantTag::gaussian_simple ||
               tag == VariantTag::weighted_hybrid;
    }
    /// erste and zweite are non-Hermitian as written.
    bool hermitian_by_construction() const { return tag != VariantTag::erste && tag != VariantTag::zweite; }
};

/// Dense operator on the grid, together with where it came from.
struct OperatorMatrix {
    Grid1D grid;
    Eigen::MatrixXcd entries;
    std::optional<HamiltonianVariant> variant;
    std::string provenance;
    double hermiticity_defect = 0.0;
    /// Set for operators that only make sense on the band |p| < band_cutoff
    /// (the projected erste form); eigenanalysis then works in that subspace.
    bool band_restricted = false;
    double band_cutoff = 0.0;
    double hbar = 1.0;
    std::vector<std::string> warnings;

    Eigen::Index dimension() const { return entries.rows(); }
};

/// max_ij |H_ij - conj(H_ji)|
inline double hermiticity_defect(const Eigen::MatrixXcd& h) {
    return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const OperatorMatrix& op) { return hermiticity_defect(op.entries); }

inline OperatorMatrix make_operator(const Grid1D& g, Eigen::MatrixXcd entries, std::string provenance,
                                    std::optional<HamiltonianVariant> variant = std::nullopt) {
    OperatorMatrix op{g, std::move(entries), variant, std::move(provenance), 0.0, false, 0.0, 1.0, {}};
    op.hermiticity_defect = hermiticity_defect(op.entries);
    return op;
}

/// Applies the matrix to a position-space state.
inline WaveFunction apply(const OperatorMatrix& op, const WaveFunction& psi) {
    require(psi.representation == Representation::position && psi.grid == op.grid,
            ErrorKind::invalid_argument, "apply", "state and operator live on different grids");
    WaveFunction out = psi;
    out.amplitudes = op.entries * psi.amplitudes;
    return out;
}

/// <psi|H|psi> / <psi|psi>
inline cplx expectation(const OperatorMatrix& op, const WaveFunction& psi) {
    return psi.amplitudes.dot(op.entries * psi.amplitudes) / psi.amplitudes.squaredNorm();
}

}  // namespace nonlocalqm
