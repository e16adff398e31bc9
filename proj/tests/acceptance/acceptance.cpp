// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nonlocalqm/nonlocalqm.hpp"

using namespace nonlocalqm;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

ModelParams oscillator_params(double l) { return {1.0, 1.0, l, 20.0}; }

// beta midway between lattice momenta on +-32 hbar/beta0.
std::pair<ModelParams, Grid1D> band_setup() {
    ModelParams p{1.0, 1.0, 0.0, 0.0};
    const double beta0 = 4.0, L = 64.0 / beta0, dp = 2 * pi / L;
    p.beta = (std::floor(beta0 / dp) + 0.5) * dp;
    p.l_P = p.hbar / p.beta;
    return {p, Grid1D::make(512, -L / 2, L / 2)};
}

Outcome idempotence() {
    const auto [p, g] = band_setup();
    std::mt19937_64 rng(1);
    double worst = 0;
    for (int t = 0; t < 1000; ++t) {
        const WaveFunction psi = random_state(g, rng);
        const WaveFunction once = project(psi, p).first;
        const WaveFunction twice = project(once, p).first;
        worst = std::max(worst, (twice.amplitudes - once.amplitudes).norm() / psi.amplitudes.norm());
    }
    return {worst <= 1e-10, "max ||P^2 psi - P psi|| / ||psi|| = " + fmt(worst) + " (tol 1e-10, 1000 states, n=512)"};
}

Outcome uncertainty() {
    const auto [p, g] = band_setup();
    std::mt19937_64 rng(2);
    double least = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 1000; ++t)
        least = std::min(least, uncertainty_bound_check(random_bandlimited_state(g, p, rng), p).ratio);
    return {least >= 1.0, "min dx * 4 beta / hbar = " + fmt(least) + " (bound 1, 1000 states)"};
}

Outcome hermiticity() {
    const ModelParams p{1.0, 1.0, 0.1, 10.0};
    const Grid1D g = Grid1D::make(512, -12, 12);
    const PotentialSpec v = PotentialSpec::harmonic(1.0);
    double worst_h = 0, least_nh = std::numeric_limits<double>::infinity();
    for (VariantTag t : {VariantTag::hermitisch1, VariantTag::hermitisch2, VariantTag::gaussian_midpoint,
                         VariantTag::gaussian_simple})
        worst_h = std::max(worst_h, build_hamiltonian(t, v, g, p).hermiticity_defect);
    for (VariantTag t : {VariantTag::erste, VariantTag::zweite})
        least_nh = std::min(least_nh, build_hamiltonian(t, v, g, p).hermiticity_defect);
    return {worst_h <= 1e-12 && least_nh > 1e-6,
            "max defect h1/h2/midpoint/simple = " + fmt(worst_h) + " (<= 1e-12); min defect erste/zweite = " +
                fmt(least_nh) + " (> 1e-6)"};
}

Outcome slope() {
    const Grid1D g = Grid1D::make(1024, -12, 12);
    const PotentialSpec v = PotentialSpec::harmonic(1.0);
    const std::vector<double> ls{0.2, 0.1, 0.05, 0.025};
    std::ostringstream os;
    bool pass = true;
    for (VariantTag t : {VariantTag::gaussian_midpoint, VariantTag::gaussian_simple}) {
        const ConvergenceResult r = convergence_study(HamiltonianVariant::of(t), v, g, oscillator_params(0.1), ls);
        const bool ok = r.fitted && std::abs(r.slope - 2.0) <= 0.1;
        pass = pass && ok;
        os << to_string(t) << " slope " << (r.fitted ? fmt(r.slope) : "none") << "; ";
    }
    os << "(target 2 +- 0.1)";
    return {pass, os.str()};
}

Outcome oracle() {
    const Grid1D g = Grid1D::make(1024, -12, 12);
    const PotentialSpec v = PotentialSpec::harmonic(1.0);
    const SpectrumResult st = diagonalize(build_hamiltonian(VariantTag::standard, v, g, oscillator_params(0.05)), 5);
    const std::vector<double> ls{0.2, 0.1, 0.05};
    std::vector<double> worst;
    double ref = 0;
    for (double l : ls) {
        const ModelParams p = oscillator_params(l);
        const SpectrumResult s = diagonalize(build_hamiltonian(VariantTag::gaussian_midpoint, v, g, p), 5);
        const ShiftResult f = perturbative_shifts(st, v, p, VariantTag::gaussian_midpoint);
        double w = 0;
        for (int j = 0; j < 5; ++j) {
            const double diag = s.eigenvalues[j] - st.eigenvalues[j];
            w = std::max(w, std::abs(f.shifts[static_cast<std::size_t>(j)] - diag));
            if (l == 0.05 && j == 0) ref = std::abs(diag);
        }
        worst.push_back(w);
    }
    double ratio = 0;
    for (std::size_t i = 0; i < ls.size(); ++i)
        ratio = std::max(ratio, worst[i] / (5.0 * std::pow(ls[i] / 0.05, 4) * ref));
    return {ratio <= 1.0, "max |formula - diag| / (5 (l/0.05)^4 |shift(0.05)|) = " + fmt(ratio) + " (<= 1, 5 levels)"};
}

Outcome uniform_shift() {
    const Grid1D g = Grid1D::make(512, -12, 12);
    const PotentialSpec v = PotentialSpec::harmonic(1.0);
    const ModelParams p = oscillator_params(0.2);
    const SpectrumResult st = diagonalize(build_hamiltonian(VariantTag::standard, v, g, p), 5);
    const SpectrumResult s = diagonalize(build_hamiltonian(VariantTag::gaussian_simple, v, g, p), 5);
    const ShiftResult f = perturbative_shifts(st, v, p, VariantTag::gaussian_simple);
    const double expect = p.mass * p.l_P * p.l_P / 4.0;
    double worst = 0;
    for (int j = 0; j < 5; ++j) {
        worst = std::max(worst, std::abs((s.eigenvalues[j] - st.eigenvalues[j]) / expect - 1.0));
        worst = std::max(worst, std::abs(f.shifts[static_cast<std::size_t>(j)] / expect - 1.0));
    }
    return {worst <= 1e-8, "max relative deviation from m w^2 l^2 / 4 = " + fmt(worst) + " (tol 1e-8)"};
}

Outcome exterior_mass() {
    const ModelParams p{1.0, 1.0, 1.0 / 6, 6.0};
    const Grid1D g = Grid1D::make(256, -6, 6);
    BuildOptions opt;
    opt.reproject = true;
    const SpectrumResult s =
        diagonalize(build_hamiltonian(VariantTag::hermitisch2, PotentialSpec::cutoff_well(1.0), g, p, opt), 3);
    double least = std::numeric_limits<double>::infinity();
    for (const WaveFunction& psi : s.eigenvectors)
        least = std::min(least, interval_mass(psi, g.x_min(), -1.0) + interval_mass(psi, 1.0, g.x_max() + g.spacing()));
    return {least > 1e-12, "min mass outside |x| < 1 over 3 levels = " + fmt(least) + " (> 1e-12)"};
}

Outcome evolution() {
    const ModelParams p{1.0, 1.0, 0.3, 5.0};
    const Grid1D g = Grid1D::make(128, -10, 10);
    const OperatorMatrix h = build_hamiltonian(VariantTag::gaussian_simple, PotentialSpec::harmonic(1.0), g, p);
    const WaveFunction psi0 = gaussian_packet(g, 1.0, 1.0, 0.5);
    PropagationConfig cfg;
    cfg.dt = 0.01;
    cfg.n_steps = 10000;
    cfg.store_every = 100;
    const double drift = propagate(psi0, h, cfg).norm_drift;
    cfg.dt = 1e-3;
    cfg.n_steps = 1000;
    cfg.store_every = 1000;
    const WaveFunction exact = propagate(psi0, h, cfg).final_state();
    cfg.method = PropagationMethod::crank_nicolson;
    const WaveFunction cn = propagate(psi0, h, cfg).final_state();
    const double diff = (exact.amplitudes - cn.amplitudes).cwiseAbs().maxCoeff();
    return {drift <= 1e-8 && diff <= 1e-6,
            "norm drift over 1e4 steps = " + fmt(drift) + " (tol 1e-8); max |CN - exact| = " + fmt(diff) + " (tol 1e-6)"};
}

Outcome deconvolution() {
    double round_trip = 0;
    {
        const ModelParams p{1.0, 1.0, 0.5, 4.0};
        const Grid1D g = Grid1D::make(512, -20, 20);
        std::mt19937_64 rng(3);
        for (int t = 0; t < 20; ++t) {
            const WaveFunction psi = random_bandlimited_state(g, p, rng);
            const WaveFunction back = deconvolve(gaussian_smooth(psi, p), p).psi;
            round_trip = std::max(round_trip, (back.amplitudes - psi.amplitudes).cwiseAbs().maxCoeff() /
                                                  psi.amplitudes.cwiseAbs().maxCoeff());
        }
    }
    const ModelParams p{1.0, 1.0, 0.5, 6.0};
    const Grid1D g = Grid1D::make(2048, -51.2, 51.2);
    const WaveFunction psi = gaussian_packet(g, 0.5, 2.0, 0.8);
    const WaveFunction tilde = gaussian_smooth(psi, p);
    std::vector<double> errors;
    for (int n : {1, 2, 4, 8}) {
        DeconvolutionConfig cfg;
        cfg.method = DeconvolutionMethod::hermite_series;
        cfg.n_max = n;
        errors.push_back((deconvolve(tilde, p, cfg).psi.amplitudes - psi.amplitudes).cwiseAbs().maxCoeff());
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < errors.size(); ++i) decreasing = decreasing && errors[i] < errors[i - 1];
    std::string e;
    for (double x : errors) e += (e.empty() ? "" : ", ") + fmt(x);
    return {round_trip <= 1e-8 && decreasing,
            "spectral round trip = " + fmt(round_trip) + " (tol 1e-8); Hermite errors n=1,2,4,8: " + e};
}

Outcome commutators() {
    const ModelParams p{1.0, 1.0, 1.0 / 1.5, 1.5};
    std::ostringstream os;
    bool pass = true;
    for (MapTag t : {MapTag::tan, MapTag::tanh, MapTag::sin}) {
        const DeformationMap m = make_map(t, p);
        const double edge = t == MapTag::sin ? 0.95 * m.P_limit() : 3.0;
        const Bump bump = t == MapTag::sin ? Bump{0.0, 0.7 * edge} : Bump{0.2, 1.8};
        const CommutatorReport r = commutator_residual(m, Grid1D::make(1024, -edge, edge), bump, p);
        const bool ok = r.residual_stated <= 1e-6 && r.observed_order >= 7.0;
        pass = pass && ok;
        os << to_string(t) << " stated " << fmt(r.residual_stated) << " derived " << fmt(r.residual_derived)
           << " order " << fmt(r.observed_order) << "; ";
    }
    os << "(stated forms, tol 1e-6, order >= 7)";
    return {pass, os.str()};
}

Outcome earth() {
    const double hbar = 1.054571817e-34;
    const ModelParams e{hbar, 6e24, hbar / 6.5, 1.0};
    const double x = suppression_factor(6e24, 3e4, e).exponent;
    return {x >= 1e55 && x <= 1e57, "exponent = " + fmt(x) + " (range [1e55, 1e57])"};
}

Outcome classical() {
    const auto state2 = [](double a, double b, double c, double d) {
        return ClassicalState::make(Eigen::Vector2d(a, b), Eigen::Vector2d(c, d));
    };
    // (a) Kepler, Planck momentum far above the orbit.
    const double p0 = 1.2;
    const ModelParams p{1.0, 1.0, 1e-6 / 1.6, 100.0};
    const ClassicalPotential kepler = ClassicalPotential::kepler(1.0);
    const double period = 2 * pi * std::pow(-1.0 / (2 * (0.5 * p0 * p0 - 1.0)), 1.5);
    OrbitOptions opt;
    opt.samples = 4000;
    const OrbitResult mod = integrate_orbit(state2(1, 0, 0, p0), kepler, p, 10.5 * period, opt);
    opt.dynamics = Dynamics::newtonian;
    const OrbitResult ref = integrate_orbit(state2(1, 0, 0, p0), kepler, p, 10.5 * period, opt);
    const double dev = max_relative_deviation(mod, ref);
    double peri = mod.perihelion_angles.size() == 10 && ref.perihelion_angles.size() == 10
                      ? 0.0
                      : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < std::min(mod.perihelion_angles.size(), ref.perihelion_angles.size()); ++i)
        peri = std::max(peri, std::abs(mod.perihelion_angles[i] - ref.perihelion_angles[i]));
    const bool a = dev <= 10 * opt.tol && peri <= 10 * opt.tol;

    // (b) Step-function Hamiltonian freezes a state above the cutoff.
    const ModelParams q{1.0, 1.0, 0.1, 1.0};
    const ClassicalState s0 = ClassicalState::make(Eigen::Vector3d(0.3, -1.7, 2.9), Eigen::Vector3d(1.1, -0.7, 0.3));
    OrbitOptions topt;
    topt.dynamics = Dynamics::theta_full_hamiltonian;
    topt.samples = 50;
    bool frozen = true;
    for (const ClassicalState& s : integrate_orbit(s0, ClassicalPotential::kepler(3.0), q, 10.0, topt).frames)
        frozen = frozen && s.position == s0.position && s.momentum == s0.momentum;

    // (c) Modified Hamiltonian conserved at strong deformation.
    double drift = 0;
    for (double l : {0.3, 1.0, 3.0})
        drift = std::max(drift, integrate_orbit(state2(1, 0, 0, 1.1), kepler, ModelParams{1.0, 1.0, l, 100.0}, 30.0)
                                    .energy_drift);
    const bool c = drift <= 100 * OrbitOptions{}.tol;
    return {a && frozen && c, "(a) deviation " + fmt(dev) + ", perihelion diff " + fmt(peri) + " (tol 1e-9); (b) " +
                                  (frozen ? "frozen" : "moved") + "; (c) H drift " + fmt(drift) + " (tol 1e-8)"};
}

Outcome hybrid() {
    // w1 = 1 reproduces the midpoint operator.
    const ModelParams p{1.0, 1.0, 0.3, 3.0};
    const Grid1D g = Grid1D::make(128, -8, 8);
    const PotentialSpec well = PotentialSpec::square_well(2.0, 2.0);
    const bool same = build_hamiltonian(VariantTag::gaussian_midpoint, well, g, p).entries ==
                      build_hamiltonian(HamiltonianVariant::weighted_hybrid(1.0), well, g, p).entries;

    // A wide oscillator ground state switches the nonlocal part off.
    const ModelParams q{1.0, 1.0, 0.4, 2.5};
    const Grid1D big = Grid1D::make(1024, -100, 100);
    const PotentialSpec osc = PotentialSpec::harmonic(0.01);
    const SpectrumResult s0 = diagonalize(build_hamiltonian(HamiltonianVariant::weighted_hybrid(0.0), osc, big, q), 5);
    const double w1 = WeightPolicy::spread_rule(6.0).resolve(s0.eigenvectors[0], q);
    const SpectrumResult sw = diagonalize(build_hamiltonian(HamiltonianVariant::weighted_hybrid(w1), osc, big, q), 5);
    const double diff = (sw.eigenvalues - s0.eigenvalues).cwiseAbs().maxCoeff();
    return {same && w1 <= 1e-6 && diff <= 1e-8, std::string("w1=1 ") + (same ? "equals" : "differs from") +
                                                    " midpoint; spread-rule w1 = " + fmt(w1) +
                                                    " (<= 1e-6); max level change vs w1=0 = " + fmt(diff) +
                                                    " (tol 1e-8)"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"projector idempotence", idempotence},
        {"position uncertainty floor", uncertainty},
        {"hermiticity by variant", hermiticity},
        {"l_P^2 convergence slope", slope},
        {"perturbative oracle bound", oracle},
        {"uniform oscillator shift", uniform_shift},
        {"cutoff-well exterior mass", exterior_mass},
        {"unitary evolution", evolution},
        {"deconvolution", deconvolution},
        {"deformed commutators", commutators},
        {"Earth suppression exponent", earth},
        {"classical limits", classical},
        {"weighted hybrid", hybrid},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
