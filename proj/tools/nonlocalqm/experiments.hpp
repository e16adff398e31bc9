#pragma once

// The seven experiment subcommands. Each one reads its blocks from a parsed
// config, computes in memory and returns the summary plus CSV tables; writing
// files is left to the caller.
//
// CSV headers carry units in brackets, in the model's own unit system:
// [L] length, [P] momentum, [E] energy, [T] time, [1] dimensionless.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nonlocalqm/nonlocalqm.hpp"
#include "nonlocalqm/config.hpp"
#include "nonlocalqm/output.hpp"

namespace nonlocalqm::cli {

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> s{"spectrum",     "evolve",        "bandlimit-audit", "deconvolve",
                                            "algebra-check", "orbit",         "sweep"};
    return s;
}

/// Config block that parametrizes a subcommand ("bandlimit-audit" -> "bandlimit_audit").
inline std::string block_name(std::string sub) {
    std::replace(sub.begin(), sub.end(), '-', '_');
    return sub;
}

namespace detail {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

/// Library argument errors raised while turning a block into objects are
/// configuration errors and are reported at the block.
template <class F>
auto validated(const Block& b, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::invalid_argument) throw;
        b.fail((b.path().empty() ? std::string() : b.path() + ": ") + e.what());
    }
}

inline Json yaml_to_json(const YAML::Node& n) {
    switch (n.Type()) {
        case YAML::NodeType::Map: {
            Json o = Json::object();
            for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return o;
        }
        case YAML::NodeType::Sequence: {
            Json a = Json::array();
            for (const auto& e : n) a.push_back(yaml_to_json(e));
            return a;
        }
        case YAML::NodeType::Scalar: {
            double d = 0;
            if (YAML::convert<double>::decode(n, d)) return d;
            bool b = false;
            if (YAML::convert<bool>::decode(n, b)) return b;
            return n.Scalar();
        }
        default: return nullptr;
    }
}

inline Json to_json(const Eigen::VectorXd& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline Json to_json(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(x);
    return a;
}

inline Json observables_json(const Observables& o) {
    return Json{{"norm", o.norm},     {"mean_x", o.mean_x},   {"delta_x", o.delta_x},
                {"mean_p", o.mean_p}, {"delta_p", o.delta_p}, {"spread_l", o.spread_l}};
}

/// ||a - b|| / ||b|| on the same grid.
inline double relative_l2(const WaveFunction& a, const WaveFunction& b) {
    return (a.amplitudes - b.amplitudes).norm() / b.amplitudes.norm();
}

/// max |a - b| / max |b|.
inline double relative_sup(const WaveFunction& a, const WaveFunction& b) {
    return (a.amplitudes - b.amplitudes).cwiseAbs().maxCoeff() / b.amplitudes.cwiseAbs().maxCoeff();
}

}  // namespace detail

/// State shared by a run: the top-level block, the seed, and what has been
/// produced so far.
struct Context {
    Block top;
    std::string subcommand;
    std::uint64_t seed = 0;
    Outputs out;
    Json checks = Json::object();
    std::vector<std::string> warnings;

    void warn(const std::string& w) {
        if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
    }
    void warn(const std::vector<std::string>& ws) {
        for (const std::string& w : ws) warn(w);
    }
    Json& summary() { return out.summary; }
};

// ---------------------------------------------------------------- readers

inline ModelParams read_model(const Block& top) {
    const Block b = top.block("model");
    ModelParams p;
    p.hbar = b.number("hbar", 1.0);
    p.mass = b.number("mass", 1.0);
    const bool has_l = b.has("l_P");
    const bool has_pp = b.has("planck_momentum");
    if (has_l == has_pp) b.fail("model: give exactly one of 'l_P' or 'planck_momentum' (= hbar / l_P)");
    p.l_P = has_l ? b.number("l_P") : p.hbar / b.number("planck_momentum");
    p.beta = b.number("beta", p.hbar / p.l_P);
    b.finish();
    detail::validated(b, [&] { p.validate("model"); });
    return p;
}

inline Json model_json(const ModelParams& p) {
    return Json{{"hbar", p.hbar}, {"mass", p.mass}, {"l_P", p.l_P}, {"beta", p.beta}};
}

inline Grid1D read_grid(const Block& top) {
    const Block b = top.block("grid");
    const std::int64_t n = b.integer("n_points");
    const double a = b.number("x_min");
    const double c = b.number("x_max");
    b.check(n > 0, "n_points", "must be positive");
    b.finish();
    return detail::validated(b, [&] { return Grid1D::make(static_cast<std::size_t>(n), a, c); });
}

inline PotentialSpec read_potential(const Block& b, const ModelParams& p) {
    const std::string kind =
        b.choice("kind", {"free", "square_well", "cutoff_well", "harmonic", "cutoff_harmonic"});
    PotentialSpec s;
    if (kind == "free") s = PotentialSpec::free();
    else if (kind == "square_well") s = PotentialSpec::square_well(b.number("half_width"), b.number("wall"));
    else if (kind == "cutoff_well") s = PotentialSpec::cutoff_well(b.number("half_width"));
    else if (kind == "harmonic") s = PotentialSpec::harmonic(b.number("omega"));
    else s = PotentialSpec::cutoff_harmonic(b.number("omega"));
    b.finish();
    detail::validated(b, [&] { s.validate(p); });
    return s;
}

struct VariantChoice {
    HamiltonianVariant variant;
    BuildOptions options;
    Json resolved = Json::object();
};

inline VariantChoice read_variant(const Block& b, const ModelParams& p) {
    static const std::vector<std::string> names{"standard",    "erste",           "zweite",
                                                "hermitisch1", "hermitisch2",     "gaussian_midpoint",
                                                "gaussian_simple", "weighted_hybrid"};
    VariantChoice v;
    const std::string name = b.choice("name", names);
    v.variant = HamiltonianVariant::of(variant_tag_from_string(name));
    v.resolved["name"] = name;
    if (v.variant.tag == VariantTag::weighted_hybrid) {
        const std::string rule = b.choice("weight_rule", {"fixed", "spread_rule"}, std::string("fixed"));
        double w1 = 1.0;
        if (rule == "fixed") {
            w1 = b.number("w1");
        } else {
            const double alpha = b.number("alpha");
            const double spread = b.number("spread");
            w1 = detail::validated(b, [&] {
                try {
                    return WeightPolicy::spread_rule(alpha).resolve(spread, p.l_P);
                } catch (const Error& e) {
                    throw Error(ErrorKind::invalid_argument, e.operation(), e.what());
                }
            });
            v.resolved["alpha"] = alpha;
            v.resolved["spread"] = spread;
        }
        v.variant = detail::validated(b, [&] { return HamiltonianVariant::weighted_hybrid(w1); });
        v.resolved["weight_rule"] = rule;
        v.resolved["w1"] = w1;
    }
    v.options.reproject = b.boolean("reproject", false);
    v.options.project_erste = b.boolean("project_erste", false);
    v.options.sinc_form = b.choice("sinc_form", {"periodic", "truncated"}, std::string("periodic")) == "periodic"
                              ? SincKernelForm::periodic
                              : SincKernelForm::truncated;
    v.resolved["reproject"] = v.options.reproject;
    v.resolved["project_erste"] = v.options.project_erste;
    v.resolved["sinc_form"] = v.options.sinc_form == SincKernelForm::periodic ? "periodic" : "truncated";
    b.finish();
    return v;
}

struct PacketSpec {
    std::string kind = "gaussian";
    double x0 = 0;
    double sigma = 1;
    double p0 = 0;
    std::size_t level = 0;
};

inline PacketSpec read_packet(const Block& b, const std::vector<std::string>& kinds) {
    PacketSpec s;
    s.kind = b.choice("kind", kinds, kinds.front());
    if (s.kind == "gaussian") {
        s.x0 = b.number("x0", 0.0);
        s.sigma = b.number("sigma");
        s.p0 = b.number("p0", 0.0);
        b.check(s.sigma > 0, "sigma", "must be positive");
    } else if (s.kind == "eigenstate") {
        s.level = b.count("level", 0);
    }
    b.finish();
    return s;
}

// ---------------------------------------------------------------- spectrum

inline void run_spectrum(Context& c) {
    const ModelParams p = read_model(c.top);
    const Grid1D g = read_grid(c.top);
    const PotentialSpec v = read_potential(c.top.block("potential"), p);
    const VariantChoice vc = read_variant(c.top.block("variant"), p);

    const Block b = c.top.block("spectrum");
    const std::size_t n_levels = b.count("n_levels", 5);
    b.check(n_levels >= 1 && n_levels <= g.size(), "n_levels", "must lie in [1, n_points]");
    const double herm_tol = b.number("hermiticity_tolerance", 1e-12);
    const double nonherm_floor = b.number("non_hermiticity_floor", 1e-6);
    const bool allow_nh = b.boolean("non_hermitian_allowed", !vc.variant.hermitian_by_construction());
    const double boundary_tol = b.number("boundary_tolerance", 1e-10);
    const bool uniform_check = b.has("uniform_shift_tolerance");
    const double uniform_tol = b.number("uniform_shift_tolerance", 0.0);

    std::vector<double> l_values;
    double slope_target = 2.0, slope_tol = 0.1;
    std::optional<double> oracle_ref;
    double oracle_factor = 5.0;
    if (auto cb = b.optional_block("convergence")) {
        l_values = cb->numbers("l_values");
        for (double l : l_values) cb->check(l > 0 && std::isfinite(l), "l_values", "entries must be positive");
        cb->check(l_values.size() >= 2, "l_values", "need at least two values");
        slope_target = cb->number("slope_target", 2.0);
        slope_tol = cb->number("slope_tolerance", 0.1);
        if (auto ob = cb->optional_block("oracle")) {
            oracle_ref = ob->number("reference_l", 0.05);
            oracle_factor = ob->number("factor", 5.0);
            ob->finish();
            const bool listed = std::any_of(l_values.begin(), l_values.end(),
                                            [&](double l) { return std::abs(l - *oracle_ref) <= 1e-12 * *oracle_ref; });
            cb->check(listed, "oracle", "reference_l must be one of the l_values");
        }
        cb->finish();
    }

    std::optional<std::pair<double, double>> interior;
    double exterior_tol = 1e-12;
    if (auto eb = b.optional_block("exterior")) {
        const std::vector<double> iv = eb->numbers("interval");
        eb->check(iv.size() == 2 && iv[0] < iv[1], "interval", "must be [a, b] with a < b");
        interior = std::make_pair(iv[0], iv[1]);
        exterior_tol = eb->number("tolerance", 1e-12);
        eb->finish();
    }

    struct GridCheck {
        std::size_t n_points, levels;
        double tolerance;
        bool richardson;
    };
    std::optional<GridCheck> grid_check;
    if (auto gb = b.optional_block("grid_check")) {
        GridCheck gc{gb->count("n_points", g.size()), gb->count("levels", 3), gb->number("tolerance", 1e-6),
                     gb->choice("measure", {"richardson", "direct"}, std::string("richardson")) == "richardson"};
        gb->check(gc.levels >= 1, "levels", "must be >= 1");
        gb->finish();
        grid_check = gc;
    }

    std::optional<VariantChoice> compare;
    double compare_tol = 1e-8;
    if (auto cb = b.optional_block("compare")) {
        compare = read_variant(cb->block("variant"), p);
        compare_tol = cb->number("tolerance", 1e-8);
        cb->finish();
    }
    b.finish();
    c.top.finish();

    // Spectrum at the configured l_P.
    const OperatorMatrix h = build_hamiltonian(vc.variant, v, g, p, vc.options);
    c.warn(h.warnings);
    DiagonalizeOptions dopt;
    dopt.non_hermitian_allowed = allow_nh;
    const SpectrumResult s = diagonalize(h, n_levels, dopt);
    c.warn(s.warnings);
    const bool is_standard = vc.variant.tag == VariantTag::standard;
    const SpectrumResult st =
        is_standard ? s : diagonalize(build_hamiltonian(VariantTag::standard, v, g, p), n_levels);
    const bool gaussian_pt =
        vc.variant.tag == VariantTag::gaussian_midpoint || vc.variant.tag == VariantTag::gaussian_simple;
    std::optional<ShiftResult> formula;
    if (gaussian_pt) {
        formula = perturbative_shifts(st, v, p, vc.variant.tag);
        c.warn(formula->warnings);
    }

    Csv levels{{"level", "E_standard[E]", "E_variant[E]", "E_variant_imag[E]", "shift[E]", "shift_formula[E]",
                "residual[E]"},
               {}};
    Json lv = Json::array();
    for (std::size_t j = 0; j < n_levels; ++j) {
        const auto i = static_cast<Eigen::Index>(j);
        const double imag = s.complex_eigenvalues ? (*s.complex_eigenvalues)[i].imag() : 0.0;
        const double shift = s.eigenvalues[i] - st.eigenvalues[i];
        const double f = formula ? formula->shifts[j] : detail::nan;
        levels.rows.push_back({static_cast<double>(j), st.eigenvalues[i], s.eigenvalues[i], imag, shift, f,
                               s.residuals[j]});
        Json e{{"index", j},
               {"standard", st.eigenvalues[i]},
               {"variant", s.eigenvalues[i]},
               {"imag", imag},
               {"shift", shift},
               {"residual", s.residuals[j]}};
        if (formula) e["shift_formula"] = f;
        lv.push_back(e);
    }
    c.out.tables["levels.csv"] = levels;
    c.summary()["levels"] = lv;
    Json vinfo = vc.resolved;
    vinfo["provenance"] = h.provenance;
    vinfo["hermiticity_defect"] = h.hermiticity_defect;
    vinfo["band_restricted"] = h.band_restricted;
    vinfo["hermitian_by_construction"] = vc.variant.hermitian_by_construction();
    c.summary()["model"] = model_json(p);
    c.summary()["potential"] = v.name();
    c.summary()["orthonormality_defect"] = s.complex_eigenvalues ? detail::nan : orthonormality_defect(s);
    if (formula) c.summary()["formula_method"] = formula->method;

    if (vc.variant.hermitian_by_construction())
        c.checks["hermiticity"] = check_le(h.hermiticity_defect, herm_tol);
    else if (h.band_restricted) {
        // The band-restricted build is Hermitian; the defect is that of the plain construction.
        BuildOptions plain = vc.options;
        plain.project_erste = false;
        const double defect = build_hamiltonian(vc.variant, v, g, p, plain).hermiticity_defect;
        vinfo["unrestricted_hermiticity_defect"] = defect;
        c.checks["non_hermiticity"] = check_gt(defect, nonherm_floor);
    } else
        c.checks["non_hermiticity"] = check_gt(h.hermiticity_defect, nonherm_floor);
    c.summary()["variant"] = vinfo;
    double edge = 0;
    for (const WaveFunction& psi : s.eigenvectors) edge = std::max(edge, boundary_mass(psi));
    c.checks["boundary_mass"] = check_le(edge, boundary_tol);

    if (uniform_check) {
        const auto* osc = std::get_if<potentials::Harmonic>(&v.kind());
        if (vc.variant.tag != VariantTag::gaussian_simple || !osc) {
            c.warn("uniform_shift_tolerance only applies to gaussian_simple on a harmonic potential; skipped");
        } else {
            const double expect = p.mass * osc->omega * osc->omega * p.l_P * p.l_P / 4.0;
            double worst = 0;
            for (std::size_t j = 0; j < n_levels; ++j) {
                const auto i = static_cast<Eigen::Index>(j);
                worst = std::max(worst, std::abs((s.eigenvalues[i] - st.eigenvalues[i]) / expect - 1.0));
                worst = std::max(worst, std::abs(formula->shifts[j] / expect - 1.0));
            }
            c.summary()["uniform_shift_expected"] = expect;
            c.checks["uniform_shift"] = check_le(worst, uniform_tol);
        }
    }

    if (!l_values.empty()) {
        Csv conv{{"l_P[L]", "shift_diag[E]", "shift_formula[E]", "max_residual[E]"}, {}};
        std::vector<double> shifts0, residual;
        std::vector<std::vector<double>> diag_all;
        for (double l : l_values) {
            ModelParams q = p;
            q.l_P = l;
            const OperatorMatrix hq = build_hamiltonian(vc.variant, v, g, q, vc.options);
            c.warn(hq.warnings);
            const SpectrumResult sq = diagonalize(hq, n_levels, dopt);
            std::vector<double> d(n_levels);
            for (std::size_t j = 0; j < n_levels; ++j)
                d[j] = sq.eigenvalues[static_cast<Eigen::Index>(j)] - st.eigenvalues[static_cast<Eigen::Index>(j)];
            double worst = detail::nan, f0 = detail::nan;
            if (gaussian_pt) {
                const ShiftResult fq = perturbative_shifts(st, v, q, vc.variant.tag);
                worst = 0;
                for (std::size_t j = 0; j < n_levels; ++j) worst = std::max(worst, std::abs(fq.shifts[j] - d[j]));
                f0 = fq.shifts[0];
            }
            conv.rows.push_back({l, d[0], f0, worst});
            shifts0.push_back(d[0]);
            residual.push_back(worst);
            diag_all.push_back(d);
        }
        c.out.tables["convergence.csv"] = conv;

        std::vector<std::size_t> order(l_values.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t z) { return l_values[a] < l_values[z]; });
        bool monotone = true;
        for (std::size_t i = 0; i < order.size(); ++i) {
            const double cur = std::abs(shifts0[order[i]]);
            if (cur == 0.0 || (i > 0 && !(cur > std::abs(shifts0[order[i - 1]])))) monotone = false;
        }
        Json cj{{"l_values", detail::to_json(l_values)}, {"shifts", detail::to_json(shifts0)}, {"fitted", monotone}};
        double slope = detail::nan;
        if (monotone) {
            std::vector<double> ys;
            for (double d : shifts0) ys.push_back(std::abs(d));
            double intercept = 0, rms = 0;
            loglog_fit(l_values, ys, slope, intercept, rms);
            cj["slope"] = slope;
            cj["intercept"] = intercept;
            cj["fit_residual"] = rms;
        } else {
            cj["message"] = "ground-state shift is not monotone in l_P; no fit reported";
            c.warn("ground-state shift is not monotone in l_P; no fit reported");
        }
        if (gaussian_pt) cj["max_residual"] = detail::to_json(residual);
        c.summary()["convergence"] = cj;
        Json sc = check(slope, slope_tol, monotone && std::abs(slope - slope_target) <= slope_tol, "|slope-target|<=");
        sc["target"] = slope_target;
        c.checks["convergence_slope"] = sc;

        if (oracle_ref && gaussian_pt) {
            std::size_t ref = 0;
            for (std::size_t i = 0; i < l_values.size(); ++i)
                if (std::abs(l_values[i] - *oracle_ref) <= 1e-12 * *oracle_ref) ref = i;
            const double scale = std::abs(diag_all[ref][0]);
            double worst_ratio = 0;
            for (std::size_t i = 0; i < l_values.size(); ++i) {
                const double bound = oracle_factor * std::pow(l_values[i] / *oracle_ref, 4) * scale;
                worst_ratio = std::max(worst_ratio, residual[i] / bound);
            }
            Json oc = check_le(worst_ratio, 1.0);
            oc["reference_l"] = *oracle_ref;
            oc["factor"] = oracle_factor;
            oc["bound"] = "factor * (l / reference_l)^4 * |shift_diag(reference_l)|";
            c.checks["perturbation_oracle"] = oc;
        }
    }

    if (interior) {
        Json ext = Json::array();
        double least = std::numeric_limits<double>::infinity();
        for (const WaveFunction& psi : s.eigenvectors) {
            const double m = (interval_mass(psi, g.x_min(), interior->first) +
                              interval_mass(psi, interior->second, g.x_max() + g.spacing())) /
                             psi.norm_squared();
            ext.push_back(m);
            least = std::min(least, m);
        }
        c.summary()["exterior_mass"] = ext;
        Json ec = check_gt(least, exterior_tol);
        ec["interval"] = Json::array({interior->first, interior->second});
        c.checks["exterior_mass"] = ec;
    }

    if (grid_check) {
        const GridStability gs = grid_stability(vc.variant, v, grid_check->n_points, g.x_min(), g.x_max(), p,
                                                grid_check->levels, vc.options);
        const Eigen::VectorXd& change = grid_check->richardson ? gs.extrapolated_change : gs.direct_change;
        Json gj{{"sizes", Json::array({gs.sizes[0], gs.sizes[1], gs.sizes[2]})},
                {"direct_change", detail::to_json(gs.direct_change)},
                {"extrapolated", detail::to_json(gs.extrapolated)},
                {"extrapolated_change", detail::to_json(gs.extrapolated_change)},
                {"measure", grid_check->richardson ? "richardson" : "direct"}};
        c.summary()["grid_stability"] = gj;
        c.checks["grid_stability"] = check_le(change.maxCoeff(), grid_check->tolerance);
    }

    if (compare) {
        const OperatorMatrix hc = build_hamiltonian(compare->variant, v, g, p, compare->options);
        const SpectrumResult sc = diagonalize(hc, n_levels, dopt);
        double worst = 0;
        for (std::size_t j = 0; j < n_levels; ++j) {
            const auto i = static_cast<Eigen::Index>(j);
            worst = std::max(worst, std::abs(s.eigenvalues[i] - sc.eigenvalues[i]) /
                                        std::max(1.0, std::abs(sc.eigenvalues[i])));
        }
        c.summary()["compare"] = Json{{"variant", compare->resolved}, {"levels", detail::to_json(sc.eigenvalues)}};
        c.checks["compare_levels"] = check_le(worst, compare_tol);
    }
}

// ---------------------------------------------------------------- evolve

inline void run_evolve(Context& c) {
    const ModelParams p = read_model(c.top);
    const Grid1D g = read_grid(c.top);
    const PotentialSpec v = read_potential(c.top.block("potential"), p);
    const VariantChoice vc = read_variant(c.top.block("variant"), p);

    const Block b = c.top.block("evolve");
    const PacketSpec init = read_packet(b.block("initial"), {"gaussian", "eigenstate", "random_bandlimited"});
    PropagationConfig cfg;
    cfg.dt = b.number("dt");
    cfg.n_steps = b.count("n_steps", 100);
    cfg.store_every = b.count("store_every", 1);
    cfg.method = b.choice("method", {"exact_eigenbasis", "crank_nicolson"}, std::string("exact_eigenbasis")) ==
                         "exact_eigenbasis"
                     ? PropagationMethod::exact_eigenbasis
                     : PropagationMethod::crank_nicolson;
    detail::validated(b, [&] { cfg.validate(); });
    const double norm_tol = b.number("norm_tolerance", 1e-8);
    const double energy_tol = b.number("energy_tolerance", 1e-8);
    const double boundary_tol = b.number("boundary_tolerance", 1e-10);

    std::optional<PropagationConfig> cn;
    double cn_tol = 1e-6;
    if (auto cb = b.optional_block("crank_nicolson_check")) {
        PropagationConfig k;
        k.dt = cb->number("dt");
        k.n_steps = cb->count("n_steps", 1000);
        k.store_every = k.n_steps;
        detail::validated(*cb, [&] { k.validate(); });
        cn_tol = cb->number("tolerance", 1e-6);
        cb->finish();
        cn = k;
    }
    std::optional<double> smear_tol;
    if (auto sb = b.optional_block("smear")) {
        smear_tol = sb->number("tolerance", 1e-6);
        sb->finish();
    }
    b.finish();
    c.top.finish();

    const OperatorMatrix h = build_hamiltonian(vc.variant, v, g, p, vc.options);
    c.warn(h.warnings);
    WaveFunction psi0 = WaveFunction::zeros(g);
    if (init.kind == "gaussian") {
        psi0 = gaussian_packet(g, init.x0, init.sigma, init.p0, p.hbar);
    } else if (init.kind == "eigenstate") {
        psi0 = diagonalize(h, init.level + 1).eigenvectors[init.level];
    } else {
        std::mt19937_64 rng(c.seed);
        psi0 = random_bandlimited_state(g, p, rng);
    }

    const Trajectory tr = propagate(psi0, h, cfg);
    Csv obs{{"time[T]", "norm[1]", "energy[E]", "mean_x[L]", "delta_x[L]", "mean_p[P]", "delta_p[P]"}, {}};
    for (const Frame& f : tr.frames) {
        const Observables o = observables(f.psi, p.hbar);
        obs.rows.push_back({f.time, f.norm, f.energy, o.mean_x, o.delta_x, o.mean_p, o.delta_p});
    }
    c.out.tables["observables.csv"] = obs;
    c.summary()["model"] = model_json(p);
    c.summary()["variant"] = vc.resolved;
    c.summary()["method"] = to_string(cfg.method);
    c.summary()["frames"] = tr.frames.size();
    c.summary()["initial"] = detail::observables_json(observables(psi0, p.hbar));
    c.summary()["final"] = detail::observables_json(observables(tr.final_state(), p.hbar));
    c.summary()["initial_energy"] = tr.frames.front().energy;
    c.summary()["norm_drift"] = tr.norm_drift;
    c.summary()["energy_drift"] = tr.energy_drift;
    c.checks["norm_drift"] = check_le(tr.norm_drift, norm_tol);
    c.checks["energy_drift"] = check_le(tr.energy_drift, energy_tol);
    double edge = 0;
    for (const Frame& f : tr.frames) edge = std::max(edge, boundary_mass(f.psi));
    c.checks["boundary_mass"] = check_le(edge, boundary_tol);

    if (cn) {
        PropagationConfig k = *cn;
        k.method = PropagationMethod::exact_eigenbasis;
        const WaveFunction exact = propagate(psi0, h, k).final_state();
        k.method = PropagationMethod::crank_nicolson;
        const WaveFunction approx = propagate(psi0, h, k).final_state();
        const double diff = detail::relative_l2(approx, exact);
        c.summary()["crank_nicolson"] = Json{{"dt", k.dt}, {"n_steps", k.n_steps}, {"relative_difference", diff}};
        c.checks["crank_nicolson_agreement"] = check_le(diff, cn_tol);
    }

    if (smear_tol) {
        const WaveFunction chi = transform(psi0, TransformDirection::position_to_momentum, p.hbar);
        const WaveFunction back =
            transform(smear_packet(chi, p), TransformDirection::momentum_to_position, p.hbar);
        const double before = observables(psi0, p.hbar).delta_x;
        const double after = observables(back, p.hbar).delta_x;
        Json sj{{"delta_x_before", before}, {"delta_x_after", after}};
        if (init.kind == "gaussian" && init.p0 == 0.0) {
            const double expect = std::sqrt(before * before + p.l_P * p.l_P / 4.0);
            sj["delta_x_expected"] = expect;
            c.checks["smeared_width"] = check_le(std::abs(after / expect - 1.0), *smear_tol);
        } else {
            c.warn("smeared width oracle needs a Gaussian packet with p0 = 0; check skipped");
        }
        c.summary()["smear"] = sj;
    }
}

// ---------------------------------------------------------------- bandlimit-audit

inline void run_bandlimit_audit(Context& c) {
    const ModelParams p = read_model(c.top);
    const Grid1D g = read_grid(c.top);
    std::optional<PotentialSpec> v;
    if (auto pb = c.top.optional_block("potential")) v = read_potential(*pb, p);
    const Block b = c.top.block("bandlimit_audit");

    struct Idem {
        std::size_t states;
        double tol, kernel_tol;
    };
    std::optional<Idem> idem;
    if (auto ib = b.optional_block("idempotence")) {
        idem = Idem{ib->count("states", 1000), ib->number("tolerance", 1e-10), ib->number("kernel_tolerance", 1e-8)};
        ib->finish();
    }
    std::optional<std::pair<std::size_t, double>> unc;
    if (auto ub = b.optional_block("uncertainty")) {
        unc = std::make_pair(ub->count("states", 1000), ub->number("bound", 1.0));
        ub->finish();
    }
    std::optional<PacketSpec> leak;
    if (auto lb = b.optional_block("leakage")) {
        leak = read_packet(*lb, {"gaussian"});
        if (!v) lb->fail("leakage needs a 'potential' block");
    }
    std::optional<std::pair<double, double>> pw;
    if (auto wb = b.optional_block("paley_wiener")) {
        pw = std::make_pair(wb->number("half_width"), wb->number("tolerance", 1e-12));
        wb->check(pw->first > 0 && pw->first < 0.5 * g.length(), "half_width", "must be positive and inside the domain");
        wb->finish();
    }
    b.finish();
    c.top.finish();
    if (!idem && !unc && !leak && !pw) b.fail("bandlimit_audit: no audit selected");
    require_below_nyquist(g, p, "bandlimit-audit");

    std::mt19937_64 rng(c.seed);
    c.summary()["model"] = model_json(p);
    c.summary()["band_modes"] = 2 * band_half_count(g, p) + 1;

    if (idem) {
        const OperatorMatrix k = sinc_kernel_matrix(g, p);
        double worst = 0, worst_kernel = 0;
        for (std::size_t s = 0; s < idem->states; ++s) {
            const WaveFunction psi = random_state(g, rng);
            const WaveFunction once = project(psi, p).first;
            const WaveFunction twice = project(once, p).first;
            worst = std::max(worst, (twice.amplitudes - once.amplitudes).norm() / psi.amplitudes.norm());
            const Eigen::VectorXcd k1 = k.entries * psi.amplitudes;
            const Eigen::VectorXcd k2 = k.entries * k1;
            worst_kernel = std::max(worst_kernel, (k2 - k1).norm() / psi.amplitudes.norm());
        }
        c.summary()["idempotence"] = Json{{"states", idem->states}, {"max_defect", worst}, {"max_kernel_defect", worst_kernel}};
        c.checks["idempotence"] = check_le(worst, idem->tol);
        c.checks["kernel_idempotence"] = check_le(worst_kernel, idem->kernel_tol);
    }

    if (unc) {
        Csv t{{"state", "delta_x[L]", "ratio[1]"}, {}};
        double least = std::numeric_limits<double>::infinity();
        std::size_t violations = 0;
        for (std::size_t s = 0; s < unc->first; ++s) {
            const UncertaintyCheck u = uncertainty_bound_check(random_bandlimited_state(g, p, rng), p);
            t.rows.push_back({static_cast<double>(s), u.delta_x, u.ratio});
            least = std::min(least, u.ratio);
            if (!u.satisfied) ++violations;
        }
        c.out.tables["uncertainty.csv"] = t;
        c.summary()["uncertainty"] = Json{{"states", unc->first},
                                          {"min_ratio", least},
                                          {"violations", violations},
                                          {"bound", p.hbar / (4.0 * p.beta)}};
        c.checks["uncertainty_bound"] = check_ge(least, unc->second);
    }

    if (leak) {
        const WaveFunction psi0 = project(gaussian_packet(g, leak->x0, leak->sigma, leak->p0, p.hbar), p).first.normalized();
        const double l = projection_leakage(psi0, *v, p);
        c.summary()["leakage"] = Json{{"potential", v->name()}, {"relative_leakage", l}};
    }

    if (pw) {
        const double a = pw->first;
        const WaveFunction bump = WaveFunction::from_function(g, [a](double x) {
            const double u = x / a;
            return cplx(std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0);
        });
        const WaveFunction pb = project(bump, p).first;
        const double exterior =
            (interval_mass(pb, g.x_min(), -a) + interval_mass(pb, a, g.x_max() + g.spacing())) / pb.norm_squared();
        c.summary()["paley_wiener"] = Json{{"half_width", a}, {"exterior_mass", exterior}};
        c.checks["paley_wiener_exterior_mass"] = check_gt(exterior, pw->second);
    }
}

// ---------------------------------------------------------------- deconvolve

inline void run_deconvolve(Context& c) {
    const ModelParams p = read_model(c.top);
    const Grid1D g = read_grid(c.top);
    const Block b = c.top.block("deconvolve");
    const PacketSpec in = read_packet(b.block("input"), {"gaussian"});
    std::vector<double> orders_raw = b.numbers("orders", {1, 2, 4, 8});
    std::vector<int> orders;
    for (double o : orders_raw) {
        b.check(o >= 1 && o == std::floor(o) && o <= 64, "orders", "entries must be integers in [1, 64]");
        orders.push_back(static_cast<int>(o));
    }
    const double spectral_tol = b.number("spectral_tolerance", 1e-8);
    const bool series_check = b.has("series_tolerance");
    const double series_tol = b.number("series_tolerance", 0.0);
    DeconvolutionConfig base;
    base.amplification_limit = b.number("amplification_limit", 1e3);
    base.k_max = b.number("k_max", 0.0);
    b.finish();
    c.top.finish();

    const WaveFunction smooth = gaussian_packet(g, in.x0, in.sigma, in.p0, p.hbar);
    const WaveFunction banded = project(smooth, p).first;

    std::vector<std::string> w;
    const WaveFunction tilde_b = gaussian_smooth(banded, p, &w);
    c.warn(w);
    DeconvolutionConfig sc = base;
    sc.method = DeconvolutionMethod::spectral;
    const DeconvolutionResult rs = deconvolve(tilde_b, p, sc);
    c.warn(rs.warnings);
    const double spectral_err = detail::relative_sup(rs.psi, banded);
    c.summary()["spectral"] = Json{{"relative_error", spectral_err},
                                   {"amplification", rs.amplification},
                                   {"discarded_fraction", rs.discarded_fraction}};
    c.checks["spectral_round_trip"] = check_le(spectral_err, spectral_tol);

    const WaveFunction tilde = gaussian_smooth(smooth, p);
    Csv t{{"n_max", "relative_error[1]"}, {}};
    std::vector<double> errors;
    for (int n : orders) {
        DeconvolutionConfig hc = base;
        hc.method = DeconvolutionMethod::hermite_series;
        hc.n_max = n;
        const DeconvolutionResult r = deconvolve(tilde, p, hc);
        c.warn(r.warnings);
        errors.push_back(detail::relative_sup(r.psi, smooth));
        t.rows.push_back({static_cast<double>(n), errors.back()});
    }
    c.out.tables["series.csv"] = t;
    double worst_ratio = 0;
    for (std::size_t i = 1; i < errors.size(); ++i) worst_ratio = std::max(worst_ratio, errors[i] / errors[i - 1]);
    c.summary()["model"] = model_json(p);
    c.summary()["series"] = Json{{"orders", detail::to_json(orders_raw)}, {"relative_error", detail::to_json(errors)}};
    c.summary()["l_over_dx"] = p.l_P / g.spacing();
    if (errors.size() >= 2) {
        Json dc = check_lt(worst_ratio, 1.0);
        dc["meaning"] = "max over consecutive orders of error(n_next) / error(n)";
        c.checks["series_strictly_decreasing"] = dc;
    }
    if (series_check) c.checks["series_final_error"] = check_le(errors.back(), series_tol);
}

// ---------------------------------------------------------------- algebra-check

inline void run_algebra_check(Context& c) {
    const ModelParams p = read_model(c.top);
    const Block b = c.top.block("algebra_check");
    std::vector<MapTag> maps;
    for (const std::string& m : b.strings("maps", {"tan", "tanh", "sin"}))
        maps.push_back(detail::validated(b, [&] { return map_tag_from_string(m); }));
    const std::size_t n_points = b.count("lattice_points", 1024);
    const double half_width = b.number("half_width", 3.0);
    const double edge_fraction = b.number("edge_fraction", 0.95);
    const double radius_fraction = b.number("bump_radius_fraction", 0.6);
    const double center_fraction = b.number("bump_center_fraction", 0.0);
    const double tol = b.number("tolerance", 1e-6);
    const double min_order = b.number("min_order", 7.0);
    const std::vector<double> disp = b.numbers("dispersion_values", {});
    b.check(edge_fraction > 0 && edge_fraction < 1, "edge_fraction", "must lie in (0, 1)");
    b.finish();
    c.top.finish();

    Csv t{{"map", "residual_stated[1]", "residual_derived[1]", "residual_derived_coarse[1]", "observed_order[1]"}, {}};
    Json res = Json::object();
    for (MapTag tag : maps) {
        const DeformationMap m = make_map(tag, p);
        const double edge = std::min(half_width, edge_fraction * m.P_limit());
        const Grid1D lattice = detail::validated(b, [&] { return Grid1D::make(n_points, -edge, edge); });
        const Bump bump{center_fraction * edge, radius_fraction * edge};
        const CommutatorReport r = commutator_residual(m, lattice, bump, p);
        t.rows.push_back({r.map, r.residual_stated, r.residual_derived, r.residual_derived_coarse, r.observed_order});
        res[r.map] = Json{{"lattice_half_width", edge},
                          {"residual_stated", r.residual_stated},
                          {"residual_derived", r.residual_derived},
                          {"residual_derived_coarse", r.residual_derived_coarse},
                          {"observed_order", r.observed_order}};
        c.checks["commutator_stated_" + r.map] = check_le(r.residual_stated, tol);
        c.checks["commutator_derived_" + r.map] = check_le(r.residual_derived, tol);
        c.checks["fd_order_" + r.map] = check_ge(r.observed_order, min_order);
    }
    c.out.tables["commutator.csv"] = t;
    c.summary()["commutator"] = res;
    c.summary()["model"] = model_json(p);

    if (!disp.empty()) {
        Csv d{{"P[P]"}, {}};
        for (MapTag tag : maps) d.header.push_back("T_" + to_string(tag) + "[E]");
        for (double P : disp) {
            std::vector<Cell> row{P};
            for (MapTag tag : maps) {
                const DeformationMap m = make_map(tag, p);
                row.push_back(std::abs(P) < m.P_limit() ? deformed_dispersion(tag, {P}, p).energy[0] : detail::nan);
            }
            d.rows.push_back(row);
        }
        c.out.tables["dispersion.csv"] = d;
    }
}

// ---------------------------------------------------------------- orbit

inline void run_orbit(Context& c) {
    const ModelParams p = read_model(c.top);
    const Block b = c.top.block("orbit");

    struct Supp {
        double mass, speed, lower, upper;
    };
    std::optional<Supp> supp;
    if (auto sb = b.optional_block("suppression")) {
        Supp s{sb->number("mass", p.mass), sb->number("speed"), 1e55, 1e57};
        const std::vector<double> range = sb->numbers("exponent_range", {1e55, 1e57});
        sb->check(range.size() == 2 && range[0] <= range[1], "exponent_range", "must be [lower, upper]");
        s.lower = range[0];
        s.upper = range[1];
        sb->finish();
        supp = s;
    }
    struct Comp {
        double constituent_mass, alpha;
        bool apply;
    };
    std::optional<Comp> comp;
    if (auto cb = b.optional_block("composite")) {
        comp = Comp{cb->number("constituent_mass"), cb->number("alpha", 1.0), cb->boolean("apply_to_orbit", true)};
        cb->check(comp->constituent_mass > 0, "constituent_mass", "must be positive");
        cb->finish();
    }

    struct Run {
        ClassicalPotential pot;
        ClassicalState s0;
        double t_end;
        OrbitOptions opt;
        bool reference;
        double deviation_factor, perihelion_factor, energy_factor;
    };
    std::optional<Run> run;
    if (auto tb = b.optional_block("trajectory")) {
        Run r;
        const Block pb = tb->block("potential");
        const std::string kind = pb.choice("kind", {"kepler", "harmonic"});
        r.pot = detail::validated(pb, [&] {
            return kind == "kepler" ? ClassicalPotential::kepler(pb.number("strength"))
                                    : ClassicalPotential::harmonic(pb.number("omega"));
        });
        pb.finish();
        const Block ib = tb->block("initial");
        const std::vector<double> x = ib.numbers("position");
        const std::vector<double> q = ib.numbers("momentum");
        ib.finish();
        r.s0 = detail::validated(ib, [&] {
            return ClassicalState::make(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())),
                                        Eigen::Map<const Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size())));
        });
        const bool has_t = tb->has("t_end");
        const bool has_periods = tb->has("periods");
        if (has_t == has_periods) tb->fail("trajectory: give exactly one of 't_end' or 'periods'");
        if (has_t) {
            r.t_end = tb->number("t_end");
        } else {
            if (r.pot.kind != ClassicalPotential::Kind::kepler) tb->fail("'periods' needs a kepler potential");
            const double k = r.pot.strength;
            const double e = r.s0.momentum.squaredNorm() / (2.0 * p.mass) - k / r.s0.position.norm();
            if (!(e < 0)) tb->fail("'periods' needs a bound orbit (negative energy)");
            const double a = -k / (2.0 * e);
            r.t_end = tb->number("periods") * 2.0 * pi * std::sqrt(p.mass * a * a * a / k);
        }
        static const std::vector<std::string> dyn{"modified", "newtonian", "theta_potential_only",
                                                  "theta_full_hamiltonian"};
        const std::string d = tb->choice("dynamics", dyn, std::string("modified"));
        r.opt.dynamics = d == "modified"               ? Dynamics::modified
                         : d == "newtonian"            ? Dynamics::newtonian
                         : d == "theta_potential_only" ? Dynamics::theta_potential_only
                                                       : Dynamics::theta_full_hamiltonian;
        r.opt.tol = tb->number("tol", 1e-10);
        r.opt.samples = tb->count("samples", 2000);
        r.energy_factor = tb->number("energy_factor", 100.0);
        r.reference = false;
        r.deviation_factor = r.perihelion_factor = 10.0;
        if (auto rb = tb->optional_block("newtonian_reference")) {
            r.reference = true;
            r.deviation_factor = rb->number("deviation_factor", 10.0);
            r.perihelion_factor = rb->number("perihelion_factor", 10.0);
            rb->finish();
        }
        tb->finish();
        run = r;
    }
    b.finish();
    c.top.finish();
    if (!supp && !run) b.fail("orbit: needs a 'suppression' or 'trajectory' block");

    c.summary()["model"] = model_json(p);
    ModelParams q = p;

    if (supp) {
        const SuppressionReport r = suppression_factor(supp->mass, supp->speed, p);
        const bool in_range = r.exponent >= supp->lower && r.exponent <= supp->upper;
        c.summary()["suppression"] = Json{{"mass", supp->mass},
                                          {"speed", supp->speed},
                                          {"momentum", r.momentum},
                                          {"exponent", r.exponent},
                                          {"log10_factor", r.log10_factor},
                                          {"factor", r.factor},
                                          {"claimed_order_consistent", r.exponent >= 1e55}};
        c.checks["suppression_exponent_range"] = Json{{"value", r.exponent},
                                                      {"lower", supp->lower},
                                                      {"upper", supp->upper},
                                                      {"relation", "lower<=value<=upper"},
                                                      {"pass", in_range}};
        if (comp) {
            const double n = supp->mass / comp->constituent_mass;
            const double l_eff = effective_planck_length(p.l_P, n, comp->alpha);
            ModelParams e = p;
            e.l_P = l_eff;
            const SuppressionReport re = suppression_factor(supp->mass, supp->speed, e);
            c.summary()["composite"] = Json{{"constituents", n},
                                            {"alpha", comp->alpha},
                                            {"l_eff", l_eff},
                                            {"exponent", re.exponent},
                                            {"factor", re.factor}};
            if (comp->apply) q.l_P = l_eff;
        }
    } else if (comp) {
        b.fail("orbit.composite needs orbit.suppression for the body mass");
    }

    if (run) {
        const OrbitResult r = integrate_orbit(run->s0, run->pot, q, run->t_end, run->opt);
        c.warn(r.warnings);
        const auto dim = static_cast<std::size_t>(run->s0.dim());
        static const char* axes[] = {"x", "y", "z"};
        Csv t{{"time[T]"}, {}};
        for (std::size_t i = 0; i < dim; ++i) t.header.push_back(std::string(axes[i]) + "[L]");
        for (std::size_t i = 0; i < dim; ++i) t.header.push_back(std::string("p") + axes[i] + "[P]");
        t.header.push_back("energy[E]");
        for (std::size_t k = 0; k < r.frames.size(); ++k) {
            const ClassicalState& s = r.frames[k];
            std::vector<Cell> row{s.time};
            for (Eigen::Index i = 0; i < s.dim(); ++i) row.push_back(s.position[i]);
            for (Eigen::Index i = 0; i < s.dim(); ++i) row.push_back(s.momentum[i]);
            row.push_back(r.energy[k]);
            t.rows.push_back(row);
        }
        c.out.tables["trajectory.csv"] = t;
        Csv ph{{"index", "time[T]", "angle[1]", "radius[L]"}, {}};
        for (std::size_t k = 0; k < r.perihelion_times.size(); ++k)
            ph.rows.push_back({static_cast<double>(k), r.perihelion_times[k], r.perihelion_angles[k],
                               r.perihelion_radii[k]});
        c.out.tables["perihelia.csv"] = ph;

        Json oj{{"dynamics", to_string(run->opt.dynamics)},
                {"potential", run->pot.name()},
                {"t_end", run->t_end},
                {"tol", run->opt.tol},
                {"samples", run->opt.samples},
                {"l_P_used", q.l_P},
                {"initial_suppression_exponent", suppression_exponent(run->s0.momentum.norm(), q)},
                {"energy_drift", r.energy_drift},
                {"perihelia", r.perihelion_times.size()},
                {"cutoff_crossings", r.cutoff_crossings}};
        c.checks["energy_conservation"] = check_le(r.energy_drift, run->energy_factor * run->opt.tol);

        if (run->opt.dynamics == Dynamics::theta_full_hamiltonian && run->s0.momentum.norm() > q.beta) {
            double moved = 0;
            for (const ClassicalState& s : r.frames)
                moved = std::max(moved, (s.position - run->s0.position).norm() + (s.momentum - run->s0.momentum).norm());
            c.checks["theta_freeze"] = check_le(moved, 0.0);
        }

        if (run->reference) {
            OrbitOptions ro = run->opt;
            ro.dynamics = Dynamics::newtonian;
            const OrbitResult ref = integrate_orbit(run->s0, run->pot, q, run->t_end, ro);
            const double dev = max_relative_deviation(r, ref);
            oj["newtonian_deviation"] = dev;
            c.checks["newtonian_deviation"] = check_le(dev, run->deviation_factor * run->opt.tol);
            const std::size_t np = std::min(r.perihelion_angles.size(), ref.perihelion_angles.size());
            double drift = r.perihelion_angles.size() == ref.perihelion_angles.size()
                               ? 0.0
                               : std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < np; ++k)
                drift = std::max(drift, std::abs(r.perihelion_angles[k] - ref.perihelion_angles[k]));
            oj["perihelion_angle_difference"] = drift;
            c.checks["perihelion_drift"] = check_le(drift, run->perihelion_factor * run->opt.tol);
        }
        c.summary()["orbit"] = oj;
    }
}

// ---------------------------------------------------------------- dispatch

inline Outputs run_experiment(const std::string& sub, const Config& cfg, std::optional<std::uint64_t> seed_override);

namespace detail {

/// Follows "a.b.0.c" through objects and arrays.
inline const Json* find_path(const Json& root, const std::string& path) {
    const Json* cur = &root;
    std::size_t start = 0;
    while (start <= path.size()) {
        const std::size_t dot = path.find('.', start);
        const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (cur->is_object()) {
            auto it = cur->find(part);
            if (it == cur->end()) return nullptr;
            cur = &*it;
        } else if (cur->is_array()) {
            if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) return nullptr;
            const std::size_t i = std::stoul(part);
            if (i >= cur->size()) return nullptr;
            cur = &(*cur)[i];
        } else {
            return nullptr;
        }
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return cur;
}

inline double as_number(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_boolean()) return j.get<bool>() ? 1.0 : 0.0;
    return nan;
}

}  // namespace detail

inline void run_sweep(Context& c, const Config& cfg) {
    const Block b = c.top.block("sweep");
    std::vector<std::string> inner;
    for (const std::string& s : subcommands())
        if (s != "sweep") inner.push_back(s);
    const std::string sub = b.choice("subcommand", inner);
    const std::string param = b.string("parameter");
    const std::vector<double> values = b.numbers("values");
    b.check(!values.empty(), "values", "must not be empty");
    const std::vector<std::string> outputs = b.strings("outputs", {});
    b.check(!outputs.empty(), "outputs", "list at least one summary path");
    const std::size_t workers = std::max<std::size_t>(1, b.count("workers", 1));
    b.finish();
    // The remaining top-level keys belong to the swept subcommand and are
    // validated by it.
    c.top.has("experiment");
    c.top.has("seed");

    Config base{YAML::Clone(cfg.root), cfg.file};
    base.root.remove("sweep");
    base.root.remove("experiment");
    std::vector<Config> points;
    for (double v : values) points.push_back(base.with(param, v));

    std::vector<Outputs> results(points.size());
    for (std::size_t start = 0; start < points.size(); start += workers) {
        const std::size_t stop = std::min(points.size(), start + workers);
        std::vector<std::future<Outputs>> batch;
        for (std::size_t i = start; i < stop; ++i)
            batch.push_back(std::async(std::launch::async,
                                       [&, i] { return run_experiment(sub, points[i], c.seed); }));
        for (std::size_t i = start; i < stop; ++i) results[i] = batch[i - start].get();
    }

    Csv t{{param}, {}};
    for (const std::string& o : outputs) t.header.push_back(o);
    Json pts = Json::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::vector<Cell> row{values[i]};
        Json oj = Json::object();
        for (const std::string& o : outputs) {
            const Json* j = detail::find_path(results[i].summary, o);
            if (!j) b.fail("sweep.outputs: '" + o + "' is not a path in the " + sub + " summary");
            oj[o] = *j;
            row.push_back(detail::as_number(*j));
        }
        t.rows.push_back(row);
        pts.push_back(Json{{"value", values[i]}, {"outputs", oj}, {"all_pass", results[i].summary["all_pass"]}});
        for (const auto& w : results[i].summary["warnings"]) c.warn(w.get<std::string>());
    }
    c.out.tables["sweep.csv"] = t;
    c.summary()["sweep"] = Json{{"subcommand", sub}, {"parameter", param}, {"points", pts}};
    bool all = true;
    for (const Outputs& r : results) all = all && r.summary["all_pass"].get<bool>();
    c.checks["all_points_pass"] = Json{{"value", all}, {"relation", "every point passes its own checks"}, {"pass", all}};
}

inline bool valid_experiment_name(const std::string& s) {
    return !s.empty() && s != "." && s != ".." &&
           s.find_first_not_of("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_.-") == std::string::npos;
}

/// Runs one subcommand in memory.
inline Outputs run_experiment(const std::string& sub, const Config& cfg, std::optional<std::uint64_t> seed_override) {
    Context c{cfg.top(), sub, 0, {}, Json::object(), {}};
    const std::string name = c.top.string("experiment", sub);
    if (!valid_experiment_name(name))
        c.top.fail("experiment name '" + name + "' may only contain letters, digits, '_', '.' and '-'");
    const std::int64_t seed = c.top.integer("seed", 0);
    if (seed < 0) c.top.fail("seed must be non-negative");
    c.seed = seed_override.value_or(static_cast<std::uint64_t>(seed));

    if (sub == "spectrum") run_spectrum(c);
    else if (sub == "evolve") run_evolve(c);
    else if (sub == "bandlimit-audit") run_bandlimit_audit(c);
    else if (sub == "deconvolve") run_deconvolve(c);
    else if (sub == "algebra-check") run_algebra_check(c);
    else if (sub == "orbit") run_orbit(c);
    else if (sub == "sweep") run_sweep(c, cfg);
    else throw ConfigError("unknown subcommand '" + sub + "'");

    Json& s = c.summary();
    s["experiment"] = name;
    s["subcommand"] = sub;
    s["seed"] = c.seed;
    s["inputs"] = detail::yaml_to_json(cfg.root);
    s["checks"] = c.checks;
    bool all = true;
    for (const auto& [k, v] : c.checks.items()) all = all && v["pass"].get<bool>();
    s["all_pass"] = all;
    s["warnings"] = c.warnings;
    return std::move(c.out);
}

}  // namespace nonlocalqm::cli
