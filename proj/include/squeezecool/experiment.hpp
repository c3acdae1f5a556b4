#pragma once

// Experiment configuration (JSON, schema-checked), sweep orchestration and
// CSV / manifest output.

#include <squeezecool/continuum.hpp>
#include <squeezecool/error.hpp>
#include <squeezecool/metrics.hpp>
#include <squeezecool/oracle.hpp>
#include <squeezecool/parallel.hpp>
#include <squeezecool/singlemode.hpp>
#include <squeezecool/validate.hpp>

#include <json.hpp>

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace squeezecool {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::json;

enum class ExperimentKind { single_sweep, continuum_sweep, oracle, validate };
enum class Backend { gaussian, fock, both };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::single_sweep: return "single_sweep";
        case ExperimentKind::continuum_sweep: return "continuum_sweep";
        case ExperimentKind::oracle: return "oracle";
        case ExperimentKind::validate: return "validate";
    }
    return "?";
}

inline const char* to_string(Backend b) {
    switch (b) {
        case Backend::gaussian: return "gaussian";
        case Backend::fock: return "fock";
        case Backend::both: return "both";
    }
    return "?";
}

inline Backend parse_backend(const std::string& s) {
    if (s == "gaussian") return Backend::gaussian;
    if (s == "fock") return Backend::fock;
    if (s == "both") return Backend::both;
    throw Error("config", "backend must be gaussian, fock or both, got '" + s + "'");
}

struct SingleSweepConfig {
    SingleModeParams base;
    std::vector<double> Q_grid{1e5, 1e6, 1e7, 1e8};
    std::vector<double> ratios;
    SingleModeOptions options;

    SingleSweepConfig() {
        for (int i = 0; i < 25; ++i) ratios.push_back(0.04 * i);
    }
};

struct ContinuumSweepConfig {
    ContinuumParams base;
    std::vector<double> Q_grid{1e3, 1e4, 1e5, 1e6};
    PairOptions options{true, true};
    ContinuumDynamics dynamics = ContinuumDynamics::stroboscopic;
};

struct OracleConfig {
    FullModelParams full;
    std::vector<double> g_values{0.1, 0.05};
    std::vector<double> sideband_etas{0.05, 0.2};
    /// Shift the cavity reference by the correction-induced shift at each g.
    bool dispersive_retune = false;

    OracleConfig() {
        full.base.g = 0.1;
        full.base.Q = std::numeric_limits<double>::infinity();
    }
};

struct ValidateConfig {
    int equivalence_cases = 20;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::single_sweep;
    Backend backend = Backend::gaussian;
    std::uint64_t seed = 1;
    std::string output;
    SingleSweepConfig single;
    ContinuumSweepConfig continuum;
    OracleConfig oracle;
    ValidateConfig validate;
};

// ---- Schema-checked reading ----------------------------------------------

namespace detail {

/// Reads the keys of one JSON object; unknown keys are an error.
class ObjectReader {
public:
    ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        require(j.is_object(), "config", path_ + " must be an object");
    }

    /// Call after the last key has been read.
    void finish() const {
        for (const auto& [k, v] : j_.items())
            require(seen_.count(k) > 0, "config", "unknown key " + path_ + "." + k);
    }

    void number(const char* key, double& out) {
        if (const Json* v = find(key)) {
            if (v->is_string() && (v->get<std::string>() == "inf" || v->get<std::string>() == "infinity")) {
                out = std::numeric_limits<double>::infinity();
                return;
            }
            require(v->is_number(), "config", path_ + "." + key + " must be a number");
            out = v->get<double>();
        }
    }

    void integer(const char* key, int& out) {
        if (const Json* v = find(key)) {
            require(v->is_number_integer(), "config", path_ + "." + key + " must be an integer");
            out = v->get<int>();
        }
    }

    void boolean(const char* key, bool& out) {
        if (const Json* v = find(key)) {
            require(v->is_boolean(), "config", path_ + "." + key + " must be a boolean");
            out = v->get<bool>();
        }
    }

    void string(const char* key, std::string& out) {
        if (const Json* v = find(key)) {
            require(v->is_string(), "config", path_ + "." + key + " must be a string");
            out = v->get<std::string>();
        }
    }

    void numbers(const char* key, std::vector<double>& out) {
        if (const Json* v = find(key)) {
            require(v->is_array() && !v->empty(), "config",
                    path_ + "." + key + " must be a non-empty array of numbers");
            out.clear();
            for (const auto& x : *v) {
                require(x.is_number(), "config", path_ + "." + key + " must hold numbers");
                out.push_back(x.get<double>());
            }
        }
    }

    const Json* object(const char* key) { return find(key); }

private:
    const Json* find(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline void read_single(const Json& j, SingleSweepConfig& c) {
    ObjectReader r(j, "single_mode");
    r.number("epsilon", c.base.epsilon);
    r.number("omega0", c.base.omega0);
    r.number("gamma_q", c.base.gamma_q);
    r.number("g", c.base.g);
    r.number("eta1", c.base.eta1);
    r.integer("fock_dim", c.base.fock_dim);
    r.numbers("Q_grid", c.Q_grid);
    r.numbers("eta2_over_eta1", c.ratios);
    r.boolean("include_corrections", c.options.include_corrections);
    r.boolean("include_loss", c.options.include_loss);
    r.boolean("correction_shifts", c.options.correction_shifts);
    r.finish();
    for (double q : c.Q_grid) require(q > 0.0, "config", "single_mode.Q_grid must be positive");
    for (double x : c.ratios)
        require(x >= 0.0 && x < 1.0, "config", "single_mode.eta2_over_eta1 must lie in [0, 1)");
    SingleModeParams probe = c.base;
    probe.eta2 = 0.0;
    probe.validate();
}

inline void read_continuum(const Json& j, ContinuumSweepConfig& c) {
    ObjectReader r(j, "continuum");
    ContinuumParams& p = c.base;
    r.number("epsilon", p.epsilon);
    r.number("omega_a", p.omega_a);
    r.number("omega_b", p.omega_b);
    r.number("alpha", p.alpha);
    r.number("delta_omega", p.delta_omega);
    r.number("nu_max", p.nu_max);
    r.integer("n_nu", p.n_nu);
    r.number("eta1", p.eta1);
    r.number("eta2", p.eta2);
    r.number("strobe_dt", p.strobe_dt);
    r.number("strobe_dt_factor", p.strobe_dt_factor);
    r.integer("fock_dim", p.fock_dim);
    r.number("omega_ref", p.omega_ref);
    r.number("freq_ratio_threshold", p.freq_ratio_threshold);
    std::string bar = "matched", dyn = "stroboscopic";
    r.string("bar", bar);
    r.string("dynamics", dyn);
    r.numbers("Q_grid", c.Q_grid);
    r.boolean("include_corrections", c.options.corrections);
    r.boolean("include_loss", c.options.loss);
    r.finish();
    require(bar == "matched" || bar == "drive", "config", "continuum.bar must be matched or drive");
    p.bar = bar == "matched" ? BarCoupling::matched : BarCoupling::drive;
    require(dyn == "stroboscopic" || dyn == "averaged", "config",
            "continuum.dynamics must be stroboscopic or averaged");
    c.dynamics = dyn == "averaged" ? ContinuumDynamics::averaged : ContinuumDynamics::stroboscopic;
    for (double q : c.Q_grid) require(q > 0.0, "config", "continuum.Q_grid must be positive");
    require(p.fock_dim >= 2, "config", "continuum.fock_dim must be at least 2");
    p.validate();
}

inline void read_oracle(const Json& j, OracleConfig& c) {
    ObjectReader r(j, "oracle");
    SingleModeParams& b = c.full.base;
    r.number("epsilon", b.epsilon);
    r.number("omega0", b.omega0);
    r.number("gamma_q", b.gamma_q);
    r.number("eta1", b.eta1);
    r.number("eta2", b.eta2);
    r.number("Q", b.Q);
    r.numbers("g_values", c.g_values);
    r.numbers("sideband_etas", c.sideband_etas);
    r.number("T", c.full.T);
    r.number("stride", c.full.stride);
    r.integer("fock_dim", c.full.fock_dim);
    r.number("tol", c.full.tol);
    r.number("max_step_factor", c.full.max_step_factor);
    if (const Json* v = r.object("cavity_shift")) {
        if (v->is_string()) {
            require(v->get<std::string>() == "dispersive", "config",
                    "oracle.cavity_shift must be a number or \"dispersive\"");
            c.dispersive_retune = true;
        } else {
            require(v->is_number(), "config", "oracle.cavity_shift must be a number or \"dispersive\"");
            c.full.cavity_shift = v->get<double>();
        }
    }
    r.finish();
    for (double g : c.g_values) require(g > 0.0, "config", "oracle.g_values must be positive");
    b.g = c.g_values.front();
    b.validate();
    FullModelParams::from(b).validate();
}

}  // namespace detail

inline ExperimentConfig parse_config(const Json& j) {
    ExperimentConfig c;
    detail::ObjectReader r(j, "config");
    std::string kind, backend = "gaussian";
    r.string("kind", kind);
    r.string("backend", backend);
    r.string("output", c.output);
    double seed = 1.0;
    r.number("seed", seed);
    require(seed >= 0.0 && seed == std::floor(seed), "config", "seed must be a non-negative integer");
    c.seed = static_cast<std::uint64_t>(seed);
    if (kind == "single_sweep") c.kind = ExperimentKind::single_sweep;
    else if (kind == "continuum_sweep") c.kind = ExperimentKind::continuum_sweep;
    else if (kind == "oracle") c.kind = ExperimentKind::oracle;
    else if (kind == "validate") c.kind = ExperimentKind::validate;
    else throw Error("config", "kind must be single_sweep, continuum_sweep, oracle or validate");
    c.backend = parse_backend(backend);
    if (const Json* s = r.object("single_mode")) detail::read_single(*s, c.single);
    if (const Json* s = r.object("continuum")) detail::read_continuum(*s, c.continuum);
    if (const Json* s = r.object("oracle")) detail::read_oracle(*s, c.oracle);
    if (const Json* s = r.object("validate")) {
        detail::ObjectReader v(*s, "validate");
        v.integer("equivalence_cases", c.validate.equivalence_cases);
        v.finish();
        require(c.validate.equivalence_cases >= 2, "config", "validate.equivalence_cases must be >= 2");
    }
    r.finish();
    if (c.kind == ExperimentKind::continuum_sweep && c.backend != Backend::gaussian)
        require(c.continuum.dynamics == ContinuumDynamics::averaged, "config",
                "the fock backend needs continuum.dynamics = averaged");
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "config", "cannot open " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw Error("config", std::string("JSON parse error: ") + e.what());
    }
    return parse_config(j);
}

// ---- Output ---------------------------------------------------------------

/// Fixed-format number for CSV cells (deterministic across runs).
inline std::string fmt(double x) {
    if (x == 0.0) x = 0.0;
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : out_(path), columns_(header.size()) {
        require(static_cast<bool>(out_), "io", "cannot write " + path.string());
        row(header);
    }

    void row(const std::vector<std::string>& cells) {
        require(cells.size() == columns_, "io", "CSV row width does not match header");
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

private:
    std::ofstream out_;
    std::size_t columns_;
};

inline Json to_json(const std::vector<ValidityFlag>& flags) {
    Json a = Json::array();
    for (const auto& f : flags)
        a.push_back({{"name", f.name}, {"ratio", f.ratio}, {"threshold", f.threshold},
                     {"violated", f.violated()}});
    return a;
}

inline Json to_json(const SingleModeParams& p) {
    return {{"epsilon", p.epsilon}, {"omega0", p.omega0}, {"gamma_q", p.gamma_q}, {"g", p.g},
            {"eta1", p.eta1},       {"eta2", p.eta2},     {"Q", fmt(p.Q)},        {"fock_dim", p.fock_dim}};
}

inline Json resolved_config(const ExperimentConfig& c) {
    Json j{{"kind", to_string(c.kind)}, {"backend", to_string(c.backend)}, {"seed", c.seed}};
    switch (c.kind) {
        case ExperimentKind::single_sweep: {
            const auto& s = c.single;
            Json b = to_json(s.base);
            b.erase("eta2");
            b.erase("Q");
            b["Q_grid"] = s.Q_grid;
            b["eta2_over_eta1"] = s.ratios;
            b["include_corrections"] = s.options.include_corrections;
            b["include_loss"] = s.options.include_loss;
            b["correction_shifts"] = s.options.correction_shifts;
            j["single_mode"] = b;
            break;
        }
        case ExperimentKind::continuum_sweep: {
            const auto& s = c.continuum;
            const ContinuumParams& p = s.base;
            j["continuum"] = {{"epsilon", p.epsilon},
                              {"omega_a", p.omega_a},
                              {"omega_b", p.omega_b},
                              {"alpha", p.alpha},
                              {"delta_omega", p.delta_omega},
                              {"nu_max", p.nu_max},
                              {"n_nu", p.n_nu},
                              {"eta1", p.eta1},
                              {"eta2", p.eta2},
                              {"strobe_dt", p.strobe_dt},
                              {"strobe_dt_factor", p.strobe_dt_factor},
                              {"fock_dim", p.fock_dim},
                              {"omega_ref", p.reference()},
                              {"freq_ratio_threshold", p.freq_ratio_threshold},
                              {"bar", p.bar == BarCoupling::matched ? "matched" : "drive"},
                              {"dynamics", s.dynamics == ContinuumDynamics::averaged ? "averaged"
                                                                                      : "stroboscopic"},
                              {"Q_grid", s.Q_grid},
                              {"include_corrections", s.options.corrections},
                              {"include_loss", s.options.loss},
                              {"gamma_q", qubit_decay(p.alpha, p.epsilon)}};
            break;
        }
        case ExperimentKind::oracle: {
            const auto& o = c.oracle;
            Json b = to_json(o.full.base);
            b.erase("g");
            b.erase("fock_dim");
            b["g_values"] = o.g_values;
            b["sideband_etas"] = o.sideband_etas;
            b["T"] = o.full.T;
            b["stride"] = o.full.stride;
            b["fock_dim"] = o.full.fock_dim;
            b["tol"] = o.full.tol;
            b["max_step_factor"] = o.full.max_step_factor;
            if (o.dispersive_retune) b["cavity_shift"] = "dispersive";
            else b["cavity_shift"] = o.full.cavity_shift;
            j["oracle"] = b;
            break;
        }
        case ExperimentKind::validate:
            j["validate"] = {{"equivalence_cases", c.validate.equivalence_cases}};
            break;
    }
    return j;
}

// ---- Runners ----------------------------------------------------------------

struct RunResult {
    Json manifest;
    int exit_code = 0;
};

inline std::string flag_cell(const std::vector<ValidityFlag>& flags, const std::string& name) {
    for (const auto& f : flags)
        if (f.name == name) return f.violated() ? "1" : "0";
    return "0";
}

struct SinglePoint {
    double ratio = 0.0, Q = 0.0;
    SingleModeParams params;
    double kappa = 0.0, gamma_sq_re = 0.0;
    GaussianState state;
    double S_ideal = 0.0, occ_D = 0.0;
    bool trunc = false;
    double top_level = 0.0;
    std::optional<double> fock_rel_diff;
    std::vector<ValidityFlag> flags;
    std::string status = "ok";
};

inline SinglePoint single_point(const SingleSweepConfig& c, Backend backend, double Q, double ratio) {
    SinglePoint pt;
    pt.ratio = ratio;
    pt.Q = Q;
    SingleModeParams p = c.base;
    p.Q = Q;
    p.eta2 = ratio * p.eta1;
    pt.params = p;
    try {
        const SidebandDecomposition sd = sideband_decomposition(p);
        const EffectiveRates rates = effective_rates(p, sd);
        pt.kappa = rates.kappa;
        pt.gamma_sq_re = rates.gamma_sq.real();
        pt.S_ideal = -10.0 * std::log10(std::pow(sd.pair.u - sd.pair.v, 2));
        pt.flags = single_mode_validity(p);
        std::optional<GaussianState> gauss, fock;
        if (backend != Backend::fock) gauss = lyapunov_steady(single_mode_model(p, c.options));
        if (backend != Backend::gaussian) {
            const DensityMatrix rho = steady_state(build_single_mode_liouvillian(p, c.options));
            pt.top_level = max_top_level_population(rho.space(), rho.matrix());
            pt.trunc = pt.top_level > kTruncationThreshold;
            fock = moments_from_density(rho);
        }
        pt.state = gauss ? *gauss : *fock;
        if (gauss && fock) pt.fock_rel_diff = detail::rel_cov_diff(*fock, *gauss);
        pt.occ_D = occupation_D(pt.state, sd.pair);
    } catch (const Error& e) {
        pt.status = e.code() + ": " + e.what();
    }
    return pt;
}

inline RunResult run_single_sweep(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                                  unsigned jobs) {
    const SingleSweepConfig& c = cfg.single;
    std::vector<std::pair<double, double>> grid;
    for (double q : c.Q_grid)
        for (double r : c.ratios) grid.emplace_back(q, r);
    std::vector<SinglePoint> pts(grid.size());
    parallel_for(grid.size(), jobs, [&](std::size_t i) {
        pts[i] = single_point(c, cfg.backend, grid[i].first, grid[i].second);
    });

    CsvWriter csv(dir / "single_sweep.csv",
                  {"eta2_over_eta1", "Q", "kappa", "gamma_sq_re", "var_x", "var_p", "S_db",
                   "S_db_ideal", "occ_bare", "occ_D", "flag_gsq_over_gammaq", "flag_trunc"});
    Json points = Json::array();
    int failed = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const SinglePoint& p = pts[i];
        const bool ok = p.status == "ok";
        failed += ok ? 0 : 1;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const double vx = ok ? p.state.var_x(0) : nan, vp = ok ? p.state.var_p(0) : nan;
        csv.row({fmt(p.ratio), fmt(p.Q), fmt(p.kappa), fmt(p.gamma_sq_re), fmt(vx), fmt(vp),
                 fmt(ok && vx > 0 ? squeezing_db(vx) : nan), fmt(ok ? p.S_ideal : nan),
                 fmt(ok ? occupation(p.state, 0) : nan), fmt(ok ? p.occ_D : nan),
                 flag_cell(p.flags, "gsq_over_gammaq"), p.trunc ? "1" : "0"});
        Json pj{{"index", i}, {"eta2_over_eta1", p.ratio}, {"Q", p.Q}, {"status", p.status},
                {"validity_flags", to_json(p.flags)}};
        if (cfg.backend != Backend::gaussian) pj["fock_top_level_population"] = p.top_level;
        if (p.fock_rel_diff) pj["fock_vs_gaussian_rel_cov_diff"] = *p.fock_rel_diff;
        points.push_back(pj);
    }
    return {{{"outputs", {"single_sweep.csv"}}, {"rows", pts.size()}, {"failed_points", failed},
             {"points", points}},
            0};
}

inline std::string violated_names(const std::vector<ValidityFlag>& flags) {
    std::string s;
    for (const auto& f : flags)
        if (f.violated()) s += (s.empty() ? "" : ";") + f.name;
    return s.empty() ? "none" : s;
}

inline RunResult run_continuum_sweep(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                                     unsigned jobs) {
    const ContinuumSweepConfig& c = cfg.continuum;
    CsvWriter csv(dir / "continuum_sweep.csv",
                  {"nu", "Q", "u_nu", "v_nu", "gamma_sq_re", "gamma_sq_im", "occ_D", "occ_Dbar",
                   "var_Xnu", "S_db", "S_db_fig3_convention", "flags"});
    Json points = Json::array();
    int failed = 0;
    std::size_t rows = 0;
    for (double q : c.Q_grid) {
        ContinuumParams p = c.base;
        p.Q = q;
        const std::vector<double> nus = p.grid();
        std::vector<PairReport> reps(nus.size());
        std::vector<std::optional<double>> fock_diff(nus.size());
        BandOptions bo;
        bo.pair = c.options;
        bo.dynamics = c.dynamics;
        parallel_for(nus.size(), jobs, [&](std::size_t i) {
            PairReport& r = reps[i];
            try {
                r = pair_point(nus[i], p, bo);
                if (cfg.backend != Backend::gaussian) {
                    const GaussianModel m = averaged(pair_model(r.d_model, c.options),
                                                     pair_model(r.dbar_model, c.options));
                    const DensityMatrix rho =
                        steady_state(fock_spec(m, FockSpace::pair(p.fock_dim, p.fock_dim)));
                    const GaussianState f = moments_from_density(rho);
                    if (cfg.backend == Backend::both)
                        fock_diff[i] = detail::rel_cov_diff(f, r.state);
                    else {
                        r.state = f;
                        auto flags = r.report.validity_flags;
                        r.report = pair_report(f, r.d_model, r.dbar_model);
                        r.report.validity_flags = flags;
                    }
                    const double top = max_top_level_population(rho.space(), rho.matrix());
                    r.report.validity_flags.push_back({"fock_top_level", top, kTruncationThreshold});
                }
            } catch (const Error& e) {
                r = PairReport{};
                r.nu = nus[i];
                r.status = e.code() + ": " + e.what();
            }
        });
        for (std::size_t i = 0; i < reps.size(); ++i) {
            const PairReport& r = reps[i];
            const bool ok = r.status == "ok";
            failed += ok ? 0 : 1;
            const double nan = std::numeric_limits<double>::quiet_NaN();
            const SqueezingReport& s = r.report;
            csv.row({fmt(nus[i]), fmt(q), fmt(ok ? r.d_model.pair.u : nan),
                     fmt(ok ? r.d_model.pair.v : nan), fmt(ok ? r.d_model.gamma_sq.real() : nan),
                     fmt(ok ? r.d_model.gamma_sq.imag() : nan), fmt(ok ? s.occ_D : nan),
                     fmt(ok ? s.occ_Dbar.value_or(nan) : nan), fmt(ok ? s.var_x : nan),
                     fmt(ok ? s.S_db : nan), fmt(ok ? squeezing_db(s.var_x) : nan),
                     ok ? violated_names(s.validity_flags) : "error"});
            Json pj{{"nu", nus[i]}, {"Q", q}, {"status", r.status},
                    {"validity_flags", to_json(s.validity_flags)}};
            if (fock_diff[i]) pj["fock_vs_gaussian_rel_cov_diff"] = *fock_diff[i];
            points.push_back(pj);
            ++rows;
        }
    }
    Json sens = Json::array();
    {
        ContinuumParams p = c.base;
        p.Q = c.Q_grid.front();
        BandOptions bo;
        bo.pair = c.options;
        bo.dynamics = ContinuumDynamics::averaged;
        try {
            for (const auto& [ref, db] : omega_ref_sensitivity(p, 0.0, bo))
                sens.push_back({{"omega_ref", ref}, {"S_db_nu0", db}, {"Q", p.Q}});
        } catch (const Error& e) {
            sens.push_back({{"error", e.code()}});
        }
    }
    return {{{"outputs", {"continuum_sweep.csv"}},
             {"rows", rows},
             {"failed_points", failed},
             {"omega_ref_sensitivity", sens},
             {"points", points}},
            0};
}

struct OracleRun {
    double g = 0.0;
    FullModelParams params;
    FullTrajectory trajectory;
    GaussianState ideal;
    GaussianState corrected;
    std::optional<DiscrepancyReport> vs_ideal;
    std::optional<DiscrepancyReport> vs_corrected;
    std::string status = "ok";
};

/// Full model at coupling g against the ideal and the corrected effective
/// steady states (loss follows Q in both).
inline OracleRun oracle_run(const FullModelParams& base, double g, bool dispersive_retune = false) {
    OracleRun r;
    r.g = g;
    r.params = base;
    r.params.base.g = g;
    if (dispersive_retune) r.params.cavity_shift = correction_frequency_shift(r.params.base);
    r.params.drives = FullModelParams::from(r.params.base, r.params.cavity_shift).drives;
    try {
        const bool loss = r.params.kappa() > 0.0;
        r.ideal = lyapunov_steady(single_mode_model(r.params.base, {false, loss}));
        r.corrected = lyapunov_steady(single_mode_model(r.params.base, {true, loss}));
        r.trajectory = simulate_full(r.params);
        r.vs_ideal = compare_effective(r.trajectory, r.ideal, r.params);
        r.vs_corrected = compare_effective(r.trajectory, r.corrected, r.params);
    } catch (const Error& e) {
        r.status = e.code() + ": " + e.what();
    }
    return r;
}

inline Json to_json(const DiscrepancyReport& d) {
    return {{"var_x_full", d.var_x_full},
            {"var_p_full", d.var_p_full},
            {"occ_full", d.occ_full},
            {"var_x_effective", d.var_x_effective},
            {"var_p_effective", d.var_p_effective},
            {"occ_effective", d.occ_effective},
            {"rel_var_x", d.rel_var_x},
            {"rel_var_p", d.rel_var_p},
            {"rel_occ", d.rel_occ},
            {"late_drift", d.late_drift},
            {"max_qubit_excited", d.max_qubit_excited},
            {"gsq_over_gammaq", d.gsq_over_gammaq},
            {"gammaq_over_min_E", d.gammaq_over_min_E}};
}

inline RunResult run_oracle(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                            unsigned jobs) {
    const OracleConfig& c = cfg.oracle;
    std::vector<OracleRun> runs(c.g_values.size());
    parallel_for(runs.size(), jobs, [&](std::size_t i) { runs[i] = oracle_run(c.full, c.g_values[i], c.dispersive_retune); });

    CsvWriter traj(dir / "oracle_trajectory.csv",
                   {"g", "t", "var_x", "var_p", "cov_xp", "occ", "qubit_excited", "cavity_purity",
                    "top_level"});
    CsvWriter summary(dir / "oracle_summary.csv",
                      {"g", "gamma_sq", "T", "var_x_full", "var_p_full", "var_x_ideal",
                       "var_x_corrected", "rel_var_x_ideal", "rel_var_x_corrected",
                       "max_qubit_excited", "late_drift", "status"});
    Json jr = Json::array();
    int failed = 0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : runs) {
        for (const auto& s : r.trajectory.samples)
            traj.row({fmt(r.g), fmt(s.t), fmt(s.var_x), fmt(s.var_p), fmt(s.cavity.cov(0, 1)),
                      fmt(s.occupation), fmt(s.qubit_excited), fmt(s.cavity_purity), fmt(s.top_level)});
        const bool ok = r.status == "ok";
        failed += ok ? 0 : 1;
        summary.row({fmt(r.g), fmt(r.params.gamma_sq()),
                     fmt(r.trajectory.samples.empty() ? nan : r.trajectory.samples.back().t),
                     fmt(ok ? r.vs_ideal->var_x_full : nan), fmt(ok ? r.vs_ideal->var_p_full : nan),
                     fmt(ok ? r.ideal.var_x(0) : nan), fmt(ok ? r.corrected.var_x(0) : nan),
                     fmt(ok ? r.vs_ideal->rel_var_x : nan), fmt(ok ? r.vs_corrected->rel_var_x : nan),
                     fmt(ok ? r.vs_ideal->max_qubit_excited : nan),
                     fmt(ok ? r.vs_ideal->late_drift : nan), ok ? "ok" : "error"});
        Json rj{{"g", r.g},
                {"status", r.status},
                {"cavity_shift", r.params.cavity_shift},
                {"steps", r.trajectory.stats.accepted},
                {"rejected_steps", r.trajectory.stats.rejected},
                {"wall_seconds", r.trajectory.wall_seconds},
                {"max_trace_error", r.trajectory.max_trace_error},
                {"max_hermiticity_error", r.trajectory.max_hermiticity_error},
                {"max_top_level", r.trajectory.max_top_level}};
        if (r.vs_ideal) rj["vs_ideal"] = to_json(*r.vs_ideal);
        if (r.vs_corrected) rj["vs_corrected"] = to_json(*r.vs_corrected);
        jr.push_back(rj);
    }

    CsvWriter side(dir / "oracle_sidebands.csv",
                   {"eta", "frequency", "amp_re", "amp_im", "linear_re", "linear_im", "deviation_over_g"});
    Json js = Json::array();
    for (double eta : c.sideband_etas) {
        FullModelParams f = c.full;
        f.drives = {{f.base.omega_d1(), eta}};
        const CouplingSpectrum sp = effective_coupling_check(f);
        for (const auto& l : sp.lines)
            side.row({fmt(eta), fmt(l.frequency), fmt(l.amplitude.real()), fmt(l.amplitude.imag()),
                      fmt(l.linear_prediction.real()), fmt(l.linear_prediction.imag()),
                      fmt(l.deviation)});
        js.push_back({{"eta", eta}, {"fitted_c", sp.fitted_c}});
    }
    return {{{"outputs", {"oracle_trajectory.csv", "oracle_summary.csv", "oracle_sidebands.csv"}},
             {"failed_points", failed},
             {"runs", jr},
             {"sidebands", js}},
            0};
}

inline RunResult run_validate(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    const auto checks = validation_suite(cfg.seed, cfg.validate.equivalence_cases);
    Json a = Json::array();
    bool all = true;
    for (const auto& c : checks) {
        all = all && c.passed;
        a.push_back({{"name", c.name},
                     {"passed", c.passed},
                     {"value", c.value},
                     {"tolerance", c.tolerance},
                     {"detail", c.detail}});
    }
    Json out{{"passed", all}, {"checks", a}};
    std::ofstream(dir / "validate.json") << out.dump(2) << '\n';
    return {{{"outputs", {"validate.json"}}, {"passed", all}}, all ? 0 : 3};
}

inline std::string compiler_id() {
#if defined(__clang__)
    return "clang " __clang_version__;
#elif defined(__GNUC__)
    return "gcc " __VERSION__;
#else
    return "unknown";
#endif
}

/// Runs the experiment and writes its CSV files and manifest.json into `dir`.
inline RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                                unsigned jobs = 1) {
    std::filesystem::create_directories(dir);
    const auto start = std::chrono::steady_clock::now();
    RunResult r;
    switch (cfg.kind) {
        case ExperimentKind::single_sweep: r = run_single_sweep(cfg, dir, jobs); break;
        case ExperimentKind::continuum_sweep: r = run_continuum_sweep(cfg, dir, jobs); break;
        case ExperimentKind::oracle: r = run_oracle(cfg, dir, jobs); break;
        case ExperimentKind::validate: r = run_validate(cfg, dir); break;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Json m{{"config", resolved_config(cfg)},
           {"versions",
            {{"squeezecool", kVersion},
             {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                           "." + std::to_string(EIGEN_MINOR_VERSION)},
             {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                   std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                   std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
             {"compiler", compiler_id()}}},
           {"timings", {{"wall_seconds", wall}, {"jobs", jobs}}},
           {"result", r.manifest}};
    std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';
    r.manifest = m;
    return r;
}

}  // namespace squeezecool
