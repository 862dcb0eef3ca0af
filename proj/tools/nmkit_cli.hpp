// nmkit_cli.hpp - Command-line frontend. Each subcommand reads a JSON config,
// runs one library capability and writes CSV or JSON.
//
// Exit codes: 0 success, 2 validation failure, 3 numeric failure,
// 4 internal invariant violation.

#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "nmkit/adc.hpp"
#include "nmkit/blp.hpp"
#include "nmkit/channel.hpp"
#include "nmkit/io.hpp"
#include "nmkit/tcl.hpp"
#include "nmkit/witness.hpp"

namespace nmkit::cli {

using io::json;
using io::SchemaError;

enum class Format { Csv, Json };

struct Options {
    std::string config;
    std::string out;
    std::string format{"json"};
    std::optional<double> dt;
    std::optional<double> t_max;
    std::optional<double> tol;
    std::optional<unsigned> threads;
    std::string mode;
};

struct Context {
    Options opt;
    json cfg;
    std::ostream& out;
    std::ostream& err;

    Format format() const {
        if (opt.format == "csv") return Format::Csv;
        if (opt.format == "json") return Format::Json;
        throw SchemaError("--format must be csv or json");
    }

    double dt() const {
        if (opt.dt) return *opt.dt;
        return io::number_field(cfg, "dt");
    }

    double t_max() const {
        if (opt.t_max) return *opt.t_max;
        return io::number_field(cfg, "t_max");
    }

    double tol(double fallback) const {
        if (opt.tol) return *opt.tol;
        return io::number_field_or(cfg, "tol", fallback);
    }

    unsigned threads() const {
        if (opt.threads) return std::max(1u, *opt.threads);
        if (const char* env = std::getenv("NMKIT_THREADS")) {
            const int n = std::atoi(env);
            if (n > 0) return static_cast<unsigned>(n);
        }
        return 1;
    }

    void emit(const std::string& text) const {
        if (opt.out.empty()) {
            out << text;
            return;
        }
        std::ofstream f(opt.out, std::ios::binary);
        if (!f) throw SchemaError("cannot write " + opt.out);
        f << text;
    }
};

inline void check_grid(double t_max, double dt) {
    if (!(dt > 0.0)) throw SchemaError("dt must be > 0");
    if (!(t_max >= dt)) throw SchemaError("t_max must be >= dt");
}

inline PairSearchConfig search_config(const Context& ctx) {
    PairSearchConfig sc;
    sc.threads = ctx.threads();
    if (!ctx.cfg.contains("search")) return sc;
    const json& s = ctx.cfg.at("search");
    sc.radii = static_cast<int>(io::number_field_or(s, "radii", sc.radii));
    sc.seeds = static_cast<std::size_t>(io::number_field_or(s, "seeds", static_cast<double>(sc.seeds)));
    sc.initial_step = io::number_field_or(s, "initial_step", sc.initial_step);
    sc.min_step = io::number_field_or(s, "min_step", sc.min_step);
    sc.max_iterations = static_cast<int>(io::number_field_or(s, "max_iterations", sc.max_iterations));
    if (sc.radii < 1 || sc.seeds < 1 || !(sc.min_step > 0.0) || !(sc.initial_step > 0.0))
        throw SchemaError("invalid search configuration");
    if (s.contains("candidates")) {
        for (const auto& c : s.at("candidates")) {
            if (!c.is_array() || c.size() != 2) throw SchemaError("candidates must be [rho1, rho2] pairs");
            sc.candidates.emplace_back(DensityMatrix(io::matrix(c[0])), DensityMatrix(io::matrix(c[1])));
        }
    }
    return sc;
}

/// A map family from any of: an inline MapFamily document, "family_file",
/// "family", "generators" (time-ordered propagation), or an adc "kernel".
inline MapFamily resolve_family(const Context& ctx) {
    const json& c = ctx.cfg;
    if (c.contains("maps")) return io::map_family(c);
    if (c.contains("family_file")) {
        if (!c.at("family_file").is_string()) throw SchemaError("family_file must be a path");
        return io::map_family(io::read_file(c.at("family_file").get<std::string>()));
    }
    if (c.contains("family")) return io::map_family(c.at("family"));
    if (c.contains("generators")) return tcl::ordered_family(io::generator_trajectory(c.at("generators")));
    const Kernel k = io::kernel(io::require(c, "kernel"));
    const double t_max = ctx.t_max(), dt = ctx.dt();
    check_grid(t_max, dt);
    return adc::family(k, t_max, dt);
}

// ------------------------------------------------------------------ gfun

inline int cmd_gfun(const Context& ctx) {
    const Kernel k = io::kernel(io::require(ctx.cfg, "kernel"));
    const double t_max = ctx.t_max(), dt = ctx.dt();
    check_grid(t_max, dt);
    std::string mode = ctx.opt.mode;
    if (mode.empty()) mode = ctx.cfg.contains("mode") ? ctx.cfg.at("mode").get<std::string>() : "numeric";
    if (mode != "analytic" && mode != "numeric" && mode != "both")
        throw SchemaError("mode must be analytic, numeric or both");
    const auto* ek = std::get_if<ExponentialKernel>(&k);
    if (mode != "numeric" && !ek) throw SchemaError("analytic G(t) needs an exponential kernel");

    GTrajectory analytic;
    if (ek) {
        const std::size_t steps = adc::grid_steps(t_max, dt);
        for (std::size_t i = 0; i <= steps; ++i) {
            const double t = static_cast<double>(i) * dt;
            analytic.times.push_back(t);
            analytic.g.push_back(adc::g_analytic(*ek, t));
        }
    }
    const GTrajectory g = mode == "analytic" ? analytic : adc::g_numeric(k, t_max, dt);
    const RateSeries r = adc::rates(g);

    std::optional<double> deviation;
    if (mode == "both") {
        double dev = 0.0;
        for (std::size_t i = 0; i < g.g.size(); ++i) dev = std::max(dev, std::abs(g.g[i] - analytic.g[i]));
        deviation = dev;
        ctx.err << "max |G_numeric - G_analytic| = " << io::format_double(dev) << "\n";
    }

    if (ctx.format() == Format::Csv) {
        if (!deviation) {
            ctx.emit(io::g_trajectory_csv(g, r));
            return 0;
        }
        io::CsvWriter w({"t", "re_G", "im_G", "abs_G", "gamma", "S", "re_G_analytic", "im_G_analytic", "abs_deviation"});
        for (std::size_t i = 0; i < g.g.size(); ++i)
            w.row({g.times[i], g.g[i].real(), g.g[i].imag(), std::abs(g.g[i]), r.gamma[i], r.shift[i],
                   analytic.g[i].real(), analytic.g[i].imag(), std::abs(g.g[i] - analytic.g[i])});
        ctx.emit(w.str());
        return 0;
    }
    json times = json::array(), gs = json::array(), gam = json::array(), sh = json::array();
    for (std::size_t i = 0; i < g.g.size(); ++i) {
        times.push_back(g.times[i]);
        gs.push_back(io::complex_json(g.g[i]));
        gam.push_back(r.gamma[i] ? json(*r.gamma[i]) : json(nullptr));
        sh.push_back(r.shift[i] ? json(*r.shift[i]) : json(nullptr));
    }
    json doc{{"mode", mode}, {"times", times}, {"G", gs}, {"gamma", gam}, {"S", sh}};
    if (deviation) doc["max_deviation"] = *deviation;
    ctx.emit(io::dump(doc));
    return 0;
}

// ---------------------------------------------------------------- evolve

inline int cmd_evolve(const Context& ctx) {
    const DensityMatrix rho0(io::matrix(io::require(ctx.cfg, "rho0")));
    GeneratorTrajectory traj;
    if (ctx.cfg.contains("generators")) {
        traj = io::generator_trajectory(ctx.cfg.at("generators"));
    } else {
        const Kernel k = io::kernel(io::require(ctx.cfg, "kernel"));
        const double t_max = ctx.t_max(), dt = ctx.dt();
        check_grid(t_max, dt);
        traj = adc::generator_trajectory(adc::rates(adc::g_numeric(k, t_max, dt)));
    }
    const auto states = tcl::evolve_state(traj, rho0);
    const Eigen::Index n = rho0.dim();
    if (ctx.format() == Format::Csv) {
        std::vector<std::string> header{"t"};
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                header.push_back("re_rho" + std::to_string(i) + std::to_string(j));
                header.push_back("im_rho" + std::to_string(i) + std::to_string(j));
            }
        io::CsvWriter w(header);
        for (std::size_t k = 0; k < states.size(); ++k) {
            std::vector<std::optional<double>> row{traj.time(k)};
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j) {
                    row.push_back(states[k].matrix()(i, j).real());
                    row.push_back(states[k].matrix()(i, j).imag());
                }
            w.row(row);
        }
        ctx.emit(w.str());
        return 0;
    }
    json times = json::array(), sts = json::array();
    for (std::size_t k = 0; k < states.size(); ++k) {
        times.push_back(traj.time(k));
        sts.push_back(io::matrix_json(states[k].matrix()));
    }
    ctx.emit(io::dump(json{{"dim", n}, {"times", times}, {"states", sts}}));
    return 0;
}

// --------------------------------------------------------------- measure

inline int cmd_measure(const Context& ctx) {
    const MapFamily fam = resolve_family(ctx);
    const MeasureReport rep = blp::maximize(fam, search_config(ctx));
    if (ctx.format() == Format::Csv) {
        ctx.emit(io::distance_csv(blp::distance_trajectory(fam, rep.optimal_pair[0], rep.optimal_pair[1])));
        return 0;
    }
    ctx.emit(io::dump(io::measure_report_json(rep)));
    return 0;
}

// ----------------------------------------------------------------- sweep

inline int cmd_sweep(const Context& ctx) {
    const json& kj = io::require(ctx.cfg, "kernel");
    const double lambda = io::number_field(kj, "lambda");
    const json& list = io::require(ctx.cfg, "gamma0");
    if (!list.is_array() || list.empty()) throw SchemaError("gamma0 must be a nonempty list");
    std::vector<double> g0s;
    for (const auto& v : list) g0s.push_back(io::number(v, "gamma0"));
    const double t_max = ctx.t_max(), dt = ctx.dt();
    check_grid(t_max, dt);
    const PairSearchConfig sc = search_config(ctx);

    io::CsvWriter w({"gamma0", "alpha", "n", "evaluations"});
    json rows = json::array();
    for (double g0 : g0s) {
        const ExponentialKernel k(g0, lambda);
        const MeasureReport rep = blp::maximize(adc::family(k, t_max, dt), sc);
        w.raw_row(io::format_double(g0) + "," + io::format_double(k.alpha()) + "," + io::format_double(rep.n_value) +
                  "," + std::to_string(rep.evaluations));
        json row = io::measure_report_json(rep);
        rows.push_back(json{{"gamma0", g0}, {"alpha", k.alpha()}, {"n", rep.n_value}, {"pair", row["pair"]},
                            {"evaluations", rep.evaluations}});
    }
    ctx.emit(ctx.format() == Format::Csv ? w.str() : io::dump(json{{"lambda", lambda}, {"rows", rows}}));
    return 0;
}

// ---------------------------------------------------------- divisibility

inline int cmd_divisibility(const Context& ctx) {
    const MapFamily fam = resolve_family(ctx);
    const double tol = ctx.tol(channel::kAuditCpTol);
    if (tol < 0.0) throw SchemaError("tol must be >= 0");
    const auto ivs = channel::audit_divisibility(fam, tol);
    if (ctx.format() == Format::Csv) {
        io::CsvWriter w({"t_start", "t_end", "kind", "min_choi_eigenvalue"});
        for (const auto& iv : ivs)
            w.raw_row(io::format_double(iv.t_start) + "," + io::format_double(iv.t_end) + "," +
                      io::audit_kind_name(iv.kind) + "," +
                      (iv.min_choi_eigenvalue ? io::format_double(*iv.min_choi_eigenvalue) : std::string()));
        ctx.emit(w.str());
        return 0;
    }
    ctx.emit(io::dump(io::audit_json(ivs)));
    return 0;
}

// --------------------------------------------------------------- witness

inline int cmd_witness(const Context& ctx) {
    const json& c = ctx.cfg;
    const auto ds = static_cast<Eigen::Index>(io::number_field(c, "dim_s"));
    const auto de = static_cast<Eigen::Index>(io::number_field(c, "dim_e"));
    if (ds <= 0 || de <= 0 || ds * de > 16) throw SchemaError("need dim_s, dim_e > 0 with dim_s*dim_e <= 16");
    const ComplexMatrix hs = io::matrix(io::require(c, "H_S"), ds);
    const ComplexMatrix he = io::matrix(io::require(c, "H_E"), de);
    const ComplexMatrix hi = io::matrix(io::require(c, "H_I"), ds * de);
    const DensityMatrix rho1(io::matrix(io::require(c, "rho1"), ds * de));
    const json& kraus = io::require(c, "local_op_kraus");
    if (!kraus.is_array() || kraus.empty()) throw SchemaError("local_op_kraus must be a nonempty list");
    KrausSet ks;
    for (const auto& m : kraus) ks.operators.push_back(io::matrix(m, ds));
    const double t_max = ctx.t_max(), dt = ctx.dt();
    check_grid(t_max, dt);
    const double tol = ctx.tol(witness::kDefaultTolerance);

    const auto model = TotalModel::from_parts(hs, he, hi);
    const WitnessRecord rec = witness::run_witness(model, rho1, channel::kraus_to_super(ks), t_max, dt, tol);
    if (ctx.format() == Format::Csv) {
        io::CsvWriter w({"t", "d_local"});
        for (std::size_t k = 0; k < rec.times.size(); ++k) w.row({rec.times[k], rec.d_local[k]});
        ctx.emit(w.str());
        return 0;
    }
    ctx.emit(io::dump(io::witness_json(rec)));
    return 0;
}

// ------------------------------------------------------------------ main

inline int exit_code_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvariantViolation: return 4;
        case ErrorKind::ConvergenceFailure:
        case ErrorKind::Singular:
        case ErrorKind::NearZeroG:
        case ErrorKind::UnphysicalG: return 3;
        default: return 2;
    }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"nmkit: trace-distance non-Markovianity toolkit"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&opt](CLI::App* sub) {
        sub->add_option("--config", opt.config, "JSON configuration file")->required();
        sub->add_option("--out", opt.out, "output file (default: stdout)");
        sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--dt", opt.dt, "grid step, overrides config");
        sub->add_option("--t-max", opt.t_max, "final time, overrides config");
        sub->add_option("--tol", opt.tol, "tolerance, overrides config");
        sub->add_option("--threads", opt.threads, "worker threads (fallback: NMKIT_THREADS)");
    };
    struct Sub {
        const char* name;
        const char* help;
        int (*fn)(const Context&);
    };
    const Sub subs[] = {
        {"gfun", "solve for G(t) and its rates", cmd_gfun},
        {"evolve", "integrate a time-local master equation", cmd_evolve},
        {"measure", "non-Markovianity measure with the optimal pair", cmd_measure},
        {"divisibility", "audit a map family for CP intermediate maps", cmd_divisibility},
        {"witness", "local witness of initial system-environment correlations", cmd_witness},
        {"sweep", "measure over a list of couplings gamma0", cmd_sweep},
    };
    std::vector<std::pair<CLI::App*, int (*)(const Context&)>> handlers;
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        add_common(sub);
        if (std::string(s.name) == "gfun")
            sub->add_option("--mode", opt.mode, "analytic, numeric or both")
                ->check(CLI::IsMember({"analytic", "numeric", "both"}));
        handlers.emplace_back(sub, s.fn);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 2;
    }

    try {
        Context ctx{opt, io::read_file(opt.config), out, err};
        if (!ctx.cfg.is_object()) throw SchemaError("configuration must be a JSON object");
        for (const auto& [sub, fn] : handlers)
            if (sub->parsed()) return fn(ctx);
        return 2;
    } catch (const SchemaError& e) {
        err << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const io::json::exception& e) {
        err << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 3;
    }
}

} // namespace nmkit::cli
