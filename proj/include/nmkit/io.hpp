// io.hpp - JSON and CSV formats for kernels, map families, generator
// trajectories and reports. Matrices are flat row-major lists of [re, im]
// pairs (a bare number is accepted as a real entry). Output is deterministic:
// fixed key order and every float printed with 17 significant digits in
// lowercase e-notation.

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"  // nlohmann/json, vendored

#include "nmkit/adc.hpp"
#include "nmkit/blp.hpp"
#include "nmkit/channel.hpp"
#include "nmkit/tcl.hpp"
#include "nmkit/witness.hpp"

namespace nmkit::io {

using json = nlohmann::ordered_json;

/// Input does not match the documented schema.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    if (v == 0.0) v = 0.0;  // no "-0"
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

namespace detail {

inline void dump(const json& j, std::string& out, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) { out += "{}"; return; }
            out += "{";
            out += nl;
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) { out += ","; out += nl; }
                first = false;
                out += pad;
                out += json(it.key()).dump();
                out += indent > 0 ? ": " : ":";
                dump(it.value(), out, indent, depth + 1);
            }
            out += nl;
            out += close_pad + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) { out += "[]"; return; }
            // scalars and lists of scalar lists (matrices, [re, im] pairs) stay on one line
            bool flat = true;
            for (const auto& e : j) {
                if (e.is_object()) flat = false;
                if (e.is_array())
                    for (const auto& x : e) flat = flat && !x.is_structured();
            }
            if (flat || indent == 0) {
                out += "[";
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) out += ",";
                    dump(j[i], out, 0, 0);
                }
                out += "]";
                return;
            }
            out += "[";
            out += nl;
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) { out += ","; out += nl; }
                out += pad;
                dump(j[i], out, indent, depth + 1);
            }
            out += nl;
            out += close_pad + "]";
            return;
        }
        case json::value_t::number_float: out += format_double(j.get<double>()); return;
        default: out += j.dump(); return;
    }
}

} // namespace detail

inline std::string dump(const json& j, int indent = 2) {
    std::string out;
    detail::dump(j, out, indent, 0);
    out += "\n";
    return out;
}

inline json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("malformed JSON: ") + e.what());
    }
}

inline json read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

// ---------------------------------------------------------------- accessors

inline const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing field \"") + key + "\"");
    return j.at(key);
}

inline double number(const json& j, const char* what) {
    if (!j.is_number()) throw SchemaError(std::string("field \"") + what + "\" must be a number");
    return j.get<double>();
}

inline double number_field(const json& j, const char* key) { return number(require(j, key), key); }

inline double number_field_or(const json& j, const char* key, double fallback) {
    return j.contains(key) ? number(j.at(key), key) : fallback;
}

inline cplx complex_entry(const json& e) {
    if (e.is_number()) return e.get<double>();
    if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
        return {e[0].get<double>(), e[1].get<double>()};
    throw SchemaError("complex entries must be numbers or [re, im] pairs");
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

/// Flat row-major list; a square shape is inferred when `rows` is 0.
inline ComplexMatrix matrix(const json& j, Eigen::Index rows = 0) {
    if (!j.is_array()) throw SchemaError("matrix must be a flat list of entries");
    const auto n = static_cast<Eigen::Index>(j.size());
    if (rows == 0) {
        rows = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
        if (rows * rows != n || n == 0) throw SchemaError("matrix entry count is not a nonzero perfect square");
    }
    if (n % rows != 0) throw SchemaError("matrix entry count does not match its shape");
    const Eigen::Index cols = n / rows;
    ComplexMatrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_entry(j[static_cast<std::size_t>(r * cols + c)]);
    return m;
}

inline json matrix_json(const ComplexMatrix& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(complex_json(m(r, c)));
    return out;
}

// ------------------------------------------------------------------ kernels

inline Kernel kernel(const json& j) {
    const json& type = require(j, "type");
    if (!type.is_string()) throw SchemaError("kernel type must be a string");
    const auto t = type.get<std::string>();
    try {
        if (t == "exponential") return ExponentialKernel(number_field(j, "gamma0"), number_field(j, "lambda"));
        if (t == "tabulated") {
            const json& vals = require(j, "values");
            if (!vals.is_array()) throw SchemaError("tabulated values must be a list");
            std::vector<cplx> v;
            for (const auto& e : vals) v.push_back(complex_entry(e));
            return TabulatedKernel(number_field(j, "dt"), std::move(v));
        }
    } catch (const Error& e) {
        throw SchemaError(e.what());
    }
    throw SchemaError("unknown kernel type \"" + t + "\"");
}

inline json kernel_json(const Kernel& k) {
    if (const auto* e = std::get_if<ExponentialKernel>(&k))
        return json{{"type", "exponential"}, {"gamma0", e->gamma0}, {"lambda", e->lambda}};
    const auto& tk = std::get<TabulatedKernel>(k);
    json vals = json::array();
    for (const auto& v : tk.values) vals.push_back(complex_json(v));
    return json{{"type", "tabulated"}, {"dt", tk.dt}, {"values", vals}};
}

// ---------------------------------------------------------------- families

inline MapFamily map_family(const json& j) {
    const double dimd = number_field(j, "dim");
    const auto n = static_cast<Eigen::Index>(dimd);
    if (n <= 0 || static_cast<double>(n) != dimd) throw SchemaError("dim must be a positive integer");
    const json& times = require(j, "times");
    const json& maps = require(j, "maps");
    if (!times.is_array() || !maps.is_array() || times.size() != maps.size() || times.empty())
        throw SchemaError("times and maps must be lists of equal nonzero length");
    MapFamily fam;
    for (const auto& t : times) fam.times.push_back(number(t, "times"));
    for (std::size_t k = 1; k < fam.times.size(); ++k)
        if (!(fam.times[k] > fam.times[k - 1])) throw SchemaError("times must be strictly increasing");
    for (const auto& m : maps) {
        ComplexMatrix s = matrix(m, n * n);
        if (s.cols() != n * n) throw SchemaError("each map must be N^2 x N^2");
        fam.maps.emplace_back(n, std::move(s));
    }
    if (qmat::max_abs(fam.maps.front().matrix - ComplexMatrix::Identity(n * n, n * n)) > 1e-12)
        throw SchemaError("maps[0] must be the identity");
    return fam;
}

inline json map_family_json(const MapFamily& fam) {
    json times = json::array(), maps = json::array();
    for (double t : fam.times) times.push_back(t);
    for (const auto& m : fam.maps) maps.push_back(matrix_json(m.matrix));
    return json{{"dim", fam.dim()}, {"times", times}, {"maps", maps}};
}

inline GeneratorTrajectory generator_trajectory(const json& j) {
    const auto n = static_cast<Eigen::Index>(number_field(j, "dim"));
    if (n <= 0) throw SchemaError("dim must be positive");
    GeneratorTrajectory traj;
    traj.dt = number_field(j, "dt");
    if (!(traj.dt > 0.0)) throw SchemaError("dt must be > 0");
    const json& steps = require(j, "steps");
    if (!steps.is_array() || steps.empty()) throw SchemaError("steps must be a nonempty list");
    for (const auto& s : steps) {
        LindbladGenerator g{matrix(require(s, "H"), n), {}};
        if (g.hamiltonian.cols() != n) throw SchemaError("H must be dim x dim");
        if (s.contains("channels")) {
            for (const auto& c : s.at("channels")) {
                ComplexMatrix op = matrix(require(c, "op"), n);
                if (op.cols() != n) throw SchemaError("channel op must be dim x dim");
                g.channels.push_back({number_field(c, "rate"), std::move(op)});
            }
        }
        traj.generators.push_back(std::move(g));
    }
    return traj;
}

inline json generator_trajectory_json(const GeneratorTrajectory& traj) {
    json steps = json::array();
    for (const auto& g : traj.generators) {
        json chans = json::array();
        for (const auto& c : g.channels) chans.push_back(json{{"rate", c.rate}, {"op", matrix_json(c.op)}});
        steps.push_back(json{{"H", matrix_json(g.hamiltonian)}, {"channels", chans}});
    }
    return json{{"dim", traj.generators.empty() ? 0 : traj.generators.front().dim()}, {"dt", traj.dt}, {"steps", steps}};
}

// ----------------------------------------------------------------- reports

inline json bloch_json(const BlochVector& r) { return json::array({r.x, r.y, r.z}); }

inline json measure_report_json(const MeasureReport& rep) {
    json pair = json::array();
    if (rep.optimal_bloch) {
        pair.push_back(bloch_json((*rep.optimal_bloch)[0]));
        pair.push_back(bloch_json((*rep.optimal_bloch)[1]));
    } else {
        for (const auto& r : rep.optimal_pair) pair.push_back(matrix_json(r.matrix()));
    }
    json intervals = json::array();
    for (const auto& iv : rep.intervals) intervals.push_back(json::array({iv.a, iv.b, iv.gain}));
    return json{{"n", rep.n_value}, {"pair", pair}, {"intervals", intervals}, {"evaluations", rep.evaluations}};
}

inline const char* audit_kind_name(channel::AuditKind k) {
    return k == channel::AuditKind::NotCompletelyPositive ? "not_cp" : "not_invertible";
}

inline json audit_json(const std::vector<channel::AuditInterval>& ivs) {
    json arr = json::array();
    for (const auto& iv : ivs) {
        json e{{"t_start", iv.t_start}, {"t_end", iv.t_end}, {"kind", audit_kind_name(iv.kind)}};
        e["min_choi_eigenvalue"] = iv.min_choi_eigenvalue ? json(*iv.min_choi_eigenvalue) : json(nullptr);
        arr.push_back(std::move(e));
    }
    return json{{"divisible", ivs.empty()}, {"intervals", arr}};
}

inline json witness_json(const WitnessRecord& r) {
    json times = json::array(), d = json::array();
    for (double t : r.times) times.push_back(t);
    for (double v : r.d_local) d.push_back(v);
    return json{{"verdict", to_string(r.verdict)},
                {"d_local_0", r.d_local_0},
                {"d_total", r.d_total},
                {"bound_corr1", r.bound_corr1},
                {"bound_corr2", r.bound_corr2},
                {"bound_env", r.bound_env},
                {"max_increase", r.max_increase},
                {"times", times},
                {"d_local", d}};
}

// --------------------------------------------------------------------- CSV

/// Header row plus one line per record; empty optionals become blank cells.
class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& header) {
        for (std::size_t i = 0; i < header.size(); ++i) out_ += (i ? "," : "") + header[i];
        out_ += "\n";
    }

    void row(const std::vector<std::optional<double>>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ += ",";
            if (cells[i]) out_ += format_double(*cells[i]);
        }
        out_ += "\n";
    }

    void raw_row(const std::string& line) { out_ += line + "\n"; }

    const std::string& str() const { return out_; }

private:
    std::string out_;
};

inline std::string g_trajectory_csv(const GTrajectory& g, const RateSeries& r) {
    CsvWriter w({"t", "re_G", "im_G", "abs_G", "gamma", "S"});
    for (std::size_t k = 0; k < g.g.size(); ++k)
        w.row({g.times[k], g.g[k].real(), g.g[k].imag(), std::abs(g.g[k]), r.gamma[k], r.shift[k]});
    return w.str();
}

inline std::string distance_csv(const DistanceTrajectory& d) {
    const auto s = blp::sigma(d);
    CsvWriter w({"t", "D", "sigma"});
    for (std::size_t k = 0; k < d.d.size(); ++k) w.row({d.times[k], d.d[k], s[k]});
    return w.str();
}

} // namespace nmkit::io
