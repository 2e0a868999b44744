#include "mccpd/runner.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mccpd {

namespace {

constexpr std::array<const char*, 20> kKeys = {
    "method", "r",      "L_ens",     "L_ens_t", "eta",       "sigma",     "eps2",
    "max_sweeps", "tau_mode", "tau", "master_seed", "f39_rad", "pivot_tol", "threads",
    "oracle", "d",      "N",         "target",  "cores_out", "csv_out"};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& text) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("bad integer for '" + key + "': '" + text + "'");
    }
    return value;
}

double parse_real(const std::string& key, const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
        throw ConfigError("bad number for '" + key + "': '" + text + "'");
    }
    return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
    return parse_integer<std::size_t>(key, text);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << content;
    if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

void log_record(std::ostream& log, const std::string& label, const ConvergenceRecord& rec) {
    log << label << "sweep " << rec.sweep << ": eps_mc=" << format_double(rec.eps_mc)
        << " eps_grid_mean=" << format_double(rec.eps_grid_mean)
        << " grad_norm=" << format_double(rec.grad_norm) << " time=" << rec.wall_seconds << "s";
    if (rec.skipped_nodes) log << " skipped=" << rec.skipped_nodes;
    if (rec.tau_fallbacks) log << " tau_fallbacks=" << rec.tau_fallbacks;
    log << " zero_fraction=" << rec.near_zero_fraction << '\n';
}

}  // namespace

KeyValues read_key_values(std::istream& in) {
    KeyValues values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key = trim(text.substr(0, eq));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        }
        values[key] = trim(text.substr(eq + 1));
    }
    return values;
}

KeyValues load_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    return read_key_values(in);
}

std::span<const char* const> config_keys() { return kKeys; }

void apply_key_values(RunSpec& spec, const KeyValues& values) {
    SolverConfig& cfg = spec.solver;
    for (const auto& [key, value] : values) {
        try {
            if (key == "method") cfg.method = parse_method(value);
            else if (key == "r") cfg.rank = parse_count(key, value);
            else if (key == "L_ens") cfg.ens_size = parse_count(key, value);
            else if (key == "L_ens_t") cfg.global_ens_size = parse_count(key, value);
            else if (key == "eta") cfg.eta = parse_real(key, value);
            else if (key == "sigma") cfg.sigma = parse_real(key, value);
            else if (key == "eps2") cfg.eps2 = parse_real(key, value);
            else if (key == "max_sweeps") cfg.max_sweeps = parse_count(key, value);
            else if (key == "tau_mode") {
                if (value == "auto-quadratic" || value == "auto") cfg.tau_mode = TauMode::auto_quadratic;
                else if (value == "fixed") cfg.tau_mode = TauMode::fixed;
                else throw ConfigError("tau_mode must be 'auto-quadratic' or 'fixed'");
            }
            else if (key == "tau") cfg.tau = parse_real(key, value);
            else if (key == "master_seed") cfg.master_seed = parse_integer<std::uint64_t>(key, value);
            else if (key == "f39_rad") cfg.f39_rad = parse_f39_radius(value);
            else if (key == "pivot_tol") cfg.pivot_tol = parse_real(key, value);
            else if (key == "threads") cfg.threads = parse_integer<int>(key, value);
            else if (key == "oracle") spec.oracle = value;
            else if (key == "d") spec.order = parse_count(key, value);
            else if (key == "N") spec.nodes = parse_count(key, value);
            else if (key == "target") spec.target = value;
            else if (key == "cores_out") spec.cores_out = value;
            else if (key == "csv_out") spec.csv_out = value;
            else throw ConfigError("unknown config key '" + key + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
}

void validate(const RunSpec& spec) {
    try {
        spec.solver.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (spec.oracle == "f38" || spec.oracle == "f39") {
        if (spec.order != 6) {
            throw ConfigError("oracle " + spec.oracle + " is defined for d=6, got d=" +
                              std::to_string(spec.order));
        }
        if (spec.nodes < 1) throw ConfigError("N must be at least 1");
    } else if (spec.oracle == "cpd" || spec.oracle == "dense") {
        if (spec.target.empty()) {
            throw ConfigError("oracle " + spec.oracle + " needs a target file");
        }
        if (!std::ifstream(spec.target)) {
            throw ConfigError("target file '" + spec.target + "' cannot be read");
        }
    } else {
        throw ConfigError("unknown oracle '" + spec.oracle + "' (expected f38, f39, cpd, dense)");
    }
}

TensorOracle make_oracle(const RunSpec& spec) {
    validate(spec);
    const std::vector<std::size_t> dims(spec.order, spec.nodes);
    try {
        if (spec.oracle == "f38") return TensorOracle::f38(dims);
        if (spec.oracle == "f39") return TensorOracle::f39(dims, spec.solver.f39_rad);
        if (spec.oracle == "cpd") return TensorOracle::cp_synthetic(load_cpd(spec.target));
        return load_dense(spec.target);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

int cmd_decompose(const RunSpec& spec, std::ostream& out, std::ostream& log) {
    try {
        const TensorOracle oracle = make_oracle(spec);
        RunOptions options;
        options.on_record = [&](const ConvergenceRecord& rec) { log_record(log, "", rec); };
        const RunResult result = run(oracle, spec.solver, options);

        save_cpd(spec.cores_out, result.model);
        std::ostringstream csv;
        csv << convergence_csv_header() << '\n';
        for (const auto& rec : result.history) csv << convergence_csv_row(rec) << '\n';
        write_file(spec.csv_out, csv.str());

        const double final_eps = result.history.back().eps_mc;
        out << "method " << to_string(spec.solver.method) << ": final eps_mc "
            << format_double(final_eps) << " after " << result.sweeps << " sweeps ("
            << (result.converged ? "converged" : "max_sweeps reached") << ")\n";
        return result.converged ? kExitOk : kExitNotConverged;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kExitError;
    }
}

int cmd_compare(const RunSpec& spec, const std::string& merged_csv, std::ostream& out,
                std::ostream& log) {
    try {
        const TensorOracle oracle = make_oracle(spec);
        const CPModel start = init_random_start(oracle.dims(), spec.solver.rank,
                                                spec.solver.sigma, spec.solver.master_seed);
        std::ostringstream csv;
        csv << "method," << convergence_csv_header() << '\n';
        for (Method method : {Method::newton, Method::steepest_descent, Method::als}) {
            SolverConfig cfg = spec.solver;
            cfg.method = method;
            const std::string name = to_string(method);
            RunOptions options;
            options.initial = start;
            options.record_initial = true;
            options.on_record = [&](const ConvergenceRecord& rec) {
                log_record(log, name + " ", rec);
            };
            const RunResult result = run(oracle, cfg, options);
            for (const auto& rec : result.history) {
                csv << name << ',' << convergence_csv_row(rec) << '\n';
            }
            out << name << ": final eps_mc " << format_double(result.history.back().eps_mc)
                << " after " << result.sweeps << " sweeps"
                << (result.converged ? "" : " (max_sweeps reached)") << '\n';
        }
        write_file(merged_csv, csv.str());
        return kExitOk;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kExitError;
    }
}

int cmd_slice(const RunSpec& spec, const SliceRequest& request, std::ostream& out,
              std::ostream& log) {
    try {
        const TensorOracle oracle = make_oracle(spec);
        const CPModel model = load_cpd(request.cores_path);
        if (model.dims() != oracle.dims()) {
            throw ConfigError("cores file dimensions do not match the oracle");
        }
        const std::size_t d = model.order();
        if (request.c1 >= d || request.c2 >= d || request.c1 == request.c2) {
            throw ConfigError("slice plane must name two distinct coordinates in 1.." +
                              std::to_string(d));
        }
        MultiIndex p(d);
        for (std::size_t s = 0; s < d; ++s) {
            const std::size_t center = request.center.value_or((model.dim(s) + 1) / 2);
            if (center < 1 || center > model.dim(s)) {
                throw ConfigError("center node " + std::to_string(center) + " outside 1.." +
                                  std::to_string(model.dim(s)));
            }
            p[s] = center - 1;
        }

        std::ostringstream values;
        std::ostringstream residuals;
        double max_abs = 0.0;
        for (std::size_t a = 0; a < model.dim(request.c1); ++a) {
            p[request.c1] = a;
            for (std::size_t b = 0; b < model.dim(request.c2); ++b) {
                p[request.c2] = b;
                const double f = oracle(p);
                const double rv = eval_cp(model, p) - f;
                max_abs = std::max(max_abs, std::abs(rv));
                values << (b ? "," : "") << format_double(f);
                residuals << (b ? "," : "") << format_double(rv);
            }
            values << '\n';
            residuals << '\n';
        }
        write_file(request.out_prefix + "_oracle.csv", values.str());
        write_file(request.out_prefix + "_residual.csv", residuals.str());
        out << "slice " << model.dim(request.c1) << "x" << model.dim(request.c2)
            << " max |residual| " << format_double(max_abs) << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kExitError;
    }
}

int cmd_eval(const std::string& cores_path, std::span<const long long> nodes, std::ostream& out,
             std::ostream& log) {
    try {
        const CPModel model = load_cpd(cores_path);
        const MultiIndex p = from_one_based(model.dims(), nodes);
        out << format_double(eval_cp(model, p)) << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kExitError;
    }
}

}  // namespace mccpd
