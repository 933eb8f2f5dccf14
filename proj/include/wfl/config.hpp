#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wfl/common.hpp"
#include "wfl/csv.hpp"
#include "wfl/drift.hpp"
#include "wfl/dynamics.hpp"
#include "wfl/mass_kernel.hpp"
#include "wfl/spectral.hpp"
#include "wfl/state.hpp"
#include "wfl/stats.hpp"

namespace wfl {

// Effective run configuration, assembled from (highest to lowest precedence)
// command-line flags, WFL_* environment variables, a JSON config file, and
// built-in defaults.
struct RunConfig {
    std::string scenario = "simulate";

    // dynamics
    double T = 1.0;
    double dt = 1e-2;
    std::size_t n = 64;
    double alpha = 3.0;
    double k_max = 12.8;
    double dk = 0.2;
    std::string kernel = "gaussian";  // constant | gaussian
    double kernel_scale = 1.0;
    std::optional<double> truncation;
    std::string repair = "project";  // off | project | reject

    // initial quantile function
    std::string initial_kind = "uniform";  // uniform | gaussian | table
    double initial_lo = 0.0;
    double initial_hi = 1.0;
    double initial_mean = 0.0;
    double initial_sd = 1.0;
    std::vector<double> initial_u;
    std::vector<double> initial_y;

    // drift selection
    std::string drift_variant = "none";
    double drift_amplitude = 1.0;
    double drift_frequency = 1.0;
    double drift_eta = 1.0;
    double drift_delta = 2.0 / 3.0;
    double drift_eta_hat = 0.25;

    // histogram layout for measure-valued outputs
    double x_min = -4.0;
    double x_max = 4.0;
    std::size_t bins = 32;

    // execution
    std::uint64_t seed = 1;
    std::size_t paths = 100;
    std::size_t threads = 1;
    std::string out_dir = ".";
    std::size_t thin = 1;

    // scenario extras
    std::vector<double> covariance_deltas = {0.0, 0.25, 0.5, 1.0, 2.0};
    std::string invert_target = "raised_cosine";  // raised_cosine | gauss_bump | general
    double invert_width = 1.0;
    double invert_amplitude = 1.0;
    std::size_t picard_ensemble = 2000;
    double picard_tol = 0.15;
    std::size_t picard_max_iterations = 12;
    double peano_epsilon = 1e-6;
    double regularize_scale = 0.25;
    std::size_t regularize_bin = 1;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["scenario"] = scenario;
        auto& sim = j["sim"];
        sim["T"] = T;
        sim["dt"] = dt;
        sim["n"] = n;
        sim["alpha"] = alpha;
        sim["k_max"] = k_max;
        sim["dk"] = dk;
        sim["kernel"] = kernel;
        sim["kernel_scale"] = kernel_scale;
        if (truncation) sim["truncation"] = *truncation;
        sim["repair"] = repair;
        auto& init = j["initial"];
        init["kind"] = initial_kind;
        if (initial_kind == "uniform") {
            init["lo"] = initial_lo;
            init["hi"] = initial_hi;
        } else if (initial_kind == "gaussian") {
            init["mean"] = initial_mean;
            init["sd"] = initial_sd;
        } else {
            init["u"] = initial_u;
            init["y"] = initial_y;
        }
        auto& drift = j["drift"];
        drift["variant"] = drift_variant;
        drift["amplitude"] = drift_amplitude;
        drift["frequency"] = drift_frequency;
        drift["eta"] = drift_eta;
        drift["delta"] = drift_delta;
        drift["eta_hat"] = drift_eta_hat;
        auto& layout = j["layout"];
        layout["x_min"] = x_min;
        layout["x_max"] = x_max;
        layout["bins"] = bins;
        auto& run = j["run"];
        run["seed"] = seed;
        run["paths"] = paths;
        run["threads"] = threads;
        run["out"] = out_dir;
        run["thin"] = thin;
        j["covariance"]["deltas"] = covariance_deltas;
        auto& inv = j["invert"];
        inv["target"] = invert_target;
        inv["width"] = invert_width;
        inv["amplitude"] = invert_amplitude;
        auto& pic = j["picard"];
        pic["ensemble"] = picard_ensemble;
        pic["tol"] = picard_tol;
        pic["max_iterations"] = picard_max_iterations;
        j["peano"]["epsilon"] = peano_epsilon;
        auto& reg = j["regularize"];
        reg["scale"] = regularize_scale;
        reg["bin"] = regularize_bin;
        return j;
    }

    std::string canonical_string() const { return to_json().dump(); }
    std::uint64_t config_hash() const { return fnv1a_hash(canonical_string()); }
};

namespace detail {

inline const std::set<std::string>& known_scenarios() {
    static const std::set<std::string> s = {"simulate",   "covariance", "invert", "regularize",
                                            "picard",     "peano",      "arratia"};
    return s;
}

// section name -> allowed keys; unknown sections and keys are configuration errors
// so that typos fail loudly before any simulation starts.
inline const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"sim", {"T", "dt", "n", "alpha", "k_max", "dk", "kernel", "kernel_scale", "truncation",
                 "repair"}},
        {"initial", {"kind", "lo", "hi", "mean", "sd", "u", "y"}},
        {"drift", {"variant", "amplitude", "frequency", "eta", "delta", "eta_hat"}},
        {"layout", {"x_min", "x_max", "bins"}},
        {"run", {"seed", "paths", "threads", "out", "thin"}},
        {"covariance", {"deltas"}},
        {"invert", {"target", "width", "amplitude"}},
        {"picard", {"ensemble", "tol", "max_iterations"}},
        {"peano", {"epsilon"}},
        {"regularize", {"scale", "bin"}},
    };
    return s;
}

inline void check_keys(const nlohmann::json& j) {
    if (!j.is_object()) throw config_error("config: top level must be a JSON object");
    for (const auto& [section, body] : j.items()) {
        if (section == "scenario") continue;
        auto it = schema().find(section);
        if (it == schema().end()) throw config_error("config: unknown section '" + section + "'");
        if (!body.is_object())
            throw config_error("config: section '" + section + "' must be an object");
        for (const auto& [key, value] : body.items()) {
            (void)value;
            if (!it->second.count(key))
                throw config_error("config: unknown key '" + section + "." + key + "'");
        }
    }
}

template <class T>
void read_if(const nlohmann::json& j, const char* section, const char* key, T& target) {
    if (!j.contains(section)) return;
    const auto& s = j.at(section);
    if (!s.contains(key)) return;
    try {
        target = s.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config: bad value for ") + section + "." + key + ": " +
                           e.what());
    }
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
    detail::check_keys(j);
    RunConfig c;
    if (j.contains("scenario")) {
        if (!j.at("scenario").is_string())
            throw config_error("config: scenario must be a string");
        c.scenario = j.at("scenario").get<std::string>();
    }
    if (!detail::known_scenarios().count(c.scenario))
        throw config_error("config: unknown scenario '" + c.scenario +
                           "' (expected one of simulate, covariance, invert, regularize, picard, "
                           "peano, arratia)");
    detail::read_if(j, "sim", "T", c.T);
    detail::read_if(j, "sim", "dt", c.dt);
    detail::read_if(j, "sim", "n", c.n);
    detail::read_if(j, "sim", "alpha", c.alpha);
    detail::read_if(j, "sim", "k_max", c.k_max);
    detail::read_if(j, "sim", "dk", c.dk);
    detail::read_if(j, "sim", "kernel", c.kernel);
    detail::read_if(j, "sim", "kernel_scale", c.kernel_scale);
    if (j.contains("sim") && j.at("sim").contains("truncation") &&
        !j.at("sim").at("truncation").is_null()) {
        double m = 0;
        detail::read_if(j, "sim", "truncation", m);
        c.truncation = m;
    }
    detail::read_if(j, "sim", "repair", c.repair);
    detail::read_if(j, "initial", "kind", c.initial_kind);
    detail::read_if(j, "initial", "lo", c.initial_lo);
    detail::read_if(j, "initial", "hi", c.initial_hi);
    detail::read_if(j, "initial", "mean", c.initial_mean);
    detail::read_if(j, "initial", "sd", c.initial_sd);
    detail::read_if(j, "initial", "u", c.initial_u);
    detail::read_if(j, "initial", "y", c.initial_y);
    detail::read_if(j, "drift", "variant", c.drift_variant);
    detail::read_if(j, "drift", "amplitude", c.drift_amplitude);
    detail::read_if(j, "drift", "frequency", c.drift_frequency);
    detail::read_if(j, "drift", "eta", c.drift_eta);
    detail::read_if(j, "drift", "delta", c.drift_delta);
    detail::read_if(j, "drift", "eta_hat", c.drift_eta_hat);
    detail::read_if(j, "layout", "x_min", c.x_min);
    detail::read_if(j, "layout", "x_max", c.x_max);
    detail::read_if(j, "layout", "bins", c.bins);
    detail::read_if(j, "run", "seed", c.seed);
    detail::read_if(j, "run", "paths", c.paths);
    detail::read_if(j, "run", "threads", c.threads);
    detail::read_if(j, "run", "out", c.out_dir);
    detail::read_if(j, "run", "thin", c.thin);
    detail::read_if(j, "covariance", "deltas", c.covariance_deltas);
    detail::read_if(j, "invert", "target", c.invert_target);
    detail::read_if(j, "invert", "width", c.invert_width);
    detail::read_if(j, "invert", "amplitude", c.invert_amplitude);
    detail::read_if(j, "picard", "ensemble", c.picard_ensemble);
    detail::read_if(j, "picard", "tol", c.picard_tol);
    detail::read_if(j, "picard", "max_iterations", c.picard_max_iterations);
    detail::read_if(j, "peano", "epsilon", c.peano_epsilon);
    detail::read_if(j, "regularize", "scale", c.regularize_scale);
    detail::read_if(j, "regularize", "bin", c.regularize_bin);
    return c;
}

inline RunConfig config_from_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config: invalid JSON: ") + e.what());
    }
    return config_from_json(j);
}

inline RunConfig config_from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot read '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return config_from_text(buf.str());
}

// Environment overrides sit between the config file and command-line flags.
// The getter is injectable so tests can exercise precedence hermetically.
inline void apply_env_overrides(
    RunConfig& c, const std::function<const char*(const char*)>& getter = [](const char* name) {
        return std::getenv(name);
    }) {
    auto get = [&](const char* name) -> std::optional<std::string> {
        const char* v = getter(name);
        if (v == nullptr || *v == '\0') return std::nullopt;
        return std::string(v);
    };
    auto parse_u64 = [](const std::string& text, const char* name) {
        try {
            std::size_t pos = 0;
            unsigned long long v = std::stoull(text, &pos);
            if (pos != text.size()) throw std::invalid_argument("trailing characters");
            return static_cast<std::uint64_t>(v);
        } catch (const std::exception&) {
            throw config_error(std::string("config: bad integer in ") + name + ": '" + text + "'");
        }
    };
    auto parse_f64 = [](const std::string& text, const char* name) {
        try {
            std::size_t pos = 0;
            double v = std::stod(text, &pos);
            if (pos != text.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw config_error(std::string("config: bad number in ") + name + ": '" + text + "'");
        }
    };
    if (auto v = get("WFL_SCENARIO")) {
        if (detail::known_scenarios().count(*v) == 0)
            throw config_error("config: unknown scenario '" + *v + "' in WFL_SCENARIO");
        c.scenario = *v;
    }
    if (auto v = get("WFL_SEED")) c.seed = parse_u64(*v, "WFL_SEED");
    if (auto v = get("WFL_PATHS")) c.paths = static_cast<std::size_t>(parse_u64(*v, "WFL_PATHS"));
    if (auto v = get("WFL_THREADS"))
        c.threads = static_cast<std::size_t>(parse_u64(*v, "WFL_THREADS"));
    if (auto v = get("WFL_OUT")) c.out_dir = *v;
    if (auto v = get("WFL_T")) c.T = parse_f64(*v, "WFL_T");
    if (auto v = get("WFL_DT")) c.dt = parse_f64(*v, "WFL_DT");
    if (auto v = get("WFL_N")) c.n = static_cast<std::size_t>(parse_u64(*v, "WFL_N"));
}

inline MonotoneRepair repair_from_string(const std::string& name) {
    if (name == "off") return MonotoneRepair::off;
    if (name == "project") return MonotoneRepair::project;
    if (name == "reject") return MonotoneRepair::reject;
    throw config_error("config: unknown repair mode '" + name + "'");
}

inline SimConfig sim_config(const RunConfig& c) {
    SimConfig sim;
    sim.T = c.T;
    sim.dt = c.dt;
    sim.n = c.n;
    sim.decay = (c.k_max > 0.0 && c.dk > 0.0) ? SpectralDecay(c.alpha, c.k_max, c.dk)
                                              : SpectralDecay::none();
    if (c.kernel == "constant") {
        sim.kernel = MassKernel::constant();
    } else if (c.kernel == "gaussian") {
        sim.kernel = MassKernel::gaussian(c.kernel_scale);
    } else {
        throw config_error("config: unknown kernel '" + c.kernel + "'");
    }
    sim.truncation_M = c.truncation;
    sim.repair = repair_from_string(c.repair);
    sim.seed = c.seed;
    sim.paths = c.paths;
    sim.validate();
    return sim;
}

// Piecewise-linear quantile function through knots (u_i, y_i).
inline double quantile_from_table(const std::vector<double>& u, const std::vector<double>& y,
                                  double at) {
    if (u.size() < 2 || u.size() != y.size())
        throw config_error("config: initial table needs matching u/y arrays with >= 2 knots");
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        if (!(u[i] < u[i + 1])) throw config_error("config: initial table u must increase");
        if (!(y[i] < y[i + 1])) throw config_error("config: initial table y must increase");
    }
    if (at <= u.front()) return y.front();
    if (at >= u.back()) return y.back();
    auto it = std::upper_bound(u.begin(), u.end(), at);
    std::size_t hi = static_cast<std::size_t>(it - u.begin());
    double w = (at - u[hi - 1]) / (u[hi] - u[hi - 1]);
    return y[hi - 1] + w * (y[hi] - y[hi - 1]);
}

inline std::function<double(double)> initial_quantile(const RunConfig& c) {
    if (c.initial_kind == "uniform") {
        if (!(c.initial_lo < c.initial_hi))
            throw config_error("config: initial.lo must be < initial.hi");
        double lo = c.initial_lo, hi = c.initial_hi;
        return [lo, hi](double u) { return lo + (hi - lo) * u; };
    }
    if (c.initial_kind == "gaussian") {
        if (!(c.initial_sd > 0)) throw config_error("config: initial.sd must be positive");
        double mean = c.initial_mean, sd = c.initial_sd;
        return [mean, sd](double u) { return mean + sd * normal_quantile(u); };
    }
    if (c.initial_kind == "table") {
        auto u = c.initial_u;
        auto y = c.initial_y;
        quantile_from_table(u, y, 0.5);  // validate knots up front
        return [u, y](double at) { return quantile_from_table(u, y, at); };
    }
    throw config_error("config: unknown initial.kind '" + c.initial_kind + "'");
}

inline QuantileState initial_state(const RunConfig& c) {
    return state_from_quantile_function(c.n, initial_quantile(c));
}

inline HistogramLayout histogram_layout(const RunConfig& c) {
    if (!(c.x_min < c.x_max)) throw config_error("config: layout.x_min must be < layout.x_max");
    if (c.bins == 0) throw config_error("config: layout.bins must be positive");
    return HistogramLayout{c.x_min, c.x_max, c.bins};
}

// Named drift presets.  Derivative-bound tables are supremum bounds for the
// underlying closures, scaled by the configured amplitude.
inline DriftSpec make_drift(const RunConfig& c) {
    const double A = c.drift_amplitude;
    const double w = c.drift_frequency;
    if (c.drift_variant == "none") return DriftSpec::none();
    if (c.drift_variant == "peano") return DriftSpec::peano();
    if (c.drift_variant == "b1_tanh") {
        // x-independent mean-field drift; sharp total-variation constant is
        // |A| * osc(tanh)/2 = |A|.
        auto a = [A](double, double y) { return A * std::tanh(y); };
        std::vector<double> table = {std::abs(A), 0, 0, 0, 0, 0};
        return DriftSpec::b1(a, table, std::abs(A), /*x_independent=*/true);
    }
    if (c.drift_variant == "gauss_bump") {
        // measure-independent bump drift b(x) = A exp(-x^2/2)
        auto a = [A](double x, double) { return A * std::exp(-0.5 * x * x); };
        std::vector<double> table = {std::abs(A), 0.6066 * std::abs(A), std::abs(A),
                                     1.3807 * std::abs(A), 3.0 * std::abs(A)};
        return DriftSpec::b1(a, table, 0.0, /*x_independent=*/false);
    }
    if (c.drift_variant == "b2_cos") {
        auto a = [A, w](double mean) { return A * std::cos(w * mean); };
        return DriftSpec::b2(a, std::abs(A));
    }
    if (c.drift_variant == "b3_sin") {
        auto a = [A, w](double x, double s) { return A * std::sin(w * (x + s)); };
        auto psi = [](double y) { return std::tanh(y); };
        std::vector<double> table(6, std::abs(A) * std::max(1.0, std::pow(w, 5)));
        for (std::size_t i = 0; i < table.size(); ++i)
            table[i] = std::abs(A) * std::pow(std::abs(w), static_cast<double>(i));
        return DriftSpec::b3(a, psi, table);
    }
    if (c.drift_variant == "b4_variance") {
        auto a = [A, w](double x) { return A * std::sin(w * x); };
        std::vector<double> table(6);
        for (std::size_t i = 0; i < table.size(); ++i)
            table[i] = std::abs(A) * std::pow(std::abs(w), static_cast<double>(i));
        return DriftSpec::b4(a, c.drift_eta_hat, table);
    }
    if (c.drift_variant == "spectral" || c.drift_variant == "spectral_regularized") {
        SpectralDriftSpec spec;
        spec.eta = c.drift_eta;
        spec.delta = c.drift_delta;
        spec.alpha = c.alpha;
        spec.decay = (c.k_max > 0.0 && c.dk > 0.0) ? SpectralDecay(c.alpha, c.k_max, c.dk)
                                                   : SpectralDecay::none();
        spec.lambda_env.assign(spec.decay.node_count(), std::abs(A));
        auto layout = histogram_layout(c);
        spec.layout = layout;
        spec.u_re = make_bin_mass_functional({c.regularize_bin}, 1.0 / static_cast<double>(c.bins),
                                             -c.regularize_scale, c.drift_delta);
        spec.u_im = make_mean_wave_functional(w, 0.5 * c.regularize_scale);
        validate(spec);
        if (c.drift_variant == "spectral_regularized") {
            std::vector<double> weights;
            for (int p = -48; p <= 0; ++p) weights.push_back(std::pow(2.0, p / 4.0));
            spec.family = make_mixture_family(make_uniform_histogram(layout), weights,
                                              {c.regularize_bin});
            return DriftSpec::spectral(regularize_lambda(spec));
        }
        return DriftSpec::spectral(spec);
    }
    throw config_error("config: unknown drift.variant '" + c.drift_variant + "'");
}

}  // namespace wfl
