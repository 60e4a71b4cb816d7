// Command-line front end over the plrs C API.
#include "plrs/plrs.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using json = nlohmann::ordered_json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_verify_failed = 1;
constexpr int exit_usage = 2;
constexpr int exit_degenerate = 3;

// Bad flags or config values; reported as a one-line reason with exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A library call failed at run time.
struct RuntimeFailure : std::runtime_error {
    RuntimeFailure(plrs_status status, const std::string& what) : std::runtime_error(what), status(status) {}
    plrs_status status;
};

void check(plrs_status status, const char* what) {
    if (status != PLRS_OK) {
        throw RuntimeFailure(status, std::string(what) + ": " + plrs_status_string(status) + " (" + plrs_last_error() + ")");
    }
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return "";
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep)) {
        parts.push_back(trim(item));
    }
    return parts;
}

double parse_real(const std::string& text, const std::string& key) {
    double value = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw UsageError(key + ": '" + text + "' is not a finite number");
    }
    return value;
}

long long parse_integer(const std::string& text, const std::string& key) {
    long long value = 0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc() || ptr != end) {
        throw UsageError(key + ": '" + text + "' is not an integer");
    }
    return value;
}

std::vector<double> parse_reals(const std::string& text, const std::string& key) {
    std::vector<double> out;
    for (const auto& part : split(text, ',')) {
        out.push_back(parse_real(part, key));
    }
    return out;
}

using Weights = std::map<int, double>;

Weights parse_mu(const std::string& text) {
    Weights mu;
    for (const auto& pair : split(text, ',')) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos) {
            throw UsageError("mu: expected comma-separated j:weight pairs, got '" + pair + "'");
        }
        const long long j = parse_integer(trim(pair.substr(0, colon)), "mu");
        if (j == 0 || j < -64 || j > 64) {
            throw UsageError("mu: powers must be non-zero integers in [-64, 64]");
        }
        mu[static_cast<int>(j)] += parse_real(trim(pair.substr(colon + 1)), "mu");
    }
    return mu;
}

json mu_json(const Weights& mu) {
    json out = json::object();
    for (const auto& [j, w] : mu) {
        out[std::to_string(j)] = w;
    }
    return out;
}

// Raw option text; precedence is flag over config file over default.
struct RawOptions {
    std::map<std::string, std::string> values;

    std::optional<std::string> get(const std::string& key) const {
        const auto it = values.find(key);
        return it == values.end() ? std::nullopt : std::optional<std::string>(it->second);
    }
};

const std::vector<std::string> config_keys = {"n",       "x",    "mu",     "q0",     "p0",  "t_end",
                                              "samples", "engine", "seed", "format", "out"};

void merge_config_file(const std::string& path, RawOptions& raw) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError("config: cannot open '" + path + "'");
    }
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config: line " + std::to_string(number) + " is not 'key = value'");
        }
        std::string key = trim(line.substr(0, eq));
        std::replace(key.begin(), key.end(), '-', '_');
        if (std::find(config_keys.begin(), config_keys.end(), key) == config_keys.end()) {
            throw UsageError("config: unknown key '" + key + "' on line " + std::to_string(number));
        }
        // Flags given on the command line win.
        raw.values.emplace(key, trim(line.substr(eq + 1)));
    }
}

struct RunConfig {
    int n = 0;
    double x = 0.0;
    Weights mu{{1, 1.0}, {-1, -1.0}};
    std::vector<double> q0;
    std::vector<double> p0;
    double t_end = 1.0;
    int samples = 21;
    std::string engine = "double";
    std::uint64_t seed = 20240601;
    std::string format = "json";
    std::string out;
};

RunConfig resolve(const RawOptions& raw, bool need_point) {
    RunConfig cfg;
    const auto n = raw.get("n");
    if (!n) {
        throw UsageError("missing required flag --n");
    }
    const long long nv = parse_integer(*n, "n");
    if (nv < 1 || nv > 64) {
        throw UsageError("n: must lie in [1, 64]");
    }
    cfg.n = static_cast<int>(nv);
    const auto x = raw.get("x");
    if (!x) {
        throw UsageError("missing required flag --x");
    }
    cfg.x = parse_real(*x, "x");
    if (cfg.x == 0.0) {
        throw UsageError("x: the coupling must be non-zero");
    }
    if (const auto mu = raw.get("mu")) {
        cfg.mu = parse_mu(*mu);
    }
    if (const auto q0 = raw.get("q0")) {
        cfg.q0 = parse_reals(*q0, "q0");
    }
    if (const auto p0 = raw.get("p0")) {
        cfg.p0 = parse_reals(*p0, "p0");
    }
    if (const auto t = raw.get("t_end")) {
        cfg.t_end = parse_real(*t, "t_end");
        if (!(cfg.t_end > 0.0)) {
            throw UsageError("t_end: must be positive");
        }
    }
    if (const auto s = raw.get("samples")) {
        const long long sv = parse_integer(*s, "samples");
        if (sv < 2 || sv > 10'000'000) {
            throw UsageError("samples: must be at least 2");
        }
        cfg.samples = static_cast<int>(sv);
    }
    if (const auto e = raw.get("engine")) {
        cfg.engine = *e;
        if (cfg.engine != "double" && cfg.engine != "projection" && cfg.engine != "ode" && cfg.engine != "all") {
            throw UsageError("engine: expected one of double, projection, ode, all");
        }
    }
    if (const auto s = raw.get("seed")) {
        const long long sv = parse_integer(*s, "seed");
        if (sv < 0) {
            throw UsageError("seed: must be non-negative");
        }
        cfg.seed = static_cast<std::uint64_t>(sv);
    }
    if (const auto f = raw.get("format")) {
        cfg.format = *f;
        if (cfg.format != "json" && cfg.format != "csv") {
            throw UsageError("format: expected json or csv");
        }
    }
    if (const auto o = raw.get("out")) {
        cfg.out = *o;
    }
    const auto n_size = static_cast<std::size_t>(cfg.n);
    if (!cfg.q0.empty() && cfg.q0.size() != n_size) {
        throw UsageError("q0: expected " + std::to_string(cfg.n) + " values");
    }
    if (!cfg.p0.empty() && cfg.p0.size() != n_size) {
        throw UsageError("p0: expected " + std::to_string(cfg.n) + " values");
    }
    if (need_point && cfg.q0.empty()) {
        throw UsageError("missing required flag --q0");
    }
    return cfg;
}

// Seeded start in the alcove, well away from collisions and walls.
void fill_random_state(RunConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double pi = std::numbers::pi;
    if (cfg.q0.empty()) {
        const double gap = 0.5 * pi / cfg.n;
        for (;;) {
            std::vector<double> q(cfg.n);
            for (double& v : q) {
                v = 0.35 + (pi - 0.7) * unit(rng);
            }
            std::sort(q.begin(), q.end(), std::greater<>());
            bool ok = pi - (q.front() - q.back()) > gap;
            for (int k = 0; k + 1 < cfg.n; ++k) {
                ok = ok && q[k] - q[k + 1] > gap;
            }
            if (ok) {
                cfg.q0 = std::move(q);
                break;
            }
        }
    }
    if (cfg.p0.empty()) {
        cfg.p0.resize(cfg.n);
        for (double& v : cfg.p0) {
            v = -0.5 + unit(rng);
        }
    }
}

struct SystemDeleter {
    void operator()(plrs_system* s) const { plrs_system_destroy(s); }
};
struct TrajectoryDeleter {
    void operator()(plrs_trajectory* t) const { plrs_trajectory_destroy(t); }
};
struct ReportDeleter {
    void operator()(plrs_report* r) const { plrs_report_destroy(r); }
};
using SystemPtr = std::unique_ptr<plrs_system, SystemDeleter>;
using TrajectoryPtr = std::unique_ptr<plrs_trajectory, TrajectoryDeleter>;
using ReportPtr = std::unique_ptr<plrs_report, ReportDeleter>;

// Invalid user input surfaces as a usage error rather than a runtime failure.
void check_input(plrs_status status, const std::string& what) {
    if (status == PLRS_ERR_INVALID_ARGUMENT || status == PLRS_ERR_DEGENERATE_ALCOVE) {
        throw UsageError(what + ": " + plrs_last_error());
    }
    check(status, what.c_str());
}

SystemPtr make_system(const RunConfig& cfg, bool with_state) {
    plrs_system* raw = nullptr;
    check_input(plrs_system_create(cfg.n, cfg.x, &raw), "system");
    SystemPtr sys(raw);
    std::vector<int> powers;
    std::vector<double> weights;
    for (const auto& [j, w] : cfg.mu) {
        powers.push_back(j);
        weights.push_back(w);
    }
    check_input(plrs_system_set_mu(sys.get(), powers.data(), weights.data(), powers.size()), "mu");
    if (with_state) {
        std::vector<double> p = cfg.p0.empty() ? std::vector<double>(cfg.n, 0.0) : cfg.p0;
        check_input(plrs_system_set_state(sys.get(), cfg.q0.data(), p.data()), "q0");
    }
    return sys;
}

plrs_engine engine_from(const std::string& name) {
    if (name == "projection") {
        return PLRS_ENGINE_PROJECTION;
    }
    if (name == "ode") {
        return PLRS_ENGINE_ODE;
    }
    return PLRS_ENGINE_DOUBLE;
}

// Plain copy of a trajectory handle's contents.
struct Samples {
    std::string engine;
    int n = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> q, p, spectrum;
    std::vector<double> energy, residual;
    bool has_momenta = false;
    bool has_residual = false;
    bool truncated = false;
    plrs_status failure = PLRS_OK;
    double failure_time = 0.0;
    std::string failure_message;
};

Samples read_trajectory(const plrs_trajectory* traj, const std::string& engine) {
    Samples s;
    s.engine = engine;
    s.n = plrs_trajectory_dim(traj);
    s.has_momenta = plrs_trajectory_has_momenta(traj) != 0;
    s.has_residual = plrs_trajectory_has_constraint_residual(traj) != 0;
    const bool has_energy = plrs_trajectory_has_energy(traj) != 0;
    const std::size_t len = plrs_trajectory_length(traj);
    for (std::size_t i = 0; i < len; ++i) {
        s.times.push_back(plrs_trajectory_time(traj, i));
        std::vector<double> row(s.n);
        check(plrs_trajectory_q(traj, i, row.data()), "trajectory q");
        s.q.push_back(row);
        if (s.has_momenta) {
            check(plrs_trajectory_p(traj, i, row.data()), "trajectory p");
            s.p.push_back(row);
        }
        if (has_energy) {
            s.energy.push_back(plrs_trajectory_energy(traj, i));
            check(plrs_trajectory_lax_spectrum(traj, i, row.data()), "trajectory spectrum");
            s.spectrum.push_back(row);
        }
        if (s.has_residual) {
            s.residual.push_back(plrs_trajectory_constraint_residual(traj, i));
        }
    }
    s.truncated = plrs_trajectory_truncated(traj) != 0;
    const char* message = nullptr;
    s.failure = plrs_trajectory_failure(traj, &s.failure_time, &message);
    s.failure_message = message ? message : "";
    return s;
}

Samples simulate(const plrs_system* sys, const std::string& engine, const std::vector<double>& times) {
    plrs_trajectory* raw = nullptr;
    check(plrs_simulate(sys, engine_from(engine), times.data(), times.size(), nullptr, &raw), "simulate");
    TrajectoryPtr traj(raw);
    return read_trajectory(traj.get(), engine);
}

double max_abs_difference(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
    double worst = 0.0;
    const std::size_t len = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t k = 0; k < a[i].size(); ++k) {
            worst = std::max(worst, std::abs(a[i][k] - b[i][k]));
        }
    }
    return worst;
}

json deviations_against(const Samples& s, const Samples& reference) {
    json d;
    d["reference"] = reference.engine;
    d["samples_compared"] = std::min(s.times.size(), reference.times.size());
    d["q_max_abs"] = max_abs_difference(s.q, reference.q);
    if (s.has_momenta && reference.has_momenta) {
        d["p_max_abs"] = max_abs_difference(s.p, reference.p);
    }
    double energy = 0.0;
    for (std::size_t i = 0; i < std::min(s.energy.size(), reference.energy.size()); ++i) {
        energy = std::max(energy, std::abs(s.energy[i] - reference.energy[i]));
    }
    d["energy_max_abs"] = energy;
    return d;
}

json to_json(const Samples& s, const RunConfig& cfg) {
    json j;
    j["meta"] = {{"n", cfg.n},           {"x", cfg.x},         {"mu", mu_json(cfg.mu)},
                 {"engine", s.engine},   {"seed", cfg.seed},   {"truncated", s.truncated}};
    if (s.truncated) {
        j["meta"]["failure"] = {{"time", s.failure_time},
                                {"status", plrs_status_string(s.failure)},
                                {"message", s.failure_message}};
    }
    j["times"] = s.times;
    j["q"] = s.q;
    j["p"] = s.has_momenta ? json(s.p) : json(nullptr);
    j["energy"] = s.energy;
    j["lax_spectrum"] = s.spectrum;
    j["constraint_residual"] = s.has_residual ? json(s.residual) : json(nullptr);
    return j;
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(std::ostream& out, const Samples& s) {
    out << "t";
    for (int k = 1; k <= s.n; ++k) {
        out << ",q" << k;
    }
    for (int k = 1; k <= s.n; ++k) {
        out << ",p" << k;
    }
    out << ",energy,res\n";
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        out << g17(s.times[i]);
        for (double v : s.q[i]) {
            out << ',' << g17(v);
        }
        for (int k = 0; k < s.n; ++k) {
            out << ',';
            if (s.has_momenta) {
                out << g17(s.p[i][k]);
            }
        }
        out << ',' << (i < s.energy.size() ? g17(s.energy[i]) : "");
        out << ',' << (s.has_residual ? g17(s.residual[i]) : "");
        out << '\n';
    }
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw UsageError("out: cannot write '" + path + "'");
    }
    return out;
}

std::string engine_path(const std::string& out, const std::string& engine) {
    const std::filesystem::path path(out);
    std::filesystem::path result = path.parent_path() / path.stem();
    return result.string() + "." + engine + (path.has_extension() ? path.extension().string() : ".csv");
}

int cmd_simulate(const RawOptions& raw) {
    RunConfig cfg = resolve(raw, false);
    fill_random_state(cfg);
    const SystemPtr sys = make_system(cfg, true);

    std::vector<double> times(cfg.samples);
    for (int i = 0; i < cfg.samples; ++i) {
        times[i] = cfg.t_end * i / (cfg.samples - 1);
    }
    times.back() = cfg.t_end;

    std::vector<Samples> runs;
    if (cfg.engine == "all") {
        // The engines share only immutable inputs.
        std::vector<std::future<Samples>> jobs;
        for (const char* engine : {"double", "projection", "ode"}) {
            jobs.push_back(std::async(std::launch::async, [&, engine] { return simulate(sys.get(), engine, times); }));
        }
        for (auto& job : jobs) {
            runs.push_back(job.get());
        }
        // Positions alone do not fix the energy; take it from the double engine where both have samples.
        const Samples& dbl = runs[0];
        Samples& proj = runs[1];
        for (std::size_t i = 0; i < std::min(dbl.times.size(), proj.times.size()); ++i) {
            proj.energy[i] = dbl.energy[i];
            proj.spectrum[i] = dbl.spectrum[i];
        }
    } else {
        runs.push_back(simulate(sys.get(), cfg.engine, times));
    }

    if (cfg.format == "json") {
        json doc;
        if (runs.size() == 1) {
            doc = to_json(runs.front(), cfg);
        } else {
            doc = json::array();
            for (const Samples& s : runs) {
                json block = to_json(s, cfg);
                if (s.engine != "double") {
                    block["deviations"] = deviations_against(s, runs.front());
                }
                doc.push_back(std::move(block));
            }
        }
        const std::string text = doc.dump(2) + "\n";
        if (cfg.out.empty()) {
            std::cout << text;
        } else {
            open_output(cfg.out) << text;
        }
    } else if (runs.size() == 1) {
        if (cfg.out.empty()) {
            write_csv(std::cout, runs.front());
        } else {
            auto out = open_output(cfg.out);
            write_csv(out, runs.front());
        }
    } else {
        if (cfg.out.empty()) {
            throw UsageError("out: --engine all with --format csv writes one file per engine and needs --out");
        }
        for (const Samples& s : runs) {
            auto out = open_output(engine_path(cfg.out, s.engine));
            write_csv(out, s);
        }
    }

    int code = exit_ok;
    for (const Samples& s : runs) {
        if (s.truncated) {
            std::cerr << "plrs: " << s.engine << " engine stopped at t = " << s.failure_time << ": "
                      << plrs_status_string(s.failure) << " (" << s.failure_message << ")\n";
            code = exit_degenerate;
        }
    }
    return code;
}

plrs_mutation mutation_from(const std::string& name) {
    if (name == "none") {
        return PLRS_MUTATION_NONE;
    }
    if (name == "zeta-half") {
        return PLRS_MUTATION_ZETA_HALF;
    }
    if (name == "zeta-flipped-signs") {
        return PLRS_MUTATION_ZETA_FLIPPED_SIGNS;
    }
    if (name == "nu-perturbed") {
        return PLRS_MUTATION_NU_PERTURBED;
    }
    throw UsageError("mutate: expected none, zeta-half, zeta-flipped-signs or nu-perturbed");
}

struct VerifyArgs {
    int n_max = 5;
    long long seed = 20240601;
    bool strict = false;
    std::string mutate = "none";
    int criterion = 0;
    std::string json_path;
    std::string format = "text";
};

int cmd_verify(const VerifyArgs& args) {
    if (args.n_max < 2 || args.n_max > 8) {
        throw UsageError("n-max: must lie in [2, 8]");
    }
    if (args.seed < 0) {
        throw UsageError("seed: must be non-negative");
    }
    if (args.format != "text" && args.format != "json") {
        throw UsageError("format: expected text or json");
    }
    const plrs_mutation mutation = mutation_from(args.mutate);
    plrs_report* raw = nullptr;
    if (args.criterion != 0) {
        if (args.criterion < 1 || args.criterion > 9) {
            throw UsageError("criterion: must lie in [1, 9]");
        }
        if (args.strict || mutation != PLRS_MUTATION_NONE) {
            throw UsageError("criterion: cannot be combined with --strict or --mutate");
        }
        check(plrs_verify_criterion(args.criterion, args.n_max, static_cast<std::uint64_t>(args.seed), &raw), "verify");
    } else {
        check(plrs_verify(args.n_max, static_cast<std::uint64_t>(args.seed), args.strict ? 1 : 0, mutation, &raw),
              "verify");
    }
    const ReportPtr report(raw);

    json doc;
    doc["n_max"] = args.n_max;
    doc["seed"] = args.seed;
    doc["strict"] = args.strict;
    doc["mutation"] = args.mutate;
    doc["properties"] = json::array();
    std::ostringstream text;
    std::size_t failures = 0;
    const std::size_t count = plrs_report_count(report.get());
    for (std::size_t i = 0; i < count; ++i) {
        const char* module = nullptr;
        const char* name = nullptr;
        int criterion = 0, passed = 0;
        double worst = 0.0, tolerance = 0.0;
        std::size_t samples = 0;
        check(plrs_report_entry(report.get(), i, &module, &name, &criterion, &worst, &tolerance, &samples, &passed),
              "report");
        failures += passed ? 0 : 1;
        char line[256];
        std::snprintf(line, sizeof line, "%-4s %-10s %-60s worst %-10.3e tol %-8.1e samples %zu%s\n",
                      passed ? "ok" : "FAIL", module, name, worst, tolerance, samples,
                      criterion > 0 ? (" [criterion " + std::to_string(criterion) + "]").c_str() : "");
        text << line;
        doc["properties"].push_back({{"module", module},
                                     {"property", name},
                                     {"criterion", criterion},
                                     {"worst", std::isfinite(worst) ? json(worst) : json("inf")},
                                     {"tolerance", tolerance},
                                     {"samples", samples},
                                     {"passed", passed != 0}});
    }
    const bool all_passed = plrs_report_all_passed(report.get()) != 0;
    doc["passed"] = all_passed;
    text << count - failures << "/" << count << " properties passed\n";

    if (args.format == "json") {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << text.str();
    }
    if (!args.json_path.empty()) {
        open_output(args.json_path) << doc.dump(2) << "\n";
    }
    return all_passed ? exit_ok : exit_verify_failed;
}

std::string g15(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

std::string complex_text(double re, double im) {
    if (im == 0.0) {
        return g15(re);
    }
    return g15(re) + (std::signbit(im) ? "-" : "+") + g15(std::abs(im)) + "i";
}

int cmd_show(const std::string& what, const RawOptions& raw, const std::string& format) {
    const bool needs_point = what == "nmatrix" || what == "lax" || what == "rslax" || what == "hamiltonian";
    const RunConfig cfg = resolve(raw, needs_point);
    if (format != "text" && format != "json") {
        throw UsageError("format: expected text or json");
    }
    const SystemPtr sys = make_system(cfg, needs_point);
    const std::size_t n = static_cast<std::size_t>(cfg.n);

    json doc;
    doc["what"] = what;
    doc["n"] = cfg.n;
    doc["x"] = cfg.x;
    std::ostringstream text;

    auto emit_matrix = [&](plrs_status (*fn)(const plrs_system*, double*, double*)) {
        std::vector<double> re(n * n), im(n * n);
        check(fn(sys.get(), re.data(), im.data()), what.c_str());
        json jre = json::array(), jim = json::array();
        for (std::size_t r = 0; r < n; ++r) {
            json row_re = json::array(), row_im = json::array();
            for (std::size_t c = 0; c < n; ++c) {
                row_re.push_back(re[r * n + c]);
                row_im.push_back(im[r * n + c]);
                text << (c ? "  " : "") << complex_text(re[r * n + c], im[r * n + c]);
            }
            text << "\n";
            jre.push_back(row_re);
            jim.push_back(row_im);
        }
        doc["re"] = jre;
        doc["im"] = jim;
    };

    if (what == "nu") {
        emit_matrix(plrs_nu);
    } else if (what == "nmatrix") {
        emit_matrix(plrs_n_matrix);
    } else if (what == "lax") {
        emit_matrix(plrs_lax);
    } else if (what == "rslax") {
        emit_matrix(plrs_rs_lax);
    } else if (what == "v") {
        std::vector<double> v(n);
        check(plrs_kks_vector(sys.get(), v.data()), "v");
        for (std::size_t k = 0; k < n; ++k) {
            text << (k ? "  " : "") << g15(v[k]);
        }
        text << "\n";
        doc["values"] = v;
    } else if (what == "hamiltonian") {
        double value = 0.0;
        check(plrs_reduced_hamiltonian(sys.get(), &value), "hamiltonian");
        text << g15(value) << "\n";
        doc["mu"] = mu_json(cfg.mu);
        doc["value"] = value;
    } else {
        throw UsageError("show: unknown object '" + what + "'");
    }
    if (format == "json") {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << text.str();
    }
    return exit_ok;
}

// Registers the run-configuration flags; only flags actually given end up in `raw`.
void add_run_flags(CLI::App& cmd, std::map<std::string, std::string>& given, std::string& config_path) {
    struct Flag {
        const char* name;
        const char* key;
        const char* help;
    };
    static const Flag flags[] = {
        {"--n", "n", "number of particles"},
        {"--x", "x", "coupling, non-zero"},
        {"--mu", "mu", "weights as j:w pairs, e.g. 1:1,-1:-1 (default)"},
        {"--q0", "q0", "initial positions, pi > q1 > ... > qn >= 0 (random from --seed if absent)"},
        {"--p0", "p0", "initial momenta (random from --seed if absent)"},
        {"--t-end", "t_end", "final time (default 1)"},
        {"--samples", "samples", "number of time samples including t = 0 (default 21)"},
        {"--engine", "engine", "double, projection, ode or all (default double)"},
        {"--seed", "seed", "seed for random initial data (default 20240601)"},
        {"--out", "out", "output file (default stdout)"},
    };
    for (const Flag& f : flags) {
        cmd.add_option_function<std::string>(
               f.name, [&given, key = std::string(f.key)](const std::string& v) { given[key] = v; }, f.help)
            ->allow_extra_args(false);
    }
    cmd.add_option("--config", config_path, "file of key = value lines; flags override it");
}

RawOptions gather(const std::map<std::string, std::string>& given, const std::string& config_path) {
    RawOptions raw;
    raw.values = given;
    if (!config_path.empty()) {
        merge_config_file(config_path, raw);
    }
    return raw;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ruijsenaars-Schneider dynamics from Poisson-Lie reduction of the Heisenberg double.\n"
                 "Precedence of settings: command-line flags, then --config file, then defaults.\n"
                 "Exit codes: 0 success, 1 verification failure, 2 usage error, 3 degenerate run."};
    app.require_subcommand(1);
    app.set_version_flag("--version", plrs_version());

    std::map<std::string, std::string> sim_given;
    std::string sim_config;
    auto* sim = app.add_subcommand("simulate", "integrate the reduced flow with one or all engines");
    add_run_flags(*sim, sim_given, sim_config);
    sim->add_option_function<std::string>(
        "--format", [&](const std::string& v) { sim_given["format"] = v; }, "json (default) or csv");

    VerifyArgs verify_args;
    auto* ver = app.add_subcommand("verify", "run the property and oracle suite");
    ver->add_option("--n-max", verify_args.n_max, "largest matrix size, 2..8 (default 5)");
    ver->add_option("--seed", verify_args.seed, "sampling seed");
    ver->add_flag("--strict", verify_args.strict, "halve every tolerance");
    ver->add_option("--mutate", verify_args.mutate,
                    "inject a known fault: none, zeta-half, zeta-flipped-signs, nu-perturbed");
    ver->add_option("--criterion", verify_args.criterion, "run one acceptance criterion (1..9)");
    ver->add_option("--json", verify_args.json_path, "also write the report as JSON to this file");
    ver->add_option("--format", verify_args.format, "text (default) or json on stdout");

    std::map<std::string, std::string> show_given;
    std::string show_config, show_what, show_format = "text";
    auto* show = app.add_subcommand("show", "print nu, v, nmatrix, lax, rslax or hamiltonian");
    show->add_option("what", show_what, "object to print")
        ->required()
        ->check(CLI::IsMember({"nu", "v", "nmatrix", "lax", "rslax", "hamiltonian"}));
    add_run_flags(*show, show_given, show_config);
    show->add_option("--format", show_format, "text (default) or json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (sim->parsed()) {
            return cmd_simulate(gather(sim_given, sim_config));
        }
        if (ver->parsed()) {
            return cmd_verify(verify_args);
        }
        return cmd_show(show_what, gather(show_given, show_config), show_format);
    } catch (const UsageError& e) {
        std::cerr << "plrs: " << e.what() << "\n";
        return exit_usage;
    } catch (const RuntimeFailure& e) {
        std::cerr << "plrs: " << e.what() << "\n";
        return exit_degenerate;
    }
}
