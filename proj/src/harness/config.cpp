#include <openssl/evp.h>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "ncdecay/csv.hpp"
#include "ncdecay/harness.hpp"

extern char** environ;

namespace ncdecay::harness {

ConfigError::ConfigError(std::string field, const std::string& message)
    : InvalidArgument("harness", field + ": " + message), field_(std::move(field)) {}

bool ExperimentConfig::wants(std::string_view format) const {
    return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
}

Environment process_environment() {
    Environment env;
    for (char** e = environ; e && *e; ++e) {
        std::string_view kv(*e);
        if (!kv.starts_with(kEnvPrefix)) continue;
        const auto eq = kv.find('=');
        if (eq == std::string_view::npos) continue;
        env.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
    }
    return env;
}

namespace {

const std::set<std::string> kBlocks{"problem", "numerics", "analysis", "output"};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string type_name(const toml::node& n) {
    switch (n.type()) {
        case toml::node_type::string: return "string";
        case toml::node_type::integer: return "integer";
        case toml::node_type::floating_point: return "float";
        case toml::node_type::boolean: return "boolean";
        case toml::node_type::array: return "array";
        case toml::node_type::table: return "table";
        default: return "value";
    }
}

double get_real(const toml::node& n, const std::string& field) {
    if (n.is_integer()) return static_cast<double>(*n.value<std::int64_t>());
    if (n.is_floating_point()) return *n.value<double>();
    throw ConfigError(field, "expected a number, got " + type_name(n));
}

std::int64_t get_int(const toml::node& n, const std::string& field) {
    if (!n.is_integer()) throw ConfigError(field, "expected an integer, got " + type_name(n));
    return *n.value<std::int64_t>();
}

std::size_t get_count(const toml::node& n, const std::string& field) {
    const auto v = get_int(n, field);
    if (v < 1) throw ConfigError(field, "must be a positive integer");
    return static_cast<std::size_t>(v);
}

std::string get_string(const toml::node& n, const std::string& field) {
    if (!n.is_string()) throw ConfigError(field, "expected a string, got " + type_name(n));
    return *n.value<std::string>();
}

bool get_bool(const toml::node& n, const std::string& field) {
    if (!n.is_boolean()) throw ConfigError(field, "expected a boolean, got " + type_name(n));
    return *n.value<bool>();
}

const toml::array& get_array(const toml::node& n, const std::string& field) {
    if (!n.is_array()) throw ConfigError(field, "expected an array, got " + type_name(n));
    return *n.as_array();
}

std::vector<double> get_reals(const toml::node& n, const std::string& field) {
    std::vector<double> out;
    const auto& arr = get_array(n, field);
    for (std::size_t i = 0; i < arr.size(); ++i)
        out.push_back(get_real(arr[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::string> get_strings(const toml::node& n, const std::string& field) {
    std::vector<std::string> out;
    const auto& arr = get_array(n, field);
    for (std::size_t i = 0; i < arr.size(); ++i)
        out.push_back(get_string(arr[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

void one_of(const std::string& v, std::initializer_list<const char*> allowed, const std::string& field) {
    for (const char* a : allowed)
        if (v == a) return;
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    throw ConfigError(field, "'" + v + "' is not one of {" + list + "}");
}

// Reads the value text of an environment override as TOML, else as a string.
void insert_override(toml::table& tbl, const std::string& key, const std::string& raw) {
    try {
        toml::table tmp = toml::parse("v = " + raw);
        if (auto* n = tmp.get("v")) {
            tbl.insert_or_assign(key, *n);
            return;
        }
    } catch (const toml::parse_error&) {
    }
    tbl.insert_or_assign(key, raw);
}

void apply_environment(toml::table& root, const Environment& env) {
    for (const auto& [name, value] : env) {
        if (!std::string_view(name).starts_with(kEnvPrefix)) continue;
        const std::string rest = lower(name.substr(kEnvPrefix.size()));
        const auto us = rest.find('_');
        const std::string head = rest.substr(0, us);
        if (us != std::string::npos && kBlocks.count(head)) {
            const std::string key = rest.substr(us + 1);
            if (!root.contains(head)) root.insert(head, toml::table{});
            auto* blk = root.get(head)->as_table();
            if (!blk) throw ConfigError(head, "expected a table");
            insert_override(*blk, key, value);
        } else {
            insert_override(root, rest, value);
        }
    }
}

void validate(const ExperimentConfig& c) {
    const auto& p = c.problem;
    if (!(p.alpha >= 0.0 && p.alpha < 1.0)) throw ConfigError("problem.alpha", "must lie in [0, 1)");
    if (!(p.a > 0.0)) throw ConfigError("problem.a", "must be positive");
    if (!(p.L0 > 0.0)) throw ConfigError("problem.L0", "must be positive");
    if (!(p.k > 0.0)) throw ConfigError("problem.k", "must be positive");
    if (!std::isfinite(p.gamma)) throw ConfigError("problem.gamma", "must be finite");
    const auto& init = p.initial;
    if (!(init == "sine" || init == "bump" || init.starts_with("sine:") ||
          init.starts_with("eigen:") || init.starts_with("file:")))
        throw ConfigError("problem.initial", "expected sine, sine:m, bump, eigen:n or file:PATH");
    for (const char* pre : {"sine:", "eigen:"}) {
        if (!init.starts_with(pre)) continue;
        const std::string num = init.substr(std::string_view(pre).size());
        char* end = nullptr;
        const long n = std::strtol(num.c_str(), &end, 10);
        if (num.empty() || *end != '\0' || n < 1)
            throw ConfigError("problem.initial", "index in '" + init + "' must be a positive integer");
        if (init.starts_with("eigen:") && static_cast<std::size_t>(n) * 4 > c.numerics.cells)
            throw ConfigError("problem.initial", "eigen index exceeds the resolvable count N/4");
    }
    const auto& n = c.numerics;
    if (n.cells < 8) throw ConfigError("numerics.N", "need at least 8 cells");
    if (n.grading && !(*n.grading >= 1.0)) throw ConfigError("numerics.grading", "must be >= 1");
    if (!(n.theta >= 0.0 && n.theta <= 1.0)) throw ConfigError("numerics.theta", "must lie in [0, 1]");
    one_of(n.scheme, {"theta", "fractional-theta"}, "numerics.scheme");
    one_of(n.drift, {"upwind", "hybrid"}, "numerics.drift");
    one_of(n.time_grid, {"geometric", "uniform"}, "numerics.time_grid");
    if (!(n.t_max > 0.0)) throw ConfigError("numerics.t_max", "must be positive");
    if (n.regularization && *n.regularization < 1)
        throw ConfigError("numerics.regularization", "must be >= 1");
    const auto& a = c.analysis;
    for (const auto& b : a.bounds)
        if (b != "auto") {
            try {
                (void)bound_kind_from_string(b);
            } catch (const InvalidArgument&) {
                throw ConfigError("analysis.bounds", "unknown bound '" + b + "'");
            }
        }
    if (std::isfinite(a.rho) && !(a.rho > 0.0)) throw ConfigError("analysis.rho", "must be positive");
    if (!(a.slack >= 0.0)) throw ConfigError("analysis.slack", "must be nonnegative");
    if (!(a.window_decades > 0.0)) throw ConfigError("analysis.window_decades", "must be positive");
    if (!(a.agreement_threshold >= 0.0 && a.agreement_threshold <= 1.0))
        throw ConfigError("analysis.agreement_threshold", "must lie in [0, 1]");
    for (double al : a.sweep_alpha)
        if (!(al >= 0.0 && al < 1.0)) throw ConfigError("analysis.sweep_alpha", "entries must lie in [0, 1)");
    if (a.eigen_count < 1) throw ConfigError("analysis.eigen_count", "must be >= 1");
    one_of(a.eigen_kind, {"auto", "selfsimilar", "degenerate-critical"}, "analysis.eigen_kind");
    for (const auto& f : c.output.formats) one_of(f, {"csv", "svg", "json"}, "output.formats");
    if (c.threads < 1) throw ConfigError("threads", "must be >= 1");
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const Environment& env, std::string_view source) {
    toml::table root;
    try {
        root = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << e.description() << " at line " << e.source().begin.line;
        throw ConfigError(std::string(source), msg.str());
    }
    apply_environment(root, env);

    ExperimentConfig c;
    for (auto&& [key, node] : root) {
        const std::string k(key.str());
        if (k == "seed") {
            const auto v = get_int(node, k);
            if (v < 0) throw ConfigError(k, "must be nonnegative");
            c.seed = static_cast<std::uint64_t>(v);
        } else if (k == "threads") {
            c.threads = get_count(node, k);
        } else if (kBlocks.count(k)) {
            if (!node.is_table()) throw ConfigError(k, "expected a table, got " + type_name(node));
        } else {
            throw ConfigError(k, "unknown key");
        }
    }
    auto block = [&](const char* name, auto&& handle) {
        const auto* t = root.get(name);
        if (!t) return;
        for (auto&& [key, node] : *t->as_table()) {
            const std::string field = std::string(name) + "." + std::string(key.str());
            if (!handle(std::string(key.str()), node, field)) throw ConfigError(field, "unknown key");
        }
    };
    block("problem", [&](const std::string& k, const toml::node& n, const std::string& f) {
        auto& p = c.problem;
        if (k == "alpha") p.alpha = get_real(n, f);
        else if (k == "a") p.a = get_real(n, f);
        else if (k == "L0" || k == "l0") p.L0 = get_real(n, f);
        else if (k == "k") p.k = get_real(n, f);
        else if (k == "gamma") p.gamma = get_real(n, f);
        else if (k == "initial") p.initial = get_string(n, f);
        else return false;
        return true;
    });
    block("numerics", [&](const std::string& k, const toml::node& n, const std::string& f) {
        auto& m = c.numerics;
        if (k == "N" || k == "n") m.cells = get_count(n, f);
        else if (k == "grading") m.grading = get_real(n, f);
        else if (k == "theta") m.theta = get_real(n, f);
        else if (k == "scheme") m.scheme = get_string(n, f);
        else if (k == "drift") m.drift = get_string(n, f);
        else if (k == "time_grid") m.time_grid = get_string(n, f);
        else if (k == "intervals") m.intervals = get_count(n, f);
        else if (k == "t_max") m.t_max = get_real(n, f);
        else if (k == "max_log_decrement") m.max_log_decrement = get_real(n, f);
        else if (k == "regularization") m.regularization = static_cast<int>(get_int(n, f));
        else return false;
        return true;
    });
    block("analysis", [&](const std::string& k, const toml::node& n, const std::string& f) {
        auto& a = c.analysis;
        if (k == "bounds") a.bounds = get_strings(n, f);
        else if (k == "rho") a.rho = get_real(n, f);
        else if (k == "slack") a.slack = get_real(n, f);
        else if (k == "window_decades") a.window_decades = get_real(n, f);
        else if (k == "classify") a.classify = get_bool(n, f);
        else if (k == "sweep_alpha") a.sweep_alpha = get_reals(n, f);
        else if (k == "sweep_gamma") a.sweep_gamma = get_reals(n, f);
        else if (k == "agreement_threshold") a.agreement_threshold = get_real(n, f);
        else if (k == "eigen_count") a.eigen_count = static_cast<int>(get_int(n, f));
        else if (k == "eigen_kind") a.eigen_kind = get_string(n, f);
        else return false;
        return true;
    });
    block("output", [&](const std::string& k, const toml::node& n, const std::string& f) {
        if (k == "directory") c.output.directory = get_string(n, f);
        else if (k == "formats") c.output.formats = get_strings(n, f);
        else return false;
        return true;
    });
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, const Environment& env) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    ExperimentConfig c = parse_config(buf.str(), env, path.string());
    c.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return c;
}

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    return out + "\"";
}

std::string real(double v) {
    // TOML needs a decimal point or exponent for floats.
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::string s = format_real(v);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

template <class T, class F>
std::string list(const std::vector<T>& v, F f) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + f(v[i]);
    return out + "]";
}

}  // namespace

std::string canonical_text(const ExperimentConfig& c) {
    std::ostringstream o;
    o << "seed = " << c.seed << "\n";
    o << "threads = " << c.threads << "\n\n";
    o << "[problem]\n";
    o << "alpha = " << real(c.problem.alpha) << "\n";
    o << "a = " << real(c.problem.a) << "\n";
    o << "L0 = " << real(c.problem.L0) << "\n";
    o << "k = " << real(c.problem.k) << "\n";
    o << "gamma = " << real(c.problem.gamma) << "\n";
    o << "initial = " << quote(c.problem.initial) << "\n\n";
    o << "[numerics]\n";
    o << "N = " << c.numerics.cells << "\n";
    if (c.numerics.grading) o << "grading = " << real(*c.numerics.grading) << "\n";
    o << "theta = " << real(c.numerics.theta) << "\n";
    o << "scheme = " << quote(c.numerics.scheme) << "\n";
    o << "drift = " << quote(c.numerics.drift) << "\n";
    o << "time_grid = " << quote(c.numerics.time_grid) << "\n";
    o << "intervals = " << c.numerics.intervals << "\n";
    o << "t_max = " << real(c.numerics.t_max) << "\n";
    o << "max_log_decrement = " << real(c.numerics.max_log_decrement) << "\n";
    if (c.numerics.regularization) o << "regularization = " << *c.numerics.regularization << "\n";
    o << "\n[analysis]\n";
    o << "bounds = " << list(c.analysis.bounds, quote) << "\n";
    if (std::isfinite(c.analysis.rho)) o << "rho = " << real(c.analysis.rho) << "\n";
    o << "slack = " << real(c.analysis.slack) << "\n";
    o << "window_decades = " << real(c.analysis.window_decades) << "\n";
    o << "classify = " << (c.analysis.classify ? "true" : "false") << "\n";
    o << "sweep_alpha = " << list(c.analysis.sweep_alpha, real) << "\n";
    o << "sweep_gamma = " << list(c.analysis.sweep_gamma, real) << "\n";
    o << "agreement_threshold = " << real(c.analysis.agreement_threshold) << "\n";
    o << "eigen_count = " << c.analysis.eigen_count << "\n";
    o << "eigen_kind = " << quote(c.analysis.eigen_kind) << "\n\n";
    o << "[output]\n";
    o << "directory = " << quote(c.output.directory) << "\n";
    o << "formats = " << list(c.output.formats, quote) << "\n";
    return o.str();
}

std::string config_hash(const ExperimentConfig& c) {
    const std::string text = canonical_text(c);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw NumericalFailure("harness", "SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view purpose) {
    // FNV-1a of the purpose, mixed into the root with splitmix64.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : purpose) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    std::uint64_t z = root ^ h;
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace ncdecay::harness
