#pragma once

// Flat `key = value` experiment configuration. Blank lines and text after '#'
// are ignored. Angle-like numeric fields accept arithmetic in `pi`, e.g.
// `theta1 = 3*pi/8`.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wedge_rbm/errors.hpp"
#include "wedge_rbm/geometry.hpp"
#include "wedge_rbm/skorokhod.hpp"

namespace wedge_rbm {

struct ExperimentConfig {
    // geometry
    double xi = kPi / 2;
    double theta1 = 3 * kPi / 8;
    double theta2 = 3 * kPi / 8;
    // simulation
    Vec2 z0;
    double dt = 1e-4;
    double t_end = 1.0;
    std::uint64_t seed = 20240601;
    std::size_t n_paths = 100;
    unsigned threads = 0;
    // analysis
    std::optional<double> eps_zero;  // unset: 5 sqrt(dt)
    double delta0 = 0.81;
    double delta_ratio = 3.0;
    int delta_levels = 4;
    std::vector<double> p_list{1.2, 1.8};
    double q = 0.9;
    double s0 = 1e-3;
    double hill_fraction = 0.1;
    std::size_t bootstrap = 200;
    // checker
    std::string vertex_cone = "bisector";
    double band = 1e-9;
    ToleranceProfile tolerances;
    std::size_t esp_anchors = 500;
    // output
    std::string output_dir = "out";
    std::vector<std::string> formats{"csv", "jsonl"};

    double eps() const { return eps_zero ? *eps_zero : 5.0 * std::sqrt(dt); }
    WedgeConfig wedge() const { return make_wedge(xi, theta1, theta2); }
    VertexCone cone(const WedgeConfig& cfg) const;
    bool wants(std::string_view format) const {
        return std::find(formats.begin(), formats.end(), format) != formats.end();
    }
};

namespace detail {

/// Recursive-descent evaluator for + - * / ( ) with numeric literals and pi.
class ExprParser {
public:
    ExprParser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

    double parse() {
        const double v = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(s_.substr(pos_)) + "'");
        return v;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_;

    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(line_, "bad number: " + what); }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    double expr() {
        double v = term();
        for (;;) {
            if (eat('+'))
                v += term();
            else if (eat('-'))
                v -= term();
            else
                return v;
        }
    }
    double term() {
        double v = factor();
        for (;;) {
            if (eat('*'))
                v *= factor();
            else if (eat('/'))
                v /= factor();
            else
                return v;
        }
    }
    double factor() {
        if (eat('-')) return -factor();
        if (eat('+')) return factor();
        if (eat('(')) {
            const double v = expr();
            if (!eat(')')) fail("missing ')'");
            return v;
        }
        skip();
        if (s_.substr(pos_, 2) == "pi") {
            pos_ += 2;
            return kPi;
        }
        const char* begin = s_.data() + pos_;
        const char* end = s_.data() + s_.size();
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc() || ptr == begin) fail("cannot read '" + std::string(s_.substr(pos_)) + "'");
        pos_ += static_cast<std::size_t>(ptr - begin);
        return v;
    }
};

inline std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline double parse_number(const std::string& v, std::size_t line) { return ExprParser(v, line).parse(); }

inline std::uint64_t parse_count(const std::string& v, std::size_t line, const std::string& key) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError(line, key + ": expected a non-negative integer, got '" + v + "'");
    return out;
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline VertexCone parse_vertex_cone(const std::string& v, const WedgeConfig& cfg, std::size_t line) {
    if (v == "bisector") return VertexCone::bisector(cfg);
    if (v == "zero") return VertexCone::zero();
    if (v == "full") return VertexCone::full_plane();
    if (v.rfind("ray:", 0) == 0) {
        const VertexCone c = VertexCone::ray(parse_number(v.substr(4), line));
        try {
            c.validate(cfg);
        } catch (const DomainError& e) {
            throw ConfigError(line, std::string("vertex_cone: ") + e.what());
        }
        return c;
    }
    throw ConfigError(line, "vertex_cone: expected bisector, zero, full or ray:<angle>, got '" + v + "'");
}

}  // namespace detail

inline VertexCone ExperimentConfig::cone(const WedgeConfig& cfg) const {
    return detail::parse_vertex_cone(vertex_cone, cfg, 0);
}

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "xi",          "theta1",         "theta2",          "z0_x",          "z0_y",
        "dt",          "t_end",          "seed",            "n_paths",       "threads",
        "eps_zero",    "delta0",         "delta_ratio",     "delta_levels",  "p_list",
        "q",           "s0",             "hill_fraction",   "bootstrap",     "vertex_cone",
        "band",        "tol_additivity", "tol_containment", "tol_monotonicity", "tol_offboundary",
        "tol_direction_deg", "tol_hull", "tol_spike",       "esp_anchors",   "output_dir",
        "formats"};
    return keys;
}

namespace detail {

inline void apply_key(ExperimentConfig& c, const std::string& key, const std::string& v, std::size_t line) {
    auto num = [&] { return parse_number(v, line); };
    auto count = [&] { return parse_count(v, line, key); };
    if (key == "xi") c.xi = num();
    else if (key == "theta1") c.theta1 = num();
    else if (key == "theta2") c.theta2 = num();
    else if (key == "z0_x") c.z0.x = num();
    else if (key == "z0_y") c.z0.y = num();
    else if (key == "dt") c.dt = num();
    else if (key == "t_end") c.t_end = num();
    else if (key == "seed") c.seed = count();
    else if (key == "n_paths") c.n_paths = count();
    else if (key == "threads") c.threads = static_cast<unsigned>(count());
    else if (key == "eps_zero") c.eps_zero = (v == "auto") ? std::nullopt : std::optional<double>(num());
    else if (key == "delta0") c.delta0 = num();
    else if (key == "delta_ratio") c.delta_ratio = num();
    else if (key == "delta_levels") c.delta_levels = static_cast<int>(count());
    else if (key == "p_list") {
        c.p_list.clear();
        for (const std::string& item : split_list(v)) c.p_list.push_back(parse_number(item, line));
    } else if (key == "q") c.q = num();
    else if (key == "s0") c.s0 = num();
    else if (key == "hill_fraction") c.hill_fraction = num();
    else if (key == "bootstrap") c.bootstrap = count();
    else if (key == "vertex_cone") c.vertex_cone = v;
    else if (key == "band") c.band = num();
    else if (key == "tol_additivity") c.tolerances.additivity = num();
    else if (key == "tol_containment") c.tolerances.containment = num();
    else if (key == "tol_monotonicity") c.tolerances.monotonicity = num();
    else if (key == "tol_offboundary") c.tolerances.offboundary_fraction = num();
    else if (key == "tol_direction_deg") c.tolerances.direction_deg = num();
    else if (key == "tol_hull") c.tolerances.hull = num();
    else if (key == "tol_spike") c.tolerances.spike = num();
    else if (key == "esp_anchors") c.esp_anchors = count();
    else if (key == "output_dir") c.output_dir = v;
    else if (key == "formats") {
        c.formats = split_list(v);
        for (const std::string& f : c.formats)
            if (f != "csv" && f != "jsonl") throw ConfigError(line, "formats: unknown format '" + f + "'");
    } else {
        std::string best;
        std::size_t best_d = std::string::npos;
        for (const std::string& k : config_keys()) {
            const std::size_t d = edit_distance(key, k);
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        std::string msg = "unknown key '" + key + "'";
        if (best_d <= std::max<std::size_t>(2, key.size() / 3)) msg += " (did you mean '" + best + "'?)";
        throw ConfigError(line, msg);
    }
}

}  // namespace detail

/// Checks every downstream precondition so that errors name the field.
inline void validate(const ExperimentConfig& c) {
    auto bad = [](const std::string& field, const std::string& what) { throw ConfigError(0, field + ": " + what); };
    WedgeConfig cfg;
    try {
        cfg = c.wedge();
    } catch (const DomainError& e) {
        throw ConfigError(0, e.what());
    }
    if (!(c.dt > 0.0) || !std::isfinite(c.dt)) bad("dt", "must be positive");
    if (!(c.t_end > c.dt) || !std::isfinite(c.t_end)) bad("t_end", "must exceed dt");
    if (!std::isfinite(c.z0.x) || !std::isfinite(c.z0.y) || !contains(c.z0, cfg)) bad("z0", "must lie in the wedge");
    if (c.n_paths < 1) bad("n_paths", "must be >= 1");
    if (!(c.eps() > 0.0)) bad("eps_zero", "must be > 0");
    if (!(c.delta0 > 0.0)) bad("delta0", "must be > 0");
    if (!(c.delta_ratio > 2.0)) bad("delta_ratio", "must be > 2");
    if (c.delta_levels < 3) bad("delta_levels", "must be >= 3");
    if (c.p_list.empty()) bad("p_list", "must name at least one exponent");
    for (double p : c.p_list)
        if (!(p > 0.0)) bad("p_list", "exponents must be positive");
    if (!(c.q > 0.0 && c.q < 1.0)) bad("q", "must lie in (0, 1)");
    if (!(c.s0 > 0.0)) bad("s0", "must be > 0");
    if (!(c.hill_fraction > 0.0 && c.hill_fraction < 1.0)) bad("hill_fraction", "must lie in (0, 1)");
    if (!(c.band >= 0.0)) bad("band", "must be >= 0");
    if (c.esp_anchors < 2) bad("esp_anchors", "must be >= 2");
    const ToleranceProfile& t = c.tolerances;
    for (auto [name, v] : {std::pair{"tol_additivity", t.additivity}, {"tol_containment", t.containment},
                           {"tol_monotonicity", t.monotonicity}, {"tol_offboundary", t.offboundary_fraction},
                           {"tol_direction_deg", t.direction_deg}, {"tol_hull", t.hull}, {"tol_spike", t.spike}})
        if (!(v >= 0.0)) bad(name, "must be >= 0");
    try {
        c.cone(cfg);
    } catch (const ConfigError& e) {
        throw ConfigError(0, e.what());
    }
    if (c.formats.empty()) bad("formats", "must list at least one format");
}

inline ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig c;
    std::string raw;
    std::size_t line = 0;
    std::map<std::string, std::size_t> seen;
    while (std::getline(in, raw)) {
        ++line;
        const std::string text = detail::trim(std::string_view(raw).substr(0, raw.find('#')));
        if (text.empty()) continue;
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
        const std::string key = detail::trim(std::string_view(text).substr(0, eq));
        const std::string value = detail::trim(std::string_view(text).substr(eq + 1));
        if (key.empty()) throw ConfigError(line, "missing key");
        if (value.empty()) throw ConfigError(line, key + ": missing value");
        if (auto it = seen.find(key); it != seen.end())
            throw ConfigError(line, key + ": already set on line " + std::to_string(it->second));
        seen[key] = line;
        detail::apply_key(c, key, value, line);
    }
    validate(c);
    return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
    return parse_config(in);
}

/// Every key with its effective value; parses back to the same config.
inline void write_config(std::ostream& os, const ExperimentConfig& c) {
    os << std::setprecision(17);
    auto list = [](const auto& xs) {
        std::ostringstream s;
        s << std::setprecision(17);
        for (std::size_t i = 0; i < xs.size(); ++i) s << (i ? "," : "") << xs[i];
        return s.str();
    };
    os << "xi = " << c.xi << "\ntheta1 = " << c.theta1 << "\ntheta2 = " << c.theta2 << '\n';
    os << "z0_x = " << c.z0.x << "\nz0_y = " << c.z0.y << "\ndt = " << c.dt << "\nt_end = " << c.t_end
       << "\nseed = " << c.seed << "\nn_paths = " << c.n_paths << "\nthreads = " << c.threads << '\n';
    os << "eps_zero = ";
    if (c.eps_zero)
        os << *c.eps_zero;
    else
        os << "auto";
    os << "\ndelta0 = " << c.delta0 << "\ndelta_ratio = " << c.delta_ratio << "\ndelta_levels = " << c.delta_levels
       << "\np_list = " << list(c.p_list) << "\nq = " << c.q << "\ns0 = " << c.s0
       << "\nhill_fraction = " << c.hill_fraction << "\nbootstrap = " << c.bootstrap << '\n';
    const ToleranceProfile& t = c.tolerances;
    os << "vertex_cone = " << c.vertex_cone << "\nband = " << c.band << "\ntol_additivity = " << t.additivity
       << "\ntol_containment = " << t.containment << "\ntol_monotonicity = " << t.monotonicity
       << "\ntol_offboundary = " << t.offboundary_fraction << "\ntol_direction_deg = " << t.direction_deg
       << "\ntol_hull = " << t.hull << "\ntol_spike = " << t.spike << "\nesp_anchors = " << c.esp_anchors << '\n';
    os << "output_dir = " << c.output_dir << "\nformats = " << list(c.formats) << '\n';
}

}  // namespace wedge_rbm
