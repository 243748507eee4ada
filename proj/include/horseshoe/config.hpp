#pragma once
// Flat `key = value` experiment configuration. Lines starting with '#' and
// trailing '# ...' are comments; unknown keys are errors.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pipeline.hpp"

namespace hs {

struct ExperimentConfig {
    PipelineOptions options;
    Backend backend = Backend::BigFloat;
    unsigned precision_bits = 0; // 0: derived from the chain lengths
    int depth = 8;               // cantor tables
    std::string mode = "target"; // target | dirac | historic
    std::vector<int> eras{1, 2, 5};
    Word target = "001";
    Word periodic = "0";
    std::size_t samples = 64;
    std::uint64_t seed = 1;
};

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(std::string v) {
    v = trim(v);
    if (!v.empty() && v.front() == '[') v.erase(0, 1);
    if (!v.empty() && v.back() == ']') v.pop_back();
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigParse, key + ": expected an integer, got '" + v + "'");
    }
}

inline Rational parse_rat(const std::string& key, const std::string& v) {
    try {
        return parse_rational(v);
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigParse, key + ": expected a number, got '" + v + "'");
    }
}

inline double parse_real(const std::string& key, const std::string& v) { return to_double(parse_rat(key, v)); }

inline Word parse_word(const std::string& key, const std::string& v) {
    if (v.empty() || !valid_word(v)) throw Error(ErrorCode::ConfigParse, key + ": expected a nonempty binary word");
    return v;
}

} // namespace detail

inline Backend parse_backend(const std::string& v) {
    if (v == "rational") return Backend::Rational;
    if (v == "double") return Backend::Double;
    if (v == "mpfr-like" || v == "mpfr") return Backend::BigFloat;
    throw Error(ErrorCode::ConfigParse, "backend: expected rational, double or mpfr-like, got '" + v + "'");
}

inline void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& v) {
    using namespace detail;
    Params& p = c.options.params;
    if (key == "sigma") p.sigma = parse_rat(key, v);
    else if (key == "lambda") p.lambda = parse_rat(key, v);
    else if (key == "epsilon0") p.epsilon0 = parse_rat(key, v);
    else if (key == "alpha") p.alpha = parse_rat(key, v);
    else if (key == "beta") p.beta = parse_rat(key, v);
    else if (key == "gamma") p.gamma = parse_rat(key, v);
    else if (key == "mu") p.mu = parse_rat(key, v);
    else if (key == "delta") p.delta = parse_rat(key, v);
    else if (key == "window_halfwidths") {
        auto xs = split_list(v);
        if (xs.size() != 2) throw Error(ErrorCode::ConfigParse, "window_halfwidths: expected two values");
        p.hx = parse_rat(key, xs[0]);
        p.hy = parse_rat(key, xs[1]);
    } else if (key == "backend") c.backend = parse_backend(v);
    else if (key == "precision_bits") {
        long b = parse_int(key, v);
        if (b < 0) throw Error(ErrorCode::ConfigParse, "precision_bits must be >= 0");
        c.precision_bits = unsigned(b);
    } else if (key == "epsilon") c.options.epsilon = parse_rat(key, v);
    else if (key == "kappa") c.options.kappa = parse_real(key, v);
    else if (key == "eta") c.options.eta = parse_real(key, v);
    else if (key == "rho") c.options.rho = parse_rat(key, v);
    else if (key == "chain_K") c.options.K = int(parse_int(key, v));
    else if (key == "chain_N") c.options.N = int(parse_int(key, v));
    else if (key == "translation") c.options.translation = int(parse_int(key, v));
    else if (key == "depth") c.depth = int(parse_int(key, v));
    else if (key == "mode") {
        if (v != "target" && v != "dirac" && v != "historic")
            throw Error(ErrorCode::ConfigParse, "mode: expected target, dirac or historic");
        c.mode = v;
    } else if (key == "eras") {
        c.eras.clear();
        for (const auto& x : split_list(v)) c.eras.push_back(int(parse_int(key, x)));
    } else if (key == "target") c.target = parse_word(key, v);
    else if (key == "periodic") c.periodic = parse_word(key, v);
    else if (key == "samples") c.samples = std::size_t(parse_int(key, v));
    else if (key == "seed") c.seed = std::uint64_t(parse_int(key, v));
    else throw Error(ErrorCode::ConfigParse, "unknown key '" + key + "'");
}

inline void validate_config(const ExperimentConfig& c) {
    const auto& o = c.options;
    auto bad = [](const std::string& what) { throw Error(ErrorCode::ConfigParse, what); };
    if (o.K < 2) bad("chain_K must be >= 2");
    if (o.N < 0) bad("chain_N must be >= 0");
    if (o.translation < -1) bad("translation must be >= -1");
    if (c.depth < 1 || c.depth > 24) bad("depth must be in [1, 24]");
    if (!(o.rho > 0 && o.rho < 1)) bad("rho must lie in (0, 1)");
    if (!(o.epsilon > 0)) bad("epsilon must be positive");
    if (!(o.eta > 0 && o.eta < 1)) bad("eta must lie in (0, 1)");
    if (c.samples < 1) bad("samples must be >= 1");
    for (std::size_t i = 1; i < c.eras.size(); ++i)
        if (c.eras[i] <= c.eras[i - 1]) bad("eras must be strictly increasing");
}

inline ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ConfigParse, "line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
        try {
            set_config_value(c, key, value);
        } catch (const Error& e) {
            std::string msg = e.what();
            const std::string prefix = "ConfigParse: ";
            if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
            throw Error(ErrorCode::ConfigParse, "line " + std::to_string(lineno) + ": " + msg);
        }
    }
    validate_config(c);
    return c;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigParse, "cannot open " + path);
    return parse_config(in);
}

} // namespace hs
