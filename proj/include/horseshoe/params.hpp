#pragma once
// Model parameters (exact), derived constants, and the inequality checks.

#include <cmath>
#include <string>
#include <vector>

#include "scalar.hpp"

namespace hs {

struct Params {
    Rational sigma{5, 2};
    Rational lambda{3, 10};
    Rational epsilon0{1, 100};
    Rational alpha{2};
    Rational beta{1};
    Rational gamma{1};
    Rational mu{1, 100};
    Rational delta{0};
    Rational hx{1, 20}; // window half-width in x
    Rational hy{1, 20}; // window half-width in y

    Rational a_u() const { return sigma / (2 * (sigma - 1)); }
    Rational a_s() const { return Rational(1) / (2 * (1 - lambda)); }
    Rational tau_s() const { return lambda / (1 - 2 * lambda); }
    Rational tau_u() const { return (1 / sigma) / (1 - 2 / sigma); }
    Rational sigma_lo() const { return sigma - epsilon0; }
    Rational sigma_hi() const { return sigma + epsilon0; }
    Rational lambda_lo() const { return lambda - epsilon0; }
    Rational lambda_hi() const { return lambda + epsilon0; }
};

// Constants used by the constructions, evaluated in double.
struct Derived {
    double sigma, lambda, sigma_lo, sigma_hi, lambda_lo, lambda_hi;
    double a_u, a_s, tau_s, tau_u;
    double xi0;
    double a_min; // infimum of a with sigma_hi/(sigma_hi-2) < a*sigma_lo

    explicit Derived(const Params& p) {
        sigma = to_double(p.sigma);
        lambda = to_double(p.lambda);
        sigma_lo = to_double(p.sigma_lo());
        sigma_hi = to_double(p.sigma_hi());
        lambda_lo = to_double(p.lambda_lo());
        lambda_hi = to_double(p.lambda_hi());
        a_u = to_double(p.a_u());
        a_s = to_double(p.a_s());
        tau_s = to_double(p.tau_s());
        tau_u = to_double(p.tau_u());
        xi0 = (sigma_hi + 2) * (3 - sigma_hi) / (3 * (sigma_hi + 3));
        a_min = sigma_hi / ((sigma_hi - 2) * sigma_lo);
    }

    // Generation increment bounds of the linear growth construction.
    double N_s(double kappa) const {
        return std::log(std::pow(lambda_lo, 5) * xi0 / (12 * (kappa + 1))) / std::log(lambda_hi);
    }
    double N_u(double kappa) const {
        return std::log(std::pow(lambda_lo, 6) * xi0 / (36 * a_min * (kappa + 1))) / -std::log(sigma_lo);
    }
    double eta_check(double eta) const {
        return lambda_hi * std::pow(sigma_hi, (1 + 2 * eta) / (1 - eta));
    }
};

struct Check {
    std::string name;
    bool pass;
    double slack; // positive when satisfied
};

inline std::vector<Check> check_params(const Params& p, double eta) {
    Derived d(p);
    std::vector<Check> out;
    auto add = [&](std::string name, double slack) { out.push_back({std::move(name), slack > 0, slack}); };
    add("2 < sigma", d.sigma - 2);
    add("sigma < 3", 3 - d.sigma);
    add("lambda*sigma < 1", 1 - d.lambda * d.sigma);
    add("0 < lambda", d.lambda);
    add("epsilon0 > 0", to_double(p.epsilon0));
    add("2 < sigma_hi", d.sigma_hi - 2);
    add("sigma_hi < 3", 3 - d.sigma_hi);
    add("lambda_lo > 0", d.lambda_lo);
    add("lambda_hi*sigma_hi < 1", 1 - d.lambda_hi * d.sigma_hi);
    add("tau_s*tau_u > 1", d.tau_s * d.tau_u - 1);
    add("lambda_hi*(1+sigma_hi) < 2", 2 - d.lambda_hi * (1 + d.sigma_hi));
    add("lambda_hi*sigma_hi^((1+2eta)/(1-eta)) < 1", 1 - d.eta_check(eta));
    add("eta > 0", eta);
    add("a_u > 1/2", d.a_u - 0.5);
    add("a_u < 1", 1 - d.a_u);
    add("a_s > 1/2", d.a_s - 0.5);
    add("a_s < 1", 1 - d.a_s);
    add("alpha > 0", to_double(p.alpha));
    add("beta > 0", to_double(p.beta));
    add("gamma > 0", to_double(p.gamma));
    add("mu > 0", to_double(p.mu));
    add("|delta| < mu", to_double(p.mu) - std::abs(to_double(p.delta)));
    // window |x| <= hx must stay clear of the strips |x -+ 1/2| <= 1/sigma
    add("window clear of strips", 0.5 - 1 / d.sigma - to_double(p.hx));
    add("window half-widths > 0", std::min(to_double(p.hx), to_double(p.hy)));
    add("window inside chart", 1 - (d.a_s + to_double(p.hy)));
    return out;
}

inline bool all_pass(const std::vector<Check>& checks) {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

} // namespace hs
