#pragma once
// Piecewise-affine horseshoe on two vertical strips, the quadratic double step
// on the tangency window, the bump-rotation perturbation, and orbit iteration.

#include <array>
#include <optional>
#include <ostream>
#include <vector>

#include "params.hpp"

namespace hs {

template <class T>
struct Point {
    T x{0};
    T y{0};
};

template <class T>
bool operator==(const Point<T>& a, const Point<T>& b) {
    return a.x == b.x && a.y == b.y;
}

template <class T>
T distance(const Point<T>& a, const Point<T>& b) {
    T dx = a.x - b.x, dy = a.y - b.y;
    return sqrt_of(T(dx * dx + dy * dy));
}

template <class T>
Point<T> convert_point(const Point<Rational>& p) {
    return {from_rational<T>(p.x), from_rational<T>(p.y)};
}

enum class Region { S0, S1, TangencyWindow, TransitTick, Escaped };

inline const char* to_string(Region r) {
    switch (r) {
    case Region::S0: return "S0";
    case Region::S1: return "S1";
    case Region::TangencyWindow: return "TangencyWindow";
    case Region::TransitTick: return "TransitTick";
    case Region::Escaped: return "Escaped";
    }
    return "?";
}

// Parameters converted into the working scalar, plus the map itself.
template <class T>
struct Model {
    T sigma, lambda, alpha, beta, gamma, mu, delta, hx, hy;
    T a_u, a_s;
    T inv_sigma;

    Model() = default;
    explicit Model(const Params& p)
        : sigma(from_rational<T>(p.sigma)), lambda(from_rational<T>(p.lambda)), alpha(from_rational<T>(p.alpha)),
          beta(from_rational<T>(p.beta)), gamma(from_rational<T>(p.gamma)), mu(from_rational<T>(p.mu)),
          delta(from_rational<T>(p.delta)), hx(from_rational<T>(p.hx)), hy(from_rational<T>(p.hy)),
          a_u(from_rational<T>(p.a_u())), a_s(from_rational<T>(p.a_s())),
          inv_sigma(from_rational<T>(1 / p.sigma)) {}

    Model with_slide(const T& d) const {
        Model m = *this;
        m.delta = d;
        return m;
    }

    bool in_strip(const Point<T>& p, int c) const {
        T cx = c == 0 ? T(-ratio<T>(1, 2)) : ratio<T>(1, 2);
        return absval(T(p.x - cx)) <= inv_sigma && absval(p.y) <= T(1);
    }
    bool in_window(const Point<T>& p) const {
        return absval(p.x) <= hx && absval(T(p.y + a_s)) <= hy;
    }
    std::optional<int> strip_of(const Point<T>& p) const {
        if (in_strip(p, 0)) return 0;
        if (in_strip(p, 1)) return 1;
        return std::nullopt;
    }

    Point<T> branch(const Point<T>& p, int c) const {
        const T half = ratio<T>(1, 2);
        if (c == 0) return {sigma * (p.x + half), lambda * p.y - half};
        return {-(sigma * (p.x - half)), half - lambda * p.y};
    }

    // Empty when p is in neither strip.
    std::optional<Point<T>> eval_branch(const Point<T>& p) const {
        auto c = strip_of(p);
        if (!c) return std::nullopt;
        return branch(p, *c);
    }

    bool in_image(const Point<T>& p, int c) const {
        const T half = ratio<T>(1, 2);
        T cy = c == 0 ? T(-half) : half;
        return absval(p.x) <= T(1) && absval(T(p.y - cy)) <= lambda;
    }

    Point<T> eval_branch_inverse(const Point<T>& p, int c) const {
        if (!in_image(p, c)) throw Error(ErrorCode::OutOfImage, "point outside the image of branch " + std::to_string(c));
        const T half = ratio<T>(1, 2);
        if (c == 0) return {p.x / sigma - half, (p.y + half) / lambda};
        return {half - p.x / sigma, (half - p.y) / lambda};
    }

    // x-coordinate on L reached from height y on the vertical carrier x = 0.
    T apex(const T& y) const { return -a_u + mu + delta + gamma * (y + a_s); }
    T apex_inverse(const T& x) const { return (x + a_u - mu - delta) / gamma - a_s; }

    Point<T> tangency(const Point<T>& p) const {
        return {-a_u + mu + delta - beta * p.x * p.x + gamma * (p.y + a_s), -(alpha * p.x)};
    }

    Point<T> eval_tangency_step(const Point<T>& p) const {
        if (!in_window(p)) throw Error(ErrorCode::OutsideWindow, "point outside the tangency window");
        return tangency(p);
    }

    // Jacobian rows (d/dx, d/dy) of the double step.
    std::array<T, 4> tangency_jacobian(const Point<T>& p) const {
        return {T(-(2 * beta * p.x)), gamma, T(-alpha), T(0)};
    }

    Point<T> fixed_point() const { return {T(-a_u), T(-a_s)}; }
};

// Smooth step: 0 for t <= -1, 1 for t >= 0.
template <class T>
T mollifier(const T& t) {
    if (t <= T(-1)) return T(0);
    if (t >= T(0)) return T(1);
    T s = t + T(1);
    T a = exp_of(T(T(-1) / s));
    T b = exp_of(T(T(-1) / (T(1) - s)));
    return a / (a + b);
}

template <class T>
T eval_bump(const T& x, const T& rho, const T& a, const T& b) {
    if (!(a < b)) throw Error(ErrorCode::DegenerateInterval, "bump interval has a >= b");
    if (x >= a && x <= b) return T(1);
    T w = rho * (b - a);
    return mollifier(T((x - a) / w)) + mollifier(T((b - x) / w)) - T(1);
}

template <class T>
struct PerturbationEntry {
    Point<T> anchor;
    Point<T> zeta;
    T omega{0};
    T ya, yb;     // y-support
    T x_half;     // x-support [-x_half, x_half]
    T rho;        // y margin is rho/10

    T y_margin() const { return rho / T(10) * (yb - ya); }
    T x_margin() const { return x_half / T(2); } // bump ratio 1/4 on a width 2*x_half
    bool in_support(const Point<T>& p) const {
        return absval(p.x) <= x_half + x_margin() && p.y >= ya - y_margin() && p.y <= yb + y_margin();
    }
    T weight(const Point<T>& p) const {
        T wx = eval_bump(p.x, T(ratio<T>(1, 4)), T(-x_half), x_half);
        if (wx == T(0)) return T(0);
        return wx * eval_bump(p.y, T(rho / T(10)), ya, yb);
    }
    Point<T> target(const Point<T>& p) const {
        Point<T> d{p.x - anchor.x, p.y - anchor.y};
        if (omega != T(0)) {
            T c = cos_of(omega), s = sin_of(omega);
            d = {c * d.x - s * d.y, s * d.x + c * d.y};
        }
        return {anchor.x + zeta.x + d.x, anchor.y + zeta.y + d.y};
    }
};

template <class T>
class PerturbationField {
public:
    PerturbationField() = default;
    explicit PerturbationField(std::vector<PerturbationEntry<T>> entries) : entries_(std::move(entries)) {
        for (std::size_t i = 0; i < entries_.size(); ++i)
            for (std::size_t j = i + 1; j < entries_.size(); ++j) {
                const auto& a = entries_[i];
                const auto& b = entries_[j];
                if (!(a.yb + a.y_margin() < b.ya - b.y_margin() || b.yb + b.y_margin() < a.ya - a.y_margin()))
                    throw Error(ErrorCode::OverlappingSupports,
                                "entries " + std::to_string(i) + " and " + std::to_string(j));
            }
    }

    const std::vector<PerturbationEntry<T>>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    Point<T> operator()(const Point<T>& p) const {
        for (const auto& e : entries_) {
            if (!e.in_support(p)) continue;
            T w = e.weight(p);
            if (w == T(0)) return p;
            Point<T> xi = e.target(p);
            return {p.x + w * (xi.x - p.x), p.y + w * (xi.y - p.y)};
        }
        return p;
    }

private:
    std::vector<PerturbationEntry<T>> entries_;
};

template <class T>
Point<T> eval_perturbation(const PerturbationField<T>& field, const Point<T>& p) {
    return field(p);
}

// The perturbed map g = f o Phi.
template <class T>
struct System {
    Model<T> model;
    PerturbationField<T> field;
};

template <class T>
struct Sample {
    long tick;
    Point<T> point;
    Region region;
};

template <class T>
struct OrbitSegment {
    std::vector<Sample<T>> samples;
    bool escaped() const { return !samples.empty() && samples.back().region == Region::Escaped; }
};

// One application of g. A tangency visit yields the window point (after the
// perturbation) as `transit` and the landing point two ticks later.
template <class T>
struct Step {
    Region region; // S0, S1, TangencyWindow or Escaped
    Point<T> transit;
    Point<T> next;
    int ticks() const { return region == Region::TangencyWindow ? 2 : 1; }
};

template <class T>
Step<T> step(const System<T>& sys, const Point<T>& p) {
    Point<T> q = sys.field.empty() ? p : sys.field(p);
    if (sys.model.in_window(q)) return {Region::TangencyWindow, q, sys.model.tangency(q)};
    if (auto c = sys.model.strip_of(q)) return {*c == 0 ? Region::S0 : Region::S1, q, sys.model.branch(q, *c)};
    return {Region::Escaped, q, q};
}

template <class T>
bool in_domain(const System<T>& sys, const Point<T>& p) {
    Point<T> q = sys.field.empty() ? p : sys.field(p);
    return sys.model.in_window(q) || sys.model.strip_of(q).has_value();
}

// Samples at ticks 1..ticks; the starting point is not recorded.
template <class T>
OrbitSegment<T> iterate_orbit(const Point<T>& p0, long ticks, const System<T>& sys) {
    OrbitSegment<T> out;
    Point<T> p = p0;
    long t = 0;
    while (t < ticks) {
        Step<T> s = step(sys, p);
        if (s.region == Region::Escaped) {
            out.samples.push_back({t + 1, s.next, Region::Escaped});
            return out;
        }
        if (s.region == Region::TangencyWindow) {
            out.samples.push_back({t + 1, s.transit, Region::TransitTick});
            if (t + 2 > ticks) return out;
            out.samples.push_back({t + 2, s.next, Region::TangencyWindow});
        } else {
            out.samples.push_back({t + 1, s.next, s.region});
        }
        p = s.next;
        t += s.ticks();
    }
    if (!in_domain(sys, p)) out.samples.push_back({t + 1, p, Region::Escaped});
    return out;
}

template <class T>
void write_orbit_csv(std::ostream& os, const OrbitSegment<T>& orbit) {
    os << "tick,x,y,region\n";
    for (const auto& s : orbit.samples)
        os << s.tick << ',' << format_double(to_double(s.point.x)) << ',' << format_double(to_double(s.point.y)) << ','
           << to_string(s.region) << '\n';
}

} // namespace hs
