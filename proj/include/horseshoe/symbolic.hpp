#pragma once
// Binary itineraries and the bridge/gap intervals they select on the four
// carriers: Is (stable, native y), Iu (unstable, native x), L (y = 0) and
// Ltilde (x = 0).

#include <algorithm>
#include <ostream>
#include <string>
#include <utility>

#include "core_map.hpp"

namespace hs {

// Words are strings over {'0','1'}, most recent symbol last.
using Word = std::string;

inline bool valid_word(const Word& w) {
    return std::all_of(w.begin(), w.end(), [](char c) { return c == '0' || c == '1'; });
}

inline Word reverse_word(Word w) {
    std::reverse(w.begin(), w.end());
    return w;
}

inline Word rotate_word(const Word& w, std::size_t k) {
    if (w.empty()) return w;
    k %= w.size();
    return w.substr(k) + w.substr(0, k);
}

enum class Kind { Stable, Unstable };
enum class Carrier { Is, Iu, L, Ltilde };

inline const char* to_string(Kind k) { return k == Kind::Stable ? "stable" : "unstable"; }
inline const char* to_string(Carrier c) {
    switch (c) {
    case Carrier::Is: return "Is";
    case Carrier::Iu: return "Iu";
    case Carrier::L: return "L";
    case Carrier::Ltilde: return "Ltilde";
    }
    return "?";
}

template <class T>
struct Interval {
    T lo, hi;
    T length() const { return hi - lo; }
    T center() const { return (lo + hi) / T(2); }
    bool contains(const T& v) const { return lo <= v && v <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    // Inside the open interval (lo, hi).
    bool contains_open(const Interval& o) const { return lo < o.lo && o.hi < hi; }
    bool meets(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
    T overlap(const Interval& o) const {
        T l = lo < o.lo ? o.lo : lo;
        T h = hi < o.hi ? hi : o.hi;
        return h > l ? T(h - l) : T(0);
    }
    T distance_to(const T& v) const {
        if (v < lo) return lo - v;
        if (v > hi) return v - hi;
        return T(0);
    }
};

template <class T>
Interval<T> sorted_interval(const T& a, const T& b) {
    return a < b ? Interval<T>{a, b} : Interval<T>{b, a};
}

// x -> a*x + b
template <class T>
struct Affine {
    T a{1};
    T b{0};
    T operator()(const T& x) const { return a * x + b; }
    T fixed_point() const { return b / (T(1) - a); }
};

// (f o g)(x) = f(g(x))
template <class T>
Affine<T> compose(const Affine<T>& f, const Affine<T>& g) {
    return {f.a * g.a, f.a * g.b + f.b};
}

// Inverse branch in x: h0(x) = x/sigma - 1/2, h1(x) = 1/2 - x/sigma.
template <class T>
Affine<T> unstable_step(const Model<T>& m, char c) {
    const T half = ratio<T>(1, 2);
    if (c == '0') return {m.inv_sigma, T(-half)};
    return {T(-m.inv_sigma), half};
}

// Forward branch in y: g0(y) = lambda*y - 1/2, g1(y) = 1/2 - lambda*y.
template <class T>
Affine<T> stable_step(const Model<T>& m, char c) {
    const T half = ratio<T>(1, 2);
    if (c == '0') return {m.lambda, T(-half)};
    return {T(-m.lambda), half};
}

template <class T>
Affine<T> word_map(Kind kind, const Word& w, const Model<T>& m) {
    Affine<T> f;
    for (char c : w) f = compose(f, kind == Kind::Unstable ? unstable_step(m, c) : stable_step(m, c));
    return f;
}

template <class T>
T root_half(Kind kind, const Model<T>& m) {
    return kind == Kind::Unstable ? m.a_u : m.a_s;
}

template <class T>
Interval<T> bridge_interval(Kind kind, const Word& w, const Model<T>& m) {
    Affine<T> f = word_map(kind, w, m);
    T r = root_half(kind, m);
    return sorted_interval(f(T(-r)), f(r));
}

template <class T>
Interval<T> gap_interval(Kind kind, const Word& w, const Model<T>& m) {
    Interval<T> a = bridge_interval(kind, w + '0', m);
    Interval<T> b = bridge_interval(kind, w + '1', m);
    return a.hi < b.lo ? Interval<T>{a.hi, b.lo} : Interval<T>{b.hi, a.lo};
}

// Native coordinate -> carrier coordinate.
template <class T>
Affine<T> placement(Kind kind, Carrier carrier, const Model<T>& m) {
    switch (carrier) {
    case Carrier::Is:
    case Carrier::Iu: return {};
    case Carrier::L:
        if (kind == Kind::Unstable) return {};
        return {m.gamma, m.apex(T(0))};
    case Carrier::Ltilde:
        if (kind == Kind::Stable) return {};
        return {T(T(1) / m.gamma), m.apex_inverse(T(0))};
    }
    return {};
}

inline Carrier native_carrier(Kind k) { return k == Kind::Stable ? Carrier::Is : Carrier::Iu; }

// A bridge together with the maps that produce it, so that descendants are cheap.
template <class T>
struct Piece {
    Kind kind;
    Carrier carrier;
    Word word;
    Affine<T> map;   // root hull -> native interval
    Affine<T> place; // native -> carrier
    T root;          // half-length of the root hull
    T slide{0};

    static Piece make(Kind kind, Carrier carrier, const Word& w, const Model<T>& m) {
        return {kind, carrier, w, word_map(kind, w, m), placement(kind, carrier, m), root_half(kind, m), m.delta};
    }

    std::size_t generation() const { return word.size(); }

    Interval<T> native() const { return sorted_interval(map(T(-root)), map(root)); }
    Interval<T> interval() const {
        T a = place(map(T(-root))), b = place(map(root));
        return sorted_interval(a, b);
    }
    T length() const { return absval(T(place.a * map.a)) * T(2) * root; }

    Piece child(char c, const Model<T>& m) const {
        Piece p = *this;
        p.word.push_back(c);
        p.map = compose(map, kind == Kind::Unstable ? unstable_step(m, c) : stable_step(m, c));
        return p;
    }
    // Children ordered left to right on the carrier.
    std::pair<Piece, Piece> children(const Model<T>& m) const {
        Piece a = child('0', m), b = child('1', m);
        if (b.interval().lo < a.interval().lo) std::swap(a, b);
        return {a, b};
    }
    Interval<T> gap(const Model<T>& m) const {
        auto [a, b] = children(m);
        return {a.interval().hi, b.interval().lo};
    }
    Piece with_slide(const Model<T>& m) const {
        Piece p = *this;
        p.place = placement(kind, carrier, m);
        p.slide = m.delta;
        return p;
    }
};

template <class T>
struct Bridge {
    Kind kind;
    Carrier carrier;
    Word word;
    Interval<T> interval;
    T slide;
};

template <class T>
Bridge<T> to_bridge(const Piece<T>& p) {
    return {p.kind, p.carrier, p.word, p.interval(), p.slide};
}

// Unstable bridges keep their x-extent on L; stable heights follow the apex map.
template <class T>
Piece<T> project_to_L(const Piece<T>& p, const Model<T>& m) {
    Piece<T> q = p;
    q.carrier = Carrier::L;
    q.place = placement(p.kind, Carrier::L, m);
    q.slide = m.delta;
    return q;
}

template <class T>
Piece<T> project_to_Ltilde(const Piece<T>& p, const Model<T>& m) {
    Piece<T> q = p;
    q.carrier = Carrier::Ltilde;
    q.place = placement(p.kind, Carrier::Ltilde, m);
    q.slide = m.delta;
    return q;
}

template <class T>
void write_bridges_csv(std::ostream& os, const std::vector<Bridge<T>>& bridges) {
    os << "kind,carrier,word,left,right,length,slide\n";
    for (const auto& b : bridges)
        os << to_string(b.kind) << ',' << to_string(b.carrier) << ',' << b.word << ','
           << format_double(to_double(b.interval.lo)) << ',' << format_double(to_double(b.interval.hi)) << ','
           << format_double(to_double(b.interval.length())) << ',' << format_double(to_double(b.slide)) << '\n';
}

template <class T>
Word code_point(const Point<T>& p0, std::size_t depth, const Model<T>& m) {
    Word w;
    Point<T> p = p0;
    for (std::size_t i = 0; i < depth; ++i) {
        auto c = m.strip_of(p);
        if (!c) throw Error(ErrorCode::EscapedOrbit, "left the strips after " + std::to_string(i) + " steps");
        w.push_back(*c == 0 ? '0' : '1');
        p = m.branch(p, *c);
    }
    return w;
}

// The point whose forward and backward codes repeat w. Solved as the fixed
// points of the contracting word maps, which is exact in rational mode.
template <class T>
Point<T> decode_periodic(const Word& w, const Model<T>& m) {
    if (w.empty() || !valid_word(w)) throw Error(ErrorCode::DegenerateInterval, "decode_periodic needs a nonempty binary word");
    T x = word_map(Kind::Unstable, w, m).fixed_point();
    T y = word_map(Kind::Stable, reverse_word(w), m).fixed_point();
    return {x, y};
}

} // namespace hs
