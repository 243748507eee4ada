#pragma once
// Thickness and denseness, gap containment, linkage and the Gap Lemma
// trichotomy for the dynamically defined Cantor sets.

#include <vector>

#include "symbolic.hpp"

namespace hs {

template <class T>
struct ThicknessResult {
    T thickness;
    T denseness;
};

// Infimum (and supremum) over gaps of generations 0..depth-1 below `root`.
template <class T>
ThicknessResult<T> thickness_below(const Piece<T>& root, int depth, const Model<T>& m) {
    if (depth < 1) throw Error(ErrorCode::DegenerateInterval, "thickness needs depth >= 1");
    std::vector<Piece<T>> level{root};
    bool first = true;
    ThicknessResult<T> r{T(0), T(0)};
    for (int g = 0; g < depth; ++g) {
        std::vector<Piece<T>> next;
        next.reserve(level.size() * 2);
        for (const auto& b : level) {
            auto [l, h] = b.children(m);
            T gl = h.interval().lo - l.interval().hi;
            T la = l.length(), lb = h.length();
            T lo = la < lb ? la : lb, hi = la < lb ? lb : la;
            T t = lo / gl, d = hi / gl;
            if (first || t < r.thickness) r.thickness = t;
            if (first || d > r.denseness) r.denseness = d;
            first = false;
            next.push_back(std::move(l));
            next.push_back(std::move(h));
        }
        level = std::move(next);
    }
    return r;
}

template <class T>
ThicknessResult<T> thickness(Kind kind, int depth, const Model<T>& m) {
    return thickness_below(Piece<T>::make(kind, native_carrier(kind), "", m), depth, m);
}

// Closed forms of the self-similar model.
template <class T>
T thickness_closed_form(Kind kind, const Model<T>& m) {
    if (kind == Kind::Stable) return m.lambda / (T(1) - T(2) * m.lambda);
    return m.inv_sigma / (T(1) - T(2) * m.inv_sigma);
}

template <class T>
std::vector<Interval<T>> cantor_approx(const Piece<T>& root, int depth, const Model<T>& m) {
    std::vector<Piece<T>> level{root};
    for (int g = 0; g < depth; ++g) {
        std::vector<Piece<T>> next;
        next.reserve(level.size() * 2);
        for (const auto& b : level) {
            auto [l, h] = b.children(m);
            next.push_back(std::move(l));
            next.push_back(std::move(h));
        }
        level = std::move(next);
    }
    std::vector<Interval<T>> out;
    out.reserve(level.size());
    for (const auto& b : level) out.push_back(b.interval());
    return out;
}

// True when I sits in an open gap of the tree rooted at B (at most max_depth
// generations down). I outside the hull of B is not counted here.
template <class T>
bool in_gap_of(const Interval<T>& I, const Piece<T>& B, const Model<T>& m, int max_depth = 64) {
    Piece<T> node = B;
    for (int d = 0; d < max_depth; ++d) {
        if (!node.interval().contains(I)) return false;
        auto [l, h] = node.children(m);
        if (l.interval().contains(I)) {
            node = std::move(l);
        } else if (h.interval().contains(I)) {
            node = std::move(h);
        } else {
            Interval<T> g{l.interval().hi, h.interval().lo};
            return g.contains_open(I);
        }
    }
    return false;
}

enum class LinkStatus { Unlinked, ContainedInGapOfOther, Linked };

inline const char* to_string(LinkStatus s) {
    switch (s) {
    case LinkStatus::Unlinked: return "Unlinked";
    case LinkStatus::ContainedInGapOfOther: return "ContainedInGapOfOther";
    case LinkStatus::Linked: return "Linked";
    }
    return "?";
}

template <class T>
struct LinkageReport {
    LinkStatus status;
    T overlap;
    T xi;
    T proportional_K;
};

template <class T>
LinkageReport<T> linkage(const Piece<T>& b1, const Piece<T>& b2, const Model<T>& m) {
    if (b1.carrier != b2.carrier) throw Error(ErrorCode::CarrierMismatch, "bridges live on different carriers");
    Interval<T> i1 = b1.interval(), i2 = b2.interval();
    T l1 = i1.length(), l2 = i2.length();
    if (!(l1 > T(0)) || !(l2 > T(0))) throw Error(ErrorCode::DegenerateInterval, "bridge with empty interior");
    T mn = l1 < l2 ? l1 : l2, mx = l1 < l2 ? l2 : l1;
    LinkageReport<T> r{LinkStatus::Unlinked, i1.overlap(i2), T(0), T(mx / mn)};
    r.xi = r.overlap / mn;
    if (!(r.overlap > T(0))) return r;
    if (in_gap_of(i1, b2, m) || in_gap_of(i2, b1, m))
        r.status = LinkStatus::ContainedInGapOfOther;
    else
        r.status = LinkStatus::Linked;
    return r;
}

enum class GapLemmaStatus { K1InGapOfK2, K2InGapOfK1, Intersect, DepthExhausted };

inline const char* to_string(GapLemmaStatus s) {
    switch (s) {
    case GapLemmaStatus::K1InGapOfK2: return "K1InGapOfK2";
    case GapLemmaStatus::K2InGapOfK1: return "K2InGapOfK1";
    case GapLemmaStatus::Intersect: return "Intersect";
    case GapLemmaStatus::DepthExhausted: return "DepthExhausted";
    }
    return "?";
}

template <class T>
struct GapLemmaResult {
    GapLemmaStatus status;
    Piece<T> a; // deepest certified pair (Intersect only)
    Piece<T> b;
    int steps = 0;
};

// Closed-hull linkage: the hulls meet and neither lies in a gap of the other.
template <class T>
bool weakly_linked(const Piece<T>& a, const Piece<T>& b, const Model<T>& m) {
    Interval<T> ia = a.interval(), ib = b.interval();
    return ia.meets(ib) && !in_gap_of(ia, b, m) && !in_gap_of(ib, a, m);
}

// Refines the longer bridge to a child still linked with the other one.
template <class T>
bool linked_descent_step(Piece<T>& a, Piece<T>& b, const Model<T>& m) {
    bool refine_a = !(a.length() < b.length());
    Piece<T>& big = refine_a ? a : b;
    const Piece<T>& other = refine_a ? b : a;
    auto [l, h] = big.children(m);
    if (weakly_linked(l, other, m)) {
        big = std::move(l);
        return true;
    }
    if (weakly_linked(h, other, m)) {
        big = std::move(h);
        return true;
    }
    return false;
}

// Decides which alternative of the Gap Lemma holds for the Cantor sets below
// k1 and k2. Hulls that miss each other count as k1 lying in the unbounded gap.
template <class T>
GapLemmaResult<T> gap_lemma_classify(const Piece<T>& k1, const Piece<T>& k2, const Model<T>& m, int certify_steps = 20) {
    if (k1.carrier != k2.carrier) throw Error(ErrorCode::CarrierMismatch, "Cantor sets on different carriers");
    Interval<T> i1 = k1.interval(), i2 = k2.interval();
    if (!i1.meets(i2)) return {GapLemmaStatus::K1InGapOfK2, k1, k2, 0};
    if (in_gap_of(i1, k2, m)) return {GapLemmaStatus::K1InGapOfK2, k1, k2, 0};
    if (in_gap_of(i2, k1, m)) return {GapLemmaStatus::K2InGapOfK1, k1, k2, 0};
    Piece<T> a = k1, b = k2;
    for (int s = 0; s < certify_steps; ++s) {
        if (!linked_descent_step(a, b, m)) return {GapLemmaStatus::DepthExhausted, a, b, s};
    }
    return {GapLemmaStatus::Intersect, a, b, certify_steps};
}

} // namespace hs
