#pragma once
// Independent reference computations shared by the unit tests and the
// acceptance runner. None of these call into the solver under test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "horseshoe/horseshoe.hpp"

namespace oracle {

// Transport cost by enumerating basic feasible solutions: every choice of
// n+m-1 cells that forms a spanning tree of the bipartite graph yields at
// most one vertex of the transport polytope.
inline double transport_by_bases(const std::vector<double>& a, const std::vector<double>& b,
                                 const std::function<double(std::size_t, std::size_t)>& cost) {
    const std::size_t n = a.size(), m = b.size(), cells = n * m, need = n + m - 1;
    double best = INFINITY;
    std::vector<int> pick(cells, 0);
    std::fill(pick.end() - long(need), pick.end(), 1);
    do {
        std::vector<double> ra = a, rb = b, flow(cells, 0.0);
        std::vector<bool> open(cells);
        for (std::size_t c = 0; c < cells; ++c) open[c] = pick[c] != 0;
        std::size_t left = need;
        bool ok = true;
        // Peel leaves: a row or column with exactly one open cell fixes that cell.
        while (left > 0 && ok) {
            bool progress = false;
            for (std::size_t i = 0; i < n && !progress; ++i) {
                std::size_t cnt = 0, cell = 0;
                for (std::size_t j = 0; j < m; ++j)
                    if (open[i * m + j]) ++cnt, cell = i * m + j;
                if (cnt == 1) {
                    std::size_t j = cell % m;
                    double f = ra[i];
                    flow[cell] = f;
                    ra[i] -= f;
                    rb[j] -= f;
                    open[cell] = false;
                    --left;
                    progress = true;
                }
            }
            for (std::size_t j = 0; j < m && !progress; ++j) {
                std::size_t cnt = 0, cell = 0;
                for (std::size_t i = 0; i < n; ++i)
                    if (open[i * m + j]) ++cnt, cell = i * m + j;
                if (cnt == 1) {
                    std::size_t i = cell / m;
                    double f = rb[j];
                    flow[cell] = f;
                    ra[i] -= f;
                    rb[j] -= f;
                    open[cell] = false;
                    --left;
                    progress = true;
                }
            }
            if (!progress) ok = false; // contains a cycle
        }
        if (!ok) continue;
        bool feasible = true;
        for (double f : flow) feasible = feasible && f >= -1e-12;
        for (double r : ra) feasible = feasible && std::abs(r) < 1e-12;
        for (double r : rb) feasible = feasible && std::abs(r) < 1e-12;
        if (!feasible) continue;
        double c = 0;
        for (std::size_t k = 0; k < cells; ++k) c += flow[k] * cost(k / m, k % m);
        best = std::min(best, c);
    } while (std::next_permutation(pick.begin(), pick.end()));
    return best;
}

// Uniform n-vs-n measures: optimal plans are permutations.
inline double transport_by_permutations(std::size_t n, const std::function<double(std::size_t, std::size_t)>& cost) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    double best = INFINITY;
    do {
        double c = 0;
        for (std::size_t i = 0; i < n; ++i) c += cost(i, p[i]);
        best = std::min(best, c / double(n));
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
}

inline double capped(const hs::Atom& x, const hs::Atom& y) {
    return std::min(std::hypot(x.x - y.x, x.y - y.y), 2.0);
}

inline double transport(const hs::EmpiricalMeasure& mu, const hs::EmpiricalMeasure& nu) {
    std::vector<double> a, b;
    for (const auto& x : mu.atoms) a.push_back(x.w);
    for (const auto& y : nu.atoms) b.push_back(y.w);
    return transport_by_bases(a, b, [&](std::size_t i, std::size_t j) { return capped(mu.atoms[i], nu.atoms[j]); });
}

inline hs::EmpiricalMeasure random_measure(std::mt19937_64& rng, std::size_t atoms, double spread = 1.5) {
    std::uniform_real_distribution<double> pos(-spread, spread), w(0.05, 1.0);
    hs::EmpiricalMeasure mu;
    double total = 0;
    for (std::size_t i = 0; i < atoms; ++i) {
        mu.atoms.push_back({pos(rng), pos(rng), w(rng)});
        total += mu.atoms.back().w;
    }
    for (auto& a : mu.atoms) a.w /= total;
    return mu;
}

// Depth-limited sweep: do the level-`depth` bridges of the two trees meet?
// Pairs that already miss each other are pruned.
template <class T>
bool levels_meet(const hs::Piece<T>& a, const hs::Piece<T>& b, const hs::Model<T>& m, int da, int db, int depth) {
    if (!a.interval().meets(b.interval())) return false;
    if (da == depth && db == depth) return true;
    if (da <= db) {
        return levels_meet(a.child('0', m), b, m, da + 1, db, depth) ||
               levels_meet(a.child('1', m), b, m, da + 1, db, depth);
    }
    return levels_meet(a, b.child('0', m), m, da, db + 1, depth) || levels_meet(a, b.child('1', m), m, da, db + 1, depth);
}

struct RandomPair {
    hs::Model<double> model;
    hs::Piece<double> stable, unstable; // both on L
};

// A stable and an unstable bridge on L, with the slide chosen so that the
// stable hull lands anywhere from just left to just right of the unstable one.
inline RandomPair random_bridge_pair(std::mt19937_64& rng, const hs::Params& p) {
    std::uniform_int_distribution<int> ls(0, 3), lu(0, 5), bit(0, 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto word = [&](int len) {
        hs::Word w;
        for (int i = 0; i < len; ++i) w.push_back(bit(rng) ? '1' : '0');
        return w;
    };
    hs::Model<double> m0(p);
    hs::Word ws = word(ls(rng)), wu = word(lu(rng));
    auto s0 = hs::Piece<double>::make(hs::Kind::Stable, hs::Carrier::L, ws, m0);
    auto u = hs::Piece<double>::make(hs::Kind::Unstable, hs::Carrier::L, wu, m0);
    auto is = s0.interval(), iu = u.interval();
    double lo = iu.lo - is.length() * 1.1, hi = iu.hi + is.length() * 0.1;
    double shift = lo + (hi - lo) * unit(rng) - is.lo;
    hs::Model<double> m = m0.with_slide(m0.delta + shift);
    return {m, hs::Piece<double>::make(hs::Kind::Stable, hs::Carrier::L, ws, m), u};
}

} // namespace oracle
