#pragma once
// Initial linked pair, linking step, linear growth, chain itineraries, the
// critical chain with its perturbation field, and the rectangle cascade.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "cantor.hpp"

namespace hs {

// Rates of the neighbourhood in the working scalar, exact where T allows.
template <class T>
struct Constants {
    T lambda_lo, lambda_hi, sigma_lo, sigma_hi, xi0;

    explicit Constants(const Params& p)
        : lambda_lo(from_rational<T>(p.lambda_lo())), lambda_hi(from_rational<T>(p.lambda_hi())),
          sigma_lo(from_rational<T>(p.sigma_lo())), sigma_hi(from_rational<T>(p.sigma_hi())) {
        Rational sh = p.sigma_hi();
        xi0 = from_rational<T>((sh + 2) * (3 - sh) / (3 * (sh + 3)));
    }
};

// Throws PrecisionExhausted when an interval is too short for the backend to
// tell its endpoints apart reliably.
template <class T>
void require_resolvable(const Interval<T>& I, const std::string& what) {
    double res = relative_resolution<T>();
    if (res == 0.0) return;
    double scale = std::max({1.0, std::abs(to_double(I.lo)), std::abs(to_double(I.hi))});
    if (to_double(I.length()) < 1024.0 * res * scale)
        throw Error(ErrorCode::PrecisionExhausted, what + ": length " + format_double(to_double(I.length()), 6) +
                                                       " below the backend resolution");
}

template <class T>
Interval<T> common_part(const Interval<T>& a, const Interval<T>& b) {
    T lo = a.lo < b.lo ? b.lo : a.lo;
    T hi = a.hi < b.hi ? a.hi : b.hi;
    return hi < lo ? Interval<T>{hi, lo} : Interval<T>{lo, hi};
}

// Length classification: -1 too short, 0 in window, +1 too long.
template <class T>
using StableWindow = std::function<int(const T& len_s)>;
template <class T>
using UnstableWindow = std::function<int(const T& len_s, const T& len_u)>;

// Best-first search over pairs of sub-bridges that stay linked, refining the
// longer bridge of a pair as in the Gap Lemma argument. Pairs are ordered by
// the distance of their common part to `target`.
template <class T>
std::optional<std::pair<Piece<T>, Piece<T>>> find_linked_subpair(const Piece<T>& s_root, const Piece<T>& u_root,
                                                                 const StableWindow<T>& s_win,
                                                                 const UnstableWindow<T>& u_win, const T& target,
                                                                 const Model<T>& m, std::size_t max_pops = 200000) {
    struct Entry {
        T key;
        std::size_t seq;
        Piece<T> s, u;
    };
    auto later = [](const Entry& a, const Entry& b) {
        if (a.key != b.key) return b.key < a.key;
        return a.seq > b.seq;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(later)> heap(later);
    std::size_t seq = 0;
    auto push = [&](Piece<T> s, Piece<T> u) {
        if (s_win(s.length()) < 0) return;
        if (!weakly_linked(s, u, m)) return;
        T key = absval(T(common_part(s.interval(), u.interval()).center() - target));
        heap.push({key, seq++, std::move(s), std::move(u)});
    };
    push(s_root, u_root);
    for (std::size_t pops = 0; !heap.empty() && pops < max_pops; ++pops) {
        Entry e = heap.top();
        heap.pop();
        const T ls = e.s.length(), lu = e.u.length();
        int st = s_win(ls), ut = u_win(ls, lu);
        bool refine_s;
        if (st == 0 && ut == 0) {
            if (linkage(e.s, e.u, m).status == LinkStatus::Linked) return std::make_pair(e.s, e.u);
            refine_s = !(ls < lu);
        } else if (st > 0) {
            refine_s = !(ls < lu);
        } else {
            refine_s = ut < 0;
        }
        if (refine_s) {
            push(e.s.child('0', m), e.u);
            push(e.s.child('1', m), e.u);
        } else {
            push(e.s, e.u.child('0', m));
            push(e.s, e.u.child('1', m));
        }
    }
    return std::nullopt;
}

template <class T>
struct LinkedPair {
    Piece<T> bs; // stable, on L
    Piece<T> bu; // unstable, on L
    LinkageReport<T> report;
    T slide;
};

template <class T>
LinkedPair<T> make_pair_at(const Piece<T>& bs, const Piece<T>& bu, const Model<T>& m) {
    Piece<T> s = bs.with_slide(m);
    return {s, bu, linkage(s, bu, m), m.delta};
}

template <class T>
struct InitialPair {
    int n0 = 0, m0 = 0;
    Piece<T> bu0, bs0; // 0^{n0} and 0^{m0} on L at slide c
    T c;
    LinkedPair<T> pair;
    int refinements = 0;
};

// Linked pair on the tangency curve from the fundamental bridges 0^{n0}, 0^{m0}.
template <class T>
InitialPair<T> initial_linked_pair(const Params& p, const Model<T>& m, int refinements = 2) {
    InitialPair<T> out;
    const T two(2);
    while (!(two * m.a_u * ipow(m.inv_sigma, out.n0 + 1) <= m.mu)) ++out.n0;
    while (!(two * m.a_s * m.gamma * ipow(m.lambda, out.m0 + 1) <= m.mu)) ++out.m0;
    out.bu0 = Piece<T>::make(Kind::Unstable, Carrier::L, Word(out.n0, '0'), m);

    std::vector<T> cs{T(0)};
    for (int j = 1; j <= 3; ++j) {
        T c = m.mu * ratio<T>(j, 40); // |c| < mu/10
        cs.push_back(c);
        cs.push_back(T(-c));
    }
    for (const T& c : cs) {
        Model<T> mc = m.with_slide(T(m.delta + c));
        Piece<T> bs0 = Piece<T>::make(Kind::Stable, Carrier::L, Word(out.m0, '0'), mc);
        if (linkage(bs0, out.bu0, mc).status != LinkStatus::Linked) continue;
        Piece<T> a = bs0, b = out.bu0;
        int done = 0;
        for (; done < refinements; ++done) {
            Piece<T> a2 = a, b2 = b;
            if (!linked_descent_step(a2, b2, mc)) break;
            if (linkage(a2, b2, mc).status != LinkStatus::Linked) break;
            a = a2;
            b = b2;
        }
        out.bs0 = bs0;
        out.c = c;
        out.pair = {a, b, linkage(a, b, mc), mc.delta};
        out.refinements = done;
        (void)p;
        return out;
    }
    throw Error(ErrorCode::SearchFailed, "no linked fundamental pair for |c| < mu/10");
}

// Budget admissibility with distortion constant c.
template <class T>
bool budget_admissible(const T& eps, const T& c, const Constants<T>& K) {
    T a = (T(1) - c * eps) / ((T(1) + c * eps) * (T(1) + c * eps));
    T r = (T(1) + c * eps) / (T(1) - c * eps);
    return eps > T(0) && a > K.lambda_lo && r * r * (K.sigma_hi - T(2)) < T(1);
}

template <class T>
struct LinkingResult {
    T delta;
    T slide; // slide after the step
    Piece<T> hat_s, hat_u;
    LinkedPair<T> pair1, pair2; // left and right related pairs
    bool claim1 = false, claim2 = false, claim3 = false;
    bool xi_ok = false, budget_ok = false, centers_ok = false;
    bool ok() const { return claim1 && claim2 && claim3 && xi_ok && budget_ok && centers_ok; }
};

template <class T>
LinkingResult<T> linking_step(const LinkedPair<T>& pair, const T& eps, const Model<T>& base, const Constants<T>& K,
                              const T& c = T(0)) {
    if (!budget_admissible(eps, c, K)) throw Error(ErrorCode::BudgetTooLarge, "budget fails the smallness conditions");
    Model<T> m = base.with_slide(pair.slide);
    const T lam0 = K.lambda_lo / (T(1) + c * eps);
    T rr = (T(1) + c * eps) / (T(1) - c * eps);
    const T sig0 = K.sigma_hi * rr * rr;
    const T lo = lam0 * lam0 * eps / T(2), hi = lam0 * eps / T(2);

    T target = common_part(pair.bs.interval(), pair.bu.interval()).center();
    auto found = find_linked_subpair<T>(
        pair.bs, pair.bu, [&](const T& len) { return len <= lo ? -1 : (len < hi ? 0 : 1); },
        [&](const T& bs, const T& bu) { return bu < bs ? -1 : (bu < sig0 * bs ? 0 : 1); }, target, m);
    if (!found) throw Error(ErrorCode::NoFundamentalBridge, "no sub-bridge pair in the length windows");
    std::optional<Piece<T>> hat_s = found->first, hat_u = found->second;
    require_resolvable(hat_s->interval(), "linking stable sub-bridge");
    require_resolvable(hat_u->interval(), "linking unstable sub-bridge");

    LinkingResult<T> r;
    Interval<T> gs = hat_s->gap(m), gu = hat_u->gap(m);
    r.delta = gu.center() - gs.center();
    r.slide = pair.slide + r.delta;
    Model<T> m2 = base.with_slide(r.slide);
    r.hat_s = hat_s->with_slide(m2);
    r.hat_u = *hat_u;
    auto [s1, s2] = r.hat_s.children(m2);
    auto [u1, u2] = r.hat_u.children(m2);
    r.pair1 = {s1, u1, linkage(s1, u1, m2), r.slide};
    r.pair2 = {s2, u2, linkage(s2, u2, m2), r.slide};

    T bs = r.hat_s.length(), bu = r.hat_u.length();
    T l3 = K.lambda_lo * K.lambda_lo * K.lambda_lo;
    r.claim1 = l3 * eps / T(2) < bs && bs < K.lambda_lo * eps / T(2);
    r.claim2 = bs <= bu && bu < sig0 * bs;
    r.claim3 = r.hat_u.gap(m2).length() < bs;
    r.xi_ok = r.pair1.report.status == LinkStatus::Linked && r.pair2.report.status == LinkStatus::Linked &&
              r.pair1.report.xi >= K.xi0 && r.pair2.report.xi >= K.xi0;
    r.budget_ok = absval(r.delta) < eps;
    Interval<T> gs2 = r.hat_s.gap(m2), gu2 = r.hat_u.gap(m2);
    T diff = absval(T(gs2.center() - gu2.center()));
    double tol = relative_resolution<T>() * 64.0;
    r.centers_ok = to_double(diff) <= tol;
    return r;
}

template <class T>
struct LinearGrowth {
    std::vector<LinkedPair<T>> pairs; // B_1..B_K at the final slide
    std::vector<LinkingResult<T>> steps;
    std::vector<T> deltas, budgets;
    T Delta;      // accumulated slide
    T slide;      // base slide + Delta
    T sum_abs;
    T summability_bound; // eps/2 + (xi0/4)|B^s_1|
    double N_s = 0, N_u = 0;
    std::vector<std::size_t> s_gen, u_gen;
    bool all_steps_ok = false, xi_half_ok = false, increments_ok = false, summable_ok = false;
    bool ok() const { return all_steps_ok && xi_half_ok && increments_ok && summable_ok; }
};

template <class T>
LinearGrowth<T> linear_growth(const LinkedPair<T>& initial, const T& eps, int K, const Params& p, const Model<T>& base,
                              double kappa) {
    if (K < 1) throw Error(ErrorCode::InvalidParameters, "linear growth needs K >= 1");
    Constants<T> C(p);
    Derived d(p);
    LinearGrowth<T> out;
    out.N_s = d.N_s(kappa);
    out.N_u = d.N_u(kappa);
    const T kap = from_rational<T>(parse_rational(format_double(kappa)));
    const T factor = C.lambda_hi * C.xi0 / (T(4) * (kap + T(1)));

    std::vector<LinkedPair<T>> raw;
    T budget = eps / T(2);
    LinkedPair<T> current = initial;
    for (int k = 1; k <= K; ++k) {
        LinkingResult<T> r = linking_step(current, budget, base, C);
        out.budgets.push_back(budget);
        out.deltas.push_back(r.delta);
        raw.push_back(r.pair1);
        current = r.pair2;
        budget = factor * r.pair1.bs.length();
        out.steps.push_back(std::move(r));
    }
    out.slide = current.slide;
    out.Delta = out.slide - initial.slide;
    Model<T> mf = base.with_slide(out.slide);

    out.all_steps_ok = std::all_of(out.steps.begin(), out.steps.end(), [](const auto& s) { return s.ok(); });
    out.xi_half_ok = true;
    for (const auto& q : raw) {
        LinkedPair<T> f = make_pair_at(q.bs, q.bu, mf);
        out.xi_half_ok = out.xi_half_ok && f.report.status == LinkStatus::Linked && f.report.xi >= C.xi0 / T(2);
        out.s_gen.push_back(f.bs.generation());
        out.u_gen.push_back(f.bu.generation());
        out.pairs.push_back(std::move(f));
    }
    out.increments_ok = true;
    for (std::size_t i = 1; i < out.pairs.size(); ++i) {
        double ds = double(out.s_gen[i]) - double(out.s_gen[i - 1]);
        double du = double(out.u_gen[i]) - double(out.u_gen[i - 1]);
        out.increments_ok = out.increments_ok && ds <= std::ceil(out.N_s) && du <= std::ceil(out.N_u);
    }
    out.sum_abs = T(0);
    for (const auto& dl : out.deltas) out.sum_abs += absval(dl);
    out.summability_bound = eps / T(2) + C.xi0 / T(4) * out.pairs.front().bs.length();
    out.summable_ok = out.sum_abs <= out.summability_bound && out.summability_bound <= eps && absval(out.Delta) <= eps;
    return out;
}

// ---------------------------------------------------------------- chain spec

struct ChainEntry {
    int k;
    std::size_t u_hat, m_hat, s_next;
    Word z_hat, v_hat, w_next, z;
    std::size_t n;
};

struct ChainSpec {
    int N = 11;
    double C = 0;        // a-priori constant with u_hat_k + s_hat_{k+1} <= C k
    double eta = 0.075;
    int translation = 0; // m_hat_k = (k + translation)^2
    std::vector<Word> z_hats, w_hats; // index k-1, k = 1..K+1
    std::vector<ChainEntry> entries;  // k = 1..K
    std::size_t K() const { return entries.size(); }
};

// Linked sub-bridges inside each linear-growth pair at the scale lambda_lo^{kN}.
template <class T>
struct ChainSkeleton {
    int N;
    std::vector<Piece<T>> hat_s, hat_u;
    std::vector<LinkageReport<T>> reports;
};

template <class T>
ChainSkeleton<T> find_chain_bridges(const std::vector<LinkedPair<T>>& pairs, int N, const Params& p, const Model<T>& mf) {
    Constants<T> C(p);
    ChainSkeleton<T> out{N, {}, {}, {}};
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const int k = int(i) + 1;
        const T hi = ipow(C.lambda_lo, long(k) * N + 1), lo = hi * C.lambda_lo;
        const auto& pr = pairs[i];
        T target = common_part(pr.bs.interval(), pr.bu.interval()).center();
        auto sub = find_linked_subpair<T>(
            pr.bs, pr.bu, [&](const T& len) { return len < lo ? -1 : (len <= hi ? 0 : 1); },
            [&](const T& bs, const T& bu) { return bu < bs ? -1 : (bu <= C.sigma_hi * bs ? 0 : 1); }, target, mf);
        bool found = sub.has_value();
        if (found) {
            require_resolvable(sub->first.interval(), "chain stable sub-bridge");
            require_resolvable(sub->second.interval(), "chain unstable sub-bridge");
            out.hat_s.push_back(sub->first);
            out.hat_u.push_back(sub->second);
            out.reports.push_back(linkage(sub->first, sub->second, mf));
        }
        if (!found) throw Error(ErrorCode::WindowEmpty, "no linked sub-pair at k=" + std::to_string(k));
    }
    return out;
}

inline double chain_constant(const Params& p, int N) {
    Derived d(p);
    double g = to_double(p.gamma);
    auto bound_u = [&](int k) { return (std::log(2 * d.a_u) - (k * N + 2) * std::log(d.lambda_lo)) / std::log(d.sigma_lo); };
    auto bound_s = [&](int k) {
        return ((k * N + 2) * std::log(d.lambda_lo) - std::log(2 * d.a_s * g)) / std::log(d.lambda_hi);
    };
    double first = bound_u(1) + bound_s(2);
    double slope = N * std::log(d.lambda_lo) * (-1 / std::log(d.sigma_lo) + 1 / std::log(d.lambda_hi));
    return std::max(first, slope);
}

inline std::size_t n_of(std::size_t u, std::size_t m, std::size_t s) { return u + m + s; }

// Smallest t >= 0 with n_{k+1} < (1+eta) n_k for all k < K when m_hat_k = (k+t)^2.
inline int choose_translation(const std::vector<std::size_t>& u_hat, const std::vector<std::size_t>& s_hat, int K,
                              double eta, int t_max = 100000) {
    for (int t = 0; t <= t_max; ++t) {
        bool ok = true;
        for (int k = 1; k < K && ok; ++k) {
            double nk = double(n_of(u_hat[k - 1], std::size_t(k + t) * (k + t), s_hat[k]));
            double nk1 = double(n_of(u_hat[k], std::size_t(k + 1 + t) * (k + 1 + t), s_hat[k + 1]));
            ok = nk1 < (1 + eta) * nk;
        }
        if (ok) return t;
    }
    throw Error(ErrorCode::SearchFailed, "no subscript translation satisfies the growth condition");
}

// Lengths-only spec: middle words are zero-filled until a design is applied.
template <class T>
ChainSpec assemble_chain_spec(const ChainSkeleton<T>& sk, int K, int translation, double eta, const Params& p) {
    if (int(sk.hat_s.size()) < K + 1) throw Error(ErrorCode::LengthMismatch, "need K+1 linked pairs for K chain points");
    ChainSpec spec;
    spec.N = sk.N;
    spec.eta = eta;
    spec.C = chain_constant(p, sk.N);
    for (int i = 0; i <= K; ++i) {
        spec.z_hats.push_back(sk.hat_u[i].word);
        spec.w_hats.push_back(sk.hat_s[i].word);
    }
    if (translation < 0) {
        std::vector<std::size_t> u, s;
        for (int i = 0; i <= K; ++i) {
            u.push_back(spec.z_hats[i].size());
            s.push_back(spec.w_hats[i].size());
        }
        translation = choose_translation(u, s, K, eta);
    }
    spec.translation = translation;
    for (int k = 1; k <= K; ++k) {
        ChainEntry e;
        e.k = k;
        e.z_hat = spec.z_hats[k - 1];
        e.w_next = spec.w_hats[k];
        e.u_hat = e.z_hat.size();
        e.s_next = e.w_next.size();
        e.m_hat = std::size_t(k + translation) * std::size_t(k + translation);
        e.v_hat = Word(e.m_hat, '0');
        e.z = e.z_hat + e.v_hat + reverse_word(e.w_next);
        e.n = e.z.size();
        spec.entries.push_back(std::move(e));
    }
    return spec;
}

inline void apply_design(ChainSpec& spec, const std::vector<Word>& v_hats) {
    if (v_hats.size() != spec.entries.size()) throw Error(ErrorCode::LengthMismatch, "one middle word per chain point");
    for (std::size_t i = 0; i < v_hats.size(); ++i) {
        auto& e = spec.entries[i];
        if (v_hats[i].size() != e.m_hat || !valid_word(v_hats[i]))
            throw Error(ErrorCode::LengthMismatch, "middle word " + std::to_string(i + 1) + " has the wrong length");
        e.v_hat = v_hats[i];
        e.z = e.z_hat + e.v_hat + reverse_word(e.w_next);
        e.n = e.z.size();
    }
}

struct SpecChecks {
    bool lengths_ok = true;   // |z| = n = u + m + s
    bool suffix_ok = true;    // reverse(w_{k+1}) ends z
    bool growth_bound_ok = true;
    bool eta_ok = true;
    double max_ratio = 0;
};

inline SpecChecks check_spec(const ChainSpec& spec) {
    SpecChecks c;
    for (const auto& e : spec.entries) {
        c.lengths_ok = c.lengths_ok && e.z.size() == e.n && e.n == e.u_hat + e.m_hat + e.s_next;
        Word suf = reverse_word(e.w_next);
        c.suffix_ok = c.suffix_ok && e.z.size() >= suf.size() && e.z.compare(e.z.size() - suf.size(), suf.size(), suf) == 0;
        c.growth_bound_ok = c.growth_bound_ok && double(e.u_hat + e.s_next) <= spec.C * e.k;
    }
    for (std::size_t i = 1; i < spec.entries.size(); ++i) {
        double r = double(spec.entries[i].n) / double(spec.entries[i - 1].n);
        c.max_ratio = std::max(c.max_ratio, r);
        c.eta_ok = c.eta_ok && r < 1 + spec.eta;
    }
    return c;
}

// ------------------------------------------------------------ critical chain

template <class T>
struct ChainPoint {
    Point<T> r, x, q, y;
};

template <class T>
struct CriticalChain {
    Model<T> model;               // at the final slide
    std::vector<ChainPoint<T>> points; // index k-1
    PerturbationField<T> field;
    double field_rho = 0;
    double C1 = 0;
    std::vector<double> zeta_norms; // index k-2 for k = 2..K
    double tail_bound = 0;
    System<T> system() const { return {model, field}; }
};

template <class T>
CriticalChain<T> critical_chain(const ChainSpec& spec, const std::vector<Interval<Rational>>& stable_supports,
                                const Params& p, const Rational& slide, double kappa) {
    const std::size_t K = spec.K();
    if (stable_supports.size() < K) throw Error(ErrorCode::LengthMismatch, "one stable support per chain point");
    CriticalChain<T> ch;
    ch.model = Model<T>(p).with_slide(from_rational<T>(slide));
    const Model<T>& m = ch.model;
    if (!(T(3) * m.hx / T(2) < ratio<T>(1, 2) - m.inv_sigma))
        throw Error(ErrorCode::SupportsOverlap, "inflated window support reaches the strips");

    for (std::size_t i = 0; i < K; ++i) {
        const Word& z = spec.entries[i].z;
        ChainPoint<T> cp;
        cp.x = {word_map(Kind::Unstable, z, m)(T(0)), T(0)};
        cp.q = {T(0), word_map(Kind::Stable, reverse_word(z), m)(T(0))};
        if (!m.in_window(cp.q))
            throw Error(ErrorCode::IntersectionNotBracketed, "q_" + std::to_string(i + 1) + " outside the window");
        cp.y = {m.apex(cp.q.y), T(0)};
        cp.r = {T(0), m.apex_inverse(cp.x.x)};
        ch.points.push_back(cp);
    }

    // Supports of entries k = 2..K with the largest admissible margin ratio.
    std::vector<Interval<T>> sup;
    for (std::size_t k = 2; k <= K; ++k)
        sup.push_back({from_rational<T>(stable_supports[k - 1].lo), from_rational<T>(stable_supports[k - 1].hi)});
    double rho = 1.0;
    for (std::size_t i = 0; i < sup.size(); ++i)
        for (std::size_t j = 0; j < sup.size(); ++j) {
            if (i == j) continue;
            if (sup[i].hi < sup[j].lo) {
                double gapv = to_double(T(sup[j].lo - sup[i].hi));
                rho = std::min(rho, gapv / to_double(T(sup[i].length() + sup[j].length())));
            } else if (!(sup[j].hi < sup[i].lo)) {
                throw Error(ErrorCode::SupportsOverlap, "stable supports intersect");
            }
        }
    ch.field_rho = rho;
    const T rho_t = from_rational<T>(parse_rational(format_double(rho)));
    std::vector<PerturbationEntry<T>> entries;
    for (std::size_t k = 2; k <= K; ++k) {
        PerturbationEntry<T> e;
        e.anchor = ch.points[k - 2].q;
        e.zeta = {ch.points[k - 1].r.x - e.anchor.x, ch.points[k - 1].r.y - e.anchor.y};
        e.omega = T(0); // vertical unstable leaves everywhere
        e.ya = sup[k - 2].lo;
        e.yb = sup[k - 2].hi;
        e.x_half = m.hx;
        e.rho = rho_t;
        if (!(e.anchor.y >= e.ya && e.anchor.y <= e.yb))
            throw Error(ErrorCode::IntersectionNotBracketed, "anchor q_" + std::to_string(k - 1) + " outside its support");
        entries.push_back(e);
    }
    try {
        ch.field = PerturbationField<T>(std::move(entries));
    } catch (const Error& err) {
        throw Error(ErrorCode::SupportsOverlap, err.what());
    }

    Derived d(p);
    ch.C1 = 2.0 / to_double(p.gamma);
    for (const auto& e : ch.field.entries())
        ch.zeta_norms.push_back(to_double(distance(Point<T>{}, e.zeta)));
    // Truncation tail of the perturbation series for r = 1.
    double ratio_s = std::pow(d.lambda_lo, 5) * d.xi0 / (12 * (kappa + 1));
    double q = std::pow(d.lambda_lo, spec.N) / ratio_s;
    double last = std::pow(d.lambda_lo, double(K) * spec.N) / to_double(stable_supports[K - 1].length());
    ch.tail_bound = q < 1 ? last * q / (1 - q) : INFINITY;
    return ch;
}

struct LegCheck {
    int k;
    double error;
    double relative; // error / diam(Q)
    bool pass;
    std::string note;
};

// Runs g for `ticks` ticks from p; empty when the orbit escapes or a double
// step overshoots the tick budget.
template <class T>
std::optional<Point<T>> advance(const System<T>& sys, Point<T> p, long ticks) {
    long t = 0;
    while (t < ticks) {
        Step<T> s = step(sys, p);
        if (s.region == Region::Escaped) return std::nullopt;
        t += s.ticks();
        p = s.next;
    }
    if (t != ticks) return std::nullopt;
    return p;
}

template <class T>
std::vector<LegCheck> verify_chain(const CriticalChain<T>& ch, const ChainSpec& spec, double tol = 1e-10) {
    std::vector<LegCheck> out;
    System<T> sys = ch.system();
    const double diam = 2.0 * std::sqrt(2.0);
    for (std::size_t i = 0; i + 1 < ch.points.size(); ++i) {
        LegCheck c{int(i) + 1, INFINITY, INFINITY, false, ""};
        auto end = advance(sys, ch.points[i].x, long(spec.entries[i].n) + 2);
        if (!end) {
            c.note = "orbit escaped";
        } else {
            c.error = to_double(distance(*end, ch.points[i + 1].x));
            c.relative = c.error / diam;
            c.pass = c.relative < tol;
        }
        out.push_back(c);
    }
    return out;
}

struct ZetaCheck {
    bool bound_ok = true;
    bool decay_ok = true;
};

template <class T>
ZetaCheck check_zeta(const CriticalChain<T>& ch, const ChainSpec& spec, const Params& p) {
    ZetaCheck z;
    double lam = to_double(p.lambda_lo());
    for (std::size_t i = 0; i < ch.zeta_norms.size(); ++i) {
        int k = int(i) + 2;
        z.bound_ok = z.bound_ok && ch.zeta_norms[i] <= ch.C1 * std::pow(lam, double(k) * spec.N);
        if (i > 0) z.decay_ok = z.decay_ok && ch.zeta_norms[i] < ch.zeta_norms[i - 1];
    }
    return z;
}

// --------------------------------------------------------- rectangle cascade

template <class T>
struct Rectangle {
    Point<T> center;
    T width, height;
    double S; // exponent: width = rho/beta * sigma_hi^{-S}
};

template <class T>
struct InclusionSample {
    int k;
    Point<T> start;
    Point<T> image;
    double margin;
};

template <class T>
struct RectangleCascade {
    std::vector<Rectangle<T>> rects;
    std::vector<double> margins; // worst relative margin of g^{n_k+2}(R_k) in R_{k+1}
    std::optional<InclusionSample<T>> worst;
    bool inclusions_ok = false, disjoint_ok = false, in_gap_ok = false, clear_of_strips_ok = false;
    bool diam_decreasing_ok = false, width_bounds_ok = false, supports_avoid_ok = false;
    bool all_ok() const {
        return inclusions_ok && disjoint_ok && in_gap_ok && clear_of_strips_ok && diam_decreasing_ok && width_bounds_ok &&
               supports_avoid_ok;
    }
};

// Boundary points (per_edge per side, corners included) and the center.
template <class T>
std::vector<Point<T>> rectangle_samples(const Rectangle<T>& R, int per_edge) {
    std::vector<Point<T>> pts{R.center};
    T hw = R.width / T(2), hh = R.height / T(2);
    for (int i = 0; i < per_edge; ++i) {
        T s = T(-1) + T(2) * T(i) / T(per_edge); // [-1, 1) around the loop
        pts.push_back({R.center.x + s * hw, R.center.y - hh});
        pts.push_back({R.center.x + hw, R.center.y + s * hh});
        pts.push_back({R.center.x - s * hw, R.center.y + hh});
        pts.push_back({R.center.x - hw, R.center.y - s * hh});
    }
    return pts;
}

template <class T>
RectangleCascade<T> rectangle_cascade(const CriticalChain<T>& ch, const ChainSpec& spec, const Params& p,
                                      const Rational& rho, int per_edge = 16, double margin_target = 0.25) {
    const std::size_t K = spec.K();
    RectangleCascade<T> out;
    const Model<T>& m = ch.model;
    const T sig_hi = from_rational<T>(p.sigma_hi());
    const T log_sig = log_of(sig_hi);
    const T pref = from_rational<T>(rho / p.beta);
    const T h_coeff = T(20) * m.alpha / sqrt_of(m.beta);

    std::vector<double> S(K);
    S[K - 1] = 2.0 * double(spec.entries[K - 1].n);
    for (std::size_t i = K - 1; i-- > 0;) S[i] = double(spec.entries[i].n) + S[i + 1] / 2;
    for (std::size_t i = 0; i < K; ++i) {
        Rectangle<T> R;
        R.center = ch.points[i].x;
        R.S = S[i];
        R.width = pref * exp_of(T(-(T(S[i]) * log_sig)));
        R.height = h_coeff * sqrt_of(R.width);
        if (!(R.width > T(0))) throw Error(ErrorCode::PrecisionExhausted, "rectangle width underflows the backend");
        out.rects.push_back(R);
    }

    System<T> sys = ch.system();
    out.inclusions_ok = true;
    for (std::size_t i = 0; i + 1 < K; ++i) {
        const auto& nxt = out.rects[i + 1];
        double worst = INFINITY;
        for (const auto& s : rectangle_samples(out.rects[i], per_edge)) {
            auto img = advance(sys, s, long(spec.entries[i].n) + 2);
            double margin = -INFINITY;
            Point<T> ip = s;
            if (img) {
                ip = *img;
                double dx = to_double(T(absval(T(ip.x - nxt.center.x)) / (nxt.width / T(2))));
                double dy = to_double(T(absval(T(ip.y - nxt.center.y)) / (nxt.height / T(2))));
                margin = 1.0 - std::max(dx, dy);
            }
            if (margin < worst) {
                worst = margin;
                if (!out.worst || margin < out.worst->margin) out.worst = InclusionSample<T>{int(i) + 1, s, ip, margin};
            }
        }
        out.margins.push_back(worst);
        out.inclusions_ok = out.inclusions_ok && worst >= margin_target;
    }

    out.in_gap_ok = true;
    out.clear_of_strips_ok = true;
    out.width_bounds_ok = true;
    out.supports_avoid_ok = true;
    const T clear = ratio<T>(1, 2) - m.lambda;
    const double eta = spec.eta;
    for (std::size_t i = 0; i < K; ++i) {
        const auto& R = out.rects[i];
        Interval<T> gap = gap_interval(Kind::Unstable, spec.entries[i].z, m);
        Interval<T> xr{R.center.x - R.width / T(2), R.center.x + R.width / T(2)};
        out.in_gap_ok = out.in_gap_ok && gap.contains_open(xr);
        out.clear_of_strips_ok = out.clear_of_strips_ok && R.height / T(2) < clear;
        double n = double(spec.entries[i].n);
        out.width_bounds_ok = out.width_bounds_ok && 2 * n <= R.S && R.S <= 2 * n / (1 - eta);
        for (const auto& e : ch.field.entries())
            out.supports_avoid_ok = out.supports_avoid_ok && (R.center.y + R.height / T(2) < e.ya - e.y_margin() ||
                                                              R.center.y - R.height / T(2) > e.yb + e.y_margin());
    }
    out.disjoint_ok = true;
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = i + 1; j < K; ++j) {
            const auto& a = out.rects[i];
            const auto& b = out.rects[j];
            Interval<T> xa{a.center.x - a.width / T(2), a.center.x + a.width / T(2)};
            Interval<T> xb{b.center.x - b.width / T(2), b.center.x + b.width / T(2)};
            out.disjoint_ok = out.disjoint_ok && !xa.meets(xb);
        }
    out.diam_decreasing_ok = true;
    for (std::size_t i = 1; i < K; ++i) {
        auto diam = [](const Rectangle<T>& R) { return R.width * R.width + R.height * R.height; };
        out.diam_decreasing_ok = out.diam_decreasing_ok && diam(out.rects[i]) < diam(out.rects[i - 1]);
    }
    return out;
}

template <class T>
void require_inclusions(const RectangleCascade<T>& c) {
    if (c.inclusions_ok) return;
    std::string where = "unknown sample";
    if (c.worst)
        where = "k=" + std::to_string(c.worst->k) + " start (" + format_double(to_double(c.worst->start.x)) + ", " +
                format_double(to_double(c.worst->start.y)) + ") margin " + format_double(c.worst->margin, 6);
    throw Error(ErrorCode::InclusionFailed, where);
}

// Bits needed to resolve the cascade widths after forward amplification.
inline unsigned auto_precision_bits(const ChainSpec& spec, const Params& p) {
    double S = 0, n = 0;
    std::vector<double> Sk(spec.K());
    for (std::size_t i = spec.K(); i-- > 0;) {
        Sk[i] = i + 1 == spec.K() ? 2.0 * double(spec.entries[i].n) : double(spec.entries[i].n) + Sk[i + 1] / 2;
        S = std::max(S, Sk[i]);
        n = std::max(n, double(spec.entries[i].n));
    }
    return unsigned(std::ceil(std::log2(to_double(p.sigma_hi())) * (S + n))) + 192;
}

} // namespace hs
