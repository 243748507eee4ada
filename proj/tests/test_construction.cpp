#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "horseshoe/horseshoe.hpp"

using namespace hs;

namespace {

const Params P{};

const InitialPair<Rational>& initial() {
    static const InitialPair<Rational> ip = initial_linked_pair(P, Model<Rational>(P));
    return ip;
}

const LinearGrowth<Rational>& growth8() {
    static const LinearGrowth<Rational> lg =
        linear_growth(initial().pair, Rational(1, 1000), 8, P, Model<Rational>(P), 2.5);
    return lg;
}

// Skeleton for K chain points with the automatic translation.
const Skeleton& skeleton(int K, int translation = -1) {
    static std::map<std::pair<int, int>, Skeleton> cache;
    auto key = std::make_pair(K, translation);
    auto it = cache.find(key);
    if (it == cache.end()) {
        PipelineOptions o;
        o.K = K;
        o.translation = translation;
        it = cache.emplace(key, build_skeleton(o)).first;
    }
    return it->second;
}

double xi0_closed_form() {
    double s = to_double(P.sigma_hi());
    return (s + 2) * (3 - s) / (3 * (s + 3));
}

} // namespace

TEST(InitialPair, FundamentalGenerations) {
    // Smallest n with 2 a_u sigma^-(n+1) <= mu and m with 2 a_s gamma lambda^(m+1) <= mu.
    Derived d(P);
    double mu = to_double(P.mu);
    int n0 = int(std::ceil(std::log(2 * d.a_u / mu) / std::log(d.sigma))) - 1;
    int m0 = int(std::ceil(std::log(mu / (2 * d.a_s)) / std::log(d.lambda))) - 1;
    EXPECT_EQ(initial().n0, n0);
    EXPECT_EQ(initial().m0, m0);
    EXPECT_EQ(n0, 5);
    EXPECT_EQ(m0, 4);
}

TEST(InitialPair, StableBridgeOnTangencyCurve) {
    const auto& ip = initial();
    EXPECT_EQ(ip.c, Rational(0));
    // 0^{m0} shrinks [-a_s, a_s] towards -a_s by lambda^{m0}; the apex map
    // then places it at -a_u + mu on L.
    Rational lo = -P.a_u() + P.mu;
    Rational hi = lo + 2 * P.a_s() * P.gamma * Rational(81, 10000);
    auto I = ip.bs0.interval();
    EXPECT_EQ(I.lo, lo);
    EXPECT_EQ(I.hi, hi);
    EXPECT_NEAR(to_double(I.lo), -0.823333, 1e-6);
    EXPECT_NEAR(to_double(I.hi), -0.811762, 1e-6);
}

TEST(InitialPair, CertifiedLinked) {
    const auto& ip = initial();
    EXPECT_EQ(ip.pair.report.status, LinkStatus::Linked);
    EXPECT_GT(ip.pair.report.overlap, Rational(0));
    EXPECT_EQ(ip.refinements, 2);
    // Re-measured without the stored report.
    Model<Rational> m = Model<Rational>(P).with_slide(ip.pair.slide);
    EXPECT_EQ(linkage(ip.pair.bs, ip.pair.bu, m).status, LinkStatus::Linked);
}

TEST(Linking, StepSatisfiesAllClaims) {
    const auto& ip = initial();
    Model<Rational> base(P);
    Constants<Rational> C(P);
    const Rational eps(1, 1000);
    auto r = linking_step(ip.pair, eps, base, C);
    EXPECT_TRUE(r.ok());
    EXPECT_LT(absval(r.delta), eps);
    EXPECT_NEAR(to_double(r.delta), -7.44e-5, 1e-6);

    // Claims re-measured from the returned bridges.
    Model<Rational> m = base.with_slide(r.slide);
    Rational bs = r.hat_s.length(), bu = r.hat_u.length();
    Rational l = P.lambda_lo();
    EXPECT_LT(l * l * l * eps / 2, bs);
    EXPECT_LT(bs, l * eps / 2);
    EXPECT_LE(bs, bu);
    EXPECT_LT(bu, P.sigma_hi() * bs);
    EXPECT_LT(r.hat_u.gap(m).length(), bs);
    EXPECT_EQ(r.hat_s.gap(m).center(), r.hat_u.gap(m).center());
    for (const auto* pr : {&r.pair1, &r.pair2}) {
        auto rep = linkage(pr->bs, pr->bu, m);
        EXPECT_EQ(rep.status, LinkStatus::Linked);
        EXPECT_GE(to_double(rep.xi), xi0_closed_form());
    }
    EXPECT_NEAR(xi0_closed_form(), 0.133690, 1e-6);
}

TEST(Linking, OversizedBudgetRejected) {
    Model<Rational> base(P);
    Constants<Rational> C(P);
    try {
        linking_step(initial().pair, Rational(9, 10), base, C, Rational(1));
        FAIL() << "expected BudgetTooLarge";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BudgetTooLarge);
    }
}

TEST(LinearGrowth, EightPairsMeetEveryBound) {
    const auto& lg = growth8();
    ASSERT_EQ(lg.pairs.size(), 8u);
    EXPECT_TRUE(lg.ok());
    EXPECT_NEAR(lg.N_s, 10.194, 1e-3);
    EXPECT_NEAR(lg.N_u, 16.395, 1e-3);
    Model<Rational> mf = Model<Rational>(P).with_slide(lg.slide);
    for (const auto& pr : lg.pairs) {
        auto rep = linkage(pr.bs, pr.bu, mf);
        EXPECT_EQ(rep.status, LinkStatus::Linked);
        EXPECT_GE(to_double(rep.xi), xi0_closed_form() / 2);
    }
    for (std::size_t i = 1; i < lg.pairs.size(); ++i) {
        EXPECT_LE(lg.pairs[i].bs.generation() - lg.pairs[i - 1].bs.generation(), 11u);
        EXPECT_LE(lg.pairs[i].bu.generation() - lg.pairs[i - 1].bu.generation(), 17u);
    }
    EXPECT_LE(absval(lg.Delta), Rational(1, 1000));
}

TEST(LinearGrowth, ScheduleIsSummable) {
    const auto& lg = growth8();
    Rational sum = 0;
    for (const auto& d : lg.deltas) sum += absval(d);
    EXPECT_EQ(sum, lg.sum_abs);
    double bound = 1.0 / 2000 + xi0_closed_form() / 4 * to_double(lg.pairs.front().bs.length());
    EXPECT_LE(to_double(sum), bound + 1e-12);
    EXPECT_LE(lg.summability_bound, Rational(1, 1000));
    // Slides accumulate exactly.
    Rational slide = initial().pair.slide;
    for (const auto& d : lg.deltas) slide += d;
    EXPECT_EQ(slide, lg.slide);
}

TEST(LinearGrowth, FrozenGenerations) {
    const auto& lg = growth8();
    std::vector<std::size_t> s(lg.s_gen.begin(), lg.s_gen.begin() + 7), u(lg.u_gen.begin(), lg.u_gen.begin() + 7);
    EXPECT_EQ(s, (std::vector<std::size_t>{10, 18, 26, 34, 42, 50, 58}));
    EXPECT_EQ(u, (std::vector<std::size_t>{12, 23, 34, 44, 55, 65, 76}));
}

TEST(ChainSpec, BridgesInTheirLengthWindows) {
    const auto& sk = skeleton(3);
    Constants<Rational> C(P);
    for (std::size_t i = 0; i < sk.bridges.hat_s.size(); ++i) {
        const long k = long(i) + 1;
        Rational hi = ipow(C.lambda_lo, k * sk.bridges.N + 1), lo = hi * C.lambda_lo;
        Rational ls = sk.bridges.hat_s[i].length(), lu = sk.bridges.hat_u[i].length();
        EXPECT_LE(lo, ls);
        EXPECT_LE(ls, hi);
        EXPECT_LE(ls, lu);
        EXPECT_LE(lu, C.sigma_hi * ls);
        EXPECT_EQ(sk.bridges.reports[i].status, LinkStatus::Linked);
    }
}

TEST(ChainSpec, GenerationArithmetic) {
    for (int K : {3, 5}) {
        const auto& sk = skeleton(K);
        const auto& spec = sk.spec;
        ASSERT_EQ(spec.K(), std::size_t(K));
        for (const auto& e : spec.entries) {
            EXPECT_EQ(e.z.size(), e.n);
            EXPECT_EQ(e.n, e.u_hat + e.m_hat + e.s_next);
            EXPECT_EQ(e.m_hat, std::size_t(e.k + spec.translation) * std::size_t(e.k + spec.translation));
            EXPECT_LE(double(e.u_hat + e.s_next), spec.C * e.k);
        }
        auto c = check_spec(spec);
        EXPECT_TRUE(c.lengths_ok && c.suffix_ok && c.growth_bound_ok && c.eta_ok);
    }
}

TEST(ChainSpec, FrozenTranslationAndLengths) {
    const auto& spec = skeleton(3).spec;
    EXPECT_EQ(spec.N, 11);
    EXPECT_EQ(spec.translation, 35);
    EXPECT_NEAR(spec.C, 43.87, 0.01);
    std::vector<std::size_t> n;
    for (const auto& e : spec.entries) n.push_back(e.n);
    EXPECT_EQ(n, (std::vector<std::size_t>{1337, 1436, 1538}));
}

TEST(ChainSpec, DesignReplacesMiddleWords) {
    ChainSpec spec = skeleton(3).spec;
    std::vector<Word> v;
    for (const auto& e : spec.entries) v.push_back(Word(e.m_hat, '1'));
    apply_design(spec, v);
    for (const auto& e : spec.entries) EXPECT_EQ(e.z, e.z_hat + Word(e.m_hat, '1') + reverse_word(e.w_next));
    v.pop_back();
    EXPECT_THROW(apply_design(spec, v), Error);
}

TEST(CriticalChain, LegsCloseAt256Bits) {
    PipelineOptions o;
    o.K = 5;
    o.translation = 0;
    const auto& sk = skeleton(5, 0);
    PrecisionScope scope(256);
    auto run = run_chain<BigFloat>(sk, sk.spec, o, false);
    ASSERT_EQ(run.legs.size(), 4u);
    for (const auto& l : run.legs) EXPECT_TRUE(l.pass) << "leg " << l.k << " relative " << l.relative;
    EXPECT_TRUE(run.zeta.bound_ok);
    EXPECT_TRUE(run.zeta.decay_ok);
    for (const auto& cp : run.chain.points) {
        EXPECT_TRUE(run.chain.model.in_window(cp.q));
        EXPECT_EQ(cp.x.y, BigFloat(0));
    }
    EXPECT_GT(run.chain.tail_bound, 0.0);
}

TEST(CriticalChain, FieldIsIdentityOffItsSupports) {
    const auto& sk = skeleton(3);
    PipelineOptions o;
    auto ch = critical_chain<double>(sk.spec, sk.supports, P, sk.growth.slide, o.kappa);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int checked = 0;
    for (int i = 0; i < 5000; ++i) {
        Point<double> p{u(rng), u(rng)};
        bool covered = false;
        for (const auto& e : ch.field.entries()) covered = covered || e.in_support(p);
        if (covered) continue;
        EXPECT_EQ(ch.field(p), p);
        ++checked;
    }
    EXPECT_GT(checked, 4000);
}

// Double cannot follow legs that expand by sigma^n with n in the hundreds.
TEST(CriticalChain, DoubleBackendCannotResolveLongLegs) {
    const auto& sk = skeleton(3);
    PipelineOptions o;
    bool resolved = true;
    try {
        auto run = run_chain<double>(sk, sk.spec, o, false);
        resolved = run.legs_ok();
    } catch (const Error& e) {
        resolved = false;
    }
    EXPECT_FALSE(resolved);
}

TEST(Cascade, AutoPrecisionInclusionsAndGeometry) {
    const auto& sk = skeleton(3);
    PipelineOptions o;
    unsigned bits = auto_precision_bits(sk.spec, P);
    EXPECT_EQ(bits, 6318u);
    PrecisionScope scope(bits);
    auto run = run_chain<BigFloat>(sk, sk.spec, o, true);
    EXPECT_TRUE(run.legs_ok());
    const auto& c = *run.cascade;
    ASSERT_EQ(c.margins.size(), 2u);
    for (double m : c.margins) EXPECT_GE(m, 0.25);
    EXPECT_TRUE(c.inclusions_ok);
    EXPECT_TRUE(c.disjoint_ok);
    EXPECT_TRUE(c.in_gap_ok);
    EXPECT_TRUE(c.clear_of_strips_ok);
    EXPECT_TRUE(c.diam_decreasing_ok);
    EXPECT_TRUE(c.width_bounds_ok);
    EXPECT_TRUE(c.supports_avoid_ok);
    EXPECT_NO_THROW(require_inclusions(c));
    // Widths follow the truncated exponent series.
    for (std::size_t i = 0; i + 1 < c.rects.size(); ++i)
        EXPECT_DOUBLE_EQ(c.rects[i].S, double(sk.spec.entries[i].n) + c.rects[i + 1].S / 2);
}

TEST(Cascade, FailedInclusionNamesTheSample) {
    RectangleCascade<double> c;
    c.inclusions_ok = false;
    c.worst = InclusionSample<double>{2, {0.1, 0.2}, {0.3, 0.4}, -0.5};
    try {
        require_inclusions(c);
        FAIL() << "expected InclusionFailed";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InclusionFailed);
        EXPECT_NE(std::string(e.what()).find("k=2"), std::string::npos);
    }
}
