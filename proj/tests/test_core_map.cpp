#include <gtest/gtest.h>

#include <random>

#include "horseshoe/horseshoe.hpp"

using namespace hs;

namespace {

Params defaults() { return Params{}; }

} // namespace

TEST(Scalar, ParsesRationalText) {
    EXPECT_EQ(parse_rational("5/2"), Rational(5, 2));
    EXPECT_EQ(parse_rational("-0.01"), Rational(-1, 100));
    EXPECT_EQ(parse_rational("1e-3"), Rational(1, 1000));
    EXPECT_EQ(parse_rational("3"), Rational(3));
    EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
    EXPECT_EQ(parse_rational("007.50"), Rational(15, 2));
    EXPECT_EQ(parse_rational("0"), Rational(0));
    EXPECT_EQ(parse_rational("0.0"), Rational(0));
    EXPECT_THROW(parse_rational("abc"), std::exception);
}

TEST(Scalar, PrecisionScopeRestores) {
    unsigned before = bigfloat_bits();
    {
        PrecisionScope s(1000);
        EXPECT_GE(bigfloat_bits(), 1000u);
    }
    EXPECT_EQ(bigfloat_bits(), before);
}

TEST(Params, DefaultChecksPass) {
    auto checks = check_params(defaults(), 0.075);
    for (const auto& c : checks) EXPECT_TRUE(c.pass) << c.name;
    for (const auto& c : checks) {
        if (c.name == "tau_s*tau_u > 1") {
            EXPECT_NEAR(c.slack, 0.5, 1e-12);
        }
    }
}

TEST(Params, LargeLambdaFailsDissipation) {
    Params p;
    p.lambda = Rational(45, 100);
    auto checks = check_params(p, 0.075);
    auto it = std::find_if(checks.begin(), checks.end(), [](const Check& c) { return c.name == "lambda*sigma < 1"; });
    ASSERT_NE(it, checks.end());
    EXPECT_FALSE(it->pass);
    EXPECT_FALSE(all_pass(checks));
}

TEST(Params, SigmaAboveThreeFails) {
    Params p;
    p.sigma = Rational(16, 5);
    p.lambda = Rational(1, 10);
    auto checks = check_params(p, 0.075);
    auto it = std::find_if(checks.begin(), checks.end(), [](const Check& c) { return c.name == "sigma < 3"; });
    ASSERT_NE(it, checks.end());
    EXPECT_FALSE(it->pass);
}

TEST(Params, HalfEtaViolatesCompatibility) {
    Derived d(defaults());
    EXPECT_GT(d.eta_check(0.5), 1.0);
    EXPECT_LT(d.eta_check(0.075), 1.0);
}

TEST(CoreMap, FixedPointIsExact) {
    Model<Rational> m(defaults());
    Point<Rational> p = m.fixed_point();
    EXPECT_EQ(p.x, Rational(-5, 6));
    EXPECT_EQ(p.y, Rational(-5, 7));
    auto img = m.eval_branch(p);
    ASSERT_TRUE(img.has_value());
    EXPECT_EQ(*img, p);
}

TEST(CoreMap, FixedPointInDouble) {
    Model<double> m(defaults());
    auto img = m.eval_branch(m.fixed_point());
    ASSERT_TRUE(img.has_value());
    EXPECT_NEAR(img->x, -5.0 / 6.0, 1e-15);
    EXPECT_NEAR(img->y, -5.0 / 7.0, 1e-15);
}

TEST(CoreMap, OutsideStripsHasNoImage) {
    Model<double> m(defaults());
    EXPECT_FALSE(m.eval_branch({0.0, 0.0}).has_value());
    EXPECT_FALSE(m.eval_branch({-0.5, 1.5}).has_value());
}

TEST(CoreMap, BranchInverseRoundTripsExactly) {
    Model<Rational> m(defaults());
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> num(-1000, 1000);
    for (int trial = 0; trial < 200; ++trial) {
        int c = trial % 2;
        Rational cx = c == 0 ? Rational(-1, 2) : Rational(1, 2);
        Point<Rational> p{cx + Rational(num(rng), 1000) * m.inv_sigma, Rational(num(rng), 1000)};
        ASSERT_TRUE(m.in_strip(p, c));
        Point<Rational> q = m.branch(p, c);
        EXPECT_TRUE(m.in_image(q, c));
        EXPECT_EQ(m.eval_branch_inverse(q, c), p);
    }
}

TEST(CoreMap, BranchInverseRejectsPointsOffTheImage) {
    Model<double> m(defaults());
    try {
        m.eval_branch_inverse({0.0, 0.0}, 0);
        FAIL() << "expected OutOfImage";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::OutOfImage);
    }
}

TEST(CoreMap, TangencyStepRequiresWindow) {
    Model<double> m(defaults());
    try {
        m.eval_tangency_step({0.3, 0.0});
        FAIL() << "expected OutsideWindow";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::OutsideWindow);
    }
    Point<double> w{0.01, -m.a_s + 0.02};
    Point<double> img = m.eval_tangency_step(w);
    EXPECT_NEAR(img.x, -m.a_u + m.mu - m.beta * 1e-4 + m.gamma * 0.02, 1e-15);
    EXPECT_NEAR(img.y, -m.alpha * 0.01, 1e-15);
}

TEST(CoreMap, TangencyJacobianMatchesFiniteDifferences) {
    Model<double> m(defaults());
    Point<double> p{0.013, -m.a_s + 0.011};
    auto J = m.tangency_jacobian(p);
    const double h = 1e-7;
    auto fx = m.tangency({p.x + h, p.y}), bx = m.tangency({p.x - h, p.y});
    auto fy = m.tangency({p.x, p.y + h}), by = m.tangency({p.x, p.y - h});
    EXPECT_NEAR(J[0], (fx.x - bx.x) / (2 * h), 1e-7);
    EXPECT_NEAR(J[1], (fy.x - by.x) / (2 * h), 1e-7);
    EXPECT_NEAR(J[2], (fx.y - bx.y) / (2 * h), 1e-7);
    EXPECT_NEAR(J[3], (fy.y - by.y) / (2 * h), 1e-7);
}

TEST(CoreMap, ApexInverseUndoesApex) {
    Model<Rational> m(defaults());
    for (int i = -10; i <= 10; ++i) {
        Rational y = Rational(i, 37) - m.a_s;
        EXPECT_EQ(m.apex_inverse(m.apex(y)), y);
    }
}

TEST(Bump, MollifierLimitsAndMonotone) {
    EXPECT_EQ(mollifier(-1.0), 0.0);
    EXPECT_EQ(mollifier(-2.0), 0.0);
    EXPECT_EQ(mollifier(0.0), 1.0);
    EXPECT_NEAR(mollifier(-0.5), 0.5, 1e-15);
    double prev = 0;
    for (int i = 1; i < 100; ++i) {
        double v = mollifier(-1.0 + i / 100.0);
        EXPECT_GE(v, prev);
        prev = v;
    }
}

TEST(Bump, OneOnIntervalZeroBeyondMargin) {
    EXPECT_EQ(eval_bump(0.3, 0.1, 0.0, 1.0), 1.0);
    EXPECT_EQ(eval_bump(1.2, 0.1, 0.0, 1.0), 0.0);
    EXPECT_EQ(eval_bump(-0.11, 0.1, 0.0, 1.0), 0.0);
    double mid = eval_bump(1.05, 0.1, 0.0, 1.0);
    EXPECT_GT(mid, 0.0);
    EXPECT_LT(mid, 1.0);
    EXPECT_THROW(eval_bump(0.0, 0.1, 1.0, 1.0), Error);
}

namespace {

PerturbationEntry<double> entry(double ya, double yb, Point<double> zeta) {
    PerturbationEntry<double> e;
    e.anchor = {0.0, (ya + yb) / 2};
    e.zeta = zeta;
    e.ya = ya;
    e.yb = yb;
    e.x_half = 0.05;
    e.rho = 0.5;
    return e;
}

} // namespace

TEST(Perturbation, TranslatesInsideCoreAndIsIdentityOutside) {
    PerturbationField<double> f({entry(-0.8, -0.7, {1e-3, -2e-3})});
    Point<double> inside{0.01, -0.75};
    Point<double> moved = f(inside);
    EXPECT_NEAR(moved.x, inside.x + 1e-3, 1e-15);
    EXPECT_NEAR(moved.y, inside.y - 2e-3, 1e-15);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto& e = f.entries().front();
    for (int i = 0; i < 2000; ++i) {
        Point<double> p{u(rng), u(rng)};
        if (e.in_support(p)) continue;
        EXPECT_EQ(f(p), p);
    }
}

TEST(Perturbation, OverlappingSupportsRejected) {
    EXPECT_THROW(PerturbationField<double>({entry(-0.8, -0.7, {}), entry(-0.705, -0.6, {})}), Error);
    EXPECT_NO_THROW(PerturbationField<double>({entry(-0.8, -0.7, {}), entry(-0.6, -0.5, {})}));
}

TEST(Orbit, FixedPointOrbitIsConstant) {
    System<Rational> sys{Model<Rational>(defaults()), {}};
    auto orbit = iterate_orbit(sys.model.fixed_point(), 50, sys);
    ASSERT_EQ(orbit.samples.size(), 50u);
    for (const auto& s : orbit.samples) {
        EXPECT_EQ(s.point, sys.model.fixed_point());
        EXPECT_EQ(s.region, Region::S0);
    }
    EXPECT_EQ(orbit.samples.front().tick, 1);
    EXPECT_EQ(orbit.samples.back().tick, 50);
}

TEST(Orbit, PeriodTwoRoundTripsInDouble) {
    Model<double> m(defaults());
    Point<double> p = decode_periodic("01", m);
    auto a = m.eval_branch(p);
    ASSERT_TRUE(a);
    auto b = m.eval_branch(*a);
    ASSERT_TRUE(b);
    EXPECT_LT(distance(*b, p), 1e-12);
}

TEST(Orbit, EscapeIsRecorded) {
    System<double> sys{Model<double>(defaults()), {}};
    auto orbit = iterate_orbit(Point<double>{-0.5, 0.9}, 10, sys);
    ASSERT_FALSE(orbit.samples.empty());
    EXPECT_TRUE(orbit.escaped());
}

TEST(Orbit, TangencyVisitTakesTwoTicks) {
    System<double> sys{Model<double>(defaults()), {}};
    const auto& m = sys.model;
    // One S0 step from here lands in the window.
    Point<double> target{0.01, -m.a_s + 0.01};
    Point<double> start = m.eval_branch_inverse(target, 0);
    auto orbit = iterate_orbit(start, 3, sys);
    ASSERT_GE(orbit.samples.size(), 3u);
    EXPECT_EQ(orbit.samples[0].region, Region::S0);
    EXPECT_EQ(orbit.samples[1].region, Region::TransitTick);
    EXPECT_EQ(orbit.samples[1].tick, 2);
    EXPECT_EQ(orbit.samples[2].region, Region::TangencyWindow);
    EXPECT_EQ(orbit.samples[2].tick, 3);
    Point<double> landing = m.tangency(orbit.samples[0].point);
    EXPECT_LT(distance(orbit.samples[2].point, landing), 1e-15);
}

TEST(Orbit, CsvHasHeaderAndRows) {
    System<double> sys{Model<double>(defaults()), {}};
    auto orbit = iterate_orbit(sys.model.fixed_point(), 3, sys);
    std::ostringstream os;
    write_orbit_csv(os, orbit);
    std::string s = os.str();
    EXPECT_EQ(s.rfind("tick,x,y,region\n", 0), 0u);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 4);
}
