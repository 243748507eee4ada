#include <gtest/gtest.h>

#include "horseshoe/horseshoe.hpp"

using namespace hs;

namespace {

std::string parse_error(const std::string& text) {
    try {
        parse_config_string(text);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigParse);
        return e.what();
    }
    ADD_FAILURE() << "no error for: " << text;
    return "";
}

} // namespace

TEST(Config, DefaultsWhenEmpty) {
    auto c = parse_config_string("# nothing\n\n");
    EXPECT_EQ(c.options.params.sigma, Rational(5, 2));
    EXPECT_EQ(c.options.K, 3);
    EXPECT_EQ(c.backend, Backend::BigFloat);
    EXPECT_EQ(c.eras, (std::vector<int>{1, 2, 5}));
    EXPECT_EQ(c.target, "001");
    EXPECT_EQ(c.mode, "target");
}

TEST(Config, ParsesEveryKeyKind) {
    auto c = parse_config_string(
        "sigma = 12/5\n"
        "lambda = 0.25   # trailing comment\n"
        "window_halfwidths = [0.04, 1/25]\n"
        "backend = double\n"
        "precision_bits = 512\n"
        "epsilon = 1e-4\n"
        "chain_K = 5\n"
        "translation = 0\n"
        "mode = historic\n"
        "eras = [1, 3, 7]\n"
        "target = 0110\n"
        "samples = 16\n"
        "seed = 99\n");
    const auto& p = c.options.params;
    EXPECT_EQ(p.sigma, Rational(12, 5));
    EXPECT_EQ(p.lambda, Rational(1, 4));
    EXPECT_EQ(p.hx, Rational(1, 25));
    EXPECT_EQ(p.hy, Rational(1, 25));
    EXPECT_EQ(c.backend, Backend::Double);
    EXPECT_EQ(c.precision_bits, 512u);
    EXPECT_EQ(c.options.epsilon, Rational(1, 10000));
    EXPECT_EQ(c.options.K, 5);
    EXPECT_EQ(c.options.translation, 0);
    EXPECT_EQ(c.mode, "historic");
    EXPECT_EQ(c.eras, (std::vector<int>{1, 3, 7}));
    EXPECT_EQ(c.target, "0110");
    EXPECT_EQ(c.samples, 16u);
    EXPECT_EQ(c.seed, 99u);
}

TEST(Config, BackendNames) {
    EXPECT_EQ(parse_backend("rational"), Backend::Rational);
    EXPECT_EQ(parse_backend("double"), Backend::Double);
    EXPECT_EQ(parse_backend("mpfr-like"), Backend::BigFloat);
    EXPECT_THROW(parse_backend("float"), Error);
}

TEST(Config, ErrorsCarryTheLineNumber) {
    std::string msg = parse_error("sigma = 5/2\nfoo = 1\n");
    EXPECT_NE(msg.find("line 2"), std::string::npos);
    EXPECT_NE(msg.find("foo"), std::string::npos);
    EXPECT_EQ(msg.find("ConfigParse: ConfigParse"), std::string::npos);
    EXPECT_NE(parse_error("chain_K = three\n").find("line 1"), std::string::npos);
    EXPECT_NE(parse_error("\n\njust words\n").find("line 3"), std::string::npos);
}

TEST(Config, RejectsMalformedValues) {
    parse_error("sigma = five\n");
    parse_error("window_halfwidths = [0.1]\n");
    parse_error("mode = chaotic\n");
    parse_error("target = 0120\n");
    parse_error("precision_bits = -3\n");
}

TEST(Config, ValidationRanges) {
    parse_error("chain_K = 1\n");
    parse_error("depth = 0\n");
    parse_error("depth = 25\n");
    parse_error("rho = 1\n");
    parse_error("eta = 0\n");
    parse_error("eras = [2, 2, 5]\n");
    parse_error("samples = 0\n");
    EXPECT_NO_THROW(parse_config_string("depth = 24\nrho = 1/2\n"));
}

TEST(Config, MissingFile) {
    try {
        load_config("/nonexistent/horseshoe.cfg");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigParse);
    }
}
