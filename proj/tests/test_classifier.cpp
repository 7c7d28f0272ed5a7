#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "stablelike/classifier.hpp"

using namespace stablelike;
using namespace stablelike::classifier;
using coeffs::make_triple;

namespace {

coeffs::SymbolTriple validated(const std::string& a, const std::string& b, const std::string& g) {
    auto t = make_triple(a, b, g);
    coeffs::require_valid(t);
    return t;
}

bool has_caveat(const Verdict& v, const std::string& prefix) {
    return std::any_of(v.caveats.begin(), v.caveats.end(),
                       [&](const std::string& c) { return c.rfind(prefix, 0) == 0; });
}

const ConditionEvidence* find(const Verdict& v, const std::string& id) {
    for (const auto& c : v.conditions)
        if (c.id == id) return &c;
    return nullptr;
}

} // namespace

TEST(Limits, ConstantFunction) {
    const auto e = estimate_limsup([](double) { return 2.5; }, GridSpec{});
    EXPECT_EQ(e.value, 2.5);
    EXPECT_NEAR(e.trend, 0.0, 1e-15);
    EXPECT_EQ(e.xs.size(), 12u);
    EXPECT_EQ(e.neg.size(), 12u);
}

TEST(Limits, DecayingFunction) {
    const auto e = estimate_limsup([](double x) { return 1.0 / std::fabs(x); }, GridSpec{});
    // tail max sits at the first tail point, 10 * 2^6
    EXPECT_DOUBLE_EQ(e.value, 1.0 / 640.0);
    EXPECT_LT(e.trend, 0.0);
    EXPECT_TRUE(e.monotone);
}

TEST(Limits, OscillationIsFlagged) {
    const auto e = estimate_limsup([](double x) { return std::sin(std::log(std::fabs(x))); }, GridSpec{});
    EXPECT_GT(std::fabs(e.trend), 1e-3);
    EXPECT_FALSE(e.monotone);
}

TEST(Limits, TailAndSides) {
    GridSpec g;
    g.count = 7;
    EXPECT_EQ(g.tail_size(), 4u);
    // limsup takes the larger side, liminf the smaller
    auto f = [](double x) { return x > 0 ? 1.0 : -1.0; };
    EXPECT_EQ(estimate_limsup(f, g).value, 1.0);
    EXPECT_EQ(estimate_liminf(f, g).value, -1.0);
    g.two_sided = false;
    EXPECT_EQ(estimate_liminf(f, g).value, 1.0);
    EXPECT_TRUE(estimate_liminf(f, g).neg.empty());
    GridSpec bad;
    bad.count = 3;
    EXPECT_THROW(bad.check(), PreconditionError);
    bad = GridSpec{};
    bad.ratio = 1.0;
    EXPECT_THROW(bad.check(), PreconditionError);
}

TEST(Classify, SpecExamples) {
    const auto r = classify(validated("1.5", "0", "1"));
    EXPECT_EQ(r.label, Label::Recurrent);
    EXPECT_NEAR(r.margin, M_PI, 1e-12);
    const auto t = classify(validated("0.5", "0", "1"));
    EXPECT_EQ(t.label, Label::Transient);
    EXPECT_NEAR(t.margin, M_PI, 1e-12);
    EXPECT_EQ(t.fired, "1.3");
    const auto b = classify(validated("1", "0", "1"));
    EXPECT_EQ(b.label, Label::Inconclusive);
    EXPECT_TRUE(has_caveat(b, "alpha_equals_one_boundary"));
    const auto e = classify(validated("1.8", "-tanh(x)", "1"));
    EXPECT_EQ(e.label, Label::Ergodic);
    EXPECT_EQ(e.fired, "1.4");
    EXPECT_GT(e.margin, 1e3);
}

TEST(Classify, TwoValuedStabilityIndexIsInconclusive) {
    const auto v = classify(validated("piece(0, 0.8, 1.4, 1)", "0", "1"));
    EXPECT_EQ(v.label, Label::Inconclusive);
    EXPECT_TRUE(has_caveat(v, "two_valued_stability_index:left=0.8,right=1.4"));
    EXPECT_TRUE(has_caveat(v, "liminf_alpha_below_one"));
    EXPECT_TRUE(has_caveat(v, "tails_disagree"));
}

TEST(Classify, MatchesClosedFormOnConstantSymbols) {
    for (double a : {0.3, 0.5, 0.9, 1.1, 1.5, 1.9}) {
        const auto v = classify(validated(expr::detail::format_number(a), "0", "1"));
        EXPECT_EQ(v.label, constant_symbol_label(a, 1.0)) << a;
        EXPECT_GE(std::fabs(v.margin), v.config.margin_tol);
    }
}

TEST(Classify, ConstantSymbolShortcut) {
    EXPECT_EQ(constant_symbol_label(1.3, 2.0), Label::Recurrent);
    EXPECT_EQ(constant_symbol_label(0.7, 0.1), Label::Transient);
    EXPECT_THROW(constant_symbol_label(1.0, 1.0), DomainError);
    EXPECT_THROW(constant_symbol_label(2.0, 1.0), DomainError);
    EXPECT_THROW(constant_symbol_label(1.5, 0.0), DomainError);
}

TEST(Classify, RecurrentAndTransientAreExclusive) {
    const char* alphas[] = {"1.5", "0.5", "1.2", "0.8 + 0.1*sin(x)", "1.3 + 0.2*tanh(x)", "piece(0, 0.8, 1.4, 1)",
                            "1.8", "1"};
    const char* betas[] = {"0", "0.5", "-0.5", "-tanh(x)", "2"};
    for (const char* a : alphas)
        for (const char* b : betas) {
            const auto v = classify(validated(a, b, "1"));
            const auto* c12 = find(v, "1.2");
            const auto* c13 = find(v, "1.3");
            const bool rec = c12 && c12->certified;
            const bool tra = c13 && c13->certified;
            EXPECT_FALSE(rec && tra) << a << " | " << b;
            if (v.label != Label::Inconclusive) {
                EXPECT_GE(std::fabs(v.margin), v.config.margin_tol);
            }
        }
}

TEST(Classify, ErgodicImpliesRecurrentCondition) {
    for (const char* b : {"-tanh(x)", "-sgn(x)", "-0.5*tanh(x/3)"})
        for (const char* a : {"1.8", "1.5", "1.6 + 0.1*cos(x)"}) {
            const auto v = classify(validated(a, b, "1"));
            if (v.label != Label::Ergodic) continue;
            const auto* c12 = find(v, "1.2");
            ASSERT_NE(c12, nullptr) << a << " | " << b;
            EXPECT_TRUE(c12->certified) << a << " | " << b;
            EXPECT_FALSE(v.theta_trace.empty());
        }
    const auto v = classify(validated("1.8", "-tanh(x)", "1"));
    ASSERT_EQ(v.label, Label::Ergodic);
    EXPECT_TRUE(find(v, "1.2")->certified);
    for (const auto& tr : v.theta_trace) {
        EXPECT_GT(tr.theta, 1.0);
        EXPECT_LT(tr.theta, 1.8);
    }
}

TEST(Classify, GammaScalingInvariance) {
    const char* alphas[] = {"1.5", "0.5", "1.4 + 0.3*tanh(x^2/50)", "0.7 + 0.1*cos(x)", "1.9"};
    for (const char* a : alphas) {
        const auto v1 = classify(validated(a, "0", "1"));
        for (const char* g : {"0.1", "3", "1 + 0.5*cos(x)"}) {
            const auto v2 = classify(validated(a, "0", g));
            EXPECT_EQ(v1.label, v2.label) << a << " gamma=" << g;
            EXPECT_NEAR(v1.margin, v2.margin, 1e-12) << a << " gamma=" << g;
        }
    }
}

TEST(Classify, Deterministic) {
    auto t = validated("1.4 + 0.3*tanh(x^2/50)", "-0.3*tanh(x)", "1 + 0.5*cos(x)");
    const auto a = classify(t), b = classify(t);
    EXPECT_EQ(a.label, b.label);
    EXPECT_EQ(a.margin, b.margin);
    EXPECT_EQ(a.caveats, b.caveats);
    ASSERT_EQ(a.conditions.size(), b.conditions.size());
    for (std::size_t i = 0; i < a.conditions.size(); ++i) {
        EXPECT_EQ(a.conditions[i].estimate.combined, b.conditions[i].estimate.combined);
        EXPECT_EQ(a.conditions[i].estimate.trend, b.conditions[i].estimate.trend);
    }
}

TEST(Classify, OneSidedGridResolvesAsymmetricDrift) {
    auto t = validated("1.2", "2", "0.5");
    const auto two = classify(t);
    EXPECT_EQ(two.label, Label::Inconclusive);
    EXPECT_TRUE(has_caveat(two, "tails_disagree"));
    ClassifyConfig cfg;
    cfg.grid.two_sided = false;
    const auto one = classify(t, cfg);
    EXPECT_EQ(one.label, Label::Transient);
    EXPECT_GT(one.margin, 50.0);
    EXPECT_TRUE(has_caveat(one, "one_sided_grid"));
}

TEST(Classify, OscillatingStabilityIndexFlagsTrend) {
    // alpha wanders slowly on the log scale; no stable tail
    const auto v = classify(validated("1.0 + 0.5*sin(ln(1 + abs(x)))", "0", "1"));
    EXPECT_EQ(v.label, Label::Inconclusive);
}

TEST(Classify, RequiresValidatedTriple) {
    auto t = make_triple("1.5", "0", "1");
    EXPECT_THROW(classify(t), PreconditionError);
}

TEST(FErgodic, SpecExamples) {
    auto e = validated("1.8", "-tanh(x)", "1");
    const auto v = classify_f_ergodic(e, 0.2);
    EXPECT_EQ(v.label, Label::FErgodic);
    EXPECT_EQ(v.fired, "2.2");
    ASSERT_TRUE(v.eta.has_value());
    EXPECT_EQ(*v.eta, 0.2);
    for (const auto& tr : v.theta_trace) {
        EXPECT_GE(tr.theta, 1.0);
        EXPECT_LT(tr.theta, 1.8);
    }
    const auto r = classify_f_ergodic(validated("1.5", "0", "1"), 0.2);
    EXPECT_EQ(r.label, Label::Inconclusive);
    EXPECT_TRUE(has_caveat(r, "base_verdict_not_ergodic"));
    EXPECT_THROW(classify_f_ergodic(e, 2.0), PreconditionError);
    EXPECT_THROW(classify_f_ergodic(e, 0.0), PreconditionError);
    EXPECT_THROW(classify_f_ergodic(validated("0.9", "0", "1"), 0.2), PreconditionError);
}

TEST(FErgodic, LargeEtaLeavesTooFewThetas) {
    auto e = validated("1.8", "-tanh(x)", "1");
    // theta must lie in [eta, 1.8); the grid 1.8(1 - 2^-j) barely reaches above 1.78
    const auto v = classify_f_ergodic(e, 1.79);
    EXPECT_EQ(v.label, Label::Inconclusive);
}

TEST(Expressions, RecurrenceExpressionPointwise) {
    auto t = validated("1.2", "0.5", "1");
    const double c = coeffs::jump_intensity(1.2, 1.0);
    for (double x : {-100.0, 100.0}) {
        const double expect = (x > 0 ? 1.0 : -1.0) * 1.2 / c * std::pow(100.0, 0.2) * 0.5 + specfun::pi_cot_half(1.2);
        EXPECT_NEAR(recurrence_expression(t, x), expect, 1e-12);
    }
    EXPECT_NEAR(recurrence_expression(t, 100.0), 3.4977009706963036, 1e-12);
}
