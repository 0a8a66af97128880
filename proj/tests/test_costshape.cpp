/*
 Copyright 2026 The hsnorm Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace hsn;
using hsn::test::rel;
using hsn::test::scalar_norm_power;

// ---------------------------------------------------------------------------
// Series shapes
// ---------------------------------------------------------------------------

TEST(Shape, BuiltinsPassSeriesCheck) {
    EXPECT_NO_THROW(check_shape(risk_sensitive_shape(0.8)));
    EXPECT_NO_THROW(check_shape(power_shape(3)));
    EXPECT_NO_THROW(check_shape(coefficient_shape({0.5, -0.25, 2.0})));
    EXPECT_NEAR(risk_sensitive_shape(0.5).coeff(3), 0.125 / 6.0, 1e-17);
}

TEST(Shape, MismatchedClosedFormIsConsistencyError) {
    CostShape s = risk_sensitive_shape(0.5);
    s.closed_form = [](double z) { return z; };
    try {
        check_shape(s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::consistency);
    }
}

TEST(Shape, ConstructorErrors) {
    EXPECT_THROW((void)risk_sensitive_shape(0.0), Error);
    EXPECT_THROW((void)power_shape(0), Error);
    EXPECT_THROW((void)coefficient_shape({}), Error);
    EXPECT_THROW((void)conjugate_cost_shape(kl_shape()).coeff(1), Error);
}

// ---------------------------------------------------------------------------
// Quadrature and series costs
// ---------------------------------------------------------------------------

TEST(Quadrature, ScalarNorms) {
    const auto rep = hs_norms_quadrature(test::scalar_system(), 6);
    for (int k = 1; k <= 6; ++k) EXPECT_LT(rel(rep.power(k), scalar_norm_power(k)), 1e-9) << k;
}

TEST(Quadrature, ScalarRiskSensitive) {
    // -1/(4pi) int ln(1 - theta/(1+w^2)) dw = (1 - sqrt(1 - theta)) / 2
    for (double theta : {0.2, 0.75, 0.95}) {
        EXPECT_NEAR(risk_sensitive_quadrature(test::scalar_system(), theta).value, 0.5 * (1.0 - std::sqrt(1.0 - theta)), 1e-10);
    }
}

TEST(Quadrature, ZeroSystemAndShapeDomain) {
    EXPECT_EQ(hs_norms_quadrature(test::zero_input_system(), 3).power(3), 0.0);
    try {
        (void)cost_quadrature(test::scalar_system(), risk_sensitive_shape(1.5));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::domain);
    }
}

TEST(SeriesCost, RiskShapeMatchesQuadratureWithinTail) {
    const auto sys = test::oscillatory4_system();
    const auto hb = hinf_norm(sys);
    const auto shape = risk_sensitive_shape(0.6 / (hb.hi * hb.hi));
    const auto norms = hs_norms_riccati(sys, 30);
    const auto series = cost_series(shape, norms, 30, hb);
    const double quad = cost_quadrature(sys, shape).value;
    EXPECT_LE(std::abs(series.value - quad), series.tail_bound + 1e-9 * quad);
    EXPECT_LT(series.tail_bound, 1e-4 * quad);
}

TEST(SeriesCost, PolynomialShapeHasNoTail) {
    const auto sys = test::oscillatory4_system();
    const auto norms = hs_norms_riccati(sys, 3);
    const auto shape = coefficient_shape({1.0, 0.5, 0.25});
    const auto series = cost_series(sys, shape, norms, 3);
    EXPECT_EQ(series.tail_bound, 0.0);
    EXPECT_LT(rel(series.value, cost_quadrature(sys, shape).value), 1e-8);
}

TEST(SeriesCost, RadiusAndMissingOrders) {
    const auto sys = test::scalar_system();
    const auto norms = hs_norms_riccati(sys, 2);
    EXPECT_THROW((void)cost_series(sys, risk_sensitive_shape(1.2), norms, 2), Error);
    EXPECT_THROW((void)cost_series(sys, risk_sensitive_shape(0.5), norms, 3), Error);
}

// ---------------------------------------------------------------------------
// Legendre conjugation
// ---------------------------------------------------------------------------

TEST(Legendre, KlConjugateClosedForm) {
    const auto kl = kl_shape();
    for (int i = 1; i <= 20; ++i) {
        const double z = 0.45 * i / 21.0;
        EXPECT_NEAR(legendre_conjugate(kl, z).value, -0.5 * std::log(1.0 - 2.0 * z), 1e-10) << z;
    }
    for (double z : {-3.0, -0.5, 0.0, 0.49}) {
        const auto pt = legendre_conjugate(kl, z);
        EXPECT_NEAR(pt.argmax, 1.0 / (1.0 - 2.0 * z), 1e-10 * pt.argmax);
        EXPECT_NEAR(pt.curvature, 2.0 * pt.argmax * pt.argmax, 1e-9 * pt.curvature);
    }
}

TEST(Legendre, DoubleConjugateRoundTrip) {
    const auto kl = kl_shape();
    const auto twice = conjugate_shape(conjugate_shape(kl));
    for (double z : {0.3, 0.8, 1.0, 2.5, 6.0}) EXPECT_NEAR(twice.psi(z), kl.psi(z), 1e-8) << z;
    const auto q = quadratic_shape();
    for (double z : {-4.0, 0.0, 1.5}) EXPECT_NEAR(legendre_conjugate(q, z).value, 0.5 * z * z, 1e-12);
}

TEST(Legendre, OutsideDerivativeRange) {
    try {
        (void)legendre_conjugate(kl_shape(), 0.5);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::domain);
    }
    const auto [lo, hi] = derivative_range(kl_shape());
    EXPECT_TRUE(std::isinf(lo));
    EXPECT_NEAR(hi, 0.5, 1e-9);
}

TEST(Legendre, ConcaveShapeRejected) {
    ConvexShape s = quadratic_shape();
    s.d2psi = [](double) { return -1.0; };
    EXPECT_THROW(check_convex(s), Error);
}

TEST(Legendre, ConjugateCostEqualsRiskShape) {
    // psi_* of KL at sigma is -1/2 ln(1 - 2 sigma z): the risk shape with theta = 2 sigma.
    const auto sys = test::oscillatory4_system();
    const auto hb = hinf_norm(sys);
    const double sigma = 0.2 / (hb.hi * hb.hi);
    const double a = cost_quadrature(sys, conjugate_cost_shape(kl_shape(), sigma)).value;
    const double b = risk_sensitive_cost(sys, 2.0 * sigma);
    EXPECT_LT(rel(a, b), 1e-8);
}

// ---------------------------------------------------------------------------
// Worst-case variance bound
// ---------------------------------------------------------------------------

TEST(VarianceBoundTest, ZeroBudgetRecoversH2) {
    for (const auto& sys : {test::scalar_system(), test::oscillatory4_system()}) {
        const auto vb = worst_case_variance_bound(sys, kl_shape(), 0.0);
        ASSERT_TRUE(vb.feasible);
        const double h2sq = std::pow(h2_norm(sys), 2);
        EXPECT_GE(vb.bound, h2sq * (1.0 - 1e-6));
        EXPECT_LE(vb.bound, h2sq * (1.0 + 1e-4));
    }
}

TEST(VarianceBoundTest, GrowsWithBudget) {
    const auto sys = test::scalar_system();
    const auto b0 = worst_case_variance_bound(sys, kl_shape(), 0.0);
    const auto b1 = worst_case_variance_bound(sys, kl_shape(), 0.1);
    EXPECT_GE(b1.bound, b0.bound);
    EXPECT_GT(b1.sigma, b0.sigma);
    EXPECT_THROW((void)worst_case_variance_bound(sys, kl_shape(), -1.0), Error);
}
