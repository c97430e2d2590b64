#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "delaymac/bias.hpp"
#include "support.hpp"

using namespace delaymac;
using testing_support::rel_err;

namespace {
const TechnologyProfile tech{};
}

TEST(WidthTable, PublishedRows) {
    const auto t = bias::width_table(5);
    ASSERT_EQ(t.scaling.size(), 5u);
    EXPECT_EQ(t.source[0].label, "M1");
    EXPECT_EQ(t.source[0].width, 1.0);
    EXPECT_EQ(t.source[1].width, 32.0);
    EXPECT_EQ(t.source[2].width, 320.0);
    EXPECT_EQ(t.source[2].length, 10.0);
    EXPECT_EQ(t.scaling[0][0].label, "M7-9");
    EXPECT_EQ(t.scaling[0][0].width, 10.0);
    EXPECT_EQ(t.scaling[3][2].label, "M11");
    EXPECT_EQ(t.scaling[3][2].width, 8.0);
    EXPECT_EQ(t.scaling[0][1].width, 1.0);
    EXPECT_DOUBLE_EQ(t.scaling[2][1].width, 2.6 * 2.6);
    EXPECT_EQ(t.scaling[4][3].width, 1.0);
}

TEST(WidthTable, TotalOverSupportedRange) {
    for (int n = 1; n <= 8; ++n) {
        const auto t = bias::width_table(n);
        EXPECT_EQ(static_cast<int>(t.scaling.size()), n);
        EXPECT_EQ(t.source[1].width, std::ldexp(1.0, n));
        for (int i = 0; i < n; ++i) EXPECT_EQ(t.scaling[i][0].width, 10.0 * std::ldexp(1.0, i));
    }
    EXPECT_THROW(bias::width_table(0), ValidationError);
    EXPECT_THROW(bias::width_table(9), ValidationError);
}

TEST(SecondaryBias, Widths) {
    EXPECT_EQ(bias::secondary_bias_width(0, 12.0), 12.0);
    EXPECT_DOUBLE_EQ(bias::secondary_bias_width(2, 12.0), 12.0 / 1.69);
    EXPECT_DOUBLE_EQ(bias::secondary_bias_width(2, 12.0, bias::M10Mode::table), 12.0 * 2.6 * 2.6);
    EXPECT_THROW(bias::secondary_bias_width(-1, 1.0), ValidationError);
}

TEST(BranchCurrents, HalvingFromOneMicroamp) {
    const double v_ref = bias::reference_for_current(1e-6, tech);
    const auto i = bias::branch_currents(v_ref, 5, tech);
    const double want[] = {1e-6, 0.5e-6, 0.25e-6, 0.125e-6, 0.0625e-6};
    for (int k = 0; k < 5; ++k) EXPECT_LT(rel_err(i[k], want[k]), 1e-12);
    for (int k = 1; k < 5; ++k) EXPECT_EQ(i[k - 1], 2.0 * i[k]);
}

TEST(BranchCurrents, CeilingIsRegimeError) {
    const double v_ref = bias::reference_for_current(5e-6, tech);
    EXPECT_THROW(bias::branch_currents(v_ref, 5, tech), RegimeError);
    EXPECT_NO_THROW(bias::branch_currents(bias::reference_for_current(2e-6, tech) - 1e-9, 5, tech));
}

TEST(BiasPlan, DrainPinned) {
    const bias::BiasParams p;
    const auto plan = bias::plan(bias::reference_for_current(1e-6, tech), 5, tech);
    ASSERT_EQ(plan.v_b1.size(), 5u);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(plan.v_b2[i] - plan.v_b1[i], 0.100, p.pin_tolerance);
    for (int i = 1; i < 5; ++i) EXPECT_LT(plan.v_b1[i], plan.v_b1[i - 1]);
}

TEST(MirrorError, Values) {
    const auto plan = bias::plan(bias::reference_for_current(1e-6, tech), 1, tech);
    const auto e = bias::mirror_error(plan, {10e6}, {0.010});
    EXPECT_LT(rel_err(e[0], 1e-3), 1e-9);
    const double inf = std::numeric_limits<double>::infinity();
    const auto plan5 = bias::plan(bias::reference_for_current(1e-6, tech), 5, tech);
    for (double x : bias::mirror_error(plan5, std::vector<double>(5, inf), std::vector<double>(5, 0.01)))
        EXPECT_EQ(x, 0.0);
    EXPECT_THROW(bias::mirror_error(plan5, {1e6}, {0.01}), ValidationError);
}
