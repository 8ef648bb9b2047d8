#include "eqr/common/error.hpp"
#include "eqr/metrics/metrics.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace eqr;
using namespace eqr::metrics;
using eqr::ingestion::CompanyFinancials;
using eqr::ingestion::FinancialPeriod;

namespace {

CompanyFinancials two_year_company() {
    CompanyFinancials fin;
    fin.ticker = "TST";
    fin.periods.push_back(FinancialPeriod{"FY2022", 100, 60, 15, {}, {}, {}, {}, {}, {}});
    fin.periods.push_back(FinancialPeriod{"FY2023", 110, 65, 16, {}, {}, {}, {}, {}, {}});
    return fin;
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an eqr::Error";
    return ErrorCode::ConfigError;
}

}  // namespace

TEST(Formulas, RevenueGrowth) {
    EXPECT_DOUBLE_EQ(revenue_growth(100, 100), 0.0);
    EXPECT_DOUBLE_EQ(revenue_growth(110, 100), 0.10);
    EXPECT_DOUBLE_EQ(revenue_growth(90, 100), -0.10);
    EXPECT_EQ(code_of([] { revenue_growth(10, 0); }), ErrorCode::DivisionByZero);
    EXPECT_EQ(code_of([] { revenue_growth(10, -5); }), ErrorCode::NegativePrevious);
}

TEST(Formulas, ProjectionsAreAdditivePoints) {
    EXPECT_DOUBLE_EQ(revenue_growth_projection(0.0), 0.01);
    EXPECT_DOUBLE_EQ(revenue_growth_projection(0.10), 0.11);
    EXPECT_DOUBLE_EQ(revenue_growth_projection(-0.05), -0.04);
    EXPECT_DOUBLE_EQ(contribution_margin_projection(0.0), 0.005);
    EXPECT_DOUBLE_EQ(contribution_margin_projection(0.40), 0.405);
    EXPECT_DOUBLE_EQ(contribution_margin_projection(0.995), 1.000);
}

TEST(Formulas, ContributionAndEbitda) {
    EXPECT_EQ(contribution_profit(100, 100), 0);
    EXPECT_EQ(contribution_profit(100, 60), 40);
    EXPECT_EQ(contribution_profit(50, 60), -10);
    EXPECT_EQ(ebitda(40, 40), 0);
    EXPECT_EQ(ebitda(40, 15), 25);
    EXPECT_EQ(ebitda(10, 15), -5);
}

TEST(Formulas, Margins) {
    EXPECT_EQ(contribution_margin(0, 100), 0.0);
    EXPECT_DOUBLE_EQ(contribution_margin(40, 100), 0.40);
    EXPECT_EQ(code_of([] { contribution_margin(40, 0); }), ErrorCode::DivisionByZero);
    EXPECT_EQ(sga_margin(0, 100), 0.0);
    EXPECT_DOUBLE_EQ(sga_margin(15, 100), 0.15);
    EXPECT_EQ(code_of([] { sga_margin(15, 0); }), ErrorCode::DivisionByZero);
    EXPECT_EQ(ebitda_margin(0, 100), 0.0);
    EXPECT_DOUBLE_EQ(ebitda_margin(25, 100), 0.25);
    EXPECT_EQ(code_of([] { ebitda_margin(25, 0); }), ErrorCode::DivisionByZero);
}

TEST(Formulas, Cagr) {
    EXPECT_EQ(cagr(100, 100, 5), 0.0);
    EXPECT_EQ(cagr(121, 100, 2), 10.0);
    // 2^(1/3) by bisection, computed offline: 25.992104989487295
    // 100 * (2^(1/3) - 1) = 25.9921049894873164767...
    EXPECT_TRUE(eqr::testing::close_rel(cagr(200, 100, 3), 25.992104989487316, 1e-14));
    EXPECT_EQ(code_of([] { cagr(0, 100, 2); }), ErrorCode::NonPositiveInput);
    EXPECT_EQ(code_of([] { cagr(100, -1, 2); }), ErrorCode::NonPositiveInput);
    EXPECT_EQ(code_of([] { cagr(100, 100, 0); }), ErrorCode::ZeroYears);
}

TEST(Formulas, EnterpriseMultiple) {
    EXPECT_EQ(enterprise_multiple(500, 500).value, 1.0);
    EXPECT_FALSE(enterprise_multiple(500, 500).not_meaningful);
    EXPECT_EQ(enterprise_multiple(500, 50).value, 10.0);
    const auto nm = enterprise_multiple(500, -50);
    EXPECT_EQ(nm.value, -10.0);
    EXPECT_TRUE(nm.not_meaningful);
    EXPECT_EQ(code_of([] { enterprise_multiple(500, 0); }), ErrorCode::DivisionByZero);
}

TEST(MetricTable, SinglePeriodHasNoGrowthOrProjections) {
    CompanyFinancials fin;
    fin.ticker = "ONE";
    fin.periods.push_back(FinancialPeriod{"FY2023", 100, 60, 15, {}, {}, {}, {}, {}, {}});
    const MetricTable t = build_metric_table(fin);
    EXPECT_NE(t.find(MetricName::ContributionProfit, "FY2023"), nullptr);
    EXPECT_NE(t.find(MetricName::ContributionMargin, "FY2023"), nullptr);
    EXPECT_NE(t.find(MetricName::SgaMargin, "FY2023"), nullptr);
    EXPECT_NE(t.find(MetricName::Ebitda, "FY2023"), nullptr);
    EXPECT_NE(t.find(MetricName::EbitdaMargin, "FY2023"), nullptr);
    EXPECT_EQ(t.find(MetricName::RevenueGrowth, "FY2023"), nullptr);
    EXPECT_TRUE(t.projections.empty());
    EXPECT_TRUE(t.projection_basis.empty());
}

TEST(MetricTable, TwoPeriodHandOracle) {
    const MetricTable t = build_metric_table(two_year_company());
    // Hand-computed: growth 10/100, CP 45, EBITDA 45-16 = 29, projections +1pt and +0.5pt.
    EXPECT_DOUBLE_EQ(t.find(MetricName::RevenueGrowth, "FY2023")->value, 0.10);
    EXPECT_EQ(t.find(MetricName::ContributionProfit, "FY2023")->value, 45);
    EXPECT_EQ(t.find(MetricName::Ebitda, "FY2023")->value, 29);
    EXPECT_DOUBLE_EQ(t.find(MetricName::EbitdaMargin, "FY2023")->value, 29.0 / 110.0);
    EXPECT_DOUBLE_EQ(t.find(MetricName::ContributionMargin, "FY2023")->value, 45.0 / 110.0);
    EXPECT_DOUBLE_EQ(t.find(MetricName::SgaMargin, "FY2023")->value, 16.0 / 110.0);
    EXPECT_DOUBLE_EQ(t.projection(MetricName::RevenueGrowthProjection)->value, 0.11);
    EXPECT_DOUBLE_EQ(t.projection(MetricName::ContributionMarginProjection)->value, 45.0 / 110.0 + 0.005);
    EXPECT_EQ(t.projection(MetricName::RevenueGrowthProjection)->period, "FY2024E");
    EXPECT_EQ(t.projection_basis, "FY2023");
    EXPECT_NEAR(t.find(MetricName::Cagr, "FY2023")->value, 10.0, 1e-9);
}

TEST(MetricTable, ZeroRevenuePeriodOmitsMargins) {
    CompanyFinancials fin = two_year_company();
    fin.periods.insert(fin.periods.begin(), FinancialPeriod{"FY2021", 0, 5, 1, {}, {}, {}, {}, {}, {}});
    const MetricTable t = build_metric_table(fin);
    EXPECT_EQ(t.find(MetricName::ContributionMargin, "FY2021"), nullptr);
    EXPECT_EQ(t.find(MetricName::EbitdaMargin, "FY2021"), nullptr);
    EXPECT_EQ(t.find(MetricName::SgaMargin, "FY2021"), nullptr);
    EXPECT_NE(t.find(MetricName::Ebitda, "FY2021"), nullptr);
    // growth into FY2022 needs positive previous revenue
    EXPECT_EQ(t.find(MetricName::RevenueGrowth, "FY2022"), nullptr);
    EXPECT_NE(t.find(MetricName::RevenueGrowth, "FY2023"), nullptr);
    // CAGR needs a positive beginning value
    EXPECT_EQ(t.find(MetricName::Cagr, "FY2023"), nullptr);
}

TEST(MetricTable, SerializationGolden) {
    const std::string expected =
        "metric,period,value,unit\n"
        "revenue_growth,FY2023,0.100000,fraction\n"
        "revenue_growth_projection,FY2024E,0.110000,fraction\n"
        "contribution_profit,FY2022,40,currency\n"
        "contribution_profit,FY2023,45,currency\n"
        "contribution_margin,FY2022,0.400000,fraction\n"
        "contribution_margin,FY2023,0.409091,fraction\n"
        "contribution_margin_projection,FY2024E,0.414091,fraction\n"
        "sga_margin,FY2022,0.150000,fraction\n"
        "sga_margin,FY2023,0.145455,fraction\n"
        "ebitda,FY2022,25,currency\n"
        "ebitda,FY2023,29,currency\n"
        "ebitda_margin,FY2022,0.250000,fraction\n"
        "ebitda_margin,FY2023,0.263636,fraction\n"
        "cagr,FY2023,10.0000,percent\n";
    EXPECT_EQ(serialize(build_metric_table(two_year_company())), expected);
}

TEST(MetricTable, CurrencyFormatting) {
    EXPECT_EQ(format_value(20426000000.0, Unit::Currency), "20426000000");
    EXPECT_EQ(format_value(12.345, Unit::Currency), "12.35");
    EXPECT_EQ(format_value(-0.0, Unit::Currency), "0");
    EXPECT_EQ(format_value(-0.0, Unit::Fraction), "0.00000");
}

// ---- property suites -------------------------------------------------------

namespace {

CompanyFinancials random_company(std::mt19937_64& rng, int periods, double scale = 1.0) {
    std::uniform_real_distribution<double> rev(1e6, 5e10);
    std::uniform_real_distribution<double> share(0.0, 0.9);
    CompanyFinancials fin;
    fin.ticker = "RND";
    for (int i = 0; i < periods; ++i) {
        const double r = rev(rng);
        FinancialPeriod p;
        p.period = "FY" + std::to_string(2010 + i);
        p.revenue = r * scale;
        p.operating_expense = r * share(rng) * scale;
        p.sga = r * share(rng) * 0.3 * scale;
        fin.periods.push_back(p);
    }
    return fin;
}

}  // namespace

TEST(MetricProperties, EbitdaCompositionIdentity) {
    std::mt19937_64 rng(7);
    for (int n = 0; n < 500; ++n) {
        const auto fin = random_company(rng, 3);
        const auto t = build_metric_table(fin);
        for (const auto& p : fin.periods) {
            const double direct = p.revenue - p.operating_expense - p.sga;
            EXPECT_TRUE(eqr::testing::close_rel(t.find(MetricName::Ebitda, p.period)->value, direct, 1e-12));
        }
    }
}

TEST(MetricProperties, ScaleInvariance) {
    std::uniform_real_distribution<double> scale_dist(1e-3, 1e3);
    for (int n = 0; n < 300; ++n) {
        std::mt19937_64 rng_a(n), rng_b(n);
        std::mt19937_64 rng_c(1000 + n);
        const double c = scale_dist(rng_c);
        const auto base = build_metric_table(random_company(rng_a, 4));
        const auto scaled = build_metric_table(random_company(rng_b, 4, c));
        ASSERT_EQ(base.rows.size(), scaled.rows.size());
        for (const auto& [key, v] : base.rows) {
            const auto* s = scaled.find(key.first, key.second);
            ASSERT_NE(s, nullptr);
            if (v.unit == Unit::Currency) {
                EXPECT_TRUE(eqr::testing::close_rel(s->value, v.value * c, 1e-12));
            } else {
                EXPECT_TRUE(eqr::testing::close_rel(s->value, v.value, 1e-12))
                    << to_string(key.first) << " " << s->value << " vs " << v.value;
            }
        }
    }
}

TEST(MetricProperties, CagrIdentityAndInverse) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> value(1e-3, 1e9);
    std::uniform_int_distribution<int> years(1, 30);
    for (int n = 0; n < 1000; ++n) {
        const double x = value(rng);
        const int y = years(rng);
        EXPECT_EQ(cagr(x, x, y), 0.0);
        const double end = value(rng);
        const double rate = cagr(end, x, y);
        EXPECT_TRUE(eqr::testing::close_rel(x * std::pow(1.0 + rate / 100.0, y), end, 1e-9));
    }
}

TEST(MetricProperties, ProjectionsDependOnlyOnLatestPeriod) {
    std::mt19937_64 rng(3);
    for (int n = 0; n < 200; ++n) {
        auto fin = random_company(rng, 5);
        const auto before = build_metric_table(fin);
        // rewrite history before the last two periods
        fin.periods[0].revenue *= 3.0;
        fin.periods[1].operating_expense *= 0.5;
        fin.periods[2].sga *= 2.0;
        const auto after = build_metric_table(fin);
        EXPECT_EQ(before.projections, after.projections);
    }
}

TEST(MetricProperties, BuildIsDeterministic) {
    std::mt19937_64 rng(5);
    const auto fin = random_company(rng, 6);
    EXPECT_EQ(serialize(build_metric_table(fin)), serialize(build_metric_table(fin)));
}
