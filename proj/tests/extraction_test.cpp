#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hvrb/degradation.hpp"
#include "hvrb/extraction.hpp"

namespace {

using hvrb::RdsSample;

TEST(PredictAvgVin, Examples) {
    EXPECT_NEAR(hvrb::predict_avg_vin(0.4, 3.39, 0.7, 60.0, 2.0), 9.9492, 1e-12);
    EXPECT_NEAR(hvrb::predict_avg_vin(0.4, 3.39, 0.7, 60.0), 0.4 * 3.39 * 0.7 + 9.0, 1e-12);
    EXPECT_EQ(hvrb::predict_avg_vin(0.4, 3.39, 1.0, 60.0), 0.4 * 3.39);
    EXPECT_EQ(hvrb::predict_avg_vin(0.4, 3.39, 0.0, 60.0), 30.0);
}

TEST(PredictAvgVin, Errors) {
    EXPECT_THROW((void)hvrb::predict_avg_vin(std::nan(""), 3.3, 0.7, 60.0), hvrb::Error);
    EXPECT_THROW((void)hvrb::predict_avg_vin(0.4, INFINITY, 0.7, 60.0), hvrb::Error);
    EXPECT_THROW((void)hvrb::predict_avg_vin(0.4, 3.3, 1.2, 60.0), hvrb::Error);
    EXPECT_THROW((void)hvrb::predict_avg_vin(0.4, 3.3, 0.7, 60.0, 0.0), hvrb::Error);
}

TEST(ExtractRdsOn, WorkedExample) {
    const auto r = hvrb::extract_rds_on(9.95, 60.0, 0.7, 0.4, 2.0);
    EXPECT_NEAR(r.rds_on, 3.39, 0.005);
    EXPECT_NEAR(r.rds_on, 0.95 / 0.28, 1e-12);
    EXPECT_TRUE(r.physical);
}

TEST(ExtractRdsOn, ZeroNumerator) {
    const auto r = hvrb::extract_rds_on(60.0 * 0.3 / 2.0, 60.0, 0.7, 0.4);
    EXPECT_NEAR(r.rds_on, 0.0, 1e-12);
    EXPECT_FALSE(r.physical);
}

TEST(ExtractRdsOn, NegativeIsFlaggedNotClamped) {
    const auto r = hvrb::extract_rds_on(5.0, 60.0, 0.7, 0.4);
    EXPECT_LT(r.rds_on, 0.0);
    EXPECT_NEAR(r.rds_on, (5.0 - 9.0) / 0.28, 1e-12);
    EXPECT_FALSE(r.physical);
}

TEST(ExtractRdsOn, Errors) {
    auto kind_of = [](auto&& fn) {
        try {
            fn();
        } catch (const hvrb::Error& e) {
            return e.kind();
        }
        ADD_FAILURE() << "no error";
        return hvrb::ErrorKind::io;
    };
    EXPECT_EQ(kind_of([] { (void)hvrb::extract_rds_on(9.95, 60.0, 0.7, 0.0); }), hvrb::ErrorKind::domain);
    EXPECT_EQ(kind_of([] { (void)hvrb::extract_rds_on(9.95, 60.0, 0.0, 0.4); }), hvrb::ErrorKind::domain);
    EXPECT_EQ(kind_of([] { (void)hvrb::extract_rds_on(9.95, 60.0, 0.7, -0.4); }), hvrb::ErrorKind::invalid_parameter);
    EXPECT_EQ(kind_of([] { (void)hvrb::extract_rds_on(9.95, 60.0, 1.5, 0.4); }), hvrb::ErrorKind::invalid_parameter);
    EXPECT_EQ(kind_of([] { (void)hvrb::extract_rds_on(NAN, 60.0, 0.7, 0.4); }), hvrb::ErrorKind::invalid_parameter);
}

TEST(ExtractRdsOn, RoundTripsPrediction) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> current(0.01, 2.0);
    std::uniform_real_distribution<double> resistance(0.01, 50.0);
    std::uniform_real_distribution<double> duty(0.05, 1.0);
    std::uniform_real_distribution<double> vmax(1.0, 200.0);
    std::uniform_real_distribution<double> shape(1.0, 3.0);
    for (int k = 0; k < 2000; ++k) {
        const double i = current(rng);
        const double r = resistance(rng);
        const double d = duty(rng);
        const double v = vmax(rng);
        const double sf = k % 2 == 0 ? 2.0 : shape(rng);
        const double back = hvrb::extract_rds_on(hvrb::predict_avg_vin(i, r, d, v, sf), v, d, i, sf).rds_on;
        ASSERT_LE(std::abs(back - r) / r, 1e-9) << i << " " << r << " " << d << " " << v << " " << sf;
    }
}

TEST(NormalizeSeries, Examples) {
    const auto n = hvrb::normalize_series({{1.0, 3.39}, {10.0, 3.56}});
    ASSERT_EQ(n.size(), 2u);
    EXPECT_EQ(n[0].rds_on, 1.0);
    EXPECT_EQ(n[0].t, 1.0);
    EXPECT_NEAR(n[1].rds_on, 1.0501474926, 1e-9);

    const auto single = hvrb::normalize_series({{5.0, 2.0}});
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single[0].rds_on, 1.0);

    for (const auto& s : hvrb::normalize_series({{1, 3.3}, {2, 3.3}, {3, 3.3}})) EXPECT_EQ(s.rds_on, 1.0);
}

TEST(NormalizeSeries, Errors) {
    try {
        (void)hvrb::normalize_series({});
        ADD_FAILURE();
    } catch (const hvrb::Error& e) {
        EXPECT_EQ(e.kind(), hvrb::ErrorKind::insufficient_data);
    }
    EXPECT_THROW((void)hvrb::normalize_series({{1.0, 0.0}, {2.0, 1.0}}), hvrb::Error);
}

TEST(NormalizeSeries, PreservesRatios) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.5, 10.0);
    std::vector<RdsSample> in;
    for (int k = 0; k < 50; ++k) in.push_back({static_cast<double>(k), u(rng)});
    const auto out = hvrb::normalize_series(in);
    for (std::size_t i = 0; i < in.size(); ++i) {
        for (std::size_t j = 0; j < in.size(); j += 7) {
            EXPECT_NEAR(out[i].rds_on / out[j].rds_on, in[i].rds_on / in[j].rds_on,
                        1e-14 * in[i].rds_on / in[j].rds_on);
        }
    }
}

TEST(FitLogTime, ExactLinearData) {
    std::vector<RdsSample> s;
    for (double t : {1.0, 10.0, 100.0}) s.push_back({t, 2.0 + 0.5 * std::log(t)});
    const auto f = hvrb::fit_log_time(s);
    EXPECT_NEAR(f.slope, 0.5, 1e-14);
    EXPECT_NEAR(f.intercept, 2.0, 1e-14);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-14);
    EXPECT_EQ(f.n, 3u);
    EXPECT_NEAR(f.slope_log10(), 0.5 * std::log(10.0), 1e-14);
}

TEST(FitLogTime, ConstantSeriesHasZeroSlopeAndZeroRSquared) {
    const auto f = hvrb::fit_log_time({{1, 3.3}, {10, 3.3}, {100, 3.3}});
    EXPECT_EQ(f.slope, 0.0);
    EXPECT_EQ(f.r_squared, 0.0);
    EXPECT_NEAR(f.intercept, 3.3, 1e-15);
}

TEST(FitLogTime, DropsZeroTimeSamples) {
    const auto f = hvrb::fit_log_time({{0, 100.0}, {1, 2.0}, {std::exp(1.0), 3.0}});
    EXPECT_EQ(f.dropped, 1u);
    EXPECT_EQ(f.n, 2u);
    EXPECT_NEAR(f.slope, 1.0, 1e-12);
}

TEST(FitLogTime, Errors) {
    auto kind_of = [](const std::vector<RdsSample>& s) {
        try {
            (void)hvrb::fit_log_time(s);
        } catch (const hvrb::Error& e) {
            return e.kind();
        }
        ADD_FAILURE() << "no error";
        return hvrb::ErrorKind::io;
    };
    EXPECT_EQ(kind_of({{5, 1.0}, {5, 2.0}, {5, 3.0}}), hvrb::ErrorKind::degenerate_regression);
    EXPECT_EQ(kind_of({{5, 1.0}}), hvrb::ErrorKind::insufficient_data);
    EXPECT_EQ(kind_of({{0, 1.0}, {3, 2.0}}), hvrb::ErrorKind::insufficient_data);
    EXPECT_EQ(kind_of({{-1, 1.0}, {3, 2.0}, {4, 2.0}}), hvrb::ErrorKind::invalid_parameter);
}

TEST(FitLogTime, TimeRescalingOnlyShiftsIntercept) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> noise(-0.01, 0.01);
    std::vector<RdsSample> s;
    for (double t = 1.0; t <= 1000.0; t *= 1.5) s.push_back({t, 3.3 + 0.02 * std::log(t) + noise(rng)});
    const auto base = hvrb::fit_log_time(s);
    for (double c : {0.01, 0.5, 7.0, 1e4}) {
        auto scaled = s;
        for (auto& x : scaled) x.t *= c;
        const auto f = hvrb::fit_log_time(scaled);
        EXPECT_NEAR(f.slope, base.slope, 1e-10);
        EXPECT_NEAR(f.r_squared, base.r_squared, 1e-10);
        EXPECT_NEAR(f.intercept, base.intercept - base.slope * std::log(c), 1e-9);
    }
}

TEST(FitLogTime, SyntheticDegradationFollowsLogLaw) {
    const hvrb::DegradationParams p;
    const double nominal = 3.3;
    const double s = hvrb::stress_slope(p, 100.0, 298.15);
    std::vector<RdsSample> samples;
    for (int k = 0; k <= 40; ++k) {
        const double t = 10.0 * std::pow(10.0, k / 20.0);
        samples.push_back({t, nominal * (1.0 + hvrb::delta_r_fraction(p, 100.0, 298.15, t))});
    }
    const auto f = hvrb::fit_log_time(samples);
    EXPECT_GT(f.slope, 0.0);
    EXPECT_GE(f.r_squared, 0.99);
    // Independent regression of the same points gives 0.98378 of the asymptotic slope.
    EXPECT_NEAR(f.slope / (nominal * s), 0.98378, 1e-4);
    EXPECT_LT(std::abs(f.slope / (nominal * s) - 1.0), 0.02);
}

TEST(RdsCsv, RoundTrip) {
    const std::vector<RdsSample> in{{1.0, 3.3}, {10.0, 3.3056}, {100.5, 0.1 + 0.2}};
    std::stringstream ss;
    hvrb::write_rds_csv(ss, in);
    EXPECT_EQ(ss.str().substr(0, 17), "t_min,rds_on_ohm\n");
    const auto out = hvrb::read_rds_csv(ss);
    EXPECT_EQ(out, in);
}

TEST(RdsCsv, ReadErrorsNameTheLine) {
    std::istringstream bad_header("t,r\n1,2\n");
    EXPECT_THROW((void)hvrb::read_rds_csv(bad_header), hvrb::Error);
    std::istringstream bad_row("t_min,rds_on_ohm\n1,3.3\n2,abc\n");
    try {
        (void)hvrb::read_rds_csv(bad_row);
        ADD_FAILURE();
    } catch (const hvrb::Error& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
    std::istringstream empty("");
    EXPECT_THROW((void)hvrb::read_rds_csv(empty), hvrb::Error);
    std::istringstream crlf("t_min,rds_on_ohm\r\n1,3.3\r\n");
    EXPECT_EQ(hvrb::read_rds_csv(crlf).size(), 1u);
}

TEST(FitReport, KeyValueFormat) {
    hvrb::FitResult f;
    f.slope = 0.5;
    f.intercept = 2.0;
    f.r_squared = 1.0;
    f.n = 3;
    std::ostringstream os;
    hvrb::write_fit_report(os, f);
    EXPECT_EQ(os.str(), "slope=0.5\nintercept=2\nr_squared=1\nn=3\nslope_log10=1.151292546497023\n");
}

}  // namespace
