#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hvrb/degradation.hpp"

namespace {

using hvrb::DegradationParams;

// Independently evaluated reference values (double precision, k = 8.617e-5 eV/K).
constexpr double slope_100v_room = 0.00859517855365279;
constexpr double room = 298.15;

TEST(StressSlope, ZeroCoefficientGivesOffset) {
    DegradationParams p;
    p.b = 0.0;
    for (double v : {0.0, 40.0, 100.0, 200.0}) {
        for (double t : {250.0, 298.15, 400.0}) EXPECT_EQ(hvrb::stress_slope(p, v, t), 0.0);
    }
    p.a = 0.25;
    EXPECT_EQ(hvrb::stress_slope(p, 70.0, 300.0), 0.25);
}

TEST(StressSlope, ReferenceValueAtKnee) {
    const DegradationParams p;
    EXPECT_NEAR(hvrb::stress_slope(p, 100.0, room), slope_100v_room, 1e-15);
    EXPECT_NEAR(hvrb::stress_slope(p, 100.0, room), 8.6e-3, 0.1e-3);
}

TEST(StressSlope, ReferenceValuesAcrossVoltage) {
    const DegradationParams p;
    EXPECT_NEAR(hvrb::stress_slope(p, 40.0, room) / 3.0699e-5, 1.0, 1e-4);
    EXPECT_NEAR(hvrb::stress_slope(p, 60.0, room) / 2.2506e-4, 1.0, 1e-4);
    EXPECT_NEAR(hvrb::stress_slope(p, 85.0, room) / 2.4976e-3, 1.0, 1e-4);
    EXPECT_NEAR(hvrb::stress_slope(p, 110.0, room) / 1.62847e-2, 1.0, 1e-5);
    EXPECT_LT(hvrb::stress_slope(p, 40.0, room), hvrb::stress_slope(p, 100.0, room));
}

TEST(StressSlope, LargeOverdriveDoesNotOverflow) {
    const DegradationParams p;
    const double s = hvrb::stress_slope(p, 1e5, room);
    EXPECT_TRUE(std::isfinite(s));
    EXPECT_NEAR(s / (slope_100v_room / std::numbers::ln2 * (1e5 - 100.0) / 10.0), 1.0, 1e-12);
    EXPECT_TRUE(std::isfinite(hvrb::stress_slope(p, -1e5, room)));
}

TEST(StressSlope, RejectsNonPositiveTemperature) {
    const DegradationParams p;
    for (double t : {0.0, -10.0}) {
        try {
            (void)hvrb::stress_slope(p, 50.0, t);
            ADD_FAILURE();
        } catch (const hvrb::Error& e) {
            EXPECT_EQ(e.kind(), hvrb::ErrorKind::invalid_parameter);
        }
    }
}

TEST(StressSlope, StrictlyIncreasingInVoltage) {
    const DegradationParams p;
    for (double t : {250.0, 298.15, 450.0}) {
        double prev = hvrb::stress_slope(p, 0.0, t);
        for (double v = 2.0; v <= 300.0; v += 2.0) {
            const double s = hvrb::stress_slope(p, v, t);
            EXPECT_GT(s, prev) << "v=" << v << " T=" << t;
            prev = s;
        }
    }
}

TEST(StressSlope, NegativeTemperatureCoefficient) {
    const DegradationParams p;
    for (double v : {20.0, 40.0, 70.0, 100.0, 130.0}) {
        double prev = hvrb::stress_slope(p, v, 250.0);
        for (int k = 1; k <= 200; ++k) {
            const double t = 250.0 + k;
            const double s = hvrb::stress_slope(p, v, t);
            EXPECT_LT(s, prev) << "v=" << v << " T=" << t;
            prev = s;
        }
    }
}

TEST(DeltaRFraction, Examples) {
    const DegradationParams p;
    EXPECT_EQ(hvrb::delta_r_fraction(p, 100.0, room, 0.0), 0.0);
    EXPECT_NEAR(hvrb::delta_r_fraction(p, 100.0, room, (std::numbers::e - 1.0) * p.t0), slope_100v_room, 1e-15);
    EXPECT_NEAR(hvrb::delta_r_fraction(p, 100.0, room, 100.0), 0.039667785, 1e-9);
    EXPECT_NEAR(hvrb::delta_r_fraction(p, 100.0, room, 100.0), 8.6e-3 * 4.615, 1e-3);
}

TEST(DeltaRFraction, VerticalOffsetShiftsWithoutChangingSlope) {
    DegradationParams p;
    p.vertical_offset = 0.01;
    const DegradationParams q;
    for (double t : {1.0, 10.0, 100.0}) {
        EXPECT_NEAR(hvrb::delta_r_fraction(p, 80.0, room, t) - hvrb::delta_r_fraction(q, 80.0, room, t), 0.01, 1e-15);
    }
}

TEST(DeltaRFraction, RejectsNegativeTime) {
    try {
        (void)hvrb::delta_r_fraction(DegradationParams{}, 100.0, room, -1.0);
        ADD_FAILURE();
    } catch (const hvrb::Error& e) {
        EXPECT_EQ(e.kind(), hvrb::ErrorKind::invalid_parameter);
    }
}

TEST(DeltaRFraction, ConcaveNonDecreasing) {
    const DegradationParams p;
    const double h = 0.5;
    for (double t = h; t < 2000.0; t *= 1.3) {
        const double f0 = hvrb::delta_r_fraction(p, 100.0, room, t - h);
        const double f1 = hvrb::delta_r_fraction(p, 100.0, room, t);
        const double f2 = hvrb::delta_r_fraction(p, 100.0, room, t + h);
        EXPECT_GE(f1, f0);
        EXPECT_LE(f2 - f1, f1 - f0);
    }
}

TEST(DeltaRFraction, LogSlopeMatchesStressSlopeAtLongTimes) {
    const DegradationParams p;
    const double s = hvrb::stress_slope(p, 100.0, room);
    for (double t : {100.0, 1000.0, 1e5}) {
        const double h = 1e-4;
        const double d = (hvrb::delta_r_fraction(p, 100.0, room, t * std::exp(h)) -
                          hvrb::delta_r_fraction(p, 100.0, room, t * std::exp(-h))) /
                         (2.0 * h);
        EXPECT_LT(std::abs(d / s - 1.0), 0.01) << "t=" << t;
    }
}

TEST(ApplyStressStep, ZeroCoefficientKeepsFreshState) {
    DegradationParams p;
    p.b = 0.0;
    const auto s = hvrb::apply_stress_step(hvrb::DeviceState::fresh(3.3), p, 100.0, room, 10.0);
    EXPECT_EQ(s.delta_r_fraction, 0.0);
    EXPECT_EQ(s.stress_time, 10.0);
    EXPECT_EQ(s.rds_on(), 3.3);
}

TEST(ApplyStressStep, StepsComposeToClosedForm) {
    const DegradationParams p;
    const auto fresh = hvrb::DeviceState::fresh(3.3);
    const auto two = hvrb::apply_stress_step(hvrb::apply_stress_step(fresh, p, 100.0, room, 50.0), p, 100.0, room, 50.0);
    const auto one = hvrb::apply_stress_step(fresh, p, 100.0, room, 100.0);
    EXPECT_NEAR(two.delta_r_fraction, one.delta_r_fraction, 1e-12);
    EXPECT_NEAR(one.delta_r_fraction, hvrb::delta_r_fraction(p, 100.0, room, 100.0), 1e-15);
}

TEST(ApplyStressStep, MinuteStepsAreConcaveIncreasing) {
    const DegradationParams p;
    auto s = hvrb::DeviceState::fresh(3.3);
    std::vector<double> f{0.0};
    for (int k = 0; k < 200; ++k) {
        s = hvrb::apply_stress_step(s, p, 100.0, room, 1.0);
        f.push_back(s.delta_r_fraction);
    }
    for (std::size_t k = 1; k + 1 < f.size(); ++k) {
        EXPECT_GT(f[k], f[k - 1]);
        EXPECT_LT(f[k + 1] - f[k], f[k] - f[k - 1]);
    }
}

TEST(ApplyStressStep, NeverDecreasesWhenStressDrops) {
    const DegradationParams p;
    auto s = hvrb::apply_stress_step(hvrb::DeviceState::fresh(3.3), p, 110.0, room, 100.0);
    const double before = s.delta_r_fraction;
    s = hvrb::apply_stress_step(s, p, 40.0, room, 1.0);
    EXPECT_EQ(s.delta_r_fraction, before);
}

TEST(ApplyStressStep, RejectsNonPositiveStep) {
    for (double dt : {0.0, -1.0}) {
        try {
            (void)hvrb::apply_stress_step(hvrb::DeviceState::fresh(3.3), DegradationParams{}, 100.0, room, dt);
            ADD_FAILURE();
        } catch (const hvrb::Error& e) {
            EXPECT_EQ(e.kind(), hvrb::ErrorKind::invalid_parameter);
        }
    }
}

TEST(DegradationParams, Validation) {
    DegradationParams p;
    EXPECT_NO_THROW(p.validate());
    p.alpha = 0.0;
    EXPECT_THROW(p.validate(), hvrb::Error);
    p = {};
    p.b = -1.0;
    EXPECT_THROW(p.validate(), hvrb::Error);
    p = {};
    p.t0 = 0.0;
    EXPECT_THROW(p.validate(), hvrb::Error);
    p = {};
    p.hbar_omega_lo = 0.0;
    EXPECT_THROW(p.validate(), hvrb::Error);
}

}  // namespace
