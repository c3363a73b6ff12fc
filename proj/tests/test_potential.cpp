#include <gtest/gtest.h>

#include "eckart/potential.hpp"

using eckart::Complex;
using eckart::EckartPotential;
using eckart::pi;

namespace {

// closed forms of the sech^2 semiclassical integrals, c = 2 mu |U0|
double shift_well(double c, double p) { return std::log(1.0 + c / (p * p)); }
double shift_barrier(double c, double p) { return std::log(std::abs(1.0 - c / (p * p))); }
double phase_well(double c, double p) {
  return -p * std::log(1.0 + c / (p * p)) + 2.0 * std::sqrt(c) * std::atan(std::sqrt(c) / p);
}
double phase_barrier(double c, double p) {
  return -(p * std::log(1.0 - c / (p * p)) + 2.0 * std::sqrt(c) * std::atanh(std::sqrt(c) / p));
}

}  // namespace

TEST(SParameter, ReferenceValues) {
  EXPECT_EQ(eckart::s_parameter(EckartPotential::dimensionless(-861.0)), Complex(41.0, 0.0));
  EXPECT_EQ(eckart::s_parameter(EckartPotential::dimensionless(-15.0)), Complex(5.0, 0.0));
  Complex s1 = eckart::s_parameter(EckartPotential::dimensionless(1.0));
  EXPECT_NEAR(s1.real(), -0.5, 1e-15);
  EXPECT_NEAR(s1.imag(), 1.3228756555322954, 1e-14);
  EXPECT_NEAR(eckart::s_parameter(EckartPotential::dimensionless(2485.0)).imag(), 70.4965, 1e-4);
  EXPECT_EQ(eckart::s_parameter(EckartPotential::dimensionless(0.0)), Complex(0.0, 0.0));
}

TEST(SParameter, RegimesAndDimensions) {
  for (double u : {-100.0, -3.0, -0.01, 0.01, 0.1, 0.124, 0.126, 7.0, 1e5}) {
    auto pot = EckartPotential::dimensionless(u);
    Complex s = pot.s();
    EXPECT_GE(s.imag(), 0.0);
    if (u < 0) {
      EXPECT_GT(s.real(), 0.0);
      EXPECT_EQ(s.imag(), 0.0);
    } else if (u < 0.125) {
      EXPECT_GT(s.real(), -0.5);
      EXPECT_LT(s.real(), 0.0);
      EXPECT_EQ(s.imag(), 0.0);
    } else {
      EXPECT_DOUBLE_EQ(s.real(), -0.5);
    }
    // s(s+1) = -2 mu U0 / alpha^2
    EXPECT_NEAR(std::abs(s * (s + 1.0) + 2.0 * u), 0.0, 1e-12 * std::max(1.0, std::abs(u)));
  }
  // only mu U0 / alpha^2 matters
  EckartPotential a{3.0, 2.0, 0.5};
  EckartPotential b = EckartPotential::dimensionless(3.0 * 0.5 / 4.0);
  EXPECT_NEAR(std::abs(a.s() - b.s()), 0.0, 1e-15);
}

TEST(DimensionlessScales, RoundTrip) {
  eckart::DimensionlessScales sc{2.5, 0.7};
  for (double v : {-3.0, 0.0, 1e-7, 12345.678}) {
    EXPECT_DOUBLE_EQ(sc.x_from_bar(sc.x_to_bar(v)), v);
    EXPECT_DOUBLE_EQ(sc.p_from_bar(sc.p_to_bar(v)), v);
    EXPECT_NEAR(sc.t_from_bar(sc.t_to_bar(v)), v, 1e-15 * std::abs(v));
    EXPECT_NEAR(sc.u_from_bar(sc.u_to_bar(v)), v, 1e-15 * std::abs(v));
  }
  auto pot = sc.potential(-15.0);
  EXPECT_NEAR(std::abs(pot.s() - Complex(5.0, 0.0)), 0.0, 1e-13);
}

TEST(Evaluate, Values) {
  auto pot = EckartPotential::dimensionless(3.0);
  EXPECT_DOUBLE_EQ(eckart::evaluate(pot, 0.0), 3.0);
  EXPECT_NEAR(eckart::evaluate(pot, 10.0) / (4.0 * 3.0 * std::exp(-20.0)), 1.0, 1e-8);
  EXPECT_EQ(eckart::evaluate(EckartPotential::dimensionless(0.0), 1.3), 0.0);
  EXPECT_DOUBLE_EQ(eckart::evaluate(pot, -0.7), eckart::evaluate(pot, 0.7));
}

TEST(LocalMomentum, Branches) {
  auto pot = EckartPotential::dimensionless(1e4);
  EXPECT_EQ(eckart::local_momentum(EckartPotential::dimensionless(0.0), 0.3, 2.0), Complex(2.0, 0.0));
  Complex q = eckart::local_momentum(pot, 0.0, 50.0);
  EXPECT_EQ(q.real(), 0.0);
  EXPECT_NEAR(q.imag(), std::sqrt(17500.0), 1e-10);
  auto tp = eckart::turning_points(pot, 50.0);
  ASSERT_TRUE(tp);
  EXPECT_NEAR(std::abs(eckart::local_momentum(pot, tp->second, 50.0)), 0.0, 1e-5);
}

TEST(TurningPoints, ClosedForm) {
  auto pot = EckartPotential::dimensionless(1e4);
  auto tp = eckart::turning_points(pot, 50.0);
  ASSERT_TRUE(tp);
  EXPECT_NEAR(tp->second, std::acosh(std::sqrt(8.0)), 1e-14);
  EXPECT_NEAR(tp->second, 1.7001, 1e-4);
  EXPECT_DOUBLE_EQ(tp->first, -tp->second);
  EXPECT_NEAR(eckart::evaluate(pot, tp->second), 1250.0, 1e-9);
  EXPECT_FALSE(eckart::turning_points(pot, 200.0));
  EXPECT_FALSE(eckart::turning_points(EckartPotential::dimensionless(-5.0), 1.0));
}

TEST(SemiclassicalPhase, ClosedForms) {
  EXPECT_EQ(eckart::semiclassical_phase(EckartPotential::dimensionless(0.0), 3.0), Complex{});
  Complex pw = eckart::semiclassical_phase(EckartPotential::dimensionless(-2e4), 200.0);
  EXPECT_GT(pw.real(), 0.0);
  EXPECT_EQ(pw.imag(), 0.0);
  EXPECT_NEAR(pw.real(), phase_well(4e4, 200.0), 1e-9 * pw.real());
  Complex pb = eckart::semiclassical_phase(EckartPotential::dimensionless(1e5), 700.0);
  EXPECT_LT(pb.real(), 0.0);
  EXPECT_NEAR(pb.real(), phase_barrier(2e5, 700.0), 1e-9 * std::abs(pb.real()));
  Complex pt = eckart::semiclassical_phase(EckartPotential::dimensionless(1e4), 50.0);
  EXPECT_GT(pt.imag(), 0.0);
  EXPECT_NEAR(pt.imag(), pi * (std::sqrt(2e4) - 50.0), 1e-8 * pt.imag());
}

TEST(SemiclassicalPhase, DimensionalUnitsScale) {
  // alpha = 2, mu = 3: phase carries 1/alpha, potential enters through 2 mu U0
  EckartPotential pot{-50.0, 2.0, 3.0};
  double c = 2.0 * 3.0 * 50.0;
  double p = 7.0;
  EXPECT_NEAR(eckart::semiclassical_phase(pot, p).real(), phase_well(c, p) / 2.0, 1e-10);
  EXPECT_NEAR(eckart::classical_shift(pot, p).real(), shift_well(c, p) / 2.0, 1e-10);
}

TEST(ClassicalShift, ClosedFormsAtPresetParameters) {
  Complex a = eckart::classical_shift(EckartPotential::dimensionless(-2e4), 200.0);
  EXPECT_NEAR(a.real(), shift_well(4e4, 200.0), 1e-10);
  EXPECT_EQ(a.imag(), 0.0);
  Complex b = eckart::classical_shift(EckartPotential::dimensionless(1e5), 700.0);
  EXPECT_NEAR(b.real(), shift_barrier(2e5, 700.0), 1e-10);
  Complex c = eckart::classical_shift(EckartPotential::dimensionless(1e4), 50.0);
  EXPECT_NEAR(c.real(), shift_barrier(2e4, 50.0), 1e-9);
  EXPECT_NEAR(c.imag(), pi, 1e-9);
}

TEST(ClassicalShift, SignLaw) {
  for (double p : {5.0, 20.0, 80.0}) {
    EXPECT_GT(eckart::classical_shift(EckartPotential::dimensionless(-30.0), p).real(), 0.0);
    EXPECT_LT(eckart::classical_shift(EckartPotential::dimensionless(10.0), p).real(), 0.0);
  }
}

TEST(ClassicalShift, EqualsMinusPhaseDerivative) {
  struct Case {
    double u, p;
  };
  for (auto [u, p] : {Case{-2e4, 200.0}, Case{1e5, 700.0}, Case{1e4, 50.0}, Case{-3.0, 1.2}, Case{40.0, 4.0}}) {
    auto pot = EckartPotential::dimensionless(u);
    double h = 1e-3 * p;
    Complex fd = -(eckart::semiclassical_phase(pot, p + h) - eckart::semiclassical_phase(pot, p - h)) / (2.0 * h);
    Complex xs = eckart::classical_shift(pot, p);
    EXPECT_LT(std::abs(fd - xs), 1e-5 * std::max(1.0, std::abs(xs))) << u << " " << p;
  }
}

TEST(ClassicalShift, TruncationIsConverged) {
  // integrand decays like V/p^2; compare against the closed form at a slow, wide case
  auto pot = EckartPotential::dimensionless(-0.5);
  double p = 0.2;
  EXPECT_NEAR(eckart::classical_shift(pot, p).real(), shift_well(1.0, p), 1e-10);
}

TEST(ClassicalShift, RejectsBarrierTop) {
  auto pot = EckartPotential::dimensionless(50.0);
  EXPECT_THROW(eckart::classical_shift(pot, 10.0), eckart::numerical_error);
  EXPECT_NO_THROW(eckart::classical_shift(pot, 10.0 * (1.0 + 1e-6)));
  EXPECT_THROW(eckart::classical_shift(pot, -1.0), std::domain_error);
}
