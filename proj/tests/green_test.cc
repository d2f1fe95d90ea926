#include "qcrystal/green_integral.hpp"

#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

namespace {

// simple-cubic return-probability constant: (2 pi)^{-3} times the integral
// of 1/(3 - cos - cos - cos) over the Brillouin cube
constexpr double kW3 = 0.505462019717326;

TEST(GreenIntegral, RejectsDivergentDimensions) {
  EXPECT_THROW(qcr::lattice_green_integral(2), std::invalid_argument);
  EXPECT_THROW(qcr::lattice_green_integral(1), std::invalid_argument);
  EXPECT_THROW(qcr::green_integral_bessel(2), std::invalid_argument);
  EXPECT_THROW(qcr::lattice_green_integral(3, 7), std::invalid_argument);
}

TEST(GreenIntegral, CubicLatticeConstant) {
  const auto r = qcr::lattice_green_integral(3, 32);
  EXPECT_NEAR(r.value, kW3, 2e-6);
  EXPECT_LT(r.refinement_delta, 1e-4);
}

TEST(GreenIntegral, RefinementConverges) {
  const auto coarse = qcr::lattice_green_integral(3, 16);
  const auto fine = qcr::lattice_green_integral(3, 32);
  EXPECT_LT(fine.refinement_delta, coarse.refinement_delta);
  EXPECT_NEAR(coarse.value, fine.value, 5e-5);
}

TEST(GreenIntegral, SchemesAgreeAcrossDimensions) {
  const double b3 = qcr::green_integral_bessel(3);
  EXPECT_NEAR(b3, kW3, 1e-7);
  const auto s4 = qcr::lattice_green_integral(4, 12);
  const double b4 = qcr::green_integral_bessel(4);
  EXPECT_NEAR(s4.value, b4, 1e-5);
  // return probability decreases with dimension
  EXPECT_LT(b4, b3);
}

TEST(GreenIntegral, ScaledBesselMatchesReference) {
  // values of e^{-t} I_0(t) cross-checked against the standard library
  for (double t : {0.1, 0.5, 1.0, 3.0, 8.0}) {
    const double ref = std::cyl_bessel_i(0.0, t) * std::exp(-t);
    EXPECT_NEAR(qcr::detail::bessel_i0_scaled(t), ref, 1e-12) << "t=" << t;
  }
  EXPECT_DOUBLE_EQ(qcr::detail::bessel_i0_scaled(0.0), 1.0);
}

}  // namespace
