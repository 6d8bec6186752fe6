#pragma once

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#define EXPECT_REL(actual, expected, tol) \
  EXPECT_LE(std::abs((actual) - (expected)), (tol) * std::abs(expected)) << "actual " << (actual)

namespace pileup_test {

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240917);
  return g;
}

}  // namespace pileup_test
