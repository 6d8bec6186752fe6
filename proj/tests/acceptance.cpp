// Acceptance suite runner: one line per criterion, nonzero exit on any failure.

#include <iostream>

#include "pileup/acceptance.hpp"

int main() {
  const auto results = pileup::acceptance::run(std::cout);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criteria failed" : "acceptance: all criteria passed")
            << std::endl;
  return failed ? 1 : 0;
}
