#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <iostream>

#include "distopt/stability.hpp"

// Every distance computation in the suite is checked against |ω*| ≤ 2‖M‖₂.
int main(int argc, char** argv) {
  doctest::Context ctx(argc, argv);
  const int res = ctx.run();
  if (ctx.shouldExit()) return res;
  const long violations = distopt::van_loan_violations();
  if (violations != 0) {
    std::cerr << "frequency bound |w*| <= 2||M|| violated " << violations << " times\n";
    return res == 0 ? 1 : res;
  }
  return res;
}
