// Runs the acceptance suite and prints one PASS/FAIL line per criterion.
// Usage: tapfe_acceptance [out_dir] [jobs]

#include <cstdlib>
#include <iostream>

#include "tapfe/acceptance.hpp"

int main(int argc, char** argv) {
  tapfe::AcceptanceOptions opt;
  opt.out_dir = argc > 1 ? argv[1] : "acceptance_out";
  opt.jobs = argc > 2 ? std::atoi(argv[2]) : 1;
  opt.on_result = [](const tapfe::CriterionResult& r) {
    std::cout << tapfe::format_result(r) << std::endl;
  };
  const auto results = tapfe::run_acceptance(opt);
  int failed = 0;
  for (const auto& r : results) failed += !r.passed;
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
