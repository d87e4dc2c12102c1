#include <cstdio>
#include <iostream>

#include "sgm/bench.hpp"

int main() {
  const auto results = sgm::bench::run_acceptance("acceptance-scratch", std::cout);
  bool all_pass = true;
  for (const auto& r : results) {
    std::printf("[%2d] %s  %s -- %s\n", r.id, r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.detail.c_str());
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}
