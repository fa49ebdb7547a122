// Acceptance suite: runs every registered verification check at the default
// budget (2e5 flag samples per quantity, fixed seed) and prints one pass/fail
// line per numbered criterion, then the per-check detail. Exit code 0 only if
// every asserting criterion passes.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "flagquer/harness.hpp"

int main(int argc, char** argv) {
  using namespace flagquer::harness;
  RunConfig cfg;
  cfg.seed = 42;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--samples" && i + 1 < argc)
      cfg.samples = std::strtoull(argv[++i], nullptr, 10);
    else if (arg == "--seed" && i + 1 < argc)
      cfg.seed = std::strtoull(argv[++i], nullptr, 10);
    else if (arg == "--threads" && i + 1 < argc)
      cfg.threads = static_cast<unsigned>(std::strtoul(argv[++i], nullptr, 10));
  }

  const auto reports = run_suite({"all"}, cfg);

  std::map<int, std::vector<const CheckReport*>> by_criterion;
  for (const auto& r : reports) by_criterion[r.criterion].push_back(&r);

  static const char* kCriteria[12] = {
      "ball closed form (psi_r, phi_r; n=3..5, r<=3)",
      "invariance under volume-preserving maps, with negative control",
      "section extremality of the ball, ellipsoid equality case",
      "omega=(2,1,3) average equals 4/pi on symmetric bodies",
      "sphere functional A: gap, frozen fixture, symmetry",
      "complete-flag vs sphere-integral cross identity",
      "partial flags vs nested complete-flag sampling",
      "polar product pair bounded by the ball pair",
      "phi ratio sandwiched below the mean width",
      "functional invariance and the gaussian value",
      "flag ratio bounds with ball equality case",
      "determinism, SE scaling, homogeneity, integer identities"};

  bool all_ok = true;
  for (int crit = 1; crit <= 12; ++crit) {
    bool ok = true;
    std::string checks;
    for (const auto* r : by_criterion[crit]) {
      if (r->verdict == Verdict::fail) ok = false;
      if (!checks.empty()) checks += ", ";
      checks += r->name;
      if (r->verdict == Verdict::report) checks += " [report]";
    }
    all_ok = all_ok && ok;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << crit << ": " << kCriteria[crit - 1]
              << "  (" << checks << ")\n";
  }

  std::cout << "\n" << reports_to_text(reports);
  double total_ms = 0.0;
  for (const auto& r : reports) total_ms += r.wall_time_ms;
  std::cerr << "acceptance wall time: " << static_cast<long>(total_ms) << " ms\n";
  return all_ok ? 0 : 1;
}
