// Runs the acceptance suite on the shipped default configuration and prints
// one PASS/FAIL line per criterion. The report files go to the working
// directory so they can be inspected after a failure.

#include <fstream>
#include <iostream>

#include "radmax/acceptance.hpp"
#include "radmax/report.hpp"

int main(int argc, char** argv) {
  using namespace radmax;
  const std::string path = argc > 1 ? argv[1] : RADMAX_DEFAULT_CONFIG;
  try {
    const RunConfig c = load_config(path);
    const VerificationReport r = run_verification(c, [](const std::string& msg) {
      std::cerr << msg << '\n';
    });
    write_artifacts("acceptance_out", {{"report.json", report_to_json(r)},
                                       {"report.csv", report_to_csv(r)}});
    for (const auto& cr : r.criteria)
      std::cout << "criterion " << cr.id << ' ' << (cr.pass ? "PASS" : "FAIL") << "  " << cr.name
                << "  (" << cr.rows << " rows, " << cr.failures << " failures; worst: " << cr.worst
                << ")\n";
    std::cout << (r.all_pass() ? "ALL PASS\n" : "SOME CRITERIA FAILED\n");
    return r.all_pass() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << '\n';
    return 2;
  }
}
