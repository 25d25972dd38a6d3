// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Tolerances live in the suite itself; exit status is 0 only if all pass.
#include <cstdio>
#include <fstream>

#include "blowup/suite.hpp"

int main(int argc, char** argv) {
    using namespace blowup;
    const SuiteReport rep = verify_suite({"all"}, SuiteOptions{}, [](const CriterionResult& r) {
        std::printf("%s\n", format_line(r).c_str());
        std::fflush(stdout);
    });
    if (argc > 1) {
        std::ofstream f(argv[1]);
        f << to_json(rep).dump(2) << "\n";
    }
    std::size_t passed = 0;
    for (const auto& r : rep.results) passed += r.pass ? 1 : 0;
    std::printf("%zu/%zu criteria passed\n", passed, rep.results.size());
    return rep.passed() ? 0 : 1;
}
