// One PASS/FAIL line per acceptance criterion; nonzero exit iff any fails.
// Optional arguments restrict the run to the given criterion ids.
#include "cocyclelab/harness.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
    const auto summary = cocy::harness::run_acceptance(ids, std::cout);
    int failed = 0;
    for (const auto& r : summary.rows) failed += r.pass ? 0 : 1;
    std::cout << summary.rows.size() - static_cast<std::size_t>(failed) << "/" << summary.rows.size()
              << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
