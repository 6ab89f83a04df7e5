// Prints one line per acceptance criterion; exits 1 if any fails.
// Usage: acceptance <path-to-zdm>

#include <iostream>

#include "zdm/acceptance.hpp"
#include "zdm/report.hpp"

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <path-to-zdm>\n";
        return 2;
    }
    const auto seed = zdm::resolve_seed(zdm::kDeskSeed);
    std::cout << "desk suite, seed " << seed << std::endl;
    bool all = true;
    zdm::run_desk_suite(seed, [&](const zdm::CriterionResult& r) {
        std::cout << r.line() << std::endl;
        all = all && r.passed();
    });
    const auto e2e = zdm::end_to_end(argv[1], seed);
    std::cout << e2e.line() << std::endl;
    all = all && e2e.passed();
    return all ? 0 : 1;
}
