// Acceptance suite: one pass/fail line per criterion. The CLI binary path is
// passed as argv[1] so the determinism criterion can re-invoke it.

#include <iostream>
#include <string>

#include "hhcert/selftest.hpp"

int main(int argc, char** argv) {
    const std::string cli_path = argc > 1 ? argv[1] : "";
    const int failures = hhcert::selftest::run_and_print(cli_path, std::cout);
    if (failures > 0) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
