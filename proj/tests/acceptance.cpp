// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

#include <iostream>
#include <string>

#include "casimir/cli/acceptance.hpp"

int main(int argc, char** argv) {
    casimir::cli::CheckContext ctx;
    ctx.optical_table = std::string(CASIMIR_DATA_DIR) + "/gold_drude_synthetic.txt";
    if (argc > 1) ctx.output_dir = argv[1];
    bool ok = true;
    casimir::cli::run_checks(ctx, false, [&](const casimir::cli::CheckResult& r) {
        std::cout << casimir::cli::format_check(r) << std::endl;
        ok = ok && r.pass;
    });
    return ok ? 0 : 1;
}
