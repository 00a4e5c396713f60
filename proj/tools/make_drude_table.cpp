// Writes Im eps of a Drude metal on a log-spaced photon-energy grid in the
// two-column format read by load_optical_table.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

int main(int argc, char** argv) {
    CLI::App app{"Generate a synthetic Drude optical table"};
    double plasma = 9.0, damping = 0.035, e_min = 1e-5, e_max = 1e4;
    int per_decade = 100;
    std::string output;
    app.add_option("--plasma", plasma, "plasma frequency in eV")->capture_default_str();
    app.add_option("--damping", damping, "relaxation rate in eV")->capture_default_str();
    app.add_option("--e-min", e_min, "lowest photon energy in eV")->capture_default_str();
    app.add_option("--e-max", e_max, "highest photon energy in eV")->capture_default_str();
    app.add_option("--per-decade", per_decade, "samples per decade")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("-o,--output", output, "output file (default stdout)");
    CLI11_PARSE(app, argc, argv);
    if (!(e_min > 0.0 && e_max > e_min && plasma > 0.0 && damping > 0.0)) {
        std::cerr << "error: need 0 < e-min < e-max, plasma > 0 and damping > 0\n";
        return 2;
    }

    std::ofstream file;
    if (!output.empty()) {
        file.open(output);
        if (!file) {
            std::cerr << "error: cannot open " << output << '\n';
            return 2;
        }
    }
    std::ostream& out = output.empty() ? std::cout : file;
    const int n = static_cast<int>(std::lround(per_decade * std::log10(e_max / e_min)));
    char buf[96];
    std::snprintf(buf, sizeof buf, "# Drude Im eps, plasma %.6g eV, damping %.6g eV\n", plasma, damping);
    out << buf << "# energy_eV im_eps\n";
    for (int i = 0; i <= n; ++i) {
        const double w = e_min * std::pow(e_max / e_min, static_cast<double>(i) / n);
        const double im = plasma * plasma * damping / (w * (w * w + damping * damping));
        std::snprintf(buf, sizeof buf, "%.12e %.12e\n", w, im);
        out << buf;
    }
    return out ? 0 : 1;
}
