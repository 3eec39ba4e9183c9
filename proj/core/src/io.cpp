#include "htfkit/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "htfkit/errors.hpp"

namespace htfkit {

int thread_budget() {
    if (const char* env = std::getenv("HTFKIT_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

LtpStateSpace load_ltp_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open model file: " + path);
    double omega_p = 0.0;
    int nx = 0, nu = 0, ny = 0;
    bool have_dims = false, have_omega = false;
    struct Entry {
        int n, row, col;
        Complex value;
    };
    std::map<char, std::vector<Entry>> entries;
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw input_error(path + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "omega_p") {
            if (!(ls >> omega_p) || omega_p <= 0.0) fail("omega_p needs a positive value");
            have_omega = true;
        } else if (key == "dims") {
            if (!(ls >> nx >> nu >> ny) || nx < 1 || nu < 1 || ny < 1)
                fail("dims needs three positive integers (state input output)");
            have_dims = true;
        } else if (key == "A" || key == "B" || key == "C" || key == "D") {
            Entry e;
            double re, im;
            if (!(ls >> e.n >> e.row >> e.col >> re >> im))
                fail("coefficient line needs: n row col re im");
            e.value = Complex(re, im);
            entries[key[0]].push_back(e);
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    lineno = 0;
    if (!have_omega) throw input_error(path + ": missing omega_p");
    if (!have_dims) throw input_error(path + ": missing dims");

    auto build = [&](char which, int rows, int cols) {
        std::map<int, CMatrix> coeffs;
        for (const Entry& e : entries[which]) {
            if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols)
                throw input_error(path + ": " + std::string(1, which) + " entry (" +
                                  std::to_string(e.row) + "," + std::to_string(e.col) +
                                  ") out of range");
            auto it = coeffs.find(e.n);
            if (it == coeffs.end())
                it = coeffs.emplace(e.n, CMatrix::Zero(rows, cols)).first;
            it->second(e.row, e.col) += e.value;
        }
        if (coeffs.empty()) coeffs[0] = CMatrix::Zero(rows, cols);
        return HarmonicMatrixSeries(omega_p, rows, cols, std::move(coeffs));
    };
    return LtpStateSpace(build('A', nx, nx), build('B', nx, nu),
                         build('C', ny, nx), build('D', ny, nu));
}

void save_ltp_model(const LtpStateSpace& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write model file: " + path);
    out << "omega_p " << format_sig(model.base_freq()) << "\n";
    out << "dims " << model.state_dim() << " " << model.input_dim() << " "
        << model.output_dim() << "\n";
    auto dump = [&](char name, const HarmonicMatrixSeries& series) {
        for (const auto& [n, x] : series.coeffs())
            for (int r = 0; r < x.rows(); ++r)
                for (int c = 0; c < x.cols(); ++c)
                    if (x(r, c) != Complex(0.0, 0.0))
                        out << name << " " << n << " " << r << " " << c << " "
                            << format_sig(x(r, c).real()) << " "
                            << format_sig(x(r, c).imag()) << "\n";
    };
    dump('A', model.A());
    dump('B', model.B());
    dump('C', model.C());
    dump('D', model.D());
}

std::string format_sig(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

std::string format_sig(Complex value) {
    return format_sig(value.real()) + "," + format_sig(value.imag());
}

} // namespace htfkit
