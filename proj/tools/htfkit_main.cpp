// htfkit: harmonic transfer function analysis front end.
//
// Subcommands:
//   htf        evaluate HTF slices of an LTP model file
//   transform  apply a frame transformation and report diagonality
//   stability  loop decomposition, margins, small-gain and passivity report
//   sweep      2x2 admittance over a frequency band (closed form and/or
//              simulation)
//
// Exit codes: 0 success, 2 input error, 3 numerical failure,
//             4 no-crossover / indeterminate result.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "htfkit/errors.hpp"
#include "htfkit/frames.hpp"
#include "htfkit/io.hpp"
#include "htfkit/simulator.hpp"
#include "htfkit/stability.hpp"
#include "htfkit/vsi.hpp"

namespace fs = std::filesystem;
using namespace htfkit;

namespace {

struct Band {
    double lo = 0.0, hi = 0.0;
};

Band parse_band(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw input_error("band must be LO:HI, got '" + text + "'");
    Band b;
    try {
        b.lo = std::stod(text.substr(0, colon));
        b.hi = std::stod(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw input_error("band must be numeric LO:HI, got '" + text + "'");
    }
    if (!(b.lo > 0.0) || !(b.hi > b.lo))
        throw input_error("band requires 0 < LO < HI, got '" + text + "'");
    return b;
}

Complex parse_complex(const std::string& text) {
    const auto colon = text.find(':');
    try {
        if (colon == std::string::npos) return Complex(std::stod(text), 0.0);
        return Complex(std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1)));
    } catch (const std::exception&) {
        throw input_error("complex value must be RE or RE:IM, got '" + text + "'");
    }
}

std::ofstream open_csv(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) throw input_error("cannot write " + (dir / name).string());
    return out;
}

void dump_slice(std::ofstream& out, const HtfSlice& slice, bool header = true) {
    if (header) out << "s_re,s_im,block_row,block_col,harmonic_n,row,col,re,im\n";
    const int h = slice.order();
    for (int r = 0; r < 2 * h + 1; ++r) {
        for (int c = 0; c < 2 * h + 1; ++c) {
            const auto blk = slice.block(h - r, h - c);
            for (int i = 0; i < slice.output_dim(); ++i)
                for (int k = 0; k < slice.input_dim(); ++k)
                    out << format_sig(slice.s0().real()) << ',' << format_sig(slice.s0().imag())
                        << ',' << r << ',' << c << ',' << (c - r) << ',' << i << ',' << k << ','
                        << format_sig(blk(i, k).real()) << ',' << format_sig(blk(i, k).imag())
                        << '\n';
        }
    }
}

int run_htf(const std::string& model_path, const std::vector<std::string>& s_list, int h,
            const std::string& out_dir) {
    LtpStateSpace model = load_ltp_model(model_path);
    auto out = open_csv(out_dir, "htf.csv");
    bool first = true;
    for (const std::string& s_text : s_list) {
        HtfSlice slice = htf_evaluate(model, parse_complex(s_text), h);
        dump_slice(out, slice, first);
        first = false;
    }
    std::cout << "wrote " << (fs::path(out_dir) / "htf.csv").string() << " for "
              << s_list.size() << " evaluation point(s)\n";
    return 0;
}

FrameTransform make_transform(const std::string& name, double omega_p) {
    if (name == "identity") return FrameTransform::identity(omega_p);
    if (name == "rotation") return FrameTransform::rotation(omega_p);
    if (name == "complex") return FrameTransform::complex_mix(omega_p);
    if (name == "park") return FrameTransform::park(omega_p);
    throw input_error("unknown transform '" + name +
                      "' (expected identity|rotation|complex|park)");
}

int run_transform(const std::string& model_path, const std::string& transform_name,
                  const std::string& s_text, int h, double tol, const std::string& out_dir) {
    LtpStateSpace model = load_ltp_model(model_path);
    FrameTransform t = make_transform(transform_name, model.base_freq());
    HtfSlice slice = similarity(htf_evaluate(model, parse_complex(s_text), h), t);

    auto out = open_csv(out_dir, "transformed.csv");
    dump_slice(out, slice);

    DiagonalityReport block_rep = is_block_diagonal(slice, model.output_dim(), tol,
                                                    std::max(1, t.bandwidth()));
    auto report = open_csv(out_dir, "report.csv");
    report << "metric,value\n";
    report << "block_diagonal," << (block_rep.diagonal ? 1 : 0) << '\n';
    report << "block_residual," << format_sig(block_rep.residual) << '\n';
    report << "max_entry," << format_sig(block_rep.max_entry) << '\n';

    // Entry-level residual of the transformed center block.
    const auto center = slice.block(0, 0);
    double entry_res = 0.0, entry_max = 0.0;
    for (int i = 0; i < center.rows(); ++i)
        for (int k = 0; k < center.cols(); ++k) {
            entry_max = std::max(entry_max, std::abs(center(i, k)));
            if (i != k) entry_res = std::max(entry_res, std::abs(center(i, k)));
        }
    report << "entry_diagonal," << ((entry_res < tol * entry_max) ? 1 : 0) << '\n';
    report << "entry_residual," << format_sig(entry_res) << '\n';

    std::cout << "transform=" << transform_name
              << " block_diagonal=" << (block_rep.diagonal ? "true" : "false")
              << " block_residual=" << format_sig(block_rep.residual)
              << " entry_residual=" << format_sig(entry_res) << '\n';
    return 0;
}

void write_bode_csv(const fs::path& dir, const std::string& name, const BodeDataset& data) {
    auto out = open_csv(dir, name);
    out << "f_hz,gain_db,phase_deg,valid\n";
    for (std::size_t i = 0; i < data.frequencies_hz.size(); ++i)
        out << format_sig(data.frequencies_hz[i]) << ',' << format_sig(data.gain_db[i]) << ','
            << format_sig(data.phase_deg[i]) << ',' << (data.valid[i] ? 1 : 0) << '\n';
}

int run_stability(const std::string& params_path, const std::vector<double>& m_list,
                  const std::string& band_text, int points,
                  const std::optional<std::string>& critical_text,
                  const std::string& out_dir) {
    VsiParams base = load_vsi_params(params_path);
    Band band = parse_band(band_text);
    const std::vector<double> grid = default_grid_hz(band.lo, band.hi, points);

    auto report = open_csv(out_dir, "report.csv");
    report << "m,worst_margin_deg,worst_crossover_hz,n_crossovers,asym_peak,asym_peak_hz,"
              "small_gain_ok,jm_negative_ranges,verdict\n";

    for (std::size_t idx = 0; idx < m_list.size(); ++idx) {
        const VsiParams p = base.with_m(m_list[idx]);
        LoopDecomposition loops = decompose_loops(z_closed_form(p));
        const std::string tag = std::to_string(idx);
        write_bode_csv(out_dir, "sym_plus_" + tag + ".csv",
                       bode(loops.symmetric_plus, grid, loops.omega_base, "sym_plus"));
        write_bode_csv(out_dir, "sym_minus_" + tag + ".csv",
                       bode(loops.symmetric_minus, grid, loops.omega_base, "sym_minus"));
        write_bode_csv(out_dir, "asym_" + tag + ".csv",
                       bode(loops.asymmetric, grid, loops.omega_base, "asym"));

        PhaseMarginResult mp = phase_margin(loops.symmetric_plus, grid, loops.omega_base);
        PhaseMarginResult mm = phase_margin(loops.symmetric_minus, grid, loops.omega_base);
        PhaseMarginResult worst = mp;
        if (!mp.found || (mm.found && mm.worst_margin_deg < mp.worst_margin_deg)) worst = mm;
        SmallGainResult sg = small_gain_check(loops.asymmetric, grid, loops.omega_base);
        ZtClosedForm zt = z_closed_form(p);
        auto jm = [&zt](Complex s) { return jj * zt.M(s); };
        PassivityResult pv = passivity_check(jm, grid, loops.omega_base);

        std::string verdict;
        if (!worst.found)
            verdict = "stable_no_crossover";
        else
            verdict = worst.worst_margin_deg > 0.0 ? "stable" : "unstable";

        report << format_sig(m_list[idx]) << ','
               << (worst.found ? format_sig(worst.worst_margin_deg) : std::string("nan")) << ','
               << (worst.found ? format_sig(worst.worst_crossover_hz) : std::string("nan"))
               << ',' << (mp.crossovers.size() + mm.crossovers.size()) << ','
               << format_sig(sg.peak_gain) << ',' << format_sig(sg.peak_hz) << ','
               << (sg.satisfied ? 1 : 0) << ',' << pv.negative_real_ranges.size() << ','
               << verdict << '\n';

        std::cout << "m=" << format_sig(m_list[idx]);
        if (worst.found)
            std::cout << " worst_margin_deg=" << format_sig(worst.worst_margin_deg)
                      << " at_hz=" << format_sig(worst.worst_crossover_hz);
        else
            std::cout << " no_crossover";
        std::cout << " asym_peak=" << format_sig(sg.peak_gain) << " verdict=" << verdict
                  << '\n';
    }

    if (critical_text) {
        Band bracket = parse_band(*critical_text);
        CriticalGainResult crit = critical_droop_gain(base, bracket.lo, bracket.hi);
        std::cout << "m_crit=" << format_sig(crit.m_crit)
                  << " margin_deg=" << format_sig(crit.margin_at_crit_deg) << '\n';
        auto crit_csv = open_csv(out_dir, "critical.csv");
        crit_csv << "m_crit,margin_deg,iterations\n";
        crit_csv << format_sig(crit.m_crit) << ',' << format_sig(crit.margin_at_crit_deg)
                 << ',' << crit.iterations << '\n';
    }
    return 0;
}

int run_sweep(const std::string& params_path, const std::string& band_text, int points,
              bool simulate, const std::string& out_dir) {
    VsiParams params = load_vsi_params(params_path);
    Band band = parse_band(band_text);
    const std::vector<double> grid = default_grid_hz(band.lo, band.hi, points);
    ZtClosedForm zt = z_closed_form(params);

    auto out = open_csv(out_dir, "admittance.csv");
    out << "f_hz,entry,gain_db,phase_deg,source\n";
    const char* entries[4] = {"11", "12", "21", "22"};

    auto emit = [&](double f_hz, const CMatrix2& y, const char* source) {
        const Complex vals[4] = {y(0, 0), y(0, 1), y(1, 0), y(1, 1)};
        for (int k = 0; k < 4; ++k) {
            out << format_sig(f_hz) << ',' << entries[k] << ','
                << format_sig(20.0 * std::log10(std::abs(vals[k]))) << ','
                << format_sig(std::arg(vals[k]) * 180.0 / pi) << ',' << source << '\n';
        }
    };

    if (simulate) {
        SimConfig cfg;
        cfg.settle_time = 60.0 * params.pump_period_pu();
        SweepDataset data = sweep_admittance(params, grid, cfg);
        for (const SweepPoint& pt : data.points) {
            emit(pt.f_hz, pt.y_model, "model");
            if (pt.valid) emit(pt.f_hz, pt.y_measured, "simulation");
        }
    } else {
        for (double f : grid) {
            const Complex s = jj * (2.0 * pi * f / params.omega_base());
            emit(f, zt.admittance_2x2(s), "model");
        }
    }
    std::cout << "wrote " << (fs::path(out_dir) / "admittance.csv").string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"harmonic transfer function toolkit"};
    app.set_help_flag("--help", "print help");  // frees -h / --h for the order flag
    app.require_subcommand(1);

    std::string model_path, params_path, out_dir = ".", band = "0.1:1000";
    std::string transform_name = "identity", s_single = "0:0";
    std::vector<std::string> s_list;
    std::vector<double> m_list;
    std::optional<std::string> critical;
    int h = 6, points = 400;
    double tol = 1e-8;
    bool simulate = false;

    auto* c_htf = app.add_subcommand("htf", "evaluate HTF slices of an LTP model");
    c_htf->add_option("--model", model_path, "model file")->required();
    c_htf->add_option("--s", s_list, "evaluation points RE[:IM], repeatable")->required();
    c_htf->add_option("--h", h, "truncation order");
    c_htf->add_option("--out", out_dir, "output directory");

    auto* c_tr = app.add_subcommand("transform", "apply a frame transformation");
    c_tr->add_option("--model", model_path, "model file")->required();
    c_tr->add_option("--transform", transform_name, "identity|rotation|complex|park")
        ->required();
    c_tr->add_option("--s", s_single, "evaluation point RE[:IM]");
    c_tr->add_option("--h", h, "truncation order");
    c_tr->add_option("--tol", tol, "diagonality tolerance");
    c_tr->add_option("--out", out_dir, "output directory");

    auto* c_st = app.add_subcommand("stability", "loop margins and passivity report");
    c_st->add_option("--params", params_path, "VSI parameter file")->required();
    c_st->add_option("--m", m_list, "droop gains (absolute), repeatable")->required();
    c_st->add_option("--band", band, "frequency band LO:HI in Hz");
    c_st->add_option("--points", points, "grid points");
    std::string critical_text;
    auto* crit_opt =
        c_st->add_option("--find-critical", critical_text, "bisection bracket M_LO:M_HI");
    c_st->add_option("--out", out_dir, "output directory");

    auto* c_sw = app.add_subcommand("sweep", "admittance frequency sweep");
    c_sw->add_option("--params", params_path, "VSI parameter file")->required();
    c_sw->add_option("--band", band, "frequency band LO:HI in Hz");
    c_sw->add_option("--points", points, "grid points");
    c_sw->add_flag("--simulate", simulate, "also measure by time-domain simulation");
    c_sw->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (c_htf->parsed()) return run_htf(model_path, s_list, h, out_dir);
        if (c_tr->parsed())
            return run_transform(model_path, transform_name, s_single, h, tol, out_dir);
        if (c_st->parsed()) {
            if (crit_opt->count() > 0) critical = critical_text;
            return run_stability(params_path, m_list, band, points, critical, out_dir);
        }
        if (c_sw->parsed()) return run_sweep(params_path, band, points, simulate, out_dir);
    } catch (const input_error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const no_crossover_error& e) {
        std::cerr << "indeterminate: " << e.what() << '\n';
        return 4;
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
