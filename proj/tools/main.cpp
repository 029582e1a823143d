// patchlam command-line tool. Talks to the core exclusively through the
// shared-library C API (patchlam/patchlam.h).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "patchlam/patchlam.h"

namespace {

// Exit codes: 0 ok, 2 parse/validation, 3 hypothesis precondition,
// 4 check found violations, 5 numeric failure.
int exit_code_for(pl_status status) {
    switch (status) {
        case PL_OK: return 0;
        case PL_ERROR_PARSE:
        case PL_ERROR_ARGUMENT:
        case PL_ERROR_NOT_FOUND: return 2;
        case PL_ERROR_HYPOTHESIS: return 3;
        case PL_ERROR_NUMERIC:
        case PL_ERROR_INTERNAL: return 5;
    }
    return 5;
}

[[noreturn]] void die(pl_status status) {
    std::cerr << "error: " << pl_last_error() << "\n";
    std::exit(exit_code_for(status));
}

struct OwnedString {
    char* ptr = nullptr;
    ~OwnedString() { pl_string_free(ptr); }
    std::string str() const { return ptr ? ptr : ""; }
};

struct OwnedModel {
    pl_model* ptr = nullptr;
    ~OwnedModel() { pl_model_free(ptr); }
};

struct ModelSource {
    std::string file;
    std::string catalog_name;
    std::vector<std::string> params;  // key=value

    void attach(CLI::App* cmd) {
        cmd->add_option("model", file, "model file (JSON)");
        cmd->add_option("--catalog", catalog_name, "use a built-in catalog model instead of a file");
        cmd->add_option("-p,--param", params, "catalog parameter override key=value (repeatable)");
    }

    pl_model* load() const {
        if (file.empty() == catalog_name.empty()) {
            std::cerr << "error: give either a model file or --catalog NAME\n";
            std::exit(2);
        }
        pl_model* model = nullptr;
        pl_status status;
        if (!file.empty()) {
            status = pl_model_load_file(file.c_str(), &model);
        } else {
            std::vector<std::string> names;
            std::vector<double> values;
            for (const auto& kv : params) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) {
                    std::cerr << "error: --param expects key=value, got '" << kv << "'\n";
                    std::exit(2);
                }
                names.push_back(kv.substr(0, eq));
                values.push_back(std::atof(kv.c_str() + eq + 1));
            }
            std::vector<const char*> name_ptrs;
            for (const auto& n : names) name_ptrs.push_back(n.c_str());
            status = pl_model_from_catalog(catalog_name.c_str(), name_ptrs.data(), values.data(),
                                           names.size(), &model);
        }
        if (status != PL_OK) die(status);
        return model;
    }
};

// Grid spec: either a comma list "0.5,1,2" or "lo:hi:count" (log-spaced).
std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double lo = 0, hi = 0;
        int count = 0;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &lo, &hi, &count) != 3 || count < 2 ||
            !(lo > 0) || !(hi > lo)) {
            std::cerr << "error: bad grid spec '" << spec << "' (want lo:hi:count, log-spaced)\n";
            std::exit(2);
        }
        for (int i = 0; i < count; ++i)
            out.push_back(std::pow(10.0, std::log10(lo) + (std::log10(hi) - std::log10(lo)) * i /
                                                              (count - 1)));
        return out;
    }
    std::string token;
    std::stringstream ss(spec);
    while (std::getline(ss, token, ',')) {
        if (!token.empty()) out.push_back(std::atof(token.c_str()));
    }
    if (out.empty()) {
        std::cerr << "error: empty grid spec '" << spec << "'\n";
        std::exit(2);
    }
    return out;
}

// m grids allow 0 (decoupled column); T grids must be positive.
std::vector<double> parse_grid(const std::string& spec, bool allow_zero) {
    std::vector<double> out = parse_grid(spec);
    for (double v : out) {
        if (v < 0.0 || (!allow_zero && v <= 0.0)) {
            std::cerr << "error: grid value " << v << " out of range in '" << spec << "'\n";
            std::exit(2);
        }
    }
    return out;
}

struct CheckFlags {
    int samples = 0;
    int perturbations = 0;
    double radius = 0.0;
    unsigned long long seed = 0;
    double convergence_tol = 0.0;
    double stability_tol = 0.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--samples", samples, "tau samples per smooth segment (default 33)");
        cmd->add_option("--perturbations", perturbations,
                        "random basin probes per sampled tau (default 16)");
        cmd->add_option("--radius", radius, "basin probe radius (default 1e-3)");
        cmd->add_option("--seed", seed, "seed for the basin probes (default 1729)");
        cmd->add_option("--convergence-tol", convergence_tol,
                        "endpoint distance counted as converged (default 1e-6)");
        cmd->add_option("--stability-tol", stability_tol,
                        "linear-stability margin on Jacobian spectra (default 1e-9)");
    }

    pl_check_options options() const {
        return {samples, perturbations, radius, seed, convergence_tol, stability_tol};
    }
};

void write_output(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) {
        std::cerr << "error: cannot write '" << path << "'\n";
        std::exit(2);
    }
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"growth rates of time-periodic patch models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(pl_version()));

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "growth rate Lambda(m,T) of one parameter point");
    ModelSource eval_src;
    eval_src.attach(eval);
    double eval_m = 1.0, eval_T = 1.0;
    eval->add_option("-m", eval_m, "migration strength")->capture_default_str();
    eval->add_option("-T", eval_T, "period")->capture_default_str();

    // ---- limits ----
    auto* limits = app.add_subcommand("limits", "asymptotic limits table with hypothesis flags");
    ModelSource limits_src;
    limits_src.attach(limits);
    double limits_m = 1.0;
    bool limits_force = false;
    limits->add_option("-m", limits_m, "migration strength for the m-dependent limits")
        ->capture_default_str();
    limits->add_flag("--force", limits_force,
                     "evaluate hypothesis-gated formulas even when unverified");

    // ---- check ----
    auto* check = app.add_subcommand("check", "H2/H3/H4 hypothesis reports with witnesses");
    ModelSource check_src;
    check_src.attach(check);
    double check_m = 1.0;
    CheckFlags check_flags;
    check->add_option("-m", check_m, "migration strength for the H3 check")->capture_default_str();
    check_flags.attach(check);

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "CSV of Lambda over an (m,T) grid");
    ModelSource sweep_src;
    sweep_src.attach(sweep);
    std::string sweep_m_grid = "0.01:1000:13", sweep_T_grid = "0.01:1000:13", sweep_out;
    int sweep_jobs = 0;
    sweep->add_option("--m-grid", sweep_m_grid, "m grid: comma list or lo:hi:count (log-spaced)")
        ->capture_default_str();
    sweep->add_option("--T-grid", sweep_T_grid, "T grid: comma list or lo:hi:count (log-spaced)")
        ->capture_default_str();
    sweep->add_option("-o,--output", sweep_out, "output CSV path (default stdout)");
    sweep->add_option("--jobs", sweep_jobs, "parallel workers (default PATCHLAM_JOBS or 1)");

    // ---- dig ----
    auto* dig = app.add_subcommand("dig", "dispersal-induced growth scan");
    ModelSource dig_src;
    dig_src.attach(dig);
    std::string dig_m_grid = "0.01:1000:13", dig_T_grid = "0.01:1000:13";
    CheckFlags dig_flags;
    dig->add_option("--m-grid", dig_m_grid)->capture_default_str();
    dig->add_option("--T-grid", dig_T_grid)->capture_default_str();
    dig_flags.attach(dig);

    // ---- did ----
    auto* did = app.add_subcommand("did", "dispersal-induced decay scan / construction");
    ModelSource did_src;
    did_src.attach(did);
    std::string did_m_grid = "0.01:1000:13", did_T_grid = "0.01:1000:13", did_out;
    double did_epsilon = 1e-3;
    CheckFlags did_flags;
    did->add_option("--m-grid", did_m_grid)->capture_default_str();
    did->add_option("--T-grid", did_T_grid)->capture_default_str();
    did->add_option("--epsilon", did_epsilon,
                    "extra inflow for patches that never attain the minimum")
        ->capture_default_str();
    did->add_option("-o,--output", did_out, "write the constructed migration model file here");
    did_flags.attach(did);

    // ---- trajectory ----
    auto* traj = app.add_subcommand("trajectory", "per-period trajectory CSV");
    ModelSource traj_src;
    traj_src.attach(traj);
    double traj_m = 1.0, traj_T = 1.0;
    int traj_periods = 100;
    std::string traj_x0, traj_out;
    traj->add_option("-m", traj_m)->capture_default_str();
    traj->add_option("-T", traj_T)->capture_default_str();
    traj->add_option("--periods", traj_periods)->capture_default_str();
    traj->add_option("--x0", traj_x0, "initial state, comma list (default uniform)");
    traj->add_option("-o,--output", traj_out, "output CSV path (default stdout)");

    // ---- catalog ----
    auto* cat = app.add_subcommand("catalog", "list built-in models or export one as a file");
    std::string cat_export, cat_out;
    std::vector<std::string> cat_params;
    cat->add_option("--export", cat_export, "catalog entry to export as a model file");
    cat->add_option("-o,--output", cat_out, "output path (default stdout)");
    cat->add_option("-p,--param", cat_params, "parameter override key=value (repeatable)");

    CLI11_PARSE(app, argc, argv);

    if (eval->parsed()) {
        OwnedModel model{eval_src.load()};
        const int n = pl_model_patch_count(model.ptr);
        std::vector<double> pi(static_cast<size_t>(n));
        pl_growth_result r{};
        if (pl_status s = pl_growth_rate(model.ptr, eval_m, eval_T, &r, pi.data()); s != PL_OK)
            die(s);
        std::printf("m: %.17g\nT: %.17g\n", eval_m, eval_T);
        std::printf("lambda: %.12g\n", r.lambda);
        std::printf("mu: %.12g   (log mu: %.12g)\n", r.mu, r.log_mu);
        std::printf("pi:");
        for (int i = 0; i < n; ++i) std::printf(" %.12g", pi[static_cast<size_t>(i)]);
        std::printf("\nsigma: %.12g\nchi: %.12g\n", r.sigma, r.chi);
        if (!r.decoupled)
            std::printf("monodromy power X^n strictly positive: %s\n",
                        r.eventually_positive ? "yes" : "no");
        if (r.decoupled)
            std::printf("note: m = 0, patches decoupled; lambda is max_i of the mean growth "
                        "rates\n");
        return 0;
    }

    if (limits->parsed()) {
        OwnedModel model{limits_src.load()};
        pl_limit_result r{};
        OwnedString text;
        if (pl_status s = pl_limits(model.ptr, limits_m, limits_force, &r, &text.ptr); s != PL_OK)
            die(s);
        std::cout << text.str();
        return 0;
    }

    if (check->parsed()) {
        OwnedModel model{check_src.load()};
        const pl_check_options options = check_flags.options();
        bool all_verified = true;
        for (int h : {2, 3, 4}) {
            pl_check_result r{};
            OwnedString text;
            if (pl_status s = pl_check(model.ptr, h, check_m, &options, &r, &text.ptr); s != PL_OK)
                die(s);
            std::cout << text.str() << "\n";
            all_verified = all_verified && r.verdict == PL_VERIFIED_SAMPLED;
        }
        return all_verified ? 0 : 4;
    }

    if (sweep->parsed()) {
        OwnedModel model{sweep_src.load()};
        const auto ms = parse_grid(sweep_m_grid, /*allow_zero=*/true);
        const auto Ts = parse_grid(sweep_T_grid, /*allow_zero=*/false);
        OwnedString csv;
        if (pl_status s = pl_sweep_csv(model.ptr, ms.data(), ms.size(), Ts.data(), Ts.size(),
                                       sweep_jobs, &csv.ptr);
            s != PL_OK)
            die(s);
        write_output(csv.str(), sweep_out);
        return 0;
    }

    if (dig->parsed()) {
        OwnedModel model{dig_src.load()};
        const auto ms = parse_grid(dig_m_grid, /*allow_zero=*/true);
        const auto Ts = parse_grid(dig_T_grid, /*allow_zero=*/false);
        const pl_check_options options = dig_flags.options();
        pl_phenomenon_result r{};
        OwnedString text;
        if (pl_status s = pl_dig_scan(model.ptr, ms.data(), ms.size(), Ts.data(), Ts.size(),
                                      &options, &r, &text.ptr);
            s != PL_OK)
            die(s);
        std::cout << text.str();
        return 0;
    }

    if (did->parsed()) {
        OwnedModel model{did_src.load()};
        const auto ms = parse_grid(did_m_grid, /*allow_zero=*/true);
        const auto Ts = parse_grid(did_T_grid, /*allow_zero=*/false);
        const pl_check_options options = did_flags.options();
        pl_phenomenon_result r{};
        OwnedString text, constructed;
        if (pl_status s = pl_did_scan(model.ptr, ms.data(), ms.size(), Ts.data(), Ts.size(),
                                      did_epsilon, &options, &r, &constructed.ptr, &text.ptr);
            s != PL_OK)
            die(s);
        std::cout << text.str();
        if (constructed.ptr) {
            if (did_out.empty()) {
                std::cout << "constructed model:\n" << constructed.str();
            } else {
                write_output(constructed.str(), did_out);
                std::cout << "constructed model written to " << did_out << "\n";
            }
        }
        return 0;
    }

    if (traj->parsed()) {
        OwnedModel model{traj_src.load()};
        const int n = pl_model_patch_count(model.ptr);
        std::vector<double> x0;
        if (traj_x0.empty()) {
            x0.assign(static_cast<size_t>(n), 1.0 / n);
        } else {
            x0 = parse_grid(traj_x0);
            if (static_cast<int>(x0.size()) != n) {
                std::cerr << "error: --x0 needs " << n << " entries\n";
                return 2;
            }
        }
        OwnedString csv;
        if (pl_status s = pl_trajectory_csv(model.ptr, traj_m, traj_T, x0.data(), x0.size(),
                                            traj_periods, &csv.ptr);
            s != PL_OK)
            die(s);
        write_output(csv.str(), traj_out);
        return 0;
    }

    if (cat->parsed()) {
        if (cat_export.empty()) {
            for (size_t i = 0; i < pl_catalog_count(); ++i) {
                std::printf("%-24s %s\n", pl_catalog_name(i), pl_catalog_summary(i));
                for (size_t j = 0; j < pl_catalog_param_count(pl_catalog_name(i)); ++j) {
                    const char* pname = nullptr;
                    double pdefault = 0;
                    pl_catalog_param(pl_catalog_name(i), j, &pname, &pdefault);
                    std::printf("    %s = %g\n", pname, pdefault);
                }
            }
            return 0;
        }
        std::vector<std::string> names;
        std::vector<double> values;
        for (const auto& kv : cat_params) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                std::cerr << "error: --param expects key=value\n";
                return 2;
            }
            names.push_back(kv.substr(0, eq));
            values.push_back(std::atof(kv.c_str() + eq + 1));
        }
        std::vector<const char*> name_ptrs;
        for (const auto& s : names) name_ptrs.push_back(s.c_str());
        pl_model* model = nullptr;
        if (pl_status s = pl_model_from_catalog(cat_export.c_str(), name_ptrs.data(),
                                                values.data(), names.size(), &model);
            s != PL_OK)
            die(s);
        OwnedModel owned{model};
        OwnedString json;
        if (pl_status s = pl_model_to_json(model, &json.ptr); s != PL_OK) die(s);
        write_output(json.str(), cat_out);
        return 0;
    }

    return 0;
}
