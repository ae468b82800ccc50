#include <CLI11.hpp>

#include "tlbethe/cli.hpp"

using tlbethe::cli::RunConfig;

namespace {

void add_shared_flags(CLI::App* sub, RunConfig& cfg, std::string& q_str,
                      std::string& branch_str) {
    sub->add_option("--N", cfg.N, "number of chain sites");
    sub->add_option("--Q", q_str, "deformation parameter, 're' or 're,im'");
    sub->add_option("--branch", branch_str, "quadratic-root branch: plus or minus");
    sub->add_option("--M", cfg.M, "number of magnons");
    sub->add_option("--seeds", cfg.seeds, "number of Newton starting points");
    sub->add_option("--rng-seed", cfg.rng_seed, "seed for all randomized draws");
    sub->add_option("--tol-identity", cfg.tol_identity, "tolerance for exact identities");
    sub->add_option("--tol-derivative", cfg.tol_derivative,
                    "tolerance for finite-difference comparisons");
    sub->add_option("--format", cfg.format, "output format: json or table")
        ->check(CLI::IsMember({"json", "table"}));
    sub->add_option("--out", cfg.out_path, "write output to this file instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification engine and Bethe solver for an open spin-1 chain"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string q_str = "1.1";
    std::string branch_str = "plus";
    std::vector<std::string> u_strs, v_strs;

    CLI::App* c_check = app.add_subcommand("check", "run the full identity suite");
    CLI::App* c_solve = app.add_subcommand("solve", "solve the Bethe equations");
    CLI::App* c_diag = app.add_subcommand("diagonalize", "dense Hamiltonian spectrum");
    CLI::App* c_slav =
        app.add_subcommand("slavnov", "determinant overlap against the direct product");
    CLI::App* c_report = app.add_subcommand("report", "checks plus a solve summary");

    for (CLI::App* sub : {c_check, c_solve, c_diag, c_slav, c_report})
        add_shared_flags(sub, cfg, q_str, branch_str);
    c_slav->add_option("--u", u_strs, "explicit on-shell rapidity, repeatable");
    c_slav->add_option("--v", v_strs, "explicit off-shell rapidity, repeatable");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        cfg.Q = tlbethe::cli::parse_complex(q_str);
        cfg.branch = tlbethe::cli::parse_branch(branch_str);
        for (const auto& s : u_strs) cfg.u_explicit.push_back(tlbethe::cli::parse_complex(s));
        for (const auto& s : v_strs) cfg.v_explicit.push_back(tlbethe::cli::parse_complex(s));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    if (c_check->parsed()) cfg.command = "check";
    if (c_solve->parsed()) cfg.command = "solve";
    if (c_diag->parsed()) cfg.command = "diagonalize";
    if (c_slav->parsed()) cfg.command = "slavnov";
    if (c_report->parsed()) cfg.command = "report";

    return tlbethe::cli::run(cfg);
}
