#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ipdl/frontend.hpp"

int main(int argc, char** argv) {
  CLI::App app{"IPDL proof checker and concrete bound calculator"};
  app.require_subcommand(1);
  CLI::App* check = app.add_subcommand("check", "check every proof in a file and print the bound report");

  std::string file, report, concrete;
  ipdl::RunOptions opts;
  check->add_option("file", file, "source file")->required()->check(CLI::ExistingFile);
  check->add_option("--report", report, "also write the report to this file");
  check->add_flag("--trace", opts.trace, "dump tactic log and kernel derivation");
  check->add_option("--concrete", concrete, "k=v,... sizes, C_sem, C_adv, eta_sem, eps_<assumption>");
  std::string oracle;
  check->add_option("--oracle-check", oracle, "k=v,... parameter values for the semantic cross-check");
  check->add_option("--interp", opts.oracle_interp, "interpretation JSON; enables the semantic cross-check")->check(CLI::ExistingFile);
  check->add_option("--oracle-rounds", opts.oracle_rounds, "adversary round budget for --oracle-check");
  check->add_flag("--strategy-audit", opts.strategy_audit, "histogram of kernel rules used");
  check->add_flag("--stable", opts.stable, "omit timing for byte-stable output");

  CLI11_PARSE(app, argc, argv);
  if (!oracle.empty() && opts.oracle_interp.empty()) {
    std::cerr << "--oracle-check needs --interp\n";
    return 2;
  }

  try {
    if (!concrete.empty()) opts.concrete = ipdl::parse_assignments(concrete);
    if (!oracle.empty()) opts.oracle_params = ipdl::parse_assignments(oracle);
  } catch (const ipdl::Error& e) {
    std::cerr << "error[" << e.code() << "]: " << e.what() << "\n";
    return 2;
  }
  ipdl::BoundReport rep = ipdl::run_file(file, opts);
  std::cout << rep.text;
  if (!report.empty()) {
    std::ofstream out(report);
    if (!out) {
      std::cerr << "cannot write " << report << "\n";
      return 2;
    }
    out << rep.text;
  }
  return rep.exit_status;
}
