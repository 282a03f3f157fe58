// geoforms: batch invariants for normal-form hypersurface embeddings.
//
//   geoforms curvature spec.gf [--points N] [--out report.json]
//   geoforms forms spec.gf [--max-order K]
//   geoforms classify spec.gf [--max-order K] [--tol T]
//   geoforms yamabe spec.gf [--max-order K]
//   geoforms conformal-check spec.gf [--tol T]
//   geoforms selftest
//
// The JSON report goes to stdout (and to --out when given); diagnostics go
// to stderr. Exit codes: 0 success, 1 failed classification/verification,
// 2 spec syntax error, 3 semantic error.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "geoforms/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Riemannian and conformal hypersurface invariants for metrics "
               "in normal form"};
  app.require_subcommand(1);

  geoforms::RunFlags flags;
  std::string spec_path;

  const std::vector<std::string> commands = {
      "curvature", "forms", "classify", "yamabe", "conformal-check", "selftest"};
  const std::map<std::string, std::string> help = {
      {"curvature", "ambient curvature stack at the sample grid"},
      {"forms", "higher fundamental forms FF(2..K) and mean curvature"},
      {"classify", "product / fiber-like / base-like verdict at order K"},
      {"yamabe", "singular Yamabe expansion on a product metric"},
      {"conformal-check", "conformal forms, weight laws, Gauss-Schouten residual"},
      {"selftest", "run the built-in acceptance criteria"},
  };
  for (const std::string& name : commands) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    if (name != "selftest")
      sub->add_option("spec", spec_path, "metric spec file")->required();
    sub->add_option("--max-order", flags.max_order,
                    "highest fundamental-form / series order K");
    sub->add_option("--tol", flags.tol, "acceptance tolerance for residuals");
    sub->add_option("--points", flags.points,
                    "cap the sample grid at the first N points");
    sub->add_option("--out", flags.out, "also write the report to this file");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    std::optional<geoforms::MetricSpec> spec;
    if (!spec_path.empty()) spec = geoforms::read_spec(spec_path);
    geoforms::RunResult result = geoforms::run(command, spec, flags);
    std::cout << result.report;
    if (!flags.out.empty()) {
      std::ofstream out(flags.out);
      if (!out) {
        std::cerr << "geoforms: cannot write '" << flags.out << "'\n";
        return 3;
      }
      out << result.report;
    }
    return result.exit_code;
  } catch (const geoforms::CliError& e) {
    std::cerr << "geoforms: " << e.what() << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "geoforms: " << e.what() << "\n";
    return 3;
  }
}
