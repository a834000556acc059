#pragma once

// Argument parsing and dispatch for the quadsolve executable.

#include <algorithm>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "spec_document.hpp"

namespace quadsolve::cli {

/// Splits "a;b;c" and parses each part as a complex literal.
inline std::vector<Complex> parse_complex_list(const std::string& text, std::size_t expected, const char* flag) {
  std::vector<Complex> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) out.push_back(parse_complex(part));
  if (out.size() != expected) {
    throw SpecError(std::string(flag) + ": expected " + std::to_string(expected) + " ';'-separated values");
  }
  return out;
}

inline Branch parse_branch(const std::string& s) { return s == "minus" ? Branch::minus : Branch::plus; }

/// Runs the CLI on args (program name excluded) and returns the exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact solver for two-dimensional homogeneous quadratic ODE systems", "quadsolve"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<double> eq_tol, sing_tol, oracle_tol;
  app.add_option("--eq-tol", eq_tol, "equality tolerance");
  app.add_option("--sing-tol", sing_tol, "singularity tolerance");
  app.add_option("--oracle-tol", oracle_tol, "closed form vs integrator tolerance");

  std::string spec_path;
  std::string branch = "plus";
  const std::vector<std::string> branches{"plus", "minus"};

  auto* check = app.add_subcommand("check", "solvability constraints and inversion diagnostics");
  check->add_option("spec", spec_path, "system document")->required();

  auto* invert = app.add_subcommand("invert", "both decomposition branches");
  invert->add_option("spec", spec_path, "system document")->required();

  SolveCommand solve_cmd;
  std::string format = "csv";
  auto* solve = app.add_subcommand("solve", "closed-form trajectory on a time grid");
  solve->add_option("spec", spec_path, "system document")->required();
  solve->add_option("--t-start", solve_cmd.t_start, "first grid time");
  solve->add_option("--t-end", solve_cmd.t_end, "last grid time")->required();
  solve->add_option("--t-step", solve_cmd.t_step, "grid spacing")->required();
  solve->add_option("--branch", branch, "decomposition branch")->check(CLI::IsMember(branches));
  solve->add_option("--format", format, "csv or doc")->check(CLI::IsMember({"csv", "doc"}));

  GenerateCommand gen_cmd;
  std::string rho_text, b_text, x0_text;
  std::uint64_t seed = 0;
  auto* generate = app.add_subcommand("generate", "solvable systems from (rho, b) or a seed");
  generate->add_option("--rho", rho_text, "\"rho1;rho2\", each re[,im]");
  generate->add_option("--b", b_text, "\"b11;b12;b21;b22\", each re[,im]");
  auto* seed_opt = generate->add_option("--seed", seed, "random seed");
  generate->add_option("--count", gen_cmd.count, "number of seeded systems");
  generate->add_option("--x0", x0_text, "\"x1;x2\", each re[,im]");

  ValidateCommand val_cmd;
  std::optional<double> val_t_end;
  auto* validate = app.add_subcommand("validate", "closed form against the integrator and across branches");
  validate->add_option("spec", spec_path, "system document")->required();
  validate->add_option("--t-end", val_t_end, "comparison horizon");
  validate->add_option("--samples", val_cmd.samples, "comparison samples");
  validate->add_option("--branch", branch, "decomposition branch")->check(CLI::IsMember(branches));
  validate->add_flag("--mutate", val_cmd.mutate)->group("");

  auto* lift_sc = app.add_subcommand("lift", "coefficients of the nonhomogeneous lift");
  lift_sc->add_option("spec", spec_path, "system document with a lift block")->required();

  IsoCommand iso_cmd;
  auto* iso = app.add_subcommand("iso", "isochrony of the lift with eta = i omega");
  iso->add_option("spec", spec_path, "system document")->required();
  iso->add_option("--omega", iso_cmd.omega, "angular frequency")->required();
  iso->add_option("--max-den", iso_cmd.max_den, "largest denominator for rational Delta");
  iso->add_flag("--verify", iso_cmd.verify, "integrate one period and check the return");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (generate->parsed()) {
      if (!rho_text.empty()) {
        const auto r = parse_complex_list(rho_text, 2, "--rho");
        gen_cmd.rho = CanonicalParams{r[0], r[1]};
      }
      if (!b_text.empty()) {
        const auto b = parse_complex_list(b_text, 4, "--b");
        gen_cmd.b = Mat2{{{b[0], b[1]}, {b[2], b[3]}}};
      }
      if (!x0_text.empty()) {
        const auto x = parse_complex_list(x0_text, 2, "--x0");
        gen_cmd.x0 = Point{x[0], x[1]};
      }
      if (seed_opt->count() > 0) gen_cmd.seed = seed;
      return cmd_generate(gen_cmd, {out, err});
    }

    SpecDocument doc = load_spec(spec_path);
    if (eq_tol) doc.tol.eq_tol = *eq_tol;
    if (sing_tol) doc.tol.sing_tol = *sing_tol;
    if (oracle_tol) doc.tol.oracle_tol = *oracle_tol;
    try {
      doc.tol.validate();
    } catch (const Error& e) {
      throw SpecError(e.what());
    }

    const Streams io{out, err};
    if (check->parsed()) return cmd_check(doc, io);
    if (invert->parsed()) return cmd_invert(doc, io);
    if (solve->parsed()) {
      solve_cmd.branch = parse_branch(branch);
      solve_cmd.format = format == "doc" ? OutputFormat::doc : OutputFormat::csv;
      return cmd_solve(doc, solve_cmd, io);
    }
    if (validate->parsed()) {
      val_cmd.branch = parse_branch(branch);
      val_cmd.t_end = val_t_end;
      return cmd_validate(doc, val_cmd, io);
    }
    if (lift_sc->parsed()) return cmd_lift(doc, io);
    if (iso->parsed()) return cmd_iso(doc, iso_cmd, io);
  } catch (const SpecError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
  return exit_usage;
}

}  // namespace quadsolve::cli
