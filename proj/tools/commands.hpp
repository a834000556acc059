#pragma once

// Subcommand implementations. Each writes its report to `out`, diagnostics to
// `err`, and returns the process exit code.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "quadsolve/quadsolve.hpp"
#include "spec_document.hpp"

namespace quadsolve::cli {

enum ExitCode : int { exit_ok = 0, exit_domain = 1, exit_usage = 2 };

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

// ---------------------------------------------------------------------------
// Report fragments
// ---------------------------------------------------------------------------

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json mat_to_json(const Mat2& m) {
  return json::array({json::array({complex_to_json(m[0][0]), complex_to_json(m[0][1])}),
                      json::array({complex_to_json(m[1][0]), complex_to_json(m[1][1])})});
}

inline json constraints_to_json(const ConstraintResiduals& r) {
  return {{"residual_a", complex_to_json(r.r1)},   {"residual_b", complex_to_json(r.r2)},
          {"scale_a", r.scale1},                   {"scale_b", r.scale2},
          {"relative_a", r.relative1()},           {"relative_b", r.relative2()},
          {"satisfied", r.satisfied}};
}

inline json decomposition_to_json(const Decomposition& d) {
  return {{"branch", to_string(d.branch)},
          {"beta", complex_to_json(d.beta)},
          {"b", mat_to_json(d.b)},
          {"rho", json::array({complex_to_json(d.rho.rho1), complex_to_json(d.rho.rho2)})},
          {"delta", complex_to_json(d.delta)},
          {"round_trip_residual", d.round_trip_residual}};
}

inline json diagnostics_to_json(const InversionDiagnostics& d) {
  json c = json::array();
  for (const auto& v : d.C) c.push_back(complex_to_json(v));
  return {{"stage", d.stage},
          {"beta", complex_to_json(d.beta)},
          {"alpha_plus", coefficients_to_json(d.alpha[0])},
          {"alpha_minus", coefficients_to_json(d.alpha[1])},
          {"B110", complex_to_json(d.B110)},
          {"B220", complex_to_json(d.B220)},
          {"B221", complex_to_json(d.B221)},
          {"C", c},
          {"c3_residual", d.c3_residual},
          {"b221_residual", d.b221_residual},
          {"b21_free", d.b21_free},
          {"linear_b21", d.linear_b21}};
}

inline json error_to_json(const Error& e) { return {{"kind", to_string(e.kind())}, {"message", e.what()}}; }

/// Constraint report with the inversion error that stopped the pipeline.
inline json failure_report(const SpecDocument& doc, const InversionError& e) {
  return {{"constraints", constraints_to_json(constraint_residuals(doc.sys, doc.tol))},
          {"error", error_to_json(e)},
          {"diagnostics", diagnostics_to_json(e.diagnostics())}};
}

inline void write_json(std::ostream& os, const json& j) { os << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------
// check / invert
// ---------------------------------------------------------------------------

inline int cmd_check(const SpecDocument& doc, Streams io) {
  const auto cons = constraint_residuals(doc.sys, doc.tol);
  json rep = {{"constraints", constraints_to_json(cons)}, {"satisfied", cons.satisfied}};
  if (cons.satisfied) {
    try {
      const auto inv = decompose(doc.sys, doc.tol);
      rep["diagnostics"] = diagnostics_to_json(inv.diagnostics);
      rep["branches"] = json::array({decomposition_to_json(inv.branches[0]), decomposition_to_json(inv.branches[1])});
    } catch (const InversionError& e) {
      rep["error"] = error_to_json(e);
      rep["diagnostics"] = diagnostics_to_json(e.diagnostics());
      io.err << "inversion stopped: " << e.what() << '\n';
    }
  }
  write_json(io.out, rep);
  return cons.satisfied ? exit_ok : exit_domain;
}

inline int cmd_invert(const SpecDocument& doc, Streams io) {
  try {
    const auto inv = decompose(doc.sys, doc.tol);
    write_json(io.out, {{"branches", json::array({decomposition_to_json(inv.branches[0]),
                                                  decomposition_to_json(inv.branches[1])})},
                        {"diagnostics", diagnostics_to_json(inv.diagnostics)}});
    return exit_ok;
  } catch (const InversionError& e) {
    io.err << "inversion failed: " << e.what() << '\n';
    write_json(io.out, failure_report(doc, e));
    return exit_domain;
  }
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

enum class OutputFormat { csv, doc };

struct SolveCommand {
  double t_start = 0.0;
  double t_end = 0.0;
  double t_step = 0.0;
  Branch branch = Branch::plus;
  OutputFormat format = OutputFormat::csv;
};

struct SkippedRow {
  double t;
  std::string reason;
};

/// Writes x(t) on the grid t_start + k t_step <= t_end. Grid points within
/// sing_tol max(1, t_s) of a singular time t_s, or where the closed form is
/// undefined, are skipped.
inline int cmd_solve(const SpecDocument& doc, const SolveCommand& cmd, Streams io) {
  if (!doc.x0) {
    io.err << "solve: the document has no x0\n";
    return exit_usage;
  }
  if (!(cmd.t_step > 0.0) || !(cmd.t_end >= cmd.t_start) || !std::isfinite(cmd.t_end) || cmd.t_start < 0.0) {
    io.err << "solve: need 0 <= t-start <= t-end and t-step > 0\n";
    return exit_usage;
  }
  ClosedFormTrajectory traj;
  try {
    SolveOptions opts;
    opts.branch = cmd.branch;
    opts.tol = doc.tol;
    if (cmd.t_end > 0.0) opts.horizon = cmd.t_end;
    traj = solve_ivp(doc.sys, *doc.x0, opts);
  } catch (const InversionError& e) {
    io.err << "solve: system is not solvable: " << e.what() << '\n';
    write_json(io.out, failure_report(doc, e));
    return exit_domain;
  } catch (const Error& e) {
    io.err << "solve: " << e.what() << '\n';
    return exit_domain;
  }

  const auto steps = static_cast<long long>(std::floor((cmd.t_end - cmd.t_start) / cmd.t_step * (1.0 + 1e-12)));
  std::vector<std::array<double, 5>> rows;
  std::vector<SkippedRow> skipped;
  for (long long k = 0; k <= steps; ++k) {
    const double t = cmd.t_start + static_cast<double>(k) * cmd.t_step;
    bool in_band = false;
    for (double ts : traj.t_singular) {
      if (std::abs(t - ts) <= doc.tol.sing_tol * std::max(1.0, ts)) in_band = true;
    }
    if (in_band) {
      skipped.push_back({t, "within the singular band"});
      continue;
    }
    try {
      const Point x = traj(t);
      if (!is_finite(x)) {
        skipped.push_back({t, "non-finite value"});
        continue;
      }
      rows.push_back({t, x[0].real(), x[0].imag(), x[1].real(), x[1].imag()});
    } catch (const Error& e) {
      skipped.push_back({t, e.what()});
    }
  }

  if (cmd.format == OutputFormat::csv) {
    io.out << "t,re_x1,im_x1,re_x2,im_x2\n";
    for (const auto& r : rows) {
      io.out << format_g17(r[0]) << ',' << format_g17(r[1]) << ',' << format_g17(r[2]) << ',' << format_g17(r[3])
             << ',' << format_g17(r[4]) << '\n';
    }
    io.err << "singular_times:";
    for (double ts : traj.t_singular) io.err << ' ' << format_g17(ts);
    io.err << '\n';
    for (const auto& s : skipped) io.err << "skipped t=" << format_g17(s.t) << ": " << s.reason << '\n';
  } else {
    json jrows = json::array();
    for (const auto& r : rows) jrows.push_back(json::array({r[0], r[1], r[2], r[3], r[4]}));
    json jskip = json::array();
    for (const auto& s : skipped) jskip.push_back({{"t", s.t}, {"reason", s.reason}});
    write_json(io.out, {{"branch", to_string(cmd.branch)},
                        {"columns", json::array({"t", "re_x1", "im_x1", "re_x2", "im_x2"})},
                        {"rows", jrows},
                        {"singular_times", traj.t_singular},
                        {"skipped", jskip}});
    for (const auto& s : skipped) io.err << "skipped t=" << format_g17(s.t) << ": " << s.reason << '\n';
  }
  return exit_ok;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GeneratedSystem {
  CanonicalParams rho;
  Mat2 b;
  QuadraticSystem sys;
  Point x0;
};

/// rho, b entries and x0 components uniform in the unit disc; b is redrawn
/// until |det b| >= 0.1.
inline GeneratedSystem random_solvable_system(Rng& rng) {
  GeneratedSystem g;
  g.rho = {rng.in_disc(), rng.in_disc()};
  do {
    g.b = {{{rng.in_disc(), rng.in_disc()}, {rng.in_disc(), rng.in_disc()}}};
  } while (std::abs(det(g.b)) < 0.1);
  g.sys = forward_map(g.rho, linear_change_from_b(g.b));
  g.x0 = {rng.in_disc(), rng.in_disc()};
  return g;
}

struct GenerateCommand {
  std::optional<CanonicalParams> rho;
  std::optional<Mat2> b;
  std::optional<std::uint64_t> seed;
  int count = 1;
  std::optional<Point> x0;
};

inline json generated_to_json(const GeneratedSystem& g, bool with_x0) {
  SpecDocument doc;
  doc.sys = g.sys;
  if (with_x0) doc.x0 = g.x0;
  json j = spec_to_json(doc);
  j["generator"] = {{"rho", json::array({complex_to_json(g.rho.rho1), complex_to_json(g.rho.rho2)})},
                    {"b", mat_to_json(g.b)}};
  return j;
}

inline int cmd_generate(const GenerateCommand& cmd, Streams io) {
  if (cmd.count < 1) {
    io.err << "generate: count must be positive\n";
    return exit_usage;
  }
  std::vector<json> docs;
  if (cmd.seed) {
    if (cmd.rho || cmd.b) {
      io.err << "generate: --seed excludes --rho and --b\n";
      return exit_usage;
    }
    Rng rng(*cmd.seed);
    for (int i = 0; i < cmd.count; ++i) {
      auto g = random_solvable_system(rng);
      if (cmd.x0) g.x0 = *cmd.x0;
      docs.push_back(generated_to_json(g, true));
    }
  } else {
    if (!cmd.rho || !cmd.b) {
      io.err << "generate: need either --seed or both --rho and --b\n";
      return exit_usage;
    }
    if (cmd.count != 1) {
      io.err << "generate: --count applies to seeded generation only\n";
      return exit_usage;
    }
    GeneratedSystem g;
    g.rho = *cmd.rho;
    g.b = *cmd.b;
    try {
      g.sys = forward_map(g.rho, linear_change_from_b(g.b));
    } catch (const Error& e) {
      io.err << "generate: " << e.what() << '\n';
      return exit_domain;
    }
    if (cmd.x0) g.x0 = *cmd.x0;
    docs.push_back(generated_to_json(g, cmd.x0.has_value()));
  }
  write_json(io.out, docs.size() == 1 ? docs.front() : json(docs));
  return exit_ok;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct ValidateCommand {
  std::optional<double> t_end;
  int samples = 50;
  Branch branch = Branch::plus;
  bool mutate = false;  ///< test hook: flip the sign of Delta in the exponent only
};

inline int cmd_validate(const SpecDocument& doc, const ValidateCommand& cmd, Streams io) {
  if (!doc.x0) {
    io.err << "validate: the document has no x0\n";
    return exit_usage;
  }
  if (cmd.samples < 2 || (cmd.t_end && !(*cmd.t_end > 0.0))) {
    io.err << "validate: need samples >= 2 and t-end > 0\n";
    return exit_usage;
  }
  try {
    SolveOptions opts;
    opts.branch = cmd.branch;
    opts.tol = doc.tol;
    if (cmd.t_end) opts.horizon = *cmd.t_end;
    auto traj = solve_ivp(doc.sys, *doc.x0, opts);
    const auto t_sing = traj.first_singularity();
    double end = 0.5 * t_sing.value_or(traj.horizon);
    if (cmd.t_end) {
      if (t_sing && *t_sing <= *cmd.t_end) {
        io.err << "validate: singularity at t=" << format_g17(*t_sing) << ", comparing on [0, "
               << format_g17(end) << "]\n";
      } else {
        end = *cmd.t_end;
      }
    }
    if (cmd.mutate) traj.canonical.delta = -traj.canonical.delta;

    const auto numeric = integrate(doc.sys, *doc.x0, end);
    const double oracle_dev = compare_trajectories(traj, 0.0, end, numeric, cmd.samples);
    std::vector<double> ts;
    for (int i = 0; i < 20; ++i) ts.push_back(end * i / 19.0);
    const double branch_dev = branch_equivalence_check(doc.sys, *doc.x0, ts, doc.tol);
    const bool pass = oracle_dev <= doc.tol.oracle_tol && branch_dev <= doc.tol.oracle_tol;
    write_json(io.out, {{"t_end", end},
                        {"first_singularity", t_sing ? json(*t_sing) : json(nullptr)},
                        {"oracle_deviation", oracle_dev},
                        {"oracle_termination", to_string(numeric.terminated)},
                        {"oracle_last_time", numeric.last_time},
                        {"branch_deviation", branch_dev},
                        {"oracle_tol", doc.tol.oracle_tol},
                        {"pass", pass}});
    return pass ? exit_ok : exit_domain;
  } catch (const InversionError& e) {
    io.err << "validate: system is not solvable: " << e.what() << '\n';
    write_json(io.out, failure_report(doc, e));
    return exit_domain;
  } catch (const Error& e) {
    io.err << "validate: " << e.what() << '\n';
    return exit_domain;
  }
}

// ---------------------------------------------------------------------------
// lift / iso
// ---------------------------------------------------------------------------

inline int cmd_lift(const SpecDocument& doc, Streams io) {
  if (!doc.lift) {
    io.err << "lift: the document has no lift block\n";
    return exit_usage;
  }
  const auto ls = lift(doc.sys, *doc.lift);
  const auto cons = constraint_residuals(doc.sys, doc.tol);
  write_json(io.out, {{"eta", complex_to_json(ls.eta)},
                      {"zbar", point_to_json(ls.zbar)},
                      {"c", coefficients_to_json(ls.base.c)},
                      {"d", coefficients_to_json(ls.d)},
                      {"base_satisfied", cons.satisfied}});
  return exit_ok;
}

struct IsoCommand {
  double omega = 0.0;
  std::int64_t max_den = 64;
  bool verify = false;
};

/// Periodicity run for eta = i omega: the closed form and the integrator
/// must both return to z(0) after one period.
struct PeriodCheck {
  bool singular_free = false;
  double closed_return = 0.0;   ///< |z(T) - z(0)| / (1 + |z(0)|), closed form
  double oracle_return = 0.0;   ///< the same for the integrator
  bool pass = false;
};

inline PeriodCheck verify_period(const QuadraticSystem& sys, const Point& zbar, double omega, const Point& z0,
                                 double period, const Tolerances& tol) {
  const auto ls = lift(sys, {zbar, Complex{0.0, omega}});
  SolveOptions opts;
  opts.tol = tol;
  opts.horizon = period;
  const auto traj = solve_lifted(ls, z0, opts);
  PeriodCheck pc;
  pc.singular_free = traj.t_singular.empty();
  if (!pc.singular_free) return pc;
  const double scale = 1.0 + norm(z0);
  pc.closed_return = norm(traj(period) - z0) / scale;
  const auto numeric = integrate(ls, z0, period);
  pc.oracle_return = numeric.terminated == Termination::reached_t_end
                         ? norm(numeric.states.back() - z0) / scale
                         : std::numeric_limits<double>::infinity();
  pc.pass = pc.closed_return <= 1e-6 && pc.oracle_return <= 1e-6;
  return pc;
}

inline int cmd_iso(const SpecDocument& doc, const IsoCommand& cmd, Streams io) {
  if (cmd.omega == 0.0 || !std::isfinite(cmd.omega)) {
    io.err << "iso: omega must be finite and nonzero\n";
    return exit_usage;
  }
  if (cmd.max_den < 1) {
    io.err << "iso: max-den must be >= 1\n";
    return exit_usage;
  }
  try {
    const auto rep = isochrony_check(doc.sys, cmd.omega, cmd.max_den, doc.tol);
    json j = {{"delta", complex_to_json(rep.delta)},
              {"omega", rep.omega},
              {"rational", rep.rational ? json{{"num", rep.rational->num}, {"den", rep.rational->den}} : json(nullptr)},
              {"period", rep.period ? json(*rep.period) : json(nullptr)},
              {"isochronous", rep.isochronous}};
    bool ok = rep.isochronous;
    if (cmd.verify && rep.isochronous) {
      const Point zbar = doc.lift ? doc.lift->zbar : Point{};
      const Point z0 = doc.x0.value_or(zbar + Point{Complex{0.1}, Complex{0.1}});
      const auto pc = verify_period(doc.sys, zbar, cmd.omega, z0, *rep.period, doc.tol);
      j["verification"] = {{"z0", point_to_json(z0)},
                           {"singular_free", pc.singular_free},
                           {"closed_return", pc.closed_return},
                           {"oracle_return", pc.oracle_return},
                           {"pass", pc.pass}};
      if (!pc.singular_free) io.err << "iso: the trajectory is singular within one period\n";
      ok = pc.pass;
    }
    write_json(io.out, j);
    return ok ? exit_ok : exit_domain;
  } catch (const InversionError& e) {
    io.err << "iso: system is not solvable: " << e.what() << '\n';
    write_json(io.out, failure_report(doc, e));
    return exit_domain;
  } catch (const Error& e) {
    io.err << "iso: " << e.what() << '\n';
    return exit_domain;
  }
}

}  // namespace quadsolve::cli
