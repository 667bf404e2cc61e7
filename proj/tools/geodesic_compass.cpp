// geodesic-compass: evaluate the closed-form motion statistics on parameter
// grids, run seeded Monte Carlo experiments with the analytic value attached,
// and run the library's verification battery.
//
// Exit codes: 0 success, 1 usage error (bad flags, bad ranges, unwritable
// output), 2 verification failure, 3 numeric failure (series truncation or
// quadrature accuracy loss).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geocompass/closed_form.hpp"
#include "geocompass/model.hpp"
#include "geocompass/sampler.hpp"
#include "geocompass/special.hpp"
#include "geocompass/verify.hpp"

namespace {

using namespace geocompass;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Cell {
  std::string text;
  bool quoted = false;
  bool null = false;
};

Cell num(double v) { return {fmt17(v), false, false}; }
Cell num(long long v) { return {std::to_string(v), false, false}; }
Cell num(std::uint64_t v) { return {std::to_string(v), false, false}; }
Cell str(std::string s) { return {std::move(s), true, false}; }
Cell null_cell() { return {"", false, true}; }

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

void emit_csv(const Table& t, std::ostream& os) {
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << row[i].text;
    os << '\n';
  }
}

void emit_json(const Table& t, std::ostream& os) {
  os << "[\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    os << "  {";
    for (std::size_t i = 0; i < t.rows[r].size(); ++i) {
      const Cell& cell = t.rows[r][i];
      os << (i ? "," : "") << '"' << t.columns[i] << "\":";
      if (cell.null)
        os << "null";
      else if (cell.quoted)
        os << '"' << cell.text << '"';
      else
        os << cell.text;
    }
    os << (r + 1 < t.rows.size() ? "},\n" : "}\n");
  }
  os << "]\n";
}

struct Sweep {
  std::string var;
  double start = 0.0, stop = 0.0;
  int steps = 1;
  bool log = false;
};

Sweep parse_sweep(const std::string& spec) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : spec) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  if (parts.size() < 4 || parts.size() > 5 || parts[0].empty())
    throw std::invalid_argument("--sweep expects var:start:stop:steps[:log]");
  Sweep s;
  s.var = parts[0];
  std::size_t used = 0;
  s.start = std::stod(parts[1], &used);
  if (used != parts[1].size()) throw std::invalid_argument("bad sweep start");
  s.stop = std::stod(parts[2], &used);
  if (used != parts[2].size()) throw std::invalid_argument("bad sweep stop");
  s.steps = std::stoi(parts[3], &used);
  if (used != parts[3].size() || s.steps < 1)
    throw std::invalid_argument("sweep steps must be a positive integer");
  if (parts.size() == 5) {
    if (parts[4] != "log") throw std::invalid_argument("sweep scale must be 'log'");
    if (s.start <= 0.0 || s.stop <= 0.0)
      throw std::invalid_argument("log sweep endpoints must be positive");
    s.log = true;
  }
  return s;
}

std::vector<double> sweep_values(const Sweep& s) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(s.steps));
  if (s.steps == 1) {
    v.push_back(s.start);
    return v;
  }
  const double a = s.log ? std::log(s.start) : s.start;
  const double b = s.log ? std::log(s.stop) : s.stop;
  for (int i = 0; i < s.steps; ++i) {
    const double x = a + (b - a) * static_cast<double>(i) / (s.steps - 1);
    v.push_back(s.log ? std::exp(x) : x);
  }
  return v;
}

int env_workers() {
  const char* raw = std::getenv("GEODESIC_COMPASS_WORKERS");
  if (raw == nullptr || *raw == '\0') return 1;
  char* end = nullptr;
  const long value = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || value < 1 || value > 1024) return 1;
  return static_cast<int>(value);
}

// Per-subcommand option bag; each subcommand registers only the flags it uses.
struct Options {
  double lambda = 1.0, c = 1.0, t = 1.0;
  long long n = 0, k = 1;
  double nu = 1.0;
  std::uint64_t reps = 100000, seed = 1;
  int workers = 0;  // 0 = unset: fall back to GEODESIC_COMPASS_WORKERS, then 1
  std::string sweep_spec, format = "csv", out_path, kind = "cosh";
  bool n_given = false, k_given = false, nu_given = false;

  int resolved_workers() const { return workers >= 1 ? workers : env_workers(); }
};

void add_output_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--sweep", o.sweep_spec,
                  "Grid one variable: var:start:stop:steps[:log]");
  cmd->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--out", o.out_path, "Write output to PATH instead of stdout");
}

void add_model_flags(CLI::App* cmd, Options& o, bool with_lambda = true) {
  if (with_lambda)
    cmd->add_option("--lambda", o.lambda, "Event rate of the pacing process")
        ->capture_default_str();
  cmd->add_option("--c", o.c, "Motion speed")->capture_default_str();
  cmd->add_option("--t", o.t, "Time horizon")->capture_default_str();
}

long long checked_count(double value, long long lo, const char* what) {
  const long long rounded = std::llround(value);
  if (rounded < lo || std::abs(value - static_cast<double>(rounded)) > 1e-9)
    throw std::invalid_argument(std::string(what) + " must be an integer >= " +
                                std::to_string(lo));
  return rounded;
}

// Applies one sweep value to the named variable, restricted to `allowed`.
void apply_sweep_var(Options& o, const std::string& var, double value,
                     const std::vector<std::string>& allowed) {
  bool ok = false;
  for (const auto& a : allowed) ok = ok || a == var;
  if (!ok) throw std::invalid_argument("cannot sweep '" + var + "' for this command");
  if (var == "lambda")
    o.lambda = value;
  else if (var == "c")
    o.c = value;
  else if (var == "t")
    o.t = value;
  else if (var == "n")
    o.n = checked_count(value, 0, "swept n");
  else if (var == "k")
    o.k = checked_count(value, 1, "swept k");
  else if (var == "nu")
    o.nu = value;
}

int write_table(const Table& table, const Options& o) {
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!o.out_path.empty()) {
    file.open(o.out_path, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot open output path: " << o.out_path << '\n';
      return 1;
    }
    os = &file;
  }
  if (o.format == "json")
    emit_json(table, *os);
  else
    emit_csv(table, *os);
  os->flush();
  if (!*os) {
    std::cerr << "error: failed writing output\n";
    return 1;
  }
  return 0;
}

// Shared driver for the closed-form table commands.
int run_table_command(Options& o, const std::vector<std::string>& sweepable,
                      const std::vector<std::string>& columns,
                      const std::function<std::vector<Cell>(const Options&)>& row_fn) {
  std::optional<Sweep> sweep;
  if (!o.sweep_spec.empty()) sweep = parse_sweep(o.sweep_spec);
  Table table;
  table.columns = columns;
  const std::vector<double> grid =
      sweep ? sweep_values(*sweep) : std::vector<double>{0.0};
  for (double value : grid) {
    if (sweep) apply_sweep_var(o, sweep->var, value, sweepable);
    table.rows.push_back(row_fn(o));
  }
  return write_table(table, o);
}

int cmd_mean(Options& o) {
  return run_table_command(o, {"lambda", "c", "t"}, {"lambda", "c", "t", "value"},
                           [](const Options& v) {
                             const ModelParams p{v.lambda, v.c, v.t};
                             validate(p);
                             return std::vector<Cell>{num(p.lambda), num(p.c), num(p.t),
                                                      num(mean_cosh(p))};
                           });
}

int cmd_conditional(Options& o) {
  return run_table_command(
      o, {"n", "c", "t"}, {"n", "c", "t", "value"}, [](const Options& v) {
        if (v.n < 0) throw std::invalid_argument("--n must be >= 0");
        if (!(v.c >= 0.0) || !(v.t > 0.0))
          throw std::invalid_argument("conditional requires c >= 0 and t > 0");
        return std::vector<Cell>{
            num(v.n), num(v.c), num(v.t),
            num(conditional_mean_cosh(static_cast<int>(v.n), v.c, v.t))};
      });
}

int cmd_moment2(Options& o) {
  return run_table_command(o, {"lambda", "c", "t"}, {"lambda", "c", "t", "value"},
                           [](const Options& v) {
                             const ModelParams p{v.lambda, v.c, v.t};
                             validate(p);
                             return std::vector<Cell>{num(p.lambda), num(p.c), num(p.t),
                                                      num(second_moment(p))};
                           });
}

int cmd_jumpback(Options& o) {
  // With --nu the fractional-order mixture is evaluated and the k column
  // carries nu; otherwise the integer-order restart mean is evaluated at k.
  return run_table_command(
      o, {"lambda", "c", "t", "k", "nu"}, {"lambda", "c", "t", "k", "value"},
      [](const Options& v) {
        const ModelParams p{v.lambda, v.c, v.t};
        validate(p);
        if (v.nu_given) {
          if (!(v.nu > 0.0)) throw std::invalid_argument("--nu must be > 0");
          return std::vector<Cell>{num(p.lambda), num(p.c), num(p.t), num(v.nu),
                                   num(gamma_mixture_mean(p, v.nu))};
        }
        if (v.k < 1) throw std::invalid_argument("--k must be >= 1");
        return std::vector<Cell>{num(p.lambda), num(p.c), num(p.t), num(v.k),
                                 num(jumpback_mean(p, static_cast<int>(v.k)))};
      });
}

int cmd_spherical(Options& o) {
  return run_table_command(o, {"lambda", "c", "t"}, {"lambda", "c", "t", "value"},
                           [](const Options& v) {
                             const ModelParams p{v.lambda, v.c, v.t};
                             validate(p);
                             return std::vector<Cell>{num(p.lambda), num(p.c), num(p.t),
                                                      num(spherical_mean(p))};
                           });
}

MeanKind parse_kind(const std::string& kind) {
  if (kind == "cosh") return MeanKind::cosh_eta;
  if (kind == "cosh2") return MeanKind::cosh_eta_squared;
  if (kind == "cos") return MeanKind::cos_spherical;
  if (kind == "jumpback") return MeanKind::cosh_eta_jumpback;
  if (kind == "sinh_bound") return MeanKind::sinh_bound;
  throw std::invalid_argument("unknown --kind: " + kind);
}

int cmd_simulate(Options& o) {
  if (o.reps < 1) throw std::invalid_argument("--reps must be >= 1");
  const MeanKind kind = parse_kind(o.kind);
  const int workers = o.resolved_workers();
  return run_table_command(
      o, {"lambda", "c", "t"},
      {"lambda", "c", "t", "kind", "condition", "reps", "mean", "stderr", "analytic",
       "zscore", "seed"},
      [kind, workers](const Options& v) {
        const ModelParams p{v.lambda, v.c, v.t};
        validate(p);
        Conditioning cond = Conditioning::unconditioned();
        std::string cond_text = "none";
        if (v.n_given) {
          if (v.n < 0) throw std::invalid_argument("--n must be >= 0");
          cond = Conditioning::exactly(static_cast<int>(v.n));
          cond_text = "n=" + std::to_string(v.n);
        } else if (v.k_given || kind == MeanKind::cosh_eta_jumpback) {
          if (v.k < 1) throw std::invalid_argument("--k must be >= 1");
          cond = Conditioning::at_least(static_cast<int>(v.k));
          cond_text = "k>=" + std::to_string(v.k);
        }
        const EstimateReport rep =
            estimate(kind, p, cond, v.reps, SeedSpec{v.seed, 0}, workers);
        std::vector<Cell> row{num(p.lambda), num(p.c),         num(p.t),
                              str(v.kind),   str(cond_text),   num(rep.replications),
                              num(rep.mean), num(rep.std_error)};
        row.push_back(rep.analytic ? num(*rep.analytic) : null_cell());
        row.push_back(rep.z_score ? num(*rep.z_score) : null_cell());
        row.push_back(num(v.seed));
        return row;
      });
}

int cmd_verify(const Options& o) {
  VerifyOptions vo;
  vo.seed = o.seed;
  vo.workers = o.resolved_workers();
  const std::vector<VerifySuiteResult> results = run_verification(vo);
  int failing = 0;
  for (const auto& r : results) {
    std::printf("[%s] %-22s checks=%-6d failures=%-3d worst=%.3g%s%s\n",
                r.failures == 0 ? "PASS" : "FAIL", r.name.c_str(), r.checks,
                r.failures, r.worst, r.note.empty() ? "" : "  note: ",
                r.note.c_str());
    if (r.failures != 0) ++failing;
  }
  std::printf("verification: %zu suites, %d failing\n", results.size(), failing);
  std::fflush(stdout);
  return failing == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "geodesic-compass: closed-form and Monte Carlo statistics of "
      "Poisson-paced motion along hyperbolic and spherical geodesics"};
  app.require_subcommand(1);

  Options o_mean, o_cond, o_mom, o_jump, o_sph, o_sim, o_ver;

  CLI::App* mean = app.add_subcommand(
      "mean", "Mean hyperbolic-distance functional of the moving point");
  add_model_flags(mean, o_mean);
  add_output_flags(mean, o_mean);

  CLI::App* cond = app.add_subcommand(
      "conditional", "Mean distance functional given an exact event count");
  cond->add_option("--n", o_cond.n, "Exact event count")->capture_default_str();
  add_model_flags(cond, o_cond, /*with_lambda=*/false);
  add_output_flags(cond, o_cond);

  CLI::App* mom = app.add_subcommand(
      "moment2", "Second moment of the hyperbolic-distance functional");
  add_model_flags(mom, o_mom);
  add_output_flags(mom, o_mom);

  CLI::App* jump = app.add_subcommand(
      "jumpback", "Mean after restarting direction at the k-th event");
  add_model_flags(jump, o_jump);
  jump->add_option("--k", o_jump.k, "Restart index (integer >= 1)")
      ->capture_default_str();
  CLI::Option* nu_opt = jump->add_option(
      "--nu", o_jump.nu, "Fractional restart order (replaces --k; k column carries nu)");
  add_output_flags(jump, o_jump);

  CLI::App* sph = app.add_subcommand(
      "spherical", "Mean spherical-distance functional of the moving point");
  add_model_flags(sph, o_sph);
  add_output_flags(sph, o_sph);

  CLI::App* sim = app.add_subcommand(
      "simulate", "Seeded Monte Carlo estimate with the analytic value attached");
  add_model_flags(sim, o_sim);
  sim->add_option("--kind", o_sim.kind,
                  "Functional: cosh | cosh2 | cos | jumpback | sinh_bound")
      ->check(CLI::IsMember({"cosh", "cosh2", "cos", "jumpback", "sinh_bound"}))
      ->capture_default_str();
  CLI::Option* n_opt =
      sim->add_option("--n", o_sim.n, "Condition on exactly n events");
  CLI::Option* k_opt =
      sim->add_option("--k", o_sim.k, "Condition on at least k events");
  sim->add_option("--reps", o_sim.reps, "Replication count")->capture_default_str();
  sim->add_option("--seed", o_sim.seed, "Master seed")->capture_default_str();
  sim->add_option("--workers", o_sim.workers,
                  "Worker threads (default: GEODESIC_COMPASS_WORKERS, else 1)");
  add_output_flags(sim, o_sim);

  CLI::App* ver = app.add_subcommand(
      "verify", "Run the library's invariant suites and report pass/fail");
  ver->add_option("--seed", o_ver.seed, "Master seed for randomized suites")
      ->capture_default_str();
  ver->add_option("--workers", o_ver.workers,
                  "Worker threads (default: GEODESIC_COMPASS_WORKERS, else 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  o_jump.nu_given = nu_opt->count() > 0;
  o_sim.n_given = n_opt->count() > 0;
  o_sim.k_given = k_opt->count() > 0;
  if (o_sim.n_given && o_sim.k_given) {
    std::cerr << "error: --n and --k are mutually exclusive\n";
    return 1;
  }

  try {
    if (app.got_subcommand(mean)) return cmd_mean(o_mean);
    if (app.got_subcommand(cond)) return cmd_conditional(o_cond);
    if (app.got_subcommand(mom)) return cmd_moment2(o_mom);
    if (app.got_subcommand(jump)) return cmd_jumpback(o_jump);
    if (app.got_subcommand(sph)) return cmd_spherical(o_sph);
    if (app.got_subcommand(sim)) return cmd_simulate(o_sim);
    if (app.got_subcommand(ver)) return cmd_verify(o_ver);
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const numeric_error& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
