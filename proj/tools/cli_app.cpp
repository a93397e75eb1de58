#include "cli_app.hpp"

#include "parallel.hpp"
#include "report_io.hpp"

#include "dirac/identities.hpp"
#include "dirac/oracle.hpp"
#include "dirac/recurrence.hpp"
#include "dirac/states.hpp"
#include "dirac/wavefunctions.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace dirac::cli {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::optional<int> Z;
  std::vector<int> charges;
  std::optional<double> g;
  double alpha = kCodataAlpha;
  double mass = 1.0;
  std::string output;
  std::string config;

  std::optional<int> n, two_j, eps;
  std::vector<std::string> states;
  std::vector<std::string> pairs;

  std::string op = "plain";
  std::optional<double> lambda;
  std::string method = "analytic";
  double rel_tol = 1e-10;

  std::optional<int> lmin, lmax;
  bool descend = false;
  bool with_seeds = false;
  int check_every = 3;
  double drift_tol = 1e-6;
  std::string precision = "quad";

  std::string grid = "default";
  int n_max = 4;
};

void add_system_options(CLI::App &sub, Flags &f, bool many_charges) {
  if (many_charges)
    sub.add_option("--Z", f.charges, "nuclear charges (default 1 20 80)");
  else
    sub.add_option("--Z", f.Z, "nuclear charge");
  if (!many_charges) sub.add_option("--g", f.g, "coupling g = Z alpha, instead of --Z");
  sub.add_option("--alpha", f.alpha, "fine-structure constant");
  sub.add_option("--mass", f.mass, "particle mass");
  sub.add_option("--output", f.output, "output file (default: standard output)");
  sub.add_option("--config", f.config, "JSON file mirroring these flags; flags win");
}

void add_pair_option(CLI::App &sub, Flags &f, bool many) {
  auto *o = sub.add_option("--pair", f.pairs, "state pair n,two_j,eps:n,two_j,eps");
  if (!many) o->expected(1);
}

/// Fill every option the command line left unset from a JSON object whose
/// keys are the long flag names.
void apply_config(CLI::App &sub, const std::string &path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
  for (const auto &[key, value] : doc.items()) {
    if (key == "config") throw UsageError("config files cannot nest");
    CLI::Option *opt = nullptr;
    try {
      opt = sub.get_option("--" + key);
    } catch (const CLI::OptionNotFound &) {
      throw UsageError("unknown config key '" + key + "' for " + sub.get_name());
    }
    if (opt->count() > 0) continue;
    auto add = [&](const nlohmann::json &v) {
      opt->add_result(v.is_string() ? v.get<std::string>() : v.dump());
    };
    if (value.is_array())
      for (const auto &v : value) add(v);
    else
      add(value);
    try {
      opt->run_callback();
    } catch (const CLI::Error &e) {
      throw UsageError("config key '" + key + "': " + e.what());
    }
  }
}

CoulombSystem system_from(const Flags &f) {
  if (f.Z && f.g) throw UsageError("--Z and --g are mutually exclusive");
  if (!f.Z && !f.g) throw UsageError("one of --Z or --g is required");
  CoulombSystem sys = f.g ? CoulombSystem::with_coupling(*f.g, f.mass)
                          : CoulombSystem{*f.Z, f.alpha, f.mass};
  try {
    validate(sys);
  } catch (const Error &e) {
    throw UsageError(e.what());
  }
  return sys;
}

QuantumState state_from(const std::array<int, 3> &v) {
  try {
    return make_state(v[0], v[1], v[2]);
  } catch (const Error &e) {
    throw UsageError(e.what());
  }
}

std::vector<std::pair<QuantumState, QuantumState>> pairs_from(const Flags &f) {
  if (f.pairs.empty()) throw UsageError("--pair is required");
  std::vector<std::pair<QuantumState, QuantumState>> out;
  for (const auto &text : f.pairs) {
    const auto p = io::parse_pair(text);
    if (!p) throw UsageError("malformed --pair '" + text + "', want n,two_j,eps:n,two_j,eps");
    out.emplace_back(state_from((*p)[0]), state_from((*p)[1]));
  }
  return out;
}

OperatorKind op_from(const std::string &s) {
  const auto op = parse_operator_kind(s);
  if (!op) throw UsageError("unknown --op '" + s + "'");
  return *op;
}

/// Output sink: a file when --output names one, else the given stream.
class Sink {
public:
  Sink(const std::string &path, std::ostream &fallback) : path_(path), os_(&fallback) {
    if (!path_.empty() && path_ != "-") {
      file_.open(path_, std::ios::binary | std::ios::trunc);
      if (!file_) throw Error(ErrorKind::Precondition, "cannot open " + path_ + " for writing");
      os_ = &file_;
    }
  }
  std::ostream &stream() { return *os_; }
  bool to_file() const { return file_.is_open(); }
  std::string manifest_path() const { return path_ + ".errors.json"; }

private:
  std::string path_;
  std::ofstream file_;
  std::ostream *os_;
};

io::Failure failure_from(const std::string &task, std::exception_ptr p) {
  try {
    std::rethrow_exception(p);
  } catch (const Error &e) {
    return {task, std::string(to_string(e.kind())), e.what()};
  } catch (const std::exception &e) {
    return {task, "Exception", e.what()};
  }
}

int finish(Sink &sink, std::ostream &err, const std::vector<io::Failure> &failures) {
  sink.stream().flush();
  if (failures.empty()) return kSuccess;
  if (sink.to_file()) {
    std::ofstream m(sink.manifest_path(), std::ios::binary | std::ios::trunc);
    io::write_manifest(m, failures);
    err << "error: " << failures.size() << " task(s) failed, see " << sink.manifest_path()
        << '\n';
  } else {
    io::write_manifest(err, failures);
  }
  return kComputeError;
}

unsigned threads_or_throw() {
  const auto t = parallel::thread_budget();
  if (!t) throw UsageError(std::string(parallel::kThreadsEnv) + " must be a positive integer");
  return *t;
}

// ---------------------------------------------------------------------------

int cmd_energy(const Flags &f, std::ostream &out, std::ostream &err) {
  const auto sys = system_from(f);
  std::vector<QuantumState> states;
  if (f.n || f.two_j || f.eps) {
    if (!f.n) throw UsageError("--n is required");
    if (!f.two_j) throw UsageError("--two-j is required");
    if (!f.eps) throw UsageError("--eps is required");
    states.push_back(state_from({*f.n, *f.two_j, *f.eps}));
  }
  for (const auto &text : f.states) {
    const auto v = io::parse_triple(text);
    if (!v) throw UsageError("malformed --state '" + text + "', want n,two_j,eps");
    states.push_back(state_from(*v));
  }
  if (states.empty()) throw UsageError("--n is required (or --state)");

  Sink sink(f.output, out);
  std::vector<io::Failure> failures;
  io::write_energy_header(sink.stream());
  for (const auto &s : states) {
    try {
      io::write_energy_row(sink.stream(), s, energy(sys, s) / sys.mass);
    } catch (const Error &) {
      failures.push_back(failure_from("energy " + io::state_key(s), std::current_exception()));
    }
  }
  return finish(sink, err, failures);
}

/// Lowest integer lambda an ascending ladder can start from.
int lowest_ladder_start(const CoulombSystem &sys, const QuantumState &s1, const QuantumState &s2) {
  const double w = w_exponent(sys, s1) + w_exponent(sys, s2);
  int l = static_cast<int>(std::floor(2.0 - w));
  while (!validity_exponent(sys, s1, s2, l - 3)) ++l;
  while (validity_exponent(sys, s1, s2, l - 4)) --l;
  return l;
}

MatrixElement element_by_recurrence(const CoulombSystem &sys, const QuantumState &s1,
                                    const QuantumState &s2, OperatorKind op, double lambda) {
  const int l = static_cast<int>(lambda);
  const int start = lowest_ladder_start(sys, s1, s2);
  if (l < start)
    throw Error(ErrorKind::DivergentIntegral,
                "the ladder needs lambda - 3 >= " + std::to_string(start - 3) +
                    " to converge; lambda = " + std::to_string(l) + " is below its reach");
  const auto table = ladder(sys, s1, s2, start, l);
  const auto &e = table.entries.at(l);
  MatrixElement m;
  m.op = op;
  m.lambda = lambda;
  m.value = op == OperatorKind::Plain ? e.plain : e.beta;
  m.err_est = e.err_est;
  const bool from_oracle = e.provenance == Provenance::Fallback ||
                           (e.provenance == Provenance::Diagonal && op == OperatorKind::Beta);
  m.method = from_oracle ? Method::Analytic : Method::Recurrence;
  return m;
}

int cmd_element(const Flags &f, std::ostream &out, std::ostream &err) {
  const auto sys = system_from(f);
  const auto pairs = pairs_from(f);
  const auto op = op_from(f.op);
  if (!f.lambda) throw UsageError("--lambda is required");
  const double lambda = *f.lambda;
  const bool all = f.method == "all";
  if (!all && f.method != "analytic" && f.method != "quadrature" && f.method != "recurrence")
    throw UsageError("unknown --method '" + f.method + "'");
  const bool recurrence_applies = lambda == std::floor(lambda) &&
                                  (op == OperatorKind::Plain || op == OperatorKind::Beta);
  if (f.method == "recurrence" && !recurrence_applies)
    throw UsageError("--method recurrence needs an integer --lambda and --op plain or beta");

  Sink sink(f.output, out);
  std::vector<io::Failure> failures;
  io::write_element_header(sink.stream());
  for (const auto &[s1, s2] : pairs) {
    const std::string task = io::pair_key(s1, s2);
    std::optional<double> analytic;
    auto emit = [&](const std::string &name, auto &&compute) {
      try {
        const MatrixElement e = compute();
        std::optional<double> delta;
        if (name != "analytic" && analytic) delta = e.value - *analytic;
        io::write_element_row(sink.stream(), s1, s2, e, delta);
        if (name == "analytic") analytic = e.value;
      } catch (const Error &) {
        failures.push_back(failure_from(name + " " + task, std::current_exception()));
      }
    };
    if (all || f.method == "analytic")
      emit("analytic", [&] {
        const auto q1 = solve_radial<quad>(sys, s1);
        const auto q2 = solve_radial<quad>(sys, s2);
        return element_analytic(q1, q2, op, lambda);
      });
    if (all || f.method == "quadrature")
      emit("quadrature", [&] {
        return element_quadrature(solve_radial(sys, s1), solve_radial(sys, s2), op, lambda,
                                  f.rel_tol);
      });
    if ((all && recurrence_applies) || f.method == "recurrence")
      emit("recurrence", [&] { return element_by_recurrence(sys, s1, s2, op, lambda); });
  }
  return finish(sink, err, failures);
}

int cmd_ladder(const Flags &f, std::ostream &out, std::ostream &err) {
  const auto sys = system_from(f);
  const auto pairs = pairs_from(f);
  if (!f.lmin) throw UsageError("--lmin is required");
  if (!f.lmax) throw UsageError("--lmax is required");
  LadderOptions opt;
  opt.descending = f.descend;
  opt.check_every = f.check_every;
  opt.drift_tol = f.drift_tol;
  if (f.check_every < 1) throw UsageError("--check-every must be >= 1");
  if (f.precision == "quad")
    opt.precision = WorkingPrecision::Quad;
  else if (f.precision == "double")
    opt.precision = WorkingPrecision::Double;
  else
    throw UsageError("--precision must be quad or double");
  if (f.descend)
    err << "warning: descending ladders are not known to be stable; cross-checks still apply\n";

  struct Result {
    LadderTable table;
    std::exception_ptr error;
  };
  const auto outcomes = parallel::map_indexed<Result>(pairs.size(), threads_or_throw(), [&](std::size_t i) {
    Result r;
    try {
      ladder_into(r.table, sys, pairs[i].first, pairs[i].second, *f.lmin, *f.lmax, opt);
    } catch (...) {
      r.error = std::current_exception();
    }
    return r;
  });

  Sink sink(f.output, out);
  std::vector<io::Failure> failures;
  const bool with_pair = pairs.size() > 1;
  io::write_ladder_header(sink.stream(), with_pair);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto &r = *outcomes[i].value;
    io::write_ladder_rows(sink.stream(), r.table, *f.lmin, *f.lmax, f.with_seeds, with_pair);
    if (r.error)
      failures.push_back(
          failure_from("ladder " + io::pair_key(pairs[i].first, pairs[i].second), r.error));
  }
  return finish(sink, err, failures);
}

int cmd_audit(const Flags &f, std::ostream &out, std::ostream &err) {
  if (f.grid != "default") throw UsageError("--grid must be 'default'");
  AuditGrid grid;
  grid.alpha = f.alpha;
  grid.mass = f.mass;
  grid.n_max = f.n_max;
  if (!f.charges.empty()) grid.charges = f.charges;
  if (f.lmin) grid.lambda_min = *f.lmin;
  if (f.lmax) grid.lambda_max = *f.lmax;
  if (grid.n_max < 1) throw UsageError("--n-max must be >= 1");
  for (int Z : grid.charges) {
    try {
      validate(CoulombSystem{Z, grid.alpha, grid.mass});
    } catch (const Error &e) {
      throw UsageError(e.what());
    }
  }
  const unsigned threads = threads_or_throw();

  Sink sink(f.output, out);
  std::vector<io::Failure> failures;
  std::vector<AuditRecord> records;
  for (int Z : grid.charges) {
    std::vector<RadialWavefunction> wfs;
    try {
      wfs = grid_wavefunctions<double>(Z, grid);
    } catch (const Error &) {
      failures.push_back(failure_from("audit Z=" + std::to_string(Z), std::current_exception()));
      continue;
    }
    std::vector<std::pair<std::size_t, std::size_t>> tasks;
    for (std::size_t i = 0; i < wfs.size(); ++i)
      for (std::size_t k = i; k < wfs.size(); ++k) tasks.emplace_back(i, k);
    const auto outcomes =
        parallel::map_indexed<std::vector<AuditRecord>>(tasks.size(), threads, [&](std::size_t t) {
          return audit_pair<double>(Z, wfs[tasks[t].first], wfs[tasks[t].second], grid);
        });
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      if (outcomes[t].error) {
        const auto &[i, k] = tasks[t];
        failures.push_back(failure_from("audit Z=" + std::to_string(Z) + " " +
                                            io::pair_key(wfs[i].state, wfs[k].state),
                                        outcomes[t].error));
        continue;
      }
      records.insert(records.end(), outcomes[t].value->begin(), outcomes[t].value->end());
    }
  }
  io::write_audit_json(sink.stream(), records);

  std::map<std::string, std::pair<int, int>> tally;
  for (const auto &r : records) {
    auto &t = tally[std::string(to_string(r.report.relation_id))];
    (r.report.verdict == Verdict::Pass ? t.first : t.second)++;
  }
  for (const auto &[id, t] : tally)
    err << id << ": " << t.first << " pass, " << t.second << " fail\n";
  return finish(sink, err, failures);
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Dirac-Coulomb radial matrix elements, recurrence ladders and identity audit",
               "dirac"};
  app.require_subcommand(1);
  Flags f;

  auto *energy_cmd = app.add_subcommand("energy", "bound-state energies E/m");
  add_system_options(*energy_cmd, f, false);
  energy_cmd->add_option("--n", f.n, "principal quantum number");
  energy_cmd->add_option("--two-j", f.two_j, "2j (odd integer)");
  energy_cmd->add_option("--eps", f.eps, "-1 or +1; l = j + eps/2");
  energy_cmd->add_option("--state", f.states, "additional state n,two_j,eps (repeatable)");

  auto *element_cmd = app.add_subcommand("element", "one radial matrix element");
  add_system_options(*element_cmd, f, false);
  add_pair_option(*element_cmd, f, true);
  element_cmd->add_option("--op", f.op, "plain|beta|alpha|alphabeta|deriv|betaderiv");
  element_cmd->add_option("--lambda", f.lambda, "power of r (real)");
  element_cmd->add_option("--method", f.method, "analytic|quadrature|recurrence|all");
  element_cmd->add_option("--rel-tol", f.rel_tol, "quadrature relative tolerance");

  auto *ladder_cmd = app.add_subcommand("ladder", "recurrence table of <r^l> and <beta r^l>");
  add_system_options(*ladder_cmd, f, false);
  add_pair_option(*ladder_cmd, f, true);
  ladder_cmd->add_option("--lmin", f.lmin, "lowest lambda");
  ladder_cmd->add_option("--lmax", f.lmax, "highest lambda");
  ladder_cmd->add_flag("--descend", f.descend, "solve downward from lmax (unassessed stability)");
  ladder_cmd->add_flag("--with-seeds", f.with_seeds, "also print the seed rows below lmin");
  ladder_cmd->add_option("--check-every", f.check_every, "oracle cross-check period");
  ladder_cmd->add_option("--drift-tol", f.drift_tol, "abort when a cross-check drifts past this");
  ladder_cmd->add_option("--precision", f.precision, "working precision: quad|double");

  auto *audit_cmd = app.add_subcommand("audit", "identity audit over a state grid, JSON report");
  add_system_options(*audit_cmd, f, true);
  audit_cmd->add_option("--grid", f.grid, "state grid (only 'default')");
  audit_cmd->add_option("--n-max", f.n_max, "largest n on the grid");
  audit_cmd->add_option("--lmin", f.lmin, "lowest lambda (default 0)");
  audit_cmd->add_option("--lmax", f.lmax, "highest lambda (default 3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  CLI::App *sub = app.get_subcommands().front();
  try {
    if (!f.config.empty()) apply_config(*sub, f.config);
    if (sub == energy_cmd) return cmd_energy(f, out, err);
    if (sub == element_cmd) return cmd_element(f, out, err);
    if (sub == ladder_cmd) return cmd_ladder(f, out, err);
    return cmd_audit(f, out, err);
  } catch (const UsageError &e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return kUsageError;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kComputeError;
  }
}

} // namespace dirac::cli
