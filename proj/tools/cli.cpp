#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <future>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ccm/concord.hpp"
#include "ccm/errors.hpp"
#include "ccm/logistic.hpp"
#include "ccm/matrix_io.hpp"
#include "ccm/model.hpp"
#include "ccm/optimality.hpp"
#include "ccm/solver.hpp"

namespace ccm::cli {

namespace {

using io::format_double;

struct CommonOptions {
  std::vector<double> lambdas;
  double epsilon = 1e-8;
  std::size_t max_sweeps = 10000;
  std::string order = "natural";
  std::string trace = "sweep";
  std::string format = "auto";
  std::string out = "ccm";
  double kkt_tol = 1e-6;
  std::optional<double> kkt_stop;
  std::string certify_only;
};

struct ConcordOptions {
  std::string data;
  std::string sigma;
  std::string path = "direct";
  double edge_threshold = 1e-8;
};

struct LogisticOptions {
  std::string data;
};

struct F2Options {
  std::string matrix;
  std::string penalized;
  bool compare_orders = false;
  std::uint64_t seed = 1;
};

// What one lambda produced; printed in lambda order after all jobs finish.
struct RunReport {
  int status = kOk;
  std::string summary;
};

class InputError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << content;
  if (!f) throw InputError("error writing '" + path + "'");
}

std::string matrix_text(const Matrix& m) {
  std::ostringstream os;
  io::write_matrix_csv(os, m);
  return os.str();
}

std::string vector_text(const Vector& v) {
  std::ostringstream os;
  io::write_vector(os, v);
  return os.str();
}

std::string diagnostics_csv(const DiagnosticsReport& d) {
  std::ostringstream os;
  os << "sweep,objective,step_norm,cum_sq_steps,kkt_inf_norm\n";
  for (std::size_t r = 0; r < d.sweeps(); ++r) {
    os << (r + 1) << ',' << format_double(d.objective_trace[r]) << ','
       << format_double(d.step_norms[r]) << ',' << format_double(d.cum_sq_steps[r]) << ','
       << format_double(d.kkt_inf_norm_trace[r]) << '\n';
  }
  return os.str();
}

std::string coordinate_csv(const DiagnosticsReport& d) {
  std::ostringstream os;
  os << "step,objective\n";
  for (std::size_t k = 0; k < d.coordinate_objective_trace.size(); ++k) {
    os << (k + 1) << ',' << format_double(d.coordinate_objective_trace[k]) << '\n';
  }
  return os.str();
}

Vector flatten(const Matrix& m) {
  Vector v(m.size());
  Index k = 0;
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) v[k++] = m(r, c);
  }
  return v;
}

std::vector<std::size_t> read_order(const std::string& source, std::size_t n) {
  if (source == "natural") return {};
  std::ifstream f(source);
  if (!f) throw InputError("cannot open order file '" + source + "'");
  std::stringstream buffer;
  buffer << f.rdbuf();
  std::string text = buffer.str();
  std::replace_if(
      text.begin(), text.end(),
      [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }, ',');
  std::string joined;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == ',' && (joined.empty() || joined.back() == ',')) continue;
    joined.push_back(text[i]);
  }
  if (!joined.empty() && joined.back() == ',') joined.pop_back();
  auto order = io::parse_index_list(joined);
  resolve_order(order, n);
  return order;
}

SolverConfig make_config(const CommonOptions& o, std::size_t n) {
  SolverConfig cfg;
  cfg.epsilon = o.epsilon;
  cfg.max_sweeps = o.max_sweeps;
  cfg.order = read_order(o.order, n);
  cfg.kkt_stop = o.kkt_stop;
  cfg.record_coordinate_trace = o.trace == "coordinate";
  return cfg;
}

CertifyOptions certify_options(const CommonOptions& o) {
  CertifyOptions c;
  c.kkt_tolerance = o.kkt_tol;
  return c;
}

std::string prefix_for(const CommonOptions& o, std::size_t k) {
  if (o.lambdas.size() == 1) return o.out;
  return o.out + ".lambda" + std::to_string(k + 1);
}

std::string header(const std::string& command, double lambda, double objective) {
  std::ostringstream os;
  os << "command=" << command << '\n'
     << "lambda=" << format_double(lambda) << '\n'
     << "objective=" << format_double(objective) << '\n';
  return os.str();
}

void write_traces(const CommonOptions& o, const std::string& prefix,
                  const DiagnosticsReport& d) {
  if (o.trace == "off") return;
  write_file(prefix + ".diagnostics.csv", diagnostics_csv(d));
  if (o.trace == "coordinate") write_file(prefix + ".coordinate_trace.csv", coordinate_csv(d));
}

// Not converged outranks a failed certificate.
int worse(int a, int b) {
  if (a == kNotConverged || b == kNotConverged) return kNotConverged;
  return std::max(a, b);
}

int status_of(bool converged, const Certification& cert) {
  if (!converged) return kNotConverged;
  return cert.passed() ? kOk : kNotCertified;
}

std::string sweep_phrase(bool converged, std::size_t sweeps) {
  std::ostringstream os;
  os << (converged ? "converged after " : "not converged after ") << sweeps
     << (sweeps == 1 ? " sweep" : " sweeps");
  return os.str();
}

RunReport solved_report(const std::string& prefix, double lambda, bool converged,
                        std::size_t sweeps, double objective, const Certification& cert,
                        const std::string& extra = {}) {
  std::ostringstream os;
  os << "[lambda=" << format_double(lambda) << "] " << sweep_phrase(converged, sweeps)
     << "; objective=" << format_double(objective)
     << "; kkt_inf_norm=" << format_double(cert.final_kkt_inf_norm)
     << "; certified=" << (cert.passed() ? "pass" : "fail") << "; output=" << prefix << '\n'
     << extra;
  return {status_of(converged, cert), os.str()};
}

RunReport certify_only_report(const CommonOptions& o, const std::string& prefix,
                              const std::string& command, double lambda, double objective,
                              const KktResidual& kkt) {
  const bool ok = kkt.inf_norm <= o.kkt_tol;
  std::ostringstream cert;
  cert << header(command, lambda, objective) << "mode=certify-only\n"
       << "final_kkt_inf_norm=" << format_double(kkt.inf_norm) << '\n'
       << "kkt_below_threshold=" << (ok ? "pass" : "fail") << '\n'
       << "certified=" << (ok ? "pass" : "fail") << '\n';
  write_file(prefix + ".certificate.txt", cert.str());
  std::ostringstream os;
  os << "[lambda=" << format_double(lambda) << "] certify-only"
     << "; objective=" << format_double(objective)
     << "; kkt_inf_norm=" << format_double(kkt.inf_norm)
     << "; certified=" << (ok ? "pass" : "fail") << '\n';
  return {ok ? kOk : kNotCertified, os.str()};
}

// Runs job(k) for every lambda, in parallel when there is more than one.
int fan_out(const CommonOptions& o, const std::function<RunReport(std::size_t)>& job,
            std::ostream& out) {
  std::vector<RunReport> reports(o.lambdas.size());
  if (o.lambdas.size() == 1) {
    reports[0] = job(0);
  } else {
    std::vector<std::future<RunReport>> futures;
    for (std::size_t k = 0; k < o.lambdas.size(); ++k) {
      futures.push_back(std::async(std::launch::async, job, k));
    }
    for (std::size_t k = 0; k < futures.size(); ++k) reports[k] = futures[k].get();
  }
  int status = kOk;
  for (const RunReport& r : reports) {
    out << r.summary;
    status = worse(status, r.status);
  }
  return status;
}

int run_concord(const CommonOptions& o, const ConcordOptions& c, std::ostream& out) {
  if (c.data.empty() == c.sigma.empty()) {
    throw InputError("concord needs exactly one of --data or --sigma");
  }
  const io::MatrixFormat fmt = io::parse_format(o.format);
  const Matrix sigma = c.data.empty() ? io::read_matrix(c.sigma, fmt)
                                      : concord::sample_covariance(io::read_matrix(c.data, fmt));
  const concord::SolvePath path = c.path == "vectorized" ? concord::SolvePath::kVectorized
                                                         : concord::SolvePath::kDirect;
  for (double lambda : o.lambdas) concord::validate({sigma, lambda});
  const std::size_t n = concord::packed_size(static_cast<std::size_t>(sigma.rows()));
  const SolverConfig cfg = make_config(o, n);

  std::optional<Matrix> given;
  if (!o.certify_only.empty()) given = io::read_matrix(o.certify_only, fmt);

  return fan_out(o, [&](std::size_t k) {
    const concord::CovarianceProblem cp{sigma, o.lambdas[k]};
    const std::string prefix = prefix_for(o, k);
    if (given) {
      if (given->rows() != sigma.rows() || given->cols() != sigma.cols()) {
        throw DimensionMismatch("solution is not " + std::to_string(sigma.rows()) + " x " +
                                std::to_string(sigma.rows()));
      }
      return certify_only_report(o, prefix, "concord", cp.lambda,
                                 concord::concord_objective(cp, *given),
                                 concord::concord_kkt_residual(cp, *given));
    }
    const concord::ConcordEstimate est = concord::concord_solve(cp, cfg, path);
    const Certification cert =
        certify(est.diagnostics, est.converged, est.kkt, certify_options(o));
    const double objective = concord::concord_objective(cp, est.omega);

    write_file(prefix + ".solution.txt", matrix_text(est.omega));
    std::ostringstream edges;
    for (const auto& [i, j] : est.edges(c.edge_threshold)) edges << i << ',' << j << '\n';
    write_file(prefix + ".edges.txt", edges.str());
    write_traces(o, prefix, est.diagnostics);
    write_file(prefix + ".certificate.txt",
               header("concord", cp.lambda, objective) + cert.to_key_value());
    return solved_report(prefix, cp.lambda, est.converged, est.sweeps_used, objective, cert);
  }, out);
}

int run_logistic(const CommonOptions& o, const LogisticOptions& l, std::ostream& out) {
  const Matrix data = io::read_matrix(l.data, io::parse_format(o.format));
  if (data.cols() < 2) throw InputError("logistic data needs features plus a label column");
  logistic::LogisticDataset ds{data.leftCols(data.cols() - 1), data.col(data.cols() - 1)};
  logistic::validate(ds);
  for (double lambda : o.lambdas) require_valid(logistic::make_problem(ds, lambda));
  const SolverConfig cfg = make_config(o, static_cast<std::size_t>(ds.X.cols()));

  std::optional<Vector> given;
  if (!o.certify_only.empty()) {
    given = flatten(io::read_matrix(o.certify_only, io::MatrixFormat::kAuto));
    if (given->size() != ds.X.cols()) {
      throw DimensionMismatch("solution has " + std::to_string(given->size()) +
                              " entries, expected " + std::to_string(ds.X.cols()));
    }
  }

  return fan_out(o, [&](std::size_t k) {
    const double lambda = o.lambdas[k];
    const F1Problem problem = logistic::make_problem(ds, lambda);
    const std::string prefix = prefix_for(o, k);
    if (given) {
      return certify_only_report(o, prefix, "logistic", lambda, eval_f1(problem, *given),
                                 kkt_residual_f1(problem, *given));
    }
    const logistic::LogisticFit fit = logistic::logistic_fit(ds, lambda, cfg);
    const Certification cert = certify(fit.diagnostics, fit.converged,
                                       kkt_residual_f1(problem, fit.beta), certify_options(o));
    const double objective = eval_f1(problem, fit.beta);

    write_file(prefix + ".solution.txt", vector_text(fit.beta));
    std::ostringstream support;
    for (std::size_t j : fit.support) support << (j + 1) << '\n';
    write_file(prefix + ".support.txt", support.str());
    write_traces(o, prefix, fit.diagnostics);
    write_file(prefix + ".certificate.txt",
               header("logistic", lambda, objective) + cert.to_key_value());
    std::ostringstream extra;
    extra << "  support_size=" << fit.support.size() << '\n';
    return solved_report(prefix, lambda, fit.converged, fit.sweeps_used, objective, cert,
                         extra.str());
  }, out);
}

int run_f2(const CommonOptions& o, const F2Options& f, std::ostream& out) {
  const io::MatrixFormat fmt = io::parse_format(o.format);
  const DesignMatrix E(io::read_matrix(f.matrix, fmt));
  const auto n = static_cast<std::size_t>(E.cols());
  const std::vector<std::size_t> members = io::parse_index_list(f.penalized);
  const IndexSet penalized(n, members);
  for (double lambda : o.lambdas) require_valid(F2Problem{E, penalized, lambda});
  const SolverConfig cfg = make_config(o, n);

  std::optional<Vector> given;
  if (!o.certify_only.empty()) {
    given = flatten(io::read_matrix(o.certify_only, io::MatrixFormat::kAuto));
    if (given->size() != E.cols()) {
      throw DimensionMismatch("solution has " + std::to_string(given->size()) +
                              " entries, expected " + std::to_string(E.cols()));
    }
  }

  return fan_out(o, [&](std::size_t k) {
    const F2Problem problem{E, penalized, o.lambdas[k]};
    const std::string prefix = prefix_for(o, k);
    if (given) {
      return certify_only_report(o, prefix, "f2-generic", problem.lambda,
                                 eval_f2(problem, *given), kkt_residual_f2(problem, *given));
    }
    const SolveOutcome a = solve(problem, default_start(problem), cfg);
    const Certification cert = certify(a, problem, certify_options(o));
    const double objective = eval_f2(problem, a.x_final);

    write_file(prefix + ".solution.txt", vector_text(a.x_final));
    write_traces(o, prefix, a.diagnostics);
    write_file(prefix + ".certificate.txt",
               header("f2-generic", problem.lambda, objective) + cert.to_key_value());
    RunReport report =
        solved_report(prefix, problem.lambda, a.converged, a.sweeps_used, objective, cert);
    if (!f.compare_orders) return report;

    // Second run with a seeded random cyclic order.
    SolverConfig shuffled = cfg;
    shuffled.order.resize(n);
    std::iota(shuffled.order.begin(), shuffled.order.end(), std::size_t{0});
    std::mt19937_64 rng(f.seed);
    std::shuffle(shuffled.order.begin(), shuffled.order.end(), rng);
    const SolveOutcome b = solve(problem, default_start(problem), shuffled);
    const Certification cert_b = certify(b, problem, certify_options(o));
    const double objective_b = eval_f2(problem, b.x_final);
    const double delta_ex =
        (E.entries() * (a.x_final - b.x_final)).lpNorm<Eigen::Infinity>();

    std::ostringstream cmp;
    cmp << "order_b=";
    for (std::size_t i = 0; i < n; ++i) cmp << (i ? "," : "") << (shuffled.order[i] + 1);
    cmp << "\nconverged_b=" << (b.converged ? "true" : "false") << '\n'
        << "objective_b=" << format_double(objective_b) << '\n'
        << "delta_ex_inf=" << format_double(delta_ex) << '\n'
        << "delta_objective=" << format_double(std::abs(objective - objective_b)) << '\n'
        << "certified_a=" << (cert.passed() ? "pass" : "fail") << '\n'
        << "certified_b=" << (cert_b.passed() ? "pass" : "fail") << '\n';
    write_file(prefix + ".compare.txt", cmp.str());
    report.summary += "  compare-orders: delta_ex_inf=" + format_double(delta_ex) +
                      "; certified_b=" + (cert_b.passed() ? "pass" : "fail") + '\n';
    report.status = worse(report.status, status_of(b.converged, cert_b));
    return report;
  }, out);
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--lambda", o.lambdas, "Penalty; several values (comma-separated or repeated) run independently")
      ->required()
      ->delimiter(',');
  cmd->add_option("--epsilon", o.epsilon, "Stop when the sweep step norm is at most this")
      ->capture_default_str();
  cmd->add_option("--max-sweeps", o.max_sweeps, "Sweep limit")->capture_default_str();
  cmd->add_option("--order", o.order, "'natural' or a file with a 1-based permutation")
      ->capture_default_str();
  cmd->add_option("--trace", o.trace, "Trace granularity")
      ->check(CLI::IsMember({"sweep", "coordinate", "off"}))
      ->capture_default_str();
  cmd->add_option("--format", o.format, "Input matrix format")
      ->check(CLI::IsMember({"auto", "csv", "mm", "matrix-market"}))
      ->capture_default_str();
  cmd->add_option("--out", o.out, "Output file prefix")->capture_default_str();
  cmd->add_option("--kkt-tol", o.kkt_tol, "KKT threshold for certification")
      ->capture_default_str();
  cmd->add_option("--kkt-stop", o.kkt_stop, "Also stop once the KKT residual is this small");
  cmd->add_option("--certify-only", o.certify_only,
                  "Certify an existing solution file instead of solving");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cyclic coordinatewise minimization for l1-penalized convex problems"};
  app.name("ccm");
  app.require_subcommand(1);

  CommonOptions concord_common;
  CommonOptions logistic_common;
  CommonOptions f2_common;
  ConcordOptions concord_opts;
  LogisticOptions logistic_opts;
  F2Options f2_opts;

  CLI::App* concord_cmd = app.add_subcommand("concord", "Sparse inverse covariance (CONCORD)");
  add_common(concord_cmd, concord_common);
  concord_cmd->add_option("--data", concord_opts.data, "Observations, one per row");
  concord_cmd->add_option("--sigma", concord_opts.sigma, "Precomputed covariance matrix");
  concord_cmd->add_option("--path", concord_opts.path, "Solver path")
      ->check(CLI::IsMember({"direct", "vectorized"}))
      ->capture_default_str();
  concord_cmd->add_option("--edge-threshold", concord_opts.edge_threshold,
                          "Edges are pairs with |w_ij| above this")
      ->capture_default_str();

  CLI::App* logistic_cmd = app.add_subcommand("logistic", "l1-penalized logistic regression");
  add_common(logistic_cmd, logistic_common);
  logistic_cmd->add_option("--data", logistic_opts.data, "Features with labels (+1/-1) in the last column")
      ->required();

  CLI::App* f2_cmd = app.add_subcommand("f2-generic", "Quadratic with log barrier and l1 penalty");
  add_common(f2_cmd, f2_common);
  f2_cmd->add_option("--matrix", f2_opts.matrix, "Design matrix E")->required();
  f2_cmd->add_option("--penalized", f2_opts.penalized, "1-based penalized indices, e.g. 1,3");
  f2_cmd->add_flag("--compare-orders", f2_opts.compare_orders,
                   "Rerun with a random cyclic order and report the difference in Ex");
  f2_cmd->add_option("--seed", f2_opts.seed, "Seed for --compare-orders")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    CommonOptions* common = concord_cmd->parsed()    ? &concord_common
                            : logistic_cmd->parsed() ? &logistic_common
                                                     : &f2_common;
    for (double lambda : common->lambdas) {
      if (!(lambda > 0.0)) throw InputError("lambda must be positive");
    }
    if (!(common->epsilon > 0.0)) throw InputError("epsilon must be positive");
    if (common->max_sweeps == 0) throw InputError("max-sweeps must be positive");

    if (concord_cmd->parsed()) return run_concord(*common, concord_opts, out);
    if (logistic_cmd->parsed()) return run_logistic(*common, logistic_opts, out);
    return run_f2(*common, f2_opts, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const NonFinite& e) {
    err << "error: non-finite value at row " << e.row() << ", column " << e.col() << '\n';
    return kInputError;
  } catch (const NotConverged& e) {
    err << "error: " << e.what() << '\n';
    return kNotConverged;
  } catch (const InvalidProblem& e) {
    err << "error: invalid problem: " << e.what() << '\n';
    return kInputError;
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const Error& e) {
    // Failures inside the solver itself.
    err << "error: solver failed: " << e.what() << '\n';
    return kNotConverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace ccm::cli
