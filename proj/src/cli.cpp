#include "covpost/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "covpost/error.hpp"
#include "covpost/io.hpp"
#include "covpost/model.hpp"
#include "covpost/stats.hpp"
#include "covpost/svg.hpp"

namespace covpost::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSimulateTag = 0x51A1ull;
const char* const kMetricHeader =
    "prior_name,n,q_n,replicates_done,mean_tail_prob,mean_rel_error,se_tail_prob,se_rel_error,wall_time_s";

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw PlanError(where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw PlanError("unknown key '" + key + "' in " + where);
}

template <class T>
T get_as(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw PlanError(where + "." + key + " is missing or has the wrong type");
  }
}

std::uint64_t parse_u64(const char* text, const std::string& what) {
  std::string s(text);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw ParseError(what + " must be a non-negative integer, got '" + s + "'");
  }
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw ParseError(what + " is out of range: '" + s + "'");
  }
}

std::string metric_field(double v, bool present) { return present ? format_double(v) : "NA"; }

Matrix mean_of(const std::vector<PDMatrix>& draws) {
  Matrix m = Matrix::Zero(draws.front().dim(), draws.front().dim());
  for (const auto& d : draws) m += d.matrix();
  return m / static_cast<double>(draws.size());
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const PlanError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const UnknownPreset& e) {
    err << "error: " << e.what() << "\n";
  } catch (const ParameterOutOfRange& e) {
    err << "error: " << e.what() << "\n";
  } catch (const DegreesOfFreedomTooSmall& e) {
    err << "error: " << e.what() << "\n";
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << "\n";
  } catch (const SingularDesign& e) {
    err << "error: " << e.what() << "\n";
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const json::exception& e) {
    err << "error: invalid JSON: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kFailure;
  }
  return kUserError;
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("COVPOST_SEED");
  if (!v) return std::nullopt;
  return parse_u64(v, "COVPOST_SEED");
}

std::optional<int> env_workers() {
  const char* v = std::getenv("COVPOST_WORKERS");
  if (!v) return std::nullopt;
  const std::uint64_t w = parse_u64(v, "COVPOST_WORKERS");
  if (w < 1 || w > 4096) throw ParseError("COVPOST_WORKERS must lie in [1, 4096]");
  return static_cast<int>(w);
}

ExperimentPlan parse_plan(const json& j, std::uint64_t default_seed, int default_workers) {
  check_keys(j,
             {"kind", "n_grid", "q_schedule", "sigma0", "priors", "replicates", "chain", "M", "seed", "workers",
              "error_dist"},
             "plan");
  ExperimentPlan plan;
  if (j.contains("kind")) {
    const auto kind = get_as<std::string>(j, "kind", "plan");
    if (kind == "consistency") plan.kind = ExperimentKind::Consistency;
    else if (kind == "inconsistency") plan.kind = ExperimentKind::Inconsistency;
    else throw PlanError("plan.kind must be \"consistency\" or \"inconsistency\"");
  }

  for (const auto n : get_as<std::vector<long long>>(j, "n_grid", "plan")) plan.n_grid.push_back(n);

  const json& qs = j.contains("q_schedule") ? j.at("q_schedule") : throw PlanError("plan.q_schedule is missing");
  check_keys(qs, {"power", "gamma", "rounding"}, "q_schedule");
  if (qs.contains("power") == qs.contains("gamma")) {
    throw PlanError("q_schedule needs exactly one of \"power\" or \"gamma\"");
  }
  plan.q_schedule.kind = qs.contains("power") ? QSchedule::Kind::Power : QSchedule::Kind::Linear;
  plan.q_schedule.value = get_as<double>(qs, qs.contains("power") ? "power" : "gamma", "q_schedule");
  if (qs.contains("rounding")) {
    const auto r = get_as<std::string>(qs, "rounding", "q_schedule");
    if (r != "nearest" && r != "ceil") throw PlanError("q_schedule.rounding must be \"nearest\" or \"ceil\"");
    plan.q_schedule.ceil = r == "ceil";
  }

  if (j.contains("sigma0")) {
    const json& s = j.at("sigma0");
    check_keys(s, {"identity", "toeplitz", "spectral"}, "sigma0");
    if (s.size() != 1) throw PlanError("sigma0 needs exactly one of identity, toeplitz, spectral");
    if (s.contains("identity")) {
      check_keys(s.at("identity"), {}, "sigma0.identity");
    } else if (s.contains("toeplitz")) {
      check_keys(s.at("toeplitz"), {"rho"}, "sigma0.toeplitz");
      plan.sigma0.kind = Sigma0Spec::Kind::Toeplitz;
      plan.sigma0.rho = get_as<double>(s.at("toeplitz"), "rho", "sigma0.toeplitz");
    } else {
      check_keys(s.at("spectral"), {"lo", "hi"}, "sigma0.spectral");
      plan.sigma0.kind = Sigma0Spec::Kind::Spectral;
      plan.sigma0.eig_lo = get_as<double>(s.at("spectral"), "lo", "sigma0.spectral");
      plan.sigma0.eig_hi = get_as<double>(s.at("spectral"), "hi", "sigma0.spectral");
    }
  }

  for (const auto& name : get_as<std::vector<std::string>>(j, "priors", "plan")) {
    try {
      plan.priors.push_back(parse_preset(name));
    } catch (const UnknownPreset& e) {
      throw PlanError(e.what());
    }
  }
  plan.replicates = get_as<int>(j, "replicates", "plan");

  if (j.contains("chain")) {
    const json& c = j.at("chain");
    check_keys(c, {"iterations", "burn_in", "thin"}, "chain");
    if (c.contains("iterations")) plan.chain.iterations = get_as<int>(c, "iterations", "chain");
    if (c.contains("burn_in")) plan.chain.burn_in = get_as<int>(c, "burn_in", "chain");
    if (c.contains("thin")) plan.chain.thin = get_as<int>(c, "thin", "chain");
  }
  if (j.contains("M")) plan.M = get_as<double>(j, "M", "plan");
  plan.master_seed = j.contains("seed") ? get_as<std::uint64_t>(j, "seed", "plan") : default_seed;
  plan.workers = j.contains("workers") ? get_as<int>(j, "workers", "plan") : default_workers;
  if (j.contains("error_dist")) {
    const auto e = get_as<std::string>(j, "error_dist", "plan");
    if (e == "gaussian") plan.error_dist = ErrorDist::Gaussian;
    else if (e == "rademacher") plan.error_dist = ErrorDist::ScaledRademacher;
    else throw PlanError("plan.error_dist must be \"gaussian\" or \"rademacher\"");
  }
  plan.validate();
  return plan;
}

json plan_to_json(const ExperimentPlan& plan) {
  json j;
  j["kind"] = plan.kind == ExperimentKind::Consistency ? "consistency" : "inconsistency";
  j["n_grid"] = plan.n_grid;
  json qs;
  qs[plan.q_schedule.kind == QSchedule::Kind::Power ? "power" : "gamma"] = plan.q_schedule.value;
  qs["rounding"] = plan.q_schedule.ceil ? "ceil" : "nearest";
  j["q_schedule"] = qs;
  switch (plan.sigma0.kind) {
    case Sigma0Spec::Kind::Identity: j["sigma0"] = {{"identity", json::object()}}; break;
    case Sigma0Spec::Kind::Toeplitz: j["sigma0"] = {{"toeplitz", {{"rho", plan.sigma0.rho}}}}; break;
    case Sigma0Spec::Kind::Spectral:
      j["sigma0"] = {{"spectral", {{"lo", plan.sigma0.eig_lo}, {"hi", plan.sigma0.eig_hi}}}};
      break;
  }
  json priors = json::array();
  for (auto p : plan.priors) priors.push_back(to_string(p));
  j["priors"] = priors;
  j["replicates"] = plan.replicates;
  j["chain"] = {{"iterations", plan.chain.iterations}, {"burn_in", plan.chain.burn_in}, {"thin", plan.chain.thin}};
  j["M"] = plan.M;
  j["seed"] = plan.master_seed;
  j["workers"] = plan.workers;
  j["error_dist"] = plan.error_dist == ErrorDist::Gaussian ? "gaussian" : "rademacher";
  return j;
}

void write_metric_csv(std::ostream& out, const std::vector<MetricRow>& rows, bool timing) {
  out << kMetricHeader << "\n";
  for (const auto& r : rows) {
    const bool any = r.replicates_done > 0;
    out << r.prior_name << "," << r.n << "," << r.q_n << "," << r.replicates_done << ","
        << metric_field(r.mean_tail_prob, any) << "," << metric_field(r.mean_rel_error, any) << ","
        << metric_field(r.se_tail_prob, any) << "," << metric_field(r.se_rel_error, any) << ","
        << metric_field(r.wall_time_s, timing) << "\n";
  }
}

std::vector<MetricRow> read_metric_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("metric CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricHeader) throw ParseError("metric CSV line 1: unexpected header '" + line + "'");
  std::vector<MetricRow> rows;
  for (int lineno = 2; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    const std::string ctx = "metric CSV line " + std::to_string(lineno);
    if (f.size() != 9) throw ParseError(ctx + ": expected 9 fields, got " + std::to_string(f.size()));
    const auto num = [&](const std::string& s) {
      return s == "NA" ? std::numeric_limits<double>::quiet_NaN() : parse_double(s, ctx);
    };
    MetricRow r;
    r.prior_name = f[0];
    r.n = static_cast<Index>(parse_double(f[1], ctx));
    r.q_n = static_cast<Index>(parse_double(f[2], ctx));
    r.replicates_done = static_cast<int>(parse_double(f[3], ctx));
    r.mean_tail_prob = num(f[4]);
    r.mean_rel_error = num(f[5]);
    r.se_tail_prob = num(f[6]);
    r.se_rel_error = num(f[7]);
    r.wall_time_s = num(f[8]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<fs::path> write_metric_charts(const std::vector<MetricRow>& rows, const fs::path& dir,
                                          const std::string& stem, const std::string& title, bool log_x,
                                          std::optional<std::pair<double, double>> error_band) {
  std::vector<std::string> order;
  std::map<std::string, std::pair<Series, Series>> by_prior;
  for (const auto& r : rows) {
    if (!by_prior.count(r.prior_name)) {
      order.push_back(r.prior_name);
      by_prior[r.prior_name] = {Series{r.prior_name, {}, {}}, Series{r.prior_name, {}, {}}};
    }
    auto& [tail, err] = by_prior[r.prior_name];
    tail.x.push_back(static_cast<double>(r.n));
    tail.y.push_back(r.mean_tail_prob);
    err.x.push_back(static_cast<double>(r.n));
    err.y.push_back(r.mean_rel_error);
  }
  LineChart tail_chart{title.empty() ? "Posterior tail probability" : title + ": posterior tail probability",
                       "n", "mean tail probability", log_x, {}, std::nullopt};
  LineChart err_chart{title.empty() ? "Relative error of posterior mean" : title + ": relative error",
                      "n", "mean relative error", log_x, {}, error_band};
  for (const auto& name : order) {
    tail_chart.series.push_back(by_prior[name].first);
    err_chart.series.push_back(by_prior[name].second);
  }
  std::vector<fs::path> paths{dir / (stem + "_tail_prob.svg"), dir / (stem + "_rel_error.svg")};
  open_output(paths[0]) << render_line_chart(tail_chart);
  open_output(paths[1]) << render_line_chart(err_chart);
  return paths;
}

json report_to_json(const std::vector<CheckReport>& reports, std::uint64_t seed, double c) {
  json checks = json::array();
  bool all = true;
  for (const auto& r : reports) {
    json details = json::object();
    for (const auto& [k, v] : r.details) details[k] = v;
    checks.push_back({{"check_name", r.check_name},
                      {"trials", r.trials},
                      {"pass_fraction", r.pass_fraction},
                      {"nominal_bound", r.nominal_bound},
                      {"asserted", r.asserted},
                      {"required_fraction", r.required_fraction},
                      {"passed", r.passed()},
                      {"details", details}});
    all = all && r.passed();
  }
  return {{"seed", seed}, {"c", c}, {"all_passed", all}, {"checks", checks}};
}

int cmd_simulate(const SimulateArgs& args, std::ostream& err) {
  return guarded(err, [&] {
    if (args.q < 1) throw ParameterOutOfRange("q must be >= 1");
    if (args.n < 2) throw ParameterOutOfRange("n must be >= 2");
    RngStream rng(args.seed, derive_stream_id(args.seed, {kSimulateTag}));
    const PDMatrix sigma0 = make_sigma0(args.sigma0, args.q, rng);
    const Dataset data = generate_iid_data(args.n, sigma0, args.error_dist, rng);
    auto out = open_output(args.out);
    write_dataset_csv(out, data);
    return int(kOk);
  });
}

int cmd_fit(const FitArgs& args, std::ostream& err) {
  return guarded(err, [&] {
    Dataset data;
    {
      auto in = open_input(args.data);
      data = read_dataset_csv(in);
    }
    const PresetName preset_id = parse_preset(args.prior);
    const Prior prior = preset(preset_id, data.q(), args.overrides);
    const SufficientStats stats = compute_stats(data, args.lambda);
    ChainConfig cfg = args.chain;
    cfg.sample_B = data.X.has_value();
    const PosteriorSamples samples = run_chain(stats, prior, cfg);

    const Index q = data.q();
    Matrix half(q, q), ess(q, q);
    for (Index i = 0; i < q; ++i) {
      for (Index j = i; j < q; ++j) {
        std::vector<double> trace;
        trace.reserve(samples.size());
        for (const auto& s : samples.sigma) trace.push_back(s(i, j));
        half(i, j) = half(j, i) = 0.5 * (quantile(trace, 0.975) - quantile(trace, 0.025));
        ess(i, j) = ess(j, i) = effective_sample_size(trace);
      }
    }
    json summary;
    summary["prior"] = to_string(preset_id);
    summary["n"] = data.n();
    summary["q"] = q;
    summary["p"] = data.p();
    summary["chain"] = {{"iterations", cfg.iterations}, {"burn_in", cfg.burn_in}, {"thin", cfg.thin},
                        {"seed", cfg.seed},             {"stream_id", cfg.stream_id}, {"kept", samples.size()}};
    summary["posterior_mean"] = matrix_json(mean_of(samples.sigma));
    summary["posterior_mean_rao_blackwell"] = matrix_json(posterior_mean_sigma(samples, stats, prior, true).matrix());
    summary["ci95_half_width"] = matrix_json(half);
    summary["ess"] = matrix_json(ess);
    if (!samples.B.empty()) {
      Matrix b = Matrix::Zero(samples.B.front().rows(), samples.B.front().cols());
      for (const auto& d : samples.B) b += d;
      summary["coefficient_mean"] = matrix_json(b / static_cast<double>(samples.B.size()));
    }
    open_output(args.summary_out) << summary.dump(2) << "\n";
    if (args.chain_dump) {
      auto out = open_output(*args.chain_dump);
      write_chain_dump(out, samples);
    }
    return int(kOk);
  });
}

int cmd_experiment(const ExperimentArgs& args, std::ostream& err) {
  return guarded(err, [&] {
    json j;
    {
      auto in = open_input(args.plan);
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ParseError("plan '" + args.plan.string() + "': " + e.what());
      }
    }
    if (args.kind) {
      if (*args.kind != "consistency" && *args.kind != "inconsistency") {
        throw PlanError("experiment kind must be consistency or inconsistency");
      }
      if (j.is_object() && j.contains("kind") && j["kind"] != *args.kind) {
        throw PlanError("plan kind '" + j["kind"].dump() + "' does not match the requested '" + *args.kind + "'");
      }
      if (j.is_object()) j["kind"] = *args.kind;
    }
    ExperimentPlan plan = parse_plan(j, env_seed().value_or(0), env_workers().value_or(1));
    if (args.workers) {
      plan.workers = *args.workers;
      plan.validate();
    }
    const bool consistency = plan.kind == ExperimentKind::Consistency;
    const ExperimentResult result = consistency ? run_consistency(plan) : run_inconsistency(plan);

    for (const auto& f : result.failures) {
      err << "task failed: prior=" << to_string(plan.priors[f.key.prior_index]) << " n=" << plan.n_grid[f.key.n_index]
          << " replicate=" << f.key.replicate << ": " << f.error << "\n";
    }
    for (const auto& r : result.rows) {
      err << "timing: " << r.prior_name << " n=" << r.n << " q=" << r.q_n << " wall_time_s=" << r.wall_time_s
          << "\n";
    }
    const std::string stem = consistency ? "consistency" : "inconsistency";
    {
      auto out = open_output(args.out_dir / (stem + "_metrics.csv"));
      write_metric_csv(out, result.rows, args.timing);
    }
    open_output(args.out_dir / (stem + "_plan.json")) << plan_to_json(plan).dump(2) << "\n";
    std::optional<std::pair<double, double>> band;
    if (!consistency) {
      const double g = plan.q_schedule.value, limit = g + 2.0 * std::sqrt(g);
      band = {limit - 0.15, limit + 0.15};
    }
    const std::string title = stem + ", Sigma0 " + plan.sigma0.label() + ", " + plan.q_schedule.label();
    write_metric_charts(result.rows, args.out_dir, stem, title, args.log_x, band);
    const std::size_t total = enumerate_tasks(plan).size();
    return int(result.failures.size() == total ? kFailure : kOk);
  });
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!(args.c > 0.0)) throw ParameterOutOfRange("c must be positive");
    VerifySuiteOptions opts;
    opts.seed = args.seed;
    opts.c = args.c;
    opts.quick = args.quick;
    const auto reports = run_verify_suite(opts);
    const json j = report_to_json(reports, args.seed, args.c);
    for (const auto& r : reports) {
      err << (r.asserted ? (r.passed() ? "PASS " : "FAIL ") : "INFO ") << r.check_name
          << " pass_fraction=" << format_double(r.pass_fraction) << "\n";
    }
    if (args.out) open_output(*args.out) << j.dump(2) << "\n";
    else out << j.dump(2) << "\n";
    return int(j["all_passed"].get<bool>() ? kOk : kFailure);
  });
}

int cmd_plot(const PlotArgs& args, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<MetricRow> rows;
    {
      auto in = open_input(args.metrics);
      rows = read_metric_csv(in);
    }
    write_metric_charts(rows, args.out_dir, args.stem, args.title, args.log_x);
    return int(kOk);
  });
}

}  // namespace covpost::cli
