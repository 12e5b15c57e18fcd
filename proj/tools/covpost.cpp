// covpost: simulate, fit, experiment, verify, plot.

#include <iostream>

#include <CLI11.hpp>

#include "covpost/cli.hpp"
#include "covpost/error.hpp"

namespace cli = covpost::cli;

namespace {

covpost::Sigma0Spec sigma0_from(const std::string& kind, double rho, double lo, double hi) {
  covpost::Sigma0Spec s;
  if (kind == "identity") s.kind = covpost::Sigma0Spec::Kind::Identity;
  else if (kind == "toeplitz") s.kind = covpost::Sigma0Spec::Kind::Toeplitz;
  else if (kind == "spectral") s.kind = covpost::Sigma0Spec::Kind::Spectral;
  else throw covpost::ParameterOutOfRange("unknown --sigma0 '" + kind + "'");
  s.rho = rho;
  s.eig_lo = lo;
  s.eig_hi = hi;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posterior sampling for error covariance matrices under DSIW and matrix-F priors"};
  app.require_subcommand(1);

  std::uint64_t env_seed = 0;
  int env_workers = 1;
  const int env_status = cli::guarded(std::cerr, [&] {
    env_seed = cli::env_seed().value_or(0);
    env_workers = cli::env_workers().value_or(1);
    return 0;
  });
  if (env_status != 0) return env_status;

  // simulate
  cli::SimulateArgs sim;
  sim.seed = env_seed;
  std::string sim_sigma0 = "identity", sim_errors = "gaussian";
  double rho = 0.9, lo = 1.0, hi = 2.0;
  auto* simulate = app.add_subcommand("simulate", "Write an i.i.d. dataset drawn from N(0, Sigma0) as CSV");
  simulate->add_option("--n", sim.n, "Number of observations")->required();
  simulate->add_option("--q", sim.q, "Number of responses")->required();
  simulate->add_option("--seed", sim.seed, "Seed (default COVPOST_SEED or 0)");
  simulate->add_option("--sigma0", sim_sigma0, "identity, toeplitz or spectral");
  simulate->add_option("--rho", rho, "Toeplitz correlation");
  simulate->add_option("--lo", lo, "Smallest spectral eigenvalue");
  simulate->add_option("--hi", hi, "Largest spectral eigenvalue");
  simulate->add_option("--errors", sim_errors, "gaussian or rademacher");
  simulate->add_option("--out", sim.out, "Output CSV")->required();

  // fit
  cli::FitArgs fit;
  fit.chain.seed = env_seed;
  double nu = 0, c_nu = 0, nu_star = 0, scale_root = 0;
  auto* fitcmd = app.add_subcommand("fit", "Run a Gibbs chain on a dataset CSV and write a posterior summary");
  fitcmd->add_option("--data", fit.data, "Dataset CSV")->required();
  fitcmd->add_option("--prior", fit.prior, "IG_DSIW, LN_DSIW, TN_DSIW, U_DSIW or MATRIX_F");
  auto* nu_opt = fitcmd->add_option("--nu", nu, "Override nu");
  auto* c_opt = fitcmd->add_option("--c-nu", c_nu, "Override c_nu (DSIW)");
  auto* star_opt = fitcmd->add_option("--nu-star", nu_star, "Override the Wishart degrees of freedom (MATRIX_F)");
  auto* a_opt = fitcmd->add_option("--scale-root", scale_root, "Override A in Gamma(1/2, A^2) (IG_DSIW)");
  fitcmd->add_option("--iterations", fit.chain.iterations);
  fitcmd->add_option("--burn-in", fit.chain.burn_in);
  fitcmd->add_option("--thin", fit.chain.thin);
  fitcmd->add_option("--seed", fit.chain.seed, "Seed (default COVPOST_SEED or 0)");
  fitcmd->add_option("--stream", fit.chain.stream_id, "Stream id within the seed");
  fitcmd->add_option("--lambda", fit.lambda, "Ridge parameter for the coefficient prior");
  fitcmd->add_option("--summary", fit.summary_out, "Summary JSON")->required();
  auto* dump_opt = fitcmd->add_option("--chain-dump", "Chain dump CSV");

  // experiment
  cli::ExperimentArgs exp;
  int exp_workers = 0;
  bool linear_x = false;
  std::string exp_kind;
  auto* experiment = app.add_subcommand("experiment", "Run a consistency or inconsistency sweep from a JSON plan");
  experiment->add_option("kind", exp_kind, "consistency or inconsistency")->required();
  experiment->add_option("plan", exp.plan, "Plan JSON")->required();
  experiment->add_option("--out-dir", exp.out_dir);
  auto* workers_opt = experiment->add_option("--workers", exp_workers, "Worker threads");
  experiment->add_flag("--linear-x", linear_x, "Linear rather than log n axis");
  experiment->add_flag("--timing", exp.timing, "Write wall-clock times into the CSV");

  // verify
  cli::VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Run the random-matrix and identity checks");
  auto* vseed = verify->add_option("--seed", ver.seed);
  verify->add_option("--c", ver.c, "Envelope constant for the singular-value checks");
  verify->add_flag("--quick", ver.quick, "Fewer trials");
  auto* vout = verify->add_option("--out", "Report JSON (default stdout)");

  // plot
  cli::PlotArgs plot;
  bool plot_linear = false;
  auto* plotcmd = app.add_subcommand("plot", "Re-render charts from a metric CSV");
  plotcmd->add_option("metrics", plot.metrics, "Metric CSV")->required();
  plotcmd->add_option("--out-dir", plot.out_dir);
  plotcmd->add_option("--stem", plot.stem);
  plotcmd->add_option("--title", plot.title);
  plotcmd->add_flag("--linear-x", plot_linear);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kUserError;
  }

  if (*simulate) {
    const int status = cli::guarded(std::cerr, [&] {
      sim.sigma0 = sigma0_from(sim_sigma0, rho, lo, hi);
      if (sim_errors == "gaussian") sim.error_dist = covpost::ErrorDist::Gaussian;
      else if (sim_errors == "rademacher") sim.error_dist = covpost::ErrorDist::ScaledRademacher;
      else throw covpost::ParameterOutOfRange("unknown --errors '" + sim_errors + "'");
      return 0;
    });
    return status != 0 ? status : cli::cmd_simulate(sim, std::cerr);
  }
  if (*fitcmd) {
    if (*nu_opt) fit.overrides.nu = nu;
    if (*c_opt) fit.overrides.c_nu = c_nu;
    if (*star_opt) fit.overrides.nu_q_star = nu_star;
    if (*a_opt) fit.overrides.gamma_scale_root = scale_root;
    if (*dump_opt) fit.chain_dump = dump_opt->as<std::string>();
    return cli::cmd_fit(fit, std::cerr);
  }
  if (*experiment) {
    exp.kind = exp_kind;
    exp.log_x = !linear_x;
    if (*workers_opt) exp.workers = exp_workers;
    else if (std::getenv("COVPOST_WORKERS")) exp.workers = env_workers;
    return cli::cmd_experiment(exp, std::cerr);
  }
  if (*verify) {
    if (!*vseed && std::getenv("COVPOST_SEED")) ver.seed = env_seed;
    if (*vout) ver.out = vout->as<std::string>();
    return cli::cmd_verify(ver, std::cout, std::cerr);
  }
  plot.log_x = !plot_linear;
  return cli::cmd_plot(plot, std::cerr);
}
