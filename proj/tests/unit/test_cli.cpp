#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "covpost/cli.hpp"
#include "covpost/model.hpp"
#include "covpost/svg.hpp"

using namespace covpost;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "covpost_unit" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json base_plan() {
  return json::parse(R"({"kind":"consistency","n_grid":[40,80],"q_schedule":{"power":0.5},
    "priors":["IG_DSIW","MATRIX_F"],"replicates":2,"chain":{"iterations":40,"burn_in":20,"thin":2},
    "M":2.0,"seed":9,"workers":1,"error_dist":"gaussian","sigma0":{"toeplitz":{"rho":0.5}}})");
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("plan parsing accepts the full schema and round-trips") {
    const auto plan = cli::parse_plan(base_plan());
    CHECK(plan.n_grid == std::vector<Index>{40, 80});
    CHECK(plan.q_schedule.kind == QSchedule::Kind::Power);
    CHECK(plan.sigma0.kind == Sigma0Spec::Kind::Toeplitz);
    CHECK(plan.sigma0.rho == 0.5);
    CHECK(plan.priors.size() == 2);
    CHECK(plan.chain.kept() == 10);
    CHECK(plan.master_seed == 9);
    const auto again = cli::parse_plan(cli::plan_to_json(plan));
    CHECK(cli::plan_to_json(again) == cli::plan_to_json(plan));
  }

  TEST_CASE("plan parsing rejects bad input") {
    auto j = base_plan();
    j["replicatez"] = 3;
    CHECK_THROWS_AS(cli::parse_plan(j), PlanError);
    j = base_plan();
    j["chain"]["burnin"] = 3;
    CHECK_THROWS_AS(cli::parse_plan(j), PlanError);
    j = base_plan();
    j["priors"] = json::array();
    CHECK_THROWS_AS(cli::parse_plan(j), PlanError);
    j = base_plan();
    j["priors"] = {"WISHART"};
    CHECK_THROWS_AS(cli::parse_plan(j), PlanError);
    j = base_plan();
    j["q_schedule"] = {{"power", 0.5}, {"gamma", 0.1}};
    CHECK_THROWS_AS(cli::parse_plan(j), PlanError);
    j = base_plan();
    j["replicates"] = "three";
    CHECK_THROWS_AS(cli::parse_plan(j), PlanError);
    j = base_plan();
    j.erase("n_grid");
    CHECK_THROWS_AS(cli::parse_plan(j), PlanError);
    j = base_plan();
    j["q_schedule"]["rounding"] = "floor";
    CHECK_THROWS_AS(cli::parse_plan(j), PlanError);
  }

  TEST_CASE("plan defaults come from the caller") {
    auto j = base_plan();
    j.erase("seed");
    j.erase("workers");
    const auto plan = cli::parse_plan(j, 1234, 3);
    CHECK(plan.master_seed == 1234);
    CHECK(plan.workers == 3);
  }

  TEST_CASE("metric CSV header, NA fields and round trip") {
    MetricRow a{"IG_DSIW", 50, 8, 2, 0.5, 0.25, 0.1, 0.05, 3.5};
    MetricRow b{"MATRIX_F", 50, 8, 0, 0, 0, 0, 0, 1.0};
    std::ostringstream out;
    cli::write_metric_csv(out, {a, b});
    const std::string text = out.str();
    CHECK(text.rfind("prior_name,n,q_n,replicates_done,mean_tail_prob,mean_rel_error,se_tail_prob,se_rel_error,"
                     "wall_time_s\n",
                     0) == 0);
    CHECK(text.find("IG_DSIW,50,8,2,0.5,0.25,0.1,0.05,NA\n") != std::string::npos);
    CHECK(text.find("MATRIX_F,50,8,0,NA,NA,NA,NA,NA\n") != std::string::npos);
    std::istringstream in(text);
    const auto rows = cli::read_metric_csv(in);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].mean_rel_error == 0.25);
    CHECK(std::isnan(rows[1].mean_tail_prob));
    std::ostringstream timed;
    cli::write_metric_csv(timed, {a}, true);
    CHECK(timed.str().find(",3.5\n") != std::string::npos);
    std::istringstream bad("prior,n\n");
    CHECK_THROWS_AS(cli::read_metric_csv(bad), ParseError);
  }

  TEST_CASE("simulate then fit, reproducibly") {
    const auto dir = scratch("simfit");
    std::ostringstream err;
    cli::SimulateArgs sim;
    sim.n = 80;
    sim.q = 2;
    sim.seed = 3;
    sim.sigma0.kind = Sigma0Spec::Kind::Toeplitz;
    sim.out = dir / "data.csv";
    REQUIRE(cli::cmd_simulate(sim, err) == 0);
    const std::string first = slurp(sim.out);
    REQUIRE(cli::cmd_simulate(sim, err) == 0);
    CHECK(slurp(sim.out) == first);
    std::ifstream in(sim.out);
    CHECK(read_dataset_csv(in).q() == 2);

    cli::FitArgs fit;
    fit.data = sim.out;
    fit.chain.iterations = 600;
    fit.chain.burn_in = 100;
    fit.chain.thin = 5;
    fit.chain.seed = 4;
    fit.summary_out = dir / "summary.json";
    fit.chain_dump = dir / "chain.csv";
    REQUIRE(cli::cmd_fit(fit, err) == 0);
    const std::string summary = slurp(fit.summary_out), dump = slurp(*fit.chain_dump);
    const auto j = json::parse(summary);
    CHECK(j["posterior_mean"].size() == 2);
    CHECK(j["posterior_mean"][0].size() == 2);
    CHECK(j["ci95_half_width"][1][1].get<double>() > 0.0);
    CHECK(j["ess"][0][0].get<double>() > 0.0);
    CHECK(j["chain"]["kept"] == 100);
    REQUIRE(cli::cmd_fit(fit, err) == 0);
    CHECK(slurp(fit.summary_out) == summary);
    CHECK(slurp(*fit.chain_dump) == dump);
  }

  TEST_CASE("user errors exit with 2") {
    const auto dir = scratch("errors");
    std::ostringstream err;
    std::ofstream(dir / "bad.csv") << "y1,y2\n1,2\n3,x\n";
    cli::FitArgs fit;
    fit.data = dir / "bad.csv";
    fit.summary_out = dir / "s.json";
    CHECK(cli::cmd_fit(fit, err) == 2);
    CHECK(err.str().find("line 3") != std::string::npos);
    fit.data = dir / "missing.csv";
    CHECK(cli::cmd_fit(fit, err) == 2);
    std::ofstream(dir / "ok.csv") << "y1\n1\n2\n3\n";
    fit.data = dir / "ok.csv";
    fit.prior = "NOPE";
    CHECK(cli::cmd_fit(fit, err) == 2);

    std::ofstream(dir / "plan.json") << R"({"n_grid":[50],"q_schedule":{"power":0.5},"priors":[],"replicates":1})";
    cli::ExperimentArgs exp;
    exp.kind = "consistency";
    exp.plan = dir / "plan.json";
    exp.out_dir = dir;
    CHECK(cli::cmd_experiment(exp, err) == 2);
    std::ofstream(dir / "broken.json") << "{not json";
    exp.plan = dir / "broken.json";
    CHECK(cli::cmd_experiment(exp, err) == 2);
  }

  TEST_CASE("experiment writes a deterministic CSV, sidecar and charts") {
    const auto dir = scratch("experiment");
    std::ofstream(dir / "plan.json") << base_plan().dump();
    std::ostringstream err;
    cli::ExperimentArgs exp;
    exp.kind = "consistency";
    exp.plan = dir / "plan.json";
    exp.out_dir = dir / "a";
    REQUIRE(cli::cmd_experiment(exp, err) == 0);
    exp.out_dir = dir / "b";
    exp.workers = 2;
    REQUIRE(cli::cmd_experiment(exp, err) == 0);
    CHECK(slurp(dir / "a" / "consistency_metrics.csv") == slurp(dir / "b" / "consistency_metrics.csv"));
    CHECK(fs::exists(dir / "a" / "consistency_plan.json"));
    const std::string svg = slurp(dir / "a" / "consistency_rel_error.svg");
    CHECK(svg.find("viewBox=\"0 0 800 600\"") != std::string::npos);
    std::size_t lines = 0;
    for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++lines;
    CHECK(lines == 2);

    exp.kind = "inconsistency";
    CHECK(cli::cmd_experiment(exp, err) == 2);
  }

  TEST_CASE("plot re-renders a metric CSV") {
    const auto dir = scratch("plot");
    {
      std::ofstream csv(dir / "m.csv");
      cli::write_metric_csv(csv, {MetricRow{"IG_DSIW", 50, 8, 2, 0.9, 0.8, 0.1, 0.1, 0.0},
                                  MetricRow{"IG_DSIW", 200, 15, 2, 0.5, 0.4, 0.1, 0.1, 0.0}});
    }
    cli::PlotArgs args;
    args.metrics = dir / "m.csv";
    args.out_dir = dir;
    std::ostringstream err;
    REQUIRE(cli::cmd_plot(args, err) == 0);
    CHECK(fs::exists(dir / "metrics_tail_prob.svg"));
    args.metrics = dir / "none.csv";
    CHECK(cli::cmd_plot(args, err) == 2);
  }

  TEST_CASE("forced failure in verify exits 1 and the report parses") {
    cli::VerifyArgs args;
    args.quick = true;
    args.c = 0.01;
    std::ostringstream out, err;
    CHECK(cli::cmd_verify(args, out, err) == 1);
    const auto j = json::parse(out.str());
    CHECK_FALSE(j["all_passed"].get<bool>());
    for (const auto& c : j["checks"]) {
      CHECK(c.contains("check_name"));
      CHECK(c["pass_fraction"].get<double>() >= 0.0);
      CHECK(c["trials"].get<int>() >= 1);
    }
  }

  TEST_CASE("svg layout") {
    LineChart chart;
    chart.title = "a < b";
    chart.log_x = true;
    for (int k = 0; k < 7; ++k) chart.series.push_back(Series{"s" + std::to_string(k), {10, 100}, {1.0, 0.5 + k}});
    const std::string svg = render_line_chart(chart);
    CHECK(svg.find("a &lt; b") != std::string::npos);
    const auto second_line = svg.substr(svg.find('\n') + 1, svg.find('\n', svg.find('\n') + 1) - svg.find('\n') - 1);
    CHECK(second_line.find(kSvgGenerator) != std::string::npos);
    CHECK(svg == render_line_chart(chart));
    std::size_t ticks = 0;
    for (auto pos = svg.find("<line"); pos != std::string::npos; pos = svg.find("<line", pos + 1)) ++ticks;
    CHECK(ticks == 22 + 7);  // 11 tick marks per axis plus one legend swatch per series
    chart.series[0].x[0] = -1.0;
    CHECK_THROWS_AS(render_line_chart(chart), ParameterOutOfRange);
  }
}
