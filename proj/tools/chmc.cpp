#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "chmc/driver/driver.hpp"
#include "chmc/smt/solver.hpp"

namespace {

void write_json(const std::string & path, const nlohmann::json & j)
{
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char ** argv)
{
  using namespace chmc::driver;
  CLI::App app{ "Model checker for contracts and CHML properties" };
  app.require_subcommand(1);

  TaskConfig cfg;
  std::string engine = "all";
  std::string addresses = "A,B,M";
  std::vector<std::int64_t> bound;
  std::string json_out;
  auto * v = app.add_subcommand("verify", "check every property of a contract");
  v->add_option("--contract", cfg.contract_path, "contract source")->required();
  v->add_option("--props", cfg.props_path, "property file")->required();
  v->add_option("--engine", engine, "all | bmc | kind | oracle")->check(CLI::IsMember({ "all", "bmc", "kind", "oracle" }));
  auto * depth_opt = v->add_option("--max-depth", cfg.max_depth, "BMC depth (explored depth for the oracle)");
  v->add_option("--max-k", cfg.max_k, "largest induction depth");
  v->add_option("--timeout", cfg.timeout, "seconds per property")->check(CLI::PositiveNumber);
  v->add_option("--solver", cfg.solver, "solver command (default $CHMC_SOLVER or 'z3 -in')");
  v->add_option("--addresses", addresses, "user addresses, comma separated");
  v->add_option("--bound-ints", bound, "expand int quantifiers over [LO, HI]")->expected(2);
  v->add_option("--emit-smt", cfg.emit_dir, "write every solver query to this directory");
  v->add_option("--json", json_out, "write the report as JSON");
  v->add_option("--property", cfg.only_property, "check only this property");

  std::string corpus_dir, bench_json;
  BenchOptions bopt;
  auto * b = app.add_subcommand("bench", "run the corpus against its ground truth");
  b->add_option("corpus", corpus_dir, "corpus directory")->required();
  b->add_option("--json", bench_json, "write the table as JSON");
  b->add_option("--timeout", bopt.timeout, "seconds per task")->check(CLI::PositiveNumber);
  b->add_option("--workers", bopt.workers, "parallel tasks");

  std::string trace_path, r_contract, r_props, r_property;
  auto * r = app.add_subcommand("replay", "run a trace on the interpreter");
  r->add_option("trace", trace_path, "trace file (JSON)")->required();
  r->add_option("--contract", r_contract, "contract source")->required();
  r->add_option("--props", r_props, "property file")->required();
  r->add_option("--property", r_property, "property to evaluate at the end")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*v) {
      cfg.engine = parse_engine(engine);
      cfg.addresses.clear();
      std::stringstream ss(addresses);
      for (std::string a; std::getline(ss, a, ',');)
        if (!a.empty()) cfg.addresses.push_back(a);
      if (bound.size() == 2) cfg.bound_ints = std::make_pair(bound[0], bound[1]);
      if (cfg.engine == Engine::Oracle && depth_opt->count()) cfg.oracle_depth = cfg.max_depth;
      if (cfg.solver.empty()) cfg.solver = chmc::smt::default_solver_command();
      Report rep = verify(cfg);
      print_report(std::cout, rep);
      if (!json_out.empty()) write_json(json_out, report_to_json(rep));
      return exit_code(rep);
    }
    if (*b) {
      BenchResult res = bench(corpus_dir, bopt);
      print_bench(std::cout, res);
      if (!bench_json.empty()) write_json(bench_json, bench_to_json(res));
      return res.all_match() ? 0 : 1;
    }
    if (*r) {
      ReplayResult res = replay(trace_path, r_contract, r_props, r_property);
      for (std::size_t i = 0; i < res.states.size(); ++i) {
        if (i == 0)
          std::cout << "initial state\n";
        else
          std::cout << "after step " << i << (res.reverted[i - 1] ? " (reverted: invalid transaction)" : "") << "\n";
        std::cout << res.states[i];
        if (res.states[i].empty() || res.states[i].back() != '\n') std::cout << "\n";
      }
      std::cout << "property " << res.property << (res.property_holds ? " holds" : " is violated")
                << " in the final state\n";
      return res.property_holds ? 0 : 1;
    }
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
