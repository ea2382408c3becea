#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chmc/driver/driver.hpp"
#include "chmc/smt/solver.hpp"

namespace py = pybind11;
using namespace chmc::driver;

namespace {

std::string verify_json(const std::string & contract, const std::string & props, const std::string & engine,
                        std::optional<int> max_depth, int max_k, double timeout, const std::string & solver,
                        const std::vector<std::string> & addresses,
                        std::optional<std::pair<std::int64_t, std::int64_t>> bound_ints, const std::string & property)
{
  TaskConfig cfg;
  cfg.contract_path = contract;
  cfg.props_path = props;
  cfg.engine = parse_engine(engine);
  if (max_depth) {
    cfg.max_depth = *max_depth;
    if (cfg.engine == Engine::Oracle) cfg.oracle_depth = *max_depth;
  }
  cfg.max_k = max_k;
  cfg.timeout = timeout;
  cfg.solver = solver.empty() ? chmc::smt::default_solver_command() : solver;
  cfg.addresses = addresses;
  cfg.bound_ints = bound_ints;
  cfg.only_property = property;
  Report rep;
  {
    py::gil_scoped_release nogil;
    rep = verify(cfg);
  }
  return report_to_json(rep).dump();
}

std::string bench_json(const std::string & corpus, double timeout, int workers, const std::string & solver)
{
  BenchOptions opt;
  opt.timeout = timeout;
  opt.workers = workers;
  opt.solver = solver.empty() ? chmc::smt::default_solver_command() : solver;
  py::gil_scoped_release nogil;
  return bench_to_json(bench(corpus, opt)).dump();
}

}  // namespace

PYBIND11_MODULE(_chmc, m)
{
  m.def("verify_json", &verify_json, py::arg("contract"), py::arg("props"), py::arg("engine") = "all",
        py::arg("max_depth") = py::none(), py::arg("max_k") = 10, py::arg("timeout") = 1000.0,
        py::arg("solver") = "", py::arg("addresses") = std::vector<std::string>{ "A", "B", "M" },
        py::arg("bound_ints") = py::none(), py::arg("property") = "");
  m.def("bench_json", &bench_json, py::arg("corpus"), py::arg("timeout") = 1000.0, py::arg("workers") = 0,
        py::arg("solver") = "");

  py::class_<ReplayResult>(m, "ReplayResult")
    .def_readonly("states", &ReplayResult::states)
    .def_readonly("reverted", &ReplayResult::reverted)
    .def_readonly("property_holds", &ReplayResult::property_holds)
    .def_readonly("property", &ReplayResult::property);
  m.def("replay", &replay, py::arg("trace"), py::arg("contract"), py::arg("props"), py::arg("property"),
        py::arg("ints") = std::pair<std::int64_t, std::int64_t>{ 0, 10 });
  m.def("default_solver", &chmc::smt::default_solver_command);

  py::register_exception<std::runtime_error>(m, "ChmcError");
}
