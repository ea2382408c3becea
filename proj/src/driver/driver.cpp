#include "chmc/driver/driver.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "chmc/chml/formula.hpp"
#include "chmc/contract/parser.hpp"
#include "chmc/contract/typecheck.hpp"
#include "chmc/fol/property.hpp"
#include "chmc/oracle/oracle.hpp"
#include "chmc/semantics/interpreter.hpp"
#include "chmc/semantics/trace.hpp"
#include "chmc/smt/engines.hpp"

namespace chmc::driver {

using nlohmann::json;
namespace fs = std::filesystem;

std::string read_text(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Engine parse_engine(const std::string & s)
{
  if (s == "all") return Engine::All;
  if (s == "bmc") return Engine::Bmc;
  if (s == "kind") return Engine::Kind;
  if (s == "oracle") return Engine::Oracle;
  throw std::invalid_argument("unknown engine '" + s + "'");
}

const char * engine_name(Engine e)
{
  switch (e) {
    case Engine::All: return "all";
    case Engine::Bmc: return "bmc";
    case Engine::Kind: return "kind";
    case Engine::Oracle: return "oracle";
  }
  return "?";
}

json report_to_json(const Report & r)
{
  json props = json::array();
  for (const auto & p : r.results) {
    json j{ { "name", p.name },         { "verdict", p.verdict },
            { "depth", p.depth },       { "engine", p.engine },
            { "seconds", p.seconds },   { "solver_seconds", p.solver_seconds },
            { "bounded", p.bounded },   { "reason", p.reason } };
    if (p.verdict == "invalid") j["trace"] = p.trace;
    if (!p.oracle_check.empty()) j["oracle_check"] = p.oracle_check;
    props.push_back(std::move(j));
  }
  return json{ { "contract", r.contract }, { "properties_file", r.properties }, { "properties", props },
               { "errors", r.errors } };
}

Report report_from_json(const json & j)
{
  Report r;
  r.contract = j.at("contract").get<std::string>();
  r.properties = j.at("properties_file").get<std::string>();
  for (const auto & e : j.at("errors")) r.errors.push_back(e.get<std::string>());
  for (const auto & p : j.at("properties")) {
    PropertyResult x;
    x.name = p.at("name").get<std::string>();
    x.verdict = p.at("verdict").get<std::string>();
    x.depth = p.at("depth").get<int>();
    x.engine = p.at("engine").get<std::string>();
    x.seconds = p.at("seconds").get<double>();
    x.solver_seconds = p.at("solver_seconds").get<double>();
    x.bounded = p.at("bounded").get<bool>();
    x.reason = p.at("reason").get<std::string>();
    if (p.contains("trace")) x.trace = p.at("trace");
    x.oracle_check = p.value("oracle_check", "");
    r.results.push_back(std::move(x));
  }
  return r;
}

namespace {

System load_with_roster(const std::string & src, const std::vector<std::string> & addresses)
{
  std::vector<std::string> contracts;
  for (const auto & d : parse_contracts(src)) contracts.push_back(d.name);
  std::vector<std::string> users;
  for (const auto & a : addresses)
    if (std::find(contracts.begin(), contracts.end(), a) == contracts.end()) users.push_back(a);
  return load_system(src, users);
}

void add_frontend_errors(Report & rep, const std::string & file, const FrontendError & e)
{
  for (const auto & d : e.diagnostics()) rep.errors.push_back(file + ":" + d.str());
  if (e.diagnostics().empty()) rep.errors.push_back(file + ": " + e.what());
}

FiniteDomains domains_for(const System & sys, const TypedFormula & f, std::pair<std::int64_t, std::int64_t> ints,
                          std::int64_t user_balance)
{
  FiniteDomains d = make_domains(sys, { &f.root }, ints.first, ints.second);
  d.user_balance = user_balance;
  return d;
}

PropertyResult run_oracle(const TaskConfig & cfg, const System & sys, const TypedProperty & p)
{
  PropertyResult r;
  r.name = p.name;
  r.engine = "oracle";
  r.bounded = true;
  auto ints = cfg.bound_ints ? *cfg.bound_ints : cfg.oracle_ints;
  auto t0 = std::chrono::steady_clock::now();
  OracleVerdict v = check_reachable(sys, p.formula, cfg.oracle_depth, domains_for(sys, p.formula, ints, cfg.user_balance));
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  switch (v.status) {
    case OracleStatus::Holds:
      r.verdict = "valid";
      r.depth = cfg.oracle_depth;
      r.reason = "holds on every state reachable within depth " + std::to_string(cfg.oracle_depth);
      break;
    case OracleStatus::Fails:
      r.verdict = "invalid";
      r.depth = static_cast<int>(v.witness.size());
      r.trace = trace_to_json(sys, v.witness);
      break;
    case OracleStatus::Inconclusive:
      r.verdict = "unknown";
      r.reason = "inconclusive: " + v.reason;
      break;
  }
  return r;
}

PropertyResult run_smt(const TaskConfig & cfg, const System & sys, const TypedProperty & p)
{
  PropertyResult r;
  r.name = p.name;
  fol::TermManager tm;
  fol::TransitionSystem ts(tm, sys, cfg.user_balance);
  fol::PropertyOptions po;
  if (cfg.bound_ints)
    po.int_domain = domains_for(sys, p.formula, *cfg.bound_ints, cfg.user_balance).ints;
  fol::PropertyEncoding enc = fol::encode_property(ts, p.formula, ts.s(), po);
  smt::EngineConfig ec;
  ec.max_depth = cfg.max_depth;
  ec.max_k = cfg.max_k;
  ec.timeout = cfg.timeout;
  ec.solver = cfg.solver;
  ec.emit_dir = cfg.emit_dir;
  ec.emit_prefix = p.name;
  ec.bounded = cfg.bound_ints.has_value();
  bool use_bmc = cfg.engine != Engine::Kind;
  bool use_kind = cfg.engine != Engine::Bmc;
  smt::PreparedTask task = smt::prepare_task(ts, enc.formula, use_kind);
  smt::Verdict v = smt::run_engines(task, ec, use_bmc, use_kind);
  r.verdict = smt::verdict_name(v.kind);
  r.depth = v.depth;
  r.engine = v.engine;
  r.seconds = v.seconds;
  r.solver_seconds = v.solver_seconds;
  r.bounded = v.bounded;
  r.reason = v.reason;
  if (v.kind == smt::VerdictKind::Invalid) {
    r.trace = trace_to_json(sys, v.trace);
    if (cfg.cross_check) {
      auto states = run_trace(sys, v.trace, cfg.user_balance);
      auto ints = cfg.bound_ints ? *cfg.bound_ints : cfg.oracle_ints;
      try {
        bool holds =
            eval_formula(sys, seq_singleton(states.back()), p.formula, domains_for(sys, p.formula, ints, cfg.user_balance));
        r.oracle_check = holds ? "refuted" : "confirmed";
      } catch (const DomainExhausted &) {
        r.oracle_check = "skipped";
      }
    }
  }
  return r;
}

}  // namespace

Report verify(const TaskConfig & cfg)
{
  Report rep;
  rep.contract = cfg.contract_path;
  rep.properties = cfg.props_path;
  System sys;
  std::vector<TypedProperty> props;
  try {
    std::string csrc = read_text(cfg.contract_path);
    try {
      sys = load_with_roster(csrc, cfg.addresses);
    } catch (const FrontendError & e) {
      add_frontend_errors(rep, cfg.contract_path, e);
      return rep;
    }
    std::string psrc = read_text(cfg.props_path);
    try {
      props = load_properties(psrc, sys);
    } catch (const FrontendError & e) {
      add_frontend_errors(rep, cfg.props_path, e);
      return rep;
    }
  } catch (const std::exception & e) {
    rep.errors.push_back(e.what());
    return rep;
  }
  for (const auto & p : props) {
    if (!cfg.only_property.empty() && p.name != cfg.only_property) continue;
    try {
      rep.results.push_back(cfg.engine == Engine::Oracle ? run_oracle(cfg, sys, p) : run_smt(cfg, sys, p));
    } catch (const std::exception & e) {
      rep.errors.push_back(p.name + ": " + e.what());
      PropertyResult r;
      r.name = p.name;
      r.verdict = "unknown";
      r.engine = engine_name(cfg.engine);
      r.reason = std::string("error: ") + e.what();
      rep.results.push_back(std::move(r));
    }
  }
  if (!cfg.only_property.empty() && rep.results.empty()) rep.errors.push_back("no property named " + cfg.only_property);
  return rep;
}

int exit_code(const Report & r)
{
  if (!r.errors.empty()) return 2;
  for (const auto & p : r.results)
    if (p.verdict == "invalid") return 1;
  return 0;
}

namespace {

std::string format_json_tx(const json & t)
{
  std::ostringstream os;
  os << t.at("sender").get<std::string>() << " -> " << t.at("contract").get<std::string>() << "."
     << t.at("proc").get<std::string>() << "(";
  bool first = true;
  for (const auto & a : t.at("args")) {
    if (!first) os << ", ";
    first = false;
    os << (a.is_string() ? a.get<std::string>() : a.dump());
  }
  os << ") value " << t.at("value").get<std::int64_t>();
  if (t.value("blockDelta", 0) != 0) os << " delta " << t.at("blockDelta").get<std::int64_t>();
  return os.str();
}

}  // namespace

void print_report(std::ostream & os, const Report & r)
{
  for (const auto & e : r.errors) os << "error: " << e << "\n";
  for (const auto & p : r.results) {
    os << p.name << ": " << p.verdict;
    if (p.verdict == "valid") os << " (k=" << p.depth << ")";
    if (p.verdict == "invalid") os << " at depth " << p.depth;
    if (p.bounded) os << " [bounded]";
    os << "  " << p.engine << ", " << std::fixed << std::setprecision(2) << p.seconds << " s\n";
    os.unsetf(std::ios::fixed);
    if (p.verdict == "unknown" && !p.reason.empty()) os << "  " << p.reason << "\n";
    if (p.verdict == "invalid") {
      int i = 1;
      for (const auto & t : p.trace) os << "  " << i++ << ". " << format_json_tx(t) << "\n";
      if (!p.oracle_check.empty()) os << "  oracle check: " << p.oracle_check << "\n";
    }
  }
}

bool BenchResult::all_match() const
{
  return std::all_of(rows.begin(), rows.end(), [](const BenchRow & r) { return r.match; });
}

BenchResult bench(const std::string & corpus_dir, const BenchOptions & opt)
{
  struct Task
  {
    BenchRow row;
    TaskConfig cfg;
  };
  std::vector<Task> tasks;
  std::vector<fs::path> usecases;
  for (const auto & e : fs::directory_iterator(corpus_dir))
    if (e.is_directory() && fs::exists(e.path() / "properties.hml")) usecases.push_back(e.path());
  if (usecases.empty()) throw std::runtime_error("no use cases under " + corpus_dir);
  std::sort(usecases.begin(), usecases.end());
  for (const auto & uc : usecases) {
    fs::path gt_path = uc / "ground_truth.json";
    if (!fs::exists(gt_path)) throw std::runtime_error("missing ground truth file " + gt_path.string());
    json gt = json::parse(read_text(gt_path.string()));
    const json & labels = gt.at("labels");
    for (auto it = labels.begin(); it != labels.end(); ++it) {
      fs::path contract = uc / it.key() / "contract.sol";
      if (!fs::exists(contract)) throw std::runtime_error("ground truth names a missing variant " + contract.string());
      for (auto pt = it.value().begin(); pt != it.value().end(); ++pt) {
        Task t;
        t.row.usecase = uc.filename().string();
        t.row.variant = it.key();
        t.row.property = pt.key();
        t.row.expected = pt.value().at("status").get<std::string>();
        t.row.expected_depth = pt.value().value("witness_length", -1);
        t.cfg.contract_path = contract.string();
        t.cfg.props_path = (uc / "properties.hml").string();
        t.cfg.only_property = pt.key();
        t.cfg.timeout = opt.timeout;
        t.cfg.solver = opt.solver;
        t.cfg.cross_check = false;
        tasks.push_back(std::move(t));
      }
    }
  }
  int workers = opt.workers > 0 ? opt.workers : std::max(1u, std::thread::hardware_concurrency() / 2);
  std::atomic<std::size_t> next{ 0 };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < tasks.size();) {
        Task & t = tasks[i];
        Report rep = verify(t.cfg);
        if (!rep.errors.empty() || rep.results.size() != 1) {
          t.row.status = "error";
          continue;
        }
        const PropertyResult & p = rep.results[0];
        t.row.status = p.verdict;
        t.row.depth = p.depth;
        t.row.seconds = p.seconds;
      }
    });
  for (auto & th : pool) th.join();
  BenchResult out;
  for (auto & t : tasks) {
    BenchRow & r = t.row;
    r.match = r.status == r.expected && (r.expected != "invalid" || r.expected_depth < 0 || r.depth == r.expected_depth);
    out.rows.push_back(r);
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const BenchRow & a, const BenchRow & b) {
    return std::tie(a.usecase, a.property, a.variant) < std::tie(b.usecase, b.property, b.variant);
  });
  return out;
}

json bench_to_json(const BenchResult & b)
{
  json rows = json::array();
  for (const auto & r : b.rows)
    rows.push_back(json{ { "usecase", r.usecase },   { "property", r.property }, { "variant", r.variant },
                         { "status", r.status },     { "depth", r.depth },       { "seconds", r.seconds },
                         { "expected", r.expected }, { "match", r.match } });
  return json{ { "rows", rows }, { "all_match", b.all_match() } };
}

void print_bench(std::ostream & os, const BenchResult & b)
{
  os << std::left << std::setw(8) << "usecase" << std::setw(18) << "property" << std::setw(8) << "variant"
     << std::setw(10) << "status" << std::setw(7) << "depth" << std::setw(10) << "time(s)" << "expected\n";
  for (const auto & r : b.rows) {
    std::ostringstream t;
    t << std::fixed << std::setprecision(2) << r.seconds;
    os << std::setw(8) << r.usecase << std::setw(18) << r.property << std::setw(8) << r.variant << std::setw(10)
       << r.status << std::setw(7) << r.depth << std::setw(10) << t.str() << r.expected << (r.match ? "" : "  MISMATCH")
       << "\n";
  }
  os << (b.all_match() ? "all rows match the ground truth\n" : "some rows differ from the ground truth\n");
}

ReplayResult replay(const std::string & trace_path, const std::string & contract_path, const std::string & props_path,
                    const std::string & property, std::pair<std::int64_t, std::int64_t> ints)
{
  System sys = load_system(read_text(contract_path));
  auto props = load_properties(read_text(props_path), sys);
  const TypedProperty * prop = nullptr;
  for (const auto & p : props)
    if (p.name == property) prop = &p;
  if (!prop) throw std::runtime_error("no property named " + property);
  auto trace = trace_from_json(sys, json::parse(read_text(trace_path)));
  auto states = run_trace(sys, trace);
  ReplayResult r;
  r.property = property;
  for (std::size_t i = 0; i < states.size(); ++i) {
    r.states.push_back(format_state(sys, states[i]));
    if (i > 0) r.reverted.push_back(states[i].reverted);
  }
  r.property_holds = eval_formula(sys, seq_singleton(states.back()), prop->formula, domains_for(sys, prop->formula, ints, 10));
  return r;
}

}  // namespace chmc::driver
