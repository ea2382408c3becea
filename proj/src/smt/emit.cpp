#include "chmc/smt/emit.hpp"

#include <sstream>

namespace chmc::smt {

using fol::Term;

std::string smt_sort(Sort s) { return s == Sort::Bool ? "Bool" : "Int"; }

std::string Emitter::preamble() const { return "(set-logic ALL)\n"; }

std::string Emitter::term(Term t) const { return fol::to_sexpr(ts_.tm(), t, true, true); }

std::string Emitter::params(const std::vector<Term> & vars) const
{
  std::string out;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i) out += ' ';
    out += "(" + vars[i]->name + " " + smt_sort(vars[i]->sort) + ")";
  }
  return out;
}

std::string Emitter::system_definitions() const
{
  std::ostringstream os;
  os << "(define-fun init (" << params(ts_.s()) << ") Bool\n  " << term(ts_.init()) << ")\n";
  os << "(define-fun state_ok (" << params(ts_.s()) << ") Bool\n  " << term(ts_.state_domain(ts_.s())) << ")\n";
  os << "(define-fun tx_ok (" << params(ts_.t()) << ") Bool\n  " << term(ts_.tx_domain(ts_.t())) << ")\n";
  std::vector<Term> all = ts_.s();
  all.insert(all.end(), ts_.t().begin(), ts_.t().end());
  all.insert(all.end(), ts_.nx().begin(), ts_.nx().end());
  os << "(define-fun trans (" << params(all) << ") Bool\n  " << term(ts_.trans()) << ")\n";
  return os.str();
}

std::string Emitter::define_state_predicate(const std::string & name, Term body) const
{
  return "(define-fun " + name + " (" + params(ts_.s()) + ") Bool\n  " + term(body) + ")\n";
}

std::vector<std::string> Emitter::state_names(int k) const
{
  std::vector<std::string> out;
  for (const auto & v : ts_.state_layout().vars) out.push_back(fol::TransitionSystem::copy_name(v.name, std::to_string(k)));
  return out;
}

std::vector<std::string> Emitter::tx_names(int k) const
{
  std::vector<std::string> out;
  for (const auto & v : ts_.tx_layout().vars) out.push_back(fol::TransitionSystem::copy_name(v.name, std::to_string(k)));
  return out;
}

std::string Emitter::declare_state(int k) const
{
  std::string out;
  auto names = state_names(k);
  for (std::size_t i = 0; i < names.size(); ++i)
    out += "(declare-const " + names[i] + " " + smt_sort(ts_.state_layout().vars[i].sort) + ")\n";
  return out;
}

std::string Emitter::declare_tx(int k) const
{
  std::string out;
  auto names = tx_names(k);
  for (std::size_t i = 0; i < names.size(); ++i)
    out += "(declare-const " + names[i] + " " + smt_sort(ts_.tx_layout().vars[i].sort) + ")\n";
  return out;
}

namespace {

std::string call(const std::string & fn, const std::vector<std::vector<std::string>> & groups)
{
  std::string out = "(" + fn;
  for (const auto & g : groups)
    for (const auto & n : g) out += " " + n;
  return out + ")";
}

}  // namespace

std::string Emitter::apply_state(const std::string & fn, int k) const { return call(fn, { state_names(k) }); }
std::string Emitter::apply_tx(const std::string & fn, int k) const { return call(fn, { tx_names(k) }); }

std::string Emitter::apply_trans(int k) const
{
  return call("trans", { state_names(k), tx_names(k), state_names(k + 1) });
}

std::string emit_bmc_query(const fol::TransitionSystem & ts, Term prop, int depth)
{
  Emitter em(ts);
  std::ostringstream os;
  os << em.preamble() << em.system_definitions() << em.define_state_predicate("prop", prop);
  os << em.declare_state(0) << "(assert " << em.apply_state("init", 0) << ")\n";
  for (int k = 0; k < depth; ++k) {
    os << em.declare_tx(k) << em.declare_state(k + 1);
    os << "(assert " << em.apply_tx("tx_ok", k) << ")\n";
    os << "(assert " << em.apply_trans(k) << ")\n";
  }
  os << "(assert (not " << em.apply_state("prop", depth) << "))\n(check-sat)\n";
  return os.str();
}

}  // namespace chmc::smt
