#pragma once

#include <string>
#include <vector>

#include "chmc/fol/encoder.hpp"

namespace chmc::smt {

// SMT-LIB2 text for a transition system. Addresses and procedures are
// lowered to Int; every state copy k uses the suffix "__k".
class Emitter
{
 public:
  explicit Emitter(const fol::TransitionSystem & ts) : ts_(ts) {}

  std::string preamble() const;
  // init, trans, state_ok, tx_ok
  std::string system_definitions() const;
  // (define-fun name (<state params>) Bool body); body is over ts.s()
  std::string define_state_predicate(const std::string & name, fol::Term body) const;

  std::string declare_state(int k) const;
  std::string declare_tx(int k) const;

  std::vector<std::string> state_names(int k) const;
  std::vector<std::string> tx_names(int k) const;

  std::string apply_state(const std::string & fn, int k) const;
  std::string apply_tx(const std::string & fn, int k) const;
  std::string apply_trans(int k) const;  // trans(s_k, t_k, s_k+1)

  std::string term(fol::Term t) const;

 private:
  std::string params(const std::vector<fol::Term> & vars) const;

  const fol::TransitionSystem & ts_;
};

std::string smt_sort(Sort s);

// Standalone BMC query: Init at step 0, Trans between consecutive steps
// and the negated property at the last step.
std::string emit_bmc_query(const fol::TransitionSystem & ts, fol::Term prop, int depth);

}  // namespace chmc::smt
