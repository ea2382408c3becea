#pragma once

// Direct transcription of the satisfaction relation over finite domains,
// with no pruning. Slow; used to check the optimized oracle.

#include <functional>

#include "chmc/oracle/oracle.hpp"
#include "chmc/semantics/interpreter.hpp"

namespace chmc::test {

class ReferenceEval
{
 public:
  ReferenceEval(const System & sys, const TypedFormula & tf, const FiniteDomains & dom)
      : sys_(sys), dom_(dom), vars_(tf.var_sorts.size()), args_(tf.var_sorts.size())
  {
  }

  bool eval(const StateSeq & seq, const Formula & f)
  {
    switch (f.kind) {
      case FormulaKind::Expr: return value(seq, f.expr) != 0;
      case FormulaKind::Not: return !eval(seq, f.kids[0]);
      case FormulaKind::And: return eval(seq, f.kids[0]) && eval(seq, f.kids[1]);
      case FormulaKind::Modal: {
        const ModalLabel & l = f.label;
        Transaction tx;
        tx.sender = static_cast<int>(value(seq, l.sender));
        tx.contract = sys_.roster.contract_address(l.contract_index);
        int p = l.proc.kind == ExprKind::ProcConst ? l.proc.index : static_cast<int>(vars_[l.proc.index]);
        if (sys_.procs[p].contract == l.contract_index) {
          tx.proc_id = p;
          tx.proc = sys_.procs[p].name;
        }
        if (l.args_var) {
          tx.args = args_[l.args[0].index][p];
        } else {
          for (size_t i = 0; i < l.args.size(); ++i)
            tx.args.push_back(Value{ l.args[i].type, value(seq, l.args[i]) });
        }
        tx.value = value(seq, l.value);
        tx.block_delta = l.has_delta ? value(seq, l.delta) : 0;
        return eval(seq_push(seq, step_flagged(sys_, seq->state, tx)), f.kids[0]);
      }
      case FormulaKind::Forall: {
        if (f.var_sort == Sort::Args) {
          // every procedure gets an independent parameter vector
          std::vector<std::pair<int, int>> slots;
          args_[f.var_id].assign(sys_.procs.size(), {});
          for (size_t p = 0; p < sys_.procs.size(); ++p) {
            args_[f.var_id][p].resize(sys_.proc(static_cast<int>(p)).params.size());
            for (size_t i = 0; i < args_[f.var_id][p].size(); ++i)
              slots.emplace_back(static_cast<int>(p), static_cast<int>(i));
          }
          std::function<bool(size_t)> rec = [&](size_t k) {
            if (k == slots.size()) return eval(seq, f.kids[0]);
            auto [p, i] = slots[k];
            Sort s = sys_.proc(p).params[i].type.scalar;
            for (auto v : domain(s)) {
              args_[f.var_id][p][i] = Value{ s, v };
              if (!rec(k + 1)) return false;
            }
            return true;
          };
          return rec(0);
        }
        for (auto v : domain(f.var_sort)) {
          vars_[f.var_id] = v;
          if (!eval(seq, f.kids[0])) return false;
        }
        return true;
      }
    }
    return false;
  }

 private:
  std::vector<std::int64_t> domain(Sort s) const
  {
    std::vector<std::int64_t> out;
    switch (s) {
      case Sort::Bool: return { 0, 1 };
      case Sort::Address:
        for (int i = 0; i < sys_.roster.num_values(); ++i) out.push_back(i);
        return out;
      case Sort::Proc:
        for (size_t i = 0; i < sys_.procs.size(); ++i) out.push_back(static_cast<std::int64_t>(i));
        return out;
      default: return dom_.ints;
    }
  }

  std::int64_t value(const StateSeq & seq, const Expr & e)
  {
    const ChainState & s = seq->state.state;
    auto kid = [&](int i) { return value(seq, e.kids[i]); };
    switch (e.kind) {
      case ExprKind::Null: return 0;
      case ExprKind::BoolLit:
      case ExprKind::IntLit: return e.num;
      case ExprKind::AddrConst:
      case ExprKind::ProcConst: return e.index;
      case ExprKind::BoundVar: return vars_[e.index];
      case ExprKind::Field: return read_field(sys_, s, e.owner_index, e.index).v;
      case ExprKind::MapLookup:
        return read_field(sys_, s, e.owner_index, e.index, static_cast<int>(kid(0))).v;
      case ExprKind::Balance: return s.balance[kid(0)];
      case ExprKind::BlockNumber: return s.block_number;
      case ExprKind::LastReverted: return seq->state.reverted;
      case ExprKind::Old: return value(seq->tail, e.kids[0]);
      case ExprKind::Unary: return e.op == Op::Not ? !kid(0) : -kid(0);
      case ExprKind::Binary: {
        std::int64_t a = kid(0), b = kid(1);
        switch (e.op) {
          case Op::Add: return a + b;
          case Op::Sub: return a - b;
          case Op::Mul: return a * b;
          case Op::Eq: return a == b;
          case Op::Ne: return a != b;
          case Op::Lt: return a < b;
          case Op::Le: return a <= b;
          case Op::Gt: return a > b;
          case Op::Ge: return a >= b;
          case Op::And: return a && b;
          case Op::Or: return a || b;
          default: break;
        }
        break;
      }
      default: break;
    }
    throw std::logic_error("reference: unexpected expression");
  }

  const System & sys_;
  const FiniteDomains & dom_;
  std::vector<std::int64_t> vars_;
  std::vector<std::vector<std::vector<Value>>> args_;
};

}  // namespace chmc::test
