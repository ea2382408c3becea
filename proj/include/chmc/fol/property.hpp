#pragma once

#include <optional>

#include "chmc/chml/formula.hpp"
#include "chmc/fol/encoder.hpp"

namespace chmc::fol {

// One node per modal instance after finite expansion; node 0 is the root.
struct ModalTree
{
  struct Node
  {
    int parent = -1;
    int depth = 0;
    int proc = -1;  // -1 at the root
  };
  std::vector<Node> nodes;

  int max_depth() const;
};

struct PropertyOptions
{
  // When set, int quantifiers and int arguments range over this list
  // instead of all integers.
  std::optional<std::vector<std::int64_t>> int_domain;
  bool normalize = true;
};

struct PropertyEncoding
{
  Term formula = nullptr;  // over the root state terms (and nothing else)
  ModalTree tree;
};

PropertyEncoding encode_property(const TransitionSystem & ts, const TypedFormula & f, const StateTerms & root,
                                 const PropertyOptions & opt = {});

// NNF, quantifier miniscoping and one-point elimination.
Term normalize(TermManager & tm, Term t);

}  // namespace chmc::fol
