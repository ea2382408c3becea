#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "chmc/chml/formula.hpp"
#include "chmc/contract/typecheck.hpp"

namespace chmc::test {

inline std::string read_file(const std::string & path)
{
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string corpus(const std::string & rel)
{
  return read_file(std::string(CHMC_CORPUS_DIR) + "/" + rel);
}

// The Bet contract exactly as listed, with the player field declared.
inline const char * bet_listing = R"(
contract Bet {
  address oracle;
  int rate;
  address player;

  constructor(address o, int x) payable {
    oracle = o; rate = x;
  }
  function join() payable {
    require (balance==2*value && player==null);
    player = sender;
  }
  function win() {
    require (rate>100);
    player.transfer(balance);
  }
  function set(int x) {
    require (sender==oracle);
    rate = x;
  }
}
)";

inline const char * bank_listing = R"(
contract Bank {
  mapping (address => uint) credits;

  function deposit() payable {
    credits[msg.sender] += msg.value;
  }

  function withdraw(uint amount) {
    credits[msg.sender] -= amount;
    msg.sender.transfer(amount);
  }
}
)";

inline TypedProperty find_property(const std::vector<TypedProperty> & ps, const std::string & n)
{
  for (const auto & p : ps)
    if (p.name == n) return p;
  throw std::runtime_error("no property " + n);
}

}  // namespace chmc::test
