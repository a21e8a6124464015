#pragma once

#include <cstddef>
#include <string>

#include "bsdelab/pricing.hpp"

namespace bsdelab {

// Parses an arithmetic expression over terminal prices into a claim.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | primary
//   primary := number | P<k> | ('max' | 'min') '(' expr (',' expr)+ ')' | '(' expr ')'
//
// P0 is the bond, P1..Pd the risky assets; k must not exceed n_assets.
// Numbers use the usual decimal/exponent syntax.  max/min take two or more
// arguments.  Throws std::invalid_argument with the offending position on any
// syntax error.  The returned claim keeps the source text as its label.
ClaimSpec parse_claim(const std::string& text, std::size_t n_assets);

}  // namespace bsdelab
