#pragma once

// Semantics-preserving source rewrites for the feature extractor tests.

#include "metatune/features.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace metatune::testing {

/// Inserts a block comment before a random subset of tokens.
inline std::string insert_comments(const std::string &text, std::mt19937_64 &rng) {
  const auto unit = parse_source(text);
  std::string out = text;
  std::bernoulli_distribution pick(0.4);
  for (std::size_t i = unit.tokens.size(); i-- > 0;)
    if (pick(rng))
      out.insert(unit.tokens[i].offset, "/* inserted, with pthread_create(x) */ ");
  return out;
}

/// Renames every occurrence of the given local identifiers.
inline std::string rename_locals(const std::string &text, const std::vector<std::string> &locals) {
  const auto unit = parse_source(text);
  std::string out = text;
  for (std::size_t i = unit.tokens.size(); i-- > 0;) {
    const auto &t = unit.tokens[i];
    if (t.kind == TokenKind::Identifier && std::find(locals.begin(), locals.end(), t.text) != locals.end())
      out.replace(t.offset, t.text.size(), "renamed_" + t.text + "_q");
  }
  return out;
}

} // namespace metatune::testing
