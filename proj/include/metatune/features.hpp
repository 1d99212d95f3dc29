#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace metatune {

enum class TokenKind { Identifier, Keyword, Number, String, Char, Operator, Punct };

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t offset; // byte offset into the original source
};

/// Half-open token index range [begin, end).
struct TokenRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool contains(std::size_t i) const { return i >= begin && i < end; }
  friend bool operator==(const TokenRange &, const TokenRange &) = default;
};

struct SourceUnit {
  std::string path;
  std::vector<Token> tokens;
  std::set<std::string> file_scope_vars;
  std::map<std::string, TokenRange> function_defs; // name -> body (tokens strictly inside the braces)
  std::set<std::string> typedef_names;
  bool balanced = true; // false: brace structure unusable, scan the whole file
  std::vector<std::string> warnings;
};

/// Tokenizes C source with comments and preprocessor lines removed, then
/// recovers file-scope variables and function bodies by brace matching.
/// Never throws; malformed structure is reported through `warnings`.
SourceUnit parse_source(std::string_view text, std::string path = {});

inline constexpr std::size_t kFeatureCount = 11;

/// Sentinel trip count for loops whose bound is not a literal.
inline constexpr std::uint64_t kUnboundedLoop = 1'000'000;

struct ProgramFeatures {
  std::uint64_t threads_created = 0;
  std::uint64_t threads_joined = 0;
  std::uint64_t mutex_locks = 0;
  std::uint64_t atomic_locks = 0;
  std::uint64_t global_var_accesses = 0;
  std::uint64_t global_fn_calls = 0;
  std::uint64_t binary_operators = 0;
  std::uint64_t nondet_variables = 0;
  std::uint64_t min_global_var_access = 0;
  std::uint64_t min_global_fn_calls = 0;
  std::uint64_t loop_iterations = 0;

  std::array<std::uint64_t, kFeatureCount> values() const;
  static ProgramFeatures from_values(const std::array<std::uint64_t, kFeatureCount> &v);

  friend bool operator==(const ProgramFeatures &, const ProgramFeatures &) = default;
};

/// Field names in canonical order.
const std::array<std::string_view, kFeatureCount> &feature_names();

/// Function-name sets recognised as concurrency / nondeterminism intrinsics.
struct IntrinsicNames {
  std::set<std::string> thread_create{"pthread_create"};
  std::set<std::string> thread_join{"pthread_join"};
  std::set<std::string> mutex_lock{"pthread_mutex_lock", "pthread_mutex_trylock"};
  std::set<std::string> atomic_begin{"__VERIFIER_atomic_begin"};
  std::string atomic_prefix = "__VERIFIER_atomic_";
  std::set<std::string> atomic_excluded{"__VERIFIER_atomic_end"};
  std::string nondet_prefix = "__VERIFIER_nondet";
};

ProgramFeatures extract_features(const SourceUnit &unit, const IntrinsicNames &names = {});

/// One-line `{"file":...,"threads_created":...}` record.
std::string features_to_json(const ProgramFeatures &f, std::string_view file);

} // namespace metatune
