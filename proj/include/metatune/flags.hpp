#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace metatune {

/// A positive bound; `std::nullopt` means unlimited.
using Bound = std::optional<std::uint32_t>;
inline constexpr Bound kUnlimited = std::nullopt;

enum class Strategy : std::uint8_t { None = 0, Incr = 1, KInduction = 2 };

std::string_view to_string(Strategy s);

/// One assignment of the backend's tunable flags.
struct FlagConfiguration {
  Bound context_bound = kUnlimited;
  Strategy strategy = Strategy::None;
  std::uint32_t k_step = 1; // only meaningful when strategy != None
  Bound unwind = kUnlimited;
  bool no_por = false;
  bool no_goto_merge = false;
  bool state_hashing = false;
  bool add_symex_value_sets = false;

  /// Copy with k_step forced to 1 when no strategy is active.
  FlagConfiguration normalized() const;

  /// Equality modulo k_step normalization.
  friend bool operator==(const FlagConfiguration &a, const FlagConfiguration &b);
};

/// The backend's own defaults: every flag left unset.
FlagConfiguration default_config();

inline constexpr std::size_t kFlagFieldCount = 8;
using EncodedFlags = std::array<double, kFlagFieldCount>;

/// Numeric form in field order; Unlimited -> -1, strategy -> 0/1/2, bools -> 0/1.
EncodedFlags encode(const FlagConfiguration &config);

/// Inverse of `encode`; throws FormatError on values outside the domain.
FlagConfiguration decode(const EncodedFlags &encoded);

/// Spelling of strategy switches on the backend command line.
struct FlagSpelling {
  std::string incremental = "--incremental-bmc";
  std::string k_induction = "--k-induction";
};

std::vector<std::string> render_flags(const FlagConfiguration &config, const FlagSpelling &spelling = {});

/// Reads back a rendered argument list. Unrecognised arguments are returned in
/// `rest` (when non-null) rather than rejected.
FlagConfiguration parse_flag_args(std::span<const std::string> args, const FlagSpelling &spelling = {},
                                  std::vector<std::string> *rest = nullptr);

/// Ordered, duplicate-free list of configurations. The order is the
/// predictor's tie-break order.
class FlagGrid {
public:
  FlagGrid() = default;
  /// Throws FormatError if two entries are equal after normalization.
  explicit FlagGrid(std::vector<FlagConfiguration> configs);

  std::size_t size() const { return configs_.size(); }
  bool empty() const { return configs_.empty(); }
  const FlagConfiguration &operator[](std::size_t i) const { return configs_[i]; }
  auto begin() const { return configs_.begin(); }
  auto end() const { return configs_.end(); }

  std::optional<std::size_t> index_of(const FlagConfiguration &config) const;

  friend bool operator==(const FlagGrid &, const FlagGrid &) = default;

private:
  std::vector<FlagConfiguration> configs_;
};

/// The built-in 240-entry grid: context_bound {1,2,3,U} x unwind {1,8,32,128,U}
/// x (strategy,k_step) {(None,1),(Incr,1),(Incr,4)} x no_por x no_goto_merge,
/// row-major in that order.
FlagGrid canonical_grid();

/// Grid file: one `cb,strategy,k,unwind,por,goto,hash,vs` line per entry,
/// `U` for Unlimited, `#` comments.
FlagGrid read_grid(std::istream &in);
FlagGrid read_grid_file(const std::string &path);
void write_grid(std::ostream &out, const FlagGrid &grid);

std::string format_config_line(const FlagConfiguration &config);
FlagConfiguration parse_config_line(std::string_view line, std::size_t line_no = 0);

} // namespace metatune
