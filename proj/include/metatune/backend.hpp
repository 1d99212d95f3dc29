#pragma once

#include "metatune/flags.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace metatune {

/// What the verifier printed, before comparison with ground truth.
enum class RawVerdict : std::uint8_t { True, False, Unknown, Timeout, Error };

/// Verdict judged against the expected answer.
enum class VerdictKind : std::uint8_t { CorrectTrue, CorrectFalse, Unknown, Incorrect, Timeout, Error };

enum class Expected : std::uint8_t { True, False, Unspecified };

std::string_view to_string(RawVerdict v);
std::string_view to_string(VerdictKind v);
std::string_view to_string(Expected e);
std::optional<RawVerdict> parse_raw_verdict_tag(std::string_view s);
std::optional<VerdictKind> parse_verdict_tag(std::string_view s);
std::optional<Expected> parse_expected(std::string_view s);

/// Ordinal outcome label, 0 (fast and correct) to 5 (incorrect).
class OutcomeClass {
public:
  static constexpr int kMin = 0;
  static constexpr int kMax = 5;

  constexpr OutcomeClass() = default;
  /// Throws std::out_of_range outside [0, 5].
  explicit OutcomeClass(int value);

  constexpr int value() const { return value_; }
  friend constexpr auto operator<=>(OutcomeClass, OutcomeClass) = default;

private:
  int value_ = 0;
};

struct VerificationOutcome {
  VerdictKind verdict = VerdictKind::Error;
  double wall_time_s = 0.0;
  RawVerdict raw = RawVerdict::Error;
  std::string stdout_digest;
};

struct BenchmarkSpec {
  std::filesystem::path program_path;
  std::filesystem::path property_path;
  Expected expected = Expected::Unspecified;
};

/// Judges a raw verdict against ground truth. Without ground truth a
/// definitive answer cannot be called correct and is reported as Unknown.
VerdictKind judge(RawVerdict raw, Expected expected);

struct VerdictPattern {
  std::string needle;
  RawVerdict verdict;
};

const std::vector<VerdictPattern> &default_verdict_patterns();

/// Timeout dominates; otherwise the pattern whose match starts latest in
/// `output` wins; no match yields Error.
RawVerdict parse_raw_verdict(std::string_view output, int exit_status, bool timed_out,
                             std::span<const VerdictPattern> patterns = default_verdict_patterns());

/// Outcome label from verdict kind and wall time (seconds).
OutcomeClass classify(VerdictKind verdict, double wall_time_s);
OutcomeClass classify_outcome(const VerificationOutcome &outcome);

/// A way of running the verifier on one program with one configuration.
class Backend {
public:
  virtual ~Backend() = default;
  virtual VerificationOutcome run(const BenchmarkSpec &bench, const FlagConfiguration &config,
                                  double timeout_s) const = 0;
};

VerificationOutcome run_backend(const BenchmarkSpec &bench, const FlagConfiguration &config, double timeout_s,
                                const Backend &adapter);

/// Describes how to invoke an external verifier. Placeholders in `args`:
/// `{program}`, `{property}`, `{arch}` (may appear inside a token) and
/// `{flags}` (must be a whole token; expands to the rendered flags).
struct AdapterConfig {
  std::string executable = "esbmc";
  std::vector<std::string> args{"-p", "{property}", "--arch", "{arch}", "{flags}", "{program}"};
  std::string arch = "32";
  std::vector<VerdictPattern> patterns = default_verdict_patterns();
  FlagSpelling spelling;
};

/// Line-oriented `key = value` adapter file; see README for the keys.
AdapterConfig read_adapter_config(std::istream &in);
AdapterConfig read_adapter_config_file(const std::string &path);

std::vector<std::string> build_command(const AdapterConfig &adapter, const BenchmarkSpec &bench,
                                       const FlagConfiguration &config);

class ProcessBackend final : public Backend {
public:
  explicit ProcessBackend(AdapterConfig config) : config_(std::move(config)) {}
  VerificationOutcome run(const BenchmarkSpec &bench, const FlagConfiguration &config,
                          double timeout_s) const override;
  const AdapterConfig &config() const { return config_; }

private:
  AdapterConfig config_;
};

/// Scripted outcomes. Each rule maps (program basename or `*`, selector) to a
/// raw verdict and a delay; the first matching rule wins. Selectors are `*`,
/// `#<grid index>`, or `field=value` terms joined by `&` using the grid-file
/// value syntax (`U`, integers, 0/1; strategy also accepts none/incr/kinduction).
class MockTable {
public:
  struct Rule {
    std::string program; // basename or "*"
    std::string selector;
    RawVerdict verdict = RawVerdict::Unknown;
    double delay_s = 0.0;
  };

  struct Resolved {
    RawVerdict verdict = RawVerdict::Unknown;
    double delay_s = 0.0;
  };

  MockTable() = default;
  explicit MockTable(std::vector<Rule> rules);

  void add(Rule rule);
  const std::vector<Rule> &rules() const { return rules_; }

  /// Unmatched cells resolve to Unknown after zero delay.
  Resolved lookup(std::string_view program_basename, const FlagConfiguration &config,
                  std::optional<std::size_t> grid_index) const;

  static MockTable read(std::istream &in);
  static MockTable read_file(const std::string &path);
  void write(std::ostream &out) const;

private:
  std::vector<Rule> rules_;
};

/// In-process mock. Delays are reported without sleeping unless `real_sleep`.
class MockBackend final : public Backend {
public:
  MockBackend(MockTable table, FlagGrid grid, bool real_sleep = false)
      : table_(std::move(table)), grid_(std::move(grid)), real_sleep_(real_sleep) {}

  VerificationOutcome run(const BenchmarkSpec &bench, const FlagConfiguration &config,
                          double timeout_s) const override;

private:
  MockTable table_;
  FlagGrid grid_;
  bool real_sleep_;
};

/// Text a verifier prints for a raw verdict (inverse of the default patterns).
std::string_view verdict_banner(RawVerdict v);

} // namespace metatune
