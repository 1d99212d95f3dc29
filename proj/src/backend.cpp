#include "metatune/backend.hpp"

#include "metatune/error.hpp"
#include "metatune/subprocess.hpp"
#include "text_util.hpp"

#include <chrono>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace metatune {

std::string_view to_string(RawVerdict v) {
  switch (v) {
  case RawVerdict::True:
    return "true";
  case RawVerdict::False:
    return "false";
  case RawVerdict::Unknown:
    return "unknown";
  case RawVerdict::Timeout:
    return "timeout";
  case RawVerdict::Error:
    return "error";
  }
  return "?";
}

std::string_view to_string(VerdictKind v) {
  switch (v) {
  case VerdictKind::CorrectTrue:
    return "correct-true";
  case VerdictKind::CorrectFalse:
    return "correct-false";
  case VerdictKind::Unknown:
    return "unknown";
  case VerdictKind::Incorrect:
    return "incorrect";
  case VerdictKind::Timeout:
    return "timeout";
  case VerdictKind::Error:
    return "error";
  }
  return "?";
}

std::string_view to_string(Expected e) {
  switch (e) {
  case Expected::True:
    return "true";
  case Expected::False:
    return "false";
  case Expected::Unspecified:
    return "unknown";
  }
  return "?";
}

std::optional<RawVerdict> parse_raw_verdict_tag(std::string_view s) {
  for (auto v : {RawVerdict::True, RawVerdict::False, RawVerdict::Unknown, RawVerdict::Timeout, RawVerdict::Error})
    if (to_string(v) == s)
      return v;
  return std::nullopt;
}

std::optional<VerdictKind> parse_verdict_tag(std::string_view s) {
  for (auto v : {VerdictKind::CorrectTrue, VerdictKind::CorrectFalse, VerdictKind::Unknown, VerdictKind::Incorrect,
                 VerdictKind::Timeout, VerdictKind::Error})
    if (to_string(v) == s)
      return v;
  return std::nullopt;
}

std::optional<Expected> parse_expected(std::string_view s) {
  if (s == "true")
    return Expected::True;
  if (s == "false")
    return Expected::False;
  if (s == "unknown" || s == "unspecified")
    return Expected::Unspecified;
  return std::nullopt;
}

OutcomeClass::OutcomeClass(int value) : value_(value) {
  if (value < kMin || value > kMax)
    throw std::out_of_range("outcome class " + std::to_string(value) + " outside 0..5");
}

VerdictKind judge(RawVerdict raw, Expected expected) {
  switch (raw) {
  case RawVerdict::True:
    if (expected == Expected::Unspecified)
      return VerdictKind::Unknown;
    return expected == Expected::True ? VerdictKind::CorrectTrue : VerdictKind::Incorrect;
  case RawVerdict::False:
    if (expected == Expected::Unspecified)
      return VerdictKind::Unknown;
    return expected == Expected::False ? VerdictKind::CorrectFalse : VerdictKind::Incorrect;
  case RawVerdict::Unknown:
    return VerdictKind::Unknown;
  case RawVerdict::Timeout:
    return VerdictKind::Timeout;
  case RawVerdict::Error:
    return VerdictKind::Error;
  }
  return VerdictKind::Error;
}

const std::vector<VerdictPattern> &default_verdict_patterns() {
  static const std::vector<VerdictPattern> patterns{
      {"VERIFICATION FAILED", RawVerdict::False},
      {"VERIFICATION SUCCESSFUL", RawVerdict::True},
      {"VERIFICATION UNKNOWN", RawVerdict::Unknown},
  };
  return patterns;
}

std::string_view verdict_banner(RawVerdict v) {
  switch (v) {
  case RawVerdict::True:
    return "VERIFICATION SUCCESSFUL";
  case RawVerdict::False:
    return "VERIFICATION FAILED";
  case RawVerdict::Unknown:
    return "VERIFICATION UNKNOWN";
  default:
    return "";
  }
}

RawVerdict parse_raw_verdict(std::string_view output, int /*exit_status*/, bool timed_out,
                             std::span<const VerdictPattern> patterns) {
  if (timed_out)
    return RawVerdict::Timeout;
  std::optional<std::size_t> best_pos;
  RawVerdict best = RawVerdict::Error;
  for (const auto &p : patterns) {
    if (p.needle.empty())
      continue;
    const auto pos = output.rfind(p.needle);
    if (pos == std::string_view::npos)
      continue;
    if (!best_pos || pos >= *best_pos) {
      best_pos = pos;
      best = p.verdict;
    }
  }
  return best;
}

OutcomeClass classify(VerdictKind verdict, double t) {
  switch (verdict) {
  case VerdictKind::CorrectTrue:
  case VerdictKind::CorrectFalse:
    if (t <= 10.0)
      return OutcomeClass(0);
    if (t < 60.0)
      return OutcomeClass(1);
    return OutcomeClass(2);
  case VerdictKind::Unknown:
  case VerdictKind::Error:
    return OutcomeClass(3);
  case VerdictKind::Timeout:
    return OutcomeClass(4);
  case VerdictKind::Incorrect:
    return OutcomeClass(5);
  }
  return OutcomeClass(3);
}

OutcomeClass classify_outcome(const VerificationOutcome &outcome) {
  return classify(outcome.verdict, outcome.wall_time_s);
}

VerificationOutcome run_backend(const BenchmarkSpec &bench, const FlagConfiguration &config, double timeout_s,
                                const Backend &adapter) {
  if (!(timeout_s > 0.0))
    throw std::invalid_argument("timeout must be positive");
  return adapter.run(bench, config, timeout_s);
}

// ---------------------------------------------------------------------------
// External process adapter

AdapterConfig read_adapter_config(std::istream &in) {
  AdapterConfig cfg;
  bool custom_patterns = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#')
      continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw FormatError("expected 'key = value'", line_no);
    const auto key_words = detail::split_ws(detail::trim(t.substr(0, eq)));
    const auto value = detail::trim(t.substr(eq + 1));
    if (key_words.empty())
      throw FormatError("missing key", line_no);
    const auto key = key_words[0];
    if (key == "executable" && key_words.size() == 1) {
      cfg.executable = std::string(value);
    } else if (key == "args" && key_words.size() == 1) {
      cfg.args.clear();
      for (auto w : detail::split_ws(value))
        cfg.args.emplace_back(w);
    } else if (key == "arch" && key_words.size() == 1) {
      cfg.arch = std::string(value);
    } else if (key == "verdict" && key_words.size() == 2) {
      auto v = parse_raw_verdict_tag(key_words[1]);
      if (!v || (*v != RawVerdict::True && *v != RawVerdict::False && *v != RawVerdict::Unknown))
        throw FormatError("verdict must be true, false or unknown", line_no);
      if (!custom_patterns) {
        cfg.patterns.clear();
        custom_patterns = true;
      }
      cfg.patterns.push_back({std::string(value), *v});
    } else if (key == "flag" && key_words.size() == 2) {
      if (key_words[1] == "incremental")
        cfg.spelling.incremental = std::string(value);
      else if (key_words[1] == "k-induction")
        cfg.spelling.k_induction = std::string(value);
      else
        throw FormatError("unknown flag spelling '" + std::string(key_words[1]) + "'", line_no);
    } else {
      throw FormatError("unknown key '" + std::string(detail::trim(t.substr(0, eq))) + "'", line_no);
    }
  }
  return cfg;
}

AdapterConfig read_adapter_config_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open adapter config '" + path + "'");
  return read_adapter_config(in);
}

namespace {

void replace_all(std::string &s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string tail(std::string_view s, std::size_t n) { return std::string(s.size() > n ? s.substr(s.size() - n) : s); }

} // namespace

std::vector<std::string> build_command(const AdapterConfig &adapter, const BenchmarkSpec &bench,
                                       const FlagConfiguration &config) {
  std::vector<std::string> argv{adapter.executable};
  for (const auto &a : adapter.args) {
    if (a == "{flags}") {
      for (auto &f : render_flags(config, adapter.spelling))
        argv.push_back(std::move(f));
      continue;
    }
    std::string s = a;
    replace_all(s, "{program}", bench.program_path.string());
    replace_all(s, "{property}", bench.property_path.string());
    replace_all(s, "{arch}", adapter.arch);
    argv.push_back(std::move(s));
  }
  return argv;
}

VerificationOutcome ProcessBackend::run(const BenchmarkSpec &bench, const FlagConfiguration &config,
                                        double timeout_s) const {
  const auto result = run_process(build_command(config_, bench, config), timeout_s);
  VerificationOutcome out;
  out.raw = parse_raw_verdict(result.output, result.exit_status, result.timed_out, config_.patterns);
  out.verdict = judge(out.raw, bench.expected);
  out.wall_time_s = result.wall_time_s;
  out.stdout_digest = tail(result.output, 240);
  return out;
}

// ---------------------------------------------------------------------------
// Mock adapter

namespace {

const std::array<std::string_view, kFlagFieldCount> kFieldNames{
    "context_bound", "strategy", "k_step", "unwind", "no_por", "no_goto_merge", "state_hashing",
    "add_symex_value_sets"};

struct Term {
  std::size_t field;
  double value;
};

// Empty optional: selector is `*`. A `#n` selector yields index_only.
struct CompiledSelector {
  bool any = false;
  std::optional<std::size_t> index;
  std::vector<Term> terms;
};

CompiledSelector compile_selector(std::string_view sel, std::size_t line_no) {
  CompiledSelector c;
  if (sel == "*") {
    c.any = true;
    return c;
  }
  if (!sel.empty() && sel.front() == '#') {
    auto idx = detail::parse_int<std::size_t>(sel.substr(1));
    if (!idx)
      throw FormatError("bad index selector '" + std::string(sel) + "'", line_no);
    c.index = *idx;
    return c;
  }
  for (auto term : detail::split(sel, '&')) {
    const auto eq = term.find('=');
    if (eq == std::string_view::npos)
      throw FormatError("bad selector term '" + std::string(term) + "'", line_no);
    const auto name = term.substr(0, eq);
    const auto val = term.substr(eq + 1);
    std::size_t field = kFieldNames.size();
    for (std::size_t i = 0; i < kFieldNames.size(); ++i)
      if (kFieldNames[i] == name)
        field = i;
    if (field == kFieldNames.size())
      throw FormatError("unknown field '" + std::string(name) + "'", line_no);
    double v;
    if (val == "U" || val == "u")
      v = -1.0;
    else if (val == "none")
      v = 0.0;
    else if (val == "incr")
      v = 1.0;
    else if (val == "kinduction")
      v = 2.0;
    else if (auto n = detail::parse_int<std::int64_t>(val))
      v = static_cast<double>(*n);
    else
      throw FormatError("bad selector value '" + std::string(val) + "'", line_no);
    c.terms.push_back({field, v});
  }
  return c;
}

bool selector_matches(const CompiledSelector &sel, const EncodedFlags &enc, std::optional<std::size_t> index) {
  if (sel.any)
    return true;
  if (sel.index)
    return index && *index == *sel.index;
  for (const auto &t : sel.terms)
    if (enc[t.field] != t.value)
      return false;
  return true;
}

} // namespace

MockTable::MockTable(std::vector<Rule> rules) {
  for (auto &r : rules)
    add(std::move(r));
}

void MockTable::add(Rule rule) {
  compile_selector(rule.selector, 0);
  if (!(rule.delay_s >= 0.0))
    throw FormatError("mock delay must be non-negative");
  rules_.push_back(std::move(rule));
}

MockTable::Resolved MockTable::lookup(std::string_view program, const FlagConfiguration &config,
                                      std::optional<std::size_t> grid_index) const {
  const auto enc = encode(config);
  for (const auto &r : rules_) {
    if (r.program != "*" && r.program != program)
      continue;
    if (selector_matches(compile_selector(r.selector, 0), enc, grid_index))
      return {r.verdict, r.delay_s};
  }
  return {RawVerdict::Unknown, 0.0};
}

MockTable MockTable::read(std::istream &in) {
  MockTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#')
      continue;
    const auto w = detail::split_ws(t);
    if (w.size() != 4)
      throw FormatError("expected '<program> <selector> <verdict> <delay>'", line_no);
    compile_selector(w[1], line_no);
    auto verdict = parse_raw_verdict_tag(w[2]);
    if (!verdict)
      throw FormatError("unknown verdict '" + std::string(w[2]) + "'", line_no);
    auto delay = detail::parse_double(w[3]);
    if (!delay || *delay < 0.0)
      throw FormatError("bad delay '" + std::string(w[3]) + "'", line_no);
    table.rules_.push_back({std::string(w[0]), std::string(w[1]), *verdict, *delay});
  }
  return table;
}

MockTable MockTable::read_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open mock table '" + path + "'");
  return read(in);
}

void MockTable::write(std::ostream &out) const {
  for (const auto &r : rules_)
    out << r.program << '\t' << r.selector << '\t' << to_string(r.verdict) << '\t' << detail::format_double(r.delay_s)
        << '\n';
}

VerificationOutcome MockBackend::run(const BenchmarkSpec &bench, const FlagConfiguration &config,
                                     double timeout_s) const {
  const auto resolved = table_.lookup(bench.program_path.filename().string(), config, grid_.index_of(config));
  VerificationOutcome out;
  const auto started = std::chrono::steady_clock::now();
  const bool times_out = resolved.verdict == RawVerdict::Timeout || resolved.delay_s >= timeout_s;
  const double waited = times_out ? timeout_s : resolved.delay_s;
  if (real_sleep_) {
    std::this_thread::sleep_for(std::chrono::duration<double>(waited));
    out.wall_time_s = std::max(waited, std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
  } else {
    out.wall_time_s = waited;
  }
  out.raw = times_out ? RawVerdict::Timeout : resolved.verdict;
  out.verdict = judge(out.raw, bench.expected);
  out.stdout_digest = std::string(verdict_banner(out.raw));
  return out;
}

} // namespace metatune
