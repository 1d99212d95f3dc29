#include "metatune/flags.hpp"

#include "metatune/error.hpp"
#include "text_util.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace metatune {

std::string_view to_string(Strategy s) {
  switch (s) {
  case Strategy::None:
    return "none";
  case Strategy::Incr:
    return "incr";
  case Strategy::KInduction:
    return "kinduction";
  }
  return "?";
}

FlagConfiguration FlagConfiguration::normalized() const {
  FlagConfiguration c = *this;
  if (c.strategy == Strategy::None)
    c.k_step = 1;
  return c;
}

bool operator==(const FlagConfiguration &a, const FlagConfiguration &b) {
  return encode(a) == encode(b);
}

FlagConfiguration default_config() { return FlagConfiguration{}; }

namespace {

double encode_bound(Bound b) { return b ? static_cast<double>(*b) : -1.0; }

Bound decode_bound(double v, std::string_view field) {
  if (v == -1.0)
    return kUnlimited;
  if (v < 1.0 || v != static_cast<double>(static_cast<std::uint32_t>(v)))
    throw FormatError(std::string(field) + " must be a positive integer or unlimited");
  return static_cast<std::uint32_t>(v);
}

bool decode_bool(double v, std::string_view field) {
  if (v != 0.0 && v != 1.0)
    throw FormatError(std::string(field) + " must be 0 or 1");
  return v == 1.0;
}

} // namespace

EncodedFlags encode(const FlagConfiguration &config) {
  const auto c = config.normalized();
  return {encode_bound(c.context_bound),
          static_cast<double>(static_cast<int>(c.strategy)),
          static_cast<double>(c.k_step),
          encode_bound(c.unwind),
          c.no_por ? 1.0 : 0.0,
          c.no_goto_merge ? 1.0 : 0.0,
          c.state_hashing ? 1.0 : 0.0,
          c.add_symex_value_sets ? 1.0 : 0.0};
}

FlagConfiguration decode(const EncodedFlags &e) {
  FlagConfiguration c;
  c.context_bound = decode_bound(e[0], "context_bound");
  if (e[1] != 0.0 && e[1] != 1.0 && e[1] != 2.0)
    throw FormatError("strategy must be 0, 1 or 2");
  c.strategy = static_cast<Strategy>(static_cast<int>(e[1]));
  auto k = decode_bound(e[2], "k_step");
  if (!k)
    throw FormatError("k_step must be finite");
  c.k_step = *k;
  c.unwind = decode_bound(e[3], "unwind");
  c.no_por = decode_bool(e[4], "no_por");
  c.no_goto_merge = decode_bool(e[5], "no_goto_merge");
  c.state_hashing = decode_bool(e[6], "state_hashing");
  c.add_symex_value_sets = decode_bool(e[7], "add_symex_value_sets");
  return c.normalized();
}

std::vector<std::string> render_flags(const FlagConfiguration &config, const FlagSpelling &spelling) {
  std::vector<std::string> args;
  if (config.context_bound) {
    args.emplace_back("--context-bound");
    args.push_back(std::to_string(*config.context_bound));
  }
  if (config.strategy != Strategy::None) {
    args.push_back(config.strategy == Strategy::Incr ? spelling.incremental : spelling.k_induction);
    args.emplace_back("--k-step");
    args.push_back(std::to_string(config.k_step));
  }
  if (config.unwind) {
    args.emplace_back("--unwind");
    args.push_back(std::to_string(*config.unwind));
  }
  if (config.no_por)
    args.emplace_back("--no-por");
  if (config.no_goto_merge)
    args.emplace_back("--no-goto-merge");
  if (config.state_hashing)
    args.emplace_back("--state-hashing");
  if (config.add_symex_value_sets)
    args.emplace_back("--add-symex-value-sets");
  return args;
}

FlagConfiguration parse_flag_args(std::span<const std::string> args, const FlagSpelling &spelling,
                                  std::vector<std::string> *rest) {
  FlagConfiguration c;
  auto positive = [&](std::size_t i, std::string_view flag) -> std::uint32_t {
    if (i >= args.size())
      throw FormatError(std::string(flag) + " expects a value");
    auto v = detail::parse_int<std::uint32_t>(args[i]);
    if (!v || *v == 0)
      throw FormatError(std::string(flag) + " expects a positive integer, got '" + args[i] + "'");
    return *v;
  };
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string &a = args[i];
    if (a == "--context-bound")
      c.context_bound = positive(++i, a);
    else if (a == "--unwind")
      c.unwind = positive(++i, a);
    else if (a == "--k-step")
      c.k_step = positive(++i, a);
    else if (a == spelling.incremental)
      c.strategy = Strategy::Incr;
    else if (a == spelling.k_induction)
      c.strategy = Strategy::KInduction;
    else if (a == "--no-por")
      c.no_por = true;
    else if (a == "--no-goto-merge")
      c.no_goto_merge = true;
    else if (a == "--state-hashing")
      c.state_hashing = true;
    else if (a == "--add-symex-value-sets")
      c.add_symex_value_sets = true;
    else if (rest)
      rest->push_back(a);
  }
  return c.normalized();
}

FlagGrid::FlagGrid(std::vector<FlagConfiguration> configs) : configs_(std::move(configs)) {
  std::map<EncodedFlags, std::size_t> seen;
  for (std::size_t i = 0; i < configs_.size(); ++i) {
    configs_[i] = configs_[i].normalized();
    auto [it, fresh] = seen.emplace(encode(configs_[i]), i);
    if (!fresh)
      throw FormatError("duplicate grid entry " + std::to_string(i) + " (same as entry " +
                        std::to_string(it->second) + ")");
  }
}

std::optional<std::size_t> FlagGrid::index_of(const FlagConfiguration &config) const {
  const auto key = encode(config);
  for (std::size_t i = 0; i < configs_.size(); ++i)
    if (encode(configs_[i]) == key)
      return i;
  return std::nullopt;
}

FlagGrid canonical_grid() {
  const std::array<Bound, 4> context_bounds{1u, 2u, 3u, kUnlimited};
  const std::array<Bound, 5> unwinds{1u, 8u, 32u, 128u, kUnlimited};
  const std::array<std::pair<Strategy, std::uint32_t>, 3> strategies{
      {{Strategy::None, 1}, {Strategy::Incr, 1}, {Strategy::Incr, 4}}};
  std::vector<FlagConfiguration> configs;
  configs.reserve(240);
  for (auto cb : context_bounds)
    for (auto uw : unwinds)
      for (auto [strategy, k] : strategies)
        for (bool por : {false, true})
          for (bool merge : {false, true}) {
            FlagConfiguration c;
            c.context_bound = cb;
            c.unwind = uw;
            c.strategy = strategy;
            c.k_step = k;
            c.no_por = por;
            c.no_goto_merge = merge;
            configs.push_back(c);
          }
  return FlagGrid(std::move(configs));
}

std::string format_config_line(const FlagConfiguration &config) {
  const auto e = encode(config);
  std::string line;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (i > 0)
      line += ',';
    line += e[i] == -1.0 ? std::string("U") : std::to_string(static_cast<long long>(e[i]));
  }
  return line;
}

FlagConfiguration parse_config_line(std::string_view line, std::size_t line_no) {
  const auto fields = detail::split(line, ',');
  if (fields.size() != kFlagFieldCount)
    throw FormatError("expected 8 comma-separated fields, got " + std::to_string(fields.size()), line_no);
  EncodedFlags e{};
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto f = detail::trim(fields[i]);
    if (f == "U" || f == "u") {
      e[i] = -1.0;
      continue;
    }
    auto v = detail::parse_int<std::int64_t>(f);
    if (!v || *v < 0)
      throw FormatError("bad field '" + std::string(f) + "'", line_no);
    e[i] = static_cast<double>(*v);
  }
  if (e[1] == -1.0 || e[2] == -1.0 || (e[4] == -1.0 || e[5] == -1.0 || e[6] == -1.0 || e[7] == -1.0))
    throw FormatError("only context_bound and unwind may be U", line_no);
  try {
    return decode(e);
  } catch (const FormatError &err) {
    throw FormatError(err.what(), line_no);
  }
}

FlagGrid read_grid(std::istream &in) {
  std::vector<FlagConfiguration> configs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#')
      continue;
    configs.push_back(parse_config_line(t, line_no));
  }
  if (configs.empty())
    throw FormatError("grid file has no configurations");
  return FlagGrid(std::move(configs));
}

FlagGrid read_grid_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open grid file '" + path + "'");
  return read_grid(in);
}

void write_grid(std::ostream &out, const FlagGrid &grid) {
  out << "# context_bound,strategy,k_step,unwind,no_por,no_goto_merge,state_hashing,add_symex_value_sets\n";
  for (const auto &c : grid)
    out << format_config_line(c) << '\n';
}

} // namespace metatune
