#include "metatune/features.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace metatune {

namespace {

const std::unordered_set<std::string_view> &keywords() {
  static const std::unordered_set<std::string_view> set{
      "auto", "break", "case", "char", "const", "continue", "default", "do", "double",
      "else", "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long",
      "register", "restrict", "return", "short", "signed", "sizeof", "static", "struct",
      "switch", "typedef", "union", "unsigned", "void", "volatile", "while", "_Alignas",
      "_Alignof", "_Atomic", "_Bool", "_Complex", "_Generic", "_Imaginary", "_Noreturn",
      "_Static_assert", "_Thread_local", "__inline", "__inline__", "__restrict",
      "__restrict__", "__const", "__const__", "__volatile__", "__signed__", "__signed",
      "__int128", "__extension__", "__attribute__", "__attribute", "__asm__", "__asm",
      "asm", "__typeof__", "__typeof", "typeof", "__builtin_va_list", "__thread",
      "__alignof__", "__declspec", "_Float128", "__float128"};
  return set;
}

bool is_keyword(std::string_view s) { return keywords().contains(s); }

// GCC extensions that wrap their argument in parentheses and carry no declarator.
bool is_paren_extension(std::string_view s) {
  return s == "__attribute__" || s == "__attribute" || s == "__asm__" || s == "__asm" ||
         s == "asm" || s == "__declspec";
}

bool is_type_keyword(std::string_view s) {
  static const std::unordered_set<std::string_view> set{
      "char", "double", "float", "int", "long", "short", "signed", "unsigned", "void",
      "_Bool", "_Complex", "const", "volatile", "restrict", "struct", "union", "enum",
      "__int128", "__signed__", "__const", "__restrict", "__restrict__", "_Atomic",
      "register", "static", "auto", "__volatile__"};
  return set.contains(s);
}

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$'; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$'; }

constexpr std::array<std::string_view, 24> kMultiCharOps{
    ">>=", "<<=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&",  "||",  "+=",  "-=", "*=", "/=", "%=", "&=", "^=", "|=", "##", "::"};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  bool line_start = true;

  // String or char literal starting at `from`, with the opening quote at `i`.
  auto lex_quoted = [&](std::size_t from) {
    const char quote = text[i];
    ++i;
    while (i < n && text[i] != quote && text[i] != '\n') {
      if (text[i] == '\\' && i + 1 < n)
        ++i;
      ++i;
    }
    if (i < n && text[i] == quote)
      ++i;
    out.push_back({quote == '"' ? TokenKind::String : TokenKind::Char,
                   std::string(text.substr(from, i - from)), from});
  };

  auto skip_to_eol = [&] {
    while (i < n && text[i] != '\n') {
      if (text[i] == '\\' && i + 1 < n && text[i + 1] == '\n')
        i += 2;
      else if (text[i] == '\\' && i + 2 < n && text[i + 1] == '\r' && text[i + 2] == '\n')
        i += 3;
      else
        ++i;
    }
  };

  while (i < n) {
    const unsigned char c = text[i];
    if (c == '\n') {
      line_start = true;
      ++i;
      continue;
    }
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && text[i + 1] == '/') {
      skip_to_eol();
      continue;
    }
    if (c == '/' && i + 1 < n && text[i + 1] == '*') {
      const auto close = text.find("*/", i + 2);
      i = close == std::string_view::npos ? n : close + 2;
      continue;
    }
    if (c == '#' && line_start) {
      skip_to_eol();
      continue;
    }
    line_start = false;

    const std::size_t start = i;
    if (ident_start(c)) {
      while (i < n && ident_char(text[i]))
        ++i;
      // Wide / unicode string and char prefixes.
      if (i < n && (text[i] == '"' || text[i] == '\'')) {
        const auto prefix = text.substr(start, i - start);
        if (prefix == "L" || prefix == "u" || prefix == "U" || prefix == "u8") {
          lex_quoted(start);
          continue;
        }
      }
      std::string word(text.substr(start, i - start));
      const auto kind = is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier;
      out.push_back({kind, std::move(word), start});
      continue;
    }
    if (std::isdigit(c) || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      while (i < n) {
        const unsigned char d = text[i];
        if ((d == '+' || d == '-') && i > start &&
            (text[i - 1] == 'e' || text[i - 1] == 'E' || text[i - 1] == 'p' || text[i - 1] == 'P') &&
            !(text[start] == '0' && start + 1 < n && (text[start + 1] == 'x' || text[start + 1] == 'X') &&
              (text[i - 1] == 'e' || text[i - 1] == 'E'))) {
          ++i;
        } else if (ident_char(d) || d == '.') {
          ++i;
        } else {
          break;
        }
      }
      out.push_back({TokenKind::Number, std::string(text.substr(start, i - start)), start});
      continue;
    }
    if (c == '"' || c == '\'') {
      lex_quoted(start);
      continue;
    }
    bool matched = false;
    for (auto op : kMultiCharOps) {
      if (text.substr(i, op.size()) == op) {
        out.push_back({TokenKind::Operator, std::string(op), start});
        i += op.size();
        matched = true;
        break;
      }
    }
    if (matched)
      continue;
    if (std::string_view("()[]{};,").find(static_cast<char>(c)) != std::string_view::npos) {
      out.push_back({TokenKind::Punct, std::string(1, static_cast<char>(c)), start});
    } else if (std::string_view("+-*/%<>=!&|^~?:.").find(static_cast<char>(c)) != std::string_view::npos) {
      out.push_back({TokenKind::Operator, std::string(1, static_cast<char>(c)), start});
    }
    // Anything else (stray bytes, backticks, '@') is dropped.
    ++i;
  }
  return out;
}

bool is(const Token &t, std::string_view text) {
  return (t.kind == TokenKind::Punct || t.kind == TokenKind::Operator || t.kind == TokenKind::Keyword) &&
         t.text == text;
}

// Index of the token closing the group opened at `open`, or tokens.size().
std::size_t match_forward(const std::vector<Token> &tokens, std::size_t open, std::size_t limit) {
  const std::string &o = tokens[open].text;
  const std::string_view c = o == "(" ? ")" : o == "[" ? "]" : "}";
  int depth = 0;
  for (std::size_t i = open; i < limit; ++i) {
    if (tokens[i].kind != TokenKind::Punct)
      continue;
    if (tokens[i].text == o)
      ++depth;
    else if (tokens[i].text == c && --depth == 0)
      return i;
  }
  return limit;
}

std::optional<std::size_t> match_backward(const std::vector<Token> &tokens, std::size_t close) {
  const std::string &c = tokens[close].text;
  const std::string_view o = c == ")" ? "(" : c == "]" ? "[" : "{";
  int depth = 0;
  for (std::size_t i = close + 1; i-- > 0;) {
    if (tokens[i].kind != TokenKind::Punct)
      continue;
    if (tokens[i].text == c)
      ++depth;
    else if (tokens[i].text == o && --depth == 0)
      return i;
  }
  return std::nullopt;
}

// Name of the function whose definition header ends right before `brace`, if any.
std::optional<std::string> function_name_before(const std::vector<Token> &tokens, std::size_t brace) {
  std::size_t j = brace;
  while (j > 0 && is(tokens[j - 1], ")")) {
    auto open = match_backward(tokens, j - 1);
    if (!open || *open == 0)
      return std::nullopt;
    const Token &before = tokens[*open - 1];
    if (before.kind == TokenKind::Keyword && is_paren_extension(before.text)) {
      j = *open - 1;
      continue;
    }
    // `__attribute__((x))`: the outer group is preceded by the extension keyword.
    if (is(before, "(") && *open >= 2 && is_paren_extension(tokens[*open - 2].text)) {
      j = *open - 2;
      continue;
    }
    if (before.kind == TokenKind::Identifier)
      return before.text;
    // `int (*f(void))(int) {` and friends: give up, treat as non-function.
    return std::nullopt;
  }
  return std::nullopt;
}

// Drops `__attribute__((..))`, `__asm__(..)` and `__extension__` from a declaration.
std::vector<Token> strip_extensions(const std::vector<Token> &decl) {
  std::vector<Token> out;
  for (std::size_t i = 0; i < decl.size(); ++i) {
    if (decl[i].kind == TokenKind::Keyword && decl[i].text == "__extension__")
      continue;
    if (decl[i].kind == TokenKind::Keyword && is_paren_extension(decl[i].text)) {
      if (i + 1 < decl.size() && is(decl[i + 1], "("))
        i = match_forward(decl, i + 1, decl.size());
      continue;
    }
    out.push_back(decl[i]);
  }
  return out;
}

// Returns the declared name of one declarator (tokens before any initializer).
// `prototype` is set when the declarator declares a function.
std::optional<std::string> declarator_name(const std::vector<Token> &part, bool &prototype) {
  prototype = false;
  for (std::size_t i = 0; i < part.size(); ++i) {
    if (!is(part[i], "("))
      continue;
    // `( * name )`: pointer to function / array.
    std::size_t j = i + 1;
    bool saw_star = false;
    while (j < part.size() && (is(part[j], "*") || (part[j].kind == TokenKind::Keyword && is_type_keyword(part[j].text)))) {
      saw_star = saw_star || is(part[j], "*");
      ++j;
    }
    if (saw_star && j < part.size() && part[j].kind == TokenKind::Identifier)
      return part[j].text;
    if (i > 0 && part[i - 1].kind == TokenKind::Identifier) {
      prototype = true;
      return part[i - 1].text;
    }
  }
  std::optional<std::size_t> last;
  for (std::size_t i = 0; i < part.size(); ++i) {
    if (is(part[i], "["))
      break;
    if (part[i].kind == TokenKind::Identifier)
      last = i;
  }
  if (!last)
    return std::nullopt;
  if (*last > 0 && part[*last - 1].kind == TokenKind::Keyword) {
    const auto &kw = part[*last - 1].text;
    if (kw == "struct" || kw == "union" || kw == "enum")
      return std::nullopt; // tag, not a declarator
  }
  return part[*last].text;
}

void analyse_declaration(const std::vector<Token> &raw, SourceUnit &unit) {
  if (raw.empty())
    return;
  // Collapse brace groups (struct bodies, initializer lists) into one marker.
  std::vector<Token> decl;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (is(raw[i], "{")) {
      i = match_forward(raw, i, raw.size());
      decl.push_back({TokenKind::Punct, "{}", raw[std::min(i, raw.size() - 1)].offset});
      continue;
    }
    decl.push_back(raw[i]);
  }
  decl = strip_extensions(decl);
  if (decl.empty())
    return;
  const bool is_typedef = decl.front().kind == TokenKind::Keyword && decl.front().text == "typedef";

  std::vector<std::vector<Token>> parts(1);
  int depth = 0;
  bool in_init = false;
  for (const auto &t : decl) {
    if (is(t, "(") || is(t, "["))
      ++depth;
    else if (is(t, ")") || is(t, "]"))
      --depth;
    if (depth == 0 && is(t, ",")) {
      parts.emplace_back();
      in_init = false;
      continue;
    }
    if (depth == 0 && is(t, "="))
      in_init = true;
    if (!in_init)
      parts.back().push_back(t);
  }
  for (const auto &part : parts) {
    bool prototype = false;
    auto name = declarator_name(part, prototype);
    if (!name || prototype)
      continue;
    if (is_typedef)
      unit.typedef_names.insert(*name);
    else
      unit.file_scope_vars.insert(*name);
  }
}

void analyse_structure(SourceUnit &unit) {
  const auto &tokens = unit.tokens;
  int depth = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (is(tokens[i], "{")) {
      ++depth;
    } else if (is(tokens[i], "}")) {
      if (--depth < 0) {
        unit.warnings.push_back("unbalanced braces: unmatched '}' at offset " +
                                std::to_string(tokens[i].offset));
        break;
      }
    }
  }
  if (depth != 0) {
    if (depth > 0)
      unit.warnings.push_back("unbalanced braces: " + std::to_string(depth) + " unclosed '{'");
    unit.balanced = false;
    return;
  }

  std::vector<Token> pending;
  int parens = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token &t = tokens[i];
    if (is(t, "{") && parens == 0) {
      const std::size_t close = match_forward(tokens, i, tokens.size());
      if (auto name = function_name_before(tokens, i)) {
        unit.function_defs.try_emplace(*name, TokenRange{i + 1, close});
        pending.clear();
        i = close;
        continue;
      }
      // Aggregate body or initializer: keep it inside the declaration.
      for (std::size_t k = i; k <= close && k < tokens.size(); ++k)
        pending.push_back(tokens[k]);
      i = close;
      continue;
    }
    if (is(t, "("))
      ++parens;
    else if (is(t, ")"))
      parens = std::max(0, parens - 1);
    if (is(t, ";") && parens == 0) {
      analyse_declaration(pending, unit);
      pending.clear();
      continue;
    }
    pending.push_back(t);
  }
}

} // namespace

SourceUnit parse_source(std::string_view text, std::string path) {
  SourceUnit unit;
  unit.path = std::move(path);
  unit.tokens = tokenize(text);
  analyse_structure(unit);
  if (!unit.balanced) {
    unit.file_scope_vars.clear();
    unit.function_defs.clear();
  }
  return unit;
}

namespace {

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

std::optional<std::int64_t> parse_int_literal(const std::vector<Token> &t, std::size_t &i, std::size_t end) {
  bool negative = false;
  if (i < end && is(t[i], "-")) {
    negative = true;
    ++i;
  }
  if (i >= end || t[i].kind != TokenKind::Number)
    return std::nullopt;
  std::string s = t[i].text;
  while (!s.empty() && (s.back() == 'u' || s.back() == 'U' || s.back() == 'l' || s.back() == 'L'))
    s.pop_back();
  int base = 10;
  std::size_t skip = 0;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    skip = 2;
  } else if (s.size() > 1 && s[0] == '0') {
    base = 8;
    skip = 1;
  }
  std::int64_t v = 0;
  const char *first = s.data() + skip;
  const char *last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v, base);
  if (ec != std::errc{} || ptr != last)
    return std::nullopt;
  ++i;
  return negative ? -v : v;
}

// Trip count of `for (i = A; i REL B; step)` given the already-parsed pieces.
std::uint64_t trip_count(std::int64_t start, std::string_view rel, std::int64_t bound, std::int64_t step) {
  auto holds = [&](std::int64_t v) {
    if (rel == "<") return v < bound;
    if (rel == "<=") return v <= bound;
    if (rel == ">") return v > bound;
    if (rel == ">=") return v >= bound;
    return v != bound;
  };
  if (!holds(start))
    return 0;
  if (step == 0)
    return kUnboundedLoop;
  const std::int64_t dist = bound - start;
  if (rel == "!=") {
    if (dist % step != 0 || dist / step <= 0)
      return kUnboundedLoop;
    return static_cast<std::uint64_t>(dist / step);
  }
  if ((rel == "<" || rel == "<=") && step < 0)
    return kUnboundedLoop;
  if ((rel == ">" || rel == ">=") && step > 0)
    return kUnboundedLoop;
  const std::int64_t span = dist < 0 ? -dist : dist;
  const std::int64_t s = step < 0 ? -step : step;
  if (rel == "<" || rel == ">")
    return static_cast<std::uint64_t>((span + s - 1) / s);
  return static_cast<std::uint64_t>(span / s + 1);
}

// `for` at index `at`; returns the statically known trip count or the sentinel.
std::uint64_t for_loop_trips(const std::vector<Token> &t, std::size_t at, std::size_t end) {
  std::size_t i = at + 1;
  if (i >= end || !is(t[i], "("))
    return kUnboundedLoop;
  const std::size_t close = match_forward(t, i, end);
  if (close >= end)
    return kUnboundedLoop;
  ++i;
  while (i < close && t[i].kind == TokenKind::Keyword && is_type_keyword(t[i].text))
    ++i;
  if (i >= close || t[i].kind != TokenKind::Identifier)
    return kUnboundedLoop;
  const std::string var = t[i++].text;
  if (i >= close || !is(t[i], "="))
    return kUnboundedLoop;
  ++i;
  auto start = parse_int_literal(t, i, close);
  if (!start || i >= close || !is(t[i], ";"))
    return kUnboundedLoop;
  ++i;
  if (i >= close || t[i].kind != TokenKind::Identifier || t[i].text != var)
    return kUnboundedLoop;
  ++i;
  if (i >= close || t[i].kind != TokenKind::Operator)
    return kUnboundedLoop;
  const std::string rel = t[i++].text;
  if (rel != "<" && rel != "<=" && rel != ">" && rel != ">=" && rel != "!=")
    return kUnboundedLoop;
  auto bound = parse_int_literal(t, i, close);
  if (!bound || i >= close || !is(t[i], ";"))
    return kUnboundedLoop;
  ++i;
  std::int64_t step = 0;
  const std::size_t rest = close - i;
  if (rest == 2 && t[i].text == var && (is(t[i + 1], "++") || is(t[i + 1], "--"))) {
    step = is(t[i + 1], "++") ? 1 : -1;
  } else if (rest == 2 && t[i + 1].text == var && (is(t[i], "++") || is(t[i], "--"))) {
    step = is(t[i], "++") ? 1 : -1;
  } else if (rest >= 3 && t[i].text == var && (is(t[i + 1], "+=") || is(t[i + 1], "-="))) {
    const bool minus = is(t[i + 1], "-=");
    std::size_t j = i + 2;
    auto c = parse_int_literal(t, j, close);
    if (!c || j != close)
      return kUnboundedLoop;
    step = minus ? -*c : *c;
  } else {
    return kUnboundedLoop;
  }
  return trip_count(*start, rel, *bound, step);
}

class FeatureScanner {
public:
  FeatureScanner(const SourceUnit &unit, const IntrinsicNames &names) : unit_(unit), names_(names) {}

  ProgramFeatures run() {
    std::vector<TokenRange> bodies;
    if (unit_.balanced) {
      for (const auto &[name, range] : unit_.function_defs)
        bodies.push_back(range);
      std::sort(bodies.begin(), bodies.end(), [](auto &a, auto &b) { return a.begin < b.begin; });
    } else {
      bodies.push_back({0, unit_.tokens.size()});
    }

    // Functions whose bodies touch file-scope state.
    for (const auto &[name, range] : unit_.function_defs) {
      for (std::size_t i = range.begin; i < range.end; ++i) {
        if (is_global_ref(i)) {
          global_fns_.insert(name);
          break;
        }
      }
    }

    for (const auto &body : bodies)
      scan(body);

    f_.min_global_var_access = min_of(var_hits_);
    f_.min_global_fn_calls = min_of(fn_hits_);
    return f_;
  }

private:
  static std::uint64_t min_of(const std::unordered_map<std::string, std::uint64_t> &m) {
    std::uint64_t best = 0;
    for (const auto &[k, v] : m)
      best = best == 0 ? v : std::min(best, v);
    return best;
  }

  const std::vector<Token> &tok() const { return unit_.tokens; }

  bool is_global_ref(std::size_t i) const {
    const Token &t = tok()[i];
    if (t.kind != TokenKind::Identifier || !unit_.file_scope_vars.contains(t.text))
      return false;
    if (i > 0 && (is(tok()[i - 1], ".") || is(tok()[i - 1], "->")))
      return false; // member name
    return true;
  }

  bool is_call(std::size_t i, std::size_t end) const {
    return tok()[i].kind == TokenKind::Identifier && i + 1 < end && is(tok()[i + 1], "(");
  }

  bool is_type_name(const Token &t) const {
    if (t.kind != TokenKind::Identifier)
      return false;
    return unit_.typedef_names.contains(t.text) ||
           (t.text.size() > 2 && t.text.compare(t.text.size() - 2, 2, "_t") == 0);
  }

  // Whether the token at `i` ends an operand, making a following `+ - * &` binary.
  bool ends_operand(std::size_t i, std::size_t begin) const {
    const Token &t = tok()[i];
    switch (t.kind) {
    case TokenKind::Number:
    case TokenKind::String:
    case TokenKind::Char:
      return true;
    case TokenKind::Identifier:
      if (is_type_name(t))
        return false;
      if (i > begin && tok()[i - 1].kind == TokenKind::Keyword &&
          (tok()[i - 1].text == "struct" || tok()[i - 1].text == "union" || tok()[i - 1].text == "enum"))
        return false;
      return true;
    case TokenKind::Keyword:
      return false;
    case TokenKind::Punct:
      if (t.text == "]")
        return true;
      if (t.text == ")") {
        auto open = match_backward(tok(), i);
        if (!open || *open <= begin)
          return true;
        const Token &before = tok()[*open - 1];
        if (before.kind == TokenKind::Keyword) {
          if (before.text == "sizeof" || before.text == "_Alignof" || before.text == "__alignof__")
            return true;
          if (before.text == "if" || before.text == "while" || before.text == "for" || before.text == "switch")
            return false;
        }
        return !is_cast(*open, i);
      }
      return false;
    case TokenKind::Operator:
      if ((t.text == "++" || t.text == "--") && i > begin)
        return ends_operand(i - 1, begin);
      return false;
    }
    return false;
  }

  // `( type-name )` group spanning [open, close].
  bool is_cast(std::size_t open, std::size_t close) const {
    if (close == open + 1)
      return false;
    for (std::size_t k = open + 1; k < close; ++k) {
      const Token &t = tok()[k];
      if (t.kind == TokenKind::Keyword && is_type_keyword(t.text))
        continue;
      if (is(t, "*"))
        continue;
      if (t.kind == TokenKind::Identifier &&
          (is_type_name(t) || (k > open + 1 && tok()[k - 1].kind == TokenKind::Keyword &&
                               (tok()[k - 1].text == "struct" || tok()[k - 1].text == "union" ||
                                tok()[k - 1].text == "enum"))))
        continue;
      return false;
    }
    return true;
  }

  bool is_binary_operator(std::size_t i, std::size_t begin) const {
    static const std::unordered_set<std::string_view> always{
        "/", "%", "<<", ">>", "|", "^", "&&", "||", "<", ">", "<=", ">=", "==", "!="};
    static const std::unordered_set<std::string_view> ambiguous{"+", "-", "*", "&"};
    const Token &t = tok()[i];
    if (t.kind != TokenKind::Operator)
      return false;
    if (always.contains(t.text))
      return true;
    if (ambiguous.contains(t.text))
      return i > begin && ends_operand(i - 1, begin);
    return false;
  }

  // Marks `while` tokens that close a do-while so they are not counted twice.
  void mark_do_tails(const TokenRange &body, std::unordered_set<std::size_t> &tails) const {
    for (std::size_t i = body.begin; i < body.end; ++i) {
      if (!is(tok()[i], "do") || i + 1 >= body.end)
        continue;
      std::size_t after;
      if (is(tok()[i + 1], "{")) {
        after = match_forward(tok(), i + 1, body.end) + 1;
      } else {
        int depth = 0;
        std::size_t k = i + 1;
        for (; k < body.end; ++k) {
          if (is(tok()[k], "(") || is(tok()[k], "{"))
            ++depth;
          else if (is(tok()[k], ")") || is(tok()[k], "}"))
            --depth;
          else if (depth == 0 && is(tok()[k], ";"))
            break;
        }
        after = k + 1;
      }
      if (after < body.end && is(tok()[after], "while"))
        tails.insert(after);
    }
  }

  void scan(const TokenRange &body) {
    std::unordered_set<std::size_t> do_tails;
    mark_do_tails(body, do_tails);
    for (std::size_t i = body.begin; i < body.end; ++i) {
      const Token &t = tok()[i];
      if (is_call(i, body.end)) {
        const std::string &name = t.text;
        if (names_.thread_create.contains(name))
          ++f_.threads_created;
        if (names_.thread_join.contains(name))
          ++f_.threads_joined;
        if (names_.mutex_lock.contains(name))
          ++f_.mutex_locks;
        if (names_.atomic_begin.contains(name) ||
            (starts_with(name, names_.atomic_prefix) && !names_.atomic_excluded.contains(name)))
          ++f_.atomic_locks;
        if (starts_with(name, names_.nondet_prefix))
          ++f_.nondet_variables;
        if (global_fns_.contains(name)) {
          ++f_.global_fn_calls;
          ++fn_hits_[name];
        }
      }
      if (is_global_ref(i)) {
        ++f_.global_var_accesses;
        ++var_hits_[t.text];
      }
      if (is_binary_operator(i, body.begin))
        ++f_.binary_operators;
      if (t.kind == TokenKind::Keyword) {
        if (t.text == "for")
          f_.loop_iterations += for_loop_trips(tok(), i, body.end);
        else if (t.text == "do" || (t.text == "while" && !do_tails.contains(i)))
          f_.loop_iterations += kUnboundedLoop;
      }
    }
  }

  const SourceUnit &unit_;
  const IntrinsicNames &names_;
  ProgramFeatures f_;
  std::unordered_set<std::string> global_fns_;
  std::unordered_map<std::string, std::uint64_t> var_hits_;
  std::unordered_map<std::string, std::uint64_t> fn_hits_;
};

} // namespace

ProgramFeatures extract_features(const SourceUnit &unit, const IntrinsicNames &names) {
  return FeatureScanner(unit, names).run();
}

std::array<std::uint64_t, kFeatureCount> ProgramFeatures::values() const {
  return {threads_created,     threads_joined,  mutex_locks,      atomic_locks,
          global_var_accesses, global_fn_calls, binary_operators, nondet_variables,
          min_global_var_access, min_global_fn_calls, loop_iterations};
}

ProgramFeatures ProgramFeatures::from_values(const std::array<std::uint64_t, kFeatureCount> &v) {
  ProgramFeatures f;
  f.threads_created = v[0];
  f.threads_joined = v[1];
  f.mutex_locks = v[2];
  f.atomic_locks = v[3];
  f.global_var_accesses = v[4];
  f.global_fn_calls = v[5];
  f.binary_operators = v[6];
  f.nondet_variables = v[7];
  f.min_global_var_access = v[8];
  f.min_global_fn_calls = v[9];
  f.loop_iterations = v[10];
  return f;
}

const std::array<std::string_view, kFeatureCount> &feature_names() {
  static const std::array<std::string_view, kFeatureCount> names{
      "threads_created",       "threads_joined",      "mutex_locks",     "atomic_locks",
      "global_var_accesses",   "global_fn_calls",     "binary_operators", "nondet_variables",
      "min_global_var_access", "min_global_fn_calls", "loop_iterations"};
  return names;
}

std::string features_to_json(const ProgramFeatures &f, std::string_view file) {
  nlohmann::ordered_json j;
  j["file"] = std::string(file);
  const auto values = f.values();
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    j[std::string(feature_names()[i])] = values[i];
  return j.dump();
}

} // namespace metatune
