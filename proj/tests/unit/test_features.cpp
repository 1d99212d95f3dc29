#include "doctest.h"
#include "metamorphic.hpp"
#include "support.hpp"

#include "json.hpp"

#include <algorithm>

using namespace metatune;
using metatune::testing::fixture_dir;
using metatune::testing::insert_comments;
using metatune::testing::read_text;
using metatune::testing::rename_locals;

namespace {

ProgramFeatures features_of(std::string_view text) { return extract_features(parse_source(text)); }

ProgramFeatures from_json(const nlohmann::json &j) {
  std::array<std::uint64_t, kFeatureCount> v{};
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    v[i] = j.at(std::string(feature_names()[i])).get<std::uint64_t>();
  return ProgramFeatures::from_values(v);
}

nlohmann::json golden() { return nlohmann::json::parse(read_text(fixture_dir() / "features" / "golden.json")); }

} // namespace

TEST_SUITE("feature-extractor") {

TEST_CASE("empty input parses to an empty unit") {
  const auto unit = parse_source("");
  CHECK(unit.tokens.empty());
  CHECK(unit.file_scope_vars.empty());
  CHECK(unit.function_defs.empty());
  CHECK(unit.balanced);
  CHECK(features_of("") == ProgramFeatures{});
}

TEST_CASE("file-scope variables and function bodies are recovered") {
  const auto unit = parse_source("int g; int main(){return g;}");
  CHECK(unit.file_scope_vars == std::set<std::string>{"g"});
  REQUIRE(unit.function_defs.size() == 1);
  CHECK(unit.function_defs.contains("main"));
  const auto body = unit.function_defs.at("main");
  CHECK(unit.tokens[body.begin].text == "return");
  CHECK(unit.tokens[body.end].text == "}");
}

TEST_CASE("tokens carry kinds and increasing offsets") {
  const auto unit = parse_source("int main(){int x=1+2;}");
  std::set<std::string> words;
  bool has_plus = false;
  for (const auto &t : unit.tokens) {
    if (t.kind == TokenKind::Identifier || t.kind == TokenKind::Keyword)
      words.insert(t.text);
    has_plus = has_plus || (t.kind == TokenKind::Operator && t.text == "+");
  }
  CHECK(words == std::set<std::string>{"int", "main", "x"});
  CHECK(has_plus);
  for (std::size_t i = 1; i < unit.tokens.size(); ++i)
    CHECK(unit.tokens[i - 1].offset < unit.tokens[i].offset);
}

TEST_CASE("comments, strings and preprocessor lines are opaque") {
  const auto unit = parse_source("#define X pthread_create(a)\n"
                                 "/* g */ int g; // h\n"
                                 "char *s = \"a { b\";\n"
                                 "char c = '}';\n");
  CHECK(unit.balanced);
  CHECK(unit.file_scope_vars == std::set<std::string>{"g", "s", "c"});
  const auto strings = std::count_if(unit.tokens.begin(), unit.tokens.end(),
                                     [](const Token &t) { return t.kind == TokenKind::String; });
  CHECK(strings == 1);
}

TEST_CASE("unbalanced braces degrade to whole-file scanning") {
  SUBCASE("unclosed") {
    const auto unit = parse_source("int g; void f() { g = g + 1; pthread_create(0,0,0,0);");
    CHECK_FALSE(unit.balanced);
    CHECK_FALSE(unit.warnings.empty());
    CHECK(unit.file_scope_vars.empty());
    const auto f = extract_features(unit);
    CHECK(f.threads_created == 1);
    CHECK(f.global_var_accesses == 0);
    CHECK(f.binary_operators == 1);
  }
  SUBCASE("stray close") {
    const auto unit = parse_source("} int main() { return 0; }");
    CHECK_FALSE(unit.balanced);
    CHECK_FALSE(unit.warnings.empty());
  }
}

TEST_CASE("one create and one join, no globals") {
  const auto f = features_of("void *w(void *a){return a;}\n"
                             "int main(){pthread_t t; pthread_create(&t,0,w,0); pthread_join(t,0); return 0;}");
  CHECK(f.threads_created == 1);
  CHECK(f.threads_joined == 1);
  CHECK(f.global_var_accesses == 0);
  CHECK(f.min_global_var_access == 0);
}

TEST_CASE("global accesses and calls to global-touching functions") {
  const auto f = features_of("int g; void f(){g=g+1;} int main(){f();f();}");
  CHECK(f.global_var_accesses == 2);
  CHECK(f.global_fn_calls == 2);
  CHECK(f.min_global_fn_calls == 2);
  CHECK(f.binary_operators == 1);
}

TEST_CASE("constant for-loop bounds") {
  auto loops = [](std::string_view header) {
    return features_of("int main(){int i; " + std::string(header) + "{} return 0;}").loop_iterations;
  };
  CHECK(loops("for(i=0;i<10;i++)") == 10);
  CHECK(loops("for(i=0;i<=10;i++)") == 11);
  CHECK(loops("for(i=10;i>0;i--)") == 10);
  CHECK(loops("for(i=10;i>=0;--i)") == 11);
  CHECK(loops("for(i=0;i<10;i+=3)") == 4);
  CHECK(loops("for(i=0;i<0x10;++i)") == 16);
  CHECK(loops("for(i=9;i>0;i-=2)") == 5);
  CHECK(loops("for(i=0;i!=10;i+=2)") == 5);
  CHECK(loops("for(i=0;i!=10;i+=3)") == kUnboundedLoop);
  CHECK(loops("for(i=0;i<10;i--)") == kUnboundedLoop);
  CHECK(loops("for(i=5;i<3;i++)") == 0);
  CHECK(loops("for(i=0;i<n;i++)") == kUnboundedLoop);
  CHECK(loops("for(;;)") == kUnboundedLoop);
  CHECK(loops("for(i=0;j<10;i++)") == kUnboundedLoop);
  CHECK(loops("while(1)") == kUnboundedLoop);
  CHECK(loops("do {} while(i);") == kUnboundedLoop);
}

TEST_CASE("atomic section markers") {
  const auto f = features_of("void g(){ __VERIFIER_atomic_begin(); __VERIFIER_atomic_end(); "
                             "__VERIFIER_atomic_acquire(); __VERIFIER_atomic_begin(); }");
  CHECK(f.atomic_locks == 3);
}

TEST_CASE("intrinsic name sets are configurable") {
  IntrinsicNames names;
  names.thread_create = {"thrd_create"};
  names.mutex_lock = {"mtx_lock"};
  const auto f = extract_features(parse_source("int main(){ thrd_create(0,0,0); mtx_lock(0); pthread_create(0,0,0,0); }"),
                                  names);
  CHECK(f.threads_created == 1);
  CHECK(f.mutex_locks == 1);
}

TEST_CASE("prototypes and declarations at file scope are not calls") {
  const auto f = features_of("extern int pthread_create(void *, void *, void *, void *);\n"
                             "extern int __VERIFIER_nondet_int(void);\n"
                             "int main(){ return 0; }");
  CHECK(f.threads_created == 0);
  CHECK(f.nondet_variables == 0);
}

TEST_CASE("GNU attributes do not hide declarations") {
  const auto unit = parse_source("extern int v __attribute__((aligned(8)));\n"
                                 "static void f(void) __attribute__((noinline)) { v = 1; }\n"
                                 "__extension__ typedef unsigned long long u64;\n");
  CHECK(unit.file_scope_vars == std::set<std::string>{"v"});
  CHECK(unit.function_defs.contains("f"));
  CHECK(unit.typedef_names.contains("u64"));
}

TEST_CASE("golden counts on hand-written fixtures") {
  const auto g = golden();
  CHECK(g.size() >= 10);
  for (const auto &[file, entry] : g.items()) {
    CAPTURE(file);
    const auto text = read_text(fixture_dir() / "features" / file);
    CHECK(features_of(text) == from_json(entry.at("features")));
  }
}

TEST_CASE("comment insertion leaves features unchanged") {
  std::mt19937_64 rng(7);
  const auto g = golden();
  for (const auto &[file, entry] : g.items()) {
    CAPTURE(file);
    const auto text = read_text(fixture_dir() / "features" / file);
    for (int rep = 0; rep < 5; ++rep)
      CHECK(features_of(insert_comments(text, rng)) == features_of(text));
  }
}

TEST_CASE("renaming locals leaves features unchanged") {
  const auto g = golden();
  for (const auto &[file, entry] : g.items()) {
    CAPTURE(file);
    const auto text = read_text(fixture_dir() / "features" / file);
    const auto locals = entry.at("locals").get<std::vector<std::string>>();
    const auto renamed = rename_locals(text, locals);
    if (!locals.empty())
      CHECK(renamed != text);
    CHECK(features_of(renamed) == features_of(text));
  }
}

TEST_CASE("appending k thread creations adds exactly k") {
  const auto g = golden();
  for (const auto &[file, entry] : g.items()) {
    const auto text = read_text(fixture_dir() / "features" / file);
    const auto before = features_of(text);
    if (!parse_source(text).balanced)
      continue;
    for (int k = 1; k <= 3; ++k) {
      std::string fragment = "\nvoid appended_fragment(void) {";
      for (int i = 0; i < k; ++i)
        fragment += " pthread_create(0, 0, 0, 0);";
      fragment += " }\n";
      CAPTURE(file);
      CHECK(features_of(text + fragment).threads_created == before.threads_created + static_cast<std::uint64_t>(k));
    }
  }
}

TEST_CASE("determinism and structural invariants") {
  const auto g = golden();
  for (const auto &[file, entry] : g.items()) {
    CAPTURE(file);
    const auto text = read_text(fixture_dir() / "features" / file);
    const auto f = features_of(text);
    CHECK(f == features_of(text));
    CHECK((f.min_global_var_access == 0) == (f.global_var_accesses == 0));
    if (f.global_var_accesses > 0) {
      CHECK(f.min_global_var_access >= 1);
      CHECK(f.min_global_var_access <= f.global_var_accesses);
    }
    CHECK((f.min_global_fn_calls == 0) == (f.global_fn_calls == 0));
    if (f.global_fn_calls > 0)
      CHECK(f.min_global_fn_calls <= f.global_fn_calls);

    const auto unit = parse_source(text);
    const auto calls = std::count_if(unit.tokens.begin(), unit.tokens.end(), [&](const Token &t) {
      const auto i = static_cast<std::size_t>(&t - unit.tokens.data());
      return t.kind == TokenKind::Identifier && i + 1 < unit.tokens.size() && unit.tokens[i + 1].text == "(";
    });
    CHECK(f.threads_joined <= static_cast<std::uint64_t>(calls));
    TokenRange prev{};
    std::vector<TokenRange> ranges;
    for (const auto &[name, r] : unit.function_defs)
      ranges.push_back(r);
    std::sort(ranges.begin(), ranges.end(), [](auto a, auto b) { return a.begin < b.begin; });
    for (const auto &r : ranges) {
      CHECK(r.begin >= prev.end);
      CHECK(r.begin <= r.end);
      CHECK(r.end <= unit.tokens.size());
      prev = r;
    }
  }
}

TEST_CASE("JSON record lists keys in canonical order") {
  ProgramFeatures f;
  f.threads_created = 3;
  f.loop_iterations = 7;
  const auto line = features_to_json(f, "x.c");
  CHECK(line.find('\n') == std::string::npos);
  std::size_t last = 0;
  for (auto name : feature_names()) {
    const auto pos = line.find("\"" + std::string(name) + "\"");
    REQUIRE(pos != std::string::npos);
    CHECK(pos > last);
    last = pos;
  }
  CHECK(line.find("\"threads_created\":3") != std::string::npos);
}

} // TEST_SUITE
