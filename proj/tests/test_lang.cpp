#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "dirloc/ast.hpp"
#include "dirloc/parser.hpp"
#include "dirloc/printer.hpp"
#include "dirloc/random_program.hpp"

using namespace dirloc;
using lang::AstNode;
using lang::NodeKind;

namespace {

std::vector<NodeKind> kinds(const AstNode& tree) {
  std::vector<NodeKind> out;
  lang::walk(tree, [&](const AstNode& n) { out.push_back(n.kind); });
  return out;
}

}  // namespace

TEST(Parse, LetWithNegatedZero) {
  AstNode t = lang::parse("let y = x + -0;");
  std::vector<NodeKind> want = {NodeKind::Block,      NodeKind::Let,     NodeKind::BinaryOp,
                                NodeKind::Identifier, NodeKind::UnaryOp, NodeKind::NumberLit};
  EXPECT_EQ(kinds(t), want);
  const AstNode* unary = lang::find_node(t, 5);
  const AstNode* zero = lang::find_node(t, 6);
  ASSERT_NE(unary, nullptr);
  ASSERT_NE(zero, nullptr);
  EXPECT_EQ(unary->text(), "-");
  EXPECT_EQ(zero->value, lang::Payload(std::int64_t{0}));
  EXPECT_EQ(lang::find_node(t, 3)->text(), "+");
  EXPECT_EQ(lang::find_node(t, 2)->text(), "y");
}

TEST(Parse, IdsArePreorderAndDense) {
  AstNode t = lang::parse("function f(a, b) { if (a < b) { return a; } return b; }\nf(1, 2);\n");
  int expected = 1;
  lang::walk(t, [&](const AstNode& n) { EXPECT_EQ(n.id, expected++); });
  EXPECT_EQ(expected - 1, lang::size(t));
}

TEST(Parse, EmptyInputIsEmptyBlock) {
  AstNode t = lang::parse("");
  EXPECT_EQ(t.kind, NodeKind::Block);
  EXPECT_EQ(lang::size(t), 1);
  EXPECT_EQ(t.id, 1);
}

TEST(Parse, SyntaxErrorCarriesPosition) {
  try {
    lang::parse("let x = 1;\nlet = 2;\n");
    FAIL() << "expected a syntax error";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 5);
  }
  EXPECT_THROW(lang::parse("let x = (1 + 2;"), SyntaxError);
  EXPECT_THROW(lang::parse("return 1;"), SyntaxError);
  EXPECT_FALSE(lang::try_parse("let x = ;").has_value());
}

TEST(Parse, IntegerAndFloatLiteralsStayDistinct) {
  AstNode t = lang::parse("1; 1.0; (-0.0);");
  EXPECT_TRUE(std::holds_alternative<std::int64_t>(lang::find_node(t, 3)->value));
  EXPECT_TRUE(std::holds_alternative<double>(lang::find_node(t, 5)->value));
  const auto& negzero = std::get<double>(lang::find_node(t, 7)->value);
  EXPECT_TRUE(std::signbit(negzero));
}

TEST(Print, FunctionProgramRoundTripsExactly) {
  const std::string src =
      "function foo(x) {\n"
      "  let y = x + -0.0;\n"
      "  return y == 0.0;\n"
      "}\n"
      "foo(1);\n";
  EXPECT_EQ(lang::print(lang::parse(src)), src);
}

TEST(Print, SingleExpressionStatement) {
  EXPECT_EQ(lang::print(lang::parse("42;")), "42;\n");
}

TEST(Print, DropsOnlyRedundantParens) {
  EXPECT_EQ(lang::print(lang::parse("let a = (1 + 2) * 3;")), "let a = (1 + 2) * 3;\n");
  EXPECT_EQ(lang::print(lang::parse("let a = (1 * 2) + 3;")), "let a = 1 * 2 + 3;\n");
  EXPECT_EQ(lang::print(lang::parse("let a = 1 - (2 - 3);")), "let a = 1 - (2 - 3);\n");
  EXPECT_EQ(lang::print(lang::parse("let a = (1 < 2) == true;")), "let a = 1 < 2 == true;\n");
}

TEST(Print, RandomProgramsRoundTrip) {
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    AstNode t = lang::random_program(rng);
    std::string once = lang::print(t);
    AstNode again = lang::parse(once);
    EXPECT_EQ(again, t) << once;
    EXPECT_EQ(lang::print(again), once);
  }
}

TEST(Ast, RenumberIsIdempotent) {
  AstNode t = lang::parse("let a = 1 + 2 * 3; a;");
  AstNode once = lang::renumber(t);
  EXPECT_EQ(once, t);
  EXPECT_EQ(lang::renumber(once), once);
}

TEST(Ast, JsonFieldOrder) {
  auto j = lang::to_json(lang::parse("1;"));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"id", "kind", "value", "children"}));
  EXPECT_EQ(j["children"][0]["kind"], "ExprStmt");
  EXPECT_EQ(j["children"][0]["children"][0]["value"], 1);
}
