#include "obswin/system.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "obswin/error.hpp"
#include "obswin/example_cases.hpp"

namespace obswin {
namespace {

SpecError::Kind spec_error_kind(std::string_view text) {
  try {
    parse_system(text);
  } catch (const SpecError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no SpecError for:\n" << text;
  return SpecError::Kind::Format;
}

TEST(ParseSystem, ExampleOne) {
  const SystemSpec s = parse_system(
      "system example1\ndim 1\noutputs 1\nf1 = x1^3\nh1 = x1^3\nomega [-1, 1]\n");
  EXPECT_EQ(s.name, "example1");
  EXPECT_EQ(s.n, 1u);
  EXPECT_EQ(s.p, 1u);
  EXPECT_EQ(s.omega[0].lo, -1.0);
  EXPECT_EQ(s.omega[0].hi, 1.0);
  EXPECT_DOUBLE_EQ(s.eval_f(Vector::Constant(1, 0.5))[0], 0.125);
}

TEST(ParseSystem, ExampleTwoWithParameter) {
  const SystemSpec s = parse_system(
      "# piecewise output\nsystem ex2\ndim 1\noutputs 1\nparam M = 1\n"
      "f1 = x1\nh1 = if(x1>=M, x1-M, 0)\nomega [0, 0.5]\n");
  EXPECT_EQ(s.params.at("M"), 1.0);
  EXPECT_EQ(s.eval_h(Vector::Constant(1, 1.25))[0], 0.25);
  EXPECT_EQ(s.omega[0].hi, 0.5);
}

TEST(ParseSystem, Errors) {
  const std::string ok_head = "system s\ndim 1\noutputs 1\nf1 = x1\nh1 = x1\n";
  EXPECT_EQ(spec_error_kind(ok_head + "omega [1, -1]\n"), SpecError::Kind::InvalidBox);
  EXPECT_EQ(spec_error_kind(ok_head + "omega [0, 1] x [0, 1]\n"),
            SpecError::Kind::DimensionMismatch);
  EXPECT_EQ(spec_error_kind("system s\ndim 2\noutputs 1\nf1 = x1\nh1 = x1\nomega [0,1] x [0,1]\n"),
            SpecError::Kind::DimensionMismatch);
  EXPECT_EQ(spec_error_kind("system s\ndim 1\noutputs 1\nf1 = x1\nh1 = x1 - M\nomega [0,1]\n"),
            SpecError::Kind::UndeclaredParameter);
  EXPECT_EQ(spec_error_kind("system s\ndim 1\noutputs 1\nf1 = x1 +\nh1 = x1\nomega [0,1]\n"),
            SpecError::Kind::Format);
  EXPECT_EQ(spec_error_kind(ok_head), SpecError::Kind::Format);
  EXPECT_EQ(spec_error_kind(ok_head + "omega [0, inf]\n"), SpecError::Kind::Format);
}

TEST(ParseSystem, ErrorCarriesLine) {
  try {
    parse_system("system s\ndim 1\noutputs 1\nf1 = x1 * (2\nh1 = x1\nomega [0,1]\n");
    FAIL();
  } catch (const SpecError& e) {
    EXPECT_EQ(e.line(), 4);
  }
}

TEST(ParseSystem, PrintedSpecReparsesToEquivalentSystem) {
  std::mt19937_64 rng(5);
  for (const std::string& name : example_names()) {
    const SystemSpec a = load_example(name).spec;
    const SystemSpec b = parse_system(to_string(a));
    ASSERT_EQ(a.n, b.n);
    ASSERT_EQ(a.p, b.p);
    EXPECT_EQ(a.params, b.params);
    for (std::size_t i = 0; i < a.n; ++i) {
      EXPECT_EQ(a.omega[i].lo, b.omega[i].lo);
      EXPECT_EQ(a.omega[i].hi, b.omega[i].hi);
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
      Vector x(a.n);
      for (std::size_t i = 0; i < a.n; ++i)
        x[static_cast<Eigen::Index>(i)] = a.omega[i].lo + u(rng) * a.omega[i].width();
      EXPECT_EQ(a.eval_f(x), b.eval_f(x));
      EXPECT_EQ(a.eval_h(x), b.eval_h(x));
    }
  }
}

TEST(ValidateSystem, ExampleOneEscapesNearHalf) {
  const auto warnings = validate_system(load_example("example1").spec);
  const auto escape = std::find_if(warnings.begin(), warnings.end(), [](const SystemWarning& w) {
    return w.kind == SystemWarning::Kind::FiniteEscape;
  });
  ASSERT_NE(escape, warnings.end());
  EXPECT_NEAR(escape->time, 0.5, 1e-3);
  EXPECT_EQ(std::abs(escape->point[0]), 1.0);
}

TEST(ValidateSystem, ExampleTwoSeamOutsideOmega) {
  EXPECT_TRUE(validate_system(load_example("example2-kink").spec).empty());
}

TEST(ValidateSystem, ContractionIsClean) {
  EXPECT_TRUE(validate_system(load_example("linear-contraction").spec).empty());
}

TEST(ValidateSystem, SeamInsideOmegaIsReported) {
  const SystemSpec s = parse_system(
      "system s\ndim 1\noutputs 1\nparam M = 1\nf1 = x1\nh1 = if(x1 >= M, x1 - M, 0)\n"
      "omega [0, 2]\n");
  const auto warnings = validate_system(s);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_EQ(warnings[0].kind, SystemWarning::Kind::ConditionalSeam);
}

TEST(Box, Geometry) {
  const Box b({{0, 1}, {-1, 1}});
  EXPECT_DOUBLE_EQ(b.diameter(), std::sqrt(5.0));
  EXPECT_EQ(b.corners().size(), 4u);
  EXPECT_EQ(b.corners()[1], (Vector(2) << 0, 1).finished());
  EXPECT_TRUE(b.contains((Vector(2) << 1, -1).finished()));
  EXPECT_FALSE(b.contains((Vector(2) << 1.1, 0).finished()));
  EXPECT_EQ(b.clamp((Vector(2) << 2, -3).finished()), (Vector(2) << 1, -1).finished());
  EXPECT_THROW(Box({{1, 0}}), SpecError);
}

}  // namespace
}  // namespace obswin
