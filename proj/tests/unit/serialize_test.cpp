#include "obswin/serialize.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

namespace obswin {
namespace {

TEST(FormatDouble, SeventeenSignificantDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(2.0), "2.0");
  EXPECT_EQ(format_double(-0.5), "-0.5");
  EXPECT_EQ(format_double(1e-20), "9.9999999999999995e-21");
  EXPECT_EQ(std::stod(format_double(M_PI)), M_PI);
}

TEST(CanonicalDump, SortedKeysAndStableLayout) {
  Json j = {{"b", 1}, {"a", {1.5, 2}}, {"c", Json::object()}, {"d", Json::array()}};
  EXPECT_EQ(canonical_dump(j),
            "{\n  \"a\": [\n    1.5,\n    2\n  ],\n  \"b\": 1,\n  \"c\": {},\n  \"d\": []\n}\n");
}

TEST(CanonicalDump, NonFiniteBecomesNull) {
  Json j = {{"x", std::numeric_limits<double>::infinity()},
            {"y", std::numeric_limits<double>::quiet_NaN()}};
  EXPECT_EQ(canonical_dump(j), "{\n  \"x\": null,\n  \"y\": null\n}\n");
}

TEST(CanonicalDump, StringsAreEscaped) {
  EXPECT_EQ(canonical_dump(Json("a\"b\n")), "\"a\\\"b\\n\"\n");
}

TEST(Csv, KAnchors) {
  const KFunction k({{0, 0}, {0.1, 0.15}, {0.2, 0.3}});
  EXPECT_EQ(k_anchors_csv(k),
            "r,alpha,certified\n0.0,0.0,0\n0.10000000000000001,0.14999999999999999,1\n"
            "0.20000000000000001,0.29999999999999999,1\n");
}

TEST(Csv, WindowCurve) {
  WindowReport r;
  r.curve.push_back({0.5, 0.25, 3, 1, 0, true});
  EXPECT_EQ(window_curve_csv(r),
            "r,T_hat,n_pairs,n_undistinguished,n_truncated,lower_bound\n0.5,0.25,3,1,0,1\n");
}

}  // namespace
}  // namespace obswin
