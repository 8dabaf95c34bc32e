#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "warden/error.hpp"
#include "warden/evaluation.hpp"

using namespace warden;

namespace {

ConfusionMatrix matrix(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
  ConfusionMatrix m;
  m.cells = {{{a, b}, {c, d}}};
  return m;
}

const ConfusionMatrix kFig5 = matrix(61, 4, 7, 48);

}  // namespace

TEST(Confusion, PerfectPredictionIsDiagonal) {
  std::vector<int> y{0, 0, 0, 0, 0, 0, 1, 1, 1, 1};
  EXPECT_EQ(confusion(y, y), matrix(6, 0, 0, 4));
}

TEST(Confusion, CountsCells) {
  std::vector<int> t{0, 0, 1, 1, 1};
  std::vector<int> p{0, 1, 0, 1, 1};
  EXPECT_EQ(confusion(t, p), matrix(1, 1, 1, 2));
}

TEST(Confusion, SwapTransposes) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> t(1 + gen() % 40), p(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] = static_cast<int>(gen() % 2);
      p[i] = static_cast<int>(gen() % 2);
    }
    EXPECT_EQ(confusion(p, t), confusion(t, p).transposed());
    EXPECT_EQ(confusion(t, p).total(), t.size());
  }
}

TEST(Confusion, RejectsBadInput) {
  EXPECT_THROW(confusion(std::vector<int>{0, 1}, std::vector<int>{0}), ValidationError);
  EXPECT_THROW(confusion(std::vector<int>{}, std::vector<int>{}), ValidationError);
  EXPECT_THROW(confusion(std::vector<int>{2}, std::vector<int>{0}), ValidationError);
}

TEST(Report, PublishedMatrix) {
  auto r = report(kFig5);
  EXPECT_DOUBLE_EQ(r.per_class[0].precision, 0.8970588235294118);
  EXPECT_DOUBLE_EQ(r.per_class[1].precision, 0.9230769230769231);
  EXPECT_DOUBLE_EQ(r.per_class[0].recall, 0.9384615384615385);
  EXPECT_DOUBLE_EQ(r.per_class[1].recall, 0.8727272727272727);
  EXPECT_DOUBLE_EQ(r.per_class[0].f1, 0.9172932330827067);
  EXPECT_DOUBLE_EQ(r.per_class[1].f1, 0.897196261682243);
  EXPECT_EQ(r.per_class[0].support, 65u);
  EXPECT_EQ(r.per_class[1].support, 55u);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.9083333333333333);
  EXPECT_DOUBLE_EQ(r.macro_avg.precision, 0.9100678733031675);
  EXPECT_DOUBLE_EQ(r.weighted_avg.precision, 0.9089837858220212);
  EXPECT_DOUBLE_EQ(r.weighted_avg.f1, 0.9080821211908275);
  EXPECT_DOUBLE_EQ(r.mae, 0.09166666666666666);
  EXPECT_DOUBLE_EQ(r.mse, 0.09166666666666666);
  EXPECT_DOUBLE_EQ(r.rmse, 0.30276503540974914);
  EXPECT_FALSE(r.zero_division);
}

TEST(Report, DiagonalMatrix) {
  auto r = report(matrix(5, 0, 0, 3));
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.mae, 0.0);
  EXPECT_EQ(r.mse, 0.0);
  EXPECT_EQ(r.rmse, 0.0);
}

TEST(Report, NeverPredictedClassHasZeroPrecision) {
  auto r = report(matrix(5, 0, 3, 0));
  EXPECT_EQ(r.per_class[1].precision, 0.0);
  EXPECT_EQ(r.per_class[1].f1, 0.0);
  EXPECT_TRUE(r.zero_division);
}

TEST(Report, EmptyMatrixThrows) { EXPECT_THROW(report(ConfusionMatrix{}), ValidationError); }

TEST(Report, TextLayout) {
  const std::string text = render_report_text(report(kFig5));
  const std::string expected_table =
      "              precision    recall  f1-score   support\n"
      "\n"
      "           0       0.90      0.94      0.92        65\n"
      "           1       0.92      0.87      0.90        55\n"
      "\n"
      "    accuracy                           0.91       120\n"
      "   macro avg       0.91      0.91      0.91       120\n"
      "weighted avg       0.91      0.91      0.91       120\n";
  EXPECT_NE(text.find(expected_table), std::string::npos) << text;
  EXPECT_NE(text.find("Mean Absolute Error: 0.09166666666666666\n"), std::string::npos);
  EXPECT_NE(text.find("Mean Squared Error: 0.09166666666666666\n"), std::string::npos);
  EXPECT_NE(text.find("Root Mean Squared Error: 0.30276503540974914\n"), std::string::npos);
  EXPECT_NE(text.find("[[61  4]\n [ 7 48]]\n"), std::string::npos);
}

TEST(Report, PureFunctionOfMatrix) {
  EXPECT_EQ(render_report_text(report(kFig5)), render_report_text(report(kFig5)));
  EXPECT_EQ(report_to_json(report(kFig5)).dump(), report_to_json(report(kFig5)).dump());
}

TEST(Report, JsonRoundTrip) {
  auto r = report(kFig5);
  auto back = report_from_json(nlohmann::json::parse(report_to_json(r).dump()));
  EXPECT_EQ(report_to_json(back).dump(), report_to_json(r).dump());
}

TEST(ErrorMeasures, Examples) {
  auto all = errors_from_predictions(std::vector<int>{0, 1, 1}, std::vector<int>{0, 1, 1});
  EXPECT_EQ(all.mae, 0.0);
  EXPECT_EQ(all.rmse, 0.0);
  auto one = errors_from_predictions(std::vector<int>{0, 1, 1, 0}, std::vector<int>{0, 1, 0, 0});
  EXPECT_EQ(one.mae, 0.25);
  EXPECT_EQ(one.mse, 0.25);
  EXPECT_EQ(one.rmse, 0.5);
  std::vector<int> t(120, 0), p(120, 0);
  for (int i = 0; i < 11; ++i) p[static_cast<std::size_t>(i)] = 1;
  auto eleven = errors_from_predictions(t, p);
  EXPECT_DOUBLE_EQ(eleven.mae, 0.09166666666666666);
  EXPECT_DOUBLE_EQ(eleven.rmse, 0.30276503540974914);
  EXPECT_THROW(errors_from_predictions(std::vector<int>{0}, std::vector<int>{}), ValidationError);
}

TEST(EvaluationProperty, HardLabelIdentityAndAverages) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<int> t(1 + gen() % 200), p(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] = static_cast<int>(gen() % 2);
      p[i] = static_cast<int>(gen() % 2);
    }
    auto r = report(confusion(t, p));
    auto e = errors_from_predictions(t, p);
    EXPECT_NEAR(e.mae, 1.0 - r.accuracy, 1e-12);
    EXPECT_NEAR(e.mse, 1.0 - r.accuracy, 1e-12);
    EXPECT_NEAR(e.rmse, std::sqrt(1.0 - r.accuracy), 1e-12);
    EXPECT_NEAR(r.mae, e.mae, 1e-12);
    EXPECT_EQ(r.per_class[0].support + r.per_class[1].support, t.size());
    auto between = [](double v, double a, double b) { return v >= std::min(a, b) - 1e-12 && v <= std::max(a, b) + 1e-12; };
    EXPECT_TRUE(between(r.weighted_avg.precision, r.per_class[0].precision, r.per_class[1].precision));
    EXPECT_TRUE(between(r.weighted_avg.recall, r.per_class[0].recall, r.per_class[1].recall));
    EXPECT_TRUE(between(r.weighted_avg.f1, r.per_class[0].f1, r.per_class[1].f1));
  }
}

TEST(Repr, ShortestRoundTrip) {
  EXPECT_EQ(repr(0.1), "0.1");
  EXPECT_EQ(repr(1.0), "1.0");
  EXPECT_EQ(repr(11.0 / 120.0), "0.09166666666666666");
}
