#pragma once

#include <array>
#include <nlohmann/json.hpp>
#include <span>
#include <string>

namespace warden {

/// cells[true][predicted] for binary labels.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, 2>, 2> cells{};

  std::size_t total() const;
  std::size_t row_sum(std::size_t true_class) const;
  std::size_t column_sum(std::size_t predicted_class) const;
  std::size_t trace() const { return cells[0][0] + cells[1][1]; }
  ConfusionMatrix transposed() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct AverageMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ErrorMeasures {
  double mae = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
};

struct EvaluationReport {
  ConfusionMatrix matrix;
  std::array<ClassMetrics, 2> per_class{};
  double accuracy = 0.0;
  AverageMetrics macro_avg;
  AverageMetrics weighted_avg;
  double mae = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
  /// Some class was never predicted, so its precision was set to 0.
  bool zero_division = false;
};

/// Throws ValidationError on empty input, a length mismatch, or a label
/// outside {0, 1}.
ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);

/// Throws ValidationError when the matrix is empty.
EvaluationReport report(const ConfusionMatrix& matrix);

ErrorMeasures errors_from_predictions(std::span<const int> y_true, std::span<const int> y_pred);

/// Shortest decimal that reads back to the same double (Python repr style).
std::string repr(double value);

/// Error block, matrix and classification table separated by dashed lines.
std::string render_report_text(const EvaluationReport& report);

nlohmann::ordered_json report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::json& j);

}  // namespace warden
