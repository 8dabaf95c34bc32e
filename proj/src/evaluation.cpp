#include "warden/evaluation.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "warden/error.hpp"

namespace warden {
namespace {

constexpr const char* kRule = "-----------------------------------------------------\n";

double safe_div(double num, double den) { return den > 0.0 ? num / den : 0.0; }

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// One classification-table row: 12-wide right-aligned name, then 9-wide cells.
std::string table_row(const std::string& name, const std::string& a, const std::string& b, const std::string& c,
                      const std::string& d) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%12s  %9s %9s %9s %9s\n", name.c_str(), a.c_str(), b.c_str(), c.c_str(), d.c_str());
  return buf;
}

nlohmann::ordered_json averages_json(const AverageMetrics& a) {
  nlohmann::ordered_json j;
  j["precision"] = a.precision;
  j["recall"] = a.recall;
  j["f1"] = a.f1;
  return j;
}

AverageMetrics averages_from_json(const nlohmann::json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>()};
}

}  // namespace

std::size_t ConfusionMatrix::total() const { return row_sum(0) + row_sum(1); }
std::size_t ConfusionMatrix::row_sum(std::size_t t) const { return cells[t][0] + cells[t][1]; }
std::size_t ConfusionMatrix::column_sum(std::size_t p) const { return cells[0][p] + cells[1][p]; }

ConfusionMatrix ConfusionMatrix::transposed() const {
  ConfusionMatrix t;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) t.cells[i][j] = cells[j][i];
  return t;
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size())
    throw ValidationError("length mismatch: " + std::to_string(y_true.size()) + " vs " + std::to_string(y_pred.size()));
  if (y_true.empty()) throw ValidationError("no samples to evaluate");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) throw ValidationError("labels must be 0 or 1");
    m.cells[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)] += 1;
  }
  return m;
}

EvaluationReport report(const ConfusionMatrix& matrix) {
  const std::size_t total = matrix.total();
  if (total == 0) throw ValidationError("empty confusion matrix");
  EvaluationReport r;
  r.matrix = matrix;
  for (std::size_t k = 0; k < 2; ++k) {
    auto& m = r.per_class[k];
    const double hit = static_cast<double>(matrix.cells[k][k]);
    const double predicted = static_cast<double>(matrix.column_sum(k));
    if (predicted == 0.0) r.zero_division = true;
    m.precision = safe_div(hit, predicted);
    m.recall = safe_div(hit, static_cast<double>(matrix.row_sum(k)));
    m.f1 = safe_div(2.0 * m.precision * m.recall, m.precision + m.recall);
    m.support = matrix.row_sum(k);
  }
  const double n = static_cast<double>(total);
  r.accuracy = static_cast<double>(matrix.trace()) / n;
  r.macro_avg = {(r.per_class[0].precision + r.per_class[1].precision) / 2.0,
                 (r.per_class[0].recall + r.per_class[1].recall) / 2.0,
                 (r.per_class[0].f1 + r.per_class[1].f1) / 2.0};
  const double w0 = static_cast<double>(r.per_class[0].support) / n;
  const double w1 = static_cast<double>(r.per_class[1].support) / n;
  r.weighted_avg = {w0 * r.per_class[0].precision + w1 * r.per_class[1].precision,
                    w0 * r.per_class[0].recall + w1 * r.per_class[1].recall,
                    w0 * r.per_class[0].f1 + w1 * r.per_class[1].f1};
  // With hard 0/1 labels every miss contributes |1| = 1^2 = 1.
  const double misses = static_cast<double>(matrix.cells[0][1] + matrix.cells[1][0]);
  r.mae = misses / n;
  r.mse = misses / n;
  r.rmse = std::sqrt(r.mse);
  return r;
}

ErrorMeasures errors_from_predictions(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size())
    throw ValidationError("length mismatch: " + std::to_string(y_true.size()) + " vs " + std::to_string(y_pred.size()));
  if (y_true.empty()) throw ValidationError("no samples to evaluate");
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double d = static_cast<double>(y_true[i] - y_pred[i]);
    abs_sum += std::abs(d);
    sq_sum += d * d;
  }
  const double n = static_cast<double>(y_true.size());
  ErrorMeasures e;
  e.mae = abs_sum / n;
  e.mse = sq_sum / n;
  e.rmse = std::sqrt(e.mse);
  return e;
}

std::string repr(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  std::string s(buf, ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string render_report_text(const EvaluationReport& r) {
  std::string out;
  out += kRule;
  out += "Mean Absolute Error: " + repr(r.mae) + "\n";
  out += kRule;
  out += "Mean Squared Error: " + repr(r.mse) + "\n";
  out += kRule;
  out += "Root Mean Squared Error: " + repr(r.rmse) + "\n";
  out += kRule;
  out += "\n";

  std::size_t width = 1;
  for (const auto& row : r.matrix.cells)
    for (auto v : row) width = std::max(width, std::to_string(v).size());
  for (std::size_t i = 0; i < 2; ++i) {
    out += i == 0 ? "[[" : " [";
    for (std::size_t j = 0; j < 2; ++j) {
      std::string cell = std::to_string(r.matrix.cells[i][j]);
      if (j > 0) out += ' ';
      out += std::string(width - cell.size(), ' ') + cell;
    }
    out += i == 0 ? "]\n" : "]]\n";
  }
  out += kRule;

  out += table_row("", "precision", "recall", "f1-score", "support");
  out += "\n";
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& m = r.per_class[k];
    out += table_row(std::to_string(k), fixed2(m.precision), fixed2(m.recall), fixed2(m.f1), std::to_string(m.support));
  }
  out += "\n";
  const std::string total = std::to_string(r.matrix.total());
  out += table_row("accuracy", "", "", fixed2(r.accuracy), total);
  out += table_row("macro avg", fixed2(r.macro_avg.precision), fixed2(r.macro_avg.recall), fixed2(r.macro_avg.f1), total);
  out += table_row("weighted avg", fixed2(r.weighted_avg.precision), fixed2(r.weighted_avg.recall),
                   fixed2(r.weighted_avg.f1), total);
  out += kRule;
  return out;
}

nlohmann::ordered_json report_to_json(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  j["confusion_matrix"] = {{r.matrix.cells[0][0], r.matrix.cells[0][1]}, {r.matrix.cells[1][0], r.matrix.cells[1][1]}};
  auto classes = nlohmann::ordered_json::array();
  for (const auto& m : r.per_class) {
    nlohmann::ordered_json c;
    c["precision"] = m.precision;
    c["recall"] = m.recall;
    c["f1"] = m.f1;
    c["support"] = m.support;
    classes.push_back(c);
  }
  j["per_class"] = classes;
  j["accuracy"] = r.accuracy;
  j["macro_avg"] = averages_json(r.macro_avg);
  j["weighted_avg"] = averages_json(r.weighted_avg);
  j["mae"] = r.mae;
  j["mse"] = r.mse;
  j["rmse"] = r.rmse;
  j["zero_division"] = r.zero_division;
  return j;
}

EvaluationReport report_from_json(const nlohmann::json& j) {
  try {
    EvaluationReport r;
    const auto& m = j.at("confusion_matrix");
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t k = 0; k < 2; ++k) r.matrix.cells[i][k] = m.at(i).at(k).get<std::size_t>();
    for (std::size_t k = 0; k < 2; ++k) {
      const auto& c = j.at("per_class").at(k);
      r.per_class[k] = {c.at("precision").get<double>(), c.at("recall").get<double>(), c.at("f1").get<double>(),
                        c.at("support").get<std::size_t>()};
    }
    r.accuracy = j.at("accuracy").get<double>();
    r.macro_avg = averages_from_json(j.at("macro_avg"));
    r.weighted_avg = averages_from_json(j.at("weighted_avg"));
    r.mae = j.at("mae").get<double>();
    r.mse = j.at("mse").get<double>();
    r.rmse = j.at("rmse").get<double>();
    r.zero_division = j.value("zero_division", false);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("evaluation json: ") + e.what());
  }
}

}  // namespace warden
