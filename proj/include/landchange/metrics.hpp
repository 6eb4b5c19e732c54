#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include <nlohmann/json.hpp>

#include "landchange/cart.hpp"
#include "landchange/error.hpp"
#include "landchange/raster.hpp"
#include "landchange/samples.hpp"

namespace landchange {

/// Two-class confusion matrix, cells[truth][predicted].
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, 2>, 2> cells{};

  void add(int truth, int predicted) { ++cells.at(static_cast<std::size_t>(truth)).at(static_cast<std::size_t>(predicted)); }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) cells[i][j] += o.cells[i][j];
    return *this;
  }

  std::uint64_t total() const noexcept { return cells[0][0] + cells[0][1] + cells[1][0] + cells[1][1]; }
  std::uint64_t truth_total(std::size_t c) const noexcept { return cells[c][0] + cells[c][1]; }
  std::uint64_t predicted_total(std::size_t c) const noexcept { return cells[0][c] + cells[1][c]; }

  double overall_accuracy() const {
    require_nonempty();
    return static_cast<double>(cells[0][0] + cells[1][1]) / static_cast<double>(total());
  }

  /// Chance agreement from the row and column marginals.
  double expected_agreement() const {
    require_nonempty();
    const double n = static_cast<double>(total());
    double pe = 0.0;
    for (std::size_t c = 0; c < 2; ++c) {
      pe += (static_cast<double>(truth_total(c)) / n) * (static_cast<double>(predicted_total(c)) / n);
    }
    return pe;
  }

  /// Undefined when chance agreement is 1 (both maps a single class).
  bool kappa_degenerate() const { return expected_agreement() == 1.0; }

  /// Cohen's kappa; 0 when degenerate.
  double kappa() const {
    const double pe = expected_agreement();
    if (pe == 1.0) return 0.0;
    return (overall_accuracy() - pe) / (1.0 - pe);
  }

  /// Recall of class c; empty when the class never occurs in the truth.
  std::optional<double> producer_accuracy(std::size_t c) const {
    const auto d = truth_total(c);
    if (d == 0) return std::nullopt;
    return static_cast<double>(cells[c][c]) / static_cast<double>(d);
  }

  /// Precision of class c; empty when the class is never predicted.
  std::optional<double> user_accuracy(std::size_t c) const {
    const auto d = predicted_total(c);
    if (d == 0) return std::nullopt;
    return static_cast<double>(cells[c][c]) / static_cast<double>(d);
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
  void require_nonempty() const {
    if (total() == 0) throw ValidationError("confusion matrix is empty");
  }
};

/// Tallies jointly valid pixels (neither map 255).
inline ConfusionMatrix confusion(const ByteMap& predicted, const ByteMap& truth) {
  if (predicted.width() != truth.width() || predicted.height() != truth.height()) {
    throw ValidationError(detail::concat("map dimensions differ: predicted ", predicted.width(), "x",
                                         predicted.height(), ", truth ", truth.width(), "x", truth.height()));
  }
  if (predicted.kind() != MapKind::classmap || truth.kind() != MapKind::classmap) {
    throw ValidationError("confusion needs two classmaps");
  }
  predicted.validate_codes();
  truth.validate_codes();
  ConfusionMatrix m;
  const auto p = predicted.codes();
  const auto t = truth.codes();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == kNodataCode || t[i] == kNodataCode) continue;
    m.add(t[i], p[i]);
  }
  if (m.total() == 0) throw ValidationError("no jointly valid pixels to compare");
  return m;
}

inline ConfusionMatrix holdout_accuracy(const DecisionTree& tree, const TrainingTable& table) {
  if (table.empty()) throw ValidationError("holdout table is empty");
  if (table.feature_count != tree.feature_count) {
    throw ValidationError(detail::concat("table has ", table.feature_count, " features, tree expects ",
                                         tree.feature_count));
  }
  table.validate();
  ConfusionMatrix m;
  for (const auto& row : table.rows) m.add(row.label, predict(tree, row.values));
  return m;
}

inline nlohmann::json metrics_to_json(const ConfusionMatrix& m) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"matrix", {{m.cells[0][0], m.cells[0][1]}, {m.cells[1][0], m.cells[1][1]}}},
          {"overall_accuracy", m.overall_accuracy()},
          {"kappa", m.kappa()},
          {"kappa_degenerate", m.kappa_degenerate()},
          {"producers", {opt(m.producer_accuracy(0)), opt(m.producer_accuracy(1))}},
          {"users", {opt(m.user_accuracy(0)), opt(m.user_accuracy(1))}},
          {"valid_pixels", m.total()}};
}

}  // namespace landchange
