#pragma once

// Page-level tracking: run a filter over a gaze trace, turn slip resets into
// line numbers, and score them against ground-truth labels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "slipkf/errors.hpp"
#include "slipkf/filter.hpp"
#include "slipkf/model.hpp"

namespace slipkf {

enum class FilterKind { kRegular, kSlip };

struct PageTrace {
  std::string page_id;
  std::vector<Measurement> samples;
  /// Ground-truth 1-based line numbers, one per sample, when known.
  std::optional<std::vector<int>> labels;
};

struct LineStat {
  int line = 0;
  double dwell_seconds = 0.0;
  double mean_x_velocity = 0.0;
  std::size_t sample_count = 0;

  /// Seconds to read one page-width at the line's mean filtered velocity.
  std::optional<double> implied_seconds_per_line() const {
    if (mean_x_velocity > 0.0) return 1.0 / mean_x_velocity;
    return std::nullopt;
  }
};

struct TrackResult {
  std::vector<StateVector> estimates;
  std::vector<std::optional<double>> nis_series;
  std::vector<std::size_t> reset_indices;
  std::vector<int> predicted_lines;
  std::optional<double> accuracy;
  std::vector<LineStat> line_stats;
  std::vector<std::string> warnings;
};

/// Rejects traces whose timestamps are not strictly increasing or whose
/// spacing strays more than 10% from delta_t.
inline void validate_trace(const PageTrace& trace, double delta_t) {
  const auto& s = trace.samples;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s[i].finite()) {
      throw Error(ErrorKind::kInvalidInput, "sample " + std::to_string(i) + " is not finite");
    }
    if (i == 0) continue;
    const double spacing = s[i].t - s[i - 1].t;
    if (!(spacing > 0.0)) {
      throw Error(ErrorKind::kInvalidInput, "timestamps not strictly increasing at sample " + std::to_string(i));
    }
    if (std::abs(spacing - delta_t) > 0.1 * delta_t) {
      throw Error(ErrorKind::kInvalidInput, "sample spacing at sample " + std::to_string(i) +
                                                " deviates more than 10% from delta_t");
    }
  }
  if (trace.labels) {
    if (trace.labels->size() != s.size()) {
      throw Error(ErrorKind::kInvalidInput, "labels length does not match sample count");
    }
    for (std::size_t i = 0; i < trace.labels->size(); ++i) {
      if ((*trace.labels)[i] < 1) {
        throw Error(ErrorKind::kInvalidInput, "label at sample " + std::to_string(i) + " is < 1");
      }
    }
  }
}

/// Line 1 before the first reset; each reset starts the next line at its
/// own index.
inline std::vector<int> assign_lines(const std::vector<std::size_t>& reset_indices, std::size_t n_samples) {
  std::vector<int> lines(n_samples, 1);
  for (std::size_t j = 0; j < reset_indices.size(); ++j) {
    const std::size_t idx = reset_indices[j];
    if (idx >= n_samples) {
      throw Error(ErrorKind::kInvalidInput, "reset index " + std::to_string(idx) + " out of range");
    }
    if (j > 0 && idx <= reset_indices[j - 1]) {
      throw Error(ErrorKind::kInvalidInput, "reset indices must be strictly increasing");
    }
  }
  int line = 1;
  std::size_t next = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    while (next < reset_indices.size() && reset_indices[next] == i) {
      ++line;
      ++next;
    }
    lines[i] = line;
  }
  return lines;
}

inline double line_detection_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorKind::kInvalidInput, "predicted and truth lengths differ");
  }
  if (predicted.empty()) throw Error(ErrorKind::kInvalidInput, "accuracy of an empty sequence");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

/// Per predicted line: dwell time and mean filtered x velocity.
inline std::vector<LineStat> line_stats(const TrackResult& result, double delta_t) {
  std::vector<LineStat> stats;
  const std::size_t n = std::min(result.estimates.size(), result.predicted_lines.size());
  for (std::size_t i = 0; i < n; ++i) {
    const int line = result.predicted_lines[i];
    if (stats.empty() || stats.back().line != line) stats.push_back(LineStat{line, 0.0, 0.0, 0});
    auto& st = stats.back();
    st.mean_x_velocity += result.estimates[i].x_dot;
    ++st.sample_count;
  }
  for (auto& st : stats) {
    st.dwell_seconds = static_cast<double>(st.sample_count) * delta_t;
    st.mean_x_velocity /= static_cast<double>(st.sample_count);
  }
  return stats;
}

inline TrackResult track_page(const PageTrace& trace, const ModelConfig& config,
                              FilterKind kind = FilterKind::kSlip) {
  config.validate();
  const auto& samples = trace.samples;
  if (samples.size() < 3) {
    throw Error(ErrorKind::kInvalidInput, "trace too short (" + std::to_string(samples.size()) +
                                              " samples, need at least 3)");
  }
  validate_trace(trace, config.delta_t);

  const ProcessModel process = build_process_model(config);
  const MeasurementModel meas = build_measurement_model(config);

  TrackResult result;
  result.estimates.reserve(samples.size());
  result.nis_series.reserve(samples.size());

  FilterState state = two_point_init(samples[0], samples[1], config.delta_t, config.gamma);
  // No filter estimate exists for the first sample; report it at its
  // measured position with the two-point velocities.
  result.estimates.push_back({samples[0].z_x, state.x_hat(idx::kXDot), samples[0].z_y, state.x_hat(idx::kYDot)});
  result.estimates.push_back(state.estimate());
  result.nis_series.assign(2, std::nullopt);

  for (std::size_t i = 2; i < samples.size(); ++i) {
    StepOutput out;
    try {
      out = kind == FilterKind::kSlip ? slip_kf_step(state, samples[i], process, meas, config)
                                      : kf_step(state, samples[i], process, meas);
    } catch (const Error& e) {
      throw e.annotated("sample " + std::to_string(i));
    }
    state = out.state;
    result.estimates.push_back(state.estimate());
    result.nis_series.push_back(out.innovation ? std::optional<double>(out.innovation->nis) : std::nullopt);
    if (out.reset) result.reset_indices.push_back(i);
  }

  result.predicted_lines = assign_lines(result.reset_indices, samples.size());
  if (trace.labels) {
    result.accuracy = line_detection_accuracy(result.predicted_lines, *trace.labels);
    const int max_pred = result.predicted_lines.back();
    const int max_truth = *std::max_element(trace.labels->begin(), trace.labels->end());
    if (max_pred != max_truth) {
      result.warnings.push_back("predicted " + std::to_string(max_pred) + " lines but labels contain " +
                                std::to_string(max_truth));
    }
  }
  result.line_stats = line_stats(result, config.delta_t);
  return result;
}

}  // namespace slipkf
