#pragma once

// Command implementations behind the `slipkf` executable. Each command
// returns a process exit code and writes diagnostics to `err`.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "slipkf/errors.hpp"
#include "slipkf/io.hpp"
#include "slipkf/model.hpp"
#include "slipkf/simulate.hpp"
#include "slipkf/tracker.hpp"

namespace slipkf::cli {

enum class OutputFormat { kCsv, kJson };

struct RunConfig {
  ModelConfig model;
  ScreenGeometry screen;
  std::string input;
  std::string output;
  FilterKind filter = FilterKind::kSlip;
  OutputFormat format = OutputFormat::kCsv;

  void validate() const {
    model.validate();
    screen.validate();
  }
};

inline FilterKind parse_filter_kind(const std::string& s) {
  if (s == "slip") return FilterKind::kSlip;
  if (s == "regular") return FilterKind::kRegular;
  throw Error(ErrorKind::kInvalidConfig, "filter must be 'regular' or 'slip', got '" + s + "'");
}

inline OutputFormat parse_output_format(const std::string& s) {
  if (s == "csv") return OutputFormat::kCsv;
  if (s == "json") return OutputFormat::kJson;
  throw Error(ErrorKind::kInvalidConfig, "format must be 'csv' or 'json', got '" + s + "'");
}

namespace detail {

template <typename T>
void read_key(const nlohmann::json& doc, const char* key, T& target) {
  if (!doc.contains(key)) return;
  try {
    target = doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidConfig, std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace detail

/// Applies the keys of a flat JSON document onto `run` and `sim`; keys not
/// present keep their current values.
inline void apply_config_json(const nlohmann::json& doc, RunConfig& run, SimConfig& sim) {
  using detail::read_key;
  if (!doc.is_object()) throw Error(ErrorKind::kInvalidConfig, "config must be a JSON object");

  read_key(doc, "delta_t", run.model.delta_t);
  read_key(doc, "q_x", run.model.q_x);
  read_key(doc, "q_y", run.model.q_y);
  read_key(doc, "sigma_x", run.model.sigma_x);
  read_key(doc, "sigma_y", run.model.sigma_y);
  read_key(doc, "gamma", run.model.gamma);
  read_key(doc, "slip_threshold", run.model.slip_threshold);
  read_key(doc, "reinit_x_velocity", run.model.reinit_x_velocity);
  read_key(doc, "refractory_samples", run.model.refractory_samples);

  read_key(doc, "screen_width", run.screen.width_px);
  read_key(doc, "screen_height", run.screen.height_px);
  read_key(doc, "text_left", run.screen.text.left);
  read_key(doc, "text_top", run.screen.text.top);
  read_key(doc, "text_width", run.screen.text.width);
  read_key(doc, "text_height", run.screen.text.height);

  read_key(doc, "input", run.input);
  read_key(doc, "output", run.output);
  std::string text;
  if (doc.contains("filter")) {
    read_key(doc, "filter", text);
    run.filter = parse_filter_kind(text);
  }
  if (doc.contains("format")) {
    read_key(doc, "format", text);
    run.format = parse_output_format(text);
  }

  read_key(doc, "n_lines", sim.n_lines);
  read_key(doc, "seconds_per_line", sim.seconds_per_line);
  read_key(doc, "line_time_jitter", sim.line_time_jitter);
  read_key(doc, "saccades_per_line", sim.saccades_per_line);
  read_key(doc, "fixation_noise", sim.fixation_noise);
  read_key(doc, "sim_sigma_x", sim.sigma_x);
  read_key(doc, "sim_sigma_y", sim.sigma_y);
  read_key(doc, "return_duration", sim.return_duration);
  read_key(doc, "margin", sim.margin);
  read_key(doc, "seed", sim.seed);
  // The simulator samples at the model's rate.
  sim.delta_t = run.model.delta_t;
}

inline void load_config_file(const std::string& path, RunConfig& run, SimConfig& sim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kInvalidConfig, "cannot open config " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidConfig, "config " + path + ": " + e.what());
  }
  apply_config_json(doc, run, sim);
}

inline nlohmann::json line_stats_json(const std::vector<LineStat>& stats) {
  auto arr = nlohmann::json::array();
  for (const auto& st : stats) {
    nlohmann::json row = {{"line", st.line},
                          {"dwell_seconds", st.dwell_seconds},
                          {"mean_x_velocity", st.mean_x_velocity},
                          {"sample_count", st.sample_count}};
    if (const auto implied = st.implied_seconds_per_line()) row["implied_seconds_per_line"] = *implied;
    else row["implied_seconds_per_line"] = nullptr;
    arr.push_back(std::move(row));
  }
  return arr;
}

inline nlohmann::json summary_json(const PageTrace& trace, const TrackResult& result) {
  nlohmann::json doc = {{"page_id", trace.page_id},
                        {"n_samples", trace.samples.size()},
                        {"n_resets", result.reset_indices.size()},
                        {"reset_indices", result.reset_indices},
                        {"line_stats", line_stats_json(result.line_stats)},
                        {"warnings", result.warnings}};
  doc["accuracy"] = result.accuracy ? nlohmann::json(*result.accuracy) : nlohmann::json(nullptr);
  return doc;
}

/// Per-sample rows: t, z_x, z_y, estimates, nis, reset flag, predicted line
/// and truth line when labels exist.
inline void write_track_csv(std::ostream& out, const PageTrace& trace, const TrackResult& result) {
  const bool labeled = trace.labels.has_value();
  out << "t,z_x,z_y,x_hat,x_dot_hat,y_hat,y_dot_hat,nis,reset,predicted_line" << (labeled ? ",truth_line" : "")
      << '\n';
  std::size_t next_reset = 0;
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const auto& s = trace.samples[i];
    const auto& e = result.estimates[i];
    const bool reset = next_reset < result.reset_indices.size() && result.reset_indices[next_reset] == i;
    if (reset) ++next_reset;
    out << format_double(s.t) << ',' << format_double(s.z_x) << ',' << format_double(s.z_y) << ','
        << format_double(e.x) << ',' << format_double(e.x_dot) << ',' << format_double(e.y) << ','
        << format_double(e.y_dot) << ',' << (result.nis_series[i] ? format_double(*result.nis_series[i]) : "")
        << ',' << (reset ? 1 : 0) << ',' << result.predicted_lines[i];
    if (labeled) out << ',' << (*trace.labels)[i];
    out << '\n';
  }
}

inline nlohmann::json track_json(const PageTrace& trace, const TrackResult& result) {
  auto samples = nlohmann::json::array();
  std::size_t next_reset = 0;
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const auto& s = trace.samples[i];
    const auto& e = result.estimates[i];
    const bool reset = next_reset < result.reset_indices.size() && result.reset_indices[next_reset] == i;
    if (reset) ++next_reset;
    nlohmann::json row = {{"t", s.t},         {"z_x", s.z_x},         {"z_y", s.z_y},
                          {"x_hat", e.x},     {"x_dot_hat", e.x_dot}, {"y_hat", e.y},
                          {"y_dot_hat", e.y_dot}, {"reset", reset},   {"predicted_line", result.predicted_lines[i]}};
    row["nis"] = result.nis_series[i] ? nlohmann::json(*result.nis_series[i]) : nlohmann::json(nullptr);
    if (trace.labels) row["truth_line"] = (*trace.labels)[i];
    samples.push_back(std::move(row));
  }
  return {{"summary", summary_json(trace, result)}, {"samples", std::move(samples)}};
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kFormat, "cannot write " + path.string());
  return out;
}

inline std::filesystem::path summary_path(const std::filesystem::path& output) {
  auto p = output;
  p.replace_extension();
  p += ".summary.json";
  return p;
}

}  // namespace detail

/// Tracks one page. CSV output goes to `output` with the summary alongside
/// as `<stem>.summary.json`; JSON output holds both in one document. An
/// empty `output` prints to `out`.
inline int cmd_track(const RunConfig& run, std::ostream& out, std::ostream& err) {
  try {
    run.validate();
    if (run.input.empty()) throw Error(ErrorKind::kInvalidInput, "no input file given");
    const ParsedTrace parsed = parse_gaze_csv(run.input, run.screen);
    if (parsed.dropped_rows > 0) err << "warning: dropped " << parsed.dropped_rows << " non-finite rows\n";
    const TrackResult result = track_page(parsed.trace, run.model, run.filter);
    for (const auto& w : result.warnings) err << "warning: " << w << '\n';

    if (run.format == OutputFormat::kJson) {
      const std::string text = track_json(parsed.trace, result).dump(2) + "\n";
      if (run.output.empty()) out << text;
      else detail::open_output(run.output) << text;
    } else if (run.output.empty()) {
      write_track_csv(out, parsed.trace, result);
    } else {
      auto file = detail::open_output(run.output);
      write_track_csv(file, parsed.trace, result);
      detail::open_output(detail::summary_path(run.output)) << summary_json(parsed.trace, result).dump(2) << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

/// Per-page seed derived from the corpus master seed (splitmix64 step).
inline std::uint64_t page_seed(std::uint64_t master, std::size_t page) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(page) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::string page_file_name(std::size_t page) {
  std::ostringstream name;
  name << "page_";
  name.width(3);
  name.fill('0');
  name << page + 1 << ".csv";
  return name.str();
}

/// Writes `pages` labeled reading traces to `out_dir` as page_001.csv, ...
inline int cmd_simulate(const SimConfig& sim, const ScreenGeometry& screen, std::size_t pages,
                        const std::string& out_dir, std::ostream& err) {
  try {
    sim.validate();
    screen.validate();
    if (pages == 0) throw Error(ErrorKind::kInvalidConfig, "pages must be >= 1");
    if (out_dir.empty()) throw Error(ErrorKind::kInvalidInput, "no output directory given");
    std::filesystem::create_directories(out_dir);
    for (std::size_t p = 0; p < pages; ++p) {
      SimConfig page_cfg = sim;
      page_cfg.seed = page_seed(sim.seed, p);
      page_cfg.mode = SimMode::kReading;
      SimulatedPage page = simulate_reading(page_cfg);
      auto file = detail::open_output(std::filesystem::path(out_dir) / page_file_name(p));
      write_gaze_csv(file, page.trace, screen);
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

struct PageEvaluation {
  std::string page_id;
  std::size_t n_samples = 0;
  std::size_t n_resets = 0;
  std::optional<double> accuracy;
};

/// Tracks every *.csv in `run.input` (a directory), in filename order.
/// Writes `evaluation.csv` or `evaluation.json` to `run.output` plus
/// `<page>_series.csv` velocity/NIS series for plotting. Unreadable pages are
/// reported and skipped; fails only when no page succeeds.
inline int cmd_evaluate(const RunConfig& run, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  try {
    run.validate();
    if (run.input.empty() || !fs::is_directory(run.input)) {
      throw Error(ErrorKind::kInvalidInput, "corpus directory not found: " + run.input);
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(run.input)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    const fs::path out_dir = run.output.empty() ? fs::path(".") : fs::path(run.output);
    std::vector<PageEvaluation> rows;
    for (const auto& file : files) {
      try {
        const ParsedTrace parsed = parse_gaze_csv(file.string(), run.screen);
        const TrackResult result = track_page(parsed.trace, run.model, run.filter);
        rows.push_back({parsed.trace.page_id, parsed.trace.samples.size(), result.reset_indices.size(),
                        result.accuracy});

        auto series = detail::open_output(out_dir / (parsed.trace.page_id + "_series.csv"));
        series << "t,x_dot_hat,nis,reset\n";
        std::size_t next_reset = 0;
        for (std::size_t i = 0; i < parsed.trace.samples.size(); ++i) {
          const bool reset = next_reset < result.reset_indices.size() && result.reset_indices[next_reset] == i;
          if (reset) ++next_reset;
          series << format_double(parsed.trace.samples[i].t) << ',' << format_double(result.estimates[i].x_dot)
                 << ',' << (result.nis_series[i] ? format_double(*result.nis_series[i]) : "") << ','
                 << (reset ? 1 : 0) << '\n';
        }
      } catch (const std::exception& e) {
        err << "warning: skipping " << file.filename().string() << ": " << e.what() << '\n';
      }
    }
    if (rows.empty()) throw Error(ErrorKind::kInvalidInput, "no page in " + run.input + " could be evaluated");

    double sum = 0.0;
    std::size_t scored = 0;
    for (const auto& r : rows) {
      if (r.accuracy) {
        sum += *r.accuracy;
        ++scored;
      }
    }
    const std::optional<double> mean = scored > 0 ? std::optional<double>(sum / static_cast<double>(scored))
                                                  : std::nullopt;

    if (run.format == OutputFormat::kJson) {
      auto pages = nlohmann::json::array();
      for (const auto& r : rows) {
        pages.push_back({{"page_id", r.page_id},
                         {"n_samples", r.n_samples},
                         {"n_resets", r.n_resets},
                         {"accuracy", r.accuracy ? nlohmann::json(*r.accuracy) : nlohmann::json(nullptr)}});
      }
      nlohmann::json doc = {{"pages", std::move(pages)},
                            {"mean_accuracy", mean ? nlohmann::json(*mean) : nlohmann::json(nullptr)}};
      detail::open_output(out_dir / "evaluation.json") << doc.dump(2) << '\n';
    } else {
      auto table = detail::open_output(out_dir / "evaluation.csv");
      table << "page_id,n_samples,n_resets,accuracy\n";
      for (const auto& r : rows) {
        table << r.page_id << ',' << r.n_samples << ',' << r.n_resets << ','
              << (r.accuracy ? format_double(*r.accuracy) : "") << '\n';
      }
      table << "mean,,," << (mean ? format_double(*mean) : "") << '\n';
    }
    out << "pages evaluated: " << rows.size() << " of " << files.size() << '\n';
    if (mean) out << "mean accuracy: " << *mean << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace slipkf::cli
