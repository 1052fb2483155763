// Simulates one 25-line page and compares the regular and slip filters.

#include <cstdio>

#include "slipkf/slipkf.hpp"

int main() {
  slipkf::SimConfig sim;
  sim.seed = 42;
  const slipkf::SimulatedPage page = slipkf::simulate_reading(sim);

  const slipkf::ModelConfig model;
  const auto slip = slipkf::track_page(page.trace, model, slipkf::FilterKind::kSlip);
  const auto regular = slipkf::track_page(page.trace, model, slipkf::FilterKind::kRegular);

  std::printf("samples: %zu\n", page.trace.samples.size());
  std::printf("slip resets: %zu, line accuracy: %.4f\n", slip.reset_indices.size(), *slip.accuracy);
  std::printf("regular accuracy (no line changes detected): %.4f\n", *regular.accuracy);
  for (const auto& st : slip.line_stats) {
    const auto implied = st.implied_seconds_per_line();
    std::printf("line %2d  dwell %6.2f s  mean x_dot %+.4f  implied %s%.1f s/line\n", st.line, st.dwell_seconds,
                st.mean_x_velocity, implied ? "" : "n/a ", implied.value_or(0.0));
  }
  return 0;
}
