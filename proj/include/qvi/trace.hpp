#pragma once

#include <vector>

namespace qvi {

/// One record of a convergence trace. `k` is the iteration index for discrete
/// schemes and the time for trajectories; `dist_ref` is -1 when the problem
/// carries no reference solution.
struct TraceRow {
  double k = 0.0;
  double residual = 0.0;
  double dist_ref = -1.0;
  double step_norm = 0.0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct Trace {
  std::vector<TraceRow> rows;

  void push(double k, double residual, double dist_ref, double step_norm) {
    rows.push_back({k, residual, dist_ref, step_norm});
  }
  [[nodiscard]] std::size_t size() const { return rows.size(); }
  [[nodiscard]] bool empty() const { return rows.empty(); }
  [[nodiscard]] const TraceRow& back() const { return rows.back(); }
};

}  // namespace qvi
