#pragma once

#include "sweep/core.hpp"

#include <optional>
#include <vector>

namespace sweep {

/// Uniform grid t_j = j/N on the fixed horizon [0, 1].
struct Grid {
  int N = 0;

  explicit Grid(int intervals = 1) : N(intervals) {
    if (N < 1) throw InvalidArgumentError("grid needs at least one interval");
  }
  double dt() const { return 1.0 / N; }
  double t(int j) const { return j == N ? 1.0 : static_cast<double>(j) / N; }
  int nodes() const { return N + 1; }
};

/// Piecewise-constant control, value `values[j]` on [t_j, t_{j+1}).
struct ControlSignal {
  Grid grid;
  std::vector<Vec> values;

  ControlSignal() = default;
  ControlSignal(Grid g, std::vector<Vec> v) : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.N)
      throw DimensionMismatchError("control signal needs one value per interval");
    for (const auto& u : values) {
      if (u.size() != values.front().size()) throw DimensionMismatchError("control dimensions differ");
      if (!u.allFinite()) throw InvalidArgumentError("control signal has non-finite entries");
    }
  }

  static ControlSignal constant(Grid g, const Vec& u) {
    return ControlSignal(g, std::vector<Vec>(static_cast<std::size_t>(g.N), u));
  }

  int dim() const { return values.empty() ? 0 : static_cast<int>(values.front().size()); }
};

struct StateTrajectory {
  Grid grid;
  std::vector<Vec> states;    // N + 1 nodes
  std::vector<Vec> controls;  // N intervals
  std::optional<std::vector<double>> slacks;  // N intervals, complementarity route only

  int state_dim() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
  int control_dim() const { return controls.empty() ? 0 : static_cast<int>(controls.front().size()); }

  ControlSignal control_signal() const { return ControlSignal(grid, controls); }

  void validate() const {
    require_dim(static_cast<Eigen::Index>(states.size()), grid.N + 1, "trajectory states");
    require_dim(static_cast<Eigen::Index>(controls.size()), grid.N, "trajectory controls");
    if (slacks) require_dim(static_cast<Eigen::Index>(slacks->size()), grid.N, "trajectory slacks");
  }
};

/// Sup-norm distance between two trajectories sampled on the same grid.
inline double sup_gap(const StateTrajectory& a, const StateTrajectory& b) {
  require_dim(static_cast<Eigen::Index>(a.states.size()), static_cast<Eigen::Index>(b.states.size()),
              "sup_gap");
  double gap = 0.0;
  for (std::size_t j = 0; j < a.states.size(); ++j) gap = std::max(gap, (a.states[j] - b.states[j]).norm());
  return gap;
}

}  // namespace sweep
