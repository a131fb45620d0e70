#pragma once

#include <string>
#include <variant>
#include <vector>

#include "lrcs/types.hpp"

namespace lrcs {

/// Voltage phasor channel at a bus.
struct VoltageChannel {
  int bus = 0;  // 0-based
};

/// Current phasor channel on the line from one bus to another, metered at the
/// sending end.
struct CurrentChannel {
  int from = 0;
  int to = 0;
};

using Channel = std::variant<VoltageChannel, CurrentChannel>;

/// Transmission line on the pi model: series impedance z, total shunt
/// admittance y (y/2 at each end).
struct Line {
  int i = 0;
  int j = 0;
  Complex z{0.0, 0.0};
  Complex y{0.0, 0.0};
};

/// Bus/line/channel description of the metered network.
struct GridTopology {
  int n_buses = 0;
  std::vector<Line> lines;
  std::vector<Channel> channels;

  /// Throws InvalidSize / ZeroImpedanceLine on malformed input.
  void validate() const;

  /// Line between buses a and b, or nullptr.
  const Line* find_line(int a, int b) const;
};

/// Channel-to-state linear map. Rows are channels, columns are buses.
/// w_bar holds the raw physical coefficients; w is w_bar with each nonzero
/// column scaled to unit norm. Zero columns (buses no channel touches) are
/// kept in place and listed in unobserved_buses.
struct TransformMatrix {
  CMat w_bar;
  CMat w;
  RVec column_norms;
  std::vector<int> unobserved_buses;

  Eigen::Index p() const { return w.rows(); }
  Eigen::Index n() const { return w.cols(); }

  static TransformMatrix from_w_bar(CMat w_bar);
};

/// Build the channel/state map from a topology: a voltage channel at bus j
/// contributes 1 in column j; a current channel from i to j contributes
/// 1/z + y/2 in column i and -1/z in column j.
TransformMatrix build_transform(const GridTopology& topo);

/// Fully connected odd-to-even network with a PMU at each odd bus metering its
/// voltage and every incident current, unit impedances, no shunts. n even,
/// n >= 4. Channel order: for each odd bus, voltage first, then currents to
/// even buses in ascending order.
GridTopology ring_network_topology(int n);

/// Transform of ring_network_topology(n): (n^2/4 + n/2) x n with unit columns.
TransformMatrix build_ring_network(int n);

/// Measurements of a state trajectory: rows of X are per-instant bus voltage
/// states, result rows are the corresponding channel readings, X * w_bar^T.
CMat relate_states_to_measurements(const CMat& X, const TransformMatrix& tm);

}  // namespace lrcs
