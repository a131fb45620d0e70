#include "lrcs/grid.hpp"

#include <cmath>

#include "lrcs/errors.hpp"

namespace lrcs {

void GridTopology::validate() const {
  if (n_buses <= 0) throw InvalidSize("topology needs at least one bus");
  for (const Line& l : lines) {
    if (l.i < 0 || l.i >= n_buses || l.j < 0 || l.j >= n_buses)
      throw InvalidSize("line endpoint out of range");
    if (l.i == l.j) throw InvalidSize("line connects a bus to itself");
    if (l.z == Complex(0.0, 0.0)) throw ZeroImpedanceLine("line has zero series impedance");
  }
  for (const Channel& ch : channels) {
    if (const auto* v = std::get_if<VoltageChannel>(&ch)) {
      if (v->bus < 0 || v->bus >= n_buses) throw InvalidSize("voltage channel bus out of range");
    } else {
      const auto& c = std::get<CurrentChannel>(ch);
      if (c.from < 0 || c.from >= n_buses || c.to < 0 || c.to >= n_buses)
        throw InvalidSize("current channel bus out of range");
      if (c.from == c.to) throw InvalidSize("current channel needs two distinct buses");
      if (!find_line(c.from, c.to)) throw InvalidSize("current channel has no matching line");
    }
  }
}

const Line* GridTopology::find_line(int a, int b) const {
  for (const Line& l : lines) {
    if ((l.i == a && l.j == b) || (l.i == b && l.j == a)) return &l;
  }
  return nullptr;
}

TransformMatrix TransformMatrix::from_w_bar(CMat w_bar) {
  TransformMatrix tm;
  tm.w_bar = std::move(w_bar);
  tm.w = tm.w_bar;
  tm.column_norms = RVec(tm.w.cols());
  for (Eigen::Index j = 0; j < tm.w.cols(); ++j) {
    const double nrm = tm.w_bar.col(j).norm();
    tm.column_norms(j) = nrm;
    if (nrm > 0.0) {
      tm.w.col(j) /= nrm;
    } else {
      tm.unobserved_buses.push_back(static_cast<int>(j));
    }
  }
  return tm;
}

TransformMatrix build_transform(const GridTopology& topo) {
  topo.validate();
  const Eigen::Index p = static_cast<Eigen::Index>(topo.channels.size());
  const Eigen::Index n = topo.n_buses;
  CMat w_bar = CMat::Zero(p, n);
  for (Eigen::Index k = 0; k < p; ++k) {
    const Channel& ch = topo.channels[static_cast<std::size_t>(k)];
    if (const auto* v = std::get_if<VoltageChannel>(&ch)) {
      w_bar(k, v->bus) = Complex(1.0, 0.0);
    } else {
      const auto& c = std::get<CurrentChannel>(ch);
      const Line* l = topo.find_line(c.from, c.to);
      const Complex inv_z = Complex(1.0, 0.0) / l->z;
      w_bar(k, c.from) = inv_z + l->y * 0.5;
      w_bar(k, c.to) = -inv_z;
    }
  }
  return TransformMatrix::from_w_bar(std::move(w_bar));
}

GridTopology ring_network_topology(int n) {
  if (n < 4 || n % 2 != 0) throw InvalidSize("ring network needs an even bus count >= 4");
  GridTopology topo;
  topo.n_buses = n;
  for (int odd = 0; odd < n; odd += 2) {
    for (int even = 1; even < n; even += 2) {
      topo.lines.push_back(Line{odd, even, Complex(1.0, 0.0), Complex(0.0, 0.0)});
    }
  }
  for (int odd = 0; odd < n; odd += 2) {
    topo.channels.push_back(VoltageChannel{odd});
    for (int even = 1; even < n; even += 2) {
      topo.channels.push_back(CurrentChannel{odd, even});
    }
  }
  return topo;
}

TransformMatrix build_ring_network(int n) { return build_transform(ring_network_topology(n)); }

CMat relate_states_to_measurements(const CMat& X, const TransformMatrix& tm) {
  if (X.cols() != tm.n()) throw ShapeMismatch("state columns must match bus count");
  return X * tm.w_bar.transpose();
}

}  // namespace lrcs
