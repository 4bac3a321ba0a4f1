#include "dispctl/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <stdexcept>

namespace dispctl {

double mass_drift(const Trajectory& traj) {
  double d = 0;
  for (const FourierState& s : traj.states) d = std::max(d, std::abs(s[0] - traj.states.front()[0]));
  return d;
}

double trajectory_distance(const Trajectory& a, const Trajectory& b) {
  if (a.times.size() != b.times.size()) throw std::invalid_argument("trajectories on different time grids");
  double d = 0;
  for (std::size_t j = 0; j < a.times.size(); ++j) {
    if (std::abs(a.times[j] - b.times[j]) > 1e-12 * std::max(1.0, std::abs(a.times[j])))
      throw std::invalid_argument("trajectories on different time grids");
    d = std::max(d, l2_norm(a.states[j] - b.states[j]));
  }
  return d;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  if (traj.states.empty()) return;
  const int nm = traj.states.front().n_max();
  out << "t";
  for (int k = -nm; k <= nm; ++k) out << ",re_" << k << ",im_" << k;
  out << '\n' << std::setprecision(17);
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    out << traj.times[j];
    for (int k = -nm; k <= nm; ++k) out << ',' << traj.states[j][k].real() << ',' << traj.states[j][k].imag();
    out << '\n';
  }
}

}  // namespace dispctl
