#pragma once

#include <cmath>
#include <random>

#include "covq/fock.hpp"
#include "covq/oracle.hpp"

namespace testing {

inline double max_abs_diff(const covq::MatrixXc& a, const covq::MatrixXc& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline covq::State diagonal_state(const std::vector<double>& p) {
  covq::MatrixXc m = covq::MatrixXc::Zero(static_cast<int>(p.size()), static_cast<int>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = p[i];
  return covq::State(m, {static_cast<int>(p.size())});
}

inline covq::State relabel(const covq::State& s, std::vector<int> dims) { return covq::State(s.matrix(), std::move(dims)); }

}  // namespace testing
