#include "boxcert/box.hpp"

#include <algorithm>
#include <sstream>

namespace boxcert {

Box::Box(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) {
    throw GraphError("box: lower and upper have different dimensions");
  }
}

Box Box::point(const Vector& x) { return Box(x, x); }

Box Box::from_pairs(const std::vector<double>& pairs) {
  if (pairs.empty() || pairs.size() % 2 != 0) {
    throw GraphError("box: expected an even, nonzero count of bounds (l0 u0 l1 u1 ...)");
  }
  const auto n = static_cast<Eigen::Index>(pairs.size() / 2);
  Vector lo(n), hi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lo[i] = pairs[static_cast<size_t>(2 * i)];
    hi[i] = pairs[static_cast<size_t>(2 * i + 1)];
  }
  return Box(lo, hi);
}

double Box::max_width() const { return dim() == 0 ? 0.0 : width().maxCoeff(); }

bool Box::contains(const Vector& x, double slack) const {
  if (x.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower[i] - slack && x[i] <= upper[i] + slack)) return false;
  }
  return true;
}

bool Box::contains(const Box& other) const {
  return other.dim() == dim() && (other.lower.array() >= lower.array()).all() &&
         (other.upper.array() <= upper.array()).all();
}

double Box::volume(const Box& reference) const {
  double v = 1.0;
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (reference.upper[i] > reference.lower[i]) v *= upper[i] - lower[i];
  }
  return v;
}

Vector Box::clamp(const Vector& x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

std::pair<Box, Box> Box::bisect(int d) const {
  const double mid = 0.5 * (lower[d] + upper[d]);
  Box left = *this, right = *this;
  left.upper[d] = mid;
  right.lower[d] = mid;
  return {std::move(left), std::move(right)};
}

void check_box(const Box& box, const Graph& graph) {
  if (box.dim() != graph.input_dim()) {
    std::ostringstream os;
    os << "box dimension " << box.dim() << " does not match graph input dimension "
       << graph.input_dim();
    throw GraphError(os.str());
  }
  for (int i = 0; i < box.dim(); ++i) {
    if (!(box.lower[i] <= box.upper[i])) {
      std::ostringstream os;
      os << "box: lower > upper in dimension " << i;
      throw GraphError(os.str());
    }
  }
}

}  // namespace boxcert
