#include "ergostab/curve.hpp"

#include <algorithm>
#include <cmath>

#include "ergostab/errors.hpp"

namespace ergostab {

void ContinuityCurve::add(CurveRow row) {
  if (!std::isfinite(row.value)) throw InvalidInput("curve value must be finite (" + row.epsilon_desc + ")");
  if (!(row.standard_error >= 0.0) || !std::isfinite(row.standard_error)) {
    throw InvalidInput("curve standard error must be finite and >= 0 (" + row.epsilon_desc + ")");
  }
  const bool duplicate = std::any_of(rows_.begin(), rows_.end(), [&](const CurveRow& r) {
    return r.epsilon_desc == row.epsilon_desc && r.horizon == row.horizon;
  });
  if (duplicate) {
    throw InvalidInput("duplicate curve row " + row.epsilon_desc + " at horizon " + std::to_string(row.horizon));
  }
  rows_.push_back(std::move(row));
}

std::vector<double> ContinuityCurve::values() const {
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const CurveRow& r : rows_) out.push_back(r.value);
  return out;
}

double ContinuityCurve::max_adjacent_jump() const {
  double jump = 0.0;
  for (std::size_t i = 1; i < rows_.size(); ++i) jump = std::max(jump, std::abs(rows_[i].value - rows_[i - 1].value));
  return jump;
}

void ContinuityCurve::append(const ContinuityCurve& other) {
  for (const CurveRow& r : other.rows_) add(r);
}

}  // namespace ergostab
