#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ergostab {

/// One row of a result curve. `epsilon_desc` names the parameter value and
/// the quantity, e.g. "D=13" or "coverage@K=0.5".
struct CurveRow {
  std::int64_t epsilon_index = 0;
  std::string epsilon_desc;
  std::uint64_t horizon = 0;
  double value = 0.0;
  double standard_error = 0.0;
  std::string verdict;

  friend bool operator==(const CurveRow&, const CurveRow&) = default;
};

/// Ordered rows with finite values and unique (epsilon_desc, horizon) keys.
class ContinuityCurve {
 public:
  ContinuityCurve() = default;
  explicit ContinuityCurve(std::string name) : name_(std::move(name)) {}

  /// Throws InvalidInput on a non-finite value, negative standard error or
  /// duplicate key.
  void add(CurveRow row);

  const std::string& name() const noexcept { return name_; }
  const std::vector<CurveRow>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  const CurveRow& operator[](std::size_t i) const { return rows_[i]; }

  std::vector<double> values() const;
  /// max_i |v_{i+1} - v_i| over consecutive rows; 0 for fewer than two rows.
  double max_adjacent_jump() const;

  /// Appends all rows of `other`, keeping key uniqueness.
  void append(const ContinuityCurve& other);

 private:
  std::string name_;
  std::vector<CurveRow> rows_;
};

}  // namespace ergostab
