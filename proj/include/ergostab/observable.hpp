#pragma once

#include <complex>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "ergostab/phase_space.hpp"

namespace ergostab {

using Complex = std::complex<double>;

/// H(p, q) = kinetic * p^2 / 2 + potential * cos(2 pi q) + offset.
struct Hamiltonian {
  double kinetic = 1.0;
  double potential = 0.0;
  double offset = 0.0;

  double operator()(const PhasePoint& x) const;
  friend bool operator==(const Hamiltonian&, const Hamiltonian&) = default;
};

/// f(h) = exp(-beta h).
struct ExpWeight {
  double beta = 1.0;
  friend bool operator==(const ExpWeight&, const ExpWeight&) = default;
};

/// f(h) = sum_k c_k h^k.
struct Polynomial {
  std::vector<double> coefficients;
  friend bool operator==(const Polynomial&, const Polynomial&) = default;
};

using ScalarFunction = std::variant<ExpWeight, Polynomial>;

double apply(const ScalarFunction& f, double h);

class Observable;

struct IndicatorObs {
  Region region;
};

/// e^{2 pi i (m p + n q)}.
struct FourierModeObs {
  int m = 0;
  int n = 0;
};

/// Truncated series sum c_{mn} e^{2 pi i (m p + n q)} over |m|,|n| <= cutoff.
/// Coefficients are stored with m fastest: index (m + c) + (2c + 1)(n + c).
struct FourierSeriesObs {
  int cutoff = 0;
  std::vector<Complex> coefficients;
};

/// Piecewise constant on the cells of a partition; zero on the overflow cell.
struct GridFunctionObs {
  std::shared_ptr<const GridPartition> partition;
  std::vector<Complex> values;
};

/// f(H(x)).
struct HamiltonianObs {
  Hamiltonian h;
  ScalarFunction f;
};

struct CombinationObs {
  std::vector<std::pair<Complex, std::shared_ptr<const Observable>>> terms;
};

/// A square-integrable function on phase space. Evaluation is pure.
class Observable {
 public:
  using Kind = std::variant<IndicatorObs, FourierModeObs, FourierSeriesObs, GridFunctionObs, HamiltonianObs,
                            CombinationObs>;

  static Observable indicator(Region region);
  static Observable fourier_mode(int m, int n);
  static Observable fourier_series(int cutoff, std::vector<Complex> coefficients);
  static Observable grid_function(const GridPartition& partition, std::vector<Complex> values);
  static Observable hamiltonian(Hamiltonian h, ScalarFunction f);
  /// sum_i coef_i * obs_i.
  static Observable combination(std::vector<std::pair<Complex, Observable>> terms);
  /// psi == 1.
  static Observable constant_one() { return fourier_mode(0, 0); }

  Complex operator()(const PhasePoint& x) const { return scale_ * evaluate_unscaled(x); }

  const Kind& kind() const noexcept { return *kind_; }
  Complex scale() const noexcept { return scale_; }
  Observable scaled(Complex factor) const;

  /// Copy rescaled to unit norm under the discrete midpoint inner product of
  /// `grid`. Throws DomainError for a zero observable.
  Observable normalized(const GridPartition& grid) const;
  bool is_normalized() const noexcept { return normalized_; }

  std::string describe() const;

 private:
  explicit Observable(Kind kind);
  Complex evaluate_unscaled(const PhasePoint& x) const;

  std::shared_ptr<const Kind> kind_;
  // real/even Fourier series evaluate through a cosine table
  std::shared_ptr<const std::vector<double>> cosine_table_;
  Complex scale_{1.0, 0.0};
  bool normalized_ = false;
};

/// A test pair (phi, psi) for matrix elements <phi|A psi>.
struct ProbePair {
  Observable phi;
  Observable psi;
};

/// Midpoint-rule <phi|psi> = sum_cells conj(phi(c)) psi(c) vol(c) on `grid`.
Complex grid_inner_product(const Observable& phi, const Observable& psi, const GridPartition& grid);

/// ||psi|| under the same rule.
double grid_norm(const Observable& psi, const GridPartition& grid);

}  // namespace ergostab
