#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ergostab/maps.hpp"
#include "ergostab/observable.hpp"
#include "ergostab/parallel.hpp"
#include "ergostab/phase_space.hpp"

namespace ergostab {

/// Modes e^{2 pi i (m p + n q)} with |m|, |n| <= cutoff on the 2-torus,
/// indexed m fastest: (m + c) + (2c + 1)(n + c).
struct FourierBasis {
  int cutoff = 0;

  std::size_t size() const noexcept { return static_cast<std::size_t>((2 * cutoff + 1) * (2 * cutoff + 1)); }
  std::size_t index(int m, int n) const noexcept {
    return static_cast<std::size_t>((m + cutoff) + (2 * cutoff + 1) * (n + cutoff));
  }
  std::pair<int, int> mode(std::size_t i) const noexcept {
    const int side = 2 * cutoff + 1;
    return {static_cast<int>(i) % side - cutoff, static_cast<int>(i) / side - cutoff};
  }
  bool contains(int m, int n) const noexcept { return std::abs(m) <= cutoff && std::abs(n) <= cutoff; }
};

/// Cell indicators of a partition. When the partition has an overflow cell
/// it becomes the last, absorbing state.
struct UlamBasis {
  std::shared_ptr<const GridPartition> partition;

  std::size_t size() const noexcept {
    return partition->cell_count() + (partition->has_overflow() ? 1 : 0);
  }
};

/// Plain C^n with the Euclidean inner product.
struct GenericBasis {
  std::size_t dimension = 0;
  std::size_t size() const noexcept { return dimension; }
};

using Basis = std::variant<FourierBasis, UlamBasis, GenericBasis>;

std::size_t basis_size(const Basis& basis);
bool same_basis(const Basis& a, const Basis& b);
std::string describe_basis(const Basis& basis);

/// <a|b> in the basis: Euclidean for Fourier and generic bases, weighted by
/// cell volume for Ulam bases (the overflow state has weight 0).
Complex basis_inner(const Basis& basis, const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);
double basis_norm(const Basis& basis, const Eigen::VectorXcd& a);

/// Square matrix stored as a diagonal, a dense real or a dense complex matrix.
class BasisMatrix {
 public:
  using Storage = std::variant<Eigen::VectorXcd, Eigen::MatrixXd, Eigen::MatrixXcd>;

  BasisMatrix() = default;
  static BasisMatrix diagonal(Eigen::VectorXcd d) { return BasisMatrix(Storage(std::in_place_index<0>, std::move(d))); }
  static BasisMatrix real(Eigen::MatrixXd m);
  static BasisMatrix complex(Eigen::MatrixXcd m);
  static BasisMatrix identity(std::size_t n);

  std::size_t dimension() const noexcept;
  bool is_diagonal() const noexcept { return storage_.index() == 0; }
  bool is_real_dense() const noexcept { return storage_.index() == 1; }
  const Eigen::VectorXcd& diagonal_entries() const { return std::get<0>(storage_); }
  const Eigen::MatrixXd& real_matrix() const { return std::get<1>(storage_); }
  const Storage& storage() const noexcept { return storage_; }

  Complex entry(std::size_t row, std::size_t col) const;
  Eigen::MatrixXcd to_dense() const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;

  friend BasisMatrix operator*(const BasisMatrix& a, const BasisMatrix& b);
  friend BasisMatrix operator-(const BasisMatrix& a, const BasisMatrix& b);

  double frobenius_norm() const;

 private:
  explicit BasisMatrix(Storage s) : storage_(std::move(s)) {}
  Storage storage_;
};

/// ||a - b||_F.
double frobenius_distance(const BasisMatrix& a, const BasisMatrix& b);

/// Matrix of U acting on coefficient vectors: (U psi)(x) = psi(T x).
struct KoopmanOperator {
  Basis basis;
  BasisMatrix matrix;
  std::string provenance;

  std::size_t dimension() const { return matrix.dimension(); }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return matrix.apply(v); }
};

/// Operator from a raw matrix in a generic basis.
KoopmanOperator generic_operator(BasisMatrix matrix, std::string provenance = "generic");

enum class ProjectorConstruction { analytic_fourier, cesaro };

struct InvariantProjector {
  Basis basis;
  BasisMatrix matrix;
  ProjectorConstruction construction = ProjectorConstruction::analytic_fourier;
  /// Cesaro parameters: powers averaged, requested tolerance and the
  /// achieved ||A_N U - A_N||_F before symmetrization.
  std::uint64_t iterations = 0;
  double tolerance = 0.0;
  double cesaro_residual = 0.0;
  bool converged = true;
  /// Weights of the inner product in which the matrix is self-adjoint
  /// (normalized to mean 1). Empty means the Euclidean one.
  Eigen::VectorXd weights;

  std::size_t dimension() const { return matrix.dimension(); }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return matrix.apply(v); }
};

/// ||P^2 - P||_F.
double idempotency_residual(const InvariantProjector& p);
/// ||P U - P||_F.
double invariance_residual(const InvariantProjector& p, const KoopmanOperator& u);
/// ||U P - P||_F.
double left_invariance_residual(const InvariantProjector& p, const KoopmanOperator& u);
/// ||H - H^dagger||_F with H = D P D^{-1}, D = diag(sqrt(weights)).
double hermiticity_residual(const InvariantProjector& p);

/// A rotation number: either a declared irrational or an exact rational N/D.
struct Irrational {
  double value = 0.0;
};
using RotationNumber = std::variant<Irrational, RationalApproximant>;

/// Rational N/D reduced to lowest terms. InvalidInput for D <= 0.
RationalApproximant rational(std::int64_t numerator, std::int64_t denominator);

/// Diagonal U with entries e^{2 pi i (m alpha + n beta)}.
KoopmanOperator fourier_koopman_rotation(double alpha, double beta, int cutoff);
/// Same with exact integer phases for a rational alpha.
KoopmanOperator fourier_koopman_rotation(const RotationNumber& alpha, double beta, int cutoff);

/// 0/1 diagonal projector keeping the modes with m alpha + n beta integral,
/// beta declared irrational: only (0,0) for irrational alpha, (m,0) with D | m
/// for alpha = N/D.
InvariantProjector fourier_projector_rotation(const RotationNumber& alpha, double beta, int cutoff);

/// U_ij = fraction of the samples of cell i whose image lies in cell j.
/// Samples are uniform in each cell, drawn from stream (seed, i).
KoopmanOperator ulam_matrix(const MapDef& map, const GridPartition& partition, std::size_t samples_per_cell,
                            std::uint64_t seed, Parallelism par = {});

enum class Symmetrization {
  /// Stationary-measure weights for Ulam bases, Euclidean otherwise.
  automatic,
  euclidean,
  stationary,
};

struct CesaroOptions {
  std::uint64_t max_iterations = std::uint64_t{1} << 30;
  double tolerance = 1e-6;
  Symmetrization symmetrization = Symmetrization::automatic;
  /// Re-idempotization steps P <- 3P^2 - 2P^3 stop once ||P^2 - P||_F falls
  /// below this or after `max_idempotize_steps`.
  double idempotency_target = 1e-12;
  int max_idempotize_steps = 30;
};

/// A_N = (1/N) sum_{n<N} U^n with N doubling from 1 until
/// ||A_N U - A_N||_F <= tolerance or N would exceed max_iterations; then
/// (A + A^dagger)/2 and re-idempotization. The adjoint is taken in the
/// weighted inner product selected by `symmetrization`.
InvariantProjector cesaro_projector(const KoopmanOperator& u, const CesaroOptions& options = {});

/// Coefficients of psi in the basis. Fourier: exact for modes, series, boxes
/// and disks, separable quadrature otherwise. Ulam: cell averages (exact for
/// grid functions on the same partition). BasisMismatch for generic bases.
Eigen::VectorXcd to_basis(const Observable& psi, const Basis& basis);
/// The observable with these coefficients.
Observable from_basis(const Eigen::VectorXcd& coefficients, const Basis& basis);

/// P psi as an observable. BasisMismatch when psi cannot be expressed in P's basis.
Observable apply_projector(const InvariantProjector& p, const Observable& psi);

/// Smoothly weighted real test functions: psi_s with coefficients
/// proportional to 1/(1 + m^2 + n^2) for |m|,|n| <= cutoff, and psi_s
/// translated by (1/2, 1/2). Both have unit norm. Pairs (psi_s, psi_s) and
/// (psi_s, translated).
std::vector<ProbePair> default_probe_set(int cutoff = 8);

struct OperatorDistance {
  /// max over pairs |<phi|(U1 - U2) psi>|.
  double weak = 0.0;
  /// max over pairs ||(U1 - U2) psi||.
  double strong = 0.0;
};

OperatorDistance weak_distance(const KoopmanOperator& u1, const KoopmanOperator& u2,
                               const std::vector<ProbePair>& probes);

/// |<phi|(P_eps - P) psi>|. A phi whose basis norm differs from 1 by more
/// than 1e-10 triggers a warning and is normalized internally.
double eta(const Observable& phi, const Observable& psi, const InvariantProjector& p_eps,
           const InvariantProjector& p);
/// Maximum of eta over the probe pairs.
double eta(const std::vector<ProbePair>& probes, const InvariantProjector& p_eps, const InvariantProjector& p);

struct CoboundaryResult {
  Eigen::VectorXcd chi;
  double residual = 0.0;
  double ridge = 0.0;
  double delta = 0.0;
  /// Smallest |lambda - 1| over non-invariant diagonal entries (diagonal U only).
  double smallest_divisor = 0.0;
  bool success = false;
};

/// Ridge least squares chi = (A^H A + r^2 I)^{-1} A^H b with A = U - I,
/// b = psi_c and r = 1e-10 ||U - I||_F. Requires ||P psi_c|| <= 1e-8 when a
/// projector is supplied (diagonal U: modes with lambda == 1 are checked
/// without one); DomainError otherwise. success iff residual <= delta / 2.
CoboundaryResult coboundary_solve(const Observable& psi_c, const KoopmanOperator& u, double delta,
                                  const InvariantProjector* invariant = nullptr);
CoboundaryResult coboundary_solve(const Eigen::VectorXcd& psi_c, const KoopmanOperator& u, double delta,
                                  const InvariantProjector* invariant = nullptr);

/// H, H_eps and f for J_eps(x) = f(H(x)) / f(H_eps(x)).
struct HamiltonianPerturbation {
  Hamiltonian h;
  Hamiltonian h_eps;
  ScalarFunction f = ExpWeight{};

  /// H_eps = H + eps.
  static HamiltonianPerturbation additive(Hamiltonian h, double eps, ScalarFunction f = ExpWeight{});

  /// J_eps(x); DomainError naming x when f(H_eps(x)) <= 0 or f(H(x)) <= 0.
  double ratio(const PhasePoint& x) const;
};

/// sup over the sample of |J_eps(x) - 1|.
double hamiltonian_ratio_bound(const HamiltonianPerturbation& pert, const EnsembleSpec& sample);

/// L_{eps,k}(x) = J_eps(T^k x) / J_eps(x).
double transport_ratio(const HamiltonianPerturbation& pert, const MapDef& map, const PhasePoint& x, std::uint64_t k);

/// Text dump: a "# basis=..." comment line, then "row,col,re,im" and one line
/// per non-zero entry with 17 significant digits.
void write_dump(std::ostream& os, const Basis& basis, const BasisMatrix& matrix);

}  // namespace ergostab
