#include "ergostab/koopman.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ergostab/errors.hpp"
#include "ergostab/logging.hpp"
#include "ergostab/numeric.hpp"

namespace ergostab {

// ---------------------------------------------------------------------------
// Bases

std::size_t basis_size(const Basis& basis) {
  return std::visit([](const auto& b) { return b.size(); }, basis);
}

bool same_basis(const Basis& a, const Basis& b) {
  if (a.index() != b.index()) return false;
  if (const auto* fa = std::get_if<FourierBasis>(&a)) return fa->cutoff == std::get<FourierBasis>(b).cutoff;
  if (const auto* ua = std::get_if<UlamBasis>(&a)) return *ua->partition == *std::get<UlamBasis>(b).partition;
  return std::get<GenericBasis>(a).dimension == std::get<GenericBasis>(b).dimension;
}

std::string describe_basis(const Basis& basis) {
  if (const auto* f = std::get_if<FourierBasis>(&basis)) return "fourier(cutoff=" + std::to_string(f->cutoff) + ")";
  if (const auto* u = std::get_if<UlamBasis>(&basis)) {
    return "ulam(" + u->partition->describe() + (u->partition->has_overflow() ? ",overflow" : "") + ")";
  }
  return "generic(" + std::to_string(std::get<GenericBasis>(basis).dimension) + ")";
}

Complex basis_inner(const Basis& basis, const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  if (static_cast<std::size_t>(a.size()) != basis_size(basis) || a.size() != b.size()) {
    throw DimensionMismatch("coefficient vectors do not match the basis");
  }
  if (const auto* u = std::get_if<UlamBasis>(&basis)) {
    const auto cells = static_cast<Eigen::Index>(u->partition->cell_count());
    return a.head(cells).dot(b.head(cells)) * u->partition->cell_volume();
  }
  return a.dot(b);
}

double basis_norm(const Basis& basis, const Eigen::VectorXcd& a) {
  return std::sqrt(std::max(0.0, basis_inner(basis, a, a).real()));
}

// ---------------------------------------------------------------------------
// BasisMatrix

BasisMatrix BasisMatrix::real(Eigen::MatrixXd m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("operator matrix must be square");
  return BasisMatrix(Storage(std::in_place_index<1>, std::move(m)));
}

BasisMatrix BasisMatrix::complex(Eigen::MatrixXcd m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("operator matrix must be square");
  return BasisMatrix(Storage(std::in_place_index<2>, std::move(m)));
}

BasisMatrix BasisMatrix::identity(std::size_t n) {
  return diagonal(Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(n)));
}

std::size_t BasisMatrix::dimension() const noexcept {
  return std::visit([](const auto& m) { return static_cast<std::size_t>(m.rows()); }, storage_);
}

Complex BasisMatrix::entry(std::size_t row, std::size_t col) const {
  const auto r = static_cast<Eigen::Index>(row);
  const auto c = static_cast<Eigen::Index>(col);
  switch (storage_.index()) {
    case 0:
      return row == col ? std::get<0>(storage_)(r) : Complex{0.0, 0.0};
    case 1:
      return std::get<1>(storage_)(r, c);
    default:
      return std::get<2>(storage_)(r, c);
  }
}

Eigen::MatrixXcd BasisMatrix::to_dense() const {
  switch (storage_.index()) {
    case 0:
      return std::get<0>(storage_).asDiagonal();
    case 1:
      return std::get<1>(storage_).cast<Complex>();
    default:
      return std::get<2>(storage_);
  }
}

Eigen::VectorXcd BasisMatrix::apply(const Eigen::VectorXcd& v) const {
  if (static_cast<std::size_t>(v.size()) != dimension()) throw DimensionMismatch("vector does not match the operator");
  switch (storage_.index()) {
    case 0:
      return std::get<0>(storage_).cwiseProduct(v);
    case 1: {
      const Eigen::MatrixXd& m = std::get<1>(storage_);
      Eigen::VectorXcd out(v.size());
      out.real() = m * v.real();
      out.imag() = m * v.imag();
      return out;
    }
    default:
      return std::get<2>(storage_) * v;
  }
}

BasisMatrix operator*(const BasisMatrix& a, const BasisMatrix& b) {
  if (a.dimension() != b.dimension()) throw DimensionMismatch("operator dimensions differ");
  if (a.is_diagonal() && b.is_diagonal()) return BasisMatrix::diagonal(a.diagonal_entries().cwiseProduct(b.diagonal_entries()));
  if (a.is_real_dense() && b.is_real_dense()) {
    Eigen::MatrixXd m = a.real_matrix() * b.real_matrix();
    return BasisMatrix::real(std::move(m));
  }
  Eigen::MatrixXcd m = a.to_dense() * b.to_dense();
  return BasisMatrix::complex(std::move(m));
}

BasisMatrix operator-(const BasisMatrix& a, const BasisMatrix& b) {
  if (a.dimension() != b.dimension()) throw DimensionMismatch("operator dimensions differ");
  if (a.is_diagonal() && b.is_diagonal()) return BasisMatrix::diagonal(a.diagonal_entries() - b.diagonal_entries());
  if (a.is_real_dense() && b.is_real_dense()) return BasisMatrix::real(a.real_matrix() - b.real_matrix());
  return BasisMatrix::complex(a.to_dense() - b.to_dense());
}

double BasisMatrix::frobenius_norm() const {
  return std::visit([](const auto& m) { return static_cast<double>(m.norm()); }, storage_);
}

double frobenius_distance(const BasisMatrix& a, const BasisMatrix& b) { return (a - b).frobenius_norm(); }

KoopmanOperator generic_operator(BasisMatrix matrix, std::string provenance) {
  const std::size_t n = matrix.dimension();
  return KoopmanOperator{GenericBasis{n}, std::move(matrix), std::move(provenance)};
}

// ---------------------------------------------------------------------------
// Projector diagnostics

double idempotency_residual(const InvariantProjector& p) { return frobenius_distance(p.matrix * p.matrix, p.matrix); }

double invariance_residual(const InvariantProjector& p, const KoopmanOperator& u) {
  if (!same_basis(p.basis, u.basis)) throw BasisMismatch("projector and operator use different bases");
  return frobenius_distance(p.matrix * u.matrix, p.matrix);
}

double left_invariance_residual(const InvariantProjector& p, const KoopmanOperator& u) {
  if (!same_basis(p.basis, u.basis)) throw BasisMismatch("projector and operator use different bases");
  return frobenius_distance(u.matrix * p.matrix, p.matrix);
}

double hermiticity_residual(const InvariantProjector& p) {
  const auto& s = p.matrix.storage();
  if (s.index() == 0) {
    const Eigen::VectorXcd& d = std::get<0>(s);
    return (d - d.conjugate()).norm();
  }
  Eigen::MatrixXcd h = p.matrix.to_dense();
  if (p.weights.size() > 0) {
    const Eigen::VectorXd sq = p.weights.cwiseMax(0.0).cwiseSqrt();
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
      for (Eigen::Index j = 0; j < h.cols(); ++j) {
        if (sq(i) > 0.0 && sq(j) > 0.0) h(i, j) *= sq(i) / sq(j);
      }
    }
  }
  return (h - h.adjoint()).norm();
}

// ---------------------------------------------------------------------------
// Rotations

RationalApproximant rational(std::int64_t numerator, std::int64_t denominator) {
  if (denominator == 0) throw InvalidInput("rational denominator must be non-zero");
  if (denominator < 0) {
    numerator = -numerator;
    denominator = -denominator;
  }
  const std::int64_t g = std::gcd(numerator, denominator);
  RationalApproximant r{numerator / g, denominator / g, 0.0};
  r.target = r.value();
  return r;
}

namespace {

void check_cutoff(int cutoff) {
  if (cutoff < 1) throw InvalidInput("Fourier cutoff must be >= 1");
  if (cutoff > 64) throw InvalidInput("Fourier cutoff must be <= 64");
}

std::int64_t positive_mod(std::int64_t a, std::int64_t d) {
  const std::int64_t r = a % d;
  return r < 0 ? r + d : r;
}

}  // namespace

KoopmanOperator fourier_koopman_rotation(double alpha, double beta, int cutoff) {
  return fourier_koopman_rotation(RotationNumber{Irrational{alpha}}, beta, cutoff);
}

KoopmanOperator fourier_koopman_rotation(const RotationNumber& alpha, double beta, int cutoff) {
  check_cutoff(cutoff);
  if (!std::isfinite(beta)) throw InvalidInput("beta must be finite");
  const FourierBasis basis{cutoff};
  Eigen::VectorXcd d(static_cast<Eigen::Index>(basis.size()));
  std::ostringstream prov;
  prov.precision(17);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto [m, n] = basis.mode(i);
    double phase = 0.0;
    if (const auto* r = std::get_if<RationalApproximant>(&alpha)) {
      phase = static_cast<double>(positive_mod(m * r->numerator, r->denominator)) / static_cast<double>(r->denominator);
    } else {
      phase = m * std::get<Irrational>(alpha).value;
    }
    d(static_cast<Eigen::Index>(i)) = unit_phase(phase + n * beta);
  }
  if (const auto* r = std::get_if<RationalApproximant>(&alpha)) {
    prov << "rotation(alpha=" << r->numerator << "/" << r->denominator << ",beta=" << beta << ")";
  } else {
    prov << "rotation(alpha=" << std::get<Irrational>(alpha).value << ",beta=" << beta << ")";
  }
  return KoopmanOperator{basis, BasisMatrix::diagonal(std::move(d)), prov.str()};
}

InvariantProjector fourier_projector_rotation(const RotationNumber& alpha, double beta, int cutoff) {
  check_cutoff(cutoff);
  if (!std::isfinite(beta)) throw InvalidInput("beta must be finite");
  const FourierBasis basis{cutoff};
  Eigen::VectorXcd d = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  const auto* r = std::get_if<RationalApproximant>(&alpha);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto [m, n] = basis.mode(i);
    const bool keep = r ? (n == 0 && m % r->denominator == 0) : (m == 0 && n == 0);
    if (keep) d(static_cast<Eigen::Index>(i)) = 1.0;
  }
  InvariantProjector p;
  p.basis = basis;
  p.matrix = BasisMatrix::diagonal(std::move(d));
  p.construction = ProjectorConstruction::analytic_fourier;
  return p;
}

// ---------------------------------------------------------------------------
// Ulam

KoopmanOperator ulam_matrix(const MapDef& map, const GridPartition& partition, std::size_t samples_per_cell,
                            std::uint64_t seed, Parallelism par) {
  if (samples_per_cell == 0) throw InvalidInput("samples_per_cell must be >= 1");
  if (partition.space() != map.space()) throw DimensionMismatch("partition and map live on different spaces");
  const UlamBasis basis{std::make_shared<const GridPartition>(partition)};
  const std::size_t cells = partition.cell_count();
  const std::size_t states = basis.size();
  const std::size_t dim = partition.space().dim();
  const double weight = 1.0 / static_cast<double>(samples_per_cell);

  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> rows(cells);
  parallel_for(cells, par, [&](std::size_t i) {
    const std::vector<Interval> bounds = partition.cell_bounds(i);
    CounterRng rng(seed, i);
    std::vector<std::size_t> hits;
    hits.reserve(samples_per_cell);
    Coords c{};
    for (std::size_t s = 0; s < samples_per_cell; ++s) {
      for (std::size_t a = 0; a < dim; ++a) {
        const double v = bounds[a].lo + rng.uniform() * (bounds[a].hi - bounds[a].lo);
        c[a] = v < bounds[a].hi ? v : bounds[a].lo;
      }
      const PhasePoint image = step(map, PhasePoint::unchecked(partition.space(), c));
      hits.push_back(partition.cell_index(image));
    }
    std::sort(hits.begin(), hits.end());
    auto& row = rows[i];
    for (std::size_t k = 0; k < hits.size();) {
      std::size_t e = k;
      while (e < hits.size() && hits[e] == hits[k]) ++e;
      row.emplace_back(hits[k], e - k);
      k = e;
    }
  });

  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(states));
  for (std::size_t i = 0; i < cells; ++i) {
    for (const auto& [j, count] : rows[i]) {
      u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<double>(count) * weight;
    }
  }
  if (states > cells) u(static_cast<Eigen::Index>(cells), static_cast<Eigen::Index>(cells)) = 1.0;
  return KoopmanOperator{basis, BasisMatrix::real(std::move(u)),
                         "ulam(" + map.describe() + ",samples_per_cell=" + std::to_string(samples_per_cell) +
                             ",seed=" + std::to_string(seed) + ")"};
}

// ---------------------------------------------------------------------------
// Cesaro projector

namespace {

struct CesaroRun {
  BasisMatrix average;
  std::uint64_t iterations = 1;
  bool converged = false;
};

template <class M>
CesaroRun cesaro_dense(const M& u, const CesaroOptions& opt) {
  const Eigen::Index n = u.rows();
  M a = M::Identity(n, n);
  M power = u;
  M tmp(n, n);
  std::uint64_t count = 1;
  // A_N U - A_N telescopes to (U^N - I) / N.
  double residual = (power - M::Identity(n, n)).norm();
  while (residual > opt.tolerance && count <= opt.max_iterations / 2) {
    tmp.noalias() = a * power;
    a = 0.5 * (a + tmp);
    tmp.noalias() = power * power;
    power.swap(tmp);
    count *= 2;
    residual = (power - M::Identity(n, n)).norm() / static_cast<double>(count);
  }
  CesaroRun run;
  if constexpr (std::is_same_v<M, Eigen::MatrixXd>) {
    run.average = BasisMatrix::real(std::move(a));
  } else {
    run.average = BasisMatrix::complex(std::move(a));
  }
  run.iterations = count;
  run.converged = residual <= opt.tolerance;
  return run;
}

CesaroRun cesaro_diagonal(const Eigen::VectorXcd& u, const CesaroOptions& opt) {
  Eigen::VectorXcd a = Eigen::VectorXcd::Ones(u.size());
  Eigen::VectorXcd power = u;
  std::uint64_t count = 1;
  double residual = (power.array() - 1.0).matrix().norm();
  while (residual > opt.tolerance && count <= opt.max_iterations / 2) {
    a = 0.5 * (a + a.cwiseProduct(power));
    power = power.cwiseProduct(power);
    count *= 2;
    residual = (power.array() - 1.0).matrix().norm() / static_cast<double>(count);
  }
  CesaroRun run;
  run.average = BasisMatrix::diagonal(std::move(a));
  run.iterations = count;
  run.converged = residual <= opt.tolerance;
  return run;
}

// Weighted adjoint W^{-1} A^T W with w_j = sum_i A_ij, normalized to mean 1.
Eigen::VectorXd stationary_weights(const Eigen::MatrixXd& a) {
  Eigen::VectorXd w = a.colwise().sum().transpose();
  const double mean = w.mean();
  if (mean > 0.0) w /= mean;
  return w;
}

Eigen::MatrixXd weighted_symmetrize(const Eigen::MatrixXd& a, const Eigen::VectorXd& w) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double adj = w(i) > 0.0 ? a(j, i) * w(j) / w(i) : a(i, j);
      out(i, j) = 0.5 * (a(i, j) + adj);
    }
  }
  return out;
}

template <class M>
M idempotize(M p, const CesaroOptions& opt) {
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 0; k < opt.max_idempotize_steps; ++k) {
    M p2 = p * p;
    const double r = (p2 - p).norm();
    if (r <= opt.idempotency_target || r >= previous) break;
    previous = r;
    M p3 = p2 * p;
    p = 3.0 * p2 - 2.0 * p3;
  }
  return p;
}

}  // namespace

InvariantProjector cesaro_projector(const KoopmanOperator& u, const CesaroOptions& options) {
  if (options.max_iterations < 1) throw InvalidInput("max_iterations must be >= 1");
  if (!(options.tolerance > 0.0)) throw InvalidInput("Cesaro tolerance must be > 0");
  const auto& storage = u.matrix.storage();
  CesaroRun run;
  switch (storage.index()) {
    case 0:
      run = cesaro_diagonal(std::get<0>(storage), options);
      break;
    case 1:
      run = cesaro_dense(std::get<1>(storage), options);
      break;
    default:
      run = cesaro_dense(std::get<2>(storage), options);
      break;
  }

  InvariantProjector p;
  p.basis = u.basis;
  p.construction = ProjectorConstruction::cesaro;
  p.iterations = run.iterations;
  p.tolerance = options.tolerance;
  p.converged = run.converged;
  p.cesaro_residual = frobenius_distance(run.average * u.matrix, run.average);
  if (!p.converged) {
    warn("Cesaro average did not reach tolerance " + std::to_string(options.tolerance) + " after " +
         std::to_string(run.iterations) + " powers (residual " + std::to_string(p.cesaro_residual) + ")");
  }

  const bool ulam = std::holds_alternative<UlamBasis>(u.basis);
  Symmetrization sym = options.symmetrization;
  if (sym == Symmetrization::automatic) sym = ulam ? Symmetrization::stationary : Symmetrization::euclidean;

  switch (run.average.storage().index()) {
    case 0: {
      Eigen::VectorXcd d = run.average.diagonal_entries();
      Eigen::VectorXcd sym_d = d.real().cast<Complex>();
      for (int k = 0; k < options.max_idempotize_steps; ++k) {
        const Eigen::VectorXcd sq = sym_d.cwiseProduct(sym_d);
        if ((sq - sym_d).norm() <= options.idempotency_target) break;
        sym_d = 3.0 * sq - 2.0 * sq.cwiseProduct(sym_d);
      }
      p.matrix = BasisMatrix::diagonal(std::move(sym_d));
      break;
    }
    case 1: {
      const Eigen::MatrixXd& a = run.average.real_matrix();
      Eigen::MatrixXd s;
      if (sym == Symmetrization::stationary) {
        p.weights = stationary_weights(a);
        s = weighted_symmetrize(a, p.weights);
      } else {
        s = 0.5 * (a + a.transpose());
      }
      p.matrix = BasisMatrix::real(idempotize(std::move(s), options));
      break;
    }
    default: {
      if (sym == Symmetrization::stationary) {
        throw InvalidInput("stationary symmetrization needs a real stochastic operator");
      }
      const Eigen::MatrixXcd a = run.average.to_dense();
      Eigen::MatrixXcd s = 0.5 * (a + a.adjoint());
      p.matrix = BasisMatrix::complex(idempotize(std::move(s), options));
      break;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Observables in a basis

namespace {

constexpr int kSubsamples = 8;

// int_{[lo, lo + w)} e^{-2 pi i m x} dx.
Complex interval_coefficient(const Interval& iv, int m) {
  const double w = interval_width(iv, Axis::periodic);
  if (m == 0) return w;
  const double hi = iv.lo + w;
  const Complex num = unit_phase(-m * iv.lo) - unit_phase(-m * hi);
  return num / Complex(0.0, kTwoPi * m);
}

Eigen::VectorXcd fourier_quadrature(const Observable& psi, const FourierBasis& basis) {
  const int c = basis.cutoff;
  const int side = 2 * c + 1;
  const int l = std::max(256, 8 * side);
  const PhaseSpace t2 = PhaseSpace::torus(2);
  const double h = 1.0 / l;
  // rows[b][m] = sum_a psi(p_a, q_b) e^{-2 pi i m p_a}
  std::vector<Complex> ep(static_cast<std::size_t>(l * side));
  for (int a = 0; a < l; ++a) {
    for (int m = -c; m <= c; ++m) ep[static_cast<std::size_t>(a * side + m + c)] = unit_phase(-m * (a + 0.5) * h);
  }
  std::vector<Complex> rows(static_cast<std::size_t>(l * side), Complex{0.0, 0.0});
  for (int b = 0; b < l; ++b) {
    for (int a = 0; a < l; ++a) {
      const Complex v = psi(PhasePoint::unchecked(t2, Coords{(a + 0.5) * h, (b + 0.5) * h}));
      if (v == Complex{0.0, 0.0}) continue;
      const Complex* e = &ep[static_cast<std::size_t>(a * side)];
      Complex* r = &rows[static_cast<std::size_t>(b * side)];
      for (int k = 0; k < side; ++k) r[k] += v * e[k];
    }
  }
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  for (int n = -c; n <= c; ++n) {
    for (int b = 0; b < l; ++b) {
      const Complex e = ep[static_cast<std::size_t>(b * side + n + c)];
      for (int m = -c; m <= c; ++m) {
        out(static_cast<Eigen::Index>(basis.index(m, n))) += rows[static_cast<std::size_t>(b * side + m + c)] * e;
      }
    }
  }
  return out * (h * h);
}

Eigen::VectorXcd fourier_coefficients(const Observable& psi, const FourierBasis& basis);

Eigen::VectorXcd fourier_unscaled(const Observable& psi, const FourierBasis& basis) {
  const int c = basis.cutoff;
  const auto size = static_cast<Eigen::Index>(basis.size());
  return std::visit(
      [&](const auto& k) -> Eigen::VectorXcd {
        using K = std::decay_t<decltype(k)>;
        Eigen::VectorXcd out = Eigen::VectorXcd::Zero(size);
        if constexpr (std::is_same_v<K, FourierModeObs>) {
          if (basis.contains(k.m, k.n)) out(static_cast<Eigen::Index>(basis.index(k.m, k.n))) = 1.0;
        } else if constexpr (std::is_same_v<K, FourierSeriesObs>) {
          const int kc = k.cutoff;
          const std::size_t side = static_cast<std::size_t>(2 * kc + 1);
          for (int n = -std::min(c, kc); n <= std::min(c, kc); ++n) {
            for (int m = -std::min(c, kc); m <= std::min(c, kc); ++m) {
              out(static_cast<Eigen::Index>(basis.index(m, n))) =
                  k.coefficients[static_cast<std::size_t>(m + kc) + side * static_cast<std::size_t>(n + kc)];
            }
          }
        } else if constexpr (std::is_same_v<K, IndicatorObs>) {
          const Region& region = k.region;
          if (region.space() != PhaseSpace::torus(2)) throw BasisMismatch("Fourier basis lives on the 2-torus");
          if (const auto* box = std::get_if<BoxShape>(&region.shape())) {
            for (int n = -c; n <= c; ++n) {
              const Complex gn = interval_coefficient(box->intervals[1], n);
              for (int m = -c; m <= c; ++m) {
                out(static_cast<Eigen::Index>(basis.index(m, n))) = interval_coefficient(box->intervals[0], m) * gn;
              }
            }
          } else if (const auto* disk = std::get_if<DiskShape>(&region.shape())) {
            const double r = 0.5 * disk->diameter;
            for (int n = -c; n <= c; ++n) {
              for (int m = -c; m <= c; ++m) {
                const double kk = std::hypot(static_cast<double>(m), static_cast<double>(n));
                const double amp = kk == 0.0 ? std::numbers::pi * r * r
                                             : r * std::cyl_bessel_j(1.0, kTwoPi * r * kk) / kk;
                out(static_cast<Eigen::Index>(basis.index(m, n))) =
                    amp * unit_phase(-(m * disk->center[0] + n * disk->center[1]));
              }
            }
          } else {
            return fourier_quadrature(psi.scaled(1.0 / psi.scale()), basis);
          }
        } else if constexpr (std::is_same_v<K, CombinationObs>) {
          for (const auto& [coef, obs] : k.terms) out += coef * fourier_coefficients(*obs, basis);
        } else {
          return fourier_quadrature(psi.scaled(1.0 / psi.scale()), basis);
        }
        return out;
      },
      psi.kind());
}

Eigen::VectorXcd fourier_coefficients(const Observable& psi, const FourierBasis& basis) {
  if (psi.scale() == Complex{0.0, 0.0}) return Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  return psi.scale() * fourier_unscaled(psi, basis);
}

Eigen::VectorXcd ulam_coefficients(const Observable& psi, const UlamBasis& basis) {
  const GridPartition& grid = *basis.partition;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  if (const auto* g = std::get_if<GridFunctionObs>(&psi.kind()); g && *g->partition == grid) {
    for (std::size_t i = 0; i < grid.cell_count(); ++i) out(static_cast<Eigen::Index>(i)) = psi.scale() * g->values[i];
    return out;
  }
  const std::size_t dim = grid.space().dim();
  std::size_t per_cell = 1;
  for (std::size_t a = 0; a < dim; ++a) per_cell *= kSubsamples;
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    const std::vector<Interval> bounds = grid.cell_bounds(i);
    CompensatedComplexSum acc;
    Coords c{};
    for (std::size_t s = 0; s < per_cell; ++s) {
      std::size_t rest = s;
      for (std::size_t a = 0; a < dim; ++a) {
        const std::size_t k = rest % kSubsamples;
        rest /= kSubsamples;
        c[a] = bounds[a].lo + (static_cast<double>(k) + 0.5) / kSubsamples * (bounds[a].hi - bounds[a].lo);
      }
      acc.add(psi(PhasePoint::unchecked(grid.space(), c)));
    }
    out(static_cast<Eigen::Index>(i)) = acc.value() / static_cast<double>(per_cell);
  }
  return out;
}

}  // namespace

Eigen::VectorXcd to_basis(const Observable& psi, const Basis& basis) {
  if (const auto* f = std::get_if<FourierBasis>(&basis)) return fourier_coefficients(psi, *f);
  if (const auto* u = std::get_if<UlamBasis>(&basis)) return ulam_coefficients(psi, *u);
  throw BasisMismatch("observables have no representation in a generic basis");
}

Observable from_basis(const Eigen::VectorXcd& coefficients, const Basis& basis) {
  if (static_cast<std::size_t>(coefficients.size()) != basis_size(basis)) {
    throw DimensionMismatch("coefficient vector does not match the basis");
  }
  if (const auto* f = std::get_if<FourierBasis>(&basis)) {
    return Observable::fourier_series(f->cutoff, std::vector<Complex>(coefficients.begin(), coefficients.end()));
  }
  if (const auto* u = std::get_if<UlamBasis>(&basis)) {
    const std::size_t cells = u->partition->cell_count();
    return Observable::grid_function(*u->partition,
                                     std::vector<Complex>(coefficients.begin(), coefficients.begin() + cells));
  }
  throw BasisMismatch("observables have no representation in a generic basis");
}

Observable apply_projector(const InvariantProjector& p, const Observable& psi) {
  return from_basis(p.apply(to_basis(psi, p.basis)), p.basis);
}

std::vector<ProbePair> default_probe_set(int cutoff) {
  if (cutoff < 1 || cutoff > 64) throw InvalidInput("probe cutoff must lie in [1, 64]");
  const FourierBasis basis{cutoff};
  std::vector<Complex> smooth(basis.size());
  std::vector<Complex> shifted(basis.size());
  double norm2 = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto [m, n] = basis.mode(i);
    const double w = 1.0 / (1.0 + m * m + n * n);
    smooth[i] = w;
    shifted[i] = ((m + n) % 2 == 0) ? w : -w;
    norm2 += w * w;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    smooth[i] *= inv;
    shifted[i] *= inv;
  }
  Observable s = Observable::fourier_series(cutoff, std::move(smooth));
  Observable h = Observable::fourier_series(cutoff, std::move(shifted));
  return {ProbePair{s, s}, ProbePair{s, h}};
}

OperatorDistance weak_distance(const KoopmanOperator& u1, const KoopmanOperator& u2,
                               const std::vector<ProbePair>& probes) {
  if (!same_basis(u1.basis, u2.basis)) throw BasisMismatch("operators use different bases");
  const BasisMatrix diff = u1.matrix - u2.matrix;
  OperatorDistance d;
  for (const ProbePair& pair : probes) {
    const Eigen::VectorXcd a = to_basis(pair.phi, u1.basis);
    const Eigen::VectorXcd db = diff.apply(to_basis(pair.psi, u1.basis));
    d.weak = std::max(d.weak, std::abs(basis_inner(u1.basis, a, db)));
    d.strong = std::max(d.strong, basis_norm(u1.basis, db));
  }
  return d;
}

double eta(const Observable& phi, const Observable& psi, const InvariantProjector& p_eps,
           const InvariantProjector& p) {
  if (!same_basis(p_eps.basis, p.basis)) throw BasisMismatch("projectors use different bases");
  Eigen::VectorXcd a = to_basis(phi, p.basis);
  const double norm = basis_norm(p.basis, a);
  if (!(norm > 0.0)) throw DomainError("phi has zero norm in the projector basis");
  if (std::abs(norm - 1.0) > 1e-10) {
    warn("eta: phi is not normalized (norm " + std::to_string(norm) + "); normalizing");
    a /= norm;
  }
  const Eigen::VectorXcd b = to_basis(psi, p.basis);
  return std::abs(basis_inner(p.basis, a, p_eps.apply(b) - p.apply(b)));
}

double eta(const std::vector<ProbePair>& probes, const InvariantProjector& p_eps, const InvariantProjector& p) {
  double out = 0.0;
  for (const ProbePair& pair : probes) out = std::max(out, eta(pair.phi, pair.psi, p_eps, p));
  return out;
}

// ---------------------------------------------------------------------------
// Coboundary

CoboundaryResult coboundary_solve(const Observable& psi_c, const KoopmanOperator& u, double delta,
                                  const InvariantProjector* invariant) {
  return coboundary_solve(to_basis(psi_c, u.basis), u, delta, invariant);
}

CoboundaryResult coboundary_solve(const Eigen::VectorXcd& psi_c, const KoopmanOperator& u, double delta,
                                  const InvariantProjector* invariant) {
  if (!(delta > 0.0)) throw InvalidInput("delta must be > 0");
  if (static_cast<std::size_t>(psi_c.size()) != u.dimension()) throw DimensionMismatch("psi_c does not match U");
  const double b_norm = basis_norm(u.basis, psi_c);
  const double allowed = 1e-8 * std::max(1.0, b_norm);
  if (invariant) {
    if (!same_basis(invariant->basis, u.basis)) throw BasisMismatch("projector and operator use different bases");
    const double leak = basis_norm(u.basis, invariant->apply(psi_c));
    if (leak > allowed) {
      throw DomainError("psi_c is not orthogonal to the invariant subspace (||P psi_c|| = " + std::to_string(leak) + ")");
    }
  } else if (u.matrix.is_diagonal()) {
    const Eigen::VectorXcd& d = u.matrix.diagonal_entries();
    for (Eigen::Index k = 0; k < d.size(); ++k) {
      if (std::abs(d(k) - 1.0) <= 1e-12 && std::abs(psi_c(k)) > allowed) {
        throw DomainError("psi_c has a component along an invariant mode");
      }
    }
  }

  CoboundaryResult r;
  r.delta = delta;
  const BasisMatrix a = u.matrix - BasisMatrix::identity(u.dimension());
  r.ridge = 1e-10 * a.frobenius_norm();
  const double r2 = r.ridge * r.ridge;
  if (a.is_diagonal()) {
    const Eigen::VectorXcd& d = a.diagonal_entries();
    r.chi = Eigen::VectorXcd::Zero(d.size());
    r.smallest_divisor = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < d.size(); ++k) {
      const double mag2 = std::norm(d(k));
      if (std::sqrt(mag2) > 1e-12) r.smallest_divisor = std::min(r.smallest_divisor, std::sqrt(mag2));
      if (mag2 + r2 > 0.0) r.chi(k) = std::conj(d(k)) * psi_c(k) / (mag2 + r2);
    }
    if (!std::isfinite(r.smallest_divisor)) r.smallest_divisor = 0.0;
  } else {
    const Eigen::MatrixXcd m = a.to_dense();
    Eigen::MatrixXcd normal = m.adjoint() * m;
    normal.diagonal().array() += r2;
    r.chi = normal.ldlt().solve(m.adjoint() * psi_c);
  }
  r.residual = basis_norm(u.basis, psi_c - a.apply(r.chi));
  r.success = r.residual <= 0.5 * delta;
  return r;
}

// ---------------------------------------------------------------------------
// Hamiltonian ratio

HamiltonianPerturbation HamiltonianPerturbation::additive(Hamiltonian h, double eps, ScalarFunction f) {
  Hamiltonian he = h;
  he.offset += eps;
  return HamiltonianPerturbation{h, he, std::move(f)};
}

double HamiltonianPerturbation::ratio(const PhasePoint& x) const {
  if (x.dim() < 2) throw DimensionMismatch("Hamiltonian needs (p, q)");
  const double num = apply(f, h(x));
  const double den = apply(f, h_eps(x));
  if (!(num > 0.0) || !(den > 0.0) || !std::isfinite(num) || !std::isfinite(den)) {
    std::ostringstream os;
    os.precision(17);
    os << "f(H) is not positive at (" << x[0] << ", " << x[1] << ")";
    throw DomainError(os.str());
  }
  return num / den;
}

double hamiltonian_ratio_bound(const HamiltonianPerturbation& pert, const EnsembleSpec& sample) {
  double bound = 0.0;
  for (const PhasePoint& x : sample_ensemble(sample)) bound = std::max(bound, std::abs(pert.ratio(x) - 1.0));
  return bound;
}

double transport_ratio(const HamiltonianPerturbation& pert, const MapDef& map, const PhasePoint& x, std::uint64_t k) {
  return pert.ratio(iterate(map, x, k)) / pert.ratio(x);
}

// ---------------------------------------------------------------------------
// Dump

void write_dump(std::ostream& os, const Basis& basis, const BasisMatrix& matrix) {
  if (matrix.dimension() != basis_size(basis)) throw DimensionMismatch("matrix does not match the basis");
  os << "# basis=" << describe_basis(basis) << " dimension=" << matrix.dimension() << "\n";
  os << "row,col,re,im\n";
  char buf[128];
  auto line = [&](std::size_t i, std::size_t j, Complex v) {
    if (v == Complex{0.0, 0.0}) return;
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g\n", i, j, v.real(), v.imag());
    os << buf;
  };
  const std::size_t n = matrix.dimension();
  if (matrix.is_diagonal()) {
    for (std::size_t i = 0; i < n; ++i) line(i, i, matrix.entry(i, i));
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) line(i, j, matrix.entry(i, j));
  }
}

}  // namespace ergostab
