#include "ergostab/observable.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "ergostab/errors.hpp"
#include "ergostab/numeric.hpp"

namespace ergostab {

namespace {

constexpr int kMaxCutoff = 64;

std::size_t series_size(int cutoff) {
  const auto side = static_cast<std::size_t>(2 * cutoff + 1);
  return side * side;
}

std::size_t series_index(int cutoff, int m, int n) {
  const auto side = static_cast<std::size_t>(2 * cutoff + 1);
  return static_cast<std::size_t>(m + cutoff) + side * static_cast<std::size_t>(n + cutoff);
}

// For c_{mn} real with c_{mn} = c_{-m,n} = c_{m,-n}, psi(p, q) equals
// sum_{m,n >= 0} a_{mn} cos(2 pi m p) cos(2 pi n q) with a = c * (1|2) * (1|2).
std::shared_ptr<const std::vector<double>> cosine_table(const FourierSeriesObs& s) {
  const int c = s.cutoff;
  for (int n = -c; n <= c; ++n) {
    for (int m = -c; m <= c; ++m) {
      const Complex v = s.coefficients[series_index(c, m, n)];
      if (v.imag() != 0.0) return nullptr;
      if (v != s.coefficients[series_index(c, -m, n)] || v != s.coefficients[series_index(c, m, -n)]) return nullptr;
    }
  }
  auto table = std::make_shared<std::vector<double>>(static_cast<std::size_t>((c + 1) * (c + 1)));
  for (int m = 0; m <= c; ++m) {
    for (int n = 0; n <= c; ++n) {
      const double mult = (m > 0 ? 2.0 : 1.0) * (n > 0 ? 2.0 : 1.0);
      (*table)[static_cast<std::size_t>(m * (c + 1) + n)] = mult * s.coefficients[series_index(c, m, n)].real();
    }
  }
  return table;
}

void cos_multiples(double x, int count, std::array<double, kMaxCutoff + 1>& out) {
  out[0] = 1.0;
  if (count == 0) return;
  const double c1 = std::cos(kTwoPi * x);
  out[1] = c1;
  for (int k = 2; k <= count; ++k) out[k] = 2.0 * c1 * out[k - 1] - out[k - 2];
}

void exp_multiples(double x, int count, std::array<Complex, kMaxCutoff + 1>& out) {
  out[0] = {1.0, 0.0};
  if (count == 0) return;
  const Complex z = unit_phase(x);
  out[1] = z;
  for (int k = 2; k <= count; ++k) out[k] = out[k - 1] * z;
}

}  // namespace

double Hamiltonian::operator()(const PhasePoint& x) const {
  const double p = x[0];
  const double q = x[1];
  return kinetic * 0.5 * p * p + potential * std::cos(kTwoPi * q) + offset;
}

double apply(const ScalarFunction& f, double h) {
  return std::visit(
      [h](const auto& g) -> double {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, ExpWeight>) {
          return std::exp(-g.beta * h);
        } else {
          double acc = 0.0;
          for (auto it = g.coefficients.rbegin(); it != g.coefficients.rend(); ++it) acc = acc * h + *it;
          return acc;
        }
      },
      f);
}

Observable::Observable(Kind kind) : kind_(std::make_shared<const Kind>(std::move(kind))) {
  if (const auto* s = std::get_if<FourierSeriesObs>(kind_.get())) cosine_table_ = cosine_table(*s);
}

Observable Observable::indicator(Region region) { return Observable(IndicatorObs{std::move(region)}); }

Observable Observable::fourier_mode(int m, int n) { return Observable(FourierModeObs{m, n}); }

Observable Observable::fourier_series(int cutoff, std::vector<Complex> coefficients) {
  if (cutoff < 0 || cutoff > kMaxCutoff) {
    throw InvalidInput("Fourier cutoff must lie in [0, " + std::to_string(kMaxCutoff) + "]");
  }
  if (coefficients.size() != series_size(cutoff)) throw InvalidInput("Fourier series coefficient count mismatch");
  for (const Complex& c : coefficients) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw InvalidInput("non-finite Fourier coefficient");
  }
  return Observable(FourierSeriesObs{cutoff, std::move(coefficients)});
}

Observable Observable::grid_function(const GridPartition& partition, std::vector<Complex> values) {
  if (values.size() != partition.cell_count()) throw InvalidInput("grid function needs one value per cell");
  for (const Complex& c : values) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw InvalidInput("non-finite grid value");
  }
  return Observable(GridFunctionObs{std::make_shared<const GridPartition>(partition), std::move(values)});
}

Observable Observable::hamiltonian(Hamiltonian h, ScalarFunction f) { return Observable(HamiltonianObs{h, std::move(f)}); }

Observable Observable::combination(std::vector<std::pair<Complex, Observable>> terms) {
  CombinationObs c;
  for (auto& [coef, obs] : terms) c.terms.emplace_back(coef, std::make_shared<const Observable>(std::move(obs)));
  return Observable(std::move(c));
}

Observable Observable::scaled(Complex factor) const {
  Observable out = *this;
  out.scale_ *= factor;
  out.normalized_ = false;
  return out;
}

Observable Observable::normalized(const GridPartition& grid) const {
  const double norm = grid_norm(*this, grid);
  if (!(norm > 0.0)) throw DomainError("cannot normalize a zero observable");
  Observable out = scaled(1.0 / norm);
  out.normalized_ = true;
  return out;
}

Complex Observable::evaluate_unscaled(const PhasePoint& x) const {
  return std::visit(
      [&](const auto& k) -> Complex {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, IndicatorObs>) {
          return k.region.contains(x) ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<K, FourierModeObs>) {
          if (k.m == 0 && k.n == 0) return 1.0;
          return unit_phase(k.m * x[0] + k.n * x[1]);
        } else if constexpr (std::is_same_v<K, FourierSeriesObs>) {
          const int c = k.cutoff;
          if (cosine_table_) {
            std::array<double, kMaxCutoff + 1> cp{};
            std::array<double, kMaxCutoff + 1> cq{};
            cos_multiples(x[0], c, cp);
            cos_multiples(x[1], c, cq);
            const std::vector<double>& a = *cosine_table_;
            double acc = 0.0;
            for (int m = 0; m <= c; ++m) {
              const double* row = a.data() + static_cast<std::size_t>(m * (c + 1));
              double inner = 0.0;
              for (int n = 0; n <= c; ++n) inner += row[n] * cq[static_cast<std::size_t>(n)];
              acc += cp[static_cast<std::size_t>(m)] * inner;
            }
            return acc;
          }
          std::array<Complex, kMaxCutoff + 1> ep{};
          std::array<Complex, kMaxCutoff + 1> eq{};
          exp_multiples(x[0], c, ep);
          exp_multiples(x[1], c, eq);
          Complex acc = 0.0;
          for (int n = -c; n <= c; ++n) {
            const Complex zq = n >= 0 ? eq[static_cast<std::size_t>(n)] : std::conj(eq[static_cast<std::size_t>(-n)]);
            Complex inner = 0.0;
            for (int m = -c; m <= c; ++m) {
              const Complex zp = m >= 0 ? ep[static_cast<std::size_t>(m)] : std::conj(ep[static_cast<std::size_t>(-m)]);
              inner += k.coefficients[series_index(c, m, n)] * zp;
            }
            acc += inner * zq;
          }
          return acc;
        } else if constexpr (std::is_same_v<K, GridFunctionObs>) {
          const std::size_t id = k.partition->cell_index(x);
          return id < k.values.size() ? k.values[id] : Complex{0.0, 0.0};
        } else if constexpr (std::is_same_v<K, HamiltonianObs>) {
          return apply(k.f, k.h(x));
        } else {
          Complex acc = 0.0;
          for (const auto& [coef, obs] : k.terms) acc += coef * (*obs)(x);
          return acc;
        }
      },
      *kind_);
}

std::string Observable::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (scale_ != Complex{1.0, 0.0}) os << "(" << scale_.real() << (scale_.imag() >= 0 ? "+" : "") << scale_.imag() << "i)*";
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, IndicatorObs>) {
          os << "indicator(" << k.region.describe() << ")";
        } else if constexpr (std::is_same_v<K, FourierModeObs>) {
          os << "fourier_mode(" << k.m << "," << k.n << ")";
        } else if constexpr (std::is_same_v<K, FourierSeriesObs>) {
          os << "fourier_series(cutoff=" << k.cutoff << ")";
        } else if constexpr (std::is_same_v<K, GridFunctionObs>) {
          os << "grid_function(" << k.partition->describe() << ")";
        } else if constexpr (std::is_same_v<K, HamiltonianObs>) {
          os << "f(H)(kinetic=" << k.h.kinetic << ",potential=" << k.h.potential << ",offset=" << k.h.offset << ")";
        } else {
          os << "combination(";
          for (std::size_t i = 0; i < k.terms.size(); ++i) os << (i ? "+" : "") << k.terms[i].second->describe();
          os << ")";
        }
      },
      *kind_);
  return os.str();
}

Complex grid_inner_product(const Observable& phi, const Observable& psi, const GridPartition& grid) {
  CompensatedComplexSum acc;
  for (std::size_t id = 0; id < grid.cell_count(); ++id) {
    const PhasePoint c = grid.cell_center(id);
    acc.add(std::conj(phi(c)) * psi(c));
  }
  return acc.value() * grid.cell_volume();
}

double grid_norm(const Observable& psi, const GridPartition& grid) {
  return std::sqrt(std::max(0.0, grid_inner_product(psi, psi, grid).real()));
}

}  // namespace ergostab
