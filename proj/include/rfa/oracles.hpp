#pragma once

// Independent reference solutions for the thermal solvers: a Fourier series
// for the parabolic slab, an explicit finite-difference telegraph solver for
// the hyperbolic one, and manufactured solutions built by automatic
// differentiation.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfa {

class OracleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SlabEnd {
  enum class Kind { Temperature, Insulated } kind = Kind::Temperature;
  double value = 37.0;
};

struct Oracle1DConfig {
  double length = 0.0;  // m
  double density = 0.0;
  double specific_heat = 0.0;
  double conductivity = 0.0;
  double tau = 0.0;  // s
  double T_initial = 37.0;
  SlabEnd left, right;
  /// Volumetric heating (W/m^3) switched on at t = 0 over [source_from, source_to].
  double source = 0.0;
  double source_from = 0.0;
  double source_to = -1.0;  // < 0: up to `length`
  int cells = 400;
  double dt = 0.0;  // <= 0: chosen from the stability bound
  std::vector<double> times;

  [[nodiscard]] double diffusivity() const { return conductivity / (density * specific_heat); }
  [[nodiscard]] double wave_speed() const {
    return tau > 0 ? std::sqrt(diffusivity() / tau) : std::numeric_limits<double>::infinity();
  }
  [[nodiscard]] double source_end() const { return source_to < 0 ? length : source_to; }
};

struct Table1D {
  std::vector<double> x;
  std::vector<double> t;
  std::vector<std::vector<double>> T;  // T[time][x]

  /// Linear interpolation in x at time index k.
  [[nodiscard]] double at(std::size_t k, double xq) const {
    const auto& row = T.at(k);
    if (xq <= x.front()) return row.front();
    if (xq >= x.back()) return row.back();
    const auto it = std::upper_bound(x.begin(), x.end(), xq);
    const std::size_t j = static_cast<std::size_t>(it - x.begin());
    const double s = (xq - x[j - 1]) / (x[j] - x[j - 1]);
    return row[j - 1] + s * (row[j] - row[j - 1]);
  }
};

namespace detail {

inline void check_oracle(const Oracle1DConfig& c) {
  if (!(c.length > 0 && c.density > 0 && c.specific_heat > 0 && c.conductivity > 0))
    throw OracleError("oracle: length and material constants must be > 0");
  if (!(c.tau >= 0)) throw OracleError("oracle: tau must be >= 0");
  if (c.cells < 2) throw OracleError("oracle: need at least 2 cells");
  for (double t : c.times)
    if (!(t >= 0)) throw OracleError("oracle: output times must be >= 0");
  if (c.source_end() < c.source_from || c.source_from < 0 || c.source_end() > c.length)
    throw OracleError("oracle: source interval outside the slab");
}

}  // namespace detail

/// Fourier series for rho c T_t = k T_xx + q on a slab with fixed end
/// temperatures, uniform initial temperature and uniform source.
/// Terms are summed until a bound on the remaining tail is below `tail_tol`.
inline Table1D oracle_be_1d(const Oracle1DConfig& c, double tail_tol = 1e-9) {
  detail::check_oracle(c);
  if (c.left.kind != SlabEnd::Kind::Temperature || c.right.kind != SlabEnd::Kind::Temperature)
    throw OracleError("oracle_be_1d: both ends must have fixed temperature");
  if (c.source != 0.0 && (c.source_from != 0.0 || c.source_end() != c.length))
    throw OracleError("oracle_be_1d: source must cover the whole slab");
  const double L = c.length, k = c.conductivity, alpha = c.diffusivity();
  const double TL = c.left.value, TR = c.right.value, q = c.source;
  const double pi = std::numbers::pi;

  auto steady = [&](double x) { return TL + (TR - TL) * x / L + q / (2 * k) * x * (L - x); };
  // sine coefficients of T_initial - steady(x)
  auto coeff = [&](int n) {
    const double npi = n * pi;
    const double odd = (n % 2) ? 2.0 : 0.0;  // 1 - (-1)^n
    const double sgn = (n % 2) ? -1.0 : 1.0;  // (-1)^n
    const double I1 = L * odd / npi;
    const double Ix = -L * L * sgn / npi;
    const double Ixx = 2.0 * L * L * L * odd / (npi * npi * npi);  // int x(L-x) sin
    return 2.0 / L * ((c.T_initial - TL) * I1 - (TR - TL) / L * Ix - q / (2 * k) * Ixx);
  };
  // |b_n| <= B / n
  const double B = 2.0 / pi * (2 * std::abs(c.T_initial - TL) + std::abs(TR - TL)) + 8 * std::abs(q) * L * L / (k * pi * pi * pi);

  Table1D tab;
  for (int i = 0; i <= c.cells; ++i) tab.x.push_back(L * i / c.cells);
  for (double t : c.times) {
    tab.t.push_back(t);
    std::vector<double> row(tab.x.size());
    if (t == 0.0) {
      std::fill(row.begin(), row.end(), c.T_initial);
      row.front() = TL;
      row.back() = TR;
      tab.T.push_back(std::move(row));
      continue;
    }
    const double a = alpha * pi * pi / (L * L) * t;
    int N = 1;
    constexpr int kMaxTerms = 1000000;
    for (;; ++N) {
      const double e = std::exp(-a * (N + 1) * (N + 1));
      const double tail = B / (N + 1) * e / (1.0 - std::exp(-a * (N + 1)));
      if (tail < tail_tol) break;
      if (N > kMaxTerms) throw OracleError("oracle_be_1d: series does not converge at t = " + std::to_string(t));
    }
    for (std::size_t i = 0; i < tab.x.size(); ++i) {
      const double x = tab.x[i];
      double s = steady(x);
      for (int n = 1; n <= N; ++n) s += coeff(n) * std::sin(n * pi * x / L) * std::exp(-a * n * n);
      row[i] = s;
    }
    row.front() = TL;
    row.back() = TR;
    tab.T.push_back(std::move(row));
  }
  return tab;
}

/// Largest stable explicit step for the telegraph scheme on this grid.
inline double oracle_hbe_stable_dt(const Oracle1DConfig& c) {
  const double dx = c.length / c.cells, alpha = c.diffusivity();
  if (c.tau == 0.0) return 0.5 * dx * dx / alpha;
  return dx / c.wave_speed();
}

/// Explicit finite differences for tau T_tt + T_t = alpha T_xx + q/(rho c),
/// with T(0) = T_initial and T_t(0) = 0. Centred in time for tau > 0
/// (stable for c dt <= dx), forward Euler for tau = 0 (dt <= dx^2 / 2 alpha).
inline Table1D oracle_hbe_1d(const Oracle1DConfig& c) {
  detail::check_oracle(c);
  const int n = c.cells;
  const double dx = c.length / n, alpha = c.diffusivity(), tau = c.tau;
  const double dt_max = oracle_hbe_stable_dt(c);
  double dt = c.dt > 0 ? c.dt : 0.9 * dt_max;
  if (dt > dt_max) throw OracleError("oracle_hbe_1d: dt exceeds the stability bound " + std::to_string(dt_max));

  std::vector<double> times(c.times);
  std::sort(times.begin(), times.end());
  // land exactly on the last output time
  const double t_last = times.empty() ? 0.0 : times.back();
  const long steps = t_last > 0 ? static_cast<long>(std::ceil(t_last / dt - 1e-9)) : 0;
  if (steps > 0) dt = t_last / steps;

  std::vector<double> src(n + 1, 0.0);
  const double s_from = c.source_from, s_to = c.source_end();
  for (int i = 0; i <= n; ++i) {
    // cell-averaged indicator of the source interval over the node's control volume
    const double lo = std::max(0.0, (i - 0.5) * dx), hi = std::min(c.length, (i + 0.5) * dx);
    const double overlap = std::max(0.0, std::min(hi, s_to) - std::max(lo, s_from));
    src[i] = c.source / (c.density * c.specific_heat) * overlap / (hi - lo);
  }

  auto laplacian = [&](const std::vector<double>& T, int i) {
    if (i == 0) return 2.0 * (T[1] - T[0]) / (dx * dx);
    if (i == n) return 2.0 * (T[n - 1] - T[n]) / (dx * dx);
    return (T[i - 1] - 2.0 * T[i] + T[i + 1]) / (dx * dx);
  };
  auto apply_ends = [&](std::vector<double>& T) {
    if (c.left.kind == SlabEnd::Kind::Temperature) T[0] = c.left.value;
    if (c.right.kind == SlabEnd::Kind::Temperature) T[n] = c.right.value;
  };
  auto fixed = [&](int i) {
    return (i == 0 && c.left.kind == SlabEnd::Kind::Temperature) ||
           (i == n && c.right.kind == SlabEnd::Kind::Temperature);
  };

  std::vector<double> cur(n + 1, c.T_initial), prev, next(n + 1);
  apply_ends(cur);
  if (tau > 0) {
    // T(-dt) from T_t(0) = 0 and T_tt(0) = (alpha T_xx + s) / tau
    prev.resize(n + 1);
    for (int i = 0; i <= n; ++i)
      prev[i] = fixed(i) ? cur[i] : cur[i] + 0.5 * dt * dt * (alpha * laplacian(cur, i) + src[i]) / tau;
  }

  Table1D tab;
  for (int i = 0; i <= n; ++i) tab.x.push_back(i * dx);
  std::size_t next_out = 0;
  // output times between steps are interpolated linearly from the bracketing states
  auto emit = [&](long step, const std::vector<double>& before) {
    const double slack = 1e-9 * std::max(1.0, t_last);
    while (next_out < times.size() && times[next_out] <= step * dt + slack) {
      const double w = step == 0 ? 1.0 : std::clamp((times[next_out] - (step - 1) * dt) / dt, 0.0, 1.0);
      std::vector<double> row(cur);
      for (int i = 0; i <= n; ++i) row[i] = (1.0 - w) * before[i] + w * cur[i];
      tab.t.push_back(times[next_out]);
      tab.T.push_back(std::move(row));
      ++next_out;
    }
  };
  emit(0, cur);
  const double a = tau / (dt * dt), b = 1.0 / (2.0 * dt);
  for (long s = 1; s <= steps; ++s) {
    for (int i = 0; i <= n; ++i) {
      if (fixed(i)) continue;
      const double rhs = alpha * laplacian(cur, i) + src[i];
      if (tau > 0)
        next[i] = (rhs + a * (2.0 * cur[i] - prev[i]) + b * prev[i]) / (a + b);
      else
        next[i] = cur[i] + dt * rhs;
    }
    apply_ends(next);
    if (tau > 0) {
      prev.swap(cur);  // prev now holds the state before this step
      cur.swap(next);
      emit(s, prev);
    } else {
      cur.swap(next);  // next now holds the state before this step
      emit(s, next);
    }
  }
  return tab;
}

/// Heat content per unit cross-section, rho c * int (T - T_ref) dx, trapezoidal.
inline double slab_energy(const Oracle1DConfig& c, const std::vector<double>& T, double T_ref) {
  const double dx = c.length / c.cells;
  double s = 0.0;
  for (std::size_t i = 0; i < T.size(); ++i) s += (i == 0 || i + 1 == T.size() ? 0.5 : 1.0) * (T[i] - T_ref);
  return c.density * c.specific_heat * dx * s;
}

/// Half-amplitude position of a profile rising from `base` near x = 0:
/// the first x where T falls to base + fraction * (peak - base).
inline double front_position(const Table1D& tab, std::size_t k, double base, double amplitude, double fraction = 0.5) {
  const auto& row = tab.T.at(k);
  const double level = base + fraction * amplitude;
  for (std::size_t i = 1; i < row.size(); ++i)
    if (row[i - 1] >= level && row[i] < level)
      return tab.x[i - 1] + (tab.x[i] - tab.x[i - 1]) * (row[i - 1] - level) / (row[i - 1] - row[i]);
  return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// Manufactured solutions

/// Truncated Taylor jet in one variable: value, first and second derivative.
struct Jet {
  double v = 0.0, d = 0.0, dd = 0.0;
  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT: constants promote implicitly
  Jet(double value, double d1, double d2) : v(value), d(d1), dd(d2) {}
  static Jet variable(double x) { return {x, 1.0, 0.0}; }
};

inline Jet operator+(Jet a, Jet b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }
inline Jet operator-(Jet a, Jet b) { return {a.v - b.v, a.d - b.d, a.dd - b.dd}; }
inline Jet operator-(Jet a) { return {-a.v, -a.d, -a.dd}; }
inline Jet operator*(Jet a, Jet b) { return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + 2 * a.d * b.d + a.v * b.dd}; }
inline Jet operator/(Jet a, Jet b) {
  const double q = a.v / b.v;
  const double dq = (a.d - q * b.d) / b.v;
  return {q, dq, (a.dd - 2 * dq * b.d - q * b.dd) / b.v};
}
/// Chain rule for f(a) given f, f', f'' at a.v.
inline Jet chain(Jet a, double f, double f1, double f2) { return {f, f1 * a.d, f1 * a.dd + f2 * a.d * a.d}; }
inline Jet sin(Jet a) { return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Jet cos(Jet a) { return chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline Jet exp(Jet a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}
inline Jet sqrt(Jet a) {
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline Jet pow(Jet a, double p) {
  return chain(a, std::pow(a.v, p), p * std::pow(a.v, p - 1), p * (p - 1) * std::pow(a.v, p - 2));
}

struct ManufacturedSolution {
  std::function<double(double, double, double)> exact;   // T*(r, z, t)
  std::function<double(double, double, double)> source;  // Q*(r, z, t), W/m^3
  std::function<double(double, double, double)> rate;    // dT*/dt
};

/// Forcing that makes T*(r, z, t) solve
///   tau rho c T_tt + rho c T_t = k (T_rr + T_r / r + T_zz) + Q
/// exactly (tau = 0 for the parabolic equation). `expr` is called with Jet
/// arguments and must be written generically, e.g. [](auto r, auto z, auto t).
/// On the axis T_r / r is replaced by its limit T_rr.
template <class Expr>
ManufacturedSolution manufactured_solution(Expr expr, double rho_c, double k, double tau = 0.0) {
  ManufacturedSolution m;
  m.exact = [expr](double r, double z, double t) { return expr(Jet(r), Jet(z), Jet(t)).v; };
  m.rate = [expr](double r, double z, double t) { return expr(Jet(r), Jet(z), Jet::variable(t)).d; };
  m.source = [expr, rho_c, k, tau](double r, double z, double t) {
    const Jet jt = expr(Jet(r), Jet(z), Jet::variable(t));
    const Jet jr = expr(Jet::variable(r), Jet(z), Jet(t));
    const Jet jz = expr(Jet(r), Jet::variable(z), Jet(t));
    const double radial = r > 0 ? jr.dd + jr.d / r : 2.0 * jr.dd;
    return tau * rho_c * jt.dd + rho_c * jt.d - k * (radial + jz.dd);
  };
  return m;
}

}  // namespace rfa
