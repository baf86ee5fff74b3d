#include "twoclass/mmk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include "double_double.hpp"
#include "twoclass/mg1.hpp"

namespace twoclass {

namespace {

template <unsigned Digits>
using MpReal = boost::multiprecision::number<
    boost::multiprecision::mpfr_float_backend<Digits>,
    boost::multiprecision::et_off>;

template <class T>
using MatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
double to_double(const T& v) {
  return static_cast<double>(v);
}

template <class T>
MatT<double> to_double(const MatT<T>& m) {
  MatT<double> out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(r, c) = to_double(m(r, c));
  return out;
}

template <class T>
VecT<double> to_double(const VecT<T>& v) {
  VecT<double> out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = to_double(v[i]);
  return out;
}

template <class T>
std::string describe(const VecT<T>& v) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < v.size(); ++i)
    os << (i ? ", " : "") << to_double(v[i]);
  os << "]";
  return os.str();
}

// ---------------------------------------------------------------------------
// Boundary

template <class T>
struct Boundary {
  std::vector<MatT<T>> arrivals, services, rates, reduction;
  MatT<T> generator;  // Delta_{k-1} - R_{k-1} Lambda_{k-2}
};

template <class T>
Boundary<T> boundary_t(const MmkConfig& config) {
  const int k = config.servers;
  if (k < 2) throw InvalidModel("build_boundary requires at least 2 servers");
  const T l1(config.lambda(0)), l2(config.lambda(1));
  const T m1(config.mu(0)), m2(config.mu(1));
  const T lam = l1 + l2;
  if (!(config.total_arrival_rate() > 0.0))
    throw SingularSystem("build_boundary: total arrival rate is zero");

  Boundary<T> b;
  b.arrivals.resize(k);
  b.services.resize(k);
  b.rates.resize(k);
  b.reduction.resize(k);
  for (int n = 0; n < k; ++n) {
    MatT<T> arr = MatT<T>::Zero(n + 1, n + 2);
    MatT<T> del = MatT<T>::Zero(n + 1, n + 1);
    for (int i = 0; i <= n; ++i) {
      arr(i, i + 1) = l1;
      arr(i, i) = l2;
      del(i, i) = T(i) * m1 + T(n - i) * m2;
    }
    b.arrivals[n] = std::move(arr);
    b.rates[n] = std::move(del);
    if (n >= 1) {
      MatT<T> svc = MatT<T>::Zero(n + 1, n);
      for (int i = 1; i <= n; ++i) svc(i, i - 1) = T(i) * m1;
      for (int i = 0; i < n; ++i) svc(i, i) = T(n - i) * m2;
      b.services[n] = std::move(svc);
    }
  }

  b.reduction[1] = b.services[1] / lam;
  for (int n = 1; n + 1 < k; ++n) {
    const MatT<T> y = lam * MatT<T>::Identity(n + 1, n + 1) + b.rates[n] -
                      b.reduction[n] * b.arrivals[n - 1];
    // R_{n+1} = M_{n+1} Y^{-1}  <=>  Y^T R^T = M^T
    Eigen::FullPivLU<MatT<T>> lu(y.transpose());
    // FullPivLU pivots are ordered by magnitude.
    const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
    const double rcond = to_double(pivots[n]) / to_double(pivots[0]);
    if (!lu.isInvertible() || rcond < 1e-14) {
      std::ostringstream msg;
      msg << "R recursion: singular matrix at n=" << n << " (rcond=" << rcond
          << ")";
      throw SingularSystem(msg.str());
    }
    b.reduction[n + 1] = lu.solve(b.services[n + 1].transpose()).transpose();
  }
  b.generator = b.rates[k - 1] - b.reduction[k - 1] * b.arrivals[k - 2];
  return b;
}

// ---------------------------------------------------------------------------
// Jump matrices

template <class T>
std::array<MatT<T>, 2> jumps_t(const MmkConfig& config, const T& s) {
  const int k = config.servers;
  const T l1(config.lambda(0)), l2(config.lambda(1));
  const T m1(config.mu(0)), m2(config.mu(1));
  MatT<T> a1 = MatT<T>::Zero(k, k), a2 = MatT<T>::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    a1(i, i) = l1 * (s + T(k - 1 - i) * m2) /
               (s + T(i + 1) * m1 + T(k - 1 - i) * m2);
    if (i > 0)
      a1(i - 1, i) = -l1 * T(k - i) * m2 / (s + T(i) * m1 + T(k - i) * m2);
    a2(i, i) = l2 * (s + T(i) * m1) / (s + T(i) * m1 + T(k - i) * m2);
    if (i < k - 1)
      a2(i + 1, i) = -l2 * T(i + 1) * m1 /
                     (s + T(i + 1) * m1 + T(k - 1 - i) * m2);
  }
  return {a1, a2};
}

template <class T>
std::array<MatT<T>, 2> jump_derivatives_t(const MmkConfig& config, const T& s) {
  const int k = config.servers;
  const T l1(config.lambda(0)), l2(config.lambda(1));
  const T m1(config.mu(0)), m2(config.mu(1));
  auto sq = [](const T& v) { return v * v; };
  MatT<T> a1 = MatT<T>::Zero(k, k), a2 = MatT<T>::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    a1(i, i) = l1 * T(i + 1) * m1 / sq(s + T(i + 1) * m1 + T(k - 1 - i) * m2);
    if (i > 0)
      a1(i - 1, i) = l1 * T(k - i) * m2 / sq(s + T(i) * m1 + T(k - i) * m2);
    a2(i, i) = l2 * T(k - i) * m2 / sq(s + T(i) * m1 + T(k - i) * m2);
    if (i < k - 1)
      a2(i + 1, i) =
          l2 * T(i + 1) * m1 / sq(s + T(i + 1) * m1 + T(k - 1 - i) * m2);
  }
  return {a1, a2};
}

/// Bidiagonal bands of H_1 (upper), H_2 (lower) and their derivatives at
/// one lattice point.
template <class T>
struct Bands {
  std::vector<T> h1_diag, h1_upper, h2_diag, h2_lower;
  std::vector<T> g1_diag, g1_upper, g2_diag, g2_lower;

  explicit Bands(int k)
      : h1_diag(k), h1_upper(k), h2_diag(k), h2_lower(k),
        g1_diag(k), g1_upper(k), g2_diag(k), g2_lower(k) {}
};

template <class T>
class BandBuilder {
 public:
  explicit BandBuilder(const MmkConfig& config)
      : k_(config.servers),
        l1_(config.lambda(0)), l2_(config.lambda(1)),
        m1_(config.mu(0)), m2_(config.mu(1)), busy_rate_(k_ + 1) {
    // busy_rate_[m] = m mu_1 + (k - m) mu_2
    for (int m = 0; m <= k_; ++m)
      busy_rate_[m] = T(m) * m1_ + T(k_ - m) * m2_;
  }

  void fill(const T& x, Bands<T>& b) const {
    const T inv_x = T(1) / x;
    const T inv_x2 = inv_x * inv_x;
    for (int r = 0; r < k_; ++r) {
      const T den1 = x + busy_rate_[r + 1];
      const T inv1 = T(1) / den1;
      const T a1d = l1_ * (x + T(k_ - 1 - r) * m2_) * inv1;
      const T a1u = -l1_ * T(k_ - 1 - r) * m2_ * inv1;
      const T a1d_p = l1_ * T(r + 1) * m1_ * inv1 * inv1;
      const T a1u_p = l1_ * T(k_ - 1 - r) * m2_ * inv1 * inv1;
      b.h1_diag[r] = a1d * inv_x;
      b.h1_upper[r] = a1u * inv_x;
      b.g1_diag[r] = a1d_p * inv_x - a1d * inv_x2;
      b.g1_upper[r] = a1u_p * inv_x - a1u * inv_x2;

      const T den2 = x + busy_rate_[r];
      const T inv2 = T(1) / den2;
      const T a2d = l2_ * (x + T(r) * m1_) * inv2;
      const T a2l = -l2_ * T(r) * m1_ * inv2;
      const T a2d_p = l2_ * T(k_ - r) * m2_ * inv2 * inv2;
      const T a2l_p = l2_ * T(r) * m1_ * inv2 * inv2;
      b.h2_diag[r] = a2d * inv_x;
      b.h2_lower[r] = a2l * inv_x;
      b.g2_diag[r] = a2d_p * inv_x - a2d * inv_x2;
      b.g2_lower[r] = a2l_p * inv_x - a2l * inv_x2;
    }
  }

 private:
  int k_;
  T l1_, l2_, m1_, m2_;
  std::vector<T> busy_rate_;
};

// Row-major k x k blocks inside flat buffers.

/// out += U * in, U upper bidiagonal
template <class T>
void add_upper(int k, const T* diag, const T* upper, const T* in, T* out) {
  for (int r = 0; r < k; ++r) {
    const T& d = diag[r];
    const T* row = in + r * k;
    T* dst = out + r * k;
    for (int c = 0; c < k; ++c) dst[c] += d * row[c];
    if (r + 1 < k) {
      const T& u = upper[r];
      const T* next = in + (r + 1) * k;
      for (int c = 0; c < k; ++c) dst[c] += u * next[c];
    }
  }
}

/// out += L * in, L lower bidiagonal
template <class T>
void add_lower(int k, const T* diag, const T* lower, const T* in, T* out) {
  for (int r = 0; r < k; ++r) {
    const T& d = diag[r];
    const T* row = in + r * k;
    T* dst = out + r * k;
    for (int c = 0; c < k; ++c) dst[c] += d * row[c];
    if (r > 0) {
      const T& l = lower[r];
      const T* prev = in + (r - 1) * k;
      for (int c = 0; c < k; ++c) dst[c] += l * prev[c];
    }
  }
}

template <class T>
MatT<T> from_row_major(int k, const std::vector<T>& flat) {
  MatT<T> m(k, k);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) m(r, c) = flat[r * k + c];
  return m;
}

// ---------------------------------------------------------------------------
// C(s) and C'(s)

template <class T>
struct Series {
  MatT<T> c, dc;  // scaled by exp(-log_scale)
  double log_scale = 0.0;
  SeriesDiagnostics diagnostics;
};

template <class T>
Series<T> series_t(const MmkConfig& config, const MatT<T>& generator,
                   double s_value, const SeriesControl& control) {
  using std::abs;
  using std::log;
  const int k = config.servers;
  const int kk = k * k;
  const T s(s_value), t1(config.theta(0)), t2(config.theta(1));
  const BandBuilder<T> builder(config);
  TruncationMonitor monitor(control);

  // Sum_{ij} D_ij C_ij = S0 + B S1 and
  // Sum_{ij} (D'_ij C_ij + D_ij C'_ij) = T0 + B (T1 - S2), where
  // S_m = sum C_ij / x^m, T_m = sum C'_ij / x^m, x = s + i t1 + j t2.
  std::vector<T> s0(kk, T(0)), s1(kk, T(0)), s2(kk, T(0)), d0(kk, T(0)),
      d1(kk, T(0));
  double acc_log = 0.0;

  std::vector<T> prev_c(kk, T(0)), prev_d(kk, T(0)), cur_c(kk), cur_d(kk);
  for (int r = 0; r < k; ++r) {
    prev_c[r * k + r] = T(1);
    s0[r * k + r] = T(1);
    s1[r * k + r] = T(1) / s;
    s2[r * k + r] = T(1) / (s * s);
  }
  double prev_log = 0.0;
  monitor.add_diagonal(std::log(static_cast<double>(k)));

  std::vector<Bands<T>> bands;
  std::vector<T> ds0(kk), ds1(kk), ds2(kk), dd0(kk), dd1(kk);
  const T zero(0);

  bool stop = false;
  for (int n = 1; !stop; ++n) {
    // Bands at every point of diagonal n-1 (index i = class-1 steps).
    if (static_cast<int>(bands.size()) < n) bands.resize(n, Bands<T>(k));
    for (int i = 0; i < n; ++i) {
      const int j = n - 1 - i;
      builder.fill(s + T(i) * t1 + T(j) * t2, bands[i]);
    }

    const std::size_t used = static_cast<std::size_t>(n + 1) * kk;
    if (cur_c.size() < used) {
      cur_c.resize(used);
      cur_d.resize(used);
    }
    std::fill(cur_c.begin(), cur_c.begin() + used, zero);
    std::fill(cur_d.begin(), cur_d.begin() + used, zero);
    T max_abs(0);
    for (int i = 0; i <= n; ++i) {
      const int j = n - i;
      T* c = cur_c.data() + static_cast<std::size_t>(i) * kk;
      T* d = cur_d.data() + static_cast<std::size_t>(i) * kk;
      if (i > 0) {  // step H_1 from (i-1, j)
        const Bands<T>& b = bands[i - 1];
        const T* pc = prev_c.data() + static_cast<std::size_t>(i - 1) * kk;
        const T* pd = prev_d.data() + static_cast<std::size_t>(i - 1) * kk;
        add_upper(k, b.h1_diag.data(), b.h1_upper.data(), pc, c);
        add_upper(k, b.h1_diag.data(), b.h1_upper.data(), pd, d);
        add_upper(k, b.g1_diag.data(), b.g1_upper.data(), pc, d);
      }
      if (j > 0) {  // step H_2 from (i, j-1)
        const Bands<T>& b = bands[i];
        const T* pc = prev_c.data() + static_cast<std::size_t>(i) * kk;
        const T* pd = prev_d.data() + static_cast<std::size_t>(i) * kk;
        add_lower(k, b.h2_diag.data(), b.h2_lower.data(), pc, c);
        add_lower(k, b.h2_diag.data(), b.h2_lower.data(), pd, d);
        add_lower(k, b.g2_diag.data(), b.g2_lower.data(), pc, d);
      }
      for (int e = 0; e < kk; ++e) {
        const T ac = abs(c[e]), ad = abs(d[e]);
        if (ac > max_abs) max_abs = ac;
        if (ad > max_abs) max_abs = ad;
      }
    }

    double log_mass = -std::numeric_limits<double>::infinity();
    double diag_log = prev_log;
    if (max_abs > zero) {
      const T inv = T(1) / max_abs;
      diag_log = prev_log + to_double(log(max_abs));
      std::fill(ds0.begin(), ds0.end(), zero);
      std::fill(ds1.begin(), ds1.end(), zero);
      std::fill(ds2.begin(), ds2.end(), zero);
      std::fill(dd0.begin(), dd0.end(), zero);
      std::fill(dd1.begin(), dd1.end(), zero);
      T mass(0);
      for (int i = 0; i <= n; ++i) {
        const int j = n - i;
        const T ix = T(1) / (s + T(i) * t1 + T(j) * t2);
        const T ix2 = ix * ix;
        T* c = cur_c.data() + static_cast<std::size_t>(i) * kk;
        T* d = cur_d.data() + static_cast<std::size_t>(i) * kk;
        for (int e = 0; e < kk; ++e) {
          c[e] *= inv;
          d[e] *= inv;
          ds0[e] += c[e];
          ds1[e] += c[e] * ix;
          ds2[e] += c[e] * ix2;
          dd0[e] += d[e];
          dd1[e] += d[e] * ix;
          mass += abs(c[e]) + abs(d[e]);
        }
      }
      log_mass = diag_log + to_double(log(mass));

      T f_acc(1), f_diag(1);
      if (diag_log > acc_log) {
        f_acc = T(std::exp(acc_log - diag_log));
        acc_log = diag_log;
      } else {
        f_diag = T(std::exp(diag_log - acc_log));
      }
      for (int e = 0; e < kk; ++e) {
        s0[e] = s0[e] * f_acc + ds0[e] * f_diag;
        s1[e] = s1[e] * f_acc + ds1[e] * f_diag;
        s2[e] = s2[e] * f_acc + ds2[e] * f_diag;
        d0[e] = d0[e] * f_acc + dd0[e] * f_diag;
        d1[e] = d1[e] * f_acc + dd1[e] * f_diag;
      }
    }
    stop = monitor.add_diagonal(log_mass);
    std::swap(prev_c, cur_c);
    std::swap(prev_d, cur_d);
    prev_log = diag_log;
  }

  Series<T> out;
  const MatT<T> m_s1 = from_row_major(k, s1);
  out.c = from_row_major(k, s0) + generator * m_s1;
  out.dc = from_row_major(k, d0) +
           generator * (from_row_major(k, d1) - from_row_major(k, s2));
  out.log_scale = acc_log;
  out.diagnostics = monitor.diagnostics();
  return out;
}

void require_converged(const SeriesDiagnostics& d, double s, int max_diag) {
  if (!d.converged) {
    std::ostringstream msg;
    msg << "C(s) series at s=" << s << " did not converge within " << max_diag
        << " diagonals";
    throw ConvergenceError(msg.str());
  }
}

// ---------------------------------------------------------------------------
// General solve at one working precision

/// log10 of sum_j sum_i |x_i| |m_ij| over |sum_j sum_i x_i m_ij|.
template <class T>
double cancellation(const VecT<T>& x, const MatT<T>& m) {
  using std::abs;
  using std::log10;
  const T num = (x.cwiseAbs().transpose() * m.cwiseAbs()).sum();
  const T den = abs((x.transpose() * m).sum());
  if (!(den > T(0))) return std::numeric_limits<double>::infinity();
  return to_double(log10(num / den));
}

template <class T>
MmkSolution solve_general_t(const MmkConfig& config,
                            const SeriesControl& control, int digits) {
  using std::exp;
  const int k = config.servers;
  const Boundary<T> boundary = boundary_t<T>(config);

  std::array<Series<T>, 2> series;
  series[0] = series_t<T>(config, boundary.generator, config.theta(0), control);
  require_converged(series[0].diagnostics, config.theta(0),
                    control.max_diagonal);
  if (config.theta(1) == config.theta(0)) {
    series[1] = series[0];
  } else {
    series[1] =
        series_t<T>(config, boundary.generator, config.theta(1), control);
    require_converged(series[1].diagnostics, config.theta(1),
                      control.max_diagonal);
  }

  const auto a0 = jumps_t<T>(config, T(0));
  const auto a0p = jump_derivatives_t<T>(config, T(0));

  // Everything below is expressed relative to exp(log_max).
  const double log_max =
      std::max({0.0, series[0].log_scale, series[1].log_scale});
  std::array<T, 2> rel;
  for (int c = 0; c < 2; ++c)
    rel[c] = T(std::exp(series[c].log_scale - log_max));
  const T shrink = exp(T(-log_max));

  // p_{k-1} (Delta - R Lambda + sum_i C(theta_i) A_i(0)) = 0
  MatT<T> system = boundary.generator * shrink;
  for (int c = 0; c < 2; ++c) system += rel[c] * series[c].c * a0[c];

  // Row and column equilibration: the system is strongly graded across
  // server-mix states. With S M E, the left null vector is p = S q.
  // Rows that vanish to working precision (states an absent class cannot
  // reach) are left alone so that they stay numerically zero.
  VecT<T> row_scale = VecT<T>::Ones(k);
  MatT<T> scaled = system;
  T largest_row(0);
  for (int r = 0; r < k; ++r) largest_row = std::max(largest_row, T(system.row(r).norm()));
  const T negligible = largest_row * T(std::pow(10.0, 2.0 - digits));
  std::vector<bool> frozen(k);
  for (int r = 0; r < k; ++r) frozen[r] = !(system.row(r).norm() > negligible);
  for (int sweep = 0; sweep < 8; ++sweep) {
    for (int r = 0; r < k; ++r) {
      const T norm = scaled.row(r).norm();
      if (!frozen[r] && norm > T(0)) {
        scaled.row(r) /= norm;
        row_scale[r] /= norm;
      }
    }
    for (int c = 0; c < k; ++c) {
      const T norm = scaled.col(c).norm();
      if (norm > T(0)) scaled.col(c) /= norm;
    }
  }
  Eigen::JacobiSVD<MatT<T>> svd(scaled.transpose(), Eigen::ComputeFullV);
  const VecT<T> sv = svd.singularValues();
  const T smax = sv[0];
  const T smin = sv[k - 1];
  const T snext = sv[k - 2];
  const double tail = std::max(series[0].diagnostics.tail_bound,
                               series[1].diagnostics.tail_bound);
  const T accept(std::max(1e-7, 1e4 * tail));
  if (!(smax > T(0)) || smin > accept * smax || smin > T(1e-2) * snext) {
    std::ostringstream msg;
    msg << "boundary system null space is not one-dimensional; singular values "
        << describe(sv) << " at " << digits << " digits";
    throw SingularSystem(msg.str());
  }
  VecT<T> top = row_scale.cwiseProduct(svd.matrixV().col(k - 1));
  Eigen::Index big = 0;
  top.cwiseAbs().maxCoeff(&big);
  if (top[big] < T(0)) top = -top;

  std::vector<VecT<T>> p(k);
  p[k - 1] = top;
  for (int n = k - 2; n >= 0; --n)
    p[n] = boundary.reduction[n + 1].transpose() * p[n + 1];

  // phi(0) = p_{k-1} sum_i (C(theta_i) A_i'(0) + C'(theta_i) A_i(0))
  MatT<T> phi_op = MatT<T>::Zero(k, k);
  for (int c = 0; c < 2; ++c)
    phi_op += rel[c] * (series[c].c * a0p[c] + series[c].dc * a0[c]);
  const VecT<T> phi_rel = phi_op.transpose() * top;

  T low(0);
  for (const auto& v : p) low += v.sum();
  // alpha = 1 / (low + exp(log_max) phi.e); beta = alpha exp(log_max)
  const T beta = T(1) / (low * shrink + phi_rel.sum());
  const T alpha = beta * shrink;

  MmkSolution sol;
  sol.path = SolutionPath::kGeneral;
  sol.form = SolutionForm::kFull;
  sol.working_digits = digits;
  sol.p_vectors.resize(k);
  bool clamped = false;
  for (int n = 0; n < k; ++n) {
    const VecT<T> pn = alpha * p[n];
    sol.p_vectors[n] = to_double(pn);
    for (Eigen::Index i = 0; i < pn.size(); ++i) {
      if (pn[i] < T(-1e-12)) {
        std::ostringstream msg;
        msg << "negative boundary probability " << to_double(pn[i]) << " in p_"
            << n << "; truncation too coarse";
        throw SingularSystem(msg.str());
      }
      if (pn[i] < T(0)) {
        sol.p_vectors[n][i] = 0.0;
        clamped = true;
      }
    }
  }
  double lost = cancellation<T>(top, phi_op);
  for (int c = 0; c < 2; ++c) {
    const MatT<T> cr = rel[c] * series[c].c;
    const MatT<T> dcr = rel[c] * series[c].dc;
    sol.psi_theta[c] = to_double(VecT<T>(beta * (cr.transpose() * top)));
    sol.dpsi_theta[c] = to_double(VecT<T>(beta * (dcr.transpose() * top)));
    lost = std::max({lost, cancellation<T>(top, cr), cancellation<T>(top, dcr)});
  }
  sol.phi0 = to_double(VecT<T>(beta * phi_rel));
  if (clamped) {
    const double total = sol.total_mass();
    for (auto& v : sol.p_vectors) v /= total;
    for (int c = 0; c < 2; ++c) {
      sol.psi_theta[c] /= total;
      sol.dpsi_theta[c] /= total;
    }
    sol.phi0 /= total;
  }
  sol.cancellation_digits = std::max(0.0, lost);
  sol.truncation_diagonal_used =
      std::max(series[0].diagnostics.diagonals_used,
               series[1].diagnostics.diagonals_used);
  sol.tail_bound = tail * std::pow(10.0, sol.cancellation_digits);
  return sol;
}

MmkSolution solve_at_digits(const MmkConfig& config,
                            const SeriesControl& control, int digits) {
  if (digits <= 16) return solve_general_t<double>(config, control, 16);
  if (digits <= 31)
    return solve_general_t<detail::DoubleDouble>(config, control, 31);
  if (digits <= 50) return solve_general_t<MpReal<50>>(config, control, 50);
  if (digits <= 100) return solve_general_t<MpReal<100>>(config, control, 100);
  return solve_general_t<MpReal<200>>(config, control, 200);
}

// Accept double precision while fewer digits than this are cancelled.
constexpr double kDoubleCancellationLimit = 2.5;
constexpr int kMaxDigits = 200;
// Digits kept beyond the cancelled ones in extended precision.
constexpr int kGuardDigits = 12;

// Reneging measures divide by 1 - P(serve), which magnifies absolute errors
// in P(serve) by this many digits.
double reneging_amplification(const MmkSolution& sol, const MmkConfig& config) {
  double digits = 0.0;
  for (int c = 0; c < 2; ++c) {
    if (!(config.lambda(c) > 0.0)) continue;
    const double renege = 1.0 - sol.p_serve(c);
    if (renege > 0.0) digits = std::max(digits, -std::log10(renege));
  }
  return digits;
}

SeriesControl tightened(const SeriesControl& control, double lost_digits,
                        int digits) {
  SeriesControl out = control;
  const double exponent =
      std::max(std::log10(control.tolerance) - lost_digits - 1.0,
               -(digits - 5.0));
  out.tolerance = std::min(control.tolerance, std::pow(10.0, exponent));
  return out;
}

MmkSolution solve_general(const MmkConfig& config) {
  const SeriesControl& control = config.series;
  if (control.working_digits != 0)
    return solve_at_digits(config, control, control.working_digits);

  double lost = 19.0;
  try {
    MmkSolution sol = solve_at_digits(config, tightened(control, 3.0, 16), 16);
    const double needed = sol.cancellation_digits + reneging_amplification(sol, config);
    if (needed <= kDoubleCancellationLimit) return sol;
    lost = needed;
  } catch (const SingularSystem&) {
  }
  for (int attempt = 0;; ++attempt) {
    const int digits = static_cast<int>(std::ceil(lost)) + kGuardDigits;
    try {
      MmkSolution sol =
          solve_at_digits(config, tightened(control, lost, digits), digits);
      if (sol.cancellation_digits + 10.0 <= sol.working_digits ||
          sol.working_digits >= kMaxDigits)
        return sol;
      lost = std::max(sol.cancellation_digits, 2.0 * lost);
    } catch (const SingularSystem&) {
      if (digits >= kMaxDigits || attempt >= 6) throw;
      lost = 2.0 * lost;
    }
  }
}

MmkSolution empty_solution(int k) {
  MmkSolution sol;
  sol.path = SolutionPath::kEmpty;
  sol.form = SolutionForm::kFull;
  for (int n = 0; n < k; ++n) sol.p_vectors.push_back(Vector::Zero(n + 1));
  sol.p_vectors[0][0] = 1.0;
  const double psi = k == 1 ? 1.0 : 0.0;
  for (int c = 0; c < 2; ++c) {
    sol.psi_theta[c] = Vector::Constant(k, psi);
    sol.dpsi_theta[c] = Vector::Zero(k);
  }
  sol.phi0 = Vector::Zero(k);
  return sol;
}

MmkSolution from_single_server(const MmkConfig& config) {
  const Mg1Solution m = solve_mg1(config.as_mg1());
  MmkSolution sol;
  sol.path = SolutionPath::kSingleServer;
  sol.form = SolutionForm::kFull;
  sol.p_vectors = {Vector::Constant(1, m.p0)};
  for (int c = 0; c < 2; ++c) {
    sol.psi_theta[c] = Vector::Constant(1, m.psi(config.theta(c)));
    sol.dpsi_theta[c] = Vector::Constant(1, m.dpsi(config.theta(c)));
  }
  sol.phi0 = Vector::Constant(1, 1.0 - m.p0);
  sol.truncation_diagonal_used = m.truncation_diagonal_used;
  sol.tail_bound = m.tail_bound;
  return sol;
}

}  // namespace

// ---------------------------------------------------------------------------
// MmkSolution accessors

double MmkSolution::idle_mass() const {
  double m = 0.0;
  for (std::size_t n = 0; n + 1 < p_vectors.size(); ++n) m += p_vectors[n].sum();
  return m;
}

double MmkSolution::p_serve(int cls) const {
  return idle_mass() + psi_theta[cls].sum();
}

double MmkSolution::wait_moment(int cls) const {
  return -dpsi_theta[cls].sum();
}

double MmkSolution::total_mass() const {
  double m = phi0.sum();
  for (const auto& p : p_vectors) m += p.sum();
  return m;
}

// ---------------------------------------------------------------------------
// Public double-precision entry points

Matrix BoundaryMatrices::boundary_generator() const {
  const int k = servers;
  return rates[k - 1] - reduction[k - 1] * arrivals[k - 2];
}

BoundaryMatrices build_boundary(const MmkConfig& config) {
  config.validate();
  Boundary<double> b = boundary_t<double>(config);
  BoundaryMatrices out;
  out.servers = config.servers;
  out.arrivals = std::move(b.arrivals);
  out.services = std::move(b.services);
  out.rates = std::move(b.rates);
  out.reduction = std::move(b.reduction);
  return out;
}

std::array<Matrix, 2> arrival_jump_matrices(const MmkConfig& config, double s) {
  if (!(s >= 0.0)) throw std::domain_error("jump matrices need s >= 0");
  return jumps_t<double>(config, s);
}

std::array<Matrix, 2> arrival_jump_derivatives(const MmkConfig& config,
                                               double s) {
  if (!(s >= 0.0)) throw std::domain_error("jump matrices need s >= 0");
  return jump_derivatives_t<double>(config, s);
}

JumpMatrices jump_matrices(const MmkConfig& config,
                           const BoundaryMatrices& boundary, double s) {
  if (!(s > 0.0)) throw std::domain_error("jump_matrices: s must be positive");
  const int k = config.servers;
  auto [a1, a2] = arrival_jump_matrices(config, s);
  JumpMatrices j;
  j.d = Matrix::Identity(k, k) + boundary.boundary_generator() / s;
  j.h1 = a1 / s;
  j.h2 = a2 / s;
  j.a1 = std::move(a1);
  j.a2 = std::move(a2);
  return j;
}

CMatrixSeries c_matrix_series(const MmkConfig& config,
                              const BoundaryMatrices& boundary, double s) {
  if (!(s > 0.0)) throw std::domain_error("c_matrix_series: s must be positive");
  const Series<double> raw =
      series_t<double>(config, boundary.boundary_generator(), s, config.series);
  CMatrixSeries out;
  out.c = raw.c;
  out.dc = raw.dc;
  out.log_scale = raw.log_scale;
  out.diagnostics = raw.diagnostics;
  return out;
}

MmkSolution solve_mmk(const MmkConfig& config) {
  config.validate();
  const int k = config.servers;
  if (!(config.total_arrival_rate() > 0.0)) return empty_solution(k);
  if (k == 1) return from_single_server(config);
  return solve_general(config);
}

MmkSolution solve_mmk_equal_mu(const MmkConfig& config) {
  config.validate();
  const int k = config.servers;
  const double mu = config.mu(0);
  if (config.mu(1) != mu)
    throw InvalidModel("solve_mmk_equal_mu requires equal service rates");
  const double lam = config.total_arrival_rate();

  // p_n proportional to rho^n / n!, normalized over n < k (log domain).
  std::vector<double> weights(k, 0.0);
  if (lam > 0.0) {
    const double log_rho = std::log(lam / mu);
    double mx = -std::numeric_limits<double>::infinity();
    for (int n = 0; n < k; ++n) {
      weights[n] = n * log_rho - std::lgamma(n + 1.0);
      mx = std::max(mx, weights[n]);
    }
    double total = 0.0;
    for (auto& w : weights) total += (w = std::exp(w - mx));
    for (auto& w : weights) w /= total;
  } else {
    weights[0] = 1.0;
  }

  // c(s) is the single-server series with service Exp(k mu).
  Mg1Config scalar;
  scalar.series = config.series;
  for (int c = 0; c < 2; ++c) {
    scalar.classes[c].arrival_rate = config.lambda(c);
    scalar.classes[c].service = ServiceModel::exponential(k * mu);
    scalar.classes[c].patience = config.classes[c].patience;
  }
  std::array<CSeriesResult, 2> series;
  for (int c = 0; c < 2; ++c) {
    series[c] = c_series(scalar, config.theta(c));
    require_converged(series[c].diagnostics, config.theta(c),
                      config.series.max_diagonal);
  }

  const double log_max = std::max(
      {0.0, series[0].value.log_scale, series[1].value.log_scale});
  std::array<double, 2> c_rel, dc_rel;
  for (int c = 0; c < 2; ++c) {
    const double f = std::exp(series[c].value.log_scale - log_max);
    c_rel[c] = series[c].value.mantissa * f;
    dc_rel[c] = series[c].derivative.mantissa * f;
  }
  const double w_top = weights[k - 1];
  // p_{k-1} = w / (1 + w sum_i c_i lambda_i / (k mu)); beta = p_{k-1} e^{log_max}
  double denom = std::exp(-log_max);
  for (int c = 0; c < 2; ++c)
    denom += w_top * c_rel[c] * config.lambda(c) / (k * mu);
  const double beta = w_top / denom;

  MmkSolution sol;
  sol.path = SolutionPath::kEqualMu;
  sol.form = SolutionForm::kAggregated;
  double busy_share = 0.0;  // phi(0) e
  for (int c = 0; c < 2; ++c) {
    const double psi = beta * c_rel[c];
    sol.psi_theta[c] = Vector::Constant(1, psi);
    sol.dpsi_theta[c] = Vector::Constant(1, beta * dc_rel[c]);
    busy_share += psi * config.lambda(c) / (k * mu);
  }
  const double scale = 1.0 - busy_share;
  for (int n = 0; n < k; ++n)
    sol.p_vectors.push_back(Vector::Constant(1, scale * weights[n]));
  sol.phi0 = Vector::Constant(1, busy_share);
  sol.truncation_diagonal_used = std::max(series[0].diagnostics.diagonals_used,
                                          series[1].diagnostics.diagonals_used);
  sol.tail_bound = std::max(series[0].diagnostics.tail_bound,
                            series[1].diagnostics.tail_bound);
  return sol;
}

}  // namespace twoclass
