#include "tebd.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "errors.hpp"

#ifdef WDT_HAVE_LAPACKE
#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>
#endif

namespace wdt {

namespace {

using cplx = std::complex<double>;
using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

struct SvdEcon {
  Eigen::MatrixXcd u;   // m x k
  Eigen::VectorXd s;    // k
  Eigen::MatrixXcd vt;  // k x n
};

SvdEcon svd_econ(Eigen::MatrixXcd a) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  const int k = std::min(m, n);
  SvdEcon r;
#ifdef WDT_HAVE_LAPACKE
  r.u.resize(m, k);
  r.s.resize(k);
  r.vt.resize(k, n);
  const lapack_int info = LAPACKE_zgesdd(
      LAPACK_COL_MAJOR, 'S', m, n, a.data(), m, r.s.data(), r.u.data(), m, r.vt.data(), k);
  if (info == 0) return r;
  // fall through to the Eigen path on convergence failure
#endif
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  r.u = svd.matrixU();
  r.s = svd.singularValues();
  r.vt = svd.matrixV().adjoint();
  return r;
}

}  // namespace

void TebdOptions::validate() const {
  if (d < 2) throw ConfigError("tebd: d must be >= 2");
  if (d_max < 1) throw ConfigError("tebd: d_max must be >= 1");
  if (!(dt_real > 0.0) || !(dt_imag > 0.0))
    throw ConfigError("tebd: time steps must be positive");
  if (!(svd_rel_cutoff >= 0.0 && svd_rel_cutoff < 1.0))
    throw ConfigError("tebd: svd_rel_cutoff out of range");
}

// ---------------------------------------------------------------------------
// Mpo
// ---------------------------------------------------------------------------

Mpo::Mpo(int n_sites, int d) : n_sites_(n_sites), d_(d) {
  if (n_sites < 2) throw ConfigError("mpo: need at least 2 sites");
  bond_.assign(n_sites - 1, 1);
  a_.resize(n_sites);
  for (int l = 0; l < n_sites; ++l) {
    a_[l].assign(static_cast<size_t>(d) * d, cplx(0.0, 0.0));
    for (int i = 0; i < d; ++i) a_[l][static_cast<size_t>(i) * d + i] = 1.0;
  }
}

int Mpo::max_bond() const {
  int m = 1;
  for (int b : bond_) m = std::max(m, b);
  return m;
}

std::complex<double> Mpo::trace_mantissa() const {
  Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Ones(1);
  for (int l = 0; l < n_sites_; ++l) {
    const int dl = dim_left(l), dr = dim_right(l);
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(dl, dr);
    const auto& a = a_[l];
    for (int i = 0; i < d_; ++i) {
      Eigen::Map<const RowMat, 0, Eigen::OuterStride<>> blk(
          a.data() + static_cast<size_t>(i * d_ + i) * dr, dl, dr,
          Eigen::OuterStride<>(static_cast<Eigen::Index>(d_) * d_ * dr));
      t += blk;
    }
    v = v * t;
  }
  return v(0);
}

std::complex<double> Mpo::trace() const { return trace_mantissa() * std::exp(log_norm); }

Eigen::MatrixXcd Mpo::dense() const {
  // env[(I,J), b]: accumulated coefficients for the first l sites
  long dim = 1;
  Eigen::MatrixXcd env = Eigen::MatrixXcd::Ones(1, 1);
  for (int l = 0; l < n_sites_; ++l) {
    const int dl = dim_left(l), dr = dim_right(l);
    const long ndim = dim * d_;
    Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(ndim * ndim, dr);
    const auto& a = a_[l];
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) {
        Eigen::Map<const RowMat, 0, Eigen::OuterStride<>> blk(
            a.data() + static_cast<size_t>(i * d_ + j) * dr, dl, dr,
            Eigen::OuterStride<>(static_cast<Eigen::Index>(d_) * d_ * dr));
        // rows of env are (I, J); expand to (I i, J j)
        for (long ii = 0; ii < dim; ++ii)
          for (long jj = 0; jj < dim; ++jj) {
            const long row = (ii * d_ + i) * ndim + (jj * d_ + j);
            next.row(row) += env.row(ii * dim + jj) * blk;
          }
      }
    env = std::move(next);
    dim = ndim;
  }
  Eigen::MatrixXcd out(dim, dim);
  for (long r = 0; r < dim * dim; ++r) out(r / dim, r % dim) = env(r, 0);
  return out * std::exp(log_norm);
}

void Mpo::normalize() {
  for (int l = 0; l < n_sites_; ++l) {
    double nrm2 = 0.0;
    for (const cplx& c : a_[l]) nrm2 += std::norm(c);
    const double nrm = std::sqrt(nrm2);
    if (!(nrm > 0.0)) throw NumericError("mpo: zero site tensor");
    const double inv = 1.0 / nrm;
    for (cplx& c : a_[l]) c *= inv;
    log_norm += std::log(nrm);
  }
}

ScaledTrace trace_product(const Mpo& a, const Mpo& b) {
  if (a.n_sites() != b.n_sites() || a.d() != b.d())
    throw ConfigError("trace_product: incompatible MPOs");
  const int d = a.d();
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Ones(1, 1);
  for (int l = 0; l < a.n_sites(); ++l) {
    const int dla = a.dim_left(l), dra = a.dim_right(l);
    const int dlb = b.dim_left(l), drb = b.dim_right(l);
    Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(dra, drb);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        Eigen::Map<const RowMat, 0, Eigen::OuterStride<>> am(
            a.site(l).data() + static_cast<size_t>(i * d + j) * dra, dla, dra,
            Eigen::OuterStride<>(static_cast<Eigen::Index>(d) * d * dra));
        Eigen::Map<const RowMat, 0, Eigen::OuterStride<>> bm(
            b.site(l).data() + static_cast<size_t>(j * d + i) * drb, dlb, drb,
            Eigen::OuterStride<>(static_cast<Eigen::Index>(d) * d * drb));
        next += am.transpose() * v * bm;
      }
    v = std::move(next);
  }
  return {v(0, 0), a.log_norm + b.log_norm};
}

// ---------------------------------------------------------------------------
// TebdEngine
// ---------------------------------------------------------------------------

TebdEngine::TebdEngine(const BhmParams& p, const TebdOptions& opt) : p_(p), opt_(opt) {
  p_.validate();
  opt_.validate();
}

Eigen::MatrixXcd TebdEngine::bond_hamiltonian(int l, double lambda) const {
  const int d = opt_.d;
  if (l < 0 || l >= p_.m_sites - 1) throw ConfigError("tebd: bond index out of range");
  Eigen::MatrixXcd aop = Eigen::MatrixXcd::Zero(d, d);
  for (int n = 1; n < d; ++n) aop(n - 1, n) = std::sqrt(static_cast<double>(n));
  const Eigen::MatrixXcd adag = aop.adjoint();
  Eigen::MatrixXcd num = adag * aop;
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);

  auto site_term = [&](int m) {
    Eigen::MatrixXcd s = 0.5 * p_.interaction * num * (num - id) - p_.chem_potential * num;
    if (m == p_.impurity_site) s += lambda * p_.eta * num;
    return s;
  };
  const double wl = (l == 0) ? 1.0 : 0.5;
  const double wr = (l == p_.m_sites - 2) ? 1.0 : 0.5;
  Eigen::MatrixXcd h = -p_.hopping * (kron(adag, aop) + kron(aop, adag));
  h += wl * kron(site_term(l), id);
  h += wr * kron(id, site_term(l + 1));
  return h;
}

TebdEngine::GateSet TebdEngine::make_gates(std::complex<double> c_left, double lambda_left,
                                           std::complex<double> c_right,
                                           double lambda_right) const {
  GateSet g;
  const int nb = p_.m_sites - 1;
  g.left.resize(c_left != 0.0 ? nb : 0);
  g.right.resize(c_right != 0.0 ? nb : 0);
  for (int l = 0; l < nb; ++l) {
    if (c_left != 0.0) {
      const Eigen::MatrixXcd h = bond_hamiltonian(l, lambda_left);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
      const Eigen::VectorXcd ph =
          (0.5 * c_left * es.eigenvalues().cast<cplx>().array()).exp();
      g.left[l] = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    }
    if (c_right != 0.0) {
      const Eigen::MatrixXcd h = bond_hamiltonian(l, lambda_right);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
      const Eigen::VectorXcd ph =
          (0.5 * c_right * es.eigenvalues().cast<cplx>().array()).exp();
      g.right[l] = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    }
  }
  return g;
}

void TebdEngine::bond_apply(Mpo& x, int l, const Eigen::MatrixXcd* left,
                            const Eigen::MatrixXcd* right, bool carry_left) const {
  const int d = opt_.d;
  const int dd = d * d;
  const int dl = x.dim_left(l);
  const int r = x.dim_right(l);
  const int dr = x.dim_right(l + 1);
  const int rows = dl * dd;
  const int cols = dd * dr;

  // Theta = A_l * A_{l+1}
  Eigen::Map<const RowMat> am(x.site(l).data(), rows, r);
  Eigen::Map<const RowMat> bm(x.site(l + 1).data(), r, cols);
  RowMat theta = am * bm;

  // gates on the (i1,i2) / (j1,j2) pairs, block by (bl, br)
  if (left || right) {
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic> m16(dd, dd);
    for (int bl = 0; bl < dl; ++bl)
      for (int br = 0; br < dr; ++br) {
        for (int i1 = 0; i1 < d; ++i1)
          for (int j1 = 0; j1 < d; ++j1)
            for (int i2 = 0; i2 < d; ++i2)
              for (int j2 = 0; j2 < d; ++j2)
                m16(i1 * d + i2, j1 * d + j2) =
                    theta((bl * d + i1) * d + j1, (i2 * d + j2) * dr + br);
        if (left) m16 = (*left) * m16;
        if (right) m16 = m16 * (*right);
        for (int i1 = 0; i1 < d; ++i1)
          for (int j1 = 0; j1 < d; ++j1)
            for (int i2 = 0; i2 < d; ++i2)
              for (int j2 = 0; j2 < d; ++j2)
                theta((bl * d + i1) * d + j1, (i2 * d + j2) * dr + br) =
                    m16(i1 * d + i2, j1 * d + j2);
      }
  }

  Eigen::MatrixXcd th = theta;  // column-major copy for the SVD
  SvdEcon svd = svd_econ(std::move(th));

  const int kfull = static_cast<int>(svd.s.size());
  double total2 = 0.0;
  for (int i = 0; i < kfull; ++i) total2 += svd.s[i] * svd.s[i];
  if (!(total2 > 0.0)) throw NumericError("tebd: zero theta tensor in SVD");
  int keep = 0;
  const double floor_sv = opt_.svd_rel_cutoff * svd.s[0];
  while (keep < kfull && keep < opt_.d_max && svd.s[keep] > floor_sv) ++keep;
  if (keep == 0) keep = 1;
  double kept2 = 0.0;
  for (int i = 0; i < keep; ++i) kept2 += svd.s[i] * svd.s[i];
  x.discarded += (total2 - kept2) / total2;

  auto& al = x.site(l);
  al.assign(static_cast<size_t>(rows) * keep, cplx(0.0, 0.0));
  for (int row = 0; row < rows; ++row)
    for (int c = 0; c < keep; ++c)
      al[static_cast<size_t>(row) * keep + c] =
          carry_left ? svd.u(row, c) * svd.s[c] : svd.u(row, c);

  auto& ar = x.site(l + 1);
  ar.assign(static_cast<size_t>(keep) * cols, cplx(0.0, 0.0));
  for (int c = 0; c < keep; ++c)
    for (int col = 0; col < cols; ++col)
      ar[static_cast<size_t>(c) * cols + col] =
          carry_left ? svd.vt(c, col) : svd.s[c] * svd.vt(c, col);

  x.set_bond(l, keep);
}

void TebdEngine::sweep(Mpo& x, const GateSet& g, bool reverse) const {
  const int nb = p_.m_sites - 1;
  for (int idx = 0; idx < nb; ++idx) {
    const int l = reverse ? nb - 1 - idx : idx;
    const Eigen::MatrixXcd* gl = g.left.empty() ? nullptr : &g.left[l];
    const Eigen::MatrixXcd* gr = g.right.empty() ? nullptr : &g.right[l];
    bond_apply(x, l, gl, gr, reverse);
  }
}

void TebdEngine::apply_step(Mpo& x, std::complex<double> c_left, double lambda_left,
                            std::complex<double> c_right, double lambda_right) const {
  const GateSet g = make_gates(c_left, lambda_left, c_right, lambda_right);
  sweep(x, g, false);
  sweep(x, g, true);
  x.normalize();
}

Mpo TebdEngine::thermal_state(double beta, double lambda) const {
  if (!(beta > 0.0)) throw ConfigError("tebd: beta must be positive");
  Mpo rho = identity();
  const double half = 0.5 * beta;
  const int n = std::max(1, static_cast<int>(std::ceil(half / opt_.dt_imag)));
  const double dtau = half / n;
  for (int m = 0; m < n; ++m) apply_step(rho, -dtau, lambda, -dtau, lambda);
  return rho;
}

void TebdEngine::quench_left(Mpo& x, const QuenchSpec& q) const {
  q.validate();
  const int n = std::max(1, static_cast<int>(std::ceil(q.tau / opt_.dt_real)));
  const double dt = q.tau / n;
  for (int m = 1; m <= n; ++m) {
    const double t = opt_.midpoint_lambda ? (m - 0.5) * dt : (m - 1) * dt;
    apply_step(x, cplx(0.0, -dt), q.lambda_at(t), 0.0, 0.0);
  }
}

void TebdEngine::quench_right_dagger(Mpo& x, const QuenchSpec& q) const {
  q.validate();
  const int n = std::max(1, static_cast<int>(std::ceil(q.tau / opt_.dt_real)));
  const double dt = q.tau / n;
  for (int m = 1; m <= n; ++m) {
    const double t = opt_.midpoint_lambda ? (m - 0.5) * dt : (m - 1) * dt;
    apply_step(x, 0.0, 0.0, cplx(0.0, dt), q.lambda_at(t));
  }
}

CharFnSeries TebdEngine::chi_series(const QuenchSpec& q, double beta, double t_window,
                                    int n_steps) const {
  if (n_steps < 1) throw ConfigError("tebd: n_steps must be >= 1");
  if (!(t_window > 0.0)) throw ConfigError("tebd: t_window must be positive");
  const double l0 = q.lambda_start();
  const double ltau = q.lambda_end();

  // chi(u) = tr{(U_Q rho) B(u)} / tr rho with B(u) = e^{-iuH(l0)} U_Q^+ e^{iuH(ltau)};
  // B obeys a clean two-sided step while rho commutes with e^{-iuH(l0)}.
  Mpo a = thermal_state(beta, l0);
  quench_left(a, q);
  Mpo b = identity();
  quench_right_dagger(b, q);

  const ScaledTrace t0 = trace_product(a, b);
  if (!(std::abs(t0.mantissa) > 0.0))
    throw NumericError("tebd: vanishing normalization trace");

  CharFnSeries s;
  s.t_window = t_window;
  s.n_steps = n_steps;
  s.tau = q.tau;
  s.beta = beta;
  s.engine = "tebd";
  s.u.resize(n_steps);
  s.value.resize(n_steps);
  s.variance.assign(n_steps, 0.0);

  const double du = t_window / n_steps;
  const int sub = std::max(1, static_cast<int>(std::ceil(du / opt_.dt_real)));
  const double dt = du / sub;
  for (int j = 0; j < n_steps; ++j) {
    for (int m = 0; m < sub; ++m)
      apply_step(b, cplx(0.0, -dt), l0, cplx(0.0, dt), ltau);
    const ScaledTrace tj = trace_product(a, b);
    s.u[j] = du * (j + 1);
    s.value[j] = tj.mantissa / t0.mantissa * std::exp(tj.log_scale - t0.log_scale);
    if (!std::isfinite(s.value[j].real()) || !std::isfinite(s.value[j].imag()))
      throw NumericError("tebd: non-finite chi value");
  }
  s.truncation_weight = a.discarded + b.discarded;
  if (s.truncation_weight > opt_.trunc_warn_threshold)
    std::fprintf(stderr, "[wdt] warning: tebd truncation weight %.3e exceeds %.1e\n",
                 s.truncation_weight, opt_.trunc_warn_threshold);
  return s;
}

std::complex<double> TebdEngine::expectation_two_site(const Mpo& rho, int l,
                                                      const Eigen::MatrixXcd& op) const {
  const int d = opt_.d;
  if (l < 0 || l >= rho.n_sites() - 1) throw ConfigError("tebd: bond index out of range");
  auto site_sum = [&](int m) {
    const int dl = rho.dim_left(m), dr = rho.dim_right(m);
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(dl, dr);
    for (int i = 0; i < d; ++i) {
      Eigen::Map<const RowMat, 0, Eigen::OuterStride<>> blk(
          rho.site(m).data() + static_cast<size_t>(i * d + i) * dr, dl, dr,
          Eigen::OuterStride<>(static_cast<Eigen::Index>(d) * d * dr));
      t += blk;
    }
    return t;
  };
  Eigen::RowVectorXcd lv = Eigen::RowVectorXcd::Ones(1);
  for (int m = 0; m < l; ++m) lv = lv * site_sum(m);
  Eigen::VectorXcd rv = Eigen::VectorXcd::Ones(1);
  for (int m = rho.n_sites() - 1; m > l + 1; --m) rv = site_sum(m) * rv;

  const int dl = rho.dim_left(l), dm = rho.dim_right(l), dr = rho.dim_right(l + 1);
  cplx acc = 0.0;
  for (int i1 = 0; i1 < d; ++i1)
    for (int j1 = 0; j1 < d; ++j1) {
      Eigen::Map<const RowMat, 0, Eigen::OuterStride<>> a1(
          rho.site(l).data() + static_cast<size_t>(i1 * d + j1) * dm, dl, dm,
          Eigen::OuterStride<>(static_cast<Eigen::Index>(d) * d * dm));
      const Eigen::RowVectorXcd mid = lv * a1;
      for (int i2 = 0; i2 < d; ++i2)
        for (int j2 = 0; j2 < d; ++j2) {
          const cplx w = op(j1 * d + j2, i1 * d + i2);
          if (w == 0.0) continue;
          Eigen::Map<const RowMat, 0, Eigen::OuterStride<>> a2(
              rho.site(l + 1).data() + static_cast<size_t>(i2 * d + j2) * dr, dm, dr,
              Eigen::OuterStride<>(static_cast<Eigen::Index>(d) * d * dr));
          acc += w * (mid * a2 * rv)(0);
        }
    }
  const cplx tr = rho.trace_mantissa();
  if (!(std::abs(tr) > 0.0)) throw NumericError("tebd: vanishing trace");
  return acc / tr;
}

double TebdEngine::energy(const Mpo& rho, double lambda) const {
  double e = 0.0;
  for (int l = 0; l < p_.m_sites - 1; ++l)
    e += expectation_two_site(rho, l, bond_hamiltonian(l, lambda)).real();
  return e;
}

double TebdEngine::thermal_energy(double beta, double lambda) const {
  const Mpo rho = thermal_state(beta, lambda);
  return energy(rho, lambda);
}

}  // namespace wdt
