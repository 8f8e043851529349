#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "reference/dense_bhm.hpp"
#include "wdt/bogoliubov.hpp"
#include "wdt/errors.hpp"
#include "wdt/tebd.hpp"

using namespace wdt;
using cplx = std::complex<double>;

namespace {
BhmParams chain(int m, double u, double lambda_site = 0) {
  BhmParams p;
  p.m_sites = m;
  p.interaction = u;
  p.impurity_site = static_cast<int>(lambda_site);
  return p;
}

QuenchSpec ramp(double li, double lf, double tau) {
  QuenchSpec q;
  q.lambda_i = li;
  q.lambda_f = lf;
  q.tau = tau;
  return q;
}

Eigen::MatrixXcd dense_thermal(const BhmParams& p, int d, double beta, double lambda) {
  const Eigen::MatrixXcd h = ref::dense_bhm_hamiltonian(p, d, lambda);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXd ev = es.eigenvalues();
  Eigen::VectorXd w = (-beta * (ev.array() - ev.minCoeff())).exp();
  Eigen::MatrixXcd rho = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
  return rho / rho.trace().real();
}
}  // namespace

TEST_CASE("options and series guards") {
  TebdOptions opt;
  CHECK_NOTHROW(opt.validate());
  opt.d = 1;
  CHECK_THROWS_AS(opt.validate(), ConfigError);
  opt = TebdOptions{};
  opt.dt_real = 0.0;
  CHECK_THROWS_AS(opt.validate(), ConfigError);
  opt = TebdOptions{};
  opt.svd_rel_cutoff = 1.5;
  CHECK_THROWS_AS(opt.validate(), ConfigError);

  TebdEngine eng(chain(3, 1.0), TebdOptions{});
  CHECK_THROWS_AS((void)eng.chi_series(ramp(0, 1, 0.1), 1.0, 0.0, 8), ConfigError);
  CHECK_THROWS_AS((void)eng.chi_series(ramp(0, 1, 0.1), 1.0, 2.0, 0), ConfigError);
}

TEST_CASE("identity MPO") {
  Mpo id(5, 3);
  CHECK(std::abs(id.trace() - cplx(243.0, 0.0)) <= 1e-12 * 243.0);
  CHECK(id.max_bond() == 1);
  Mpo id2(3, 2);
  const Eigen::MatrixXcd m = id2.dense();
  CHECK((m - Eigen::MatrixXcd::Identity(8, 8)).norm() <= 1e-14);
}

TEST_CASE("normalize folds scale into log_norm without changing the operator") {
  TebdEngine eng(chain(3, 2.0), TebdOptions{});
  Mpo rho = eng.thermal_state(0.9, 0.4);
  const cplx t_before = rho.trace();
  const Eigen::MatrixXcd d_before = rho.dense();
  rho.normalize();
  const cplx t_after = rho.trace();
  CHECK(std::abs(t_before - t_after) <= 1e-12 * std::abs(t_before));
  CHECK((rho.dense() - d_before).norm() <= 1e-12 * d_before.norm());
}

TEST_CASE("trace_product agrees with dense traces") {
  TebdEngine eng(chain(3, 1.5, 1), TebdOptions{});
  Mpo a = eng.thermal_state(0.7, 0.3);
  Mpo b = eng.thermal_state(1.1, -0.2);
  const ScaledTrace st = trace_product(a, b);
  const cplx got = st.mantissa * std::exp(st.log_scale);
  const cplx want = (a.dense() * b.dense()).trace();
  CHECK(std::abs(got - want) <= 1e-10 * std::abs(want));
  // and the plain trace agrees too
  CHECK(std::abs(a.trace() - a.dense().trace()) <= 1e-10 * std::abs(a.trace()));
}

TEST_CASE("two-site thermal state is exact") {
  const BhmParams p = chain(2, 4.0);
  TebdEngine eng(p, TebdOptions{});
  Mpo rho = eng.thermal_state(1.0, 0.5);
  Eigen::MatrixXcd got = rho.dense();
  got /= got.trace().real();
  const Eigen::MatrixXcd want = dense_thermal(p, 4, 1.0, 0.5);
  CHECK((got - want).norm() <= 1e-9);
}

TEST_CASE("two-site thermal energy matches dense diagonalization") {
  const BhmParams p = chain(2, 4.0);
  TebdEngine eng(p, TebdOptions{});
  const double got = eng.thermal_energy(1.0, 0.0);
  const double want = ref::dense_thermal_energy(p, 4, 1.0, 0.0);
  CHECK(std::abs(got - want) <= 1e-6 * std::max(1.0, std::abs(want)));
}

TEST_CASE("thermal Trotter error is second order in dt_imag") {
  const BhmParams p = chain(3, 2.0, 1);
  const double beta = 1.0, lambda = 0.5;
  const double want = ref::dense_thermal_energy(p, 4, beta, lambda);
  TebdOptions o1;
  o1.dt_imag = 0.04;
  TebdOptions o2;
  o2.dt_imag = 0.02;
  const double e1 = std::abs(TebdEngine(p, o1).thermal_energy(beta, lambda) - want);
  const double e2 = std::abs(TebdEngine(p, o2).thermal_energy(beta, lambda) - want);
  REQUIRE(e1 > 1e-10);  // errors dominate roundoff at these steps
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.45));
}

TEST_CASE("low-temperature limit reaches the dense result") {
  const BhmParams p = chain(3, 4.0, 1);
  TebdOptions opt;
  opt.dt_imag = 0.01;
  TebdEngine eng(p, opt);
  const double got = eng.thermal_energy(20.0, 0.3);
  const double want = ref::dense_thermal_energy(p, 4, 20.0, 0.3);
  CHECK(got == doctest::Approx(want).epsilon(2e-3));
}

TEST_CASE("thermal state is Hermitian and positive") {
  TebdEngine eng(chain(3, 1.0, 1), TebdOptions{});
  Mpo rho = eng.thermal_state(1.2, 0.4);
  Eigen::MatrixXcd m = rho.dense();
  m /= m.trace().real();
  CHECK((m - m.adjoint()).norm() <= 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()));
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("unitary sandwich preserves the trace") {
  const BhmParams p = chain(4, 1.0, 2);
  TebdOptions opt;
  opt.d = 3;
  TebdEngine eng(p, opt);
  Mpo rho = eng.thermal_state(1.0, 0.0);
  const cplx t0 = rho.trace_mantissa();
  const double l0 = rho.log_norm;
  const QuenchSpec q = ramp(0.0, 1.0, 0.2);
  eng.quench_left(rho, q);
  eng.quench_right_dagger(rho, q);
  const cplx t1 = rho.trace_mantissa();
  const double l1 = rho.log_norm;
  const double rel = std::abs(t1 * std::exp(l1 - l0) - t0) / std::abs(t0);
  CHECK(rel <= 1e-7);
}

TEST_CASE("constant protocol has chi identically one") {
  const BhmParams p = chain(4, 1.0, 2);
  TebdOptions opt;
  opt.d = 3;
  TebdEngine eng(p, opt);
  const CharFnSeries s = eng.chi_series(ramp(0.4, 0.4, 0.3), 1.0, 1.5, 6);
  CHECK(s.engine == "tebd");
  for (int j = 0; j < s.n_steps; ++j) {
    CHECK(std::abs(s.value[j] - cplx(1.0, 0.0)) <= 1e-8);
  }
}

TEST_CASE("chi matches the dense four-unitary trace") {
  const BhmParams p = chain(3, 2.0, 1);
  TebdOptions opt;
  opt.dt_real = 0.002;
  TebdEngine eng(p, opt);
  const QuenchSpec q = ramp(0.0, 1.0, 0.2);
  const double beta = 1.0, t_window = 2.0;
  const int n_steps = 8;
  const CharFnSeries s = eng.chi_series(q, beta, t_window, n_steps);
  const auto want = ref::dense_chi_series(p, opt.d, q, beta, s.u, 2000);
  for (int j = 0; j < n_steps; ++j) {
    CHECK(std::abs(s.value[j] - want[j]) <= 1e-3);
    CHECK(std::abs(s.value[j]) <= 1.0 + 1e-6);
  }
  CHECK(s.truncation_weight >= 0.0);
}

TEST_CASE("bond dimension cap binds and truncation is recorded") {
  const BhmParams p = chain(4, 1.0, 1);
  TebdOptions small;
  small.d = 3;
  small.d_max = 2;
  TebdEngine eng(p, small);
  Mpo rho = eng.thermal_state(2.0, 0.5);
  CHECK(rho.max_bond() <= 2);
  const QuenchSpec q = ramp(0.0, 1.0, 0.3);
  eng.quench_left(rho, q);
  CHECK(rho.max_bond() <= 2);
  CHECK(rho.discarded > 0.0);
}

TEST_CASE("accuracy improves with bond dimension") {
  const BhmParams p = chain(4, 1.0, 1);
  const QuenchSpec q = ramp(0.0, 1.0, 0.3);
  TebdOptions ref_opt;
  ref_opt.d = 3;
  ref_opt.d_max = 48;
  const CharFnSeries best = TebdEngine(p, ref_opt).chi_series(q, 1.0, 1.5, 6);
  double prev_err = -1.0;
  double err2 = 0.0, err8 = 0.0;
  for (int dmax : {2, 4, 8}) {
    TebdOptions o;
    o.d = 3;
    o.d_max = dmax;
    const CharFnSeries s = TebdEngine(p, o).chi_series(q, 1.0, 1.5, 6);
    double err = 0.0;
    for (int j = 0; j < 6; ++j) err = std::max(err, std::abs(s.value[j] - best.value[j]));
    if (dmax == 2) err2 = err;
    if (dmax == 8) err8 = err;
    prev_err = err;
  }
  (void)prev_err;
  CHECK(err2 > err8);
  CHECK(err8 < 1e-3);
}

TEST_CASE("weak-coupling chi tracks the quadratic theory") {
  // Open-chain TEBD vs the periodic quadratic model: agreement is O(U) and
  // O(1/M); at these parameters the curves should sit within a few percent.
  BhmParams p = chain(5, 0.3, 2);
  p.chem_potential = 0.35;
  TebdOptions opt;
  opt.d = 4;
  opt.d_max = 48;
  TebdEngine eng(p, opt);

  // measured central density feeds the quadratic model
  Mpo rho = eng.thermal_state(1.0, 0.0);
  Eigen::MatrixXcd nop = Eigen::MatrixXcd::Zero(16, 16);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) nop(i * 4 + j, i * 4 + j) = static_cast<double>(i);
  const double n_meas = eng.expectation_two_site(rho, 2, nop).real();
  REQUIRE(n_meas > 0.1);

  const QuenchSpec q = ramp(0.0, 0.3, 0.5);
  const CharFnSeries s = eng.chi_series(q, 1.0, 2.0, 8);

  BhmParams pb = p;
  pb.density = n_meas;
  const BogoliubovModel model(pb);
  const QuenchIntegrals qi = quench_integrals(model, q);
  for (int j = 0; j < s.n_steps; ++j) {
    const cplx want = chi_exact(model, qi, 1.0, s.u[j]);
    CHECK(std::abs(s.value[j] - want) <= 0.08);
  }
}
