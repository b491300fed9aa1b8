#include "stablab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "stablab/numeric.hpp"

namespace stablab {

namespace {

void precondition(std::span<const double> inv_diag, std::span<const double> r,
                  std::span<double> z) {
  if (inv_diag.empty()) {
    std::copy(r.begin(), r.end(), z.begin());
    return;
  }
  for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv_diag[i] * r[i];
}

double true_residual(const LinearOp& A, std::span<const double> b, std::span<const double> x,
                     double bnorm) {
  std::vector<double> ax(b.size());
  A(x, ax);
  for (std::size_t i = 0; i < ax.size(); ++i) ax[i] = b[i] - ax[i];
  return std::sqrt(exact_dot(ax, ax)) / bnorm;
}

}  // namespace

IterativeResult conjugate_gradient(const LinearOp& A, std::span<const double> b,
                                   std::span<double> x, std::span<const double> inv_diag,
                                   double rtol, int max_iter) {
  const std::size_t n = b.size();
  IterativeResult res;
  const double bnorm = std::sqrt(exact_dot(b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }
  std::vector<double> r(n), z(n), p(n), ap(n);
  A(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  precondition(inv_diag, r, z);
  std::copy(z.begin(), z.end(), p.begin());
  double rz = exact_dot(r, z);
  for (int it = 0; it < max_iter; ++it) {
    const double rnorm = std::sqrt(exact_dot(r, r)) / bnorm;
    res.iterations = it;
    res.residual = rnorm;
    if (rnorm <= rtol) {
      res.converged = true;
      break;
    }
    A(p, ap);
    const double pap = exact_dot(p, ap);
    if (!(pap > 0.0)) break;  // not SPD along p
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    precondition(inv_diag, r, z);
    const double rz_new = exact_dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    res.iterations = it + 1;
  }
  res.residual = true_residual(A, b, x, bnorm);
  res.converged = res.converged && res.residual <= 10.0 * rtol;
  return res;
}

IterativeResult minres(const LinearOp& A, std::span<const double> b, std::span<double> x,
                       std::span<const double> inv_diag, double rtol, int max_iter) {
  const std::size_t n = b.size();
  IterativeResult res;
  const double bnorm = std::sqrt(exact_dot(b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }
  std::vector<double> r1(n), r2(n), y(n), v(n), w(n, 0.0), w1(n), w2(n, 0.0);
  A(x, y);
  for (std::size_t i = 0; i < n; ++i) r1[i] = b[i] - y[i];
  precondition(inv_diag, r1, y);
  double beta1 = exact_dot(r1, y);
  if (beta1 <= 0.0) {
    res.residual = true_residual(A, b, x, bnorm);
    res.converged = res.residual <= rtol;
    return res;
  }
  beta1 = std::sqrt(beta1);
  r2 = r1;
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  constexpr double kTiny = std::numeric_limits<double>::min();

  for (int it = 1; it <= max_iter; ++it) {
    const double s = 1.0 / beta;
    for (std::size_t i = 0; i < n; ++i) v[i] = s * y[i];
    A(v, y);
    if (it >= 2)
      for (std::size_t i = 0; i < n; ++i) y[i] -= (beta / oldb) * r1[i];
    const double alfa = exact_dot(v, y);
    for (std::size_t i = 0; i < n; ++i) y[i] -= (alfa / beta) * r2[i];
    r1.swap(r2);
    std::copy(y.begin(), y.end(), r2.begin());
    precondition(inv_diag, r2, y);
    oldb = beta;
    const double bb = exact_dot(r2, y);
    if (bb < 0.0) break;  // preconditioner not SPD
    beta = std::sqrt(bb);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), kTiny);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    const double denom = 1.0 / gamma;
    w1.swap(w2);
    w2.swap(w);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom;
      x[i] += phi * w[i];
    }
    res.iterations = it;
    if (phibar / beta1 <= 0.1 * rtol || beta == 0.0) {
      res.residual = true_residual(A, b, x, bnorm);
      if (res.residual <= rtol || beta == 0.0) break;
    }
  }
  res.residual = true_residual(A, b, x, bnorm);
  res.converged = res.residual <= rtol;
  return res;
}

}  // namespace stablab
