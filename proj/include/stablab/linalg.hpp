#pragma once

#include <functional>
#include <span>

namespace stablab {

/// y = A x for a symmetric operator given matrix-free.
using LinearOp = std::function<void(std::span<const double> x, std::span<double> y)>;

struct IterativeResult {
  int iterations = 0;
  double residual = 0.0;  // ‖b − A x‖₂ / ‖b‖₂ on exit
  bool converged = false;
};

/// Preconditioned conjugate gradients for SPD A. `inv_diag` is the Jacobi
/// preconditioner (empty for none). x holds the initial guess and the result.
IterativeResult conjugate_gradient(const LinearOp& A, std::span<const double> b,
                                   std::span<double> x, std::span<const double> inv_diag,
                                   double rtol, int max_iter);

/// Preconditioned MINRES for symmetric, possibly indefinite A. The
/// preconditioner must be SPD.
IterativeResult minres(const LinearOp& A, std::span<const double> b, std::span<double> x,
                       std::span<const double> inv_diag, double rtol, int max_iter);

}  // namespace stablab
