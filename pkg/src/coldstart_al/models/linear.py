"""L2-regularized logistic regression.

Fitted with deterministic full-batch gradient descent plus backtracking
(Armijo) line search: labeled pools stay small enough that stochastic
optimizers would only add nondeterminism.  The bias term is not
penalized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forest import SingleClassError


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def loss_and_gradient(
    weights: np.ndarray,
    bias: float,
    X: np.ndarray,
    y: np.ndarray,
    l2_lambda: float,
) -> tuple[float, np.ndarray, float]:
    """Mean log loss + (lambda/2)*||w||^2 and its gradient (w and bias parts)."""
    n = len(y)
    z = X @ weights + bias
    # log(1 + exp(-s*z)) with s = +-1, computed stably
    s = 2.0 * y - 1.0
    loss = float(np.logaddexp(0.0, -s * z).mean()) + 0.5 * l2_lambda * float(
        weights @ weights
    )
    resid = sigmoid(z) - y
    grad_w = X.T @ resid / n + l2_lambda * weights
    grad_b = float(resid.mean())
    return loss, grad_w, grad_b


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float
    l2_lambda: float
    n_iter: int = 0
    converged: bool = False

    @classmethod
    def fit(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        l2_lambda: float = 1e-3,
        seed: int = 0,
        max_iter: int = 500,
        tol: float = 1e-6,
    ) -> "LogisticModel":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if not np.all(np.isfinite(X)):
            raise ValueError("non-finite features")
        if len(np.unique(y)) < 2:
            raise SingleClassError("training data contains a single class")
        del seed  # optimization is deterministic; kept for interface symmetry
        w = np.zeros(X.shape[1])
        b = 0.0
        loss, gw, gb = loss_and_gradient(w, b, X, y, l2_lambda)
        converged = False
        it = 0
        for it in range(1, max_iter + 1):
            gnorm2 = float(gw @ gw) + gb * gb
            if np.sqrt(gnorm2) <= tol:
                converged = True
                break
            step = 1.0
            # Armijo backtracking keeps the training loss non-increasing
            while step > 1e-14:
                w_new = w - step * gw
                b_new = b - step * gb
                loss_new, gw_new, gb_new = loss_and_gradient(
                    w_new, b_new, X, y, l2_lambda
                )
                if loss_new <= loss - 1e-4 * step * gnorm2:
                    break
                step *= 0.5
            else:
                break  # no descent step found; already at numerical optimum
            w, b, loss, gw, gb = w_new, b_new, loss_new, gw_new, gb_new
        return cls(weights=w, bias=b, l2_lambda=l2_lambda, n_iter=it, converged=converged)

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return X @ self.weights + self.bias

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(self.decision_function(X))
