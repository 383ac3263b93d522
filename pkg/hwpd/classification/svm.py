"""
Soft-margin RBF support vector machine trained by sequential minimal
optimization with maximal-violating-pair working set selection.
"""
import logging
from typing import Any, Dict

import numpy as np
from sklearn.metrics.pairwise import rbf_kernel

from hwpd.classification.base import Classifier, ClassifierKind

logger = logging.getLogger(__name__)

TAU = 1e-12


class SVMClassifier(Classifier):
    """
    Solves min 1/2 a'Qa - e'a subject to 0 <= a <= C and y'a = 0 with
    Q_ij = y_i y_j exp(-gamma |x_i - x_j|^2). The decision value is
    f(x) = sum_i a_i y_i k(x_i, x) - rho.

    Hitting ``max_iter`` leaves ``converged_`` False and keeps the current solution.
    """
    kind = ClassifierKind.SVM
    threshold = 0.0

    def __init__(self, C: float = 1.0, gamma: float = 1.0, tol: float = 1e-3, max_iter: int = 100_000,
                 seed: int = 0):
        super().__init__(seed=seed)
        self.C = C
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter

    def _fit(self, rows: np.ndarray, labels: np.ndarray) -> None:
        y = np.where(labels == 1, 1.0, -1.0)
        n = len(y)
        C = float(self.C)
        Q = (y[:, None] * y[None, :]) * rbf_kernel(rows, gamma=self.gamma)

        alpha = np.zeros(n)
        grad = -np.ones(n)
        self.n_iter_ = 0
        self.converged_ = False

        while self.n_iter_ < self.max_iter:
            up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
            low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
            if not up.any() or not low.any():
                self.converged_ = True
                break
            violation = -y * grad
            i = int(np.argmax(np.where(up, violation, -np.inf)))
            j = int(np.argmin(np.where(low, violation, np.inf)))
            if violation[i] - violation[j] < self.tol:
                self.converged_ = True
                break

            old_i, old_j = alpha[i], alpha[j]
            if y[i] != y[j]:
                quad = Q[i, i] + Q[j, j] + 2 * Q[i, j]
                delta = (-grad[i] - grad[j]) / max(quad, TAU)
                diff = alpha[i] - alpha[j]
                alpha[i] += delta
                alpha[j] += delta
                if diff > 0:
                    if alpha[j] < 0:
                        alpha[j], alpha[i] = 0.0, diff
                elif alpha[i] < 0:
                    alpha[i], alpha[j] = 0.0, -diff
                if diff > 0:
                    if alpha[i] > C:
                        alpha[i], alpha[j] = C, C - diff
                elif alpha[j] > C:
                    alpha[j], alpha[i] = C, C + diff
            else:
                quad = Q[i, i] + Q[j, j] - 2 * Q[i, j]
                delta = (grad[i] - grad[j]) / max(quad, TAU)
                total = alpha[i] + alpha[j]
                alpha[i] -= delta
                alpha[j] += delta
                if total > C:
                    if alpha[i] > C:
                        alpha[i], alpha[j] = C, total - C
                elif alpha[j] < 0:
                    alpha[j], alpha[i] = 0.0, total
                if total > C:
                    if alpha[j] > C:
                        alpha[j], alpha[i] = C, total - C
                elif alpha[i] < 0:
                    alpha[i], alpha[j] = 0.0, total

            grad += Q[:, i] * (alpha[i] - old_i) + Q[:, j] * (alpha[j] - old_j)
            self.n_iter_ += 1

        if not self.converged_:
            logger.warning(f"SMO stopped at the iteration cap {self.max_iter} (C={self.C}, gamma={self.gamma})")

        self.alpha_ = alpha
        self.rho_ = self._rho(alpha, y, grad, C)
        support = alpha > 0
        self.support_ = np.flatnonzero(support)
        self.support_vectors_ = rows[support].copy()
        self.dual_coef_ = (alpha * y)[support]

    @staticmethod
    def _rho(alpha: np.ndarray, y: np.ndarray, grad: np.ndarray, C: float) -> float:
        yg = y * grad
        at_upper = alpha >= C
        at_lower = alpha <= 0
        free = ~at_upper & ~at_lower
        if free.any():
            return float(yg[free].mean())
        # rho is only bracketed by the bounded variables
        ub_mask = (at_upper & (y < 0)) | (at_lower & (y > 0))
        lb_mask = (at_upper & (y > 0)) | (at_lower & (y < 0))
        ub = yg[ub_mask].min() if ub_mask.any() else np.inf
        lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
        return float((ub + lb) / 2)

    def _decision(self, rows: np.ndarray) -> np.ndarray:
        if len(self.dual_coef_) == 0:
            return np.full(len(rows), -self.rho_)
        return rbf_kernel(rows, self.support_vectors_, gamma=self.gamma) @ self.dual_coef_ - self.rho_

    def meta_params(self) -> Dict[str, Any]:
        return {"C": self.C, "gamma": self.gamma}

    def get_state(self) -> Dict[str, Any]:
        return {
            "support_vectors": self.support_vectors_.tolist(),
            "dual_coef": self.dual_coef_.tolist(),
            "rho": self.rho_,
            "n_features": self.n_features_,
        }

    def set_state(self, state: Dict[str, Any]) -> None:
        self.n_features_ = int(state["n_features"])
        self.support_vectors_ = np.asarray(state["support_vectors"], dtype=float).reshape(-1, self.n_features_)
        self.dual_coef_ = np.asarray(state["dual_coef"], dtype=float)
        self.rho_ = float(state["rho"])
