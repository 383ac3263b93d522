import logging
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from scipy.special import expit

from hwpd.classification.base import Classifier, ClassifierKind
from hwpd.errors import NoConvergence

logger = logging.getLogger(__name__)


class MLPClassifier(Classifier):
    """
    Fully connected net with logistic-sigmoid hidden layers and one logistic
    output unit, trained by back-propagation of the mean cross-entropy with
    momentum gradient descent over seeded mini-batches.

    :param hidden: widths of the hidden layers
    """
    kind = ClassifierKind.MLP

    def __init__(self, hidden: Sequence[int] = (5,), epochs: int = 500, learning_rate: float = 0.01,
                 momentum: float = 0.9, batch_size: int = 16, seed: int = 0):
        super().__init__(seed=seed)
        self.hidden = hidden
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.batch_size = batch_size

    @property
    def layout(self) -> Tuple[int, ...]:
        return tuple(int(w) for w in self.hidden)

    def init_weights(self, n_features: int, rng: np.random.Generator) -> None:
        """Weights and biases uniform in +-1/sqrt(fan_in)."""
        sizes = [n_features, *self.layout, 1]
        self.weights_: List[np.ndarray] = []
        self.biases_: List[np.ndarray] = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.weights_.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.biases_.append(rng.uniform(-bound, bound, size=fan_out))
        self.n_features_ = n_features

    def _forward(self, rows: np.ndarray) -> Tuple[List[np.ndarray], np.ndarray]:
        activations = [rows]
        for w, b in zip(self.weights_[:-1], self.biases_[:-1]):
            activations.append(expit(activations[-1] @ w + b))
        logits = (activations[-1] @ self.weights_[-1] + self.biases_[-1]).ravel()
        return activations, logits

    def loss_and_gradients(self, rows: np.ndarray, labels: np.ndarray
                           ) -> Tuple[float, List[np.ndarray], List[np.ndarray]]:
        """
        Mean cross-entropy of the output and its gradients.

        :return: (loss, weight gradients, bias gradients), one entry per layer
        """
        rows = np.asarray(rows, dtype=float)
        y = np.asarray(labels, dtype=float)
        n = len(y)
        activations, logits = self._forward(rows)
        # log(1 + e^z) - y z, stable for large |z|
        loss = float(np.mean(np.logaddexp(0.0, logits) - y * logits))

        delta = ((expit(logits) - y) / n)[:, None]
        grad_w: List[np.ndarray] = [np.empty(0)] * len(self.weights_)
        grad_b: List[np.ndarray] = [np.empty(0)] * len(self.weights_)
        for layer in range(len(self.weights_) - 1, -1, -1):
            a = activations[layer]
            grad_w[layer] = a.T @ delta
            grad_b[layer] = delta.sum(axis=0)
            if layer > 0:
                delta = (delta @ self.weights_[layer].T) * a * (1.0 - a)
        return loss, grad_w, grad_b

    def _fit(self, rows: np.ndarray, labels: np.ndarray) -> None:
        rng = np.random.default_rng(self.seed)
        self.init_weights(rows.shape[1], rng)
        velocity_w = [np.zeros_like(w) for w in self.weights_]
        velocity_b = [np.zeros_like(b) for b in self.biases_]
        batch = max(1, min(int(self.batch_size), len(labels)))

        for _ in range(self.epochs):
            order = rng.permutation(len(labels))
            for start in range(0, len(order), batch):
                idx = order[start:start + batch]
                _, grad_w, grad_b = self.loss_and_gradients(rows[idx], labels[idx])
                for layer in range(len(self.weights_)):
                    velocity_w[layer] = self.momentum * velocity_w[layer] - self.learning_rate * grad_w[layer]
                    velocity_b[layer] = self.momentum * velocity_b[layer] - self.learning_rate * grad_b[layer]
                    self.weights_[layer] += velocity_w[layer]
                    self.biases_[layer] += velocity_b[layer]

        if not all(np.all(np.isfinite(w)) for w in self.weights_):
            raise NoConvergence("MLP weights became non-finite during training")
        self.loss_ = self.loss_and_gradients(rows, labels)[0]
        logger.debug(f"MLP {self.layout}: final training loss {self.loss_:.4f}")

    def _decision(self, rows: np.ndarray) -> np.ndarray:
        return expit(self._forward(rows)[1])

    def meta_params(self) -> Dict[str, Any]:
        return {"hidden": list(self.layout)}

    def get_state(self) -> Dict[str, Any]:
        return {
            "weights": [w.tolist() for w in self.weights_],
            "biases": [b.tolist() for b in self.biases_],
        }

    def set_state(self, state: Dict[str, Any]) -> None:
        self.weights_ = [np.asarray(w, dtype=float) for w in state["weights"]]
        self.biases_ = [np.asarray(b, dtype=float) for b in state["biases"]]
        self.n_features_ = self.weights_[0].shape[0]
