"""
L2-penalised logistic regression fitted by Newton's method with backtracking.
"""
import logging
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel
from scipy.special import expit, log_expit

from src.core.errors import SingleClassError

logger = logging.getLogger(__name__)

GRADIENT_TOLERANCE = 1e-8
MAX_NEWTON_STEPS = 100
ARMIJO_C = 1e-4
MAX_HALVINGS = 60


class LogisticModel(BaseModel):
    weights: List[float]
    intercept: float
    l2_penalty: float
    iterations: int = 0
    converged: bool = False
    gradient_norm: float = 0.0
    loss_history: List[float] = []


def _design(features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=float)
    return np.column_stack([np.ones(len(features)), features])


def _loss(theta: np.ndarray, design: np.ndarray, labels: np.ndarray, l2: float) -> float:
    z = design @ theta
    # log(1 + e^z) − y·z, written with log_expit for stability
    nll = np.mean(-log_expit(z) + (1.0 - labels) * z)
    return float(nll + 0.5 * l2 * theta[1:] @ theta[1:])


def _gradient_hessian(
    theta: np.ndarray, design: np.ndarray, labels: np.ndarray, l2: float
) -> Tuple[np.ndarray, np.ndarray]:
    n = len(labels)
    prob = expit(design @ theta)
    penalty = np.full(len(theta), l2)
    penalty[0] = 0.0
    grad = design.T @ (prob - labels) / n + penalty * theta
    weights = prob * (1.0 - prob)
    hess = (design * weights[:, None]).T @ design / n + np.diag(penalty)
    return grad, hess


def train_logistic(
    features: np.ndarray,
    labels: np.ndarray,
    l2_penalty: float = 1e-4,
    seed: int = 0,
) -> LogisticModel:
    """
    Minimise mean negative log-likelihood + (λ/2)·||w||² (intercept unpenalised).

    Stops once the gradient norm is ≤ 1e-8. Only steps that do not raise the
    loss are taken, so ``loss_history`` is non-increasing. The optimiser is
    deterministic; ``seed`` is accepted for trainer interface parity.
    """
    labels = np.asarray(labels, dtype=float).ravel()
    if len(labels) < 2 or len(np.unique(labels)) < 2:
        raise SingleClassError("logistic regression needs both label values present",
                               n=len(labels))
    design = _design(features)
    theta = np.zeros(design.shape[1])
    loss = _loss(theta, design, labels, l2_penalty)
    history = [loss]
    grad, hess = _gradient_hessian(theta, design, labels, l2_penalty)
    converged = bool(np.linalg.norm(grad) <= GRADIENT_TOLERANCE)
    steps = 0

    while not converged and steps < MAX_NEWTON_STEPS:
        steps += 1
        try:
            direction = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            direction = np.linalg.lstsq(hess, grad, rcond=None)[0]
        slope = float(grad @ direction)
        t = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS):
            candidate = theta - t * direction
            new_loss = _loss(candidate, design, labels, l2_penalty)
            if new_loss <= loss - ARMIJO_C * t * slope or (new_loss <= loss and t < 1e-3):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        theta, loss = candidate, new_loss
        history.append(loss)
        grad, hess = _gradient_hessian(theta, design, labels, l2_penalty)
        converged = bool(np.linalg.norm(grad) <= GRADIENT_TOLERANCE)

    if not converged:
        logger.debug("[CAMPAIGN] logistic fit stopped after %d steps, |grad|=%.3g",
                     steps, np.linalg.norm(grad))
    return LogisticModel(
        weights=theta[1:].tolist(),
        intercept=float(theta[0]),
        l2_penalty=l2_penalty,
        iterations=steps,
        converged=converged,
        gradient_norm=float(np.linalg.norm(grad)),
        loss_history=history,
    )


def predict_proba(model: LogisticModel, features: np.ndarray) -> np.ndarray:
    return expit(np.asarray(features, dtype=float) @ np.asarray(model.weights) + model.intercept)


def predict(model: LogisticModel, features: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Hard predictions (probability ≥ 0.5) and probabilities."""
    prob = predict_proba(model, features)
    return (prob >= 0.5).astype(int), prob


def metric_from_model(
    kind: Literal["predicted_value", "accuracy"],
    model: LogisticModel,
    features: np.ndarray,
    labels: Optional[np.ndarray] = None,
    probability: bool = False,
) -> np.ndarray:
    """
    ``predicted_value``: m_i = ŷ_i (or the probability when ``probability``).
    ``accuracy``: m_i = 1 if ŷ_i equals y_i else 0.
    """
    hard, prob = predict(model, features)
    if kind == "predicted_value":
        return prob if probability else hard.astype(float)
    if kind == "accuracy":
        if labels is None:
            raise ValueError("accuracy metric needs labels")
        return (hard == np.asarray(labels).astype(int)).astype(float)
    raise ValueError(f"unknown metric kind: {kind}")
