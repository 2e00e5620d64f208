"""Transfer matrices of linear ODE systems Y' = A(s) Y on s in [0, 1].

Coefficients are supplied by a sampler that returns A at the 2N + 1 half-step
points s_j = j / (2N); fourth-order Runge-Kutta step matrices are built for all
steps at once and multiplied pairwise. Accuracy is controlled by step halving
with Richardson extrapolation.
"""
from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import signal

from ..config import get_settings
from ..errors import NumericalError
from ..logging import get_logger

logger = get_logger(__name__)

ComplexArray = NDArray[np.complex128]
Sampler = Callable[[int], ComplexArray]


class MonodromyError(NumericalError):
    """Transfer matrix did not converge."""

    def __init__(self, achieved: float, steps: int, detail: str = ""):
        self.achieved = achieved
        self.steps = steps
        message = f"transfer matrix not converged after {steps} steps (achieved {achieved:.3e})"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message, code="MONODROMY_NOT_CONVERGED")


@dataclass(frozen=True)
class TransferResult:
    """A converged transfer matrix with its error estimate."""

    matrix: ComplexArray
    steps: int
    error: float


def half_step_samples(samples: ArrayLike, steps: int, axis: int = -1) -> ComplexArray:
    """Trigonometric interpolation of periodic samples to the 2N + 1 half-step points."""
    arr = np.asarray(samples)
    fine = signal.resample(arr, 2 * steps, axis=axis)
    first = np.take(fine, [0], axis=axis)
    return np.concatenate([fine, first], axis=axis)


def step_matrices(coefficients: ArrayLike, steps: int) -> ComplexArray:
    """RK4 one-step propagators from A at half-step points, shape (..., N, d, d)."""
    a = np.asarray(coefficients, dtype=complex)
    h = 1.0 / steps
    a0 = a[..., 0:-1:2, :, :]
    a_half = a[..., 1::2, :, :]
    a1 = a[..., 2::2, :, :]
    eye = np.eye(a.shape[-1], dtype=complex)
    k1 = a0
    k2 = a_half @ (eye + 0.5 * h * k1)
    k3 = a_half @ (eye + 0.5 * h * k2)
    k4 = a1 @ (eye + h * k3)
    result: ComplexArray = eye + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return result


def ordered_product(matrices: ArrayLike) -> ComplexArray:
    """M_{N-1} ... M_1 M_0 over axis -3, by pairwise reduction."""
    mats = np.asarray(matrices, dtype=complex)
    d = mats.shape[-1]
    while mats.shape[-3] > 1:
        if mats.shape[-3] % 2:
            pad = np.broadcast_to(np.eye(d, dtype=complex), mats.shape[:-3] + (1, d, d))
            mats = np.concatenate([mats, pad], axis=-3)
        mats = mats[..., 1::2, :, :] @ mats[..., 0::2, :, :]
    result: ComplexArray = mats[..., 0, :, :]
    return result


def transfer_matrix(sampler: Sampler, steps: int) -> ComplexArray:
    """Fixed-step RK4 transfer matrix over [0, 1]."""
    return ordered_product(step_matrices(sampler(steps), steps))


def refined_transfer_matrix(
    sampler: Sampler,
    tolerance: float | None = None,
    initial_steps: int | None = None,
    max_refinements: int | None = None,
    unimodular: bool = True,
) -> TransferResult:
    """Step-halving RK4 with Richardson extrapolation.

    Accepts when the Richardson error estimate is below ``tolerance`` relative to
    1 + max|T| and, for traceless systems, |det T - 1| is below the determinant
    tolerance.
    """
    settings = get_settings()
    tol = settings.monodromy_tolerance if tolerance is None else tolerance
    steps = settings.monodromy_initial_steps if initial_steps is None else initial_steps
    refinements = settings.monodromy_max_refinements if max_refinements is None else max_refinements

    coarse = transfer_matrix(sampler, steps)
    achieved = np.inf
    for _ in range(refinements):
        steps *= 2
        fine = transfer_matrix(sampler, steps)
        extrapolated = fine + (fine - coarse) / 15.0
        scale = 1.0 + np.max(np.abs(fine))
        achieved = float(np.max(np.abs(fine - coarse)) / 15.0 / scale)
        det_defect = 0.0
        if unimodular:
            det_defect = float(np.max(np.abs(np.linalg.det(extrapolated) - 1.0)))
        if achieved <= tol and det_defect <= settings.determinant_tolerance:
            logger.debug("transfer_converged", steps=steps, error=achieved, det_defect=det_defect)
            return TransferResult(extrapolated, steps, achieved)
        coarse = fine
    raise MonodromyError(achieved, steps)


def strided_path_transfer(sampler: Sampler, points: int, stride: int) -> ComplexArray:
    """Cumulative transfer matrices at s_j = j / points, using ``stride`` RK4 steps per interval."""
    steps = points * stride
    mats = step_matrices(sampler(steps), steps)
    d = mats.shape[-1]
    grouped = ordered_product(mats.reshape(mats.shape[:-3] + (points, stride, d, d)))
    out = np.empty(grouped.shape[:-3] + (points + 1, d, d), dtype=complex)
    out[..., 0, :, :] = np.eye(d)
    for j in range(points):
        out[..., j + 1, :, :] = grouped[..., j, :, :] @ out[..., j, :, :]
    return out


def refined_path_transfer(
    sampler: Sampler,
    points: int,
    tolerance: float | None = None,
    max_refinements: int | None = None,
) -> TransferResult:
    """Transfer matrices at ``points`` + 1 equispaced nodes, refined like :func:`refined_transfer_matrix`."""
    settings = get_settings()
    tol = settings.monodromy_tolerance if tolerance is None else tolerance
    refinements = settings.monodromy_max_refinements if max_refinements is None else max_refinements
    stride = max(1, settings.monodromy_initial_steps // points)

    coarse = strided_path_transfer(sampler, points, stride)
    achieved = np.inf
    for _ in range(refinements):
        stride *= 2
        fine = strided_path_transfer(sampler, points, stride)
        scale = 1.0 + np.max(np.abs(fine))
        achieved = float(np.max(np.abs(fine - coarse)) / 15.0 / scale)
        if achieved <= tol:
            logger.debug("path_transfer_converged", steps=points * stride, error=achieved)
            return TransferResult(fine + (fine - coarse) / 15.0, points * stride, achieved)
        coarse = fine
    raise MonodromyError(achieved, points * stride, "path transfer")


def unimodular_multipliers(trace: ArrayLike) -> tuple[ComplexArray, ComplexArray]:
    """Eigenvalues (k, 1/k) of a determinant-one 2x2 matrix from its trace, |k| >= 1."""
    tr = np.asarray(trace, dtype=complex)
    root = np.sqrt(tr**2 - 4.0)
    plus, minus = tr + root, tr - root
    big = 0.5 * np.where(np.abs(plus) >= np.abs(minus), plus, minus)
    return big, 1.0 / big
