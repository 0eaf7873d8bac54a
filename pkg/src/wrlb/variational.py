"""Mean-shift variational bound on the negative log partition function.

Only deterministic, constant-in-time drifts are optimized: the shift
enters the Gaussian sample additively and contributes half its squared
Cameron-Martin norm to the objective.  Over that class the objective is
an exact fourth-degree polynomial in the shift's grid values, so one
sampling pass yields pointwise moment fields that make every optimizer
iteration sample-free while staying identical to the per-sample
common-random-number estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadShape, Diverged, InsufficientSamples
from .gaussian import MeasureSpec, RenormContext, _at_radius, sample_u_batch
from .measure import _MIN_SAMPLES, EnsembleStats, _map_chunks
from .spectral import (
    SpectralField,
    _Transform,
    _ball_mask,
    mode_radius_sq,
    zeros,
)

# interaction evaluation and its pathwise gradient; module attributes so
# synthetic interactions can be swapped in for oracle tests
from .energy import _riesz_weights, interaction as interaction_values


def interaction_gradient(u: SpectralField, ctx: RenormContext) -> SpectralField:
    """Functional derivative of the interaction, ball-limited to the cutoff.

    grad R(u) = 3 D^s(D^s u u^2) + 3 Q u + u^3 on modes |n| <= N; exact
    because the context grid holds every product band that folds into
    the retained modes.
    """
    un = _at_radius(u, ctx.n)
    tr = _Transform(ctx.n, ctx.grid)
    w = _riesz_weights(ctx.n, ctx.s)
    uvals = tr.to_grid(un.coeffs)
    dsu = tr.to_grid(un.coeffs * w)
    q = dsu * dsu - ctx.sigma
    mask = _ball_mask(ctx.n, ctx.n)
    inner = tr.from_grid(dsu * uvals**2)
    rest = tr.from_grid(3.0 * q * uvals + uvals**3)
    return SpectralField((3.0 * w * inner + rest) * mask)


@dataclass(frozen=True)
class ShiftField:
    """A band-limited mean shift with its Cameron-Martin cost attached."""

    theta: SpectralField
    cm_cost: float

    @classmethod
    def create(cls, theta: SpectralField, s: float) -> "ShiftField":
        if theta.batch_shape:
            raise BadShape("shift must be a single field")
        cost = 0.5 * np.sum(_inverse_weights_sq(theta.m, s) * np.abs(theta.coeffs) ** 2)
        return cls(theta=theta, cm_cost=float(cost))


def _inverse_weights_sq(m: int, s: float) -> np.ndarray:
    # inverse covariance of the u-marginal: 1 at the origin, else |n|^2 + |n|^{2s+2}
    r2 = mode_radius_sq(m).astype(np.float64)
    return np.where(r2 > 0, r2 + r2 ** (s + 1.0), 1.0)


def _checked_theta(shift: ShiftField, n: int) -> SpectralField:
    theta = shift.theta
    if theta.m > n:
        raise BadShape(f"shift band {theta.m} exceeds cutoff {n}")
    if not np.all(theta.coeffs * ~_ball_mask(theta.m, n) == 0.0):
        raise BadShape("shift has modes outside the cutoff ball")
    out = zeros(n)
    d = n - theta.m
    k = 2 * theta.m + 1
    out.coeffs[d : d + k, d : d + k, d : d + k] = theta.coeffs
    return out


def shift_objective(
    shift: ShiftField, s: float, n: int, samples: int, seed: int
) -> EnsembleStats:
    """Per-sample objective R(Y + theta) + cm_cost under common draws."""
    if samples < _MIN_SAMPLES:
        raise InsufficientSamples(f"need >= {_MIN_SAMPLES} samples, got {samples}")
    ctx = RenormContext.create(n=n, s=s)
    theta = _checked_theta(shift, n)
    spec = MeasureSpec(s=s, kind="nu", m=n)
    chunk = max(8, 4_000_000 // ctx.grid**3)

    def work(lo, hi):
        y = sample_u_batch(spec, seed, np.arange(lo, hi))
        y.coeffs += theta.coeffs
        return interaction_values(y, ctx) + shift.cm_cost

    return EnsembleStats.from_samples(np.concatenate(_map_chunks(work, samples, chunk)))


def shift_gradient(
    shift: ShiftField, s: float, n: int, samples: int, seed: int
) -> SpectralField:
    """Sampled gradient of the objective with respect to the shift modes."""
    if samples < _MIN_SAMPLES:
        raise InsufficientSamples(f"need >= {_MIN_SAMPLES} samples, got {samples}")
    ctx = RenormContext.create(n=n, s=s)
    theta = _checked_theta(shift, n)
    spec = MeasureSpec(s=s, kind="nu", m=n)
    chunk = max(8, 4_000_000 // ctx.grid**3)

    def work(lo, hi):
        y = sample_u_batch(spec, seed, np.arange(lo, hi))
        y.coeffs += theta.coeffs
        g = interaction_gradient(y, ctx)
        return g.coeffs.sum(axis=0) / samples

    mean = sum(_map_chunks(work, samples, chunk))
    mean = mean + _inverse_weights_sq(n, s) * theta.coeffs
    return SpectralField(mean)


# defaults remembered so the optimizer can tell when a synthetic
# interaction has been swapped in and the polynomial surface is invalid
_DEFAULT_VALUES = interaction_values
_DEFAULT_GRADIENT = interaction_gradient


# ----------------------------------------------------------------------
# exact polynomial surface over one fixed sample set


class _MomentSurface:
    """Pointwise moments of (Y, D^s Y) making the objective a polynomial.

    With a = theta and b = D^s theta on the grid, the average of
    R(Y + theta) over the samples is the grid mean of a quartic in (a, b)
    whose coefficients are the stored moment fields; objective and
    gradient evaluations then cost one grid pass each, bit-compatible
    with the per-sample estimate up to summation order.
    """

    _POWERS = ((1, 0), (2, 0), (3, 0), (4, 0), (0, 1), (1, 1), (2, 1), (0, 2), (1, 2), (2, 2))

    def __init__(self, s: float, n: int, samples: int, seed: int):
        ctx = RenormContext.create(n=n, s=s)
        spec = MeasureSpec(s=s, kind="nu", m=n)
        tr = _Transform(n, ctx.grid)
        w = _riesz_weights(n, s)
        chunk = max(8, 4_000_000 // ctx.grid**3)

        def work(lo, hi):
            yf = sample_u_batch(spec, seed, np.arange(lo, hi))
            yf.coeffs *= _ball_mask(n, n)
            y = tr.to_grid(yf.coeffs)
            z = tr.to_grid(yf.coeffs * w)
            return np.stack(
                [(y**i * z**j).sum(axis=0) for i, j in self._POWERS]
            ) / samples

        self.moments = sum(_map_chunks(work, samples, chunk))
        self.ctx = ctx
        self.transform = tr
        self.riesz = w
        self.s = s
        self.n = n

    def _fields(self, theta: SpectralField):
        a = self.transform.to_grid(theta.coeffs)
        b = self.transform.to_grid(theta.coeffs * self.riesz)
        return a, b

    def objective(self, shift: ShiftField) -> float:
        m = dict(zip(self._POWERS, self.moments))
        a, b = self._fields(shift.theta)
        sig = self.ctx.sigma
        # (3/2) E[((z+b)^2 - sigma)(y+a)^2] + (1/4) E[(y+a)^4]
        zz = m[(2, 2)] + 2.0 * a * m[(1, 2)] + a**2 * m[(0, 2)]
        cross = 2.0 * b * self._mixed(m, a)
        square = (b**2 - sig) * (m[(2, 0)] + 2.0 * a * m[(1, 0)] + a**2)
        quart = (
            m[(4, 0)]
            + 4.0 * a * m[(3, 0)]
            + 6.0 * a**2 * m[(2, 0)]
            + 4.0 * a**3 * m[(1, 0)]
            + a**4
        )
        dens = 1.5 * (zz + cross + square) + 0.25 * quart
        return float(dens.mean()) + shift.cm_cost

    @staticmethod
    def _mixed(m, a):
        # E[z y^2] + 2a E[z y] + a^2 E[z]
        return m[(2, 1)] + 2.0 * a * m[(1, 1)] + a**2 * m[(0, 1)]

    def gradient(self, shift: ShiftField) -> SpectralField:
        m = dict(zip(self._POWERS, self.moments))
        a, b = self._fields(shift.theta)
        sig = self.ctx.sigma
        da = 1.5 * (
            2.0 * m[(1, 2)]
            + 2.0 * a * m[(0, 2)]
            + 2.0 * b * (2.0 * m[(1, 1)] + 2.0 * a * m[(0, 1)])
            + (b**2 - sig) * (2.0 * m[(1, 0)] + 2.0 * a)
        ) + 0.25 * (
            4.0 * m[(3, 0)] + 12.0 * a * m[(2, 0)] + 12.0 * a**2 * m[(1, 0)] + 4.0 * a**3
        )
        db = 3.0 * (self._mixed(m, a) + b * (m[(2, 0)] + 2.0 * a * m[(1, 0)] + a**2))
        mask = _ball_mask(self.n, self.n)
        grad = self.transform.from_grid(da) + self.riesz * self.transform.from_grid(db)
        grad = grad * mask + _inverse_weights_sq(self.n, self.s) * shift.theta.coeffs
        return SpectralField(grad)


def minimize_shift(
    s: float, n: int, samples: int, seed: int, iters: int = 100, diagnostics: dict | None = None
) -> tuple[ShiftField, float]:
    """Backtracking gradient descent on the common-random-number objective.

    Returns the best shift found and its objective value, an upper bound
    on the negative log partition function over the mean-shift class.
    The Cameron-Martin metric preconditions the step, so the quadratic
    cost term never limits the step size.
    """
    if iters < 1:
        raise BadShape(f"need at least one iteration, got {iters}")
    if samples < _MIN_SAMPLES:
        raise InsufficientSamples(f"need >= {_MIN_SAMPLES} samples, got {samples}")
    if interaction_values is _DEFAULT_VALUES and interaction_gradient is _DEFAULT_GRADIENT:
        # one sampling pass; objective and gradient become grid polynomials
        surface = _MomentSurface(s, n, samples, seed)
        objective, gradient = surface.objective, surface.gradient
    else:
        # a swapped-in interaction has no precomputed surface; sample per call
        def objective(sh):
            return float(shift_objective(sh, s, n, samples, seed).mean)

        def gradient(sh):
            return shift_gradient(sh, s, n, samples, seed)

    metric = 1.0 / _inverse_weights_sq(n, s)
    shift = ShiftField.create(zeros(n), s)
    value = objective(shift)
    best, best_value = shift, value
    rises = 0
    accepted_steps = 0
    for _ in range(iters):
        grad = gradient(shift).coeffs
        direction = -metric * grad
        decrease = float(np.sum(metric * np.abs(grad) ** 2))
        if decrease <= 0.0:
            break
        step = 1.0
        accepted = None
        for _ in range(40):
            trial = ShiftField.create(SpectralField(shift.theta.coeffs + step * direction), s)
            trial_value = objective(trial)
            if trial_value <= value - 1e-4 * step * decrease:
                accepted = (trial, trial_value)
                break
            step *= 0.5
        if accepted is None:
            break
        shift, new_value = accepted
        accepted_steps += 1
        rises = rises + 1 if new_value > value else 0
        if rises >= 10:
            raise Diverged("objective increased over 10 accepted steps")
        value = new_value
        if value < best_value:
            best, best_value = shift, value
    if diagnostics is not None:
        diagnostics["iterations"] = accepted_steps
    return best, best_value
