"""Monte Carlo laboratory: partition functions, density moments, transport.

Estimators draw from the wave-adapted Gaussian measure with per-sample
counter keying, so every value is reproducible bit-for-bit for a given
(seed, samples) regardless of chunking or worker count: chunks are fixed
by sample index and merged in order.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .besov import sobolev_pair_norm
from .dynamics import FlowParams, PhasePoint, evolve
from .energy import full_energy, interaction
from .errors import (
    BadOrder,
    BadShape,
    DegenerateSet,
    Diverged,
    InsufficientSamples,
)
from .gaussian import (
    MeasureSpec,
    RenormContext,
    _at_radius,
    sample_batch,
    sample_u_batch,
)
from .spectral import mode_radius_sq

_log = logging.getLogger(__name__)

# grid points processed per evaluation chunk; bounds transient memory
_CHUNK_POINTS = 4_000_000
_MIN_SAMPLES = 1000


@dataclass(frozen=True)
class EnsembleStats:
    """Streaming moments of one scalar per sample, mergeable across workers."""

    count: int
    mean: float
    m2: float
    min: float
    max: float
    ci95: float

    @property
    def variance(self) -> float:
        if self.count < 2:
            return math.inf
        return self.m2 / (self.count - 1)

    @classmethod
    def from_samples(cls, values) -> "EnsembleStats":
        values = np.asarray(values, dtype=np.float64).ravel()
        n = values.size
        if n == 0:
            raise InsufficientSamples("no samples to accumulate")
        mean = float(values.mean())
        m2 = float(np.sum((values - mean) ** 2))
        return cls(
            count=n,
            mean=mean,
            m2=m2,
            min=float(values.min()),
            max=float(values.max()),
            ci95=_half_width(n, m2),
        )

    def merge(self, other: "EnsembleStats") -> "EnsembleStats":
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        return EnsembleStats(
            count=n,
            mean=mean,
            m2=m2,
            min=min(self.min, other.min),
            max=max(self.max, other.max),
            ci95=_half_width(n, m2),
        )


def _half_width(count: int, m2: float) -> float:
    if count < 2:
        return math.inf
    return 1.96 * math.sqrt(m2 / (count - 1) / count)


def merge_all(parts) -> EnsembleStats:
    out = None
    for p in parts:
        out = p if out is None else out.merge(p)
    if out is None:
        raise InsufficientSamples("no accumulators to merge")
    return out


@dataclass(frozen=True)
class BallSet:
    """The event {state has pair norm <= R} at smoothness sigma."""

    R: float
    sigma: float

    def __post_init__(self):
        if not self.R > 0:
            raise BadShape(f"ball radius must be positive, got {self.R}")

    def contains(self, p: PhasePoint):
        out = sobolev_pair_norm(p, self.sigma) <= self.R
        return bool(out) if np.ndim(out) == 0 else out


# ----------------------------------------------------------------------
# chunked, order-stable sample evaluation


def _thread_count() -> int:
    env = os.environ.get("WRLB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _map_chunks(fn, samples: int, chunk: int) -> list:
    """Evaluate fn(lo, hi) over fixed index ranges, in index order."""
    ranges = [(lo, min(lo + chunk, samples)) for lo in range(0, samples, chunk)]
    threads = _thread_count()
    if threads <= 1 or len(ranges) == 1:
        return [fn(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda r: fn(*r), ranges))


def _density_values(r_values: np.ndarray, sigma: float, p: int) -> np.ndarray:
    # exact pointwise floor of the interaction; a breach means aliasing
    floor = -4.5 * sigma * sigma
    if np.any(r_values < floor):
        raise Diverged("interaction under its exact lower bound -9/2 sigma^2")
    return np.exp(-p * r_values)


# ----------------------------------------------------------------------
# estimators


def density_moments(s: float, n: int, p: int, samples: int, seed: int) -> EnsembleStats:
    """Estimate the p-th moment of the density e^{-R} over the u-marginal.

    The sample maximum (a heavy-tail diagnostic) rides along in the max
    field; its logarithm is the largest exponent seen.
    """
    if p not in (1, 2, 4):
        raise BadOrder(f"moment order must be one of 1, 2, 4, got {p}")
    if samples < _MIN_SAMPLES:
        raise InsufficientSamples(f"need >= {_MIN_SAMPLES} samples, got {samples}")
    ctx = RenormContext.create(n=n, s=s)
    spec = MeasureSpec(s=s, kind="nu", m=n)
    chunk = max(8, _CHUNK_POINTS // ctx.grid**3)

    def work(lo, hi):
        u = sample_u_batch(spec, seed, np.arange(lo, hi))
        return _density_values(interaction(u, ctx), ctx.sigma, p)

    values = np.concatenate(_map_chunks(work, samples, chunk))
    return EnsembleStats.from_samples(values)


def partition_function(s: float, n: int, samples: int, seed: int) -> EnsembleStats:
    """Estimate Z = E[e^{-R}]; the first density moment."""
    return density_moments(s, n, 1, samples, seed)


def interaction_convergence(
    s: float, n: int, m: int, p: int, samples: int, seed: int
) -> EnsembleStats:
    """Estimate E|R at cutoff n minus R at cutoff m|^p with common draws.

    The same master sample feeds both truncations, so the difference
    isolates the tail modes instead of sampling noise.
    """
    if not 1 <= n <= m:
        raise BadShape(f"need 1 <= N <= M, got N={n}, M={m}")
    if p not in (1, 2, 4):
        raise BadOrder(f"moment order must be one of 1, 2, 4, got {p}")
    if samples < _MIN_SAMPLES:
        raise InsufficientSamples(f"need >= {_MIN_SAMPLES} samples, got {samples}")
    ctx_n = RenormContext.create(n=n, s=s)
    ctx_m = RenormContext.create(n=m, s=s)
    spec = MeasureSpec(s=s, kind="nu", m=m)
    chunk = max(4, _CHUNK_POINTS // ctx_m.grid**3)

    def work(lo, hi):
        u = sample_u_batch(spec, seed, np.arange(lo, hi))
        return np.abs(interaction(u, ctx_n) - interaction(u, ctx_m)) ** p

    values = np.concatenate(_map_chunks(work, samples, chunk))
    return EnsembleStats.from_samples(values)


def _hamiltonian(p: PhasePoint, ctx: RenormContext):
    """Quadratic Hamiltonian part of the truncated state (exact mode sums)."""
    un = _at_radius(p.u, ctx.n)
    vn = _at_radius(p.v, ctx.n)
    r2 = mode_radius_sq(ctx.n).astype(np.float64)
    s = ctx.s
    ax = (-3, -2, -1)
    qu = 0.5 * np.sum((r2 ** (s + 1.0) + r2) * np.abs(un.coeffs) ** 2, axis=ax)
    qv = 0.5 * np.sum((r2**s + 1.0) * np.abs(vn.coeffs) ** 2, axis=ax)
    mean0 = un.coeffs[..., ctx.n, ctx.n, ctx.n].real
    return qu + qv + 0.5 * mean0**2


def pushforward_mass(
    A: BallSet,
    t: float,
    s: float,
    n: int,
    samples: int,
    seed: int,
    ctx: RenormContext,
) -> EnsembleStats:
    """Normalized mass of the flowed set under the weighted measure.

    Importance form: mean over pair samples of 1_A(u) * exp(H(u) - E(flow_t u)),
    divided by the unrestricted mean of the same weight, so unknown
    normalization constants cancel.  The returned stats accumulate the
    linearized per-sample contributions of the ratio, whose mean is the
    estimate and whose spread gives the delta-method interval.
    """
    if ctx.n != n:
        raise BadShape(f"context cutoff {ctx.n} does not match N = {n}")
    if samples < _MIN_SAMPLES:
        raise InsufficientSamples(f"need >= {_MIN_SAMPLES} samples, got {samples}")
    spec = MeasureSpec(s=s, kind="nu", m=n)
    params = FlowParams(n=n, dt=1e-3, t=t)
    chunk = max(8, _CHUNK_POINTS // ctx.grid**3)

    def work(lo, hi):
        drawn = sample_batch(spec, seed, np.arange(lo, hi))
        low = PhasePoint(_at_radius(drawn.u, n), _at_radius(drawn.v, n))
        inside = A.contains(low)
        h0 = _hamiltonian(low, ctx)
        moved = evolve(low, params, ctx) if t != 0.0 else low
        weight = np.exp(h0 - full_energy(moved, ctx).total)
        return weight, inside

    parts = _map_chunks(work, samples, chunk)
    weight = np.concatenate([w for w, _ in parts])
    inside = np.concatenate([i for _, i in parts])
    acceptance = inside.mean()
    if acceptance < 0.001:
        raise DegenerateSet(f"set acceptance {acceptance:.2%} below 0.1%")
    if acceptance < 0.01:
        _log.warning("set acceptance %.2f%% is thin; widen the ball", 100 * acceptance)
    # self-normalized importance weights are heavy-tailed; with a tiny
    # effective sample size the delta-method interval is untrustworthy
    ess = float(weight.sum()) ** 2 / float((weight**2).sum())
    if ess < max(10.0, 0.001 * samples):
        _log.warning("effective sample size %.1f of %d; interval unreliable", ess, samples)
    hit = np.where(inside, weight, 0.0)
    denom = weight.mean()
    ratio = hit.mean() / denom
    linearized = ratio + (hit - ratio * weight) / denom
    return EnsembleStats.from_samples(linearized)
