"""Gaussian field ensembles and renormalization constants.

Two product Gaussian measures on phase points (u, v) are supported,
distinguished by their per-mode standard deviations:

  kind "mu"  (Bessel-potential weights)   u: <n>^-(s+1)   v: <n>^-s
  kind "nu"  (wave-adapted weights)  u: (|n|^2+|n|^{2s+2})^{-1/2}, 1 at n = 0
                                     v: (1+|n|^{2s})^{-1/2}

Samples are Karhunen-Loeve series with independent standard complex
Gaussians g[n] = conj(g[-n]), E|g[n]|^2 = 1, real at n = 0.  Every
sample is keyed by (seed, index) through a counter-based stream, so
ensembles are reproducible no matter how the index range is split.

The Wick square renormalizes (D^s u_N)^2 by the exact lattice constant
sigma_N = sum_{1<=|n|<=N} |n|^{2s} / (|n|^2 + |n|^{2s+2}),
which grows like N and equals 3.0 at N = 1 for every s.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Literal

import numpy as np

from . import rng
from .errors import BadOrder, BadShape, GridTooSmall, InsufficientSamples
from .spectral import (
    SpectralField,
    _Transform,
    _ball_mask,
    bessel_inverse_weights,
    mode_radius_sq,
    pad_to,
    partial_derivative,
    restrict_to,
)
from .dynamics import PhasePoint

Kind = Literal["mu", "nu"]


# ----------------------------------------------------------------------
# renormalization constant


@lru_cache(maxsize=None)
def sigma_n(s: float, n: int) -> float:
    """Exact lattice sum sum_{1<=|k|<=N} |k|^{2s} / (|k|^2 + |k|^{2s+2}).

    Evaluated term by term over the integer ball; no asymptotic
    approximation is involved.  Grows linearly in N in three dimensions.
    """
    if n < 0:
        raise BadShape(f"cutoff must be >= 0, got {n}")
    if n == 0:
        return 0.0
    r2 = mode_radius_sq(n)
    mask = (r2 > 0) & (r2 <= n * n)
    r2m = r2[mask]
    # |k|^{2s}/(|k|^2+|k|^{2s+2}) = |k|^{2s-2}/(1+|k|^{2s}), stabler to sum
    terms = r2m ** (s - 1.0) / (1.0 + r2m**s)
    return float(np.sum(terms))


@dataclass(frozen=True)
class RenormContext:
    """Bundle of (cutoff, regularity, sigma_N, evaluation grid).

    The grid must satisfy G >= 4N+1 so that every quartic integrand
    used by the energy functionals is alias-free.
    """

    n: int
    s: float
    sigma: float
    grid: int

    @classmethod
    def create(cls, n: int, s: float, grid: int | None = None) -> "RenormContext":
        if s <= 1.5:
            raise BadShape(f"regularity must exceed 3/2, got {s}")
        if grid is None:
            grid = 4 * n + 1
        if grid < 4 * n + 1 or grid % 2 == 0:
            raise GridTooSmall(
                f"context at cutoff {n} needs an odd grid >= {4 * n + 1}, got {grid}"
            )
        return cls(n=n, s=float(s), sigma=sigma_n(float(s), n), grid=grid)


# ----------------------------------------------------------------------
# measures and sampling


@dataclass(frozen=True)
class MeasureSpec:
    """A product Gaussian on phase points at mode radius m."""

    s: float
    kind: Kind = "nu"
    m: int = 8

    def __post_init__(self):
        if self.s <= 0.75:
            raise BadShape(f"regularity must exceed 3/4, got {self.s}")
        if self.kind not in ("mu", "nu"):
            raise BadShape(f"unknown measure kind {self.kind!r}")
        if self.m < 0:
            raise BadShape(f"mode radius must be >= 0, got {self.m}")

    def u_weights(self) -> np.ndarray:
        r2 = mode_radius_sq(self.m)
        if self.kind == "mu":
            return (1.0 + r2) ** (-(self.s + 1.0) / 2.0)
        return np.array(bessel_inverse_weights(self.m, self.s))

    def v_weights(self) -> np.ndarray:
        r2 = mode_radius_sq(self.m)
        if self.kind == "mu":
            return (1.0 + r2) ** (-self.s / 2.0)
        return 1.0 / np.sqrt(1.0 + r2**self.s)


@lru_cache(maxsize=None)
def _hermitian_layout(m: int):
    """Flat indices of lexicographically positive modes and their mirrors."""
    k = 2 * m + 1
    n1, n2, n3 = np.meshgrid(*(np.arange(-m, m + 1),) * 3, indexing="ij")
    pos = (n1 > 0) | ((n1 == 0) & (n2 > 0)) | ((n1 == 0) & (n2 == 0) & (n3 > 0))
    flat = np.arange(k**3).reshape(k, k, k)
    rep = flat[pos]
    mirror = flat[::-1, ::-1, ::-1][pos]
    center = flat[m, m, m]
    return rep, mirror, int(center)


def _unit_cubes(m: int, seed: int, indices: np.ndarray, blocks: int) -> np.ndarray:
    """Standard Hermitian Gaussian cubes, shape (len(indices), blocks, k,k,k).

    Per sample the stream layout is fixed: u-block first (re parts, im
    parts, then the real center mode), v-block second.  Consumers of the
    u-marginal therefore draw a prefix and stay consistent with full
    phase-point consumers at the same (seed, index).
    """
    rep, mirror, center = _hermitian_layout(m)
    k = 2 * m + 1
    nrep = rep.size
    per_block = 2 * nrep + 1
    out = np.empty((len(indices), blocks, k**3), dtype=np.complex128)
    root_half = np.sqrt(0.5)
    for row, idx in enumerate(indices):
        draws = rng.standard_normals(seed, int(idx), blocks * per_block)
        for b in range(blocks):
            chunk = draws[b * per_block : (b + 1) * per_block]
            g = root_half * (chunk[:nrep] + 1j * chunk[nrep : 2 * nrep])
            cube = out[row, b]
            cube[rep] = g
            cube[mirror] = np.conj(g)
            cube[center] = chunk[2 * nrep]
    return out.reshape(len(indices), blocks, k, k, k)


def sample(spec: MeasureSpec, seed: int, index: int = 0) -> PhasePoint:
    """Draw one phase point; bit-identical for identical (seed, index)."""
    p = sample_batch(spec, seed, np.array([index]))
    return PhasePoint(
        SpectralField(p.u.coeffs[0]), SpectralField(p.v.coeffs[0])
    )


def sample_batch(spec: MeasureSpec, seed: int, indices) -> PhasePoint:
    """Draw a batch of phase points stacked along a leading axis."""
    indices = np.asarray(indices)
    cubes = _unit_cubes(spec.m, seed, indices, blocks=2)
    u = cubes[:, 0] * spec.u_weights()
    v = cubes[:, 1] * spec.v_weights()
    return PhasePoint(SpectralField(u), SpectralField(v))


def sample_u_batch(spec: MeasureSpec, seed: int, indices) -> SpectralField:
    """Draw only the u-marginal (prefix of the same stream layout)."""
    indices = np.asarray(indices)
    cubes = _unit_cubes(spec.m, seed, indices, blocks=1)
    return SpectralField(cubes[:, 0] * spec.u_weights())


# ----------------------------------------------------------------------
# Wick square and mixed derivative products


def _at_radius(f: SpectralField, n: int) -> SpectralField:
    """Truncate to the Euclidean ball of radius n, stored on the n-cube."""
    if f.m > n:
        g = restrict_to(f, n)
    elif f.m < n:
        g = pad_to(f, n)
    else:
        g = f.copy()
    g.coeffs *= _ball_mask(n, n)
    return g


def wick_square(u: SpectralField, ctx: RenormContext) -> SpectralField:
    """(D^s pi_N u)^2 - sigma_N, exact up to its full band 2N.

    The subtraction recenters the square so that its ensemble mean under
    the wave-adapted measure vanishes identically.
    """
    n = ctx.n
    if ctx.grid < 3 * n + 1:
        raise GridTooSmall(
            f"wick square at cutoff {n} needs grid >= {3 * n + 1}, got {ctx.grid}"
        )
    if n > u.m:
        raise BadShape(f"cutoff {n} exceeds mode radius {u.m}")
    low = _at_radius(u, n)
    dvals = _Transform(n, ctx.grid).to_grid(
        low.coeffs * np.where(mode_radius_sq(n) > 0, mode_radius_sq(n) ** (ctx.s / 2.0), 0.0)
    )
    q = dvals * dvals
    q -= ctx.sigma
    return SpectralField(_Transform(2 * n, ctx.grid).from_grid(q))


def mixed_product(
    v: SpectralField,
    u: SpectralField,
    kappa: tuple[int, int, int],
    alpha: tuple[int, int, int],
    ctx: RenormContext,
) -> SpectralField:
    """Pointwise product (d^kappa pi_N v)(d^alpha pi_N u), alias-free.

    kappa must have order exactly s-1 and alpha order at most s; these
    are the only combinations the energy estimate ever needs.
    """
    s = int(ctx.s)
    if sum(kappa) != s - 1:
        raise BadOrder(f"|kappa| must equal s-1 = {s - 1}, got {sum(kappa)}")
    if sum(alpha) > s:
        raise BadOrder(f"|alpha| must be <= s = {s}, got {sum(alpha)}")
    if ctx.grid < 4 * ctx.n + 1:
        raise GridTooSmall(
            f"mixed product at cutoff {ctx.n} needs grid >= {4 * ctx.n + 1}"
        )
    n = ctx.n
    dv = partial_derivative(_at_radius(v, n), kappa)
    du = partial_derivative(_at_radius(u, n), alpha)
    tr = _Transform(n, ctx.grid)
    vals = tr.to_grid(dv.coeffs) * tr.to_grid(du.coeffs)
    return SpectralField(_Transform(2 * n, ctx.grid).from_grid(vals))


# ----------------------------------------------------------------------
# ensemble spectrum diagnostics


@dataclass
class DecayFit:
    """Least-squares fit of log E|u_hat(n)|^2 against log <n> over shells."""

    slope: float
    intercept: float
    slope_se: float
    radii: np.ndarray
    mean_sq: np.ndarray
    stderr: np.ndarray


def spectral_decay_fit(
    fields: Iterable[SpectralField], radii, min_samples: int = 1000
) -> DecayFit:
    """Fit the power law of the ensemble mode spectrum over radial shells.

    `fields` may yield batched SpectralFields; every leading-axis entry
    counts as one sample.  Shell r collects the modes with
    |n| in [r-1/2, r+1/2).  The shell list must span at least a factor
    of 8 in radius for the fit to be meaningful.
    """
    radii = np.asarray(sorted(float(r) for r in radii))
    if radii.size < 2 or radii[-1] < 8.0 * radii[0]:
        raise BadShape("shell radii must span at least a factor of 8")
    masks = None
    count = 0
    sums = np.zeros(radii.size)
    sq_sums = np.zeros(radii.size)
    for f in fields:
        if masks is None:
            r = np.sqrt(mode_radius_sq(f.m))
            masks = [
                (r >= rad - 0.5) & (r < rad + 0.5) for rad in radii
            ]
            if any(not m.any() for m in masks):
                raise BadShape("a requested shell contains no lattice modes")
        power = np.abs(f.coeffs) ** 2
        flat = power.reshape(-1, *power.shape[-3:])
        for i, mask in enumerate(masks):
            shell_means = flat[:, mask].mean(axis=1)
            sums[i] += shell_means.sum()
            sq_sums[i] += (shell_means**2).sum()
        count += flat.shape[0]
    if count < min_samples:
        raise InsufficientSamples(f"need >= {min_samples} samples, got {count}")
    mean_sq = sums / count
    var = np.maximum(sq_sums / count - mean_sq**2, 0.0)
    stderr = np.sqrt(var / count)
    x = np.log(np.sqrt(1.0 + radii**2))
    y = np.log(mean_sq)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = max(x.size - 2, 1)
    sxx = np.sum((x - x.mean()) ** 2)
    slope_se = float(np.sqrt(np.sum(resid**2) / dof / sxx))
    return DecayFit(float(slope), float(intercept), slope_se, radii, mean_sq, stderr)


# ----------------------------------------------------------------------
# measure equivalence diagnostic


def kakutani_partial_sum(s: float, n: int) -> float:
    """Partial sum of squared deviations of the per-mode sd ratios.

    Compares the mu and nu per-mode standard deviations:
    sum over |k| <= N of (a_k/b_k - 1)^2, u- and v-components together.
    Bounded partial sums are the discrete signature of measure
    equivalence; the increments here decay like 1/N.
    """
    if s <= 0.75:
        raise BadShape(f"regularity must exceed 3/4, got {s}")
    if n < 1:
        raise BadShape(f"cutoff must be >= 1, got {n}")
    mu = MeasureSpec(s=s, kind="mu", m=n)
    nu = MeasureSpec(s=s, kind="nu", m=n)
    ball = mode_radius_sq(n) <= n * n
    total = 0.0
    for a, b in (
        (mu.u_weights(), nu.u_weights()),
        (mu.v_weights(), nu.v_weights()),
    ):
        ratio = a[ball] / b[ball]
        total += float(np.sum((ratio - 1.0) ** 2))
    return total
