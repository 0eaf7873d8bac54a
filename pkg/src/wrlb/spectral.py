"""Spectral representation of real fields on the 3-torus.

A field is stored as the dense cube of Fourier coefficients c[n] for
n in {-M..M}^3 against the basis e^{i n.x}, with the torus carrying
unit total mass, so Parseval reads  integral |u|^2 = sum |c[n]|^2  with
no 2*pi factors.  Real fields satisfy the Hermitian symmetry
c[-n] = conj(c[n]); every constructor in the package preserves it.

Coefficient arrays may carry leading batch axes: all operators act on
the trailing three axes and broadcast over the rest.  That is what
makes the ensemble code in the other modules fast enough, so keep it
intact when editing.

Physical-space evaluation uses real FFTs on G^3 uniform grids (G odd).
A grid of size G represents a band-M field exactly when G >= 2M+1, and
a pointwise product of fields with band sum B needs G >= 2B+1 for its
coefficients to be alias-free.
"""

from dataclasses import dataclass
from functools import lru_cache
import struct

import numpy as np
from scipy import fft as _fft

from .errors import BadOrder, BadShape, GridTooSmall

SNAPSHOT_MAGIC = b"WRLB"
SNAPSHOT_VERSION = 1


# ----------------------------------------------------------------------
# mode bookkeeping


@lru_cache(maxsize=None)
def axis_modes(m: int) -> np.ndarray:
    """Integer mode numbers -m..m along one axis (read-only)."""
    n = np.arange(-m, m + 1)
    n.flags.writeable = False
    return n


@lru_cache(maxsize=None)
def mode_radius_sq(m: int) -> np.ndarray:
    """|n|^2 over the mode cube, shape (2m+1,)*3 (read-only)."""
    n = axis_modes(m).astype(np.float64)
    r2 = n[:, None, None] ** 2 + n[None, :, None] ** 2 + n[None, None, :] ** 2
    r2.flags.writeable = False
    return r2


@lru_cache(maxsize=None)
def mode_radius(m: int) -> np.ndarray:
    r = np.sqrt(mode_radius_sq(m))
    r.flags.writeable = False
    return r


def multi_indices(order: int) -> list[tuple[int, int, int]]:
    """All 3d multi-indices of exactly the given total order, lex sorted."""
    if order < 0:
        raise BadOrder(f"multi-index order must be >= 0, got {order}")
    out = []
    for a in range(order, -1, -1):
        for b in range(order - a, -1, -1):
            out.append((a, b, order - a - b))
    return out


def multi_indices_upto(order: int) -> list[tuple[int, int, int]]:
    """All 3d multi-indices with total order 0..order."""
    out = []
    for k in range(order + 1):
        out.extend(multi_indices(k))
    return out


# ----------------------------------------------------------------------
# the field container


@dataclass
class SpectralField:
    """Dense coefficient cube of a real field, with optional batch axes.

    coeffs has shape (..., 2m+1, 2m+1, 2m+1); index [i,j,k] holds the
    coefficient of e^{i n.x} for n = (i-m, j-m, k-m).
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.ndim < 3:
            raise BadShape("coefficient array needs at least 3 axes")
        k = c.shape[-1]
        if c.shape[-3:] != (k, k, k) or k % 2 == 0:
            raise BadShape(f"trailing axes must be an odd cube, got {c.shape[-3:]}")
        self.coeffs = c

    @property
    def m(self) -> int:
        """Mode radius: coefficients cover the cube {-m..m}^3."""
        return (self.coeffs.shape[-1] - 1) // 2

    @property
    def batch_shape(self) -> tuple:
        return self.coeffs.shape[:-3]

    def copy(self) -> "SpectralField":
        return SpectralField(self.coeffs.copy())

    @property
    def mean(self):
        """Spatial mean = the n = 0 coefficient (real part)."""
        m = self.m
        return self.coeffs[..., m, m, m].real

    def hermitian_defect(self):
        """Max |c[n] - conj(c[-n])| over the cube (0 for real fields)."""
        flipped = np.conj(self.coeffs[..., ::-1, ::-1, ::-1])
        return np.max(np.abs(self.coeffs - flipped))

    # light arithmetic so tests and demos read naturally
    def __add__(self, other):
        return SpectralField(self.coeffs + _coeffs_of(other, self.m))

    def __sub__(self, other):
        return SpectralField(self.coeffs - _coeffs_of(other, self.m))

    def __mul__(self, scalar):
        return SpectralField(self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(-self.coeffs)


def _coeffs_of(other, m: int) -> np.ndarray:
    if not isinstance(other, SpectralField):
        raise TypeError("can only combine SpectralField with SpectralField")
    if other.m != m:
        raise BadShape(f"mode radii differ: {m} vs {other.m}")
    return other.coeffs


def zeros(m: int, batch_shape: tuple = ()) -> SpectralField:
    k = 2 * m + 1
    return SpectralField(np.zeros(batch_shape + (k, k, k), dtype=np.complex128))


def constant(value: float, m: int) -> SpectralField:
    f = zeros(m)
    f.coeffs[m, m, m] = value
    return f


def cosine(n: tuple[int, int, int], m: int, amplitude: float = 1.0) -> SpectralField:
    """amplitude * cos(n.x); requires max|n_i| <= m."""
    if max(abs(c) for c in n) > m:
        raise BadShape(f"mode {n} outside cube of radius {m}")
    f = zeros(m)
    i, j, k = (c + m for c in n)
    f.coeffs[i, j, k] += amplitude / 2.0
    i, j, k = (m - c for c in n)
    f.coeffs[i, j, k] += amplitude / 2.0
    return f


def sine(n: tuple[int, int, int], m: int, amplitude: float = 1.0) -> SpectralField:
    """amplitude * sin(n.x); requires max|n_i| <= m."""
    if max(abs(c) for c in n) > m:
        raise BadShape(f"mode {n} outside cube of radius {m}")
    f = zeros(m)
    i, j, k = (c + m for c in n)
    f.coeffs[i, j, k] += -0.5j * amplitude
    i, j, k = (m - c for c in n)
    f.coeffs[i, j, k] += 0.5j * amplitude
    return f


def l2_norm_sq(f: SpectralField):
    """integral |f|^2 over the unit-mass torus (exact mode sum)."""
    return np.sum(np.abs(f.coeffs) ** 2, axis=(-3, -2, -1))


def pairing(f: SpectralField, g: SpectralField):
    """integral f*g for real fields: sum_n f[n] conj(g[n])."""
    if f.m != g.m:
        raise BadShape(f"mode radii differ: {f.m} vs {g.m}")
    return np.sum(f.coeffs * np.conj(g.coeffs), axis=(-3, -2, -1)).real


def pad_to(f: SpectralField, m: int) -> SpectralField:
    """Embed into a larger cube (or return a copy at the same radius)."""
    if m < f.m:
        raise BadShape(f"cannot pad radius {f.m} down to {m}")
    if m == f.m:
        return f.copy()
    out = zeros(m, f.batch_shape)
    d = m - f.m
    k = 2 * f.m + 1
    out.coeffs[..., d:d + k, d:d + k, d:d + k] = f.coeffs
    return out


def restrict_to(f: SpectralField, m: int) -> SpectralField:
    """Crop the cube to radius m, discarding coefficients outside it."""
    if m > f.m:
        raise BadShape(f"cannot restrict radius {f.m} up to {m}")
    d = f.m - m
    k = 2 * m + 1
    return SpectralField(f.coeffs[..., d:d + k, d:d + k, d:d + k].copy())


# ----------------------------------------------------------------------
# grid transforms (real FFT with an explicit mode embedding)


@lru_cache(maxsize=None)
class _Transform:
    """Cached scatter/gather layout between a mode cube and a G^3 grid."""

    def __init__(self, m: int, grid: int):
        if grid % 2 == 0:
            raise GridTooSmall(f"grid size must be odd, got {grid}")
        if grid < 2 * m + 1:
            raise GridTooSmall(f"grid {grid} cannot represent band {m}")
        self.m = m
        self.grid = grid
        modes = axis_modes(m)
        wrapped = np.mod(modes, grid)
        # advanced indices for the n3 >= 0 half of the cube
        self.i1 = wrapped[:, None, None]
        self.i2 = wrapped[None, :, None]
        self.i3 = np.arange(0, m + 1)[None, None, :]

    def to_grid(self, coeffs: np.ndarray) -> np.ndarray:
        g, m = self.grid, self.m
        half = np.zeros(coeffs.shape[:-3] + (g, g, g // 2 + 1), dtype=np.complex128)
        half[..., self.i1, self.i2, self.i3] = coeffs[..., m:]
        vals = _fft.irfftn(half, s=(g, g, g), axes=(-3, -2, -1))
        vals *= g ** 3
        return vals

    def from_grid(self, values: np.ndarray) -> np.ndarray:
        g, m = self.grid, self.m
        spec = _fft.rfftn(values, axes=(-3, -2, -1))
        pos = spec[..., self.i1, self.i2, self.i3]
        pos /= g ** 3
        k = 2 * m + 1
        out = np.empty(values.shape[:-3] + (k, k, k), dtype=np.complex128)
        out[..., m:] = pos
        out[..., :m] = np.conj(pos[..., ::-1, ::-1, -1:0:-1])
        return out


def to_grid(f: SpectralField, grid: int) -> np.ndarray:
    """Evaluate on the G^3 uniform grid; exact for G >= 2m+1."""
    return _Transform(f.m, grid).to_grid(f.coeffs)


def from_grid(values: np.ndarray, m: int) -> SpectralField:
    """Coefficients up to band m of gridded values (exact if band-limited)."""
    values = np.asarray(values, dtype=np.float64)
    grid = values.shape[-1]
    return SpectralField(_Transform(m, grid).from_grid(values))


# ----------------------------------------------------------------------
# frequency-side operators


def project(f: SpectralField, n: int) -> SpectralField:
    """Sharp frequency cutoff: zero every coefficient with |n| > N.

    The cutoff is Euclidean, so corner modes of the cube with
    |n| > N are removed even though they fit in the array.
    """
    if n < 0:
        raise BadShape(f"cutoff must be >= 0, got {n}")
    mask = mode_radius_sq(f.m) <= n * n
    return SpectralField(np.where(mask, f.coeffs, 0.0))


@lru_cache(maxsize=None)
def _ball_mask(m: int, n: int) -> np.ndarray:
    mask = mode_radius_sq(m) <= n * n
    mask.flags.writeable = False
    return mask


def riesz(f: SpectralField, s: float) -> SpectralField:
    """Homogeneous derivative weight |n|^s; the zero mode is annihilated."""
    if s < 0:
        raise BadShape(f"riesz order must be >= 0, got {s}")
    r = mode_radius(f.m)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(r > 0, r ** s, 0.0)
    return SpectralField(f.coeffs * w)


@lru_cache(maxsize=None)
def bessel_inverse_weights(m: int, s: float) -> np.ndarray:
    """Inverse smoothing weights: 1 at n = 0, (|n|^2+|n|^{2s+2})^{-1/2} else."""
    r2 = mode_radius_sq(m)
    with np.errstate(divide="ignore"):
        w = np.where(r2 > 0, 1.0 / np.sqrt(r2 + r2 ** (s + 1)), 1.0)
    w.flags.writeable = False
    return w


def bessel_inverse(f: SpectralField, s: float) -> SpectralField:
    """Apply the inverse of the wave-adapted Bessel-type weight.

    Multiplies mode n by (|n|^2 + |n|^{2s+2})^{-1/2} and leaves the
    zero mode alone, smoothing by s+1 derivatives at high frequency.
    """
    return SpectralField(f.coeffs * bessel_inverse_weights(f.m, float(s)))


def partial_derivative(f: SpectralField, alpha: tuple[int, int, int]) -> SpectralField:
    """Mixed partial of multi-index alpha: multiply by prod (i n_k)^{a_k}."""
    if len(alpha) != 3 or any(a < 0 for a in alpha):
        raise BadOrder(f"bad multi-index {alpha}")
    w = np.ones((1, 1, 1), dtype=np.complex128)
    n = axis_modes(f.m).astype(np.float64)
    shapes = [(-1, 1, 1), (1, -1, 1), (1, 1, -1)]
    for a, shape in zip(alpha, shapes):
        if a:
            w = w * (1j * n.reshape(shape)) ** a
    return SpectralField(f.coeffs * w)


# ----------------------------------------------------------------------
# Littlewood-Paley partition
#
# The dyadic profile is built from the exp(-1/t) mollifier: theta is 1
# on [0, 3/4], 0 on [4/3, inf), and C-infinity in between; the blocks
# chi_0 = theta(r) and chi_j = theta(r/2^j) - theta(r/2^{j-1})
# telescope to exactly 1 on every lattice point once j is exhausted.


def _smoothstep(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    scalar = r.ndim == 0
    if scalar:
        r = r[None]
    lo, hi = 0.75, 4.0 / 3.0
    t = (hi - r) / (hi - lo)
    out = np.empty_like(r)
    out[r <= lo] = 1.0
    out[r >= hi] = 0.0
    mid = (r > lo) & (r < hi)
    tm = t[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    out[mid] = a / (a + b)
    return out[0] if scalar else out


def lp_weight(r, j: int):
    """The j-th dyadic multiplier evaluated at radius r."""
    if j < 0:
        raise BadShape(f"block index must be >= 0, got {j}")
    r = np.asarray(r, dtype=np.float64)
    if j == 0:
        return _smoothstep(r)
    return _smoothstep(r / 2.0 ** j) - _smoothstep(r / 2.0 ** (j - 1))


def lp_block_count(m: int) -> int:
    """Number of blocks that can be non-zero on the radius-m cube.

    Chosen so that the partition sums to exactly 1 on every mode:
    beyond the last index the profile sits on its flat branch.
    """
    rmax = np.sqrt(3.0) * m
    j = 0
    while rmax / 2.0 ** j > 0.75:
        j += 1
    return j + 1


def littlewood_paley(f: SpectralField, j: int) -> SpectralField:
    """Project onto the j-th dyadic frequency block."""
    return SpectralField(f.coeffs * lp_weight(mode_radius(f.m), j))


# ----------------------------------------------------------------------
# nonlinear building blocks


def multiply(f: SpectralField, g: SpectralField) -> SpectralField:
    """Alias-free pointwise product; the result has band m_f + m_g."""
    if f.batch_shape != g.batch_shape:
        raise BadShape("batch shapes differ")
    m_out = f.m + g.m
    grid = 2 * m_out + 1
    vals = to_grid(pad_to(f, m_out), grid) * to_grid(pad_to(g, m_out), grid)
    return from_grid(vals, m_out)


def cubic_truncated(u: SpectralField, n: int, grid: int | None = None) -> SpectralField:
    """The projected cube pi_N((pi_N u)^3) at the ambient mode radius.

    Needs grid >= 4N+1: the cube of a band-N field has band 3N, and the
    retained coefficients |n| <= N must not collide with any alias.
    When no grid is given the minimal alias-free one is used.
    """
    if grid is None:
        grid = 4 * n + 1
    if grid < 4 * n + 1:
        raise GridTooSmall(f"cubic at cutoff {n} needs grid >= {4 * n + 1}, got {grid}")
    if n > u.m:
        raise BadShape(f"cutoff {n} exceeds mode radius {u.m}")
    low = restrict_to(u, n)
    low.coeffs *= _ball_mask(n, n)
    vals = to_grid(low, grid)
    vals *= vals * vals
    out = from_grid(vals, n)
    out.coeffs *= _ball_mask(n, n)
    return pad_to(out, u.m)


# ----------------------------------------------------------------------
# binary snapshots
#
# Layout: magic "WRLB", version u32, M u32, s f64, then the (2M+1)^3
# complex128 coefficients little-endian in lexicographic n-order (which
# is the C order of the cube).

_HEADER = struct.Struct("<4sIId")


def save_snapshot(path, f: SpectralField, s: float) -> None:
    if f.batch_shape != ():
        raise BadShape("snapshots hold a single field, not a batch")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, f.m, float(s)))
        fh.write(np.ascontiguousarray(f.coeffs, dtype="<c16").tobytes())


def load_snapshot(path) -> tuple[SpectralField, float]:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise BadShape("snapshot truncated before header end")
        magic, version, m, s = _HEADER.unpack(head)
        if magic != SNAPSHOT_MAGIC:
            raise BadShape(f"not a field snapshot (magic {magic!r})")
        if version != SNAPSHOT_VERSION:
            raise BadShape(f"unsupported snapshot version {version}")
        k = 2 * m + 1
        raw = fh.read(k ** 3 * 16)
        if len(raw) != k ** 3 * 16:
            raise BadShape("snapshot truncated before coefficient end")
        coeffs = np.frombuffer(raw, dtype="<c16").astype(np.complex128)
    return SpectralField(coeffs.reshape(k, k, k)), s
