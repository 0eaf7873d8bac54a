"""Spectral core: transforms, frequency operators, dyadic blocks, cubic."""

import numpy as np
import pytest

from wrlb import spectral as sp
from wrlb.errors import BadOrder, BadShape, GridTooSmall


def random_real_field(m, seed, scale=None):
    """Hermitian-symmetric coefficient cube with an optional mode decay."""
    rng = np.random.default_rng(seed)
    k = 2 * m + 1
    c = rng.standard_normal((k, k, k)) + 1j * rng.standard_normal((k, k, k))
    c = 0.5 * (c + np.conj(c[::-1, ::-1, ::-1]))
    if scale is not None:
        c *= scale(sp.mode_radius(m))
    return sp.SpectralField(c)


class TestTransforms:
    def test_round_trip(self):
        f = random_real_field(5, seed=0)
        g = sp.from_grid(sp.to_grid(f, 11), 5)
        assert np.max(np.abs(g.coeffs - f.coeffs)) < 1e-12

    def test_round_trip_oversampled(self):
        f = random_real_field(4, seed=1)
        for grid in (9, 13, 21):
            g = sp.from_grid(sp.to_grid(f, grid), 4)
            assert np.max(np.abs(g.coeffs - f.coeffs)) < 1e-12

    def test_grid_values_are_real_sums(self):
        # evaluate cos(n.x) on the grid directly and compare
        n = (2, -1, 3)
        f = sp.cosine(n, 4)
        grid = 9
        vals = sp.to_grid(f, grid)
        x = 2.0 * np.pi * np.arange(grid) / grid
        expect = np.cos(
            n[0] * x[:, None, None] + n[1] * x[None, :, None] + n[2] * x[None, None, :]
        )
        assert np.max(np.abs(vals - expect)) < 1e-12

    def test_parseval(self):
        f = random_real_field(6, seed=2)
        vals = sp.to_grid(f, 13)
        grid_mass = np.mean(vals**2)
        assert abs(grid_mass - sp.l2_norm_sq(f)) < 1e-12 * max(1.0, grid_mass)

    def test_mean_is_zero_mode(self):
        f = random_real_field(3, seed=3)
        vals = sp.to_grid(f, 7)
        assert abs(np.mean(vals) - f.mean) < 1e-13

    def test_batched_transform_matches_loop(self):
        fields = [random_real_field(3, seed=s) for s in range(4)]
        stacked = sp.SpectralField(np.stack([f.coeffs for f in fields]))
        vals = sp.to_grid(stacked, 9)
        for i, f in enumerate(fields):
            assert np.max(np.abs(vals[i] - sp.to_grid(f, 9))) < 1e-12

    def test_grid_too_small(self):
        f = random_real_field(4, seed=4)
        with pytest.raises(GridTooSmall):
            sp.to_grid(f, 7)
        with pytest.raises(GridTooSmall):
            sp.to_grid(f, 10)  # even grids are not part of the contract


class TestFrequencyOps:
    def test_projection_euclidean_cutoff(self):
        # cos(2 x1) sits at |n| = 2, so a cutoff at 1 removes it
        f = sp.cosine((2, 0, 0), 4)
        assert np.max(np.abs(sp.project(f, 1).coeffs)) == 0.0
        kept = sp.project(f, 2)
        assert np.max(np.abs(kept.coeffs - f.coeffs)) == 0.0

    def test_projection_removes_cube_corners(self):
        f = sp.cosine((2, 2, 2), 3)  # |n| = 3.46 > 3 although inside the cube
        assert np.max(np.abs(sp.project(f, 3).coeffs)) == 0.0

    def test_projection_idempotent_and_self_adjoint(self):
        f = random_real_field(5, seed=5)
        g = random_real_field(5, seed=6)
        pf = sp.project(f, 3)
        assert np.max(np.abs(sp.project(pf, 3).coeffs - pf.coeffs)) == 0.0
        lhs = sp.pairing(sp.project(f, 3), g)
        rhs = sp.pairing(f, sp.project(g, 3))
        assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(lhs))

    def test_riesz_eigenvalue(self):
        # D^4 cos(2 x1) = 2^4 cos(2 x1)
        f = sp.cosine((2, 0, 0), 4)
        g = sp.riesz(f, 4)
        assert np.max(np.abs(g.coeffs - 16.0 * f.coeffs)) < 1e-12

    def test_riesz_kills_constants(self):
        f = sp.constant(3.5, 2)
        assert np.max(np.abs(sp.riesz(f, 2).coeffs)) == 0.0

    def test_bessel_inverse_single_mode(self):
        # weight at |n| = 1 is (1 + 1)^{-1/2} for every s
        for s in (1.0, 2.5, 4.0):
            f = sp.cosine((1, 0, 0), 3)
            g = sp.bessel_inverse(f, s)
            assert np.max(np.abs(g.coeffs - f.coeffs / np.sqrt(2.0))) < 1e-12

    def test_bessel_inverse_pair(self):
        # multiplying by the forward weight then inverting is the identity
        f = random_real_field(4, seed=7)
        s = 4.0
        r2 = sp.mode_radius_sq(4)
        forward = np.where(r2 > 0, np.sqrt(r2 + r2 ** (s + 1)), 1.0)
        g = sp.bessel_inverse(sp.SpectralField(f.coeffs * forward), s)
        assert np.max(np.abs(g.coeffs - f.coeffs)) < 1e-12

    def test_partial_derivative_cosine(self):
        # d^2/dx1^2 cos(2 x1) = -4 cos(2 x1)
        f = sp.cosine((2, 0, 0), 4)
        g = sp.partial_derivative(f, (2, 0, 0))
        assert np.max(np.abs(g.coeffs + 4.0 * f.coeffs)) < 1e-12

    def test_partial_derivative_mixed(self):
        # d/dx1 d/dx3 cos(x1 + 2 x3) = -2 cos(x1 + 2 x3)
        f = sp.cosine((1, 0, 2), 3)
        g = sp.partial_derivative(f, (1, 0, 1))
        assert np.max(np.abs(g.coeffs + 2.0 * f.coeffs)) < 1e-12

    def test_partial_derivative_keeps_fields_real(self):
        f = random_real_field(3, seed=8)
        g = sp.partial_derivative(f, (1, 2, 0))
        assert g.hermitian_defect() < 1e-12

    def test_bad_multi_index(self):
        f = random_real_field(2, seed=9)
        with pytest.raises(BadOrder):
            sp.partial_derivative(f, (1, -1, 0))


class TestLittlewoodPaley:
    def test_partition_of_unity_on_lattice(self):
        m = 16
        r = sp.mode_radius(m)
        total = np.zeros_like(r)
        for j in range(sp.lp_block_count(m)):
            total += sp.lp_weight(r, j)
        assert np.max(np.abs(total - 1.0)) < 1e-12

    def test_block_supports(self):
        # chi_0 lives in B(0, 4/3); chi_j in the annulus 2^j*[3/8, 4/3]
        assert sp.lp_weight(4.0 / 3.0 + 1e-9, 0) == 0.0
        assert sp.lp_weight(0.5, 0) == 1.0
        for j in (1, 3, 5):
            assert sp.lp_weight(2.0**j * 0.375 - 1e-9, j) == 0.0
            assert sp.lp_weight(2.0**j * 4.0 / 3.0 + 1e-9, j) == 0.0
            assert sp.lp_weight(2.0**j, j) > 0.0

    def test_single_frequency_blocks(self):
        # |n| = 8 meets only blocks j = 3 and j = 4, and the two weights
        # are theta(1) and 1 - theta(1) with theta the smoothstep profile
        f = sp.cosine((8, 0, 0), 8)
        weights = []
        for j in range(sp.lp_block_count(8)):
            g = sp.littlewood_paley(f, j)
            w = g.coeffs[8 + 8, 8, 8].real * 2.0  # amplitude of the block
            weights.append(w)
            if j not in (3, 4):
                assert abs(w) == 0.0
        # independent evaluation of theta(1) from its defining formula
        t = (4.0 / 3.0 - 1.0) / (4.0 / 3.0 - 0.75)
        a, b = np.exp(-1.0 / t), np.exp(-1.0 / (1.0 - t))
        theta_1 = a / (a + b)
        assert abs(weights[3] - theta_1) < 1e-12
        assert abs(weights[4] - (1.0 - theta_1)) < 1e-12
        assert abs(sum(weights) - 1.0) < 1e-12

    def test_zero_mode_only_in_block_zero(self):
        f = sp.constant(2.0, 4)
        assert abs(sp.littlewood_paley(f, 0).mean - 2.0) < 1e-14
        for j in range(1, sp.lp_block_count(4)):
            assert np.max(np.abs(sp.littlewood_paley(f, j).coeffs)) == 0.0


def direct_convolution_cube(u, n):
    """O(N^6) reference for pi_N((pi_N u)^3): nested mode convolutions.

    sq[p] = sum_{a+b=p} c[a] c[b] over modes p in {-2m..2m}^3, then
    cube[q] = sum_{b} c[b] sq[q-b]; everything indexed by shifted slices.
    """
    m = u.m
    k = 2 * m + 1
    ball = sp.mode_radius_sq(m) <= n * n
    c = np.where(ball, u.coeffs, 0.0)
    sq = np.zeros((2 * k - 1,) * 3, dtype=np.complex128)
    for i in range(k):
        for j in range(k):
            for l in range(k):
                if c[i, j, l] != 0:
                    sq[i : i + k, j : j + k, l : l + k] += c[i, j, l] * c
    cube = np.zeros((k, k, k), dtype=np.complex128)
    for i in range(k):
        for j in range(k):
            for l in range(k):
                if c[i, j, l] != 0:
                    cube += c[i, j, l] * sq[
                        2 * m - i : 2 * m - i + k,
                        2 * m - j : 2 * m - j + k,
                        2 * m - l : 2 * m - l + k,
                    ]
    return sp.SpectralField(np.where(ball, cube, 0.0))


class TestCubic:
    def test_cos_cubed_identity(self):
        # cos^3(x1) = (3/4) cos(x1) + (1/4) cos(3 x1)
        f = sp.cosine((1, 0, 0), 3)
        g = sp.cubic_truncated(f, 3)
        expect = (0.75 * sp.cosine((1, 0, 0), 3) + 0.25 * sp.cosine((3, 0, 0), 3))
        assert np.max(np.abs(g.coeffs - expect.coeffs)) < 1e-12

    def test_cos_cubed_truncated(self):
        # with cutoff N = 2 the cos(3 x1) harmonic is projected away
        f = sp.cosine((1, 0, 0), 2)
        g = sp.cubic_truncated(f, 2)
        expect = 0.75 * sp.cosine((1, 0, 0), 2)
        assert np.max(np.abs(g.coeffs - expect.coeffs)) < 1e-12

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_direct_convolution(self, n):
        u = random_real_field(n, seed=10 + n, scale=lambda r: 1.0 / (1.0 + r**2))
        fast = sp.cubic_truncated(u, n)
        slow = direct_convolution_cube(u, n)
        assert np.max(np.abs(fast.coeffs - slow.coeffs)) < 1e-10

    def test_grid_requirement(self):
        u = random_real_field(2, seed=20)
        with pytest.raises(GridTooSmall):
            sp.cubic_truncated(u, 2, grid=7)

    def test_preserves_reality(self):
        u = random_real_field(3, seed=21)
        assert sp.cubic_truncated(u, 3).hermitian_defect() < 1e-12


class TestMultiply:
    def test_single_modes(self):
        # cos(x1) * cos(x1) = 1/2 + 1/2 cos(2 x1)
        f = sp.cosine((1, 0, 0), 1)
        prod = sp.multiply(f, f)
        expect = sp.constant(0.5, 2) + 0.5 * sp.cosine((2, 0, 0), 2)
        assert np.max(np.abs(prod.coeffs - expect.coeffs)) < 1e-12

    def test_band_is_exact(self):
        f = random_real_field(2, seed=22)
        g = random_real_field(3, seed=23)
        prod = sp.multiply(f, g)
        assert prod.m == 5
        # compare against a heavily oversampled grid product
        grid = 31
        vals = sp.to_grid(sp.pad_to(f, 5), grid) * sp.to_grid(sp.pad_to(g, 5), grid)
        expect = sp.from_grid(vals, 5)
        assert np.max(np.abs(prod.coeffs - expect.coeffs)) < 1e-12


class TestSnapshots:
    def test_round_trip(self, tmp_path):
        f = random_real_field(3, seed=30)
        path = tmp_path / "field.wrlb"
        sp.save_snapshot(path, f, s=4.0)
        g, s = sp.load_snapshot(path)
        assert s == 4.0
        assert g.m == 3
        assert np.max(np.abs(g.coeffs - f.coeffs)) == 0.0

    def test_header_layout(self, tmp_path):
        f = sp.constant(1.0, 1)
        path = tmp_path / "field.wrlb"
        sp.save_snapshot(path, f, s=2.5)
        raw = path.read_bytes()
        assert raw[:4] == b"WRLB"
        assert int.from_bytes(raw[4:8], "little") == 1  # version
        assert int.from_bytes(raw[8:12], "little") == 1  # mode radius
        assert np.frombuffer(raw[12:20], dtype="<f8")[0] == 2.5
        assert len(raw) == 20 + 27 * 16

    def test_rejects_foreign_files(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"JUNKxxxxxxxxxxxxxxxxxxxx")
        with pytest.raises(BadShape):
            sp.load_snapshot(path)

    def test_truncation_detected(self, tmp_path):
        f = random_real_field(2, seed=31)
        path = tmp_path / "field.wrlb"
        sp.save_snapshot(path, f, s=4.0)
        raw = path.read_bytes()
        path.write_bytes(raw[:-8])
        with pytest.raises(BadShape):
            sp.load_snapshot(path)


class TestMultiIndices:
    def test_counts(self):
        # C(k+2, 2) indices of exact order k in three variables
        assert len(sp.multi_indices(0)) == 1
        assert len(sp.multi_indices(3)) == 10
        assert len(sp.multi_indices(4)) == 15
        assert len(sp.multi_indices_upto(3)) == 20

    def test_orders(self):
        for alpha in sp.multi_indices(3):
            assert sum(alpha) == 3
