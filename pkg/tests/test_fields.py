import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from llglab.fields import (
    SpinField,
    Trajectory,
    as_complex_components,
    derivative,
    divergence,
    gradient,
    laplacian,
    load_snapshot,
    make_grid,
    save_snapshot,
    to_spectral,
)

TWO_PI = 2.0 * np.pi


def band_limited(grid, seed, max_mode=None, complex_field=False):
    rng = np.random.default_rng(seed)
    if max_mode is None:
        max_mode = grid.n // 4
    coeffs = np.zeros(grid.shape, dtype=complex)
    modes = np.fft.fftfreq(grid.n, d=1.0 / grid.n).astype(int)
    keep = np.abs(modes) <= max_mode
    mask = np.ones(grid.shape, dtype=bool)
    for ax in range(grid.dim):
        mask = mask & grid.axis_table(ax, keep)
    coeffs[mask] = rng.standard_normal(mask.sum()) + 1j * rng.standard_normal(mask.sum())
    out = np.fft.ifftn(coeffs, axes=grid.axes)
    return out if complex_field else out.real


class TestGrid:
    def test_wavenumbers_and_spacing(self):
        g = make_grid(1, 16, TWO_PI)
        assert sorted(np.round(g.wavenumbers).astype(int)) == list(range(-8, 8))
        assert g.h == pytest.approx(np.pi / 8, rel=1e-15)

    def test_2d_grid_k_range(self):
        g = make_grid(2, 32, 1.0)
        assert g.num_points == 1024
        assert g.wavenumbers.min() == pytest.approx(-32 * np.pi)
        assert g.wavenumbers.max() == pytest.approx(30 * np.pi)

    def test_3d_accepted_and_bad_sizes_rejected(self):
        make_grid(3, 8, TWO_PI)
        with pytest.raises(ValueError):
            make_grid(3, 7, TWO_PI)
        with pytest.raises(ValueError):
            make_grid(1, 4, TWO_PI)
        with pytest.raises(ValueError):
            make_grid(1, 24, TWO_PI)
        with pytest.raises(ValueError):
            make_grid(4, 16, TWO_PI)
        with pytest.raises(ValueError):
            make_grid(2, 16, -1.0)


class TestDerivatives:
    def test_sin_to_cos(self):
        g = make_grid(1, 64, TWO_PI)
        x = g.coordinates()[0]
        assert np.abs(derivative(g, np.sin(x), 0, 1) - np.cos(x)).max() < 1e-12

    def test_constant_derivative_zero(self):
        g = make_grid(2, 16, TWO_PI)
        f = np.full(g.shape, 3.7)
        for axis in range(2):
            for order in (1, 2):
                assert np.abs(derivative(g, f, axis, order)).max() < 1e-13

    def test_fourier_eigenfunction_second_derivative(self):
        g = make_grid(1, 64, TWO_PI)
        x = g.coordinates()[0]
        f = np.exp(2j * x)
        assert np.abs(derivative(g, f, 0, 2) + 4.0 * f).max() < 1e-12

    def test_laplacian_analytic(self):
        g = make_grid(2, 32, TWO_PI)
        x, y = g.coordinates()
        f = np.sin(x) + np.cos(y)
        assert np.abs(laplacian(g, f) + f).max() < 1e-12

    def test_div_grad_equals_laplacian_on_band_limited(self):
        g = make_grid(2, 32, TWO_PI)
        f = band_limited(g, seed=3)
        lhs = divergence(g, gradient(g, f))
        rhs = laplacian(g, f)
        assert np.abs(lhs - rhs).max() < 1e-12 * max(1.0, np.abs(rhs).max())

    def test_gradient_of_constant_vanishes(self):
        g = make_grid(3, 8, TWO_PI)
        assert np.abs(gradient(g, np.ones(g.shape))).max() < 1e-14

    def test_validation(self):
        g = make_grid(2, 16, TWO_PI)
        f = np.zeros(g.shape)
        with pytest.raises(ValueError):
            derivative(g, f, 2, 1)
        with pytest.raises(ValueError):
            derivative(g, f, 0, 3)


class TestSpectralProperties:
    @given(seed=st.integers(0, 10_000), dim=st.sampled_from([1, 2]))
    def test_parseval(self, seed, dim):
        g = make_grid(dim, 16, TWO_PI)
        f = band_limited(g, seed, complex_field=True)
        coeffs = to_spectral(g, f)
        phys = (np.abs(f) ** 2).sum() * g.cell_volume
        spec = (np.abs(coeffs) ** 2).sum() * g.cell_volume / g.num_points
        assert phys == pytest.approx(spec, rel=1e-12)

    @given(seed=st.integers(0, 10_000), alpha=st.floats(-5, 5), beta=st.floats(-5, 5))
    def test_linearity(self, seed, alpha, beta):
        g = make_grid(1, 32, TWO_PI)
        f = band_limited(g, seed)
        h = band_limited(g, seed + 1)
        combined = derivative(g, alpha * f + beta * h, 0, 1)
        split = alpha * derivative(g, f, 0, 1) + beta * derivative(g, h, 0, 1)
        scale = max(1.0, np.abs(split).max())
        assert np.abs(combined - split).max() < 1e-12 * scale

    @given(seed=st.integers(0, 10_000))
    def test_round_trip(self, seed):
        g = make_grid(2, 16, TWO_PI)
        f = band_limited(g, seed, complex_field=True)
        back = np.fft.ifftn(to_spectral(g, f), axes=g.axes)
        assert np.abs(back - f).max() < 1e-12 * np.abs(f).max()


class TestSpinField:
    def test_shape_validation(self):
        g = make_grid(1, 16, TWO_PI)
        with pytest.raises(ValueError):
            SpinField.from_values(g, np.zeros((2, 16)))

    def test_renormalization(self):
        g = make_grid(1, 16, TWO_PI)
        raw = np.stack([np.full(g.shape, 2.0), np.zeros(g.shape), np.ones(g.shape)])
        m = SpinField.from_values(g, raw)
        assert m.unit_defect() < 1e-15


class TestTrajectory:
    def test_validation(self):
        with pytest.raises(ValueError):
            Trajectory(np.array([0.0, 1.0]), [np.zeros(3)])
        with pytest.raises(ValueError):
            Trajectory(np.array([0.0, 0.0]), [np.zeros(3), np.zeros(3)])


class TestSnapshots:
    def test_real_round_trip(self, tmp_path):
        g = make_grid(2, 16, TWO_PI)
        values = np.random.default_rng(0).standard_normal((3,) + g.shape)
        path = tmp_path / "field.llgf"
        save_snapshot(path, g, values)
        g2, comps = load_snapshot(path)
        assert (g2.dim, g2.n) == (g.dim, g.n)
        assert g2.length == pytest.approx(g.length, rel=0, abs=0)
        assert comps.shape == (3,) + g.shape
        assert np.array_equal(comps, values)

    def test_complex_round_trip(self, tmp_path):
        g = make_grid(1, 16, TWO_PI)
        u = (np.random.default_rng(1).standard_normal((2, 16))
             + 1j * np.random.default_rng(2).standard_normal((2, 16)))
        path = tmp_path / "u.llgf"
        save_snapshot(path, g, u)
        _, comps = load_snapshot(path)
        assert comps.shape == (4, 16)
        assert np.array_equal(as_complex_components(comps), u)

    def test_header_magic(self, tmp_path):
        path = tmp_path / "bad.llgf"
        path.write_bytes(b"NOPE" + bytes(24))
        with pytest.raises(ValueError):
            load_snapshot(path)
        path.write_bytes(b"LLGF")
        with pytest.raises(ValueError):
            load_snapshot(path)

    def test_header_layout(self, tmp_path):
        g = make_grid(1, 8, 1.5)
        path = tmp_path / "h.llgf"
        save_snapshot(path, g, np.zeros(g.shape))
        raw = path.read_bytes()
        assert raw[:4] == b"LLGF"
        import struct

        version, dim, n = struct.unpack("<III", raw[4:16])
        (length,) = struct.unpack("<d", raw[16:24])
        (ncomp,) = struct.unpack("<I", raw[24:28])
        assert (version, dim, n, ncomp) == (1, 1, 8, 1)
        assert length == 1.5
