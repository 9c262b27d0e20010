import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from changeprob.ingest import (HeightField, PGMFormatError, PGMHeaderError, PGMMaxvalError, PGMTruncatedError,
                               PointCloud, add_white_noise, crop, detrend, grid_point_cloud, image_std,
                               read_pgm, read_xyz, sparse_cells, write_pgm)


def _write_bytes(path, data):
    path.write_bytes(data)
    return path


# ---------------------------------------------------------------- PGM

def test_read_pgm_8bit_bytes(tmp_path):
    p = _write_bytes(tmp_path / "a.pgm", b"P5\n2 2\n255\n" + bytes([0, 128, 255, 0]))
    f = read_pgm(p)
    np.testing.assert_array_equal(f.values, [[0, 128], [255, 0]])
    assert f.w_x == 2 and f.w_y == 2


def test_read_pgm_16bit_big_endian_with_comment(tmp_path):
    payload = np.array([[1, 256], [65535, 2]], dtype=">u2").tobytes()
    p = _write_bytes(tmp_path / "b.pgm", b"P5\n# made by hand\n2 2\n65535\n" + payload)
    np.testing.assert_array_equal(read_pgm(p).values, [[1, 256], [65535, 2]])


def test_read_pgm_rejects_ascii(tmp_path):
    p = _write_bytes(tmp_path / "c.pgm", b"P2\n2 2\n255\n0 1 2 3\n")
    with pytest.raises(PGMFormatError, match="unsupported format"):
        read_pgm(p)


@pytest.mark.parametrize("data, exc", [
    (b"P5\n2 x\n255\n" + bytes(4), PGMHeaderError),
    (b"P5\n2 2\n", PGMHeaderError),
    (b"P5\n2 2\n255\n" + bytes(3), PGMTruncatedError),
    (b"P5\n2 2\n1023\n" + bytes(8), PGMMaxvalError),
])
def test_read_pgm_distinct_errors(tmp_path, data, exc):
    p = _write_bytes(tmp_path / "bad.pgm", data)
    with pytest.raises(exc):
        read_pgm(p)


def test_write_pgm_8bit_extremes(tmp_path):
    write_pgm(HeightField([[0.0], [10.53]]), tmp_path / "e.pgm", bitdepth=8)
    np.testing.assert_array_equal(read_pgm(tmp_path / "e.pgm").values.ravel(), [0, 255])


def test_write_pgm_round_half_up(tmp_path):
    # 255*v/10 for v in 0,5,10,2 -> 0, 127.5, 255, 51
    write_pgm(HeightField([[0, 5], [10, 2]]), tmp_path / "f.pgm", bitdepth=8)
    raw = (tmp_path / "f.pgm").read_bytes()
    assert raw.endswith(bytes([0, 128, 255, 51]))


def test_write_pgm_constant_is_zero(tmp_path):
    write_pgm(HeightField(np.full((3, 4), 7.5)), tmp_path / "g.pgm")
    assert not read_pgm(tmp_path / "g.pgm").values.any()


@pytest.mark.parametrize("bitdepth, maxval", [(8, 255), (16, 65535)])
def test_pgm_round_trip_identity(tmp_path, bitdepth, maxval):
    rng = np.random.default_rng(3)
    v = rng.integers(0, maxval + 1, size=(7, 5)).astype(float)
    v[0, 0], v[-1, -1] = 0, maxval          # full range so the rescale is the identity
    write_pgm(HeightField(v), tmp_path / "r.pgm", bitdepth=bitdepth)
    np.testing.assert_array_equal(read_pgm(tmp_path / "r.pgm").values, v)


def test_write_pgm_header(tmp_path):
    write_pgm(HeightField(np.zeros((3, 4))), tmp_path / "h.pgm")
    assert (tmp_path / "h.pgm").read_bytes().startswith(b"P5\n4 3\n65535\n")


# ---------------------------------------------------------------- point clouds

def test_read_xyz_mixed_separators(tmp_path):
    p = tmp_path / "c.xyz"
    p.write_text("# x y z\n0,0,1\n1 0 2\n\n0 1 3  # trailing\n", encoding="utf-8")
    np.testing.assert_array_equal(read_xyz(p).points, [[0, 0, 1], [1, 0, 2], [0, 1, 3]])


def test_read_xyz_empty(tmp_path):
    p = tmp_path / "e.xyz"
    p.write_text("# nothing\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_xyz(p)


def test_point_cloud_empty():
    with pytest.raises(ValueError):
        PointCloud(np.empty((0, 3)))


def test_grid_single_point():
    f = grid_point_cloud(PointCloud([[0, 0, 7]]), 0.3)
    np.testing.assert_array_equal(f.values, [[7]])
    assert f.pixel_spacing == 0.3


def test_grid_points_on_nodes():
    pts = [(x, y, 10 * y + x) for y in range(3) for x in range(4)]
    f = grid_point_cloud(PointCloud(pts), 1.0)
    np.testing.assert_array_equal(f.values, np.arange(3)[:, None] * 10 + np.arange(4))


def _brute_grid(points, cell):
    pts = np.asarray(points, dtype=float)
    lo = pts[:, :2].min(axis=0)
    n = np.floor((pts[:, :2].max(axis=0) - lo) / cell + 1e-9).astype(int) + 1
    out = np.empty((n[1], n[0]))
    for r in range(n[1]):
        for c in range(n[0]):
            qx, qy = lo[0] + c * cell, lo[1] + r * cell
            best, best_d = None, None
            for i, (x, y, _) in enumerate(pts):
                d = (x - qx) ** 2 + (y - qy) ** 2
                if best_d is None or d < best_d:
                    best, best_d = i, d
            out[r, c] = pts[best, 2]
    return out


def test_grid_tie_break_lowest_index():
    # node (0.5, 0.5) of a 0.5 grid is equidistant to all four corners
    pts = [(1, 1, 4.0), (0, 0, 1.0), (1, 0, 2.0), (0, 1, 3.0)]
    f = grid_point_cloud(PointCloud(pts), 0.5)
    assert f.values[1, 1] == 4.0
    np.testing.assert_array_equal(f.values, _brute_grid(pts, 0.5))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 200), st.integers(0, 2 ** 32 - 1), st.sampled_from([0.1, 0.25, 0.5]))
def test_grid_matches_brute_force(n, seed, cell):
    rng = np.random.default_rng(seed)
    # coarse coordinates produce plenty of exact ties
    pts = np.column_stack([rng.integers(0, 6, n) * 0.25, rng.integers(0, 6, n) * 0.25, rng.normal(size=n)])
    np.testing.assert_array_equal(grid_point_cloud(PointCloud(pts), cell).values, _brute_grid(pts, cell))


def test_sparse_cells_flagged(caplog):
    pts = [(0, 0, 0), (10, 10, 1)]
    mask = sparse_cells(PointCloud(pts), 1.0)
    assert mask[5, 5] and not mask[0, 0]
    with caplog.at_level("WARNING"):
        grid_point_cloud(PointCloud(pts), 1.0)
    assert "farther than 4 cells" in caplog.text


# ---------------------------------------------------------------- detrend

def test_detrend_exact_plane():
    i, j = np.indices((6, 9))
    out = detrend(HeightField(2 * i + 3 * j + 5))
    assert not out.values.any()


def test_detrend_normal_equations_oracle():
    # least-squares line through (0,0),(1,1),(2,4),(3,9),(4,16) is 4x - 2
    out = detrend(HeightField([[0, 1, 4, 9, 16]]))
    np.testing.assert_allclose(out.values, [[2, -1, -2, -1, 2]], atol=1e-12)


def test_detrend_constant_field():
    assert not detrend(HeightField(np.full((4, 4), 3.3))).values.any()


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(3, 12), st.integers(3, 12)),
              elements=st.floats(-1e3, 1e3)))
def test_detrend_idempotent_and_orthogonal(v):
    once = detrend(HeightField(v))
    twice = detrend(once)
    scale = max(np.abs(v).max(), 1.0)
    np.testing.assert_allclose(twice.values, once.values, atol=1e-9 * scale)
    r = once.values
    i, j = np.indices(r.shape)
    tol = 1e-6 * scale * r.size * max(r.shape)
    assert abs(r.sum()) < tol
    assert abs((r * i).sum()) < tol and abs((r * j).sum()) < tol


# ---------------------------------------------------------------- statistics and noise

def test_image_std_hand_value():
    assert image_std(HeightField([[0, 0], [0, 2]])) == pytest.approx(1.0, abs=1e-15)
    assert image_std(HeightField(np.full((3, 3), 4.0))) == 0.0
    with pytest.raises(ValueError):
        image_std(HeightField([[1.0]]))


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (5, 4), elements=st.floats(-100, 100)), st.floats(-1e3, 1e3))
def test_image_std_translation_invariant(v, c):
    assert image_std(HeightField(v + c)) == pytest.approx(image_std(HeightField(v)), rel=1e-9, abs=1e-9)


def test_noise_zero_sigma_identity():
    f = HeightField(np.arange(12.0).reshape(3, 4))
    np.testing.assert_array_equal(add_white_noise(f, 0.0, 5).values, f.values)


def test_noise_deterministic():
    f = HeightField(np.zeros((8, 8)))
    a = add_white_noise(f, 0.3, 11).values
    b = add_white_noise(f, 0.3, 11).values
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, add_white_noise(f, 0.3, 11, stream=1).values)


def test_noise_moments():
    sigma = 0.7
    f = HeightField(np.zeros((1000, 1000)))
    d = add_white_noise(f, sigma, 2024).values
    assert abs(d.mean()) < 4 * sigma / 1e3
    assert abs(d.std(ddof=1) / sigma - 1) < 0.01


def test_noise_negative_sigma():
    with pytest.raises(ValueError):
        add_white_noise(HeightField(np.zeros((3, 3))), -1.0, 0)


# ---------------------------------------------------------------- crop

def test_crop_identity_and_entries():
    v = np.arange(30.0).reshape(5, 6)
    f = HeightField(v)
    np.testing.assert_array_equal(crop(f, 0, 0, 6, 5).values, v)
    np.testing.assert_array_equal(crop(f, 2, 1, 3, 3).values, [[8, 9, 10], [14, 15, 16], [20, 21, 22]])


def test_crop_bounds():
    f = HeightField(np.zeros((5, 6)))
    with pytest.raises(IndexError):
        crop(f, 4, 0, 3, 3)
    with pytest.raises(ValueError):
        crop(f, 0, 0, 2, 3)


def test_heightfield_immutable():
    f = HeightField(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0
    with pytest.raises(ValueError):
        HeightField([[np.nan, 0.0]])
