import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from changeprob.changes import RoughnessMatrix
from changeprob.ingest import HeightField
from changeprob.reports import (matrix_csv, noise_error, read_csv, render_delay_svg, render_median_polar_svg,
                                render_polar_svg, run_fbm_validation, run_noise_experiment, write_csv)
from changeprob.simulate import simulate_surface

SVG_NS = "{http://www.w3.org/2000/svg}"


def _matrix(p, angles=None, delays=None):
    p = np.asarray(p, dtype=float)
    angles = np.arange(p.shape[0]) * 180.0 / p.shape[0] if angles is None else angles
    delays = np.arange(3, 3 + p.shape[1]) if delays is None else delays
    h = np.where(np.isnan(p), np.nan, 0.0)
    with np.errstate(divide="ignore"):
        from changeprob.changes import h_transform
        h = h_transform(p)
    win = np.where(np.isnan(p), 0, 1)
    return RoughnessMatrix(np.asarray(angles, float), np.asarray(delays), p, h, np.zeros(p.shape, int), win)


# ---------------------------------------------------------------- CSV

def test_csv_single_cell(tmp_path):
    write_csv(_matrix([[0.25]]), tmp_path / "m.csv")
    text = (tmp_path / "m.csv").read_bytes().decode("utf-8")
    assert text == "angle_deg/tau,3\n0.000000,0.25\n"


def test_csv_undefined_is_empty():
    text = matrix_csv(_matrix([[0.5, np.nan], [1.0, 0.1]]), "h_hat")
    lines = text.splitlines()
    assert lines[1].endswith(",")
    assert "nan" not in text.lower() and "inf" not in text.lower()
    assert lines[2].split(",")[1] == ""          # h(1) = -inf is undefined too


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.one_of(st.floats(0, 1), st.just(float("nan"))), min_size=3, max_size=3),
                min_size=1, max_size=6))
def test_csv_round_trip(tmp_path_factory, rows):
    p = np.array(rows)
    path = tmp_path_factory.mktemp("csv") / "m.csv"
    m = _matrix(p)
    write_csv(m, path)
    angles, delays, values = read_csv(path)
    np.testing.assert_array_equal(delays, m.delays)
    np.testing.assert_array_equal(angles, np.round(m.angles_deg, 6))
    assert np.array_equal(values, p, equal_nan=True)


def test_csv_line_endings(tmp_path):
    write_csv(_matrix(np.full((4, 3), 0.3)), tmp_path / "m.csv")
    raw = (tmp_path / "m.csv").read_bytes()
    assert b"\r" not in raw and raw.count(b"\n") == 5


# ---------------------------------------------------------------- noise metric

def test_noise_error_examples():
    assert noise_error([0.5, 0.6], [0.6, 0.7], 2) == pytest.approx(math.sqrt(0.02) / 2, abs=1e-15)
    assert noise_error([0.1, 0.2, 0.3], [0.1, 0.2, 0.3]) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 50), st.floats(-2, 2))
def test_noise_error_constant_difference(n, d):
    a = np.linspace(0, 1, n)
    assert noise_error(a, a + d, n) == pytest.approx(abs(d) / math.sqrt(n), rel=1e-9, abs=1e-12)


def test_noise_error_undefined_and_mismatch(caplog):
    with caplog.at_level("WARNING"):
        e = noise_error([0.5, np.nan, 0.5], [0.6, 0.1, -np.inf])
    assert e == pytest.approx(0.1, abs=1e-15)        # one pair left, n_phi reduced to 1
    assert "excluded" in caplog.text
    with pytest.raises(ValueError):
        noise_error([1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        noise_error([1, 2], [1, 2], 3)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=20), st.data())
def test_noise_error_zero_iff_equal(a, data):
    b = data.draw(st.lists(st.floats(-1, 1), min_size=len(a), max_size=len(a)))
    e = noise_error(a, b)
    assert e >= 0
    assert (e == 0) == (a == b)


def test_noise_experiment_small():
    f = simulate_surface(64, 64, 0.5, 0.5, 0)
    rep = run_noise_experiment(f, [0.0, 0.01, 0.5], [3, 5], n_phi=6, seed=1)
    assert rep.estimators == ("tau=3", "tau=5", "median")
    assert np.all(rep.errors[0] == 0)
    assert np.all(rep.errors >= 0)
    again = run_noise_experiment(f, [0.0, 0.01, 0.5], [3, 5], n_phi=6, seed=1)
    assert rep.to_csv() == again.to_csv() and rep.to_svg() == again.to_svg()
    ET.fromstring(rep.to_svg())


# ---------------------------------------------------------------- fBm validation

def test_fbm_validation_reproducible_bytes():
    a = run_fbm_validation(0.6, 2048, 1, [3, 4, 5], seed=7)
    b = run_fbm_validation(0.6, 2048, 1, [3, 4, 5], seed=7)
    assert a.to_csv().encode() == b.to_csv().encode()
    assert a.to_svg().encode() == b.to_svg().encode()
    assert np.all(a.sd == 0)


@pytest.mark.slow
@pytest.mark.parametrize("H", [0.3, 0.5, 0.7])
def test_fbm_validation_brackets_target(H):
    rep = run_fbm_validation(H, 2 ** 14, 60, [3, 8, 16], seed=0)
    half = 3 * rep.sd / math.sqrt(rep.reps)
    assert np.all(np.abs(rep.mean - H) <= half)


# ---------------------------------------------------------------- SVG

def _polar_radii(svg_text):
    root = ET.fromstring(svg_text)
    paths = [p for p in root.iter(SVG_NS + "path") if p.get("d", "").endswith("Z")]
    out = []
    circle = root.find(SVG_NS + "circle")
    cx, cy = float(circle.get("cx")), float(circle.get("cy"))
    for p in paths:
        pts = [tuple(map(float, s.strip(" MLZ").split())) for s in p.get("d").strip(" Z").split("L")]
        out.append([math.hypot(x - cx, y - cy) for x, y in pts])
    return out


def test_polar_constant_is_circle():
    text = render_polar_svg(_matrix(np.full((12, 2), 0.4)), [3, 4])
    for radii in _polar_radii(text):
        assert max(radii) - min(radii) < 0.02


def test_polar_maximum_mirrored():
    p = np.full((12, 1), 0.5)
    p[4, 0] = 0.2                               # smallest p -> largest h at 60 deg
    text = render_polar_svg(_matrix(p), [3])
    radii = _polar_radii(text)[0]
    order = np.argsort(radii)[::-1]
    assert set(order[:2]) == {4, 16}


def test_svgs_are_xml_and_deterministic():
    m = _matrix(np.random.default_rng(0).uniform(0.2, 0.6, (6, 4)))
    for fn in (lambda: render_polar_svg(m), lambda: render_delay_svg(m),
               lambda: render_median_polar_svg(m.angles_deg, m.h_hat[:, 0])):
        a, b = fn(), fn()
        assert a == b
        root = ET.fromstring(a)
        assert root.tag == SVG_NS + "svg" and root.get("version") == "1.1"


def test_delay_plot_one_line_per_angle():
    m = _matrix(np.random.default_rng(1).uniform(0.2, 0.6, (5, 6)))
    root = ET.fromstring(render_delay_svg(m))
    lines = [p for p in root.iter(SVG_NS + "path") if not p.get("d").endswith("Z")]
    assert len(lines) == 5
