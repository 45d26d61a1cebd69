import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtwpa import rfnet as rf
from mtwpa.errors import DomainError, GridMismatchError
from mtwpa.netlist import Netlist


@pytest.fixture
def grid():
    return rf.FrequencyGrid.linspace_hz(0.1e9, 20e9, 400)


def _random_response(grid, seed, passive=True):
    rng = np.random.default_rng(seed)
    n = len(grid)
    s = (rng.normal(size=(n, 2, 2)) + 1j * rng.normal(size=(n, 2, 2))) * 0.4
    if passive:
        s /= np.maximum(1.0, np.linalg.svd(s, compute_uv=False).max(-1))[:, None, None] * 1.01
    return rf.TwoPortResponse.from_matrix(grid, s)


def test_grid_validation():
    with pytest.raises(DomainError):
        rf.FrequencyGrid(np.array([]))
    with pytest.raises(DomainError):
        rf.FrequencyGrid(np.array([2.0, 1.0]))
    with pytest.raises(DomainError):
        rf.FrequencyGrid(np.array([0.0, 1.0]))


def test_cascade_identity(grid):
    x = _random_response(grid, 1)
    for y in (rf.cascade(x, rf.thru(grid)), rf.cascade(rf.thru(grid), x)):
        np.testing.assert_allclose(y.matrix, x.matrix, atol=1e-14)


def test_attenuators_add(grid):
    y = rf.cascade(rf.attenuator(grid, 3), rf.attenuator(grid, 3))
    np.testing.assert_allclose(y.db("s21"), -6.0, atol=1e-12)


def test_cascade_grid_mismatch(grid):
    other = rf.FrequencyGrid.linspace_hz(1e9, 2e9, 5)
    with pytest.raises(GridMismatchError):
        rf.cascade(rf.thru(grid), rf.thru(other))


def _step(grid, z1, z2):
    # generalized (power-wave) S of an impedance step z1 -> z2
    g = (z2 - z1) / (z2 + z1)
    t = np.sqrt(1 - g**2)
    return rf.TwoPortResponse(grid, g, t, t, -g)


def _bounce_oracle(a, b, n=400):
    # sum of multiple reflections between a's port 2 and b's port 1
    loop = a.s22 * b.s11
    series = sum(loop**k for k in range(n))
    return a.s21 * b.s21 * series


def test_step_and_mirror_against_bounce_sum(grid):
    step = _step(grid, 50.0, 25.0)
    theta = grid.points * 40e-12
    line = rf.TwoPortResponse(grid, 0, np.exp(-1j * theta), np.exp(-1j * theta), 0)
    mirror = _step(grid, 25.0, 50.0)
    a = rf.cascade(step, line)
    y = rf.cascade(a, mirror)
    np.testing.assert_allclose(y.s21, _bounce_oracle(a, mirror), atol=1e-12)
    # zero-length step pair is transparent
    y0 = rf.cascade(step, mirror)
    np.testing.assert_allclose(np.abs(y0.s21), 1.0, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_cascade_associative(seed):
    grid = rf.FrequencyGrid.linspace_hz(1e9, 10e9, 16)
    a, b, c = (_random_response(grid, seed + k) for k in range(3))
    left = rf.cascade(rf.cascade(a, b), c)
    right = rf.cascade(a, rf.cascade(b, c))
    np.testing.assert_allclose(left.matrix, right.matrix, atol=1e-10)


def test_abcd_round_trip(grid):
    x = _random_response(grid, 5)
    y = rf.from_abcd(grid, rf.to_abcd(x))
    np.testing.assert_allclose(y.matrix, x.matrix, atol=1e-10)


def test_netlist_series_resistor():
    net = Netlist()
    a, b = net.node(), net.node()
    net.add("R", a, b, 100.0)
    g = rf.FrequencyGrid.from_hz([1e9])
    r = rf.from_netlist(net, (a, b), g)
    # series Z: s11 = Z/(Z + 2 z0), s21 = 2 z0/(Z + 2 z0)
    assert r.s11[0] == pytest.approx(0.5)
    assert r.s21[0] == pytest.approx(0.5)


def test_morgan_reflectionless(grid):
    r = rf.morgan_highpass(1.4e-9, 0.7e-12, 2, grid)
    assert np.max(r.db("s11")) < -30
    assert np.max(r.db("s22")) < -30
    np.testing.assert_allclose(r.s12, r.s21, atol=1e-12)
    assert np.all(r.max_singular_value() <= 1 + 1e-9)


def test_morgan_highpass_shape(grid):
    r = rf.morgan_highpass(1.4e-9, 0.7e-12, 2, grid)
    d = r.db("s21")
    assert np.all(np.diff(d) > 0)
    assert d[-1] > -1.0
    assert d[0] < -40


def test_morgan_section_oracle():
    # dual-pair section: s21 = sL / (z0 + sL)
    g = rf.FrequencyGrid.linspace_hz(0.5e9, 15e9, 30)
    l, c = rf.dual_pair(1.4e-9, 0.7e-12)
    r = rf.morgan_highpass(l, c, 1, g)
    s = 1j * g.points
    np.testing.assert_allclose(r.s21, s * l / (50 + s * l), atol=1e-10)
    assert l / c == pytest.approx(2500)


def test_morgan_stage_doubling(grid):
    one = rf.morgan_highpass(1.4e-9, 0.7e-12, 1, grid).db("s21")
    two = rf.morgan_highpass(1.4e-9, 0.7e-12, 2, grid).db("s21")
    np.testing.assert_allclose(two, 2 * one, atol=1e-9)


def test_morgan_rejects_bad_elements(grid):
    with pytest.raises(DomainError):
        rf.morgan_highpass(-1e-9, 0.7e-12, 2, grid)
    with pytest.raises(DomainError):
        rf.morgan_highpass(1e-9, 0.7e-12, 0, grid)


def test_behavioral_anchors():
    m = rf.BehavioralHighpass()
    assert m.s21_db(7.3e9) == pytest.approx(-3.0)
    assert m.s21_db(5.3e9) == pytest.approx(-58.0)
    # the 60 dB/GHz slope is only visible 1 GHz down when the floor sits deeper than 60 dB
    assert rf.BehavioralHighpass(stopband_floor_db=80).s21_db(6.3e9) == pytest.approx(-63.0)
    assert m.s21_db(6.3e9) == pytest.approx(-58.0)
    assert m.s21_db(10e9) == pytest.approx(-3.0)


def test_behavioral_monotone_and_passive(grid):
    r = rf.behavioral_highpass(rf.BehavioralHighpass(), grid)
    assert np.all(np.diff(r.db("s21")) >= 0)
    np.testing.assert_allclose(r.db("s11"), -15.0)
    assert np.all(r.max_singular_value() <= 1 + 1e-9)
    np.testing.assert_allclose(r.s12, r.s21)


def test_behavioral_min_phase_keeps_magnitude(grid):
    a = rf.behavioral_highpass(rf.BehavioralHighpass(), grid)
    b = rf.behavioral_highpass(rf.BehavioralHighpass(min_phase=True), grid)
    np.testing.assert_allclose(np.abs(a.s21), np.abs(b.s21), rtol=1e-12)
    assert np.ptp(np.angle(b.s21)) > 0.1


def test_behavioral_validation():
    with pytest.raises(DomainError):
        rf.BehavioralHighpass(rolloff_db_per_ghz=0)
    with pytest.raises(DomainError):
        rf.BehavioralHighpass(stopband_floor_db=-1)


def _connect(blocks, pairs, externals):
    """Brute-force network solution from component S-matrices and port pairings."""
    sizes = [b.shape[0] for b in blocks]
    n = sum(sizes)
    s = np.zeros((n, n), complex)
    o = 0
    for b, k in zip(blocks, sizes):
        s[o:o + k, o:o + k] = b
        o += k
    internal = [p for pair in pairs for p in pair]
    c = np.zeros((len(internal), len(internal)))
    idx = {p: i for i, p in enumerate(internal)}
    for p, q in pairs:
        c[idx[p], idx[q]] = c[idx[q], idx[p]] = 1
    e, i = externals, internal
    see, sei, sie, sii = s[np.ix_(e, e)], s[np.ix_(e, i)], s[np.ix_(i, e)], s[np.ix_(i, i)]
    return see + sei @ c @ np.linalg.solve(np.eye(len(i)) - sii @ c, sie)


def _hybrid(t, phi_deg):
    a, b = t, t * np.exp(-1j * np.deg2rad(phi_deg))
    return np.array([[0, a, b, 0], [a, 0, 0, b], [b, 0, 0, a], [0, b, a, 0]])


def _balanced_oracle(il, phi, fa, fb, k):
    t = 10 ** (-il / 20)
    h = _hybrid(t, phi)
    sa = np.array([[fa.s11[k], fa.s12[k]], [fa.s21[k], fa.s22[k]]])
    sb = np.array([[fb.s11[k], fb.s12[k]], [fb.s21[k], fb.s22[k]]])
    # ports: h1 0-3, filter A 4-5, filter B 6-7, h2 8-11
    pairs = [(1, 4), (5, 9), (2, 6), (7, 10)]
    return _connect([h, sa, sb, h], pairs, [0, 11])


def test_balanced_matches_signal_flow_oracle():
    g = rf.FrequencyGrid.linspace_hz(2e9, 12e9, 9)
    fa = _random_response(g, 11)
    fb = _random_response(g, 12)
    for il, phi in ((3.0103, 90.0), (3.5, 91.0), (3.2, 88.5)):
        r = rf.balanced_compose(il, phi, fa, fb)
        for k in range(len(g)):
            m = _balanced_oracle(il, phi, fa, fb, k)
            assert abs(r.s11[k]) == pytest.approx(abs(m[0, 0]), abs=1e-12)
            assert abs(r.s21[k]) == pytest.approx(abs(m[1, 0]), abs=1e-12)


def test_balanced_ideal_cancels(grid):
    f = rf.morgan_highpass(1.4e-9, 0.7e-12, 2, grid)
    f = rf.TwoPortResponse(grid, 0.9 + 0j, f.s12, f.s21, 0.9 + 0j)
    r = rf.balanced_compose(10 * np.log10(2), 90.0, f)
    np.testing.assert_allclose(r.s11, 0, atol=1e-14)
    np.testing.assert_allclose(r.s21, f.s21, atol=1e-12)


def test_balanced_phase_error_leakage(grid):
    ones = rf.TwoPortResponse(grid, 1.0, 0.0, 0.0, 1.0)
    r = rf.balanced_compose(10 * np.log10(2), 91.0, ones)
    # signal-flow algebra: |s11| = |Gamma| sin(error)
    np.testing.assert_allclose(np.abs(r.s11), np.sin(np.deg2rad(1.0)), rtol=1e-12)


def test_balanced_hybrid_loss(grid):
    f = rf.thru(grid)
    ideal = rf.balanced_compose(10 * np.log10(2), 90.0, f)
    lossy = rf.balanced_compose(3.5, 90.0, f)
    extra = ideal.db("s21") - lossy.db("s21")
    np.testing.assert_allclose(extra, 2 * (3.5 - 10 * np.log10(2)), atol=1e-12)
    assert extra[0] == pytest.approx(1.0, abs=0.05)


def test_touchstone_round_trip(tmp_path, grid):
    x = _random_response(grid, 3)
    p = rf.export_touchstone(x, tmp_path / "x.s2p", ["random"])
    lines = [ln for ln in p.read_text().splitlines() if not ln.startswith("!")]
    assert lines[0] == "# HZ S RI R 50"
    y = rf.import_touchstone(p)
    assert np.max(np.abs(y.matrix - x.matrix)) < 1e-8
    np.testing.assert_allclose(y.grid.points, x.grid.points, rtol=1e-8)


def test_touchstone_thru_rows(tmp_path):
    g = rf.FrequencyGrid.from_hz([1e9, 2e9])
    p = rf.export_touchstone(rf.thru(g), tmp_path / "t.s2p")
    rows = p.read_text().splitlines()[1:]
    assert [float(v) for v in rows[0].split()] == [1e9, 0, 0, 1, 0, 1, 0, 0, 0]


def test_touchstone_bad_line(tmp_path):
    p = tmp_path / "bad.s2p"
    p.write_text("# HZ S RI R 50\n1e9 0 0 1 0 1 0 0\n")
    with pytest.raises(DomainError, match="line 2"):
        rf.import_touchstone(p)


def test_touchstone_formats(tmp_path):
    p = tmp_path / "ma.s2p"
    p.write_text("# GHZ S MA R 50\n1 0.5 90 1 0 1 0 0.5 -90\n")
    r = rf.import_touchstone(p)
    assert r.grid.hz[0] == pytest.approx(1e9)
    assert r.s11[0] == pytest.approx(0.5j)
    assert r.s22[0] == pytest.approx(-0.5j)
