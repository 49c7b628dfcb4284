import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from displab import evolvers as ev
from displab.spectral_core import Field, make_grid

TWO_PI = 2 * np.pi


def kdv_soliton(g, c, t):
    y = (g.nodes - g.length / 2 - c * t + g.length / 2) % g.length - g.length / 2
    return 3 * c / np.cosh(np.sqrt(c) / 2 * y) ** 2


# ----------------------------------------------------------------------------- specs

def test_spec_validation():
    with pytest.raises(ValueError):
        ev.EquationSpec("heat")
    with pytest.raises(ValueError):
        ev.EquationSpec("burgers-bbm")
    with pytest.raises(ValueError):
        ev.EquationSpec("dispersive-gamma", gamma=3.0)
    with pytest.raises(ValueError):
        ev.StepperSpec(dt=0)
    with pytest.raises(ValueError):
        ev.StepperSpec(scheme="euler")


def test_linear_symbols():
    xi = np.array([-2.0, 0.0, 3.0])
    assert np.allclose(ev.EquationSpec("bo").linear_symbol(xi), [4j, 0, -9j])
    assert np.allclose(ev.EquationSpec("kdv").linear_symbol(xi), [-8j, 0, 27j])
    assert np.allclose(ev.EquationSpec("nls").linear_symbol(xi), [-4j, 0, -9j])
    assert np.allclose(ev.EquationSpec("burgers-parabolic", eps=0.5).linear_symbol(xi), [-8, 0, -40.5])
    assert np.allclose(ev.EquationSpec("dispersive-gamma", gamma=1.5).linear_symbol(xi),
                       1j * np.abs(xi) ** 1.5 * xi)


def test_real_equations_reject_complex_data():
    g = make_grid(16, TWO_PI)
    with pytest.raises(ValueError):
        ev.evolve(ev.EquationSpec("kdv"), Field(g, np.ones(16) + 0j, False), 0.1)
    with pytest.raises(ValueError):
        ev.evolve(ev.EquationSpec("kdv"), Field(g, np.ones(16)), 0.1,
                  ev.StepperSpec(scheme="split-step-strang"))


# ----------------------------------------------------------------------------- exact oracles

@pytest.mark.parametrize("scheme", ["etd-rk4", "if-rk4"])
def test_linear_bo_travelling_cosine(scheme):
    # u_t + H u_xx = 0 carries cos(kx) to cos(kx - k^2 t)
    g = make_grid(64, TWO_PI)
    x = g.nodes
    u0 = Field(g, np.cos(3 * x) + 0.5 * np.cos(7 * x))
    tr = ev.evolve(ev.EquationSpec("bo", nonlinear=False), u0, 0.7, ev.StepperSpec(scheme, dt=0.01))
    exact = np.cos(3 * x - 9 * 0.7) + 0.5 * np.cos(7 * x - 49 * 0.7)
    assert np.abs(tr.final().values - exact).max() < 1e-10


@pytest.mark.parametrize("gamma", [1.0, 1.5, 2.0])
def test_linear_dispersive_gamma(gamma):
    # u_t = L u with symbol i |xi|^gamma xi: cos(kx) -> cos(kx + k^(gamma+1) t)
    g = make_grid(64, TWO_PI)
    x = g.nodes
    u0 = Field(g, np.cos(4 * x))
    tr = ev.evolve(ev.EquationSpec("dispersive-gamma", gamma=gamma, nonlinear=False), u0, 0.3,
                   ev.StepperSpec(dt=0.01))
    assert np.abs(tr.final().values - np.cos(4 * x + 4 ** (gamma + 1) * 0.3)).max() < 1e-10


def test_nls_linear_evolution_is_exact():
    g = make_grid(32, TWO_PI)
    x = g.nodes
    u0 = Field(g, np.exp(2j * x) + 0.3 * np.exp(-5j * x), False)
    tr = ev.evolve(ev.EquationSpec("nls", nonlinear=False), u0, 1.0, ev.StepperSpec(dt=0.05))
    # i u_t + u_xx = 0: exp(ikx) -> exp(ikx - i k^2 t)
    exact = np.exp(2j * x - 4j) + 0.3 * np.exp(-5j * x - 25j)
    assert np.abs(tr.final().values - exact).max() < 1e-12


def test_ode_model_closed_form():
    g = make_grid(32, TWO_PI)
    A = 0.8 * np.exp(-np.cos(g.nodes)) * (1 + 0.5j)
    tr = ev.evolve(ev.EquationSpec("ode-model"), Field(g, A, False), 1.0, ev.StepperSpec(dt=5e-4))
    exact = A * np.exp(1j * np.abs(A) ** 2)
    assert np.abs(tr.final().values - exact).max() < 1e-8


def test_kdv_soliton_translation():
    g = make_grid(256, 60.0)
    tr = ev.evolve(ev.EquationSpec("kdv"), Field(g, kdv_soliton(g, 1.0, 0)), 1.0,
                   ev.StepperSpec(dt=1e-3), n_frames=11)
    ref = kdv_soliton(g, 1.0, 1.0)
    assert np.linalg.norm(tr.final().values - ref) / np.linalg.norm(ref) < 1e-6
    assert ev.pde_residual(ev.EquationSpec("kdv"), tr).max() < 1e-3


def test_nls_strang_matches_etd():
    g = make_grid(64, TWO_PI)
    u0 = Field(g, (1 + 0.2 * np.cos(g.nodes)) + 0j, False)
    a = ev.evolve(ev.EquationSpec("nls"), u0, 0.5, ev.StepperSpec(dt=1e-3)).final()
    b = ev.evolve(ev.EquationSpec("nls"), u0, 0.5, ev.StepperSpec("split-step-strang", dt=1e-3)).final()
    assert np.abs(a.values - b.values).max() < 1e-5


# ----------------------------------------------------------------------------- conservation

@pytest.mark.parametrize("kind", ["bo", "kdv"])
def test_real_mass_conserved(kind):
    g = make_grid(128, TWO_PI)
    u0 = Field(g, 0.5 * np.cos(g.nodes) + 0.2 * np.sin(2 * g.nodes))
    tr = ev.evolve(ev.EquationSpec(kind), u0, 1.0, ev.StepperSpec(dt=1e-3), n_frames=11)
    m = tr.diagnostics["mass"]
    h = tr.diagnostics["hamiltonian"]
    assert np.ptp(m) / m[0] < 1e-10
    assert np.ptp(h) / abs(h[0]) < 1e-7
    assert np.ptp(tr.diagnostics["integral"]) < 1e-12


def test_parabolic_dissipates():
    g = make_grid(64, TWO_PI)
    u0 = Field(g, np.cos(3 * g.nodes))
    tr = ev.evolve(ev.EquationSpec("burgers-parabolic", eps=0.1), u0, 0.5, ev.StepperSpec(dt=1e-3))
    assert np.all(np.diff(tr.diagnostics["mass"]) < 0)


def test_gauge_transform_round_trip():
    g = make_grid(64, 1.0)
    u0 = Field(g, 0.3 * np.cos(TWO_PI * g.nodes))
    tr = ev.evolve(ev.EquationSpec("mkdv"), u0, 1e-3, ev.StepperSpec(dt=1e-5))
    back = ev.gauge_transform_mkdv(ev.gauge_transform_mkdv(tr, "to-gauged"), "from-gauged")
    for a, b in zip(tr.snapshots, back.snapshots):
        assert np.abs(a.values - b.values).max() < 1e-13
    with pytest.raises(ValueError):
        ev.gauge_transform_mkdv(tr, "sideways")


def test_gauge_transform_relates_the_two_flows():
    g = make_grid(64, 1.0)
    u0 = Field(g, 0.3 * np.cos(TWO_PI * g.nodes))
    st_ = ev.StepperSpec(dt=1e-5)
    gauged = ev.evolve(ev.EquationSpec("gauged-mkdv"), u0, 2e-3, st_)
    plain = ev.evolve(ev.EquationSpec("mkdv"), u0, 2e-3, st_)
    mapped = ev.gauge_transform_mkdv(gauged, "from-gauged")
    assert np.abs(mapped.final().values - plain.final().values).max() < 1e-8


# ----------------------------------------------------------------------------- guards and io

def test_burgers_gradient_guard():
    g = make_grid(128, TWO_PI)
    with pytest.raises(ev.GuardError):
        ev.evolve(ev.EquationSpec("burgers"), Field(g, np.sin(g.nodes)), 2.0, ev.StepperSpec(dt=1e-3))


def test_resolution_guard():
    g = make_grid(32, TWO_PI)
    u0 = Field(g, np.cos(10 * g.nodes))
    with pytest.raises(ev.ResolutionError):
        ev.evolve(ev.EquationSpec("kdv"), u0, 0.01, ev.StepperSpec(dt=1e-4))


def test_snapshot_round_trip(tmp_path):
    g = make_grid(16, 3.0)
    u = Field(g, np.arange(16) * (1 + 2j), False)
    ev.write_snapshot(tmp_path / "s.bin", u, 0.25)
    v, t = ev.read_snapshot(tmp_path / "s.bin")
    assert t == 0.25 and v.grid == g and np.array_equal(v.values, u.values)


def test_trajectory_csv(tmp_path):
    g = make_grid(16, TWO_PI)
    tr = ev.evolve(ev.EquationSpec("kdv"), Field(g, 0.1 * np.cos(g.nodes)), 0.1, n_frames=3)
    tr.to_csv(tmp_path / "t.csv", sobolev=(1.0,))
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert len(lines) == 4


@settings(max_examples=30, deadline=None)
@given(st.complex_numbers(max_magnitude=1.0))
def test_phi_functions_match_series(z):
    z = complex(z) * 1e-2
    p1, p2, p3 = (np.asarray(v).ravel()[0] for v in ev.phi_functions(np.array([z])))
    # Taylor series of (e^z - 1)/z, (e^z - 1 - z)/z^2, (e^z - 1 - z - z^2/2)/z^3
    s = [sum(z ** k / math.factorial(k + j) for k in range(12)) for j in (1, 2, 3)]
    assert abs(p1 - s[0]) < 1e-13 and abs(p2 - s[1]) < 1e-13 and abs(p3 - s[2]) < 1e-13
