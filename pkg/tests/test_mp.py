from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mnpboot.datagen import CovarianceSpec, generate_sample
from mnpboot.errors import CapabilityError, DomainError, NumericalError
from mnpboot.mp import (
    ContourSpec,
    MPModel,
    bias_correction_dn,
    default_contour,
    lss_centering,
    mp_atom_at_zero,
    mp_density,
    mp_moments,
    mp_residual,
    mp_support_identity,
    solve_mp_stieltjes,
    underline_m,
)
from mnpboot.spectra import LEDOIT_WOLF, DiscreteMeasure, SpectralFunction, empirical_spectral_measure
from mnpboot.testing import full_spectrum

DELTA1 = DiscreteMeasure.dirac(1.0)


def closed_form(c, z):
    """Both roots of c z m^2 - (1 - c - z) m + 1 = 0; keep the one in C+."""
    z = np.asarray(z, dtype=complex)
    disc = np.sqrt((z - 1 - c) ** 2 - 4 * c)
    r1 = ((1 - c - z) + disc) / (2 * c * z)
    r2 = ((1 - c - z) - disc) / (2 * c * z)
    return np.where(r1.imag > 0, r1, r2)


def closed_density(c, x):
    a, b = mp_support_identity(c)
    x = np.asarray(x, float)
    inside = (x > a) & (x < b)
    return np.where(inside, np.sqrt(np.clip((b - x) * (x - a), 0, None)) / (2 * math.pi * c * x), 0.0)


def z_grid():
    g = np.random.default_rng(0)
    return g.uniform(-1, 7, 50) + 1j * g.uniform(0.05, 2, 50)


@pytest.mark.parametrize("c", [0.25, 0.5, 1.0, 2.0])
def test_closed_form_delta1(c):
    z = z_grid()
    m = solve_mp_stieltjes(MPModel(c, DELTA1), z)
    assert np.max(np.abs(m - closed_form(c, z))) < 1e-8
    assert np.all(m.imag > 0)


def test_solver_examples():
    for g in (0.3, 1.0, 4.0):
        assert solve_mp_stieltjes(MPModel(g, DiscreteMeasure.dirac(0.0)), 1j) == pytest.approx(1j, abs=1e-12)
    assert solve_mp_stieltjes(MPModel(1e-12, DELTA1), 1j) == pytest.approx(0.5 + 0.5j, abs=1e-6)
    m = solve_mp_stieltjes(MPModel(1.0, DELTA1), 1j)
    assert m == pytest.approx(complex(closed_form(1.0, 1j)), abs=1e-10)
    assert abs(m - (0.3002 + 0.6248j)) < 1e-3


def test_solver_scalar_and_residual():
    model = MPModel(0.7, DiscreteMeasure.from_dict({1: 0.3, 3: 0.7}))
    z = np.array([0.5 + 0.1j, 2 + 1e-3j, -1 + 0.5j])
    m = solve_mp_stieltjes(model, z)
    assert np.all(mp_residual(model, z, m) < 1e-9)
    assert isinstance(solve_mp_stieltjes(model, 1 + 1j), complex)


def test_solver_domain_and_failure():
    model = MPModel(0.5, DELTA1)
    with pytest.raises(DomainError):
        solve_mp_stieltjes(model, 1.0 + 0j)
    with pytest.raises(NumericalError) as info:
        solve_mp_stieltjes(model, 1.0 + 1e-3j, max_iter=1)
    assert info.value.residual > 0


def test_model_validation():
    with pytest.raises(DomainError):
        MPModel(0.0, DELTA1)
    with pytest.raises(DomainError):
        MPModel(1.0, DiscreteMeasure([1.0], [0.5]))


def test_underline_examples():
    z = z_grid()
    np.testing.assert_allclose(underline_m(MPModel(1.0, DELTA1), z),
                               solve_mp_stieltjes(MPModel(1.0, DELTA1), z), atol=1e-12)
    u = underline_m(MPModel(0.6, DiscreteMeasure.dirac(0.0)), z)
    np.testing.assert_allclose(u, -1 / z, atol=1e-12)


measures = st.lists(st.tuples(st.floats(0.0, 5.0), st.floats(0.05, 1.0)), min_size=1, max_size=4).map(
    lambda pw: DiscreteMeasure([p for p, _ in pw], np.array([w for _, w in pw]) / sum(w for _, w in pw)))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([0.2, 0.5, 1.0, 1.5, 3.0]), measures)
def test_companion_relation(gamma, H):
    model = MPModel(gamma, H)
    z = z_grid()[:12]
    u = underline_m(model, z)
    m = solve_mp_stieltjes(model, z)
    np.testing.assert_allclose(u, -(1 - gamma) / z + gamma * m, atol=1e-8)
    # companion-equation residual
    t, w = H.points, H.weights
    rhs = -1 / (z - gamma * (w * t / (1 + t * u[:, None])).sum(axis=1))
    assert np.max(np.abs(u - rhs)) < 1e-10


def test_density_examples():
    model = MPModel(0.5, DELTA1)
    assert mp_density(model, -1.0, eps=1e-4) < 1e-3
    assert mp_density(model, 1.5) == pytest.approx(float(closed_density(0.5, 1.5)), abs=1e-3)
    assert mp_density(MPModel(1.0, DELTA1), 2.0) == pytest.approx(math.sqrt(2 * 2) / (2 * math.pi * 2), abs=1e-3)
    x = np.linspace(0.1, 2.8, 40)
    np.testing.assert_allclose(mp_density(model, x), closed_density(0.5, x), atol=2e-3)


@pytest.mark.parametrize("c", [0.5, 2.0])
def test_density_mass(c):
    model = MPModel(c, DELTA1)
    a, b = mp_support_identity(c)
    x = np.linspace(a - 0.5, b + 0.5, 2001)
    d = mp_density(model, x, eps=1e-4)
    h = x[1] - x[0]
    # composite Simpson
    mass = h / 3 * (d[0] + d[-1] + 4 * d[1:-1:2].sum() + 2 * d[2:-1:2].sum())
    total = mass + max(0.0, 1 - 1 / c)
    assert 0.99 <= total <= 1.01


def test_atom():
    assert mp_atom_at_zero(MPModel(2.0, DELTA1)) == 0.5
    assert mp_atom_at_zero(MPModel(0.5, DELTA1)) == 0.0
    # zero population eigenvalues are always zero sample eigenvalues
    H = DiscreteMeasure.from_dict({0: 0.3, 1: 0.7})
    assert mp_atom_at_zero(MPModel(0.5, H)) == pytest.approx(0.3)
    assert mp_atom_at_zero(MPModel(2.0, H)) == pytest.approx(0.5)


def test_support_identity():
    assert mp_support_identity(1.0) == (0.0, 4.0)
    assert mp_support_identity(0.25) == (0.25, 2.25)
    a, b = mp_support_identity(0.5)
    assert (a, b) == pytest.approx((0.085786, 2.914214), abs=1e-6)


def test_centering_examples():
    assert lss_centering(MPModel(0.25, DELTA1), LEDOIT_WOLF, 20000) == 5000.0
    H = DiscreteMeasure.from_dict({1: 0.5, 2: 0.5})
    assert lss_centering(MPModel(0.5, H), SpectralFunction((0, 0, 1)), 8) == pytest.approx(3.625 * 8, rel=1e-15)
    with pytest.raises(CapabilityError):
        lss_centering(MPModel(0.5, H), SpectralFunction((0,) * 7 + (1,)), 8)


def test_second_moment_by_density():
    # numerical density integration as an independent route
    H = DiscreteMeasure.from_dict({1: 0.5, 2: 0.5})
    model = MPModel(0.5, H)
    x = np.linspace(0.0, 6.5, 6001)
    d = mp_density(model, x, eps=1e-6)
    assert np.trapezoid(x * x * d, x) == pytest.approx(3.625, abs=5e-3)


@settings(max_examples=10, deadline=None)
@given(measures, st.floats(0.1, 4.0), st.integers(1, 10_000))
def test_centering_first_moment(H, gamma, p):
    assert lss_centering(MPModel(gamma, H), SpectralFunction((0, 1)), p) == pytest.approx(p * H.moment(1), rel=1e-14)


def test_moments_identity():
    # MP moments for H = delta_1 are Narayana polynomials
    c = 0.3
    got = mp_moments(MPModel(c, DELTA1), 4)
    want = [1, 1, 1 + c, 1 + 3 * c + c * c, 1 + 6 * c + 6 * c * c + c**3]
    np.testing.assert_allclose(got, want, rtol=1e-14)


@pytest.fixture(scope="module")
def sim_esd():
    Y = generate_sample(CovarianceSpec.identity(200), "normal", 400, 17)
    return empirical_spectral_measure(full_spectrum(Y))


def test_dn_zero_function(sim_esd):
    assert bias_correction_dn(sim_esd, 0.5, SpectralFunction((0.0,))) == 0.0


def test_dn_small_gamma():
    assert abs(bias_correction_dn(DELTA1, 1e-10, LEDOIT_WOLF)) < 1e-6


def test_dn_gaussian_value():
    # Gaussian mean term of tr(S^2) for Sigma = I is gamma (Bai-Silverstein)
    assert bias_correction_dn(DELTA1, 0.5, SpectralFunction((0, 0, 1))) == pytest.approx(0.5, abs=1e-4)
    assert abs(bias_correction_dn(DELTA1, 0.5, SpectralFunction((0, 1)))) < 1e-4


def test_dn_node_doubling(sim_esd):
    c = default_contour(sim_esd, 0.5)
    a = bias_correction_dn(sim_esd, 0.5, LEDOIT_WOLF, c)
    b = bias_correction_dn(sim_esd, 0.5, LEDOIT_WOLF, c.with_nodes(2 * c.nodes_per_side))
    assert abs(a - b) < 1e-3 * abs(b)


def test_dn_contour_enlargement(sim_esd):
    c = default_contour(sim_esd, 0.5)
    a = bias_correction_dn(sim_esd, 0.5, LEDOIT_WOLF, c)
    b = bias_correction_dn(sim_esd, 0.5, LEDOIT_WOLF, c.scaled(1.2))
    assert abs(a - b) < 1e-3 * abs(b)


def test_dn_contour_must_enclose(sim_esd):
    with pytest.raises(DomainError):
        bias_correction_dn(sim_esd, 0.5, LEDOIT_WOLF, ContourSpec(0.5, 2.0))
