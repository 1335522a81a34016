import mpmath
import numpy as np
import pytest

from ergodic_schrodinger.triangle import (
    THETA_LEFT, THETA_RIGHT, build_triangle, sc_weight, weight_table,
)


def hypergeometric_primitive(z):
    # prod_j (1 - t/z_j) = 1 - i t^3 for these prevertices, so the
    # integral of its -2/3 power from 0 to z is z 2F1(2/3, 1/3; 4/3; i z^3)
    z = mpmath.mpc(z)
    return complex(z * mpmath.hyp2f1(mpmath.mpf(2) / 3, mpmath.mpf(1) / 3, mpmath.mpf(4) / 3, 1j * z**3))


@pytest.fixture(scope="module")
def tri():
    return build_triangle(0.0)


def test_prevertex_product_identity(tri):
    t = np.array([0.3 + 0.1j, -0.5j, 0.9])
    prod = np.prod([1 - t / zj for zj in tri.prevertices], axis=0)
    np.testing.assert_allclose(prod, 1 - 1j * t**3, atol=1e-15)


@pytest.mark.parametrize("z", [0.2 + 0.1j, -0.5 + 0.3j, 0.7j, -0.6 - 0.6j, 0.95 * np.exp(-0.4j)])
def test_phi_matches_hypergeometric_oracle(tri, z):
    want = tri.center + tri.scale * hypergeometric_primitive(z)
    assert abs(tri.phi(z) - want) <= 1e-10 * tri.side


@pytest.mark.parametrize("C", [0.0, 1.0, 3.5])
def test_vertex_residuals(C):
    tri = build_triangle(C)
    for zj, vj in zip(tri.prevertices, tri.vertices):
        assert abs(tri.phi(zj) - vj) <= 1e-6
    L = 4 + 2 * C
    np.testing.assert_allclose(tri.vertices[2], 1j * L * np.sqrt(3) / 2)


def test_center_is_centroid(tri):
    assert abs(tri.phi(0.0) - sum(tri.vertices) / 3) <= 1e-12


def test_dphi_matches_finite_difference(tri):
    for z in (0.1 + 0.2j, -0.4j, 0.5 - 0.1j):
        h = 1e-5
        num = (tri.phi(z + h) - tri.phi(z - h)) / (2 * h)
        assert abs(num - tri.dphi(z)) <= 1e-6 * abs(tri.dphi(z))


def test_base_arc_is_real_and_monotone(tri):
    theta = np.linspace(THETA_LEFT + 0.05, THETA_RIGHT - 0.05, 9)
    E = np.array([tri.base_energy(t) for t in theta])
    assert np.all(np.diff(E) > 0)
    for t, e in zip(theta[::3], E[::3]):
        assert abs(tri.phi(np.exp(1j * t)) - e) <= 1e-8
        assert tri.base_theta(e) == pytest.approx(t, abs=1e-10)


def test_weight_symmetry_and_endpoint_decay(tri):
    E = np.linspace(0.1, 1.9, 20)
    np.testing.assert_allclose([sc_weight(tri, e) for e in E], [sc_weight(tri, -e) for e in E], atol=1e-8)
    mid = sc_weight(tri, 0.0)
    assert sc_weight(tri, 1.99) <= 0.05 * mid
    assert sc_weight(tri, -1.99) <= 0.05 * mid


def test_weight_is_inverse_arc_speed(tri):
    # dE/dtheta from a central difference of the base parametrization
    t, h = -np.pi / 2 + 0.3, 1e-5
    speed = (tri.base_energy(t + h) - tri.base_energy(t - h)) / (2 * h)
    assert sc_weight(tri, tri.base_energy(t)) == pytest.approx(1 / speed, rel=1e-7)


def test_weight_table(tri):
    table = weight_table(tri, [-3.0, -2.0, 0.0, 1.0, 2.0])
    assert table.weights[0] == 0.0 and table.weights[1] == 0.0 and table.weights[-1] == 0.0
    assert table.weights[2] > table.weights[3] > 0
    text = table.to_text()
    assert text.startswith("# energy,g\n")
    assert len(text.strip().splitlines()) == 6


def test_rejects_outside_interval(tri):
    with pytest.raises(ValueError):
        sc_weight(tri, 2.0)
    with pytest.raises(ValueError):
        build_triangle(-1.0)
