import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from ergodic_schrodinger.dynamics import GOLDEN, Transformation
from ergodic_schrodinger.potentials import (
    MollifierError, Mollified, Scaled, StepFunction, TrigPoly, check_nonperiodic, constant,
    cosine, dumps, l1_distance, loads, minimal_n0, mollifier_l1_bound, mollify, perturb,
    step_approximate,
)


def two_step(lo=0.0, hi=1.5):
    return StepFunction((0.0, 0.5), (lo, hi))


def kernel_average(step, n, n0, w):
    """Brute-force tent-kernel average by adaptive quadrature."""
    h = 1.0 / (n + n0)
    pts = [b for b in step.breakpoints]

    def num(x):
        return (h - abs(x)) * step(np.array([(w + x) % 1.0]))[0]

    brk = sorted({((b - w + 0.5) % 1.0) - 0.5 for b in pts if abs(((b - w + 0.5) % 1.0) - 0.5) < h})
    top = integrate.quad(num, -h, h, points=brk or None, epsabs=1e-14, limit=200)[0]
    return top / (h * h)


def test_trig_poly_values():
    f = cosine()
    np.testing.assert_allclose(f(np.array([0.0, 0.25, 0.5])), [2.0, 0.0, -2.0], atol=1e-15)
    assert f.sup_bound() == 2.0
    assert f.lipschitz_bound() == pytest.approx(4 * np.pi)
    g = TrigPoly(1.0, cos=((0.0, 1.0), (0.5,)), sin=((), (0.25,)))
    w = np.array([[0.1, 0.3]])
    want = 1 + np.cos(4 * np.pi * 0.1) + 0.5 * np.cos(2 * np.pi * 0.3) + 0.25 * np.sin(2 * np.pi * 0.3)
    np.testing.assert_allclose(g(w), [want], rtol=1e-14)


def test_step_function_is_right_continuous():
    s = two_step()
    np.testing.assert_array_equal(s(np.array([0.0, 0.25, 0.5, 0.75, 0.999])), [0, 0, 1.5, 1.5, 1.5])
    wrap = StepFunction((0.2, 0.7), (1.0, 2.0))
    np.testing.assert_array_equal(wrap(np.array([0.1, 0.2, 0.69, 0.7])), [2.0, 1.0, 1.0, 2.0])


@pytest.mark.parametrize("bad", [((0.5, 0.2), (1, 2)), ((0.0, 1.0), (1, 2)), ((0.1,), (1, 2)), ((), ())])
def test_step_function_validation(bad):
    with pytest.raises(ValueError):
        StepFunction(*bad)


def test_scaled():
    f = Scaled(cosine(), 3.0)
    assert f.sup_bound() == 6.0
    np.testing.assert_allclose(f(np.array([0.0])), [6.0])


def test_minimal_n0_and_legality():
    s = two_step()
    assert minimal_n0(s) == 4
    mollify(s, 1)
    with pytest.raises(MollifierError):
        Mollified(s, 1, 3)


@pytest.mark.parametrize("n", [1, 16, 64])
def test_mollifier_matches_brute_force_average(n):
    s = perturb(StepFunction((0.1, 0.45, 0.8), (0.3, 1.5, -0.7)), seed=2)
    fn = mollify(s, n)
    rng = np.random.default_rng(n)
    h = fn.width
    w = np.concatenate([rng.random(20), np.array(s.breakpoints) + 0.3 * h,
                        np.array(s.breakpoints) - 0.7 * h])
    w = w % 1.0
    want = np.array([kernel_average(s, n, fn.n0, x) for x in w])
    np.testing.assert_allclose(fn(w), want, atol=1e-11)


def test_mollifier_is_continuous_and_bounded():
    s = two_step()
    fn = mollify(s, 16)
    x = np.linspace(0, 1, 200001)
    y = fn(x % 1.0)
    assert np.max(np.abs(np.diff(y))) <= fn.lipschitz_bound() * (x[1] - x[0]) + 1e-12
    assert y.min() >= 0.0 and y.max() <= 1.5
    assert fn.sup_bound() <= s.sup_bound()


@pytest.mark.parametrize("n", [16, 64, 256, 1024])
def test_l1_error_closed_form(n):
    # each jump contributes |jump| * h / 3 to ||s - f_n||_1
    s = perturb(two_step(), seed=5)
    fn = mollify(s, n)
    jumps = np.abs(np.diff(np.append(s.values, s.values[0])))
    want = jumps.sum() * fn.width / 3
    assert l1_distance(s, fn) == pytest.approx(want, rel=1e-8)
    assert l1_distance(s, fn) < mollifier_l1_bound(s, n, fn.n0)


def test_l1_distance_examples():
    assert l1_distance(constant(1.0), constant(0.25)) == pytest.approx(0.75)
    assert l1_distance(cosine(), constant(0.0)) == pytest.approx(4 / np.pi, rel=1e-6)


def test_step_approximation_bound_by_dense_sampling():
    f = cosine()
    s, bound = step_approximate(f, 64, seed=1)
    x = np.linspace(0, 1, 10**6, endpoint=False)
    assert np.max(np.abs(f(x) - s(x))) <= bound
    assert len(set(s.values)) == 64


def test_perturb_is_small_and_seeded():
    s = two_step()
    a, b = perturb(s, seed=3), perturb(s, seed=3)
    assert a == b
    assert np.max(np.abs(np.subtract(a.values, s.values))) <= 5e-10
    assert a.values[0] != s.values[0]


def test_nonperiodic_step_over_golden_rotation():
    rep = check_nonperiodic(perturb(two_step()), Transformation(), horizon=1000)
    assert not rep.found
    assert rep.period is None


def test_periodic_symbols_are_detected():
    # an arc of length GOLDEN has no period, but a constant function has period 1
    flat = StepFunction((0.0, 0.5), (1.0, 1.0))
    assert check_nonperiodic(flat, Transformation(), horizon=10).period == 1


@pytest.mark.parametrize("f", [
    cosine(),
    TrigPoly(0.5, cos=((1.0, 0.0), (2.0,)), sin=((0.0, 0.3), ())),
    two_step(),
    mollify(perturb(two_step()), 64),
    Scaled(mollify(two_step(), 16, 4), -2.5),
])
def test_serialization_round_trip(f):
    g = loads(dumps(f))
    assert g == f or dumps(g) == dumps(f)
    pts = np.random.default_rng(0).random((50, f.dim) if f.dim > 1 else 50)
    np.testing.assert_array_equal(g(pts), f(pts))


def test_loads_rejects_unknown_field():
    with pytest.raises(KeyError):
        loads("variant = step\nbreakpoints = 0 0.5\nvalues = 1 2\ncolour = red\n")


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 2000), st.floats(0.0, 1.0, exclude_max=True))
def test_mollifier_stays_between_step_values(n, x):
    s = perturb(two_step(), seed=1)
    y = mollify(s, n)(np.array([x]))[0]
    assert min(s.values) - 1e-15 <= y <= max(s.values) + 1e-15


def test_golden_default_constant():
    assert GOLDEN == pytest.approx(0.6180339887498949)
