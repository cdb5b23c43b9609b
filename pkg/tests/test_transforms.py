import math

import numpy as np
import pytest

from canosc.model import CoefficientField, DomainError, builtin_family
from canosc.transforms import (RotationAngle, align_l2_direction, diagonal_to_dirac, prepare, rotate, rotate_entries,
                               schrodinger_to_canonical)


def test_rotate_entries_preserves_invariants():
    h = (0.3, 0.2, 0.7)
    for a in (0.1, 1.0, -2.5):
        r11, r12, r22 = rotate_entries(*h, a)
        assert r11 + r22 == pytest.approx(1.0)
        assert r11 * r22 - r12 * r12 == pytest.approx(0.3 * 0.7 - 0.04)
        R = RotationAngle(a).matrix()
        M = R.T @ np.array([[0.3, 0.2], [0.2, 0.7]]) @ R
        assert np.allclose(M, [[r11, r12], [r12, r22]], atol=1e-15)


def test_quarter_turn_is_an_exact_swap():
    assert rotate_entries(1e-300, 0.0, 1.0, math.pi / 2) == (1.0, -0.0, 1e-300)


def test_rotation_composition_collapses(power2):
    f = rotate(rotate(power2, 0.7), -0.7)
    assert f is power2
    g = rotate(rotate(power2, 0.3), 0.4)
    assert g.rotation_of == (power2, 0.3 + 0.4)


def test_prepare_section5_tail():
    f = prepare(builtin_family("section5"))
    assert f.trace_normed and f.tail is not None
    s = 2.0 * math.sinh(2.0)
    # after the swap sin^2 phi = 1 / (1 + e^{2x}), W = e^{-x}
    assert f.sin2(s) == pytest.approx(1.0 / (1.0 + math.exp(4.0)), rel=1e-13)
    assert f.tail.W(s) == pytest.approx(math.exp(-2.0), rel=1e-14)


def test_prepare_is_identity_on_prepared(power2):
    assert prepare(power2) is power2


def test_align_l2_direction(power2):
    r = rotate(power2, 0.5)
    back = align_l2_direction(r, (math.cos(-0.5), math.sin(-0.5)))
    assert back.l2_direction_ok
    with pytest.raises(DomainError):
        align_l2_direction(power2, (0.0, 0.0))


def test_schrodinger_to_canonical_free_solutions():
    f = schrodinger_to_canonical(lambda x: x, lambda x: 1.0, lambda x: 1.0, lambda x: 0.0)
    for x in (0.0, 0.5, 3.0):
        H = f.h(x)
        assert H.det == pytest.approx(0.0, abs=1e-15)
        assert H.trace == pytest.approx(x * x + 1.0)


def test_schrodinger_to_canonical_finite_difference_wronskian():
    # V = 1: p = sinh x, q = cosh x has p'q - q'p = 1
    f = schrodinger_to_canonical(math.sinh, math.cosh, samples=[0.0, 0.5, 1.0], tol=1e-8)
    assert f.h(1.0).trace == pytest.approx(math.cosh(2.0))
    with pytest.raises(DomainError):
        schrodinger_to_canonical(math.cosh, math.sinh, math.sinh, math.cosh)


def test_dirac_potential_of_section5_diagonal():
    W = diagonal_to_dirac(builtin_family("section5_diagonal"))
    assert max(abs(W(float(x)) - 0.5) for x in np.linspace(0, 20, 100)) < 1e-12


def test_dirac_potential_finite_difference():
    f = CoefficientField(entries=lambda x: (math.exp(2 * x), 0.0, math.exp(-2 * x)), trace_normed=False)
    W = diagonal_to_dirac(f, step=1e-5)
    assert W(1.0) == pytest.approx(1.0, rel=1e-8)


def test_dirac_requires_diagonal_unit_determinant():
    with pytest.raises(DomainError):
        diagonal_to_dirac(builtin_family("section5"))
    with pytest.raises(DomainError):
        diagonal_to_dirac(builtin_family("power_tail"))
