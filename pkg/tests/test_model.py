import math

import pytest
from scipy import integrate

from canosc.model import (FAMILY_NAMES, CoefficientField, DomainError, HMatrix, builtin_family, diagonal_part,
                          from_phi_g, grid_field, h_at, l2_diagnostic, lambda_segment, read_grid_csv, reduce_phi,
                          to_phi_g, trace_normalize, validate)


def test_phi_g_round_trip():
    for phi in (-1.2, -0.3, 0.0, 0.4, 1.5):
        for g in (0.0, 0.3, 1.0):
            pg = to_phi_g(from_phi_g(phi, g, 2.5))
            assert pg.trace == pytest.approx(2.5)
            # with g = 0, phi and -phi give the same matrix
            assert (pg.phi if g > 0 else abs(pg.phi)) == pytest.approx(phi if g > 0 else abs(phi), abs=1e-12)
            if phi != 0.0:
                assert pg.g == pytest.approx(g, abs=1e-12)


def test_from_phi_g_domain():
    with pytest.raises(DomainError):
        from_phi_g(0.1, 1.5)
    with pytest.raises(DomainError):
        from_phi_g(0.1, 0.5, trace=0.0)
    with pytest.raises(DomainError):
        to_phi_g(HMatrix(-1.0, 0.0, 2.0))


def test_reduce_phi():
    assert reduce_phi(math.pi / 2) == pytest.approx(-math.pi / 2)
    assert reduce_phi(3.0) == pytest.approx(3.0 - math.pi)
    assert -math.pi / 2 <= reduce_phi(-7.0) < math.pi / 2


def test_hmatrix_basics():
    H = HMatrix(2.0, 1.0, 1.0)
    assert H.trace == 3.0 and H.det == 1.0
    lo, hi = H.eigvals()
    assert lo * hi == pytest.approx(1.0) and lo + hi == pytest.approx(3.0)
    assert H.quad(0.0) == 2.0 and H.quad(math.pi / 2) == pytest.approx(1.0)
    assert not HMatrix(1.0, 2.0, 1.0).is_psd()


def test_lambda_segment_keeps_diagonal():
    for lam in (0.0, 0.25, 1.0):
        H = lambda_segment(0.6, lam)
        assert H.h11 == pytest.approx(math.sin(0.6) ** 2) and H.trace == pytest.approx(1.0)
        assert H.is_psd()
    assert lambda_segment(0.6, 0.5).h12 == 0.0
    with pytest.raises(DomainError):
        lambda_segment(0.6, 1.1)


def test_h_at_rejects_negative_x(power2):
    with pytest.raises(DomainError):
        h_at(power2, -1.0)
    assert h_at(power2, 1.0).h11 == pytest.approx(0.25)


def test_power_tail_closed_form_W_matches_quadrature():
    for p in (2.0, 2.5, 3.0):
        f = builtin_family("power_tail", c=0.7, p=p)
        for x in (0.0, 3.0, 50.0):
            ref = integrate.quad(f.sin2, x, math.inf, epsabs=0.0, epsrel=1e-12, limit=200)[0]
            assert f.tail.W(x) == pytest.approx(ref, rel=1e-8)


def test_power_tail_constants():
    assert builtin_family("power_tail", c=1.0, p=2.0).tail.A_exact == 1.0
    assert builtin_family("power_tail", c=1.0, p=3.0).tail.A_exact == 0.0
    assert builtin_family("power_tail", c=1.0, p=1.5).tail.A_exact == math.inf
    f = builtin_family("power_tail", c=1.0, p=3.0)
    # x W = x / (2 (1+x)^2) peaks at x = 1 with value 1/8
    assert f.tail.sup_xw(0.0) == pytest.approx(0.125)
    assert f.tail.sup_xw(9.0) == pytest.approx(9.0 / 200.0)


def test_family_domain_errors():
    with pytest.raises(DomainError):
        builtin_family("power_tail", c=1.5)
    with pytest.raises(DomainError):
        builtin_family("power_tail", p=1.0)
    with pytest.raises(DomainError):
        builtin_family("nope")
    with pytest.raises(DomainError):
        builtin_family("zero_phi", c=1.0)
    assert "section5" in FAMILY_NAMES


def test_section5_raw_entries():
    f = builtin_family("section5")
    assert f.entries(1.0) == (math.e, 1.0, 1.0 / math.e)
    assert not f.trace_normed and not f.l2_direction_ok


def test_trace_normalize_closed_form_arclength():
    f = trace_normalize(builtin_family("section5_diagonal"))
    s = 2.0 * math.sinh(1.0)
    h11, h12, h22 = f.entries(s)
    # unswapped: h11 = e^x / (2 cosh x)
    assert h11 == pytest.approx(1.0 / (1.0 + math.exp(-2.0)), rel=1e-14)
    assert h12 == 0.0 and h11 + h22 == pytest.approx(1.0)


def test_trace_normalize_numeric_arclength():
    raw = CoefficientField(entries=lambda x: ((1 + x) ** 2, 0.0, 1.0), trace_normed=False)
    f = trace_normalize(raw)
    # s(x) = x + ((1+x)^3 - 1)/3; at x = 1, s = 10/3 and h11 / tr = 4/5
    assert f.entries(10.0 / 3.0)[0] == pytest.approx(0.8, rel=1e-10)
    assert trace_normalize(f) is f


def test_validate():
    validate(builtin_family("power_tail", c=0.5, p=2.0, g=0.7), [0.0, 1.0, 10.0])
    bad = CoefficientField(entries=lambda x: (1.0, 2.0, 1.0), trace_normed=False)
    with pytest.raises(DomainError):
        validate(bad, [0.0])
    not_normed = CoefficientField(entries=lambda x: (1.0, 0.0, 1.0))
    with pytest.raises(DomainError):
        validate(not_normed, [0.0])


def test_l2_diagnostic_warns_on_slow_decay():
    slow = CoefficientField(entries=lambda x: (1 / math.sqrt(1 + x), 0.0, 1 - 1 / math.sqrt(1 + x)))
    with pytest.warns(RuntimeWarning):
        assert not l2_diagnostic(slow, 1e6)
    assert l2_diagnostic(builtin_family("power_tail"), 1e6)


def test_diagonal_part():
    f = builtin_family("section5")
    d = diagonal_part(f)
    assert d.diagonal and d.entries(0.5)[1] == 0.0 and d.entries(0.5)[0] == f.entries(0.5)[0]
    assert d.prepared_tail is f.prepared_tail


def test_grid_field_and_tail(tmp_path):
    f = grid_field([0.0, 1.0, 3.0], [0.5, 0.2, 0.0])
    assert f.support_end == 3.0 and f.l2_direction_ok
    s0, s1 = math.sin(0.5) ** 2, math.sin(0.2) ** 2
    assert f.tail.W(0.0) == pytest.approx(s0 + 2 * s1)
    assert f.tail.W(2.0) == pytest.approx(s1)
    assert f.tail.W(5.0) == 0.0
    # x W(x) on [1, 3] is x (3 - x) s1, maximal at x = 3/2
    assert f.tail.sup_xw(1.0) == pytest.approx(max(2.25 * s1, 1 * f.tail.W(1.0)))
    path = tmp_path / "g.csv"
    path.write_text("x,phi\n0,0.5\n1,0.2\n3,0\n")
    g = read_grid_csv(path)
    assert g.entries(2.0) == f.entries(2.0)
    with pytest.raises(DomainError):
        grid_field([1.0, 2.0], [0.1, 0.2])
    with pytest.raises(DomainError):
        grid_field([0.0, 0.0], [0.1, 0.2])
