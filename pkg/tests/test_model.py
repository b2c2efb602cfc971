import math

import pytest

from latticecond.model import InvalidParameterError, ModelParams, derive_geometry, validate


def test_large_geometry():
    L, a, q_max = derive_geometry(101, 1.0, 10)
    assert L == pytest.approx(25.0663, abs=5e-5)
    assert a == pytest.approx(2.50663, abs=5e-6)
    assert q_max == 50
    assert 1.0 * L**2 / (4 * math.pi) == pytest.approx(50, rel=1e-12)


def test_small_geometry():
    L, a, q_max = derive_geometry(3, 2 * math.pi, 2)
    assert L == pytest.approx(math.sqrt(2))
    assert a == pytest.approx(math.sqrt(2) / 2)
    assert q_max == 1


@pytest.mark.parametrize("Q, lam, N", [(100, 1.0, 10), (101, 1.0, 9), (101, 0.0, 10), (101, -1.0, 10), (1, 1.0, 2)])
def test_derive_geometry_rejects(Q, lam, N):
    with pytest.raises(InvalidParameterError):
        derive_geometry(Q, lam, N)


def test_a_times_n_within_rounding():
    # a = L/N is rounded once, so a*N can miss L by an ulp
    for Q, N in [(101, 10), (25, 4), (33, 4), (21, 6)]:
        L, a, _ = derive_geometry(Q, 1.0, N)
        assert abs(a * N - L) <= 2 * math.ulp(L)


def test_validate_large_parameters():
    report = validate(ModelParams())
    assert report.ok
    assert report.dim == 20301
    assert report.matrix_bytes == 8 * 20301**2
    assert "GiB" in str(report)


def test_validate_messages():
    assert "Q must be odd" in validate(ModelParams(Q=100)).violations
    assert "lambda must be positive" in validate(ModelParams(lam=0.0)).violations
    assert "J must be odd" in validate(ModelParams(J=20)).violations
    assert "N must be even" in validate(ModelParams(N=5)).violations
    assert "spin must be +1 or -1" in validate(ModelParams(spin=0)).violations
    assert "m must be positive" in validate(ModelParams(m=-1.0)).violations


def test_validate_collects_all():
    report = validate(ModelParams(Q=100, J=20, lam=0.0))
    assert len(report.violations) >= 3
    assert not report.ok


def test_check_raises_with_every_violation():
    with pytest.raises(InvalidParameterError, match="Q must be odd.*J must be odd"):
        ModelParams(Q=100, J=20).check()


def test_nonfinite_rejected():
    assert any("finite" in v for v in validate(ModelParams(Ux=float("nan"))).violations)


def test_derived_fields():
    p = ModelParams(Q=9, J=7, N=4, lam=2.0)
    assert p.q_max == 4 and p.n_max == 3 and p.dim == 63
    assert p.y_step == pytest.approx(2 * math.pi / (2.0 * p.L))
    assert p.with_efield(3).Efield == 3.0 and p.Efield == 0.0
