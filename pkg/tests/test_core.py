import math

import numpy as np
import pytest

from pwlcycles import (
    Boundary,
    EvaluationError,
    ParameterError,
    Point,
    PWLSystem,
    SystemParams,
    Zone,
    ZoneMatrices,
    make_oscillatory,
    manifold_value,
    system_descriptor,
    vector_field,
)
from pwlcycles.core import manifold_values, zone_matrix


class TestSystemParams:
    @pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
    def test_rejects_nonpositive(self, bad):
        with pytest.raises(ParameterError):
            SystemParams(bad)

    def test_accepts_positive(self):
        assert SystemParams(0.75).gamma == 0.75


class TestZoneMatrices:
    def test_entries(self, params075):
        m = ZoneMatrices.from_params(params075)
        assert (m.g11_plus, m.g12_plus, m.g21_plus, m.g22_plus) == (1.5, -1.0, 1.5625, 0.0)
        assert (m.g11_minus, m.g12_minus, m.g21_minus, m.g22_minus) == (-1.5, -1.0, 1.5625, 0.0)

    def test_focus_invariants(self, params075):
        m = ZoneMatrices.from_params(params075)
        for zone in Zone:
            assert m.det(zone) == pytest.approx(0.75 ** 2 + 1.0)
            assert m.discriminant(zone) == pytest.approx(-4.0)
        assert m.trace(Zone.RIGHT) == 1.5
        assert m.trace(Zone.LEFT) == -1.5

    def test_zone_matrix_helper(self, params075):
        np.testing.assert_allclose(zone_matrix(params075, Zone.RIGHT),
                                   ZoneMatrices.from_params(params075).plus)
        np.testing.assert_allclose(zone_matrix(params075, Zone.LEFT),
                                   ZoneMatrices.from_params(params075).minus)


class TestManifoldValue:
    def test_lower_half_returns_x(self, zero_system):
        assert manifold_value(zero_system, Point(1.0, -2.0)) == 1.0

    def test_sine_root_on_axis(self, sine_system):
        # h(1) vanishes for the sine boundary, so (0, 1) sits on the manifold
        assert abs(manifold_value(sine_system, Point(0.0, 1.0))) < 1e-15

    def test_oscillatory_point(self):
        system = PWLSystem(SystemParams(1.0), make_oscillatory(0.3))
        got = manifold_value(system, Point(0.05, 0.5))
        assert got == pytest.approx(-0.018197307011926123, abs=1e-15)

    def test_continuous_across_axis(self, sine_system, zero_system, oscillatory_system):
        for system in (sine_system, zero_system, oscillatory_system):
            for x in (-0.7, 0.0, 0.4):
                above = manifold_value(system, Point(x, 1e-13))
                below = manifold_value(system, Point(x, -1e-13))
                assert above == pytest.approx(below, abs=1e-12)

    def test_nonfinite_point_rejected(self, zero_system):
        with pytest.raises(EvaluationError):
            manifold_value(zero_system, Point(math.nan, 0.0))

    def test_nonfinite_boundary_rejected(self, params075):
        bad = Boundary(evaluate=lambda y: np.full_like(np.asarray(y, dtype=float), np.nan),
                       derivative=lambda y: np.zeros_like(np.asarray(y, dtype=float)))
        system = PWLSystem(params075, bad)
        with pytest.raises(EvaluationError):
            manifold_value(system, Point(0.0, 1.0))

    def test_vectorized_matches_scalar(self, sine_system):
        rng = np.random.default_rng(7)
        pts = rng.uniform(-3.0, 3.0, size=(64, 2))
        vec = manifold_values(sine_system, pts)
        for row, v in zip(pts, vec):
            assert v == pytest.approx(manifold_value(sine_system, Point(*row)), abs=1e-15)


class TestVectorField:
    def test_origin_is_equilibrium(self, zero_system):
        assert vector_field(zero_system, Point(0.0, 0.0)) == Point(0.0, 0.0)

    def test_right_zone_product(self, zero_system):
        assert vector_field(zero_system, Point(1.0, 0.0)) == Point(1.5, 1.5625)

    def test_left_zone_product(self, zero_system):
        assert vector_field(zero_system, Point(-1.0, 0.0)) == Point(1.5, -1.5625)

    def test_zone_dichotomy(self, sine_system):
        m = sine_system.matrices
        rng = np.random.default_rng(11)
        for x, y in rng.uniform(-3.0, 3.0, size=(256, 2)):
            p = Point(float(x), float(y))
            expected = (m.plus if manifold_value(sine_system, p) >= 0.0 else m.minus) @ [p.x, p.y]
            got = vector_field(sine_system, p)
            np.testing.assert_allclose([got.x, got.y], expected, rtol=0, atol=1e-14)

    def test_no_other_equilibria(self, sine_system):
        rng = np.random.default_rng(13)
        for x, y in rng.uniform(-2.0, 2.0, size=(128, 2)):
            if (x, y) == (0.0, 0.0):
                continue
            v = vector_field(sine_system, Point(float(x), float(y)))
            assert math.hypot(v.x, v.y) > 0.0


def test_system_descriptor_roundtrip_shape(sine_system):
    d = system_descriptor(sine_system)
    assert d == {"gamma": 0.75, "boundary": {"family": "sine", "params": {"n": 2}}}
