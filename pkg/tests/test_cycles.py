import json
import math

import numpy as np
import pytest

from pwlcycles import (
    Boundary,
    DomainError,
    HypothesisError,
    PWLSystem,
    StabilityClass,
    SystemParams,
    classify,
    find_limit_cycles,
    find_roots,
    make_cosine,
    make_sine,
    make_zero,
    oscillatory_root,
    reports_for_roots,
)
from pwlcycles.cycles import CYCLE_CSV_HEADER


class TestFindRoots:
    def test_sine_roots(self, params075):
        b = make_sine(params075, 3)
        scan = find_roots(b, 0.1, 5.0)
        assert not scan.continuum
        assert len(scan.roots) == 3
        for r, k in zip(scan.roots, (1, 2, 3)):
            assert abs(r - k) < 1e-10

    def test_cosine_tangential_roots(self):
        params = SystemParams(0.4)
        b = make_cosine(params, 2)
        scan = find_roots(b, 0.1, 6.0)
        assert len(scan.roots) == 2
        for r, k in zip(scan.roots, (2.0, 4.0)):
            assert abs(r - k) < 1e-6

    def test_zero_boundary_is_continuum(self):
        scan = find_roots(make_zero(), 0.1, 3.0)
        assert scan.continuum and scan.roots == ()

    def test_near_tangency_not_a_root(self, params075):
        # a parabola lifted off zero must not be reported
        b = Boundary(
            evaluate=lambda y: 1e-3 + (np.asarray(y, dtype=float) - 1.0) ** 2,
            derivative=lambda y: 2.0 * (np.asarray(y, dtype=float) - 1.0),
        )
        assert find_roots(b, 0.5, 1.5).roots == ()

    def test_domain_validation(self, params075):
        b = make_sine(params075, 1)
        with pytest.raises(DomainError):
            find_roots(b, 0.0, 2.0)
        with pytest.raises(DomainError):
            find_roots(b, 1.0, 0.5)
        with pytest.raises(DomainError):
            find_roots(b, 0.1, 2.0, scan_points=1)


class TestClassify:
    def test_hyperbolic_shortcut(self, params075):
        b = make_sine(params075, 2)
        assert classify(b, 2.0) is StabilityClass.STABLE
        assert classify(b, 1.0) is StabilityClass.UNSTABLE

    def test_cosine_is_outer_stable(self):
        params = SystemParams(0.4)
        b = make_cosine(params, 1)
        assert classify(b, 2.0) is StabilityClass.SEMI_STABLE_OUTER_STABLE

    def test_inner_stable_case(self):
        # negative tangential touch: h < 0 on both sides of the zero
        b = Boundary(
            evaluate=lambda y: -np.asarray(y, dtype=float) * (np.asarray(y, dtype=float) - 1.0) ** 2,
            derivative=lambda y: -(np.asarray(y, dtype=float) - 1.0)
            * (3.0 * np.asarray(y, dtype=float) - 1.0),
        )
        assert classify(b, 1.0) is StabilityClass.SEMI_STABLE_INNER_STABLE

    def test_flat_zero_is_undetermined(self):
        b = Boundary(
            evaluate=lambda y: np.zeros_like(np.asarray(y, dtype=float)),
            derivative=lambda y: np.zeros_like(np.asarray(y, dtype=float)),
        )
        assert classify(b, 1.0) is StabilityClass.UNDETERMINED

    def test_domain_validation(self, params075):
        with pytest.raises(DomainError):
            classify(make_sine(params075, 1), 0.0)


class TestFindLimitCycles:
    def test_sine_counts_and_classes(self, sine_system):
        result = find_limit_cycles(sine_system, 0.1, 4.0)
        assert not result.continuum
        assert result.origin == "stable focus"
        assert [c.stability for c in result.cycles] == [
            StabilityClass.UNSTABLE, StabilityClass.STABLE]
        assert [round(c.y_star) for c in result.cycles] == [1, 2]

    def test_nesting_and_crossing_symmetry(self, sine_system):
        result = find_limit_cycles(sine_system, 0.1, 4.0)
        uppers = [c.upper_crossing.y for c in result.cycles]
        lowers = [c.lower_crossing.y for c in result.cycles]
        assert uppers == sorted(uppers)
        assert lowers == sorted(lowers, reverse=True)
        ratio = -math.exp(-sine_system.gamma * math.pi)
        for c in result.cycles:
            assert c.lower_crossing.y / c.upper_crossing.y == pytest.approx(ratio, abs=1e-15)
            assert c.upper_crossing.x == 0.0 and c.lower_crossing.x == 0.0
            assert c.period == 2.0 * math.pi

    def test_hyperbolicity_link(self, sine_system, cosine_system):
        for system, hi in ((sine_system, 4.0), (cosine_system, 6.0)):
            for c in find_limit_cycles(system, 0.1, hi).cycles:
                assert c.hyperbolic == (abs(c.h_prime) > 1e-8)
                if c.hyperbolic:
                    assert math.copysign(1.0, c.f3) == math.copysign(1.0, c.h_prime)
                else:
                    # slope at a refined tangential root is ~1e-12, cubed
                    assert abs(c.f3) < 1e-30

    def test_zero_boundary_continuum(self, zero_system):
        result = find_limit_cycles(zero_system, 0.1, 3.0)
        assert result.continuum
        assert result.cycles == []
        assert result.origin == "center"

    def test_hypothesis_refusal_with_report(self):
        gamma = 0.75
        b = Boundary(
            evaluate=lambda y: 2.0 * np.asarray(y, dtype=float) / gamma,
            derivative=lambda y: np.full_like(np.asarray(y, dtype=float), 2.0 / gamma),
        )
        system = PWLSystem(SystemParams(gamma), b)
        with pytest.raises(HypothesisError) as err:
            find_limit_cycles(system, 0.1, 2.0)
        assert err.value.report is not None
        assert not err.value.report.passed
        # explicit override skips certification; no zeros of h on the range
        result = find_limit_cycles(system, 0.1, 2.0, certify=False)
        assert result.cycles == []

    def test_certificate_attached_on_success(self, sine_system):
        result = find_limit_cycles(sine_system, 0.1, 4.0)
        assert result.hypothesis_report is not None
        assert result.hypothesis_report.passed


class TestOscillatoryPath:
    def test_exact_roots_and_alternation(self, oscillatory_system):
        roots = [oscillatory_root(k) for k in range(1, 6)]
        reports = reports_for_roots(oscillatory_system, roots)
        assert [c.y_star for c in reports] == sorted(roots)
        for c in reports:
            k = round(1.0 / (c.y_star * math.pi))
            expected = StabilityClass.STABLE if k % 2 == 1 else StabilityClass.UNSTABLE
            assert c.stability is expected
            assert c.lower_crossing.y == pytest.approx(-math.exp(-math.pi) / (k * math.pi),
                                                       rel=1e-14)
        uppers = [c.upper_crossing.y for c in reports]
        assert uppers == sorted(uppers)


class TestSerialization:
    def test_csv_row_matches_header(self, sine_system):
        c = find_limit_cycles(sine_system, 0.1, 4.0).cycles[0]
        row = c.csv_row()
        assert len(row) == len(CYCLE_CSV_HEADER)
        assert row[3] == "unstable"

    def test_json_roundtrips_through_dumps(self, sine_system):
        result = find_limit_cycles(sine_system, 0.1, 4.0)
        payload = json.loads(json.dumps(result.to_json()))
        assert payload["continuum"] is False
        assert len(payload["cycles"]) == 2
        for key in ("y_star", "upper_crossing", "lower_crossing", "period",
                    "stability", "h_prime", "f3", "hyperbolic"):
            assert key in payload["cycles"][0]
