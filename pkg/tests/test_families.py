import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import em_match_up_to_degenerate_gauge
from entdist.families import (
    FamilySpec,
    brs_pair_count,
    brs_state,
    brs_state_combinatorial,
    family_ed_closed_form,
    family_em_closed_form,
    family_state,
    fig5_grid,
    ghzl_state,
    w_amplitudes,
    w_state,
    w_uniform_angles,
)
from entdist.fsmetric import entanglement_distance


class TestGhzl:
    def test_theta_zero_is_ground(self):
        s = ghzl_state(3, 0.0)
        np.testing.assert_allclose(s.amplitudes[0], 1.0)
        assert np.abs(s.amplitudes[1:]).max() == 0.0

    def test_quarter_pi_two_qubits_is_bell(self):
        s = ghzl_state(2, math.pi / 4)
        np.testing.assert_allclose(s.amplitudes, [2**-0.5, 0, 0, 2**-0.5], atol=1e-15)

    def test_closed_form_value(self):
        spec = FamilySpec("ghzl", 5, (math.pi / 8,))
        assert abs(family_ed_closed_form(spec) - 0.5) < 1e-14
        numeric = entanglement_distance(family_state(spec)).total / 5
        assert abs(numeric - 0.5) < 1e-12

    def test_range_rejected(self):
        with pytest.raises(ValueError, match="theta"):
            ghzl_state(3, 2.0)


class TestBrs:
    @pytest.mark.parametrize("phi", [0.4, 1.3, math.pi, 5.1])
    def test_m2_coefficients(self, phi):
        amps = brs_state(2, phi).amplitudes
        np.testing.assert_allclose(amps[[0, 2, 3]], 0.5, atol=1e-15)
        np.testing.assert_allclose(amps[1], np.exp(-1j * phi) / 2, atol=1e-14)

    @pytest.mark.parametrize("phi", [0.4, 2.2, 4.9])
    def test_m3_coefficients(self, phi):
        amps = brs_state(3, phi).amplitudes
        phased = [1, 2, 3, 5]
        plain = [0, 4, 6, 7]
        np.testing.assert_allclose(amps[plain], 2.0**-1.5, atol=1e-14)
        np.testing.assert_allclose(
            amps[phased], np.exp(-1j * phi) * 2.0**-1.5, atol=1e-14
        )

    @pytest.mark.parametrize("phi", [0.4, 2.2, 4.9])
    def test_m4_coefficients(self, phi):
        amps = brs_state(4, phi).amplitudes
        np.testing.assert_allclose(amps[[0, 8, 12, 14, 15]], 0.25, atol=1e-14)
        np.testing.assert_allclose(amps[5], np.exp(-2j * phi) / 4, atol=1e-14)
        single = [k for k in range(16) if k not in (0, 5, 8, 12, 14, 15)]
        np.testing.assert_allclose(
            amps[single], np.exp(-1j * phi) / 4, atol=1e-14
        )

    def test_pair_count(self):
        assert brs_pair_count(0b0101, 4) == 2
        assert brs_pair_count(0b1111, 4) == 0
        assert brs_pair_count(0b0001, 4) == 1

    @settings(max_examples=30, deadline=None)
    @given(
        m=st.integers(2, 10),
        phi=st.floats(0.0, 2 * math.pi, allow_nan=False),
    )
    def test_routes_agree(self, m, phi):
        a = brs_state(m, phi).amplitudes
        b = brs_state_combinatorial(m, phi).amplitudes
        assert np.abs(a - b).max() < 1e-12

    @pytest.mark.parametrize("phi", [0.0, 2 * math.pi])
    def test_separable_endpoints(self, phi):
        e = entanglement_distance(brs_state(4, phi), include_em=False).total
        assert e < 1e-12


class TestW:
    def test_m2_balanced(self):
        s = w_state(2, (math.pi / 4,))
        np.testing.assert_allclose(s.amplitudes, [0, 2**-0.5, 2**-0.5, 0], atol=1e-15)

    def test_m3_uniform(self):
        s = w_state(3, (math.acos(1 / math.sqrt(3)), math.pi / 4))
        np.testing.assert_allclose(
            s.amplitudes[[1, 2, 4]], 3**-0.5, atol=1e-15
        )

    def test_uniform_angles_helper(self):
        for m in (2, 3, 4, 5):
            alphas = w_amplitudes(m, w_uniform_angles(m))
            np.testing.assert_allclose(alphas, m**-0.5, atol=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(
        angles=st.lists(
            st.floats(0.0, math.pi / 2, allow_nan=False), min_size=1, max_size=5
        )
    )
    def test_chart_normalized(self, angles):
        alphas = w_amplitudes(len(angles) + 1, angles)
        assert abs((alphas**2).sum() - 1.0) < 1e-12

    def test_wrong_angle_count(self):
        with pytest.raises(ValueError, match="angles"):
            w_state(3, (0.5,))


class TestClosedFormEd:
    @pytest.mark.parametrize("m", [2, 3, 4, 6])
    def test_ghzl_sweep(self, m):
        for theta in np.linspace(0, math.pi / 2, 50):
            spec = FamilySpec("ghzl", m, (theta,))
            numeric = entanglement_distance(family_state(spec), include_em=False).total / m
            assert abs(numeric - family_ed_closed_form(spec)) < 1e-10

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_brs_sweep(self, m):
        for phi in np.linspace(0, 2 * math.pi, 50):
            spec = FamilySpec("brs", m, (phi,))
            numeric = entanglement_distance(family_state(spec), include_em=False).total / m
            assert abs(numeric - family_ed_closed_form(spec)) < 1e-10

    @pytest.mark.parametrize("m", [2, 3, 4, 5])
    def test_w_sweep(self, m):
        rng = np.random.default_rng(m)
        for _ in range(50):
            angles = rng.uniform(0, math.pi / 2, m - 1)
            spec = FamilySpec("w", m, tuple(angles))
            numeric = entanglement_distance(family_state(spec), include_em=False).total / m
            assert abs(numeric - family_ed_closed_form(spec)) < 1e-10

    def test_brs_no_closed_form_above_four(self):
        with pytest.raises(ValueError, match="closed form"):
            family_ed_closed_form(FamilySpec("brs", 5, (1.0,)))

    def test_values(self):
        assert abs(family_ed_closed_form(FamilySpec("ghzl", 3, (math.pi / 4,))) - 1.0) < 1e-14
        assert abs(family_ed_closed_form(FamilySpec("brs", 4, (math.pi,))) - 1.0) < 1e-14
        assert (
            abs(family_ed_closed_form(FamilySpec("w", 3, w_uniform_angles(3))) - 8 / 9)
            < 1e-14
        )


class TestClosedFormEm:
    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_ghzl_em(self, m):
        for theta in np.linspace(0, math.pi / 2, 21):
            spec = FamilySpec("ghzl", m, (theta,))
            rpt = entanglement_distance(family_state(spec))
            closed = family_em_closed_form(spec)
            np.testing.assert_allclose(rpt.em, closed, atol=1e-10)

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_brs_em(self, m):
        for phi in np.linspace(0, 2 * math.pi, 50):
            spec = FamilySpec("brs", m, (phi,))
            rpt = entanglement_distance(family_state(spec))
            closed = family_em_closed_form(spec)
            np.testing.assert_allclose(rpt.em, closed, atol=1e-10)

    def test_w2_em_gauge_aware(self):
        for theta in np.linspace(0, math.pi / 2, 31):
            spec = FamilySpec("w", 2, (theta,))
            rpt = entanglement_distance(family_state(spec))
            closed = family_em_closed_form(spec)
            assert em_match_up_to_degenerate_gauge(
                rpt.em, closed, rpt.degenerate_qubits, 1e-10
            )

    def test_w3_uniform_em(self):
        spec = FamilySpec("w", 3, w_uniform_angles(3))
        rpt = entanglement_distance(family_state(spec))
        closed = family_em_closed_form(spec)
        assert rpt.degenerate_qubits == []
        np.testing.assert_allclose(rpt.em, closed, atol=1e-10)
        np.testing.assert_allclose(np.diag(closed), 8 / 9)
        assert abs(closed.trace() - rpt.total) < 1e-12

    def test_unsupported_combinations(self):
        with pytest.raises(ValueError):
            family_em_closed_form(FamilySpec("brs", 5, (1.0,)))
        with pytest.raises(ValueError):
            family_em_closed_form(FamilySpec("w", 4, (0.5, 0.5, 0.5)))
        with pytest.raises(ValueError, match="uniform"):
            family_em_closed_form(FamilySpec("w", 3, (0.3, 0.4)))


class TestFig5Grid:
    def test_grid_shape_and_landmarks(self):
        t1, t2, vals = fig5_grid(41)
        assert vals.shape == (41, 41)
        # theta1 = 0 row is identically zero
        np.testing.assert_allclose(vals[0], 0, atol=1e-13)
        # theta2 boundary rows for theta1 = pi/4 (index 20) reach 2/3
        assert abs(vals[20, 0] - 2 / 3) < 1e-12
        assert abs(vals[20, -1] - 2 / 3) < 1e-12

    def test_boundary_band(self):
        t1, t2, vals = fig5_grid(41)
        interior = slice(1, -1)
        for col in (0, -1):
            band = vals[interior, col]
            assert np.all(band > 0)
            assert np.all(band <= 2 / 3 + 1e-12)

    def test_maximum_near_uniform_point(self):
        t1, t2, vals = fig5_grid(61)
        i, j = np.unravel_index(np.argmax(vals), vals.shape)
        assert abs(t1[i] - math.acos(1 / math.sqrt(3))) <= t1[1] - t1[0] + 1e-12
        assert abs(t2[j] - math.pi / 4) <= t2[1] - t2[0] + 1e-12
        assert vals.max() <= 8 / 9 + 1e-12

    def test_resolution_check(self):
        with pytest.raises(ValueError):
            fig5_grid(1)


class TestFamilySpecValidation:
    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="kind"):
            FamilySpec("ghz", 3, (0.5,))

    def test_small_m(self):
        with pytest.raises(ValueError, match="M >= 2"):
            FamilySpec("ghzl", 1, (0.5,))

    def test_brs_out_of_range(self):
        with pytest.raises(ValueError, match="phi"):
            FamilySpec("brs", 3, (7.0,))
