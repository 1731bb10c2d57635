import math

import numpy as np
import pytest

from optorigid.errors import ConfigError, NoSolutionError
from optorigid.msi import (
    MsiParams, arm_force, design_gm, gm_scattering, phi0_branches, pump_estimates, radiation_force, solve_phi0,
    to_physical,
)
from optorigid.params import SPEED_OF_LIGHT


def msi(Tbs_sq, T_sq, phi_minus=math.pi / 2, **kw):
    return MsiParams(math.sqrt(Tbs_sq), math.sqrt(1 - Tbs_sq), math.sqrt(T_sq), math.sqrt(1 - T_sq),
                     phi_minus=phi_minus, **kw)


def random_msi(rng):
    return msi(rng.uniform(0, 1), rng.uniform(0, 1), phi_minus=rng.uniform(-math.pi, math.pi),
               phi_plus=rng.uniform(-math.pi, math.pi))


class TestScattering:
    def test_lossless_validation(self):
        with pytest.raises(ConfigError):
            MsiParams(0.7, 0.7, 0.5, math.sqrt(0.75))
        with pytest.raises(ConfigError):
            MsiParams(math.sqrt(0.5), math.sqrt(0.5), 0.5, 0.5)

    def test_balanced_perfect_mirror_blocks(self):
        assert abs(gm_scattering(msi(0.5, 0.0)).TT) < 1e-16

    def test_unitarity(self, rng):
        for _ in range(1000):
            g = gm_scattering(random_msi(rng))
            assert abs(g.TT) ** 2 + abs(g.RR_right) ** 2 == pytest.approx(1.0, abs=1e-12)

    def test_reflectivities_share_modulus(self, rng):
        for _ in range(200):
            g = gm_scattering(random_msi(rng))
            assert abs(g.RR_left) == pytest.approx(abs(g.RR_right), abs=1e-12)

    def test_against_boundary_conditions(self, rng):
        # solve the splitter and mirror relations directly for one input at a time
        for _ in range(20):
            m = random_msi(rng)
            Tb, Rb, T, R = m.T_bs, m.R_bs, m.T, m.R
            pe = (m.phi_plus + m.phi_minus) / 2
            pn = (m.phi_plus - m.phi_minus) / 2
            for B_in, B_c in ((1.0, 0.0), (0.0, 1.0)):
                A_e = Tb * B_c - Rb * B_in
                A_n = Rb * B_c + Tb * B_in
                B_e = -R * A_e * np.exp(2j * pe) + T * A_n * np.exp(1j * (pe + pn))
                B_n = R * A_n * np.exp(2j * pn) + T * A_e * np.exp(1j * (pe + pn))
                D_c = Tb * B_e + Rb * B_n
                B_out = Tb * B_n - Rb * B_e
                g = gm_scattering(m)
                assert D_c == pytest.approx(g.TT * B_in + g.RR_right * B_c, abs=1e-12)
                assert B_out == pytest.approx(g.TT * B_c + g.RR_left * B_in, abs=1e-12)


class TestOperatingPhase:
    def test_balanced(self):
        assert solve_phi0(msi(0.5, 0.3)) == pytest.approx(math.pi / 2)

    def test_frozen_cosine(self):
        m = msi(0.51, 0.3)
        second = -math.sqrt(0.7) * (0.49 - 0.51) / (2 * math.sqrt(0.3) * math.sqrt(0.51 * 0.49))
        assert math.cos(solve_phi0(m)) == pytest.approx(second, rel=1e-12)
        assert math.cos(solve_phi0(m)) == pytest.approx(0.030557, rel=1e-4)

    def test_branches(self):
        a, b = phi0_branches(msi(0.51, 0.3))
        assert b == -a and 0 <= a <= math.pi

    def test_perfect_mirror_unbalanced(self):
        with pytest.raises(NoSolutionError):
            solve_phi0(msi(0.6, 0.0))

    def test_unreachable(self):
        with pytest.raises(NoSolutionError):
            solve_phi0(msi(0.95, 0.01))


class TestDesign:
    def test_frozen_chain(self):
        g = design_gm(1e-4, 0.7, k=1.0)
        assert g.T_bs**2 == pytest.approx(0.50274, abs=5e-6)
        assert g.RR0_abs == pytest.approx(0.99995, abs=5e-6)
        assert g.eta == pytest.approx(334.66, rel=1e-4)

    def test_independent_rederivation(self):
        T = math.sqrt(0.3)
        D = -0.01 * T
        Tbs_sq = (1 - D) / 2
        RR0 = math.sqrt(4 * Tbs_sq * (1 - Tbs_sq) - 0.7) / T
        g = design_gm(1e-4, 0.7, k=2 * math.pi * 1e6)
        assert g.T_bs**2 == pytest.approx(Tbs_sq, rel=1e-14)
        assert g.RR0_abs == pytest.approx(RR0, rel=1e-12)
        assert g.eta == pytest.approx(4 * 2 * math.pi * 1e6 * math.sqrt(0.7) * RR0 / 0.01, rel=1e-10)
        assert g.eta == pytest.approx(2.103e9, rel=1e-3)

    def test_invariants(self):
        g = design_gm(1e-4, 0.7)
        assert math.cos(g.phi0) == pytest.approx(-g.R * g.Delta_bs / (2 * g.T * g.T_bs * g.R_bs), abs=1e-12)
        assert abs(g.TT0) ** 2 + g.RR0_abs**2 == pytest.approx(1.0, abs=1e-10)
        assert abs(g.TT0) ** 2 == pytest.approx(1e-4, rel=1e-10)
        assert g.TT0.real < 0  # -exp(i phi_plus) Delta_bs / T with Delta_bs < 0 and exp(i phi_plus) = -1

    def test_positive_splitter_sign(self):
        g = design_gm(1e-4, 0.7, delta_sign=1)
        assert g.Delta_bs > 0 and g.eta > 0 and g.TT0.real > 0

    @pytest.mark.parametrize("kx", [1e-6, 1e-5, 1e-4])
    def test_linearized_loss_rate(self, kx):
        g = design_gm(1e-4, 0.7, k=2 * math.pi * 1e6, L=0.1)
        x = kx / g.k
        slope = (g.kappa(x) - g.kappa(-x)) / (2 * x)
        assert slope / g.kappa0 == pytest.approx(g.eta, rel=1e-6)

    def test_first_order_transmittance(self):
        g = design_gm(1e-4, 0.7, k=1.0)
        for kx in (1e-6, 1e-5):
            TT = gm_scattering(g.msi.at_phase(g.phi0 + 2 * kx)).TT
            rel = (TT - g.TT0) / g.TT0
            assert rel.real == pytest.approx(g.R * g.RR0_abs / abs(g.TT0) * 2 * kx, rel=1e-3)

    def test_relative_derivatives_real(self):
        g = design_gm(1e-4, 0.7)
        h = 1e-6
        for name in ("TT", "RR_right"):
            up = getattr(gm_scattering(g.msi.at_phase(g.phi0 + h)), name)
            dn = getattr(gm_scattering(g.msi.at_phase(g.phi0 - h)), name)
            mid = getattr(gm_scattering(g.msi), name)
            rel = (up - dn) / (2 * h) / mid
            assert abs(rel.imag) < 1e-10 * max(1.0, abs(rel))

    @pytest.mark.parametrize("T0_sq,R_sq", [(0.0, 0.7), (1.0, 0.7), (1e-4, 0.0), (1e-4, 1.0)])
    def test_bad_targets(self, T0_sq, R_sq):
        with pytest.raises(ConfigError):
            design_gm(T0_sq, R_sq)

    def test_json(self, tmp_path):
        import json
        doc = json.loads(design_gm(1e-4, 0.7).to_json(tmp_path / "g.json").read_text())
        assert doc["TT0_abs_sq"] == pytest.approx(1e-4)


class TestPump:
    def test_estimates(self):
        g = design_gm(1e-4, 0.7, k=2 * math.pi / 1e-6)
        est = pump_estimates(g, 1e-4, 1e-11)
        assert est["simplified"] == pytest.approx(9.2e4, rel=0.02)
        ref = math.sqrt(4 * g.k * 1e-4 / (1e-11 * SPEED_OF_LIGHT * 1e-4))
        assert est["simplified"] == pytest.approx(ref, rel=1e-12)
        assert est["ratio"] == pytest.approx(g.R * g.RR0_abs, rel=1e-12)

    def test_to_physical(self):
        g = design_gm(1e-4, 0.7, k=2 * math.pi / 1e-6, L=0.05)
        p = to_physical(g, 1e-11, 1e-4, -0.55)
        assert p.kappa0 == pytest.approx(1e-4 * SPEED_OF_LIGHT / 0.1)
        assert p.d == pytest.approx(-0.55)


class TestForce:
    def test_no_input(self):
        assert radiation_force(3.0 + 2j, 0.0, 1.0, 0.8) == 0.0

    def test_quadrature_phases(self):
        assert radiation_force(2.0, 1.5j, 1.0, 0.8) == pytest.approx(0.0, abs=1e-15)

    def test_frozen_value(self):
        assert radiation_force(1.0, 1.0, 1.0, math.sqrt(0.7), hbar=1.0) == pytest.approx(2.8)

    def test_matches_arm_powers(self, rng):
        s = math.sqrt(0.5)
        for _ in range(20):
            B_c, B_in = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
            A_e = s * B_c - s * B_in
            A_n = s * B_c + s * B_in
            assert radiation_force(B_c, B_in, 2.0, 0.9, hbar=1.0) == pytest.approx(
                arm_force(A_n, A_e, 2.0, 0.9, hbar=1.0), rel=1e-12)
