"""Michelson-Sagnac interferometer treated as a generalized mirror (GM).

A beam splitter (amplitudes ``T_bs``, ``R_bs``) sends light along two arms
onto a partially transparent mirror M (amplitudes ``T``, ``R``).  Seen from
the cavity the whole arrangement is a mirror whose transmittance ``TT`` and
reflectivities ``RR_right`` (cavity side) and ``RR_left`` (input side)
depend on the arm phase difference ``phi_minus``, and hence on the
position of M.  At the operating phase ``phi0`` this dependence is purely
dissipative: moving M changes the loss rate of the cavity, not its
resonance frequency.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

from .errors import ConfigError, NoSolutionError
from .params import HBAR, SPEED_OF_LIGHT, PhysicalParams

__all__ = [
    "MsiParams",
    "GmScattering",
    "GmDesign",
    "gm_scattering",
    "solve_phi0",
    "phi0_branches",
    "design_gm",
    "pump_estimates",
    "radiation_force",
    "arm_force",
    "LOSSLESS_TOL",
]

LOSSLESS_TOL = 1e-12


@dataclass(frozen=True)
class MsiParams:
    """Interferometer geometry.

    ``phi_plus`` defaults to ``pi`` (``exp(i phi_plus) = -1``); it only sets
    a global phase.  Amplitudes must describe lossless elements.
    """

    T_bs: float
    R_bs: float
    T: float
    R: float
    k: float = 1.0
    L: float = 1.0
    phi_plus: float = math.pi
    phi_minus: float = math.pi / 2
    x0: float = 0.0

    def __post_init__(self):
        if abs(self.T_bs**2 + self.R_bs**2 - 1.0) > LOSSLESS_TOL:
            raise ConfigError("beam splitter is not lossless: T_bs^2 + R_bs^2 != 1")
        if abs(self.T**2 + self.R**2 - 1.0) > LOSSLESS_TOL:
            raise ConfigError("mirror M is not lossless: T^2 + R^2 != 1")
        if min(self.T_bs, self.R_bs, self.T, self.R) < 0:
            raise ConfigError("amplitudes must be non-negative")

    @property
    def Delta_bs(self) -> float:
        return self.R_bs**2 - self.T_bs**2

    @property
    def tau(self) -> float:
        """Round trip time ``2L/c`` [s]."""
        return 2.0 * self.L / SPEED_OF_LIGHT

    def at_phase(self, phi_minus: float) -> "MsiParams":
        return MsiParams(self.T_bs, self.R_bs, self.T, self.R, self.k, self.L,
                         self.phi_plus, phi_minus, self.x0)


@dataclass(frozen=True)
class GmScattering:
    TT: complex
    RR_right: complex
    RR_left: complex


def gm_scattering(msi: MsiParams) -> GmScattering:
    """Transmittance and the two reflectivities of the generalized mirror."""
    e = cmath.exp(1j * msi.phi_plus)
    c, s = math.cos(msi.phi_minus), math.sin(msi.phi_minus)
    D = msi.Delta_bs
    cross = 2.0 * msi.T * msi.T_bs * msi.R_bs
    TT = e * (2.0 * msi.R * msi.R_bs * msi.T_bs * c - msi.T * D)
    RR_right = e * (msi.R * (D * c - 1j * s) + cross)
    RR_left = -e * (msi.R * (D * c + 1j * s) + cross)
    return GmScattering(TT=TT, RR_right=RR_right, RR_left=RR_left)


def _cos_phi0(msi: MsiParams) -> float:
    D = msi.Delta_bs
    den = 2.0 * msi.T * msi.T_bs * msi.R_bs
    if den == 0:
        if D == 0:
            # balanced splitter with a perfect mirror: any phase is dissipative
            return 0.0
        raise NoSolutionError("pure dissipative coupling needs T_bs R_bs T != 0 when Delta_bs != 0")
    arg = -msi.R * D / den
    if abs(arg) > 1.0:
        raise NoSolutionError(f"no operating phase: cos(phi0) would be {arg:.6g}")
    return arg


def solve_phi0(msi: MsiParams) -> float:
    """Principal solution ``arccos(-R Delta_bs / (2 T T_bs R_bs))`` in ``[0, pi]``."""
    return math.acos(_cos_phi0(msi))


def phi0_branches(msi: MsiParams) -> tuple[float, float]:
    """Both solutions ``(+phi0, -phi0)``.

    The branch with ``sin(phi0)`` of the same sign as ``Delta_bs`` gives a
    positive coupling constant.
    """
    phi = solve_phi0(msi)
    return phi, -phi


@dataclass(frozen=True)
class GmDesign:
    """Operating point of a designed interferometer and the cavity constants it yields."""

    phi0: float
    TT0: complex
    RR0_abs: float
    eta: float
    kappa0: float
    tau: float
    T_bs: float
    R_bs: float
    T: float
    R: float
    Delta_bs: float
    k: float
    L: float

    @property
    def msi(self) -> MsiParams:
        return MsiParams(self.T_bs, self.R_bs, self.T, self.R, self.k, self.L, math.pi, self.phi0)

    def kappa(self, x):
        """Cavity loss rate ``|TT|^2 / tau`` with M displaced by ``x`` [m] from the operating point."""
        TT = gm_scattering(self.msi.at_phase(self.phi0 + 2.0 * self.k * x)).TT
        return abs(TT) ** 2 / self.tau

    def to_dict(self) -> dict:
        out = asdict(self)
        out["TT0"] = {"re": self.TT0.real, "im": self.TT0.imag}
        out["TT0_abs_sq"] = abs(self.TT0) ** 2
        out["T_bs_sq"] = self.T_bs**2
        out["eta_over_k"] = self.eta / self.k
        return out

    def to_json(self, path):
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=1))
        return path


def design_gm(T0_sq: float, R_sq: float, k: float = 1.0, L: float = 1.0, delta_sign: int = -1) -> GmDesign:
    """Choose beam-splitter amplitudes realizing ``|TT0|^2 = T0_sq`` with pure dissipative coupling.

    Parameters
    ----------
    T0_sq : float
        Target power transmittance of the generalized mirror, ``0 < T0_sq < 1``.
    R_sq : float
        Power reflectivity of mirror M, ``0 < R_sq < 1``.
    k : float
        Optical wave vector [1/m].
    L : float
        Beam-splitter to mirror distance [m]; only enters ``kappa0``.
    delta_sign : {-1, 1}
        Sign of ``Delta_bs = R_bs^2 - T_bs^2``.  The default ``-1`` puts more
        power in transmission (``T_bs > R_bs``).

    Returns
    -------
    GmDesign
        With ``|Delta_bs| = |TT0| T``, ``phi0`` on the branch giving
        ``eta = 4 k R |RR0| / |TT0| > 0``, and ``kappa0 = |TT0|^2 / tau``.
    """
    if not 0 < T0_sq < 1:
        raise ConfigError(f"T0_sq must lie in (0, 1), got {T0_sq}")
    if not 0 < R_sq < 1:
        raise ConfigError(f"R_sq must lie in (0, 1), got {R_sq}")
    if delta_sign not in (-1, 1):
        raise ConfigError("delta_sign must be -1 or 1")
    if not (k > 0 and L > 0):
        raise ConfigError("k and L must be positive")
    R = math.sqrt(R_sq)
    T = math.sqrt(1.0 - R_sq)
    TT0_abs = math.sqrt(T0_sq)
    D = delta_sign * TT0_abs * T
    T_bs = math.sqrt((1.0 - D) / 2.0)
    R_bs = math.sqrt((1.0 + D) / 2.0)
    RR0_sq = ((2.0 * T_bs * R_bs) ** 2 - R_sq) / T**2
    if RR0_sq < 0:
        raise NoSolutionError("infeasible targets: |RR0|^2 < 0")
    msi = MsiParams(T_bs, R_bs, T, R, k, L)
    plus, minus = phi0_branches(msi)
    phi0 = plus if math.copysign(1.0, math.sin(plus)) == math.copysign(1.0, D) else minus
    TT0 = gm_scattering(msi.at_phase(phi0)).TT
    RR0_abs = math.sqrt(RR0_sq)
    eta = 4.0 * k * R * RR0_abs / abs(TT0)
    tau = msi.tau
    return GmDesign(
        phi0=phi0, TT0=TT0, RR0_abs=RR0_abs, eta=eta, kappa0=abs(TT0) ** 2 / tau, tau=tau,
        T_bs=T_bs, R_bs=R_bs, T=T, R=R, Delta_bs=D, k=k, L=L,
    )


def pump_estimates(design: GmDesign, W_in: float, m: float) -> dict:
    """Pump ``Omega0`` [rad/s] with the simplified ``eta = 4k/|TT0|`` and with the full one.

    The pump frequency is taken as ``omega_p = k c``.
    """
    omega_p = design.k * SPEED_OF_LIGHT
    eta_simple = 4.0 * design.k / abs(design.TT0)
    out = {}
    for name, eta in (("simplified", eta_simple), ("full", design.eta)):
        out[name] = math.sqrt(eta**2 * W_in / (4.0 * m * omega_p))
    out["ratio"] = out["full"] / out["simplified"]
    return out


def to_physical(design: GmDesign, m: float, W_in: float, d: float, simplified: bool = False) -> PhysicalParams:
    """Cavity parameters of the abstract model realized by ``design`` at detuning ``d`` (in kappa0)."""
    eta = 4.0 * design.k / abs(design.TT0) if simplified else design.eta
    return PhysicalParams(m=m, omega_p=design.k * SPEED_OF_LIGHT, kappa0=design.kappa0,
                          delta=d * design.kappa0, eta=eta, W_in=W_in)


def arm_force(A_n: complex, A_e: complex, k: float, R: float, hbar: float = HBAR) -> float:
    """Light force on M from the arm amplitudes, ``2 hbar k R^2 (|A_n|^2 - |A_e|^2)`` [N]."""
    return 2.0 * hbar * k * R**2 * (abs(A_n) ** 2 - abs(A_e) ** 2)


def radiation_force(B_c: complex, B_in: complex, k: float, R: float, hbar: float = HBAR) -> float:
    """Interferometric force for a balanced splitter, ``2 hbar k R^2 (B_c B_in* + c.c.)`` [N].

    It depends on the cross product of the cavity and input amplitudes,
    not on the intracavity power alone.
    """
    cross = complex(B_c) * complex(B_in).conjugate()
    return 2.0 * hbar * k * R**2 * 2.0 * cross.real
