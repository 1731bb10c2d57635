"""System parameters, pump bookkeeping, steady state and response primitives.

All frequency-domain work in this package is done in normalized units where
the cavity linewidth ``kappa0`` is the frequency unit, the mass is 1 and
hbar is 1.  Conversion to SI happens only at the public API boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import hbar as HBAR

from .errors import ConfigError

__all__ = [
    "HBAR",
    "SPEED_OF_LIGHT",
    "PhysicalParams",
    "NormalizedParams",
    "SteadyState",
    "ResponseKernel",
    "pump_scale",
    "pump_scale_from_energy",
    "pump_scale_from_amplitude",
    "omega0_max",
    "pump_from_fraction",
    "normalize",
    "steady_state",
    "input_amplitude",
    "response_kernel",
    "resolve_params",
]

# relative tolerance when the same pump is specified twice
CONSISTENCY_RTOL = 1e-6


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional description of the pumped, dissipatively coupled cavity.

    Parameters
    ----------
    m : float
        Test mass [kg].
    omega_p : float
        Pump angular frequency [rad/s].
    kappa0 : float
        Unperturbed cavity linewidth (FWHM) [rad/s].
    delta : float
        Detuning ``omega_p - omega_cavity`` [rad/s].
    eta : float
        Dissipative coupling constant, ``kappa = kappa0 (1 + eta x)`` [1/m].
    W_in : float
        Input pump power [W].
    """

    m: float
    omega_p: float
    kappa0: float
    delta: float
    eta: float
    W_in: float

    def __post_init__(self):
        for name in ("m", "kappa0", "omega_p"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be finite and positive, got {value!r}")
        if not (math.isfinite(self.W_in) and self.W_in >= 0):
            raise ConfigError(f"W_in must be finite and non-negative, got {self.W_in!r}")
        for name in ("eta", "delta"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")

    @property
    def Omega0_sq(self) -> float:
        """Recalculated pump ``eta^2 W_in / (4 m omega_p)`` [rad^2/s^2]."""
        return pump_scale(self)

    @property
    def d(self) -> float:
        return self.delta / self.kappa0

    @property
    def w0_sq(self) -> float:
        """Pump in units of ``kappa0^2``."""
        return self.Omega0_sq / self.kappa0**2

    @classmethod
    def from_normalized(
        cls,
        d: float,
        y: float | None = None,
        w0: float | None = None,
        *,
        kappa0: float = 1.0,
        m: float = 1.0,
        omega_p: float = 1.0,
        eta: float = 1.0,
    ) -> "PhysicalParams":
        """Build parameters from a normalized detuning and pump.

        Exactly one of ``y`` (fraction of the maximal stable pump) or ``w0``
        (``Omega0 / kappa0``) must be given.  ``W_in`` is solved for so that
        the pump matches; the remaining dimensional values are free scales.
        """
        if (y is None) == (w0 is None):
            raise ConfigError("give exactly one of y or w0")
        if y is not None:
            w0_sq = pump_from_fraction(d, y)
        else:
            w0_sq = w0**2
        if eta == 0:
            raise ConfigError("eta must be non-zero to realize a pump")
        Omega0_sq = w0_sq * kappa0**2
        W_in = 4.0 * m * omega_p * Omega0_sq / eta**2
        return cls(m=m, omega_p=omega_p, kappa0=kappa0, delta=d * kappa0, eta=eta, W_in=W_in)


@dataclass(frozen=True)
class NormalizedParams:
    """Dimensionless view of a parameter set.

    ``y`` is ``nan`` when the detuning admits no positive pump bound
    (``|d| <= 1/2``); see :func:`pump_from_fraction` for the convention used
    on sweeps across that region.
    """

    d: float
    w0: float
    y: float


@dataclass(frozen=True)
class SteadyState:
    A: complex
    A_in: float
    A_out: complex


@dataclass(frozen=True)
class ResponseKernel:
    """Complex response primitives at sideband frequency ``Omega``.

    Frequencies are in rad/s; the ``g``, ``j`` and ``beta`` factors are
    dimensionless.  ``beta_minus`` is stored unconjugated.  Fields are
    scalars or arrays matching ``Omega``.
    """

    Omega: np.ndarray
    psi: complex
    psi_conj: complex
    Psi: np.ndarray
    Psi_conj: np.ndarray
    Psi_minus: np.ndarray
    Psi_minus_conj: np.ndarray
    g_plus: complex
    g_minus: complex
    j_plus: np.ndarray
    j_minus: np.ndarray
    beta_plus: np.ndarray
    beta_minus: np.ndarray


def pump_scale(p: PhysicalParams) -> float:
    """Return ``Omega0^2 = eta^2 W_in / (4 m omega_p)``."""
    return p.eta**2 * p.W_in / (4.0 * p.m * p.omega_p)


def pump_scale_from_energy(eta, kappa0, E0, m, omega_p):
    """Same pump written through the stored energy ``E0`` (``W_in = kappa0 E0``)."""
    return eta**2 * kappa0 * E0 / (4.0 * m * omega_p)


def pump_scale_from_amplitude(eta, A_in, kappa0, delta, m, hbar=HBAR):
    """Same pump written through the mean input amplitude ``A_in`` [sqrt(1/s)]."""
    half = kappa0 / 2.0
    return hbar * eta**2 * A_in**2 * half**2 / (m * (half**2 + delta**2))


def input_amplitude(p: PhysicalParams, hbar=HBAR) -> float:
    """Mean input amplitude consistent with the pump of ``p``."""
    if p.eta == 0:
        return 0.0
    half = p.kappa0 / 2.0
    return math.sqrt(p.Omega0_sq * p.m * (half**2 + p.delta**2) / (hbar * p.eta**2 * half**2))


def omega0_max(kappa0, delta):
    """Largest stable pump, as ``Omega0max^2 = (kappa0/|delta|) (delta^2 - (kappa0/2)^2)``.

    A negative value means no positive pump is stable at this detuning; it is
    returned as is.  ``delta == 0`` raises :class:`ZeroDivisionError`.
    """
    if delta == 0:
        raise ZeroDivisionError("pump bound undefined at zero detuning")
    return (kappa0 / abs(delta)) * (delta**2 - (kappa0 / 2.0) ** 2)


def pump_from_fraction(d, y):
    """Normalized pump ``Omega0^2/kappa0^2`` for detuning ``d`` and fraction ``y``.

    For ``|d| > 1/2`` this is ``y * omega0_max``.  Where the bound is not
    positive (``|d| < 1/2``), ``y`` scales ``|omega0_max|`` instead, and at ``d == 0`` it
    scales ``kappa0^2``, so that sweeps over the whole detuning axis stay
    defined with a positive pump.  At ``|d| == 1/2`` the bound, and the
    pump, are zero.
    """
    d = np.asarray(d, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        bound = np.abs((d**2 - 0.25) / np.abs(d))
        scale = np.where(d == 0, 1.0, bound)
        out = np.where(y == 0, 0.0, y * scale)
    return float(out) if out.ndim == 0 else out


def normalize(p: PhysicalParams) -> NormalizedParams:
    w0_sq = p.w0_sq
    if p.delta != 0 and abs(p.d) > 0.5:
        y = w0_sq / omega0_max(1.0, p.d)
    else:
        y = math.nan
    return NormalizedParams(d=p.d, w0=math.sqrt(w0_sq), y=y)


def resolve_params(
    *,
    m: float = 1.0,
    omega_p: float = 1.0,
    kappa0: float = 1.0,
    delta: float | None = None,
    eta: float | None = None,
    W_in: float | None = None,
    d: float | None = None,
    y: float | None = None,
) -> PhysicalParams:
    """Combine a dimensional ``(W_in, eta)`` pump and/or a normalized ``(d, y)`` pump.

    When both are given they must describe the same pump and detuning to a
    relative tolerance of ``1e-6``.
    """
    if delta is None and d is None:
        raise ConfigError("detuning missing: give delta or d")
    if delta is not None and d is not None:
        if not math.isclose(delta, d * kappa0, rel_tol=CONSISTENCY_RTOL, abs_tol=1e-300):
            raise ConfigError(f"delta={delta} inconsistent with d*kappa0={d * kappa0}")
    if delta is None:
        delta = d * kappa0
    have_si = W_in is not None and eta is not None
    if not have_si and y is None:
        raise ConfigError("pump missing: give (W_in, eta) or y")
    if have_si:
        p = PhysicalParams(m=m, omega_p=omega_p, kappa0=kappa0, delta=delta, eta=eta, W_in=W_in)
        if y is not None:
            expected = pump_from_fraction(delta / kappa0, y) * kappa0**2
            if not math.isclose(p.Omega0_sq, expected, rel_tol=CONSISTENCY_RTOL):
                raise ConfigError(
                    f"pump from (W_in, eta) gives Omega0^2={p.Omega0_sq:.9g}, "
                    f"but y={y} requires {expected:.9g}"
                )
        return p
    return PhysicalParams.from_normalized(
        delta / kappa0, y=y, kappa0=kappa0, m=m, omega_p=omega_p, eta=eta if eta else 1.0
    )


def steady_state(p: PhysicalParams, A_in: float) -> SteadyState:
    psi = p.kappa0 / 2.0 - 1j * p.delta
    A = math.sqrt(p.kappa0) * A_in / psi
    A_out = A_in * psi.conjugate() / psi
    return SteadyState(A=A, A_in=float(A_in), A_out=A_out)


def _kernel(d, w):
    """Normalized kernel (``kappa0 = 1``); ``w`` may be an array."""
    w = np.asarray(w, dtype=float)
    psi = 0.5 - 1j * d
    psi_c = np.conj(psi)
    Psi = 0.5 - 1j * (d + w)
    Psi_c = np.conj(Psi)
    Psi_m = 0.5 - 1j * (d - w)
    Psi_m_c = np.conj(Psi_m)
    g_plus = 0.25 * (1 / psi + 1 / psi_c)
    g_minus = 0.25 / 1j * (1 / psi - 1 / psi_c)
    j_plus = 0.25 * (1 / Psi + 1 / Psi_m_c)
    j_minus = 0.25 / 1j * (1 / Psi - 1 / Psi_m_c)
    r1 = psi * Psi_c / (psi_c * Psi)
    r2 = psi_c * Psi_m / (psi * Psi_m_c)
    beta_plus = 0.5 * (r1 + r2)
    beta_minus = (r1 - r2) / 2j
    return dict(
        psi=psi, psi_conj=psi_c, Psi=Psi, Psi_conj=Psi_c, Psi_minus=Psi_m,
        Psi_minus_conj=Psi_m_c, g_plus=g_plus, g_minus=g_minus, j_plus=j_plus,
        j_minus=j_minus, beta_plus=beta_plus, beta_minus=beta_minus,
    )


def response_kernel(p: PhysicalParams, Omega) -> ResponseKernel:
    k = _kernel(p.d, np.asarray(Omega, dtype=float) / p.kappa0)
    for name in ("psi", "psi_conj", "Psi", "Psi_conj", "Psi_minus", "Psi_minus_conj"):
        k[name] = k[name] * p.kappa0
    return ResponseKernel(Omega=np.asarray(Omega, dtype=float), **k)
