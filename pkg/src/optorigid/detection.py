"""Output-field quadratures and force sensitivity relative to the free-mass SQL.

A signal force ``F_s`` is read out from the output light.  With the output
amplitude and phase quadratures written as

    b_a = E_aa a_a + E_ap a_p + Phi_a F_s / sqrt(2 hbar m Omega^2)
    b_p = E_pa a_a + E_pp a_p + Phi_p F_s / sqrt(2 hbar m Omega^2)

a homodyne measurement of ``b_a cos(theta) + b_p sin(theta)`` has a noise
spectrum, normalized to the free-mass standard quantum limit, of

    S_f = (|E_aa c + E_pa s|^2 + |E_ap c + E_pp s|^2) / |Phi_a c + Phi_p s|^2.

``S_f < 1`` means the sensitivity beats the free-mass limit.  The transfer
coefficients are dimensionless and depend only on ``d``, ``Omega0/kappa0``
and ``Omega/kappa0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import DomainError
from .params import PhysicalParams, _kernel
from .rigidity import _rigidity_norm

__all__ = [
    "QuadratureTransfer",
    "SensitivityPoint",
    "SqlMetrics",
    "output_transfer",
    "direct_assembly",
    "bogoliubov_coefficients",
    "sensitivity",
    "sql_metrics",
    "homodyne_sweep",
]

MIN_GRID_POINTS = 256


@dataclass(frozen=True)
class QuadratureTransfer:
    Omega: np.ndarray
    E_aa: np.ndarray
    E_ap: np.ndarray
    E_pa: np.ndarray
    E_pp: np.ndarray
    Phi_a: np.ndarray
    Phi_p: np.ndarray
    Qfactor: np.ndarray | None = None

    def as_tuple(self):
        return (self.E_aa, self.E_ap, self.E_pa, self.E_pp, self.Phi_a, self.Phi_p)


@dataclass(frozen=True)
class SensitivityPoint:
    """Normalized force noise; ``S_a`` and ``S_p`` are the amplitude- and phase-input parts."""

    Omega: np.ndarray
    theta: float
    S_f: np.ndarray
    S_a: np.ndarray
    S_p: np.ndarray


@dataclass(frozen=True)
class SqlMetrics:
    theta: float
    Omega_min: float
    S_f_min: float
    bandwidth: float
    intervals: list = field(default_factory=list)
    grid_points: int = 0


def _check_omega(w):
    if np.any(w == 0):
        raise DomainError("sensitivity is undefined at Omega = 0")


def _transfer_norm(d, w0_sq, w):
    k = _kernel(d, w)
    F = 1.0 + 4.0 * d**2
    Q = 1.0 - _rigidity_norm(d, w0_sq, w) / w**2
    c = 2.0 * w0_sq * F / (w**2 * Q)
    gp_jp = k["g_plus"] - k["j_plus"]
    gm_jm = k["g_minus"] + k["j_minus"]
    bp, bm = k["beta_plus"], k["beta_minus"]
    root = 2.0 * np.sqrt(w0_sq * F) / np.abs(w)
    return (
        bp + c * gp_jp * gm_jm,
        -bm - c * gp_jp**2,
        bm - c * gm_jm**2,
        bp + c * gm_jm * gp_jp,
        -root * gp_jp / Q,
        root * gm_jm / Q,
    )


def output_transfer(p: PhysicalParams, Omega) -> QuadratureTransfer:
    """Closed-form quadrature transfer coefficients at ``Omega`` [rad/s]."""
    Omega = np.asarray(Omega, dtype=float)
    w = Omega / p.kappa0
    _check_omega(w)
    Qf = 1.0 - _rigidity_norm(p.d, p.w0_sq, w) / w**2
    return QuadratureTransfer(Omega, *_transfer_norm(p.d, p.w0_sq, w), Qfactor=Qf)


def _direct_norm(d, w0_sq, w):
    """Solve the linearized cavity plus mirror equations directly.

    Unknowns are ``a(Omega)``, ``a^dagger(-Omega)`` and ``x(Omega)``; the
    inputs are the two field sidebands and the signal force.  Units:
    ``kappa0 = m = hbar = eta = 1``.
    """
    w = np.atleast_1d(np.asarray(w, dtype=float))
    psi = 0.5 - 1j * d
    A_in = math.sqrt(w0_sq) * 2.0 * abs(psi)
    A = A_in / psi
    cx = -0.5 * A + 0.5 * A_in
    f = -0.5j
    n = w.size
    M = np.zeros((n, 3, 3), dtype=complex)
    M[:, 0, 0] = psi - 1j * w
    M[:, 0, 2] = -cx
    M[:, 1, 1] = np.conj(psi) - 1j * w
    M[:, 1, 2] = -np.conj(cx)
    M[:, 2, 0] = f * A_in
    M[:, 2, 1] = -f * A_in
    M[:, 2, 2] = -w**2
    B = np.zeros((n, 3, 3), dtype=complex)
    B[:, 0, 0] = 1.0
    B[:, 1, 1] = 1.0
    B[:, 2, 0] = f * np.conj(A)
    B[:, 2, 1] = -f * A
    B[:, 2, 2] = 1.0
    X = np.linalg.solve(M, B)
    a, ad, x = X[:, 0, :], X[:, 1, :], X[:, 2, :]
    cA = 0.5 * A
    eye = np.eye(3)
    a_out = -eye[0] + a + cA * x
    ad_out = -eye[1] + ad + np.conj(cA) * x
    ph = psi / np.conj(psi)
    e_a = (ph * a_out + np.conj(ph) * ad_out) / math.sqrt(2)
    e_p = (ph * a_out - np.conj(ph) * ad_out) / (1j * math.sqrt(2))
    sql = np.sqrt(2.0) * np.abs(w)

    def split(e):
        return (
            (e[:, 0] + e[:, 1]) / math.sqrt(2),
            1j * (e[:, 0] - e[:, 1]) / math.sqrt(2),
            e[:, 2] * sql,
        )

    E_aa, E_ap, Phi_a = split(e_a)
    E_pa, E_pp, Phi_p = split(e_p)
    return (E_aa, E_ap, E_pa, E_pp, Phi_a, Phi_p), (a_out[:, 0], a_out[:, 1])


def direct_assembly(p: PhysicalParams, Omega) -> QuadratureTransfer:
    """Independent numerical route to the transfer coefficients (a 3x3 solve per frequency)."""
    Omega = np.asarray(Omega, dtype=float)
    w = Omega / p.kappa0
    _check_omega(w)
    coeffs, _ = _direct_norm(p.d, p.w0_sq, w)
    if Omega.ndim == 0:
        coeffs = tuple(c[0] for c in coeffs)
    return QuadratureTransfer(Omega, *coeffs)


def bogoliubov_coefficients(p: PhysicalParams, Omega):
    """``(M11, M12)`` in ``b(Omega) = M11 a(Omega) + M12 a^dagger(-Omega) + ...``.

    For a lossless system ``|M11|^2 - |M12|^2 = 1``.
    """
    Omega = np.asarray(Omega, dtype=float)
    w = Omega / p.kappa0
    _check_omega(w)
    _, (m11, m12) = _direct_norm(p.d, p.w0_sq, w)
    if Omega.ndim == 0:
        return m11[0], m12[0]
    return m11, m12


def _sf_norm(d, w0_sq, w, theta):
    E_aa, E_ap, E_pa, E_pp, Phi_a, Phi_p = _transfer_norm(d, w0_sq, w)
    c, s = math.cos(theta), math.sin(theta)
    den = np.abs(Phi_a * c + Phi_p * s) ** 2
    num_a = np.abs(E_aa * c + E_pa * s) ** 2
    num_p = np.abs(E_ap * c + E_pp * s) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        S_a = np.where(den > 0, num_a / den, np.inf)
        S_p = np.where(den > 0, num_p / den, np.inf)
    return S_a + S_p, S_a, S_p


def sensitivity(p: PhysicalParams, Omega, theta: float = 0.0) -> SensitivityPoint:
    """Force noise normalized to the free-mass SQL for homodyne angle ``theta``.

    ``theta = 0`` reads the amplitude quadrature.  A vanishing signal
    transfer (no pump) gives ``inf`` rather than an error.
    """
    Omega = np.asarray(Omega, dtype=float)
    w = Omega / p.kappa0
    _check_omega(w)
    S_f, S_a, S_p = _sf_norm(p.d, p.w0_sq, w, theta)
    return SensitivityPoint(Omega=Omega, theta=theta, S_f=S_f, S_a=S_a, S_p=S_p)


def _crossing(f, a, b):
    return optimize.brentq(lambda lw: f(math.exp(lw)) - 1.0, math.log(a), math.log(b), xtol=1e-14)


def sql_metrics(
    p: PhysicalParams,
    theta: float = 0.0,
    omega_range: tuple[float, float] | None = None,
    points: int = 2048,
) -> SqlMetrics:
    """Locate the sensitivity minimum and the band where ``S_f < 1``.

    The search runs on a log-spaced grid over ``omega_range`` [rad/s]
    (default ``1e-3`` to ``10`` kappa0), refines the minimum with a
    golden-section search and finds band edges with Brent's method.
    Without a pump the metrics are still returned, with ``S_f_min = inf``.
    """
    if points < MIN_GRID_POINTS:
        raise ValueError(f"need at least {MIN_GRID_POINTS} grid points")
    lo, hi = omega_range if omega_range is not None else (1e-3 * p.kappa0, 10.0 * p.kappa0)
    if not (0 < lo < hi):
        raise ValueError("omega_range must satisfy 0 < lo < hi")
    d, w0_sq = p.d, p.w0_sq
    lo_n, hi_n = lo / p.kappa0, hi / p.kappa0
    grid = np.geomspace(lo_n, hi_n, points)
    S = _sf_norm(d, w0_sq, grid, theta)[0]

    def f(w):
        return float(_sf_norm(d, w0_sq, np.array([w]), theta)[0][0])

    if not np.any(np.isfinite(S)):
        return SqlMetrics(theta, math.nan, math.inf, 0.0, [], points)

    i = int(np.argmin(S))
    w_min, s_min = grid[i], S[i]
    if 0 < i < points - 1:
        res = optimize.minimize_scalar(
            lambda lw: f(math.exp(lw)),
            bracket=(math.log(grid[i - 1]), math.log(grid[i]), math.log(grid[i + 1])),
            method="golden",
            options={"xtol": 1e-10},
        )
        if res.fun < s_min and grid[i - 1] <= math.exp(res.x) <= grid[i + 1]:
            w_min, s_min = math.exp(res.x), float(res.fun)

    below = S < 1.0
    intervals = []
    j = 0
    while j < points:
        if not below[j]:
            j += 1
            continue
        k = j
        while k + 1 < points and below[k + 1]:
            k += 1
        start = grid[0] if j == 0 else _crossing(f, grid[j - 1], grid[j])
        end = grid[-1] if k == points - 1 else _crossing(f, grid[k], grid[k + 1])
        intervals.append((math.exp(start) if j else start, math.exp(end) if k < points - 1 else end))
        j = k + 1

    # a dip narrower than the grid spacing
    if s_min < 1.0 and not any(a <= w_min <= b for a, b in intervals):
        a = grid[max(i - 1, 0)]
        b = grid[min(i + 1, points - 1)]
        left = math.exp(_crossing(f, a, w_min)) if f(a) > 1 else a
        right = math.exp(_crossing(f, w_min, b)) if f(b) > 1 else b
        intervals.append((left, right))
        intervals.sort()

    k0 = p.kappa0
    intervals = [(a * k0, b * k0) for a, b in intervals]
    bandwidth = sum(b - a for a, b in intervals)
    return SqlMetrics(theta, w_min * k0, s_min, bandwidth, intervals, points)


def homodyne_sweep(p: PhysicalParams, thetas, **kwargs) -> list[SqlMetrics]:
    return [sql_metrics(p, float(t), **kwargs) for t in thetas]
