"""Optical rigidity, mechanical susceptibility and stability classification."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DomainError
from .params import PhysicalParams, pump_from_fraction

__all__ = [
    "Rigidity",
    "SeriesRigidity",
    "EffectiveOscillator",
    "StabilityVerdict",
    "StabilityMap",
    "rigidity",
    "rigidity_series",
    "susceptibility",
    "effective_oscillator",
    "characteristic_polynomial",
    "hurwitz_matrix",
    "hurwitz_minors",
    "closed_form_verdict",
    "is_stable",
    "stability_map",
    "STABLE",
    "UNSTABLE",
    "MARGINAL",
]

STABLE, UNSTABLE, MARGINAL = "stable", "unstable", "marginal"

# roots with |Re s| below this many kappa0 are marginal
ROOT_BAND = 1e-9
# relative size under which a Hurwitz quantity counts as zero
RH_RTOL = 1e-10
# relative size under which a closed-form inequality counts as an equality
CLOSED_FORM_RTOL = 1e-12

SQRT3_HALF = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class Rigidity:
    Omega: np.ndarray
    K: np.ndarray


@dataclass(frozen=True)
class SeriesRigidity:
    """Two-term expansion ``K_m = k0 + k1 * (-i Omega)``."""

    k0: float
    k1: float

    def __call__(self, Omega):
        return self.k0 + self.k1 * (-1j * np.asarray(Omega, dtype=float))


@dataclass(frozen=True)
class EffectiveOscillator:
    Omega_m: float
    delta_m: float
    Q_m: float


@dataclass(frozen=True)
class StabilityVerdict:
    """Outcome of the stability analysis for one parameter set.

    ``poly`` holds the quartic coefficients in ``s = -i Omega``, highest
    power first, in SI units.  ``verdict`` is the Routh-Hurwitz result and
    ``rh_stable`` is true only when it is ``"stable"``.  ``roots`` and
    ``max_real_part`` are in rad/s.
    """

    poly: np.ndarray
    rh_stable: bool
    verdict: str
    root_verdict: str
    closed_form: str
    roots: np.ndarray
    max_real_part: float


def _rigidity_norm(d, w0_sq, w):
    w = np.asarray(w, dtype=float)
    num = d * (0.5 * (1.5 - 2j * w) - d**2)
    den = 0.5 * ((0.5 - 1j * w) ** 2 + d**2)
    return -w0_sq * num / den


def _series_norm(d, w0_sq):
    h2 = 0.25
    k0 = -w0_sq * d * (3 * h2 - d**2) / (0.5 * (h2 + d**2))
    # sign fixed by dK/d(-i Omega) at Omega = 0; equals 2 m delta_m
    k1 = w0_sq * 4 * d * (h2 - d**2) / (h2 + d**2) ** 2
    return k0, k1


def rigidity(p: PhysicalParams, Omega) -> Rigidity:
    """Optical rigidity ``K(Omega)`` [N/m]; the light force is ``-K x``."""
    Omega = np.asarray(Omega, dtype=float)
    K = p.m * p.kappa0**2 * _rigidity_norm(p.d, p.w0_sq, Omega / p.kappa0)
    return Rigidity(Omega=Omega, K=K)


def rigidity_series(p: PhysicalParams) -> SeriesRigidity:
    k0, k1 = _series_norm(p.d, p.w0_sq)
    return SeriesRigidity(k0=p.m * p.kappa0**2 * k0, k1=p.m * p.kappa0 * k1)


def susceptibility(p: PhysicalParams, Omega, exact: bool = True):
    """Mechanical susceptibility ``1/(K - m Omega^2)`` [s^2/kg].

    With ``exact=False`` the two-term series rigidity is used instead.  An
    exact pole evaluates to complex infinity.
    """
    Omega = np.asarray(Omega, dtype=float)
    K = rigidity(p, Omega).K if exact else rigidity_series(p)(Omega)
    den = K - p.m * Omega**2
    with np.errstate(divide="ignore", invalid="ignore"):
        chi = np.where(den == 0, complex(np.inf, 0), 1.0 / np.where(den == 0, 1.0, den))
    return chi if chi.ndim else complex(chi)


def effective_oscillator(p: PhysicalParams) -> EffectiveOscillator:
    """Eigenfrequency, relaxation rate and quality factor from the series rigidity."""
    if p.delta >= 0:
        raise DomainError("effective oscillator requires negative detuning")
    h = p.kappa0 / 2.0
    ad = abs(p.delta)
    Om_sq = p.Omega0_sq * ad * (3 * h**2 - p.delta**2) / (h * (h**2 + p.delta**2))
    delta_m = 2 * p.Omega0_sq * ad * (p.delta**2 - h**2) / (h**2 + p.delta**2) ** 2
    Omega_m = math.sqrt(Om_sq) if Om_sq >= 0 else math.nan
    if delta_m == 0:
        Q_m = math.inf if Omega_m > 0 else math.nan
    else:
        Q_m = Omega_m / (2 * delta_m)
    return EffectiveOscillator(Omega_m=Omega_m, delta_m=delta_m, Q_m=Q_m)


def _poly_norm(d, w0_sq):
    """Normalized characteristic polynomial (``m = kappa0 = 1``), ascending powers."""
    h = 0.5
    s = Polynomial([0.0, 1.0])
    cavity = h * ((h + s) ** 2 + d**2)
    numerator = -w0_sq * d * (h * (3 * h + 2 * s) - d**2)
    return s**2 * cavity + numerator


def characteristic_polynomial(p: PhysicalParams) -> np.ndarray:
    """Quartic whose zeros are the poles of the susceptibility, in ``s = -i Omega``.

    Obtained by clearing the rigidity denominator from ``K(s) + m s^2``.
    Coefficients are returned highest power first, with leading coefficient
    ``m kappa0 / 2``.
    """
    h = p.kappa0 / 2.0
    s = Polynomial([0.0, 1.0])
    cavity = h * ((h + s) ** 2 + p.delta**2)
    numerator = -p.m * p.Omega0_sq * p.delta * (h * (3 * h + 2 * s) - p.delta**2)
    P = p.m * s**2 * cavity + numerator
    coef = np.zeros(5)
    coef[: len(P.coef)] = P.coef
    return coef[::-1]


def hurwitz_matrix(coeffs) -> np.ndarray:
    """Hurwitz matrix of a polynomial given highest power first."""
    a = np.asarray(coeffs, dtype=float)
    n = len(a) - 1
    H = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            k = 2 * (j + 1) - (i + 1)
            if 0 <= k <= n:
                H[i, j] = a[k]
    return H


def hurwitz_minors(coeffs) -> np.ndarray:
    H = hurwitz_matrix(coeffs)
    return np.array([np.linalg.det(H[:k, :k]) for k in range(1, H.shape[0] + 1)])


def _rh_verdict(a4, a3, a2, a1, a0):
    """Vectorized Routh-Hurwitz verdict for quartics with ``a4 > 0``."""
    a4, a3, a2, a1, a0 = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (a4, a3, a2, a1, a0)))
    coef_scale = np.max(np.abs(np.stack([a4, a3, a2, a1, a0])), axis=0)
    d2 = a3 * a2 - a4 * a1
    d2_scale = np.abs(a3 * a2) + np.abs(a4 * a1)
    d3 = a3 * a2 * a1 - a4 * a1**2 - a3**2 * a0
    d3_scale = np.abs(a3 * a2 * a1) + np.abs(a4 * a1**2) + np.abs(a3**2 * a0)
    quantities = [
        (a3, coef_scale), (a2, coef_scale), (a1, coef_scale), (a0, coef_scale),
        (d2, d2_scale), (d3, d3_scale),
    ]
    negative = np.zeros(a4.shape, dtype=bool)
    zero = np.zeros(a4.shape, dtype=bool)
    for q, scale in quantities:
        tol = RH_RTOL * scale
        zero |= np.abs(q) <= tol
        negative |= q < -tol
    return np.where(negative, UNSTABLE, np.where(zero, MARGINAL, STABLE))


def _root_verdict(max_re):
    max_re = np.asarray(max_re)
    return np.where(max_re < -ROOT_BAND, STABLE, np.where(max_re > ROOT_BAND, UNSTABLE, MARGINAL))


def _closed_form_norm(d, w0_sq):
    d, w0_sq = np.broadcast_arrays(np.asarray(d, dtype=float), np.asarray(w0_sq, dtype=float))
    tol = CLOSED_FORM_RTOL
    ad = np.abs(d)
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = np.where(d == 0, 0.0, (d**2 - 0.25) / np.where(d == 0, 1.0, ad))
    # each condition as (margin, scale): satisfied when margin > 0
    conditions = [
        (-d, 1.0),
        (ad - 0.5, 0.5),
        (SQRT3_HALF - ad, SQRT3_HALF),
        (w0_sq, np.maximum(np.abs(bound), 1e-300)),
        (bound - w0_sq, np.maximum(np.abs(bound), np.abs(w0_sq))),
    ]
    violated = np.zeros(d.shape, dtype=bool)
    equal = np.zeros(d.shape, dtype=bool)
    for margin, scale in conditions:
        t = tol * scale
        violated |= margin < -t
        equal |= np.abs(margin) <= t
    # no rigidity at all: free mass
    free = (np.abs(d) <= tol) | (w0_sq == 0)
    out = np.where(violated, UNSTABLE, np.where(equal, MARGINAL, STABLE))
    return np.where(free, MARGINAL, out)


def closed_form_verdict(p: PhysicalParams) -> str:
    """Verdict from the explicit detuning window and pump bound."""
    return str(_closed_form_norm(p.d, p.w0_sq))


def _companion_roots(coeffs):
    """Roots of many quartics at once; ``coeffs`` has shape (N, 5), highest first."""
    coeffs = np.asarray(coeffs, dtype=float)
    b = coeffs[:, 1:] / coeffs[:, :1]
    n = b.shape[0]
    C = np.zeros((n, 4, 4))
    C[:, 0, :] = -b
    C[:, 1, 0] = C[:, 2, 1] = C[:, 3, 2] = 1.0
    return np.linalg.eigvals(C)


def is_stable(p: PhysicalParams) -> StabilityVerdict:
    a = _poly_norm(p.d, p.w0_sq).coef
    a = np.pad(a, (0, 5 - len(a)))[::-1]
    roots = _companion_roots(a[None, :])[0]
    max_re = float(np.max(roots.real))
    verdict = str(_rh_verdict(*a))
    return StabilityVerdict(
        poly=characteristic_polynomial(p),
        rh_stable=verdict == STABLE,
        verdict=verdict,
        root_verdict=str(_root_verdict(max_re)),
        closed_form=closed_form_verdict(p),
        roots=np.sort_complex(roots) * p.kappa0,
        max_real_part=max_re * p.kappa0,
    )


@dataclass
class StabilityMap:
    """Verdicts on a ``(d, y)`` grid; arrays are indexed ``[i_y, i_d]``.

    ``max_real_part`` is in units of ``kappa0``.
    """

    d_values: np.ndarray
    y_values: np.ndarray
    verdict: np.ndarray
    root_verdict: np.ndarray
    closed_form: np.ndarray
    max_real_part: np.ndarray

    def rows(self):
        for iy, y in enumerate(self.y_values):
            for idx, d in enumerate(self.d_values):
                yield (float(d), float(y), str(self.verdict[iy, idx]),
                       float(self.max_real_part[iy, idx]),
                       str(self.root_verdict[iy, idx]), str(self.closed_form[iy, idx]))

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            fh.write("# d = delta/kappa0, y = Omega0^2/Omega0max^2, max_real_part in kappa0\n")
            writer = csv.writer(fh)
            writer.writerow(["d", "y", "verdict", "max_real_part", "root_verdict", "closed_form"])
            for row in self.rows():
                writer.writerow([repr(row[0]), repr(row[1]), row[2], repr(row[3]), row[4], row[5]])
        return path

    def to_json(self, path):
        path = Path(path)
        cells = [dict(zip(("d", "y", "verdict", "max_real_part", "root_verdict", "closed_form"), row))
                 for row in self.rows()]
        path.write_text(json.dumps({
            "d_values": self.d_values.tolist(),
            "y_values": self.y_values.tolist(),
            "cells": cells,
        }, indent=1))
        return path

    def counts(self):
        values, n = np.unique(self.verdict, return_counts=True)
        return dict(zip(values.tolist(), n.tolist()))


def _poly_basis():
    """Split the normalized quartic as ``B0 + d^2 B1 + (w0_sq d) B2 + (w0_sq d^3) B3``."""
    h = 0.5
    s = Polynomial([0.0, 1.0])
    basis = [h * s**2 * (h + s) ** 2, h * s**2, -(h * (3 * h + 2 * s)), Polynomial([1.0])]
    out = np.zeros((4, 5))
    for i, b in enumerate(basis):
        out[i, : len(b.coef)] = b.coef
    return out[:, ::-1]


_BASIS = _poly_basis()


def _map_chunk(d, y):
    w0_sq = pump_from_fraction(d, y)
    weights = np.stack([np.ones_like(d), d**2, w0_sq * d, w0_sq * d**3], axis=1)
    polys = weights @ _BASIS
    roots = _companion_roots(polys)
    max_re = roots.real.max(axis=1)
    return (_rh_verdict(*polys.T), _root_verdict(max_re),
            _closed_form_norm(d, w0_sq), max_re)


def stability_map(d_values, y_values, workers: int = 1) -> StabilityMap:
    """Classify every cell of a detuning/pump-fraction grid.

    All three verdicts (Routh-Hurwitz, root locations, closed form) are
    recorded.  ``workers > 1`` evaluates row blocks concurrently.
    """
    d_values = np.asarray(d_values, dtype=float)
    y_values = np.asarray(y_values, dtype=float)
    if d_values.size < 1 or y_values.size < 1:
        raise DomainError("grid axes must be non-empty")
    D, Y = np.meshgrid(d_values, y_values)
    flat_d, flat_y = D.ravel(), Y.ravel()
    if workers > 1:
        chunks = np.array_split(np.arange(flat_d.size), workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda idx: _map_chunk(flat_d[idx], flat_y[idx]), chunks))
        results = [np.concatenate([part[k] for part in parts]) for k in range(4)]
    else:
        results = _map_chunk(flat_d, flat_y)
    shape = D.shape
    rh, root, closed, max_re = (np.asarray(r).reshape(shape) for r in results)
    return StabilityMap(d_values, y_values, rh, root, closed, max_re)
