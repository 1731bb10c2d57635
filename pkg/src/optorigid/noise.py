"""Fluctuating light force, displacement spectrum and effective occupation.

Spectral densities are double sided and symmetrized, with unit white
spectra for the input amplitude and phase quadratures, so that variances
are ``integral S(Omega) dOmega / 2pi`` over the whole real line.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError
from .params import HBAR, PhysicalParams, _kernel, input_amplitude
from .rigidity import STABLE, _rigidity_norm, _poly_norm, effective_oscillator, is_stable

__all__ = [
    "ForceTransfer",
    "SpectrumSeries",
    "force_transfer",
    "s_ffl",
    "displacement_spectrum",
    "n_eff",
    "NEffResult",
]

DEFAULT_CUTOFF = 1e3  # in kappa0
QUAD_RTOL = 1e-4


@dataclass(frozen=True)
class ForceTransfer:
    """``F_fl = c_a a_a + c_p a_p`` in terms of the input quadratures [N sqrt(s)]."""

    Omega: np.ndarray
    c_a: np.ndarray
    c_p: np.ndarray


@dataclass
class SpectrumSeries:
    """Sampled spectrum; ``kappa0`` sets the normalized abscissa on export."""

    Omega: np.ndarray
    values: np.ndarray
    quantity: str
    units: str
    kappa0: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.Omega = np.asarray(self.Omega, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.Omega.shape != self.values.shape:
            raise ValueError("Omega and values must have the same shape")
        if np.any(np.diff(self.Omega) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError("spectral values must be non-negative")

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            fh.write(f"# {self.quantity} [{self.units}] vs Omega/kappa0, kappa0={self.kappa0!r} rad/s\n")
            writer = csv.writer(fh)
            writer.writerow(["Omega_over_kappa0", "value"])
            for w, v in zip(self.Omega / self.kappa0, self.values):
                writer.writerow([repr(float(w)), repr(float(v))])
        return path

    def to_json(self, path):
        path = Path(path)
        path.write_text(json.dumps({
            "quantity": self.quantity,
            "units": self.units,
            "kappa0": self.kappa0,
            "Omega_over_kappa0": (self.Omega / self.kappa0).tolist(),
            "value": self.values.tolist(),
            "meta": self.meta,
        }, indent=1))
        return path


def _pump_factor(d):
    # (|psi| / (kappa0/2))^2 in normalized units
    return 1.0 + 4.0 * d**2


def _sff_norm(d, w0_sq, w):
    k = _kernel(d, w)
    return 2.0 * w0_sq * _pump_factor(d) * (
        np.abs(k["g_minus"] + k["j_minus"]) ** 2 + np.abs(k["g_plus"] - k["j_plus"]) ** 2
    )


def _sx_norm(d, w0_sq, w):
    w = np.asarray(w, dtype=float)
    den = np.abs(_rigidity_norm(d, w0_sq, w) - w**2) ** 2
    return _sff_norm(d, w0_sq, w) / den


def force_transfer(p: PhysicalParams, Omega, hbar=HBAR) -> ForceTransfer:
    Omega = np.asarray(Omega, dtype=float)
    k = _kernel(p.d, Omega / p.kappa0)
    scale = math.sqrt(2.0) * hbar * input_amplitude(p, hbar) * p.eta
    c_a = -scale * (k["g_minus"] + k["j_minus"])
    c_p = scale * (k["g_plus"] - k["j_plus"])
    return ForceTransfer(Omega=Omega, c_a=c_a, c_p=c_p)


def s_ffl(p: PhysicalParams, Omega, hbar=HBAR):
    """Spectral density of the fluctuating light force [N^2 s]."""
    Omega = np.asarray(Omega, dtype=float)
    out = hbar * p.m * p.kappa0**2 * _sff_norm(p.d, p.w0_sq, Omega / p.kappa0)
    return out if out.ndim else float(out)


def displacement_spectrum(p: PhysicalParams, Omega, hbar=HBAR):
    """Spectral density of the displacement driven by the light noise [m^2 s].

    The rigidity keeps the response finite at ``Omega = 0`` unless the
    static rigidity vanishes, which is a :class:`DomainError`.
    """
    Omega = np.asarray(Omega, dtype=float)
    w = Omega / p.kappa0
    if np.any(w == 0) and _rigidity_norm(p.d, p.w0_sq, 0.0) == 0:
        raise DomainError("free-mass pole at Omega = 0")
    out = hbar / (p.m * p.kappa0**2) * _sx_norm(p.d, p.w0_sq, w)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class NEffResult:
    n_eff: float
    x_variance: float
    Omega_m: float
    cutoff: float
    cutoff_change: float


def _breakpoints(d, w0_sq, cutoff):
    roots = _poly_norm(d, w0_sq).roots()
    pts = {0.0, cutoff}
    for r in roots:
        centre, width = abs(r.imag), max(abs(r.real), 1e-12)
        for offset in (-20, -5, -1, 0, 1, 5, 20):
            pts.add(centre + offset * width)
    for decade in (1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0):
        pts.add(decade)
    return np.array(sorted(x for x in pts if 0.0 <= x <= cutoff))


def _variance_norm(d, w0_sq, cutoff):
    edges = _breakpoints(d, w0_sq, cutoff)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, err = integrate.quad(lambda w: _sx_norm(d, w0_sq, w), a, b,
                                  epsabs=0.0, epsrel=QUAD_RTOL * 1e-2, limit=200)
        total += val
    # even integrand: integral over the real line divided by 2 pi
    return total / math.pi


def n_eff(p: PhysicalParams, cutoff: float = DEFAULT_CUTOFF, hbar=HBAR, full_output: bool = False):
    """Mean occupation ``m Omega_m^2 <x^2> / (hbar Omega_m)`` of the optically made oscillator.

    ``<x^2>`` integrates the displacement spectrum up to ``cutoff * kappa0``;
    the integral is repeated with the cutoff doubled and a change above the
    quadrature target raises :class:`ConvergenceError`.
    """
    verdict = is_stable(p)
    if verdict.verdict != STABLE:
        raise DomainError(f"n_eff needs a stable configuration (got {verdict.verdict})")
    var = _variance_norm(p.d, p.w0_sq, cutoff)
    var2 = _variance_norm(p.d, p.w0_sq, 2 * cutoff)
    change = abs(var2 - var) / var
    if change > QUAD_RTOL:
        raise ConvergenceError(f"cutoff doubling changed <x^2> by {change:.2e}")
    Omega_m = effective_oscillator(p).Omega_m / p.kappa0
    n = Omega_m * var
    if not full_output:
        return n
    return NEffResult(
        n_eff=n,
        x_variance=var * hbar / (p.m * p.kappa0),
        Omega_m=Omega_m * p.kappa0,
        cutoff=cutoff,
        cutoff_change=change,
    )
