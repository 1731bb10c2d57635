"""Time-domain integration of the linearized cavity and mirror equations.

This is a validation oracle, independent of the frequency-domain formulas.
The state ``(Re a, Im a, x, v)`` obeys a linear SDE driven by the input
vacuum fluctuation, modelled classically as complex white noise
``xi = (w1 + i w2)/sqrt(2)`` with unit-intensity ``w1``, ``w2``.  Each step
uses the exact matrix exponential of the drift and the exact discretized
noise covariance, so the step size only limits the time resolution.

Internally ``kappa0 = m = hbar = 1``; lengths are in ``sqrt(hbar/(m kappa0))``.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import linalg, signal

from .errors import ConfigError
from .noise import SpectrumSeries
from .params import HBAR, PhysicalParams

__all__ = ["SimConfig", "Trajectory", "Ensemble", "simulate", "periodogram", "growth_rate",
           "drift_matrix", "MAX_STEP"]

MAX_STEP = 0.05  # dt * kappa0
DISCARD = 0.2
_DEFECTIVE_COND = 1e8


@dataclass(frozen=True)
class SimConfig:
    """Integration settings; ``dt`` and ``duration`` are in seconds.

    ``noise_scale`` multiplies the injected vacuum noise amplitude.
    """

    dt: float
    duration: float
    seed: int = 0
    ensemble: int = 1
    record_stride: int = 1
    noise_scale: float = 1.0
    workers: int = 1

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError("dt must be positive")
        if not self.duration >= self.dt:
            raise ConfigError("duration must be at least one step")
        if self.ensemble < 1:
            raise ConfigError("ensemble must be >= 1")
        if self.record_stride < 1:
            raise ConfigError("record_stride must be >= 1")

    def steps(self) -> int:
        return int(round(self.duration / self.dt))


@dataclass
class Trajectory:
    """One realization: ``x`` [m], ``v`` [m/s] and the cavity fluctuation ``a``."""

    times: np.ndarray
    x: np.ndarray
    v: np.ndarray
    a: np.ndarray

    def to_csv(self, path, kappa0: float = 1.0):
        path = Path(path)
        with path.open("w", newline="") as fh:
            fh.write("# t*kappa0 [1], x [m], v [m/s], Re a, Im a [1]\n")
            w = csv.writer(fh)
            w.writerow(["t_times_kappa0", "x", "v", "a_re", "a_im"])
            for row in zip(self.times * kappa0, self.x, self.v, self.a.real, self.a.imag):
                w.writerow([repr(float(c)) for c in row])
        return path


@dataclass
class Ensemble:
    """Independent trajectories on a common time grid (arrays are ``(ensemble, samples)``)."""

    times: np.ndarray
    x: np.ndarray
    v: np.ndarray
    a: np.ndarray
    dt: float
    kappa0: float
    seed: int

    def __len__(self):
        return self.x.shape[0]

    def __getitem__(self, i) -> Trajectory:
        return Trajectory(self.times, self.x[i], self.v[i], self.a[i])

    @property
    def sample_spacing(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else self.dt

    def stationary_variance(self, discard: float = DISCARD) -> float:
        """Ensemble and time average of ``x^2`` after dropping the first ``discard`` fraction."""
        start = int(discard * self.x.shape[1])
        return float(np.mean(self.x[:, start:] ** 2))

    def diverged(self, factor: float = 100.0) -> bool:
        """True when the late mean ``x^2`` exceeds ``factor`` times that at 20-30 % of the run."""
        n = self.x.shape[1]
        with np.errstate(over="ignore", invalid="ignore"):
            late = np.mean(self.x[:, int(0.9 * n):] ** 2)
            early = np.mean(self.x[:, int(0.2 * n):int(0.3 * n) + 1] ** 2)
        if not np.isfinite(late):
            return True
        return bool(late > factor * early) if early > 0 else bool(late > 0)


def drift_matrix(d: float, w0_sq: float):
    """Drift ``M`` and noise input ``G`` of ``dz = M z dt + G dW`` (normalized units).

    ``dW`` holds the two real components of ``xi``, each of intensity 1/2.
    """
    psi = 0.5 - 1j * d
    A_in = 2.0 * abs(psi) * math.sqrt(max(w0_sq, 0.0))
    cx = -0.5 * A_in * np.conj(psi) / psi
    A_conj = A_in / np.conj(psi)
    M = np.array([
        [-0.5, -d, cx.real, 0.0],
        [d, -0.5, cx.imag, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, -A_in, 0.0, 0.0],
    ])
    G = np.array([
        [1.0, 0.0],
        [0.0, 1.0],
        [0.0, 0.0],
        [A_conj.imag, A_conj.real],
    ])
    return M, G


def _discretize(M, G, dt, noise_scale):
    n = M.shape[0]
    Q = 0.5 * noise_scale**2 * G @ G.T
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -M
    block[:n, n:] = Q
    block[n:, n:] = M.T
    C = linalg.expm(block * dt)
    Phi = C[n:, n:].T
    Qd = Phi @ C[:n, n:]
    Qd = 0.5 * (Qd + Qd.T)
    w, U = np.linalg.eigh(Qd)
    L = U * np.sqrt(np.clip(w, 0.0, None))
    return Phi, L


def _propagate(Phi, L, noise):
    """``z[k+1] = Phi z[k] + L noise[k]`` from ``z[0] = 0``; returns ``(steps+1, 4)``."""
    steps = noise.shape[0]
    drive = noise @ L.T
    lam, V = np.linalg.eig(Phi)
    out = np.zeros((steps + 1, Phi.shape[0]))
    if np.linalg.cond(V) < _DEFECTIVE_COND:
        modal = drive @ np.linalg.inv(V).T
        u = np.empty_like(modal)
        with np.errstate(over="ignore", invalid="ignore"):
            for j, l in enumerate(lam):
                u[:, j] = signal.lfilter([1.0], [1.0, -l], modal[:, j])
            out[1:] = (u @ V.T).real
        return out
    # defective drift (e.g. a free mass): plain recursion
    z = np.zeros(Phi.shape[0])
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps):
            z = Phi @ z + drive[k]
            out[k + 1] = z
    return out


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def simulate(p: PhysicalParams, cfg: SimConfig, hbar: float = HBAR) -> Ensemble:
    """Integrate ``cfg.ensemble`` independent trajectories from the zero state.

    Trajectory ``i`` draws its noise from a Philox stream keyed by
    ``(cfg.seed, i)``, so results do not depend on ``cfg.workers``.
    """
    dt_n = cfg.dt * p.kappa0
    if dt_n > MAX_STEP * (1 + 1e-12):
        raise ConfigError(f"dt*kappa0 = {dt_n:.3g} exceeds {MAX_STEP}")
    steps = cfg.steps()
    M, G = drift_matrix(p.d, p.w0_sq)
    Phi, L = _discretize(M, G, dt_n, cfg.noise_scale)
    stride = cfg.record_stride

    def run(i):
        noise = _rng(cfg.seed, i).standard_normal((steps, 4))
        return _propagate(Phi, L, noise)[::stride]

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            states = list(pool.map(run, range(cfg.ensemble)))
    else:
        states = [run(i) for i in range(cfg.ensemble)]
    Z = np.stack(states)
    length = math.sqrt(hbar / (p.m * p.kappa0))
    times = np.arange(Z.shape[1]) * stride * cfg.dt
    return Ensemble(
        times=times,
        x=Z[:, :, 2] * length,
        v=Z[:, :, 3] * length * p.kappa0,
        a=Z[:, :, 0] + 1j * Z[:, :, 1],
        dt=cfg.dt,
        kappa0=p.kappa0,
        seed=cfg.seed,
    )


def periodogram(data, dt: float | None = None, kappa0: float = 1.0, discard: float = DISCARD,
                segments: int = 8) -> SpectrumSeries:
    """Ensemble-averaged Welch estimate of the double-sided PSD of ``x``.

    ``data`` is an :class:`Ensemble` or an array ``(trajectories, samples)``
    sampled every ``dt`` seconds.  Hann window, 50 % overlap.  The result is
    normalized so that its integral over ``dOmega / 2pi`` is the variance.
    """
    if isinstance(data, Ensemble):
        x, dt, kappa0 = data.x, data.sample_spacing, data.kappa0
    else:
        if dt is None:
            raise ValueError("dt is required for raw arrays")
        x = np.atleast_2d(np.asarray(data, dtype=float))
    x = x[:, int(discard * x.shape[1]):]
    n = x.shape[1]
    nperseg = n // max(1, (segments + 1) // 2)
    if nperseg < 16:
        raise ValueError(f"record too short for a periodogram ({n} samples)")
    f, P = signal.welch(x, fs=1.0 / dt, window="hann", nperseg=nperseg, noverlap=nperseg // 2,
                        return_onesided=False, scaling="density", detrend=False, axis=-1)
    P = np.mean(P, axis=0)
    f, P = np.fft.fftshift(f), np.fft.fftshift(P)
    return SpectrumSeries(2 * np.pi * f, P, quantity="S_x (time domain)", units="m^2 s",
                          kappa0=kappa0, meta={"discard": discard, "segments": segments})


def growth_rate(ens: Ensemble, window: tuple[float, float] = (0.5, 1.0)) -> float:
    """Exponential growth rate [1/s] from a fit of ``log(<x^2>)/2`` over ``window`` of the run."""
    n = ens.x.shape[1]
    sl = slice(int(window[0] * n), max(int(window[1] * n), int(window[0] * n) + 2))
    with np.errstate(over="ignore"):
        ms = np.mean(ens.x[:, sl] ** 2, axis=0)
    t = ens.times[sl]
    ok = np.isfinite(ms) & (ms > 0)
    if ok.sum() < 2:
        raise ValueError("not enough finite samples to fit a growth rate")
    slope = np.polyfit(t[ok], 0.5 * np.log(ms[ok]), 1)[0]
    return float(slope)
