"""Tabulated datasets behind the standard plots.

Each builder returns a list of panels.  A panel is a dict with a ``name``,
the parameters used, a header ``comment`` and ordered ``columns``; the
first column is always ``Omega_over_kappa0``.  Everything is in normalized
units (``kappa0 = m = hbar = 1``); susceptibilities are in ``1/(m kappa0^2)``.
"""

from __future__ import annotations

import math

import numpy as np

from .detection import sensitivity
from .params import PhysicalParams
from .rigidity import susceptibility

__all__ = ["FIGURES", "build_figure", "D_STABLE", "D_WIDE"]

D_STABLE = -0.55
D_WIDE = (0.1 - math.sqrt(3.0)) / 2.0

_PANELS = (("top", D_STABLE), ("bottom", D_WIDE))


def _grid(lo, hi, n):
    return np.geomspace(lo, hi, n)


def _fig2(y_values=(0.1, 0.3, 0.5, 0.9), points=4000):
    w = _grid(1e-2, 2.0, points)
    panels = []
    for name, d in _PANELS:
        cols = {"Omega_over_kappa0": w}
        for y in y_values:
            p = PhysicalParams.from_normalized(d, y=y)
            cols[f"chi_abs_y={y:g}"] = np.abs(susceptibility(p, w))
            cols[f"chi_m_abs_y={y:g}"] = np.abs(susceptibility(p, w, exact=False))
        panels.append(dict(name=name, d=d, y_values=list(y_values),
                           comment="|chi| exact and two-term approximation [1/(m kappa0^2)]",
                           columns=cols))
    return panels


def _fig4(y_values=(0.5, 0.7, 0.9), points=4000):
    w = _grid(1e-2, 2.0, points)
    panels = []
    for name, d in _PANELS:
        cols = {"Omega_over_kappa0": w}
        for y in y_values:
            p = PhysicalParams.from_normalized(d, y=y)
            cols[f"S_f_y={y:g}"] = sensitivity(p, w, 0.0).S_f
        panels.append(dict(name=name, d=d, y_values=list(y_values), theta=0.0,
                           comment="amplitude detection, S_f relative to the free-mass SQL [1]",
                           columns=cols))
    return panels


def _fig5(y=0.9, d=D_STABLE, points=4000):
    w = _grid(1e-2, 2.0, points)
    p = PhysicalParams.from_normalized(d, y=y)
    s = sensitivity(p, w, 0.0)
    cols = {"Omega_over_kappa0": w, "S_f": s.S_f, "S_a": s.S_a, "S_p": s.S_p,
            "chi_abs": np.abs(susceptibility(p, w))}
    return [dict(name="main", d=d, y=y, theta=0.0,
                 comment="amplitude detection split into amplitude and phase input terms [1]; "
                         "chi_abs [1/(m kappa0^2)]",
                 columns=cols)]


def _fig6(y=8.0 / 9.0, tan_theta=(0.0, 0.5, 1.0, 2.0), points=4000):
    w = _grid(1e-2, 2.0, points)
    panels = []
    for name, d in _PANELS:
        p = PhysicalParams.from_normalized(d, y=y)
        cols = {"Omega_over_kappa0": w}
        for t in tan_theta:
            cols[f"S_f_tan={t:g}"] = sensitivity(p, w, math.atan(t)).S_f
        cols["chi_abs"] = np.abs(susceptibility(p, w))
        panels.append(dict(name=name, d=d, y=y, tan_theta=list(tan_theta),
                           comment="homodyne detection, S_f relative to the free-mass SQL [1]; "
                                   "chi_abs [1/(m kappa0^2)]",
                           columns=cols))
    return panels


FIGURES = {2: _fig2, 4: _fig4, 5: _fig5, 6: _fig6}


def build_figure(n: int, **kwargs):
    if n not in FIGURES:
        raise KeyError(n)
    return FIGURES[n](**kwargs)
