"""Flat ``key = value`` run configuration.

One key per line, ``#`` starts a comment, lists are comma separated.  A
provenance sidecar (JSON with a ``"config"`` object) is accepted in place
of a text file, so every run can be replayed from its own record.  Values
given on the command line override those read from a file.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .errors import ConfigError
from .params import PhysicalParams, resolve_params

__all__ = ["SCHEMA", "PHYSICAL_KEYS", "NORMALIZED_KEYS", "MSI_KEYS", "parse_value", "load_config",
           "merge", "parameter_style", "build_params", "msi_params", "grid_values"]


def _float_list(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    parts = [t for t in str(text).replace(";", ",").split(",") if t.strip()]
    return [float(t) for t in parts]


def _bool(text):
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _choice(*options):
    def conv(text):
        if text not in options:
            raise ValueError(f"expected one of {options}, got {text!r}")
        return text
    return conv


# key -> (converter, help)
SCHEMA = {
    # physical parameter block [SI]
    "m": (float, "test mass [kg]"),
    "omega_p": (float, "pump angular frequency [rad/s]"),
    "kappa0": (float, "cavity linewidth [rad/s]; also the unit of normalized frequencies"),
    "delta": (float, "detuning [rad/s]"),
    "eta": (float, "dissipative coupling constant [1/m]"),
    "W_in": (float, "input power [W]"),
    # normalized parameter block
    "d": (float, "detuning in units of kappa0"),
    "y": (float, "pump as a fraction of the largest stable pump"),
    # interferometer block
    "T0_sq": (float, "target power transmittance of the generalized mirror"),
    "R_sq": (float, "power reflectivity of the movable mirror"),
    "k": (float, "optical wave vector [1/m]"),
    "wavelength": (float, "optical wavelength [m] (alternative to k)"),
    "L": (float, "beam splitter to mirror distance [m]"),
    "delta_sign": (int, "sign of R_bs^2 - T_bs^2 (-1 or 1)"),
    "eta_model": (_choice("simplified", "full"), "coupling used for the dynamics in 'report'"),
    # sweeps and grids
    "d_min": (float, "stability map: smallest d"),
    "d_max": (float, "stability map: largest d"),
    "d_points": (int, "stability map: number of d values"),
    "y_min": (float, "stability map: smallest y"),
    "y_max": (float, "stability map: largest y"),
    "y_points": (int, "stability map: number of y values"),
    "d_values": (_float_list, "explicit list of d values"),
    "y_values": (_float_list, "explicit list of y values"),
    "tan_theta": (_float_list, "homodyne angles as tan(theta)"),
    "theta": (float, "homodyne angle [rad]"),
    "omega_min": (float, "frequency grid start [kappa0]"),
    "omega_max": (float, "frequency grid end [kappa0]"),
    "points": (int, "frequency grid size"),
    "scale": (_choice("log", "linear"), "frequency grid spacing"),
    "exact": (_bool, "use the exact rigidity (false: two-term series)"),
    "cutoff": (float, "n_eff integration cutoff [kappa0]"),
    "figure": (int, "figure number for reproduce-figure"),
    # time-domain oracle
    "seed": (int, "random seed"),
    "dt": (float, "time step [1/kappa0]"),
    "duration": (float, "simulated time [1/kappa0]"),
    "ensemble": (int, "number of trajectories"),
    "record_stride": (int, "keep every n-th sample"),
    "workers": (int, "parallel workers"),
    # output
    "out": (str, "output directory"),
    "prefix": (str, "output file name prefix"),
}

PHYSICAL_KEYS = ("m", "omega_p", "delta", "eta", "W_in")
NORMALIZED_KEYS = ("d", "y")
MSI_KEYS = ("T0_sq", "R_sq")


def parse_value(key: str, value):
    if key not in SCHEMA:
        raise ConfigError(f"unknown config key {key!r}")
    conv = SCHEMA[key][0]
    try:
        out = conv(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {value!r} ({exc})") from None
    if isinstance(out, float) and not math.isfinite(out):
        raise ConfigError(f"bad value for {key!r}: must be finite")
    return out


def load_config(path) -> dict:
    """Read a flat config file or a provenance sidecar; unknown keys are errors."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {path}: {exc}") from None
        raw = doc.get("config", doc)
        if not isinstance(raw, dict):
            raise ConfigError(f"'config' in {path} must be an object")
        return {k: parse_value(k, v) for k, v in raw.items()}
    cfg = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        cfg[key] = parse_value(key, value)
    return cfg


def merge(file_cfg: dict, overrides: dict) -> dict:
    """Command-line values win over file values."""
    out = dict(file_cfg)
    out.update({k: v for k, v in overrides.items() if v is not None})
    return out


def parameter_style(cfg: dict) -> str:
    """``"physical"``, ``"normalized"`` or ``"msi"``; mixing the first two is an error."""
    if any(k in cfg for k in MSI_KEYS):
        return "msi"
    phys = [k for k in PHYSICAL_KEYS if k in cfg]
    norm = [k for k in NORMALIZED_KEYS if k in cfg]
    if phys and norm:
        raise ConfigError(
            f"mixed parameter styles: physical keys {phys} with normalized keys {norm}; give one style"
        )
    if phys:
        return "physical"
    if norm:
        return "normalized"
    raise ConfigError("no parameters given: need a physical block or 'd' and 'y'")


def _require(cfg, keys, style):
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ConfigError(f"{style} parameter block is missing key(s) {missing}")


def build_params(cfg: dict) -> PhysicalParams:
    """Model parameters from the physical or normalized block of ``cfg``."""
    style = parameter_style(cfg)
    if style == "msi":
        return msi_params(cfg)[0]
    if style == "physical":
        _require(cfg, ("m", "omega_p", "kappa0", "delta", "eta", "W_in"), "physical")
        return resolve_params(m=cfg["m"], omega_p=cfg["omega_p"], kappa0=cfg["kappa0"],
                              delta=cfg["delta"], eta=cfg["eta"], W_in=cfg["W_in"])
    _require(cfg, ("d", "y"), "normalized")
    return resolve_params(d=cfg["d"], y=cfg["y"], kappa0=cfg.get("kappa0", 1.0))


def msi_params(cfg: dict):
    """Model parameters realized by an interferometer design.

    Needs ``m``, ``W_in``, ``T0_sq``, ``R_sq``, ``d`` and ``k`` (or
    ``wavelength``).  The linewidth comes from exactly one of ``L`` (round
    trip time) or ``y`` (pump fraction).  ``eta_model`` picks the coupling
    used for the dynamics: ``simplified`` (``4k/|TT0|``, the default) or
    ``full`` (``4k R |RR0| / |TT0|``).

    Returns ``(params, design, pump_estimates)``.
    """
    from .msi import design_gm, pump_estimates
    from .params import SPEED_OF_LIGHT, pump_from_fraction

    _require(cfg, ("m", "W_in", "T0_sq", "R_sq", "d"), "interferometer")
    if ("k" in cfg) == ("wavelength" in cfg):
        raise ConfigError("give exactly one of 'k' or 'wavelength'")
    if ("L" in cfg) == ("y" in cfg):
        raise ConfigError("give exactly one of 'L' or 'y' to fix the linewidth")
    for key in PHYSICAL_KEYS:
        if key not in ("m", "W_in") and key in cfg:
            raise ConfigError(f"key {key!r} conflicts with the interferometer block")
    k = cfg["k"] if "k" in cfg else 2.0 * math.pi / cfg["wavelength"]
    design = design_gm(cfg["T0_sq"], cfg["R_sq"], k=k, L=cfg.get("L", 1.0),
                       delta_sign=cfg.get("delta_sign", -1))
    est = pump_estimates(design, cfg["W_in"], cfg["m"])
    model = cfg.get("eta_model", "simplified")
    eta = 4.0 * k / abs(design.TT0) if model == "simplified" else design.eta
    Omega0 = est[model]
    if "L" in cfg:
        kappa0 = design.kappa0
    else:
        frac = pump_from_fraction(cfg["d"], cfg["y"])
        if not (frac > 0 and Omega0 > 0):
            raise ConfigError("'y' cannot fix the linewidth when the pump or the fraction is zero")
        kappa0 = Omega0 / math.sqrt(frac)
    p = PhysicalParams(m=cfg["m"], omega_p=k * SPEED_OF_LIGHT, kappa0=kappa0,
                       delta=cfg["d"] * kappa0, eta=eta, W_in=cfg["W_in"])
    return p, design, est


def grid_values(cfg: dict, axis: str, lo: float, hi: float, n: int):
    """Explicit ``<axis>_values`` or a linear grid from ``<axis>_min/_max/_points``."""
    import numpy as np

    if f"{axis}_values" in cfg:
        vals = np.asarray(cfg[f"{axis}_values"], dtype=float)
        if vals.size == 0:
            raise ConfigError(f"{axis}_values must not be empty")
        return vals
    n = cfg.get(f"{axis}_points", n)
    if n < 1:
        raise ConfigError(f"{axis}_points must be >= 1")
    return np.linspace(cfg.get(f"{axis}_min", lo), cfg.get(f"{axis}_max", hi), n)
