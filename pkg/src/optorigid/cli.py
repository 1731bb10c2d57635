"""Command-line front end.

Every subcommand reads an optional flat config file (``--config``), lets
any ``--key value`` flag override it, writes its data files to the output
directory and records a provenance sidecar ``<command>.provenance.json``.
Passing that sidecar back as ``--config`` replays the run.

Exit status: 0 on success, 2 for configuration errors, 3 for numerical
failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import platform
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import (
    SCHEMA, build_params, grid_values, load_config, merge, msi_params, parameter_style, parse_value,
)
from .detection import sensitivity
from .errors import ConfigError, ConvergenceError, DomainError, NoSolutionError
from .figures import FIGURES, build_figure
from .msi import design_gm, pump_estimates
from .noise import displacement_spectrum, n_eff, s_ffl
from .oracle import SimConfig, growth_rate, periodogram, simulate
from .rigidity import UNSTABLE, effective_oscillator, is_stable, stability_map, susceptibility

OUTPUT_ENV = "OPTORIGID_OUTPUT_DIR"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

COMMANDS = ("stability-map", "susceptibility", "psd", "neff", "msi-design", "report",
            "reproduce-figure", "simulate")


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def write_table(path: Path, comment: str, columns: dict):
    """CSV with a one-line ``#`` comment; floats are written with full precision."""
    names = list(columns)
    data = [np.asarray(columns[n]) for n in names]
    with path.open("w", newline="") as fh:
        fh.write(f"# {comment}\n")
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*data):
            w.writerow([repr(float(v)) for v in row])
    return path


class Run:
    """Resolved configuration, output location and the list of files written."""

    def __init__(self, command: str, cfg: dict):
        self.command = command
        self.cfg = cfg
        out = cfg.get("out") or os.environ.get(OUTPUT_ENV) or "."
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.prefix = cfg.get("prefix", "")
        self.outputs: list[str] = []
        self.extra: dict = {}

    def path(self, name: str) -> Path:
        p = self.out / f"{self.prefix}{name}"
        self.outputs.append(p.name)
        return p

    def write_json(self, name: str, doc: dict) -> Path:
        p = self.path(name)
        p.write_text(json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n")
        return p

    def provenance(self) -> Path:
        cfg = {k: v for k, v in self.cfg.items() if k not in ("out", "prefix")}
        doc = {
            "tool": "optorigid",
            "version": __version__,
            "command": self.command,
            "config": cfg,
            "outputs": self.outputs,
            "environment": {"python": platform.python_version(), "numpy": np.__version__,
                            "scipy": scipy.__version__},
        }
        doc.update(self.extra)
        p = self.out / f"{self.prefix}{self.command}.provenance.json"
        p.write_text(json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n")
        return p


def _omega_grid(cfg, lo=1e-3, hi=10.0, n=2000):
    lo = cfg.get("omega_min", lo)
    hi = cfg.get("omega_max", hi)
    n = cfg.get("points", n)
    if n < 1:
        raise ConfigError("points must be >= 1")
    if cfg.get("scale", "log") == "log":
        if not 0 < lo <= hi:
            raise ConfigError("omega_min/omega_max must satisfy 0 < omega_min <= omega_max on a log grid")
        return np.geomspace(lo, hi, n)
    if not lo <= hi:
        raise ConfigError("omega_min must not exceed omega_max")
    return np.linspace(lo, hi, n)


def _record_params(run: Run, p):
    run.extra["resolved_params"] = asdict(p)


# subcommands -----------------------------------------------------------------

def cmd_stability_map(run: Run):
    cfg = run.cfg
    d = grid_values(cfg, "d", -2.0, 2.0, 200)
    y = grid_values(cfg, "y", 0.01, 2.0, 200)
    smap = stability_map(d, y, workers=cfg.get("workers", 1))
    smap.to_csv(run.path("stability_map.csv"))
    smap.to_json(run.path("stability_map.json"))
    counts = smap.counts()
    print("verdict counts: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))


def cmd_susceptibility(run: Run):
    p = build_params(run.cfg)
    _record_params(run, p)
    w = _omega_grid(run.cfg)
    Omega = w * p.kappa0
    chi = susceptibility(p, Omega, exact=run.cfg.get("exact", True))
    chi_m = susceptibility(p, Omega, exact=False)
    write_table(run.path("susceptibility.csv"), "chi = 1/(K - m Omega^2) [s^2/kg]; chi_m uses the two-term rigidity",
                {"Omega_over_kappa0": w, "chi_abs": np.abs(chi), "chi_re": chi.real,
                 "chi_im": chi.imag, "chi_m_abs": np.abs(chi_m)})


def cmd_psd(run: Run):
    p = build_params(run.cfg)
    _record_params(run, p)
    w = _omega_grid(run.cfg)
    Omega = w * p.kappa0
    theta = run.cfg.get("theta", 0.0)
    s = sensitivity(p, Omega, theta)
    write_table(run.path("psd.csv"),
                "S_F [N^2 s], S_x [m^2 s] double-sided; S_f, S_a, S_p relative to the free-mass SQL "
                f"at theta={theta!r}",
                {"Omega_over_kappa0": w, "S_F": s_ffl(p, Omega), "S_x": displacement_spectrum(p, Omega),
                 "S_f": s.S_f, "S_a": s.S_a, "S_p": s.S_p})


def cmd_neff(run: Run):
    p = build_params(run.cfg)
    _record_params(run, p)
    res = n_eff(p, cutoff=run.cfg.get("cutoff", 1e3), full_output=True)
    eo = effective_oscillator(p)
    doc = asdict(res) | {"delta_m": eo.delta_m, "Q_m": eo.Q_m}
    run.write_json("neff.json", doc)
    print(f"n_eff = {res.n_eff:.6g}   <x^2> = {res.x_variance:.6g} m^2   Omega_m = {res.Omega_m:.6g} rad/s")


def _table(rows):
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{width}}  {v}")


def cmd_msi_design(run: Run):
    cfg = run.cfg
    for key in ("T0_sq", "R_sq"):
        if key not in cfg:
            raise ConfigError(f"msi-design needs {key!r}")
    if "k" in cfg and "wavelength" in cfg:
        raise ConfigError("give only one of 'k' or 'wavelength'")
    k = cfg["k"] if "k" in cfg else (2 * math.pi / cfg["wavelength"] if "wavelength" in cfg else 1.0)
    design = design_gm(cfg["T0_sq"], cfg["R_sq"], k=k, L=cfg.get("L", 1.0),
                       delta_sign=cfg.get("delta_sign", -1))
    doc = design.to_dict()
    if "L" not in cfg:
        doc["kappa0"] = None
        doc["tau"] = None
    if "W_in" in cfg and "m" in cfg:
        doc["Omega0"] = pump_estimates(design, cfg["W_in"], cfg["m"])
    run.write_json("msi_design.json", doc)
    rows = [("T_bs^2", f"{design.T_bs**2:.8g}"), ("R_bs^2", f"{design.R_bs**2:.8g}"),
            ("Delta_bs", f"{design.Delta_bs:.8g}"), ("phi0 [rad]", f"{design.phi0:.10g}"),
            ("TT0", f"{design.TT0.real:.8g}"), ("|RR0|", f"{design.RR0_abs:.8g}"),
            ("eta/k", f"{design.eta / k:.8g}"), ("eta [1/m]", f"{design.eta:.8g}")]
    if "L" in cfg:
        rows.append(("kappa0 [rad/s]", f"{design.kappa0:.8g}"))
    if "Omega0" in doc:
        rows += [("Omega0 simplified [rad/s]", f"{doc['Omega0']['simplified']:.6g}"),
                 ("Omega0 full [rad/s]", f"{doc['Omega0']['full']:.6g}")]
    _table(rows)


def cmd_report(run: Run):
    cfg = run.cfg
    style = parameter_style(cfg)
    rows = []
    doc = {}
    if style == "msi":
        p, design, est = msi_params(cfg)
        doc["Omega0_simplified"] = est["simplified"]
        doc["Omega0_full"] = est["full"]
        doc["eta_model"] = cfg.get("eta_model", "simplified")
        rows += [("Omega0 simplified [rad/s]", f"{est['simplified']:.6g}"),
                 ("Omega0 full [rad/s]", f"{est['full']:.6g}"),
                 ("eta model", doc["eta_model"])]
    else:
        p = build_params(cfg)
        doc["Omega0"] = math.sqrt(p.Omega0_sq)
        rows.append(("Omega0 [rad/s]", f"{doc['Omega0']:.6g}"))
    _record_params(run, p)
    Omega0 = math.sqrt(p.Omega0_sq)
    doc.update(kappa0=p.kappa0, d=p.d, kappa0_over_Omega0=p.kappa0 / Omega0 if Omega0 > 0 else math.inf)
    rows += [("kappa0 [rad/s]", f"{p.kappa0:.6g}"), ("d = delta/kappa0", f"{p.d:.6g}"),
             ("kappa0/Omega0", f"{doc['kappa0_over_Omega0']:.6g}")]
    if Omega0 == 0:
        doc.update(verdict="no rigidity", Omega_m=0.0, delta_m=0.0, Q_m=None, k0=0.0, k1=0.0, n_eff=None)
        rows += [("verdict", "no rigidity"), ("Omega_m [rad/s]", "0"), ("delta_m [rad/s]", "0"),
                 ("n_eff", "unavailable")]
    else:
        verdict = is_stable(p)
        doc.update(verdict=verdict.verdict, max_real_part=verdict.max_real_part)
        if p.delta < 0:
            eo = effective_oscillator(p)
            doc.update(Omega_m=eo.Omega_m, delta_m=eo.delta_m, Q_m=eo.Q_m)
            rows += [("Omega_m [rad/s]", f"{eo.Omega_m:.6g}"), ("delta_m [rad/s]", f"{eo.delta_m:.6g}"),
                     ("Q_m", f"{eo.Q_m:.6g}")]
        else:
            doc.update(Omega_m=None, delta_m=None, Q_m=None)
            rows.append(("Omega_m", "n/a (delta >= 0)"))
        rows.append(("verdict", verdict.verdict))
        if verdict.verdict == "stable":
            doc["n_eff"] = n_eff(p)
            rows.append(("n_eff", f"{doc['n_eff']:.6g}"))
        else:
            doc["n_eff"] = None
            rows.append(("n_eff", "unavailable (not stable)"))
    run.write_json("report.json", doc)
    _table(rows)


def cmd_reproduce_figure(run: Run):
    n = run.cfg.get("figure")
    if n not in FIGURES:
        raise ConfigError(f"figure must be one of {sorted(FIGURES)}, got {n!r}")
    kwargs = {}
    if "y_values" in run.cfg and n in (2, 4):
        kwargs["y_values"] = tuple(run.cfg["y_values"])
    if "tan_theta" in run.cfg and n == 6:
        kwargs["tan_theta"] = tuple(run.cfg["tan_theta"])
    if "points" in run.cfg:
        kwargs["points"] = run.cfg["points"]
    panels = build_figure(n, **kwargs)
    meta = []
    for panel in panels:
        write_table(run.path(f"fig{n}_{panel['name']}.csv"), panel["comment"], panel["columns"])
        meta.append({k: v for k, v in panel.items() if k not in ("columns",)})
    run.extra["panels"] = meta
    run.extra["note"] = ("top panels use d = -0.55, inside the stable window 1/2 < |d| < sqrt(3)/2; "
                         "a detuning of -5.5 kappa0 would be unstable")
    print(f"figure {n}: wrote " + ", ".join(run.outputs))


def cmd_simulate(run: Run):
    cfg = run.cfg
    p = build_params(cfg)
    _record_params(run, p)
    dt = cfg.get("dt", 0.05)
    sim = SimConfig(dt=dt / p.kappa0, duration=cfg.get("duration", 2000.0) / p.kappa0,
                    seed=cfg.get("seed", 0), ensemble=cfg.get("ensemble", 8),
                    record_stride=cfg.get("record_stride", 10), workers=cfg.get("workers", 1))
    ens = simulate(p, sim)
    ens[0].to_csv(run.path("simulate_trajectory.csv"), kappa0=p.kappa0)
    verdict = is_stable(p)
    doc = {"verdict": verdict.verdict, "max_real_part": verdict.max_real_part,
           "diverged": ens.diverged(), "ensemble": len(ens), "samples": ens.x.shape[1]}
    if verdict.verdict == UNSTABLE or doc["diverged"]:
        doc["growth_rate"] = growth_rate(ens)
    else:
        spec = periodogram(ens)
        spec.to_csv(run.path("simulate_psd.csv"))
        doc["time_variance"] = ens.stationary_variance()
        if verdict.verdict == "stable":
            doc["spectral_variance"] = n_eff(p, full_output=True).x_variance
            doc["variance_ratio"] = doc["time_variance"] / doc["spectral_variance"]
    run.write_json("simulate.json", doc)
    _table([(k, str(v)) for k, v in doc.items()])


HANDLERS = {
    "stability-map": cmd_stability_map,
    "susceptibility": cmd_susceptibility,
    "psd": cmd_psd,
    "neff": cmd_neff,
    "msi-design": cmd_msi_design,
    "report": cmd_report,
    "reproduce-figure": cmd_reproduce_figure,
    "simulate": cmd_simulate,
}


def _raw(text):
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optorigid",
        description="Optical rigidity with dissipative coupling: stability, noise, sensitivity, design.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, argument_default=argparse.SUPPRESS)
        sp.add_argument("--config", help="flat key=value file or provenance sidecar")
        if name == "reproduce-figure":
            sp.add_argument("figure_n", nargs="?", type=int, default=None, help=f"one of {sorted(FIGURES)}")
        for key, (_, help_text) in SCHEMA.items():
            flags = [f"--{key}"]
            if "_" in key:
                flags.append(f"--{key.replace('_', '-')}")
            sp.add_argument(*flags, dest=key, type=_raw, help=help_text, metavar="V")
    return parser


def _run_config(args: argparse.Namespace) -> tuple[str, dict]:
    ns = vars(args).copy()
    command = ns.pop("command")
    cfg_path = ns.pop("config", None)
    fig = ns.pop("figure_n", None)
    overrides = {k: parse_value(k, v) for k, v in ns.items()}
    if fig is not None:
        overrides["figure"] = fig
    base = load_config(cfg_path) if cfg_path else {}
    return command, merge(base, overrides)


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _bind_negative_values(argv):
    # argparse takes "-5.5e5" for an option; glue such values to their flag
    out = []
    for tok in argv:
        if (out and out[-1].startswith("--") and "=" not in out[-1] and tok.startswith("-")
                and _is_number(tok)):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _bind_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        command, cfg = _run_config(args)
        run = Run(command, cfg)
        HANDLERS[command](run)
        run.provenance()
    except (ConfigError, DomainError, NoSolutionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
