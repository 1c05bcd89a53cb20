"""Command-line front end: config ingestion, dispatch, CSV/JSON emission,
parameter sweeps with a resume manifest, and a series-vs-quadrature
comparison harness.

Exit status: 0 converged, 2 computed but not converged (artifacts still
written), 1 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .kinematics import (
    ConfigurationError,
    FieldConfig,
    ParticleParams,
    PhaseWindow,
    Polarization,
    rest_frame_pminus,
)
from .oracle import energy_report
from .quadrature import GridConfig
from .specfun import AccuracyError
from .spectrum_circular import (
    classical_rate_circular,
    energy_circular,
    rate_circular,
    resonance,
    rest_frame_energy_circular,
    rest_frame_rate_circular,
    schott_rate,
)
from .spectrum_linear import (
    classical_rate_linear,
    energy_linear,
    nikishov_ritus_rate,
    rate_linear,
    resonance_linear,
    rest_frame_energy_linear,
)

MODES = (
    "circular",
    "linear",
    "schott",
    "nikishov-ritus",
    "rest-frame-circular",
    "rest-frame-linear",
    "oracle-compare",
    "sweep",
    "classical-limit",
)

# fine-structure constant: internal energy unit is alpha*hbar*omega_w
ALPHA = 7.2973525693e-3
HBAR = 1.054571817e-34  # J s

CSV_HEADER = ("n", "omega", "theta", "dW", "dW_err")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    mode: Optional[str] = None
    xi: Optional[float] = None
    pminus: Optional[float] = None
    kappa_x: Optional[float] = None
    kappa_y: Optional[float] = None
    handedness: Optional[int] = None
    phi_in: Optional[float] = None
    dphi: Optional[float] = None
    rate: Optional[bool] = None
    polarization: Optional[str] = None
    convention: Optional[str] = None
    rel_tol: Optional[float] = None
    abs_tol: Optional[float] = None
    theta_points: Optional[int] = None
    phi_points: Optional[int] = None
    omega_points: Optional[int] = None
    omega_max: Optional[float] = None
    n_max: Optional[int] = None
    window_multiplier: Optional[float] = None
    harmonic_tail: Optional[float] = None
    param: Optional[str] = None
    sweep_from: Optional[float] = None
    sweep_to: Optional[float] = None
    steps: Optional[int] = None
    inner: Optional[str] = None
    points: Optional[List[Dict[str, Any]]] = None
    out: Optional[str] = None
    format: Optional[str] = None
    units: Optional[str] = None
    omega_w: Optional[float] = None
    threads: Optional[int] = None


# config-file key <-> dataclass field ("from"/"to" are keywords)
_KEY_TO_FIELD = {"from": "sweep_from", "to": "sweep_to"}
_FIELD_TO_KEY = {v: k for k, v in _KEY_TO_FIELD.items()}


def _field_names() -> Dict[str, type]:
    return {f.name: f.type for f in fields(RunConfig)}


def _g17(x: float) -> str:
    return "%.17g" % x


def _json_text(obj: Any, indent: int = 0) -> str:
    """Serializer with fixed 17-significant-digit floats and stable key order."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for k, v in obj.items():
            items.append(f'{pad}  {json.dumps(str(k))}: {_json_text(v, indent + 1)}')
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        inner = ", ".join(_json_text(v, indent + 1) for v in obj)
        return "[" + inner + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _g17(obj) if math.isfinite(obj) else "null"
    if obj is None:
        return "null"
    return json.dumps(obj)


def load_config_file(path: str) -> RunConfig:
    """Flat JSON object, snake_case keys mirroring the CLI flags."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path!r} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise UsageError(f"config file {path!r} must hold a JSON object")
    known = _field_names()
    cfg = RunConfig()
    for key, value in raw.items():
        if key == "result":
            continue  # emitted report block, ignored on re-ingestion
        field = _KEY_TO_FIELD.get(key, key)
        if field not in known:
            raise UsageError(f"unknown config key {key!r} in {path}")
        setattr(cfg, field, value)
    return cfg


def _merge(file_cfg: Optional[RunConfig], cli_cfg: RunConfig) -> RunConfig:
    if file_cfg is None:
        return cli_cfg
    merged = replace(file_cfg)
    for f in fields(RunConfig):
        v = getattr(cli_cfg, f.name)
        if v is not None:
            setattr(merged, f.name, v)
    return merged


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="radiance",
        description="Windowed emission spectra of an electron in a plane wave.",
        epilog=(
            "CSV schema (spectrum modes): header n,omega,theta,dW,dW_err; one row per "
            "harmonic, ascending n; omega/theta tag the resonance at theta=pi/2 for "
            "n>=1 in windowed modes and are 0 otherwise; dW is the harmonic "
            "contribution (energy, or rate in the mode's rate units); dW_err "
            "apportions the run's error estimate by |dW| share; final row "
            "total,,,<total>,<estimate>. Sweep CSV: header <param>,total,total_err,"
            "converged, one row per grid point. Config file: flat JSON, keys as the "
            "long flags with dashes as underscores (from/to for the sweep bounds); "
            "explicit CLI flags override file values."
        ),
    )
    p.add_argument("mode", nargs="?", choices=MODES, help="computation to run")
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--xi", type=float, help="field strength parameter")
    p.add_argument("--pminus", type=float, help="light-front momentum p_-")
    p.add_argument("--kappa-x", type=float, dest="kappa_x", help="transverse momentum x (circular only)")
    p.add_argument("--kappa-y", type=float, dest="kappa_y", help="transverse momentum y (circular only)")
    p.add_argument("--handedness", type=int, choices=(1, -1), help="circular rotation sense")
    p.add_argument("--phi-in", type=float, dest="phi_in", help="window start phase (default 0)")
    p.add_argument("--dphi", type=float, help="window length in phase")
    p.add_argument("--rate", action="store_const", const=True, help="emission rate instead of windowed energy")
    p.add_argument("--polarization", choices=("circular", "linear"), help="classical-limit mode field type")
    p.add_argument("--convention", choices=("integrated", "solid-angle-average"),
                   help="nikishov-ritus normalization (default integrated)")
    p.add_argument("--rel-tol", type=float, dest="rel_tol")
    p.add_argument("--abs-tol", type=float, dest="abs_tol")
    p.add_argument("--theta-points", type=int, dest="theta_points")
    p.add_argument("--phi-points", type=int, dest="phi_points")
    p.add_argument("--omega-points", type=int, dest="omega_points")
    p.add_argument("--omega-max", type=float, dest="omega_max", help="pin a hard frequency cap")
    p.add_argument("--n-max", type=int, dest="n_max", help="harmonic cutoff override")
    p.add_argument("--window-multiplier", type=float, dest="window_multiplier")
    p.add_argument("--harmonic-tail", type=float, dest="harmonic_tail")
    p.add_argument("--param", choices=("xi", "pminus", "dphi"), help="swept parameter")
    p.add_argument("--from", type=float, dest="sweep_from", help="sweep start")
    p.add_argument("--to", type=float, dest="sweep_to", help="sweep end")
    p.add_argument("--steps", type=int, help="sweep point count")
    p.add_argument("--inner", choices=tuple(m for m in MODES if m not in ("sweep", "oracle-compare")),
                   help="mode evaluated at each sweep point")
    p.add_argument("--out", help="output file path")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    p.add_argument("--units", choices=("internal", "physical"),
                   help="physical adds conversion factors for a given --omega-w")
    p.add_argument("--omega-w", type=float, dest="omega_w", help="wave angular frequency in rad/s")
    p.add_argument("--threads", type=int, help="worker cap (default RADIANCE_THREADS or 1)")
    return p


def _require(cfg: RunConfig, mode: str, *keys: str) -> None:
    for key in keys:
        if getattr(cfg, key) is None:
            flag = _FIELD_TO_KEY.get(key, key)
            raise UsageError(f"mode {mode!r} requires {flag!r} (flag --{flag.replace('_', '-')})")


def _reject(cfg: RunConfig, mode: str, *keys: str) -> None:
    for key in keys:
        if getattr(cfg, key) is not None:
            flag = _FIELD_TO_KEY.get(key, key)
            raise UsageError(f"{flag!r} does not apply to mode {mode!r}")


def _grid_config(cfg: RunConfig) -> GridConfig:
    kw = {}
    for src, dst in (
        ("rel_tol", "rel_tol"),
        ("abs_tol", "abs_tol"),
        ("theta_points", "theta_points"),
        ("phi_points", "phi_points"),
        ("omega_points", "omega_points"),
        ("omega_max", "omega_max"),
        ("n_max", "n_max_override"),
        ("window_multiplier", "window_multiplier"),
        ("harmonic_tail", "harmonic_tail"),
    ):
        v = getattr(cfg, src)
        if v is not None:
            kw[dst] = v
    try:
        return GridConfig(**kw)
    except (ConfigurationError, ValueError) as exc:
        raise UsageError(str(exc))


def _validate_common(cfg: RunConfig) -> None:
    if cfg.units == "physical" and cfg.omega_w is None:
        raise UsageError("'units'='physical' requires 'omega_w' (flag --omega-w)")
    if cfg.omega_w is not None and cfg.units != "physical":
        raise UsageError("'omega_w' applies only with --units physical")
    if cfg.mode != "sweep":
        for key in ("param", "sweep_from", "sweep_to", "steps", "inner"):
            if getattr(cfg, key) is not None:
                flag = _FIELD_TO_KEY.get(key, key)
                raise UsageError(f"{flag!r} applies only to mode 'sweep'")
    if cfg.points is not None and cfg.mode != "oracle-compare":
        raise UsageError("'points' applies only to mode 'oracle-compare'")


@dataclass
class Computed:
    label: str
    total: float
    error_estimate: float
    converged: bool
    n_max_used: int
    negative_fraction: float
    bracket_sign_flag: bool
    rows: List[Tuple[int, float, float, float, float]]


def _rows_from(res, omega_theta) -> List[Tuple[int, float, float, float, float]]:
    tot_abs = sum(abs(v) for _, v in res.per_harmonic)
    rows = []
    for n, v in sorted(res.per_harmonic):
        om, th = omega_theta(n)
        share = res.quadrature_error_estimate * (abs(v) / tot_abs if tot_abs else 0.0)
        rows.append((n, om, th, v, share))
    return rows


def _computed(label: str, res, omega_theta=None) -> Computed:
    if omega_theta is None:
        omega_theta = lambda n: (0.0, 0.0)
    return Computed(
        label=label,
        total=res.total,
        error_estimate=res.quadrature_error_estimate,
        converged=res.converged,
        n_max_used=res.n_max_used,
        negative_fraction=res.negative_fraction,
        bracket_sign_flag=res.bracket_sign_flag,
        rows=_rows_from(res, omega_theta),
    )


def compute(cfg: RunConfig) -> Computed:
    """Dispatch one fully validated run; returns the tabular payload."""
    mode = cfg.mode
    grid = _grid_config(cfg)
    try:
        if mode == "circular" or mode == "linear":
            _require(cfg, mode, "xi", "pminus", "dphi")
            pol = Polarization.CIRCULAR if mode == "circular" else Polarization.LINEAR
            if mode == "linear":
                _reject(cfg, mode, "kappa_x", "kappa_y", "handedness")
                f = FieldConfig(polarization=pol, xi=cfg.xi)
            else:
                f = FieldConfig(polarization=pol, xi=cfg.xi, handedness=cfg.handedness or 1)
            kappa = (cfg.kappa_x or 0.0, cfg.kappa_y or 0.0)
            p = ParticleParams(p_minus=cfg.pminus, kappa=kappa)
            window = _window(cfg)
            if mode == "circular":
                fn = rate_circular if cfg.rate else energy_circular
                res = _run_windowed(fn, f, p, window, grid)
                return _computed(mode, res, _resonance_tag(resonance, p, f, window))
            fn = rate_linear if cfg.rate else energy_linear
            res = _run_windowed(fn, f, p, window, grid)
            return _computed(mode, res, _resonance_tag(resonance_linear, p, f, window))

        if mode == "rest-frame-circular":
            _require(cfg, mode, "xi", "dphi")
            _reject(cfg, mode, "pminus", "kappa_x", "kappa_y")
            f = FieldConfig(polarization=Polarization.CIRCULAR, xi=cfg.xi, handedness=cfg.handedness or 1)
            window = _window(cfg)
            fn = rest_frame_rate_circular if cfg.rate else rest_frame_energy_circular
            res = _run_windowed(fn, f, window, grid)
            p = ParticleParams(p_minus=rest_frame_pminus(f))
            return _computed(mode, res, _resonance_tag(resonance, p, f, window))

        if mode == "rest-frame-linear":
            _require(cfg, mode, "xi", "dphi")
            _reject(cfg, mode, "pminus", "kappa_x", "kappa_y", "handedness")
            f = FieldConfig(polarization=Polarization.LINEAR, xi=cfg.xi)
            window = _window(cfg)
            p = ParticleParams(p_minus=rest_frame_pminus(f))
            if cfg.rate:
                res = _run_windowed(rate_linear, f, p, window, grid)
            else:
                res = _run_windowed(rest_frame_energy_linear, f, window, grid)
            return _computed(mode, res, _resonance_tag(resonance_linear, p, f, window))

        if mode == "schott":
            _require(cfg, mode, "xi")
            _reject(cfg, mode, "pminus", "dphi", "rate", "kappa_x", "kappa_y", "handedness")
            return _computed(mode, schott_rate(cfg.xi, n_max=cfg.n_max))

        if mode == "nikishov-ritus":
            _require(cfg, mode, "xi")
            _reject(cfg, mode, "pminus", "dphi", "rate", "kappa_x", "kappa_y", "handedness")
            res = nikishov_ritus_rate(cfg.xi, grid, convention=cfg.convention or "integrated")
            return _computed(mode, res)

        if mode == "classical-limit":
            _require(cfg, mode, "xi", "pminus", "polarization")
            _reject(cfg, mode, "dphi", "rate")
            p = ParticleParams(p_minus=cfg.pminus)
            if cfg.polarization == "circular":
                f = FieldConfig(polarization=Polarization.CIRCULAR, xi=cfg.xi, handedness=cfg.handedness or 1)
                return _computed(mode, classical_rate_circular(f, p))
            f = FieldConfig(polarization=Polarization.LINEAR, xi=cfg.xi)
            return _computed(mode, classical_rate_linear(f, p))
    except (ConfigurationError, ValueError) as exc:
        raise UsageError(str(exc))

    raise UsageError(f"mode {mode!r} is not a single-run mode")


def _window(cfg: RunConfig) -> PhaseWindow:
    phi_in = cfg.phi_in or 0.0
    return PhaseWindow(phi_in=phi_in, phi=phi_in + cfg.dphi)


def _run_windowed(fn, *args):
    # non-convergence is a reported state here, not a failure
    try:
        return fn(*args)
    except AccuracyError as exc:
        return exc.result


def _resonance_tag(res_fn, p, f, window):
    def tag(n: int) -> Tuple[float, float]:
        if n < 1:
            return 0.0, 0.0
        theta = 0.5 * math.pi
        om, _ = res_fn(p, f, theta, n, window)
        return om, theta

    return tag


def _unit_factors(cfg: RunConfig) -> Optional[Dict[str, float]]:
    if cfg.units != "physical":
        return None
    w = cfg.omega_w
    return {
        "omega_w_rad_per_s": w,
        "energy_J_per_internal": ALPHA * HBAR * w,
        "time_s_per_internal": 1.0 / w,
        "power_W_per_internal_rate": ALPHA * HBAR * w * w,
        "energy_per_radian_J_per_internal_rate": ALPHA * HBAR * w,
    }


def _config_echo(cfg: RunConfig) -> Dict[str, Any]:
    echo: Dict[str, Any] = {}
    for f in fields(RunConfig):
        if f.name in ("out",):
            continue
        v = getattr(cfg, f.name)
        if v is not None:
            echo[_FIELD_TO_KEY.get(f.name, f.name)] = v
    return echo


def _emit_single(cfg: RunConfig, comp: Computed) -> None:
    units = _unit_factors(cfg)
    if cfg.out and (cfg.format or "csv") == "csv":
        with open(cfg.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for n, om, th, dv, de in comp.rows:
                w.writerow([n, _g17(om), _g17(th), _g17(dv), _g17(de)])
            w.writerow(["total", "", "", _g17(comp.total), _g17(comp.error_estimate)])
    elif cfg.out:
        payload = _config_echo(cfg)
        payload["result"] = {
            "total": comp.total,
            "error_estimate": comp.error_estimate,
            "converged": comp.converged,
            "n_max_used": comp.n_max_used,
            "negative_fraction": comp.negative_fraction,
            "bracket_sign_flag": comp.bracket_sign_flag,
            "per_harmonic": [[n, v] for n, _, _, v, _ in comp.rows],
        }
        if units:
            payload["result"]["units"] = units
        with open(cfg.out, "w") as fh:
            fh.write(_json_text(payload) + "\n")
    print(f"total {_g17(comp.total)}")
    print(f"error_estimate {_g17(comp.error_estimate)}")
    print(f"converged {str(comp.converged).lower()}")
    if units:
        for k, v in units.items():
            print(f"{k} {_g17(v)}")


def _oracle_compare(cfg: RunConfig) -> int:
    points = cfg.points
    if points is None:
        _require(cfg, "oracle-compare", "xi", "pminus", "dphi", "polarization")
        points = [
            {
                "polarization": cfg.polarization,
                "xi": cfg.xi,
                "pminus": cfg.pminus,
                "dphi": cfg.dphi,
            }
        ]
    grid = _grid_config(cfg)
    report = []
    all_ok = True
    for pt in points:
        for key in ("polarization", "xi", "pminus", "dphi"):
            if key not in pt:
                raise UsageError(f"oracle-compare point missing key {key!r}")
        pol = Polarization.CIRCULAR if pt["polarization"] == "circular" else Polarization.LINEAR
        try:
            f = FieldConfig(polarization=pol, xi=pt["xi"])
            p = ParticleParams(p_minus=pt["pminus"])
            window = PhaseWindow(phi_in=pt.get("phi_in", 0.0), phi=pt.get("phi_in", 0.0) + pt["dphi"])
        except ConfigurationError as exc:
            raise UsageError(str(exc))
        series_fn = energy_circular if pol is Polarization.CIRCULAR else energy_linear
        series = _run_windowed(series_fn, f, p, window, grid)
        direct = energy_report(f, p, window, grid)
        rel = abs(series.total - direct.w_minkowski) / abs(direct.w_minkowski)
        ok = series.converged and direct.converged
        all_ok = all_ok and ok
        report.append(
            {
                "point": dict(pt),
                "series_total": series.total,
                "direct_minkowski": direct.w_minkowski,
                "rel_error": rel,
                "series_converged": series.converged,
                "direct_converged": direct.converged,
            }
        )
    text = _json_text({"points": report}) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if all_ok else 2


def _sweep(cfg: RunConfig) -> int:
    _require(cfg, "sweep", "param", "sweep_from", "sweep_to", "steps", "inner", "out")
    if cfg.steps < 1:
        raise UsageError("'steps' must be >= 1")
    if cfg.steps > 1 and not cfg.sweep_to > cfg.sweep_from:
        raise UsageError("'to' must exceed 'from' for a multi-point sweep")
    values = [float(v) for v in np.linspace(cfg.sweep_from, cfg.sweep_to, cfg.steps)]
    signature = _config_echo(cfg)

    manifest_path = cfg.out + ".manifest.json"
    manifest: Dict[str, Any] = {"signature": signature, "completed": {}, "failed": {}}
    if os.path.exists(manifest_path):
        with open(manifest_path) as fh:
            loaded = json.load(fh)
        if loaded.get("signature") != signature:
            raise UsageError(f"manifest {manifest_path!r} belongs to a different sweep; remove it to restart")
        manifest["completed"] = loaded.get("completed", {})
        manifest["failed"] = {}

    lock = threading.Lock()

    def save_manifest() -> None:
        tmp = manifest_path + ".tmp"
        with open(tmp, "w") as fh:
            fh.write(_json_text(manifest) + "\n")
        os.replace(tmp, manifest_path)

    def worker(i: int) -> None:
        point_cfg = replace(cfg, mode=cfg.inner, param=None, sweep_from=None,
                            sweep_to=None, steps=None, inner=None, out=None)
        setattr(point_cfg, cfg.param, values[i])
        try:
            comp = compute(point_cfg)
            entry = {
                "value": values[i],
                "total": comp.total,
                "error_estimate": comp.error_estimate,
                "converged": comp.converged,
            }
            with lock:
                manifest["completed"][str(i)] = entry
                save_manifest()
        except UsageError:
            raise
        except Exception as exc:  # a failed point must not kill the sweep
            with lock:
                manifest["failed"][str(i)] = str(exc)
                save_manifest()

    pending = [i for i in range(cfg.steps) if str(i) not in manifest["completed"]]
    n_threads = max(1, cfg.threads or int(os.environ.get("RADIANCE_THREADS", "1")))
    if pending:
        with ThreadPoolExecutor(max_workers=n_threads) as ex:
            list(ex.map(worker, pending))

    with open(cfg.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([cfg.param, "total", "total_err", "converged"])
        for i in range(cfg.steps):
            entry = manifest["completed"].get(str(i))
            if entry is None:
                continue
            w.writerow(
                [
                    _g17(entry["value"]),
                    _g17(entry["total"]),
                    _g17(entry["error_estimate"]),
                    str(bool(entry["converged"])).lower(),
                ]
            )
    print(f"computed {len(pending) - len(manifest['failed'])} skipped {cfg.steps - len(pending)}")
    if manifest["failed"]:
        return 2
    if not all(manifest["completed"][str(i)]["converged"] for i in range(cfg.steps)):
        return 2
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    parser.error = lambda message: (_ for _ in ()).throw(UsageError(message))  # type: ignore[assignment]
    try:
        ns = parser.parse_args(argv)
        cli_cfg = RunConfig(**{f.name: getattr(ns, f.name, None) for f in fields(RunConfig)})
        file_cfg = load_config_file(ns.config) if ns.config else None
        cfg = _merge(file_cfg, cli_cfg)
        if cfg.mode is None:
            raise UsageError("no mode given (argument or config key 'mode')")
        if cfg.mode not in MODES:
            raise UsageError(f"unknown mode {cfg.mode!r}")
        _validate_common(cfg)
        if cfg.mode == "sweep":
            return _sweep(cfg)
        if cfg.mode == "oracle-compare":
            return _oracle_compare(cfg)
        comp = compute(cfg)
        _emit_single(cfg, comp)
        return 0 if comp.converged else 2
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
