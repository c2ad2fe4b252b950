"""
Command-line interface.

Every subcommand validates its configuration first (exit code 2 on an
invalid configuration), then runs the computation and writes either a CSV
table or a JSON report.  Verdicts such as ``not_cis`` are successful
outcomes; input and numerical failures exit with code 1.

Examples
--------
::

    fockcis reference --weight alpha:2 --p 2 --n-max 10
    fockcis classify --weight alpha:2 --p 2 --input seq.csv --output report.json
    fockcis sweep --weight alpha:2 --p 2 --deltas 0.05:0.45:0.05 --seed 7
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from . import io as fio
from .exceptions import ConfigError, FockError, WeightError
from .frame import classify_infty, gram, gram_trend, kernel_table_for, riesz_bounds
from .geometry import (ClassifyOptions, LogPoint, classify, complete_to_cis,
                       delta_N_estimate, decompose, extract_cis, perturbed_reference,
                       phi_density)
from .product import CanonicalProduct, CoefficientVector, _interpolant_logs
from .reference import build_reference, log_evaluation_norm
from .weight import RadialWeight, SpaceParams

__all__ = ["RunConfig", "build_parser", "main"]

UNITS = {"t": "natural log of modulus", "theta": "radians",
         "log_*": "natural log", "density": "points per unit of psi'"}


@dataclass
class RunConfig:
    """Validated settings shared by the subcommands."""

    command: str
    weight: str = "alpha:2"
    p: float = 2.0
    horizon: int = 200
    input: Optional[str] = None
    output: Optional[str] = None
    report: Optional[str] = None
    seed: int = 0
    jobs: int = 1
    N_max: int = 10
    margin: float = 0.02
    R: float = 100.0
    sizes: tuple = (10, 20, 40, 60)
    n_max: int = 10
    coefficients: Optional[str] = None
    deltas: tuple = ()
    reps: int = 1
    random_phases: bool = False
    star: tuple = (-math.inf, 0.0)
    M: Optional[int] = None
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        errors = []
        try:
            parse_weight(self.weight)
        except (ConfigError, WeightError, OSError) as exc:
            errors.append(f"weight: {exc}")
        if not (self.p > 0):
            errors.append(f"p: must be positive or inf, got {self.p}")
        if self.horizon < 1:
            errors.append(f"horizon: must be >= 1, got {self.horizon}")
        if self.jobs < 1:
            errors.append(f"jobs: must be >= 1, got {self.jobs}")
        if self.N_max < 1:
            errors.append(f"N_max: must be >= 1, got {self.N_max}")
        if not 0 <= self.margin < 0.5:
            errors.append(f"margin: must lie in [0, 0.5), got {self.margin}")
        if not self.R > 0:
            errors.append(f"R: must be positive, got {self.R}")
        if not self.sizes or any(s < 1 for s in self.sizes) or any(
                b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            errors.append(f"sizes: must be strictly increasing positive integers, got {list(self.sizes)}")
        if self.n_max < 0:
            errors.append(f"n_max: must be >= 0, got {self.n_max}")
        if self.reps < 1:
            errors.append(f"reps: must be >= 1, got {self.reps}")
        if self.M is not None and self.M < 1:
            errors.append(f"M: must be >= 1, got {self.M}")
        if math.isinf(self.p) and self.command not in ("classify", "gram", "reference"):
            errors.append(f"p: p=inf is only supported by classify and gram, not {self.command}")
        if errors:
            raise ConfigError("; ".join(errors))

    def digest(self) -> str:
        """SHA-256 of the configuration in canonical JSON form."""
        text = json.dumps(fio.to_jsonable(asdict(self)), sort_keys=True)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def parse_weight(spec: str) -> RadialWeight:
    """``alpha:<value>`` or ``custom:<path to r,phi,dphi,ddphi table>``."""
    family, _, arg = spec.partition(":")
    if family == "alpha":
        try:
            alpha = float(arg)
        except ValueError:
            raise ConfigError(f"bad alpha {arg!r}") from None
        if not 1.0 < alpha <= 2.0:
            raise ConfigError(f"alpha must lie in (1, 2], got {alpha}")
        return RadialWeight.alpha_model(alpha)
    if family == "custom":
        if not arg:
            raise ConfigError("custom weight needs a table path")
        return RadialWeight.from_table(arg)
    raise ConfigError(f"unknown weight family {family!r}; use alpha:<a> or custom:<path>")


def _parse_p(text) -> float:
    if str(text).strip().lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def _parse_sizes(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(int(x) for x in text)
    return tuple(int(x) for x in str(text).split(",") if x.strip())


def _parse_grid(text) -> tuple:
    """``a,b,c`` or the inclusive range ``start:stop:step``; empty gives ``()``."""
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    text = str(text).strip()
    if not text:
        return ()
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if not step > 0:
            raise ConfigError("deltas: step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + k * step, 12) for k in range(max(count, 0)))
    return tuple(float(x) for x in text.split(",") if x.strip())


def _parse_point(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    a, b = str(text).split(",")
    return float(a), float(b)


def _load_config_file(path) -> dict:
    """JSON object, or ``key = value`` lines (``#`` starts a comment)."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        data = json.loads(text)
    else:
        data = {}
        for k, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{k}: expected key = value")
            data[key.strip()] = value.strip()
    # weight may be given as family/alpha/table keys
    fam = data.pop("family", None)
    if fam == "alpha":
        data["weight"] = f"alpha:{data.pop('alpha')}"
    elif fam == "custom":
        data["weight"] = f"custom:{data.pop('table')}"
    elif fam is not None:
        raise ConfigError(f"{path}: unknown family {fam!r}")
    return data


_CONVERTERS = {
    "p": _parse_p, "horizon": int, "seed": int, "jobs": int, "N_max": int,
    "margin": float, "R": float, "sizes": _parse_sizes, "n_max": int,
    "deltas": _parse_grid, "reps": int, "star": _parse_point,
    "M": lambda x: None if x in (None, "") else int(x),
    "random_phases": lambda x: x if isinstance(x, bool) else str(x).lower() in ("1", "true", "yes"),
}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(ns, "config", None):
        try:
            values.update(_load_config_file(ns.config))
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"config: {exc}") from None
    for key, val in vars(ns).items():
        if key in ("config", "func") or val is None:
            continue
        values[key] = val
    known = set(RunConfig.__dataclass_fields__)
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    for key, conv in _CONVERTERS.items():
        if key in values:
            try:
                values[key] = conv(values[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key}: {exc}") from None
    for key in ("weight", "input", "output", "report", "coefficients"):
        if key in values and values[key] is not None:
            values[key] = str(values[key])
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# ===========
# Subcommands
# ===========

def _space(cfg):
    return parse_weight(cfg.weight), SpaceParams(cfg.p)


def _envelope(cfg, body: dict) -> dict:
    out = {"config_hash": cfg.digest(), "version": __version__, "command": cfg.command,
           "weight": cfg.weight, "p": cfg.p, "horizon": cfg.horizon, "units": UNITS}
    out.update(body)
    return out


def _emit(cfg, text: str, path=None) -> None:
    path = path if path is not None else cfg.output
    if path is None:
        sys.stdout.write(text)
    else:
        fio.write_text(path, text)


def _need_input(cfg):
    if not cfg.input:
        raise ConfigError("input: this command needs --input")
    return fio.read_sequence(cfg.input)


def cmd_reference(cfg: RunConfig) -> None:
    w, sp = _space(cfg)
    rsp = SpaceParams(2.0) if sp.is_infinite else sp
    ref = build_reference(w, rsp, cfg.n_max)
    _emit(cfg, fio.reference_csv(ref, w, rsp))
    if cfg.report:
        body = {"n_max": cfg.n_max, "offset": ref.offset,
                "norm_table": [{"n": n, "log_norm": float(v)} for n, v in zip(
                    range(cfg.n_max + 1), _norm_values(w, rsp, cfg.n_max))]}
        fio.write_text(cfg.report, fio.dumps_json(_envelope(cfg, body)))


def _norm_values(w, sp, n_max):
    from .reference import log_monomial_norm
    return [log_monomial_norm(w, sp, n).log_mag for n in range(n_max + 1)]


def cmd_classify(cfg: RunConfig) -> None:
    w, sp = _space(cfg)
    g = _need_input(cfg)
    opts = ClassifyOptions(N_max=cfg.N_max, margin=cfg.margin, horizon=cfg.horizon)
    if sp.is_infinite:
        star = LogPoint(*cfg.star)
        sizes = cfg.sizes if len(g) >= max(cfg.sizes) else ()
        rep = classify_infty(g, star, w, opts, sizes=sizes)
    else:
        rep = classify(g, w, sp, opts)
    _emit(cfg, fio.dumps_json(_envelope(cfg, {"report": rep.to_dict()})))


def _sweep_row(w, sp, ref, delta, theta, cfg):
    g = perturbed_reference(ref, delta, theta=theta)
    opts = ClassifyOptions(N_max=cfg.N_max, margin=cfg.margin, horizon=cfg.horizon)
    rep = classify(g, w, sp, opts)
    N = rep.best_N
    if N is None:
        N = min(rep.delta_N_table, key=rep.delta_N_table.get) if rep.delta_N_table else 1
    dN = rep.delta_N_table.get(N, math.nan)
    conds = []
    if sp.p == 2.0:
        rr = gram_trend(None, g, w, cfg.sizes)
        conds = rr.conditions
    return [rep.verdict, rep.reason or "", N, dN] + list(conds)


def cmd_sweep(cfg: RunConfig) -> None:
    """Classify constant perturbations of the reference over a grid of shifts."""
    w, sp = _space(cfg)
    H = cfg.horizon
    ref = build_reference(w, sp, H - 1)
    rng = np.random.default_rng(cfg.seed)
    tasks = []
    for delta in cfg.deltas:
        for rep in range(cfg.reps):
            theta = rng.uniform(-math.pi, math.pi, H) if cfg.random_phases else np.zeros(H)
            tasks.append((delta, rep, theta))
    header = ["delta", "rep", "verdict", "reason", "N", "delta_N"]
    if sp.p == 2.0:
        header += [f"cond_{M}" for M in cfg.sizes]

    def run(task):
        delta, rep, theta = task
        return [float(delta), rep] + _sweep_row(w, sp, ref, float(delta), theta, cfg)

    if cfg.jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(run, tasks))
    else:
        rows = [run(t) for t in tasks]
    _emit(cfg, fio.table_csv(header, rows))
    if cfg.report:
        body = {"seed": cfg.seed, "rows": len(rows), "random_phases": cfg.random_phases}
        fio.write_text(cfg.report, fio.dumps_json(_envelope(cfg, body)))


def cmd_density(cfg: RunConfig) -> None:
    w, sp = _space(cfg)
    g = _need_input(cfg)
    rep = phi_density(g.head(min(len(g), cfg.horizon)), w, sp, R=cfg.R)
    body = rep.to_dict()
    body["target"] = 1.0 / sp.p
    _emit(cfg, fio.dumps_json(_envelope(cfg, {"report": body})))


def cmd_interpolate(cfg: RunConfig) -> None:
    """Values of the interpolant at the nodes, normalised by the evaluation norms."""
    w, sp = _space(cfg)
    g = _need_input(cfg)
    if not cfg.coefficients:
        raise ConfigError("coefficients: interpolate needs --coefficients")
    v = fio.read_coefficients(cfg.coefficients, sp.p)
    cp = CanonicalProduct(g)
    top = int(v.index.max()) if v.index.size else 0
    last = int(np.searchsorted(g.t, g.t[-1] - cp.margin, side="right")) - 1
    count = min(max(top + 1, min(cfg.horizon, last + 1)), last + 1)
    if count <= top:
        raise ConfigError(f"coefficients: index {top} needs nodes beyond the sequence horizon")
    t, th = g.t[:count], g.theta[:count]
    mag, ph = _interpolant_logs(cp, w, sp, v, t, th)
    lnL = np.array([log_evaluation_norm(w, sp, float(x)).log_mag for x in t])
    val = np.exp(mag - lnL) * np.exp(1j * ph)
    rows = [(n, float(t[n]), float(th[n]), float(mag[n]), float(ph[n]),
             float(val[n].real), float(val[n].imag)) for n in range(count)]
    _emit(cfg, fio.table_csv(("n", "t", "theta", "log_abs", "phase", "re", "im"), rows))


def cmd_gram(cfg: RunConfig) -> None:
    w, _ = _space(cfg)
    g = _need_input(cfg)
    sizes = list(cfg.sizes)
    if sizes[-1] > len(g):
        raise ConfigError(f"sizes: largest size {sizes[-1]} exceeds the {len(g)} input points")
    kt = kernel_table_for(w, float(np.max(g.t[:sizes[-1]])))
    full = gram(kt, g, sizes[-1])
    rr = riesz_bounds([full[:M, :M] for M in sizes])
    _emit(cfg, fio.gram_csv(full))
    report = fio.dumps_json(_envelope(cfg, {"report": rr.to_dict()}))
    if cfg.report:
        fio.write_text(cfg.report, report)
    elif cfg.output:
        sys.stdout.write(report)


def _construction(cfg, fn):
    w, sp = _space(cfg)
    g = _need_input(cfg)
    out = fn(g, w, sp, M=cfg.M)
    _emit(cfg, fio.table_csv(("t", "theta"), zip(out.t, out.theta)))
    if cfg.report:
        body = {"input_points": len(g), "output_points": len(out)}
        fio.write_text(cfg.report, fio.dumps_json(_envelope(cfg, body)))


def cmd_complete(cfg: RunConfig) -> None:
    _construction(cfg, complete_to_cis)


def cmd_extract(cfg: RunConfig) -> None:
    _construction(cfg, extract_cis)


COMMANDS = {
    "reference": (cmd_reference, "reference radii and evaluation norms (CSV)"),
    "classify": (cmd_classify, "classify a sequence (JSON report)"),
    "sweep": (cmd_sweep, "classification over a grid of constant shifts (CSV)"),
    "density": (cmd_density, "lower and upper densities (JSON report)"),
    "interpolate": (cmd_interpolate, "interpolant values at the nodes (CSV)"),
    "gram": (cmd_gram, "normalised Gram matrix (CSV) and Riesz bounds (JSON)"),
    "complete": (cmd_complete, "complete a sparse sequence (CSV)"),
    "extract": (cmd_extract, "extract from a dense sequence (CSV)"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or key = value file; flags override it")
    common.add_argument("--weight", help="alpha:<a> with 1 < a <= 2, or custom:<table.csv>")
    common.add_argument("--p", help="exponent p > 0, or inf")
    common.add_argument("--horizon", type=int, help="number of points used")
    common.add_argument("--input", help="sequence CSV with header t,theta")
    common.add_argument("--output", help="output file (default: standard output)")
    common.add_argument("--report", help="JSON summary file")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, help="worker threads")
    common.add_argument("--N-max", dest="N_max", type=int)
    common.add_argument("--margin", type=float)
    common.add_argument("--R", type=float, help="annulus width for densities")
    common.add_argument("--sizes", help="Gram section sizes, e.g. 10,20,40")

    parser = argparse.ArgumentParser(
        prog="fockcis",
        description="Complete interpolating sequences in radial Fock-type spaces.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    parsers = {}
    for name, (func, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        sp.set_defaults(func=func)
        parsers[name] = sp
    parsers["reference"].add_argument("--n-max", dest="n_max", type=int)
    parsers["classify"].add_argument("--star", help="extra point t,theta for p=inf")
    parsers["interpolate"].add_argument("--coefficients", help="CSV with header n,re,im")
    parsers["sweep"].add_argument("--deltas", help="a,b,c or start:stop:step")
    parsers["sweep"].add_argument("--reps", type=int)
    parsers["sweep"].add_argument("--random-phases", dest="random_phases",
                                  action="store_true", default=None)
    for name in ("complete", "extract"):
        parsers[name].add_argument("--M", type=int, help="group size (default: smallest that works)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    func = ns.func
    try:
        cfg = config_from_args(ns)
    except ConfigError as exc:
        print(f"fockcis: configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        func(cfg)
    except ConfigError as exc:
        print(f"fockcis: configuration error: {exc}", file=sys.stderr)
        return 2
    except (FockError, OSError, ValueError, ArithmeticError) as exc:
        print(f"fockcis {cfg.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
