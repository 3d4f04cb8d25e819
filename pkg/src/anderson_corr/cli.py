"""Batch front end: dos | green | corr2 | validate | identities.

Run configurations mirror the command-line flags one to one; `--config
file.json` supplies the same keys from a file (explicit flags win).  Energy
grids use the inclusive syntax start:stop:count.  Output goes to --output
as JSON or CSV; every JSON artifact embeds the exact config used, which
re-parses to an identical RunConfig.

Exit status: 0 success, 1 configuration error, 2 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import expansion, identities as identity_suite, oracle
from .covariant import parse_observable_spec, velocity
from .densities import parse_density_spec
from .errors import AndersonCorrError
from .multiindex import SignVector
from .walks import DEFAULT_BUDGET

CSV_COLUMNS = {
    "dos": ["E", "dos", "value_re", "value_im", "tail_bound"],
    "corr2": ["E1", "E2", "k2", "k2_over_pi2", "gpp_re", "gpp_im",
              "gpm_re", "gpm_im", "tail_bound"],
    "validate": ["E", "series_re", "series_im", "mc_re", "mc_im",
                 "stderr", "tail_bound", "diff", "allowed", "ok"],
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    density: str = "gaussian:sigma2=1.0,r=1.0"
    d: int = 1
    lam: float = 0.05
    observables: tuple[str, ...] = ()
    grid: str | None = None
    grid2: str | None = None
    sigmas: str = "+"
    n_max: int = 6
    gap: float | None = None
    delta: float | None = None
    box_l: int = 20
    eps: float = 0.0
    samples: int = 500
    seed: int = 1
    margin: int = 5
    z: tuple[str, ...] = ()
    nu: int = 0
    output: str | None = None
    fmt: str = "json"
    deterministic: bool = False
    threads: int | None = None
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "observables", tuple(self.observables))
        object.__setattr__(self, "z", tuple(self.z))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def workers(self) -> int:
        if self.deterministic:
            return 1
        if self.threads is not None:
            return max(1, self.threads)
        env = os.environ.get("ANDERSON_CORR_THREADS")
        return max(1, int(env)) if env else 1


def parse_grid(spec: str) -> np.ndarray:
    """Inclusive grid 'start:stop:count'."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be start:stop:count, got {spec!r}")
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise ValueError("grid count must be >= 1")
    return np.linspace(start, stop, count)


def parse_complex(text: str) -> complex:
    return complex(text.strip().replace("i", "j").replace(" ", ""))


def _write(payload, cfg: RunConfig, rows_key: str | None = None):
    if cfg.fmt == "csv":
        if rows_key is None:
            raise ValueError("csv output needs tabular data")
        cols = CSV_COLUMNS[cfg.command]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=cols)
        writer.writeheader()
        for row in payload[rows_key]:
            writer.writerow({k: row[k] for k in cols})
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2, default=str) + "\n"
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _expansion_config(cfg: RunConfig, observables) -> expansion.ExpansionConfig:
    return expansion.ExpansionConfig(
        density=parse_density_spec(cfg.density),
        d=cfg.d,
        lam=cfg.lam,
        n_max=cfg.n_max,
        observables=tuple(observables),
        gap=cfg.gap,
        delta=cfg.delta,
        budget=cfg.budget,
    )


def run_dos(cfg: RunConfig) -> int:
    if cfg.grid is None:
        raise ValueError("dos needs --grid")
    xcfg = _expansion_config(cfg, ())
    rows = []
    for E in parse_grid(cfg.grid):
        if cfg.eps > 0.0:
            sv = expansion.green_series(xcfg, (complex(E, cfg.eps),))
        else:
            sv = expansion.dos_series(xcfg, +1, float(E))
        rows.append({
            "E": float(E),
            "dos": sv.value.imag / math.pi,
            "value_re": sv.value.real,
            "value_im": sv.value.imag,
            "tail_bound": sv.tail_bound,
        })
    _write({"config": cfg.to_dict(), "rows": rows}, cfg, "rows")
    return 0


def run_green(cfg: RunConfig) -> int:
    if not cfg.z:
        raise ValueError("green needs at least one --z")
    zs = [parse_complex(t) for t in cfg.z]
    obs_specs = cfg.observables or ("identity",) * len(zs)
    if len(obs_specs) != len(zs):
        raise ValueError("need one observable per z")
    obs = [parse_observable_spec(s, cfg.d, cfg.lam) for s in obs_specs]
    sv = expansion.green_series(_expansion_config(cfg, obs), zs)
    _write({"config": cfg.to_dict(), "result": sv.to_record()}, cfg)
    return 0


def run_corr2(cfg: RunConfig) -> int:
    """Current-current grid: boundary two-point values with velocity
    observables, combined over half-plane signs into the spectral density
    pairing (1/2)[Re G^{+-} - Re G^{++}]."""
    if cfg.grid is None:
        raise ValueError("corr2 needs --grid (E1); --grid2 defaults to --grid")
    gap = cfg.gap if cfg.gap is not None else 1.0
    obs = [velocity(cfg.nu, cfg.lam, cfg.d)] * 2
    xcfg = _expansion_config(cfg, obs)
    if xcfg.gap is None:
        xcfg = _expansion_config(
            RunConfig(**{**cfg.to_dict(), "gap": gap}), obs)
    e1s = parse_grid(cfg.grid)
    e2s = parse_grid(cfg.grid2) if cfg.grid2 else e1s
    rows = []
    for e1 in e1s:
        for e2 in e2s:
            if abs(e1 - e2) <= gap:
                continue
            gpp = expansion.npoint_boundary_series(xcfg, (1, 1), (e1, e2))
            gpm = expansion.npoint_boundary_series(xcfg, (1, -1), (e1, e2))
            k2 = 0.5 * (gpm.value.real - gpp.value.real)
            tail = 0.5 * (gpp.tail_bound + gpm.tail_bound)
            rows.append({
                "E1": float(e1), "E2": float(e2),
                "k2": k2, "k2_over_pi2": k2 / math.pi ** 2,
                "gpp_re": gpp.value.real, "gpp_im": gpp.value.imag,
                "gpm_re": gpm.value.real, "gpm_im": gpm.value.imag,
                "tail_bound": tail,
            })
    _write({"config": cfg.to_dict(), "rows": rows}, cfg, "rows")
    return 0


def run_validate(cfg: RunConfig) -> int:
    """Series against Monte Carlo on a grid of z = E + i eps."""
    if cfg.grid is None:
        raise ValueError("validate needs --grid")
    eps = cfg.eps if cfg.eps > 0.0 else 0.4
    xcfg = _expansion_config(cfg, ())
    box = oracle.FiniteBox(cfg.d, cfg.box_l)
    density = parse_density_spec(cfg.density)
    rows = []
    all_ok = True
    for E in parse_grid(cfg.grid):
        zk = complex(E, eps)
        sv = expansion.green_series(xcfg, (zk,))
        mean, stderr = oracle.mc_green(box, density, cfg.lam, zk, cfg.samples,
                                       cfg.seed, margin=cfg.margin,
                                       workers=cfg.workers())
        diff = abs(sv.value - mean)
        allowed = 3.0 * stderr + sv.tail_bound
        ok = bool(diff <= allowed)
        all_ok &= ok
        rows.append({
            "E": float(E),
            "series_re": sv.value.real, "series_im": sv.value.imag,
            "mc_re": mean.real, "mc_im": mean.imag,
            "stderr": stderr, "tail_bound": sv.tail_bound,
            "diff": diff, "allowed": allowed, "ok": ok,
        })
    payload = {"config": cfg.to_dict(), "rows": rows, "passed": all_ok}
    _write(payload, cfg, "rows")
    return 0 if all_ok else 2


def run_identities(cfg: RunConfig) -> int:
    results = identity_suite.run_identity_suite()
    for res in results:
        print(res.line())
    payload = {"config": cfg.to_dict(),
               "results": [asdict(r) for r in results],
               "passed": all(r.passed for r in results)}
    if cfg.output:
        with open(cfg.output, "w") as fh:
            json.dump(payload, fh, indent=2)
    return 0 if payload["passed"] else 2


COMMANDS = {
    "dos": run_dos,
    "green": run_green,
    "corr2": run_corr2,
    "validate": run_validate,
    "identities": run_identities,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anderson-corr",
        description="Walk-expansion correlation functions for the lattice "
                    "Anderson model at strong disorder.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON file mirroring the flags")
        p.add_argument("--density", default="gaussian:sigma2=1.0,r=1.0")
        p.add_argument("--d", type=int, default=1)
        p.add_argument("--lambda", dest="lam", type=float, default=0.05)
        p.add_argument("--obs", dest="observables", action="append", default=None,
                       help="observable spec; repeat once per resolvent factor")
        p.add_argument("--grid", default=None)
        p.add_argument("--grid2", default=None)
        p.add_argument("--sigmas", default="+")
        p.add_argument("--nmax", dest="n_max", type=int, default=6)
        p.add_argument("--gap", type=float, default=None)
        p.add_argument("--delta", type=float, default=None)
        p.add_argument("--box-l", dest="box_l", type=int, default=20)
        p.add_argument("--eps", type=float, default=0.0)
        p.add_argument("--samples", type=int, default=500)
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--margin", type=int, default=5)
        p.add_argument("--z", action="append", default=None,
                       help="spectral parameter like 0.3+0.4i; repeatable")
        p.add_argument("--nu", type=int, default=0)
        p.add_argument("--output", default=None)
        p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
        p.add_argument("--deterministic", action="store_true")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    return parser


def _preprocess_argv(argv):
    """Merge '--flag -2:2:5' into '--flag=-2:2:5' so values that start
    with a minus sign (grids, negative numbers) survive argparse."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok.startswith("--") and "=" not in tok:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            elif nxt.startswith("-") and len(nxt) > 1 and (nxt[1].isdigit() or nxt[1] == "."):
                out.append(f"{tok}={nxt}")
            else:
                out.append(tok)
                out.append(nxt)
        else:
            out.append(tok)
    return out


def config_from_args(argv) -> RunConfig:
    parser = build_parser()
    args = vars(parser.parse_args(_preprocess_argv(list(argv))))
    path = args.pop("config", None)
    if path:
        with open(path) as fh:
            file_conf = json.load(fh)
        merged = dict(file_conf)
        defaults = vars(parser.parse_args([args["command"]]))
        defaults.pop("config", None)
        for key, val in args.items():
            if val != defaults.get(key) or key not in merged:
                merged[key] = val
        args = merged
    args["observables"] = tuple(args.get("observables") or ())
    args["z"] = tuple(args.get("z") or ())
    return RunConfig.from_dict(args)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv if argv is not None else sys.argv[1:])
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        return COMMANDS[cfg.command](cfg)
    except (ValueError, AndersonCorrError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
