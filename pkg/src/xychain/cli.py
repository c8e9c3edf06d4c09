"""Command-line interface: ``xychain <command> [options]``.

Commands
--------
partition   total and sector partition functions, free energy per site
genfunc     generating functional G(alpha, m)
correlator  <sigma^z> and <sigma^z_{n+1} sigma^z_1>, finite chain or ``--limit``
limit       infinite-chain free energy and magnetization
sweep       any of the above over a linear grid of one parameter
verify      the identity suite; exit 4 if any class fails

Options may also come from a JSON file (``--config``); command-line flags
override file values. Exit codes: 0 success, 2 invalid input, 3 numerical
failure (accuracy, singularity), 4 verification mismatch. Failures print one
JSON line ``{"error": kind, "message": ...}`` on standard error.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import derivatives as dv
from . import genfunc as gf
from . import partition
from .errors import (AccuracyFailure, InternalInconsistency, InvalidArgument, ResourceLimit,
                     SingularityError)
from .model import ChainSpec, Sector, Statistics
from .verify import run_verification

COMMANDS = ("partition", "genfunc", "correlator", "limit", "verify", "sweep")
SWEEP_TARGETS = ("partition", "genfunc", "correlator", "limit")
SWEEP_PARAMS = ("M", "m", "gamma", "h", "beta", "alpha_re", "alpha_im")

COLUMNS = {
    "partition": ["M", "gamma", "h", "beta", "Z", "logZ", "free_energy",
                  "Z_plus_F", "Z_minus_F", "Z_plus_B", "Z_minus_B"],
    "genfunc": ["M", "m", "gamma", "h", "beta", "alpha_re", "alpha_im", "G_re", "G_im", "Z"],
    "correlator": ["M", "gamma", "h", "beta", "n", "sigma_z", "zz"],
    "limit": ["gamma", "h", "beta", "free_energy", "sigma_z"],
    "verify": ["identity_class", "checks", "max_residual", "tolerance", "status"],
}


class ConfigError(InvalidArgument):
    """One or more configuration fields are invalid; ``problems`` names each."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class RunConfig:
    """Validated options of one invocation."""

    command: str
    M: int = 4
    m: int = 0
    gamma: float = 0.0
    h: float = 0.0
    beta: float = 1.0
    alpha: complex = 0j
    representation: str = "MxM"
    n: tuple = (1,)
    limit: bool = False
    target: str = "genfunc"
    axis: str = ""
    output: str = "-"
    format: str = "csv"
    tol: float = 1e-12
    oracle_tol: float = 1e-10
    max_M: int = 8
    seed: int = 0
    jobs: int = 1

    def spec(self, **changes) -> ChainSpec:
        base = dict(M=self.M, m=self.m, gamma=self.gamma, h=self.h, beta=self.beta,
                    alpha=self.alpha)
        base.update(changes)
        return ChainSpec(**base)


DEFAULTS = {f.name: f.default for f in fields(RunConfig) if f.name != "command"}
CONFIG_KEYS = {"command"} | set(DEFAULTS)


def parse_alpha(text) -> complex:
    """Parse ``"re[+im i]"``, e.g. ``"0.5"``, ``"0.3+0.4i"``, ``"0-3.14159i"``.

    >>> parse_alpha("0.3+0.4i")
    (0.3+0.4j)
    >>> parse_alpha("-1.5")
    (-1.5+0j)
    """
    if isinstance(text, (int, float, complex)) and not isinstance(text, bool):
        return complex(text)
    if not isinstance(text, str):
        raise InvalidArgument(f"alpha must be a string 're[+im i]' or a number, got {text!r}")
    s = text.strip().replace(" ", "")
    m = re.fullmatch(r"([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
                     r"(?:([+-](?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)i)?", s)
    if not m:
        raise InvalidArgument(f"alpha must look like 're[+im i]', got {text!r}")
    re_part = float(m.group(1))
    im = m.group(2)
    if im is None:
        return complex(re_part, 0.0)
    if im in ("+", "-"):
        im += "1"
    return complex(re_part, float(im))


def parse_separations(text) -> tuple:
    """``"3"``, ``"1..10"`` or ``"1,2,5"`` into a tuple of positive integers."""
    if isinstance(text, int) and not isinstance(text, bool):
        vals = [text]
    elif isinstance(text, (list, tuple)):
        vals = list(text)
    elif isinstance(text, str):
        t = text.strip()
        if ".." in t:
            lo, _, hi = t.partition("..")
            try:
                vals = list(range(int(lo), int(hi) + 1))
            except ValueError:
                raise InvalidArgument(f"bad separation range {text!r}") from None
        else:
            try:
                vals = [int(x) for x in t.split(",")]
            except ValueError:
                raise InvalidArgument(f"bad separation list {text!r}") from None
    else:
        raise InvalidArgument(f"bad separations {text!r}")
    if not vals or any(isinstance(v, bool) or not isinstance(v, int) or v < 1 for v in vals):
        raise InvalidArgument(f"separations must be integers >= 1, got {text!r}")
    return tuple(vals)


def parse_axis(text: str):
    """``"param:start:stop:count"`` into its four parts."""
    parts = str(text).split(":")
    if len(parts) != 4 or parts[0] not in SWEEP_PARAMS:
        raise InvalidArgument(f"axis must be 'param:start:stop:count' with param in "
                              f"{', '.join(SWEEP_PARAMS)}, got {text!r}")
    try:
        start, stop, count = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError:
        raise InvalidArgument(f"bad numbers in axis {text!r}") from None
    if count < 1:
        raise InvalidArgument(f"sweep count must be >= 1, got {count}")
    return parts[0], start, stop, count


def _as_int(name, v, problems):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        problems.append(f"{name}: expected an integer, got {v!r}")
        return None
    return int(v)


def _as_float(name, v, problems):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        problems.append(f"{name}: expected a finite number, got {v!r}")
        return None
    return float(v)


def build_config(values: dict) -> RunConfig:
    """Validate a merged key/value mapping; every invalid field is reported."""
    problems = []
    unknown = sorted(set(values) - CONFIG_KEYS)
    for k in unknown:
        problems.append(f"{k}: unknown key")
    v = dict(DEFAULTS)
    v.update({k: values[k] for k in values if k in CONFIG_KEYS})
    cmd = values.get("command")
    if cmd not in COMMANDS:
        problems.append(f"command: must be one of {', '.join(COMMANDS)}, got {cmd!r}")
    for k in ("M", "m", "max_M", "seed", "jobs"):
        v[k] = _as_int(k, v[k], problems)
    for k in ("gamma", "h", "beta", "tol", "oracle_tol"):
        v[k] = _as_float(k, v[k], problems)
    try:
        v["alpha"] = parse_alpha(v["alpha"])
    except InvalidArgument as e:
        problems.append(f"alpha: {e}")
    try:
        v["n"] = parse_separations(v["n"])
    except InvalidArgument as e:
        problems.append(f"n: {e}")
    try:
        v["representation"] = str(gf.Representation.parse(str(v["representation"])))
    except InvalidArgument as e:
        problems.append(f"representation: {e}")
    if not isinstance(v["limit"], bool):
        problems.append(f"limit: expected true/false, got {v['limit']!r}")
    if v["format"] not in ("csv", "json"):
        problems.append(f"format: must be csv or json, got {v['format']!r}")
    if v["target"] not in SWEEP_TARGETS:
        problems.append(f"target: must be one of {', '.join(SWEEP_TARGETS)}, got {v['target']!r}")
    if not isinstance(v["output"], str):
        problems.append(f"output: expected a path, got {v['output']!r}")
    if cmd == "sweep":
        try:
            parse_axis(v["axis"])
        except InvalidArgument as e:
            problems.append(f"axis: {e}")
    for k in ("tol", "oracle_tol"):
        if v[k] is not None and not v[k] > 0:
            problems.append(f"{k}: must be > 0, got {v[k]}")
    if v["jobs"] is not None and v["jobs"] < 1:
        problems.append(f"jobs: must be >= 1, got {v['jobs']}")
    if v["max_M"] is not None and not 2 <= v["max_M"] <= 12:
        problems.append(f"max_M: must be in [2, 12], got {v['max_M']}")
    # physics fields: reuse the model's own rules
    if v["M"] is not None and (v["M"] < 2 or v["M"] % 2):
        problems.append(f"M: must be even and >= 2, got {v['M']}")
    elif v["M"] is not None and v["m"] is not None and not 0 <= v["m"] <= v["M"]:
        problems.append(f"m: must satisfy 0 <= m <= M={v['M']}, got {v['m']}")
    if v["h"] is not None and v["h"] < 0:
        problems.append(f"h: must be >= 0, got {v['h']}")
    if v["beta"] is not None and v["beta"] < 0:
        problems.append(f"beta: must be >= 0, got {v['beta']}")
    if problems:
        raise ConfigError(problems)
    v["command"] = cmd
    return RunConfig(**v)


def load_config(path: str, overrides: dict | None = None) -> RunConfig:
    """Read a JSON object of options, apply ``overrides`` and validate.

    Raises
    ------
    ConfigError
        Missing file, malformed JSON, unknown keys or invalid values.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError([f"config: file not found: {path}"]) from None
    except json.JSONDecodeError as e:
        raise ConfigError([f"config: malformed JSON ({e})"]) from None
    if not isinstance(data, dict):
        raise ConfigError(["config: top level must be a JSON object"])
    data = dict(data)
    data.update(overrides or {})
    return build_config(data)


# --------------------------------------------------------------------------
# computations


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.16e}"


def rows_partition(cfg: RunConfig, spec: ChainSpec) -> list:
    logz = partition.log_total_partition(spec)
    secz = [partition.sector_partition(spec, s, st)
            for s, st in ((Sector.PLUS, Statistics.F), (Sector.MINUS, Statistics.F),
                          (Sector.PLUS, Statistics.B), (Sector.MINUS, Statistics.B))]
    fe = partition.free_energy(spec) if spec.beta > 0 else float("nan")
    with np.errstate(over="ignore"):
        z = float(np.exp(logz))  # inf for very long chains; logZ stays exact
    return [[spec.M, spec.gamma, spec.h, spec.beta, z, logz, fe, *secz]]


def rows_genfunc(cfg: RunConfig, spec: ChainSpec) -> list:
    G = gf.assemble_generating_functional(spec, gf.Representation.parse(cfg.representation))
    Z = partition.total_partition(spec)
    return [[spec.M, spec.m, spec.gamma, spec.h, spec.beta, spec.alpha.real, spec.alpha.imag,
             G.real, G.imag, Z]]


def rows_correlator(cfg: RunConfig, spec: ChainSpec) -> list:
    if cfg.limit:
        sz = dv.sigma_z_limit(spec.gamma, spec.h, spec.beta, cfg.tol)
        return [["limit", spec.gamma, spec.h, spec.beta, n, sz,
                 sz * sz + dv.zz_connected_limit(spec.gamma, spec.h, spec.beta, n, cfg.tol)]
                for n in cfg.n]
    bad = [n for n in cfg.n if n > spec.M - 1]
    if bad:
        raise InvalidArgument(f"separations {bad} exceed M-1={spec.M - 1}")
    tc = dv.thermal_correlators(spec.replace(m=1), cfg.n)
    return [[spec.M, spec.gamma, spec.h, spec.beta, n, tc.sigma_z, tc.zz[n]] for n in cfg.n]


def rows_limit(cfg: RunConfig, spec: ChainSpec) -> list:
    return [[spec.gamma, spec.h, spec.beta,
             partition.free_energy_limit(spec.gamma, spec.h, spec.beta, cfg.tol),
             dv.sigma_z_limit(spec.gamma, spec.h, spec.beta, cfg.tol)]]


RUNNERS = {"partition": rows_partition, "genfunc": rows_genfunc,
           "correlator": rows_correlator, "limit": rows_limit}


def sweep_specs(cfg: RunConfig) -> list:
    param, start, stop, count = parse_axis(cfg.axis)
    pts = np.linspace(start, stop, count) if count > 1 else np.array([start])
    specs = []
    for x in pts:
        if param in ("M", "m"):
            if abs(x - round(x)) > 1e-9:
                raise InvalidArgument(f"sweep over {param} needs integer points, got {x}")
            specs.append(cfg.spec(**{param: int(round(x))}))
        elif param == "alpha_re":
            specs.append(cfg.spec(alpha=complex(x, cfg.alpha.imag)))
        elif param == "alpha_im":
            specs.append(cfg.spec(alpha=complex(cfg.alpha.real, x)))
        else:
            specs.append(cfg.spec(**{param: float(x)}))
    return specs


def run(cfg: RunConfig):
    """Execute one configuration; returns ``(columns, rows, exit_status)``."""
    if cfg.command == "verify":
        classes = run_verification(cfg.max_M, cfg.oracle_tol, cfg.seed)
        rows = [[c.name, len(c.residuals), c.max_residual, c.tolerance,
                 "pass" if c.passed else "FAIL"] for c in classes]
        return COLUMNS["verify"], rows, 0 if all(c.passed for c in classes) else 4
    if cfg.command == "sweep":
        specs = sweep_specs(cfg)
        fn = RUNNERS[cfg.target]
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            chunks = list(pool.map(lambda s: fn(cfg, s), specs))
        return COLUMNS[cfg.target], [r for ch in chunks for r in ch], 0
    return COLUMNS[cfg.command], RUNNERS[cfg.command](cfg, cfg.spec()), 0


def render(columns, rows, fmt: str) -> str:
    if fmt == "csv":
        lines = [",".join(columns)] + [",".join(_fmt(x) for x in r) for r in rows]
        return "\n".join(lines) + "\n"
    out = []
    for r in rows:
        items = []
        for k, x in zip(columns, r):
            val = json.dumps(x) if isinstance(x, str) else _fmt(x)
            if val in ("nan", "inf", "-inf"):
                val = json.dumps(val)
            items.append(f"{json.dumps(k)}: {val}")
        out.append("  {" + ", ".join(items) + "}")
    return "[\n" + ",\n".join(out) + "\n]\n"


# --------------------------------------------------------------------------
# argument parsing


def _parser() -> argparse.ArgumentParser:
    d = DEFAULTS
    p = argparse.ArgumentParser(prog="xychain", description=__doc__.split("\n\n")[0],
                                formatter_class=argparse.RawDescriptionHelpFormatter,
                                epilog="Exit codes: 0 ok, 2 invalid input, 3 numerical failure, "
                                       "4 verification mismatch.")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")
    S = argparse.SUPPRESS

    def common(sp, physics=True):
        sp.add_argument("--config", default=S, help="JSON file of options; flags override it")
        sp.add_argument("--output", "-o", default=S, help=f"output path, '-' for stdout "
                                                          f"(default {d['output']})")
        sp.add_argument("--format", choices=("csv", "json"), default=S,
                        help=f"output format (default {d['format']})")
        if physics:
            sp.add_argument("--M", type=int, default=S, help=f"sites, even (default {d['M']})")
            sp.add_argument("--m", type=int, default=S,
                            help=f"window length of Q(m) (default {d['m']})")
            sp.add_argument("--gamma", type=float, default=S,
                            help=f"anisotropy (default {d['gamma']})")
            sp.add_argument("--h", type=float, default=S, help=f"field, >= 0 (default {d['h']})")
            sp.add_argument("--beta", type=float, default=S,
                            help=f"inverse temperature (default {d['beta']})")
            sp.add_argument("--alpha", default=S,
                            help="counting parameter 're[+im i]' (default 0)")
            sp.add_argument("--representation", default=S,
                            help=f"MxM, 2Mx2M or series[:K] (default {d['representation']})")
            sp.add_argument("--tol", type=float, default=S,
                            help=f"quadrature tolerance (default {d['tol']})")

    helps = {"partition": "partition functions and free energy",
             "genfunc": "generating functional G(alpha, m)",
             "correlator": "z-magnetization and zz correlator",
             "limit": "infinite-chain free energy and magnetization",
             "sweep": "evaluate a command over a parameter grid",
             "verify": "run the identity suite"}
    for name in COMMANDS:
        sp = sub.add_parser(name, help=helps[name], description=helps[name])
        common(sp, physics=name != "verify")
        if name in ("correlator", "sweep"):
            sp.add_argument("--n", default=S,
                            help="separations: '3', '1..10' or '1,2,5' (default 1)")
            sp.add_argument("--limit", action="store_true", default=S,
                            help="use the infinite-chain formulas")
        if name == "sweep":
            sp.add_argument("--target", choices=SWEEP_TARGETS, default=S,
                            help=f"command evaluated at each point (default {d['target']})")
            sp.add_argument("--axis", default=S,
                            help="param:start:stop:count, param in " + ", ".join(SWEEP_PARAMS))
            sp.add_argument("--jobs", type=int, default=S,
                            help=f"concurrent evaluations (default {d['jobs']})")
        if name == "verify":
            sp.add_argument("--max-M", dest="max_M", type=int, default=S,
                            help=f"largest chain checked against diagonalization "
                                 f"(default {d['max_M']})")
            sp.add_argument("--tol", dest="oracle_tol", type=float, default=S,
                            help=f"oracle tolerance (default {d['oracle_tol']})")
            sp.add_argument("--seed", type=int, default=S,
                            help=f"random seed (default {d['seed']})")
    return p


def _error(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        ns = _parser().parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    flags = vars(ns)
    path = flags.pop("config", None)
    try:
        cfg = load_config(path, flags) if path else build_config(flags)
        columns, rows, status = run(cfg)
    except (InvalidArgument, ResourceLimit) as e:
        return _error("validation", str(e), 2)
    except AccuracyFailure as e:
        return _error("accuracy", str(e), 3)
    except (SingularityError, InternalInconsistency) as e:
        return _error("numerical", str(e), 3)
    text = render(columns, rows, cfg.format)
    if cfg.output == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    if status == 4:
        failed = [r[0] for r in rows if r[-1] != "pass"]
        return _error("mismatch", f"identity classes failed: {', '.join(failed)}", 4)
    return status


if __name__ == "__main__":
    sys.exit(main())
