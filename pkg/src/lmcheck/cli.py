"""Command-line entry point (``lmcheck``).

Exit codes: 0 success, 1 verification failure, 2 input error, 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .corpus import CorpusError, Family, canonical_family
from .grid import (
    Flavor,
    GridError,
    GridFunction,
    MorreyIndices,
    SortedFamily,
    all_cubes,
    bmo_norm,
    contributions_csv,
    global_profile,
    ingest_grid,
)
from .rearrangement import (
    INFINITY,
    InvalidIndices,
    LorentzIndices,
    ProfileError,
    StepProfile,
    lorentz_norm,
    lp_norm,
    parse_step_profile,
    rearrange,
    w_functional,
    weak_lp_norm,
)
from .report import Number, _plain, curve_csv, dumps, reports_json
from .search import Objective, SearchConfig, extremal_search, growth_fit, trajectory_csv
from .suites import SUITES, SuiteParams, verify

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_USAGE = 0, 1, 2, 3

SPACES = ("lp", "weak_lp", "lorentz", "w", "morrey", "weak_morrey", "lm", "lm_star", "bmo")
GRID_ONLY = {"morrey", "weak_morrey", "lm", "lm_star", "bmo"}


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def format_value(x: float) -> str:
    """12 digits after the point in general format, e.g. ``2.000000000000``."""
    if math.isinf(x):
        return "inf"
    return f"{x:#.13g}"


def _exponent(text: str) -> float:
    t = str(text).strip().lower()
    if t in ("inf", "infinity", "∞"):
        return INFINITY
    try:
        v = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if math.isnan(v):
        raise argparse.ArgumentTypeError("NaN is not an index")
    return v


def _q_grid(text: str) -> tuple[float, ...]:
    """``4,8,16`` or a geometric range ``4:64`` (doubling)."""
    t = str(text).strip()
    try:
        if ":" in t:
            lo, hi = (float(x) for x in t.split(":"))
            if not (0 < lo < hi < INFINITY):
                raise ValueError
            out = []
            q = lo
            while q <= hi * (1 + 1e-12):
                out.append(q)
                q *= 2.0
            return tuple(out)
        vals = tuple(float(x) for x in t.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed q range {text!r}") from None
    if not vals or any(not (0 < v < INFINITY) for v in vals) or list(vals) != sorted(set(vals)):
        raise argparse.ArgumentTypeError(f"malformed q range {text!r}; need increasing finite values")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value file; command-line flags take precedence")
    common.add_argument("--p", type=_exponent)
    common.add_argument("--r", type=_exponent)
    common.add_argument("--kappa", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", type=Path)
    common.add_argument("--format", choices=("json", "csv"), type=str.lower)

    parser = _Parser(prog="lmcheck", description="Rearrangement norms and inequality verification.")
    parser.add_argument("--version", action="version", version=f"lmcheck {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("norm", parents=[common], help="evaluate one norm of a function file")
    p.add_argument("--input", type=Path)
    p.add_argument("--space", type=str.lower, choices=SPACES)

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("--suite", type=str.lower, choices=SUITES + ("all",))
    p.add_argument("--q", type=_q_grid, help="q-grid, e.g. 4,8,16,32,64 or 4:64")
    p.add_argument("--implicit-r", dest="implicit_r", type=_exponent)
    p.add_argument("--stability-seeds", dest="stability_seeds", type=int)

    p = sub.add_parser("search", parents=[common], help="extremal search for a constant")
    p.add_argument("--objective", type=str.lower)
    p.add_argument("--q", type=_exponent)
    p.add_argument("--iters", type=int)
    p.add_argument("--restarts", type=int)

    p = sub.add_parser("growth", parents=[common], help="growth order of the BMO interpolation ratio")
    p.add_argument("--family", type=str.lower, choices=("trunc_log", "indicator"))
    p.add_argument("--q", type=_q_grid)
    p.add_argument("--M", dest="M", type=float)
    p.add_argument("--N", dest="N", type=int)

    p = sub.add_parser("export", parents=[common], help="write a canonical family or per-cube contributions")
    p.add_argument("--family", type=str.lower, choices=tuple(f.value for f in Family))
    p.add_argument("--input", type=Path)
    p.add_argument("--space", type=str.lower, choices=SPACES)
    p.add_argument("--M", dest="M", type=float)
    p.add_argument("--N", dest="N", type=int)
    p.add_argument("--dim", type=int)
    return parser


DEFAULTS = {
    "norm": {"space": "lp", "p": 2.0, "kappa": 0.5},
    "verify": {"suite": "all", "seed": 0, "p": 2.0, "r": 3.0, "kappa": 0.5, "q": None,
               "implicit_r": None, "stability_seeds": 3},
    "search": {"objective": "thm31", "p": 2.0, "r": 3.0, "q": 4.0, "kappa": 0.5, "iters": 1000,
               "restarts": 4, "seed": 0},
    "growth": {"family": "trunc_log", "p": 2.0, "q": None, "M": 12.0, "N": 8192},
    "export": {"M": 12.0, "N": 64, "dim": 1, "kappa": 0.5},
}

_CONVERTERS = {"p": _exponent, "r": _exponent, "implicit_r": _exponent, "kappa": float, "seed": int,
               "iters": int, "restarts": int, "stability_seeds": int, "M": float, "N": int, "dim": int,
               "input": Path, "out": Path}


def read_config(path: Path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; keys use flag names without dashes."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        out[key] = value
    return out


def resolve(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS[args.command])
    if args.config is not None:
        for key, value in read_config(args.config).items():
            try:
                if key == "q":
                    cfg[key] = _q_grid(value) if args.command in ("verify", "growth") else _exponent(value)
                elif key in _CONVERTERS:
                    cfg[key] = _CONVERTERS[key](value)
                else:
                    cfg[key] = value.lower()
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from exc
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        cfg[key] = value
    return cfg


def _read_input(path: Path | None) -> StepProfile | GridFunction:
    if path is None:
        raise UsageError("--input is required")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text, parse_constant=lambda c: (_ for _ in ()).throw(InputError(f"non-finite {c}")))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from exc
    kind = doc.get("type") if isinstance(doc, dict) else None
    try:
        if kind == "step":
            return parse_step_profile(text)
        if kind == "grid":
            return ingest_grid(doc)
    except (ProfileError, GridError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    raise InputError(f'{path}: expected "type": "step" or "type": "grid"')


def _require(cfg: dict, key: str, space: str):
    if cfg.get(key) is None:
        raise InvalidIndices(f"space {space} needs --{key}")
    return cfg[key]


def compute_norm(item, space: str, cfg: dict) -> float:
    """Validate the indices for ``space`` first, then evaluate."""
    p = cfg.get("p")
    r = cfg.get("r")
    if space in GRID_ONLY and not isinstance(item, GridFunction):
        raise InvalidIndices(f"space {space} needs a grid input (cubes are not defined on a step profile)")
    if space == "bmo":
        return bmo_norm(item, all_cubes(item))
    if space == "w":
        if isinstance(item, GridFunction):
            return w_functional(rearrange(global_profile(item)), domain=item.volume)
        return w_functional(rearrange(item))
    p = _require(cfg, "p", space)
    if space in ("lp", "weak_lp", "lorentz"):
        if space == "lp":
            if not (p >= 1):
                raise InvalidIndices(f"L^p needs p in [1, inf], got {p:g}")
        else:
            LorentzIndices(p, INFINITY if space == "weak_lp" else _require(cfg, "r", space))
        rp = rearrange(global_profile(item) if isinstance(item, GridFunction) else item)
        if space == "lp":
            return lp_norm(rp, p)
        if space == "weak_lp":
            return weak_lp_norm(rp, p)
        return lorentz_norm(rp, LorentzIndices(p, r))
    flavor = {"morrey": Flavor.MORREY, "weak_morrey": Flavor.WEAK_MORREY, "lm": Flavor.LORENTZ_MORREY,
              "lm_star": Flavor.LORENTZ_MORREY_STAR}[space]
    if flavor in (Flavor.LORENTZ_MORREY, Flavor.LORENTZ_MORREY_STAR):
        _require(cfg, "r", space)
        idx = MorreyIndices(p, _require(cfg, "kappa", space), r)
    else:
        idx = MorreyIndices(p, _require(cfg, "kappa", space))
    if flavor is Flavor.LORENTZ_MORREY_STAR and p <= 1:
        raise InvalidIndices("lm_star needs p > 1")
    return SortedFamily(item, all_cubes(item)).norm(idx, flavor)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        try:
            out.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot write {out}: {exc}") from exc


def cmd_norm(cfg: dict) -> int:
    space = cfg["space"]
    if space not in SPACES:
        raise UsageError(f"unknown space {space!r}")
    item = _read_input(cfg.get("input"))
    if space == "lorentz" and cfg.get("r") is None:
        raise InvalidIndices("space lorentz needs --r")
    if space == "lp" and cfg.get("r") is not None:
        raise InvalidIndices("space lp takes no --r")
    value = compute_norm(item, space, cfg)
    print(format_value(value))
    if cfg.get("out") is not None:
        doc = {"space": space, "p": cfg.get("p"), "r": cfg.get("r"), "kappa": cfg.get("kappa"), "value": value}
        _emit(dumps({k: _plain(v) for k, v in doc.items() if v is not None or k == "value"}) + "\n", cfg["out"])
    return EXIT_OK


def cmd_verify(cfg: dict) -> int:
    suite = cfg["suite"]
    if suite not in SUITES + ("all",):
        raise UsageError(f"unknown suite {suite!r}")
    names = list(SUITES) if suite == "all" else [suite]
    sp = SuiteParams(p=cfg["p"], r=cfg["r"], kappa=cfg["kappa"], implicit_r=cfg.get("implicit_r"),
                     qs=tuple(cfg["q"]) if cfg.get("q") else SuiteParams.qs,
                     stability_seeds=max(1, int(cfg["stability_seeds"])))
    reports = verify(names, int(cfg["seed"]), sp)
    fmt = cfg.get("format") or "json"
    if fmt == "csv":
        lines = ["check_id,kind,cases,vacuous,violations,worst_ratio,constant_estimate,passed"]
        for r in reports:
            est = "" if r.constant_estimate is None else f"{r.constant_estimate:.11e}"
            lines.append(f"{r.check_id},{r.kind.value},{r.cases},{r.vacuous},{len(r.violations)},"
                         f"{r.worst_ratio:.11e},{est},{int(r.ok())}")
        _emit("\n".join(lines) + "\n", cfg.get("out"))
    else:
        _emit(reports_json(reports), cfg.get("out"))
    failed = [r.check_id for r in reports if not r.ok()]
    for r in reports:
        print(f"{'PASS' if r.ok() else 'FAIL'} {r.check_id} cases={r.cases} violations={len(r.violations)}",
              file=sys.stderr)
    if failed:
        print(f"{len(failed)} of {len(reports)} reports failed", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_search(cfg: dict) -> int:
    obj = Objective.parse(str(cfg["objective"]))
    if int(cfg["iters"]) < 0:
        raise UsageError("--iters must be non-negative")
    sc = SearchConfig(objective=obj, p=cfg["p"], r=cfg["r"], q=cfg["q"], kappa=cfg["kappa"],
                      iterations=int(cfg["iters"]), restarts=int(cfg["restarts"]), seed=int(cfg["seed"]))
    res = extremal_search(sc)
    print(format_value(res.ratio))
    print(json.dumps(res.descriptor()))
    out = cfg.get("out")
    if out is not None:
        doc = {"objective": obj.value, "ratio": Number(res.ratio), "best": res.descriptor(),
               "report": res.report.to_dict()}
        _emit(dumps(doc) + "\n", out)
        _emit(trajectory_csv(res.trajectory), out.with_suffix(".trajectory.csv"))
    return EXIT_OK


def cmd_growth(cfg: dict) -> int:
    qs = tuple(cfg["q"]) if cfg.get("q") else (4.0, 8.0, 16.0, 32.0, 64.0)
    rep = growth_fit(cfg["family"], p=cfg["p"], qs=qs, M=cfg["M"], N=int(cfg["N"]))
    csv_text = curve_csv(rep.curve)
    summary = dumps({"family": cfg["family"], "slope": float(rep.slope), "passed": bool(rep.passed),
                     "report": rep.to_dict()}) + "\n"
    fmt = cfg.get("format") or "csv"
    out = cfg.get("out")
    if out is None:
        sys.stdout.write(csv_text if fmt == "csv" else summary)
        if fmt == "csv":
            sys.stderr.write(summary)
    else:
        _emit(csv_text, out.with_suffix(".csv"))
        _emit(summary, out.with_suffix(".json"))
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_export(cfg: dict) -> int:
    if cfg.get("input") is not None:
        item = _read_input(cfg["input"])
        if not isinstance(item, GridFunction):
            raise InvalidIndices("contribution export needs a grid input")
        space = cfg.get("space") or "morrey"
        if space not in GRID_ONLY - {"bmo"} and space != "bmo":
            raise InvalidIndices(f"per-cube export supports {sorted(GRID_ONLY)}")
        fam = all_cubes(item)
        if space == "bmo":
            from .grid import bmo_contributions

            values = bmo_contributions(item, fam)
        else:
            compute_norm(item, space, cfg)  # validates indices
            flavor = {"morrey": Flavor.MORREY, "weak_morrey": Flavor.WEAK_MORREY, "lm": Flavor.LORENTZ_MORREY,
                      "lm_star": Flavor.LORENTZ_MORREY_STAR}[space]
            r = cfg.get("r") if flavor in (Flavor.LORENTZ_MORREY, Flavor.LORENTZ_MORREY_STAR) else None
            values = SortedFamily(item, fam).contributions(MorreyIndices(cfg["p"], cfg["kappa"], r), flavor)
        _emit(contributions_csv(item, fam, values), cfg.get("out"))
        return EXIT_OK
    if cfg.get("family") is None:
        raise UsageError("export needs --family or --input")
    fam = Family(cfg["family"])
    params = {"N": int(cfg["N"]), "dim": int(cfg["dim"])}
    if fam is Family.TRUNC_LOG:
        params["M"] = float(cfg["M"])
    if fam is Family.POWER:
        params["p"] = cfg.get("p", 2.0)
    try:
        item = canonical_family(fam, form="grid", **params)
    except CorpusError as exc:
        raise InvalidIndices(str(exc)) from exc
    _emit(json.dumps(item.to_json()) + "\n", cfg.get("out"))
    return EXIT_OK


COMMANDS = {"norm": cmd_norm, "verify": cmd_verify, "search": cmd_search, "growth": cmd_growth,
            "export": cmd_export}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except InputError as exc:
        print(f"lmcheck: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (UsageError, InvalidIndices, CorpusError) as exc:
        print(f"lmcheck: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GridError as exc:
        # a BMO-free family or malformed cube request: reported as misuse
        print(f"lmcheck: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
