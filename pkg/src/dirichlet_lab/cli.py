"""Command-line front end.

Exit codes: 0 property verified, 1 property falsified (the report carries a
witness), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .bdl import bdl_decompose, classify_locality
from .domain import Domain
from .errors import ConfigError, DirichletLabError
from .forms import (
    BoundaryMeasure,
    FormMatrix,
    dirichlet_form,
    neumann_form,
    nonlocal_robin_form,
    robin_form,
)
from .semigroup import DEFAULT_TIMES, DOMINATION_RTOL, dominates, is_positivity_preserving, profile_csv
from .verify import (
    GENERATORS,
    check_sandwich,
    convergence_csv,
    eigen_convergence,
    example_aw45,
    extract_boundary_measure,
    locality_from_domination,
    sweep_random,
)

log = logging.getLogger("dirichlet_lab")

FORM_KINDS = ("neumann", "dirichlet", "robin", "nonlocal-robin")
EXIT_OK, EXIT_FALSIFIED, EXIT_INPUT = 0, 1, 2


@dataclass
class RunConfig:
    domain: dict[str, Any]
    form: dict[str, Any] = field(default_factory=lambda: {"kind": "neumann"})
    times: list[float] | None = None
    tol: float | None = None
    seed: int | None = None
    out: str | None = None

    KEYS = ("domain", "form", "times", "tol", "seed", "out")

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - set(cls.KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "domain" not in d:
            raise ConfigError("config needs a 'domain' entry")
        form = dict(d.get("form", {"kind": "neumann"}))
        kind = form.get("kind")
        if kind not in FORM_KINDS:
            raise ConfigError(f"form kind must be one of {FORM_KINDS}, got {kind!r}")
        allowed = {"kind"} | {"robin": {"mu"}, "nonlocal-robin": {"B"}}.get(kind, set())
        if set(form) - allowed:
            raise ConfigError(f"unknown keys for {kind} form: {sorted(set(form) - allowed)}")
        if kind == "robin" and "mu" not in form:
            raise ConfigError("robin form needs 'mu'")
        if kind == "nonlocal-robin" and "B" not in form:
            raise ConfigError("nonlocal-robin form needs 'B'")
        times = d.get("times")
        return cls(
            domain=dict(d["domain"]),
            form=form,
            times=[float(t) for t in times] if times is not None else None,
            tol=float(d["tol"]) if d.get("tol") is not None else None,
            seed=int(d["seed"]) if d.get("seed") is not None else None,
            out=d.get("out"),
        )

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"domain": self.domain, "form": self.form}
        for key in ("times", "tol", "seed", "out"):
            if getattr(self, key) is not None:
                d[key] = getattr(self, key)
        return d

    def build_domain(self) -> Domain:
        return Domain.from_dict(self.domain)

    def build_form(self) -> FormMatrix:
        dom = self.build_domain()
        kind = self.form["kind"]
        if kind == "neumann":
            return neumann_form(dom)
        if kind == "dirichlet":
            return dirichlet_form(dom)
        if kind == "robin":
            return robin_form(dom, BoundaryMeasure.from_json(self.form["mu"]))
        return nonlocal_robin_form(dom, self.form["B"])


def _clean(obj):
    """Replace non-finite floats so the output is strict JSON."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _dump(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _emit(text: str, path: str | None):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _parse_times(text: str | None, default=DEFAULT_TIMES) -> tuple[float, ...]:
    if text is None:
        return tuple(default)
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"--times must be a comma separated list of numbers, got {text!r}") from None


def _config(args) -> RunConfig | None:
    return RunConfig.from_dict(_load_json(args.config)) if args.config else None


def _times(args, cfg: RunConfig | None):
    if args.times is not None:
        return _parse_times(args.times)
    if cfg is not None and cfg.times is not None:
        return tuple(cfg.times)
    return DEFAULT_TIMES


def _rtol(args, cfg):
    if args.tol is not None:
        return args.tol
    if cfg is not None and cfg.tol is not None:
        return cfg.tol
    return DOMINATION_RTOL


def _out(args, cfg):
    return args.out or (cfg.out if cfg is not None else None)


def _form(args, cfg, attr="form") -> FormMatrix:
    path = getattr(args, attr, None)
    if path:
        return FormMatrix.from_dict(_load_json(path))
    if cfg is None:
        raise ConfigError(f"need --{attr} FILE or --config FILE")
    return cfg.build_form()


# ------------------------------------------------------------------ commands


def cmd_build(args) -> int:
    cfg = _config(args)
    if cfg is None:
        raise ConfigError("build needs --config FILE")
    _emit(_dump(cfg.build_form().to_dict()), _out(args, cfg))
    return EXIT_OK


def cmd_decompose(args) -> int:
    cfg = _config(args)
    form = _form(args, cfg)
    parts = bdl_decompose(form)
    _emit(_dump(parts.to_dict(form.domain)), _out(args, cfg))
    return EXIT_OK


def cmd_extract(args) -> int:
    cfg = _config(args)
    res = extract_boundary_measure(_form(args, cfg))
    _emit(_dump(res.to_dict()), _out(args, cfg))
    return EXIT_OK if res.success else EXIT_FALSIFIED


def cmd_check(args) -> int:
    cfg = _config(args)
    times, rtol = _times(args, cfg), _rtol(args, cfg)
    kind = args.property
    if kind == "positivity":
        rep = is_positivity_preserving(_form(args, cfg), times, rtol, workers=args.workers)
        ok, body = rep.verdict, rep.to_dict()
    elif kind == "domination":
        lower, upper = _form(args, cfg, "lower"), _form(args, cfg, "upper")
        rep = dominates(lower, upper, times, rtol, workers=args.workers)
        ok, body = rep.verdict, rep.to_dict()
    elif kind == "sandwich":
        rep = check_sandwich(_form(args, cfg), times, rtol, workers=args.workers)
        ok, body = rep.verdict, rep.to_dict()
    else:
        form = _form(args, cfg)
        rep = locality_from_domination(form, times, rtol)
        loc = classify_locality(form)
        body = rep.to_dict()
        body["classification"] = {"local": loc.local, "witness": list(loc.witness) if loc.witness else None, "J": loc.J}
        ok = rep.verdict == "Local"
    body = {"property": kind, **body}
    _emit(_dump(body), _out(args, cfg))
    return EXIT_OK if ok else EXIT_FALSIFIED


def cmd_example_aw45(args) -> int:
    times = _parse_times(args.times)
    rep = example_aw45(args.n, times, t_max=args.t_max)
    out = args.out
    _emit(_dump(rep.to_dict()), out)
    csv_path = args.csv or (str(Path(out).with_suffix(".csv")) if out else None)
    if csv_path:
        Path(csv_path).write_text(profile_csv(rep.profile))
    else:
        sys.stdout.write(profile_csv(rep.profile))
    return EXIT_OK if all(rep.expectations().values()) else EXIT_FALSIFIED


def cmd_sweep(args) -> int:
    cfg = _config(args)
    seed = args.seed if args.seed is not None else (cfg.seed if cfg and cfg.seed is not None else 0)
    dom = cfg.build_domain() if cfg is not None else None
    rep = sweep_random(args.trials, seed, args.generator, dom, _times(args, cfg), _rtol(args, cfg), workers=args.workers)
    _emit(_dump(rep.to_dict()), _out(args, cfg))
    return EXIT_OK if not rep.failures else EXIT_FALSIFIED


def cmd_eig(args) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"--sizes must be a comma separated list of integers, got {args.sizes!r}") from None
    rows = eigen_convergence(args.kind, sizes, args.k, args.beta)
    _emit(convergence_csv(rows), args.out)
    return EXIT_OK


# -------------------------------------------------------------------- parser


def _common(suppress: bool) -> argparse.ArgumentParser:
    # global flags may appear before or after the subcommand; the subcommand
    # copies must not reset values parsed at the top level
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="RunConfig JSON file", **kw)
    p.add_argument("--out", help="output file (default: standard output)", **kw)
    p.add_argument("--seed", type=int, help="random seed", **kw)
    p.add_argument("--times", help="comma separated time grid", **kw)
    p.add_argument("--tol", type=float, help="relative tolerance for entrywise comparisons", **kw)
    p.add_argument("--workers", type=int, help="thread pool size for independent evaluations", **kw)
    p.add_argument("-v", "--verbose", action="store_true", **kw)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dirichlet-lab", description=__doc__, parents=[_common(False)])
    common = _common(True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="assemble a form from a config")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("decompose", parents=[common], help="Beurling-Deny-LeJan parts of a form")
    p.add_argument("--form")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("extract-measure", parents=[common], help="recover a boundary measure")
    p.add_argument("--form")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("check", parents=[common], help="positivity, domination, sandwich or locality")
    checks = p.add_subparsers(dest="property", required=True)
    for name in ("positivity", "sandwich", "locality"):
        c = checks.add_parser(name, parents=[common])
        c.add_argument("--form")
        c.set_defaults(func=cmd_check)
    c = checks.add_parser("domination", parents=[common])
    c.add_argument("--lower", required=True)
    c.add_argument("--upper", required=True)
    c.set_defaults(func=cmd_check)

    p = sub.add_parser("example-aw45", parents=[common], help="nonlocal Robin example with B = [[1,1],[1,1]]")
    p.add_argument("--n", type=int, default=33)
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--csv", help="profile CSV path (default: --out with .csv suffix)")
    p.set_defaults(func=cmd_example_aw45)

    p = sub.add_parser("sweep", parents=[common], help="randomized sweep")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--generator", choices=GENERATORS, default="planted-measure")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eig", parents=[common], help="eigenvalue convergence table")
    p.add_argument("--kind", choices=("neumann", "dirichlet", "robin"), default="neumann")
    p.add_argument("--sizes", default="17,33,65,129")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--beta", type=float, default=1.0)
    p.set_defaults(func=cmd_eig)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (DirichletLabError, OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"dirichlet-lab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
