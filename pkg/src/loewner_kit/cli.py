"""Command-line front end: file I/O, deterministic reports, demos.

Commands: evolve, trace, extract, classify, family-verify, chain, demo.
All outputs are written atomically (temp file + rename), floats are
formatted with 17 significant digits, JSON keys are sorted, and every JSON
report echoes the resolved configuration under ``config`` together with a
``schema_version`` field.  Identical configurations produce byte-identical
outputs on the same platform; no environment variables are consulted.

Exit codes: 0 success, 2 parse/usage errors, 3 numerical failures.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .chains import (
    cantor_family,
    chain_report,
    chordal_admissibility_probe,
    radius_profile,
    scaled_disks,
    slit_half_plane,
    spiral_curve,
)
from .chordal import extract_driving, solve_phi, trace_from_driving, TraceSample
from .classes import classify
from .driving import DrivingFunction
from .errors import LoewnerKitError, EmptyFile, MonotoneViolation, ParseError
from .families import (
    chordal_chain,
    chordal_family,
    classify_beta_limit,
    goryainov_ba_check,
    radial_chain,
    radial_family,
    translation_chain,
    translation_family,
    verify_chain_association,
    verify_ef_axioms,
)
from .maps import map_from_spec

SCHEMA_VERSION = "1"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_atomic(path: str, data: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".loewner-kit-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: str, header: str, rows: Sequence[Sequence[float]]) -> None:
    lines = [header]
    lines.extend(",".join(_fmt(x) for x in row) for row in rows)
    _write_atomic(path, "\n".join(lines) + "\n")


def _write_report(path: Optional[str], payload: dict, config: dict) -> None:
    payload = dict(payload)
    payload["schema_version"] = SCHEMA_VERSION
    payload["config"] = config
    text = json.dumps(payload, sort_keys=True, indent=2, allow_nan=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        _write_atomic(path, text)


def _config_of(args: argparse.Namespace) -> dict:
    skip = {"func"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        out[k] = v
    return out


# ---------------------------------------------------------------------------
# input parsing
# ---------------------------------------------------------------------------


def parse_driving_csv(
    path: str, interp: str = "const", horizon: Optional[float] = None
) -> DrivingFunction:
    """Read a driving CSV with header ``t,lambda``.

    Times must strictly increase from 0; a single row needs an explicit
    horizon.  Violations carry the offending line number.
    """
    rows: List[tuple] = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    body = [ln for ln in lines if ln.strip()]
    if not body:
        raise EmptyFile(f"{path}: no content")
    start = 1 if body[0].replace(" ", "").lower().startswith("t,lambda") else 0
    if len(body) <= start:
        raise EmptyFile(f"{path}: no data rows")
    prev_t = None
    for ln_no, line in enumerate(body[start:], start=start + 1):
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"{path}:{ln_no}: expected 't,lambda', got {line!r}")
        try:
            t, lam = float(parts[0]), float(parts[1])
        except ValueError:
            raise ParseError(f"{path}:{ln_no}: non-numeric row {line!r}")
        if prev_t is not None and t <= prev_t:
            raise MonotoneViolation(
                f"{path}:{ln_no}: time {t} does not increase past {prev_t}"
            )
        prev_t = t
        rows.append((t, lam))
    if rows[0][0] != 0.0:
        raise MonotoneViolation(f"{path}:{1 + start}: first time must be 0")
    mode = {"const": "const", "linear": "linear"}[interp]
    return DrivingFunction(tuple(rows), mode, horizon)


def _parse_points_csv(path: str) -> np.ndarray:
    with open(path) as fh:
        body = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not body:
        raise EmptyFile(f"{path}: no content")
    start = 1 if body[0].replace(" ", "").lower().startswith("re,im") else 0
    pts = []
    for ln_no, line in enumerate(body[start:], start=start + 1):
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"{path}:{ln_no}: expected 're,im', got {line!r}")
        try:
            pts.append(complex(float(parts[0]), float(parts[1])))
        except ValueError:
            raise ParseError(f"{path}:{ln_no}: non-numeric row {line!r}")
    if not pts:
        raise EmptyFile(f"{path}: no data rows")
    return np.array(pts)


def _parse_trace_csv(path: str) -> List[TraceSample]:
    with open(path) as fh:
        body = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not body:
        raise EmptyFile(f"{path}: no content")
    header = body[0].replace(" ", "").lower()
    start = 1 if header.startswith(("t,re,im", "re,im")) else 0
    three_cols = not header.startswith("re,im")
    out = []
    for ln_no, line in enumerate(body[start:], start=start + 1):
        parts = line.split(",")
        try:
            if len(parts) == 3:
                out.append(TraceSample(float(parts[0]), complex(float(parts[1]), float(parts[2]))))
            elif len(parts) == 2 and not three_cols:
                out.append(TraceSample(float(ln_no), complex(float(parts[0]), float(parts[1]))))
            else:
                raise ValueError
        except ValueError:
            raise ParseError(f"{path}:{ln_no}: bad trace row {line!r}")
    if not out:
        raise EmptyFile(f"{path}: no data rows")
    return out


def _parse_grid(spec: str) -> np.ndarray:
    try:
        t0, t1, n = spec.split(":")
        t0, t1, n = float(t0), float(t1), int(n)
    except ValueError:
        raise ParseError(f"grid must be 't0:t1:n', got {spec!r}")
    if n < 2 or t1 <= t0:
        raise ParseError(f"grid needs t1 > t0 and n >= 2, got {spec!r}")
    return np.linspace(t0, t1, n)


def _parse_point(spec: str) -> complex:
    try:
        re, im = spec.split(",")
        return complex(float(re), float(im))
    except ValueError:
        raise ParseError(f"point must be 're,im', got {spec!r}")


_GAMMA_NAMES = {
    "sqrt": math.sqrt, "sin": math.sin, "cos": math.cos, "exp": math.exp,
    "log": math.log, "pi": math.pi, "min": min, "max": max, "abs": abs,
}


def _gamma_from_expr(expr: str):
    if expr == "cantor":
        return None
    code = compile(expr, "<gamma>", "eval")
    for name in code.co_names:
        if name not in _GAMMA_NAMES and name != "t":
            raise ParseError(f"gamma expression uses unknown name {name!r}")

    def gamma(t: float) -> float:
        return float(eval(code, {"__builtins__": {}}, {**_GAMMA_NAMES, "t": t}))

    return gamma


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_evolve(args) -> int:
    driving = parse_driving_csv(args.driving, args.interp, args.horizon)
    pts = _parse_points_csv(args.points)
    if args.threads > 1:
        chunks = np.array_split(np.arange(pts.size), args.threads)
        results = [None] * len(chunks)
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            futures = [
                pool.submit(
                    solve_phi, driving, args.time_from, args.time_to, pts[idx], args.nsub
                )
                for idx in chunks if idx.size
            ]
            gathered = [f.result() for f in futures]
        out = np.concatenate(gathered)
    else:
        out = solve_phi(driving, args.time_from, args.time_to, pts, args.nsub)
    _write_csv(args.out, "re,im", [(w.real, w.imag) for w in out])
    return 0


def _cmd_trace(args) -> int:
    driving = parse_driving_csv(args.driving, args.interp, args.horizon)
    grid = _parse_grid(args.grid)
    samples = trace_from_driving(driving, grid)
    _write_csv(args.out, "t,re,im", [(s.t, s.tip.real, s.tip.imag) for s in samples])
    return 0


def _cmd_extract(args) -> int:
    samples = _parse_trace_csv(args.trace)
    driving = extract_driving(samples)
    _write_csv(args.out, "t,lambda", [(t, lam) for t, lam in driving.knots])
    return 0


def _cmd_classify(args) -> int:
    with open(args.map) as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{args.map}: invalid JSON ({exc})")
    report = classify(map_from_spec(spec))
    _write_report(args.out, report.to_dict(), _config_of(args))
    return 0


_BUILTIN_FAMILIES = ("radial", "translation", "chordal")


def _load_family_spec(args) -> None:
    """Expand a JSON family spec file into the equivalent flags.

    Schema: {"family": "radial"|"translation"|"chordal", "driving": path,
    "interp": "const"|"linear", "horizon": float, "schedule": path}.
    Relative paths resolve against the spec file's directory.
    """
    with open(args.family_spec) as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{args.family_spec}: invalid JSON ({exc})")
    base = os.path.dirname(os.path.abspath(args.family_spec))

    def resolve(p):
        return p if p is None or os.path.isabs(p) else os.path.join(base, p)

    family = spec.get("family")
    if family not in _BUILTIN_FAMILIES:
        raise ParseError(f"{args.family_spec}: unknown family {family!r}")
    args.family = family
    args.driving = resolve(spec.get("driving"))
    args.schedule = resolve(spec.get("schedule"))
    args.interp = spec.get("interp", "const")
    args.horizon = spec.get("horizon")


def _cmd_family_verify(args) -> int:
    if args.family_spec:
        _load_family_spec(args)
    if not args.family:
        raise ParseError("need --family or --family-spec")
    t_hi = 1.5
    if args.family == "radial":
        fam, chain = radial_family(), radial_chain()
    elif args.family == "translation":
        fam, chain = translation_family(), translation_chain()
    else:
        if not args.driving:
            raise ParseError("family 'chordal' needs --driving")
        driving = parse_driving_csv(args.driving, args.interp, args.horizon)
        fam, chain = chordal_family(driving), chordal_chain(driving)
        t_hi = driving.horizon

    rng = np.random.default_rng(args.seed)
    triples = [tuple(np.sort(rng.uniform(0.0, t_hi, 3))) for _ in range(args.triples)]
    ef = verify_ef_axioms(fam, triples=triples, t_grid=np.linspace(0, t_hi, 12), seed=args.seed)
    assoc = verify_chain_association(chain, fam, pairs=((0.0, 0.5 * t_hi), (0.25 * t_hi, t_hi)))
    # families from a finite-horizon driving can only be sampled up to it
    beta_t_max = t_hi if args.family == "chordal" else 64.0
    beta_cls = classify_beta_limit(fam, t_max=beta_t_max)

    payload = {
        "family": args.family,
        "ef": ef.to_dict(),
        "association": assoc.to_dict(),
        "beta": beta_cls.to_dict(),
    }
    if args.family == "chordal":
        gb = goryainov_ba_check(fam, t_max=t_hi, seed=args.seed)
        payload["capacity_regularity"] = gb.to_dict()
    if args.schedule:
        from .families import DerivativeSchedule, conjugate_family

        sched_driving = parse_driving_csv(args.schedule, "linear")
        sched = DerivativeSchedule(sched_driving.knots)
        conj = conjugate_family(fam, sched)
        ef_conj = verify_ef_axioms(
            conj, triples=triples, t_grid=np.linspace(0, t_hi, 12), seed=args.seed
        )
        payload["conjugated_ef"] = ef_conj.to_dict()
    _write_report(args.out, payload, _config_of(args))
    return 0


def _cmd_chain(args) -> int:
    if args.family == "scaled-disks":
        gamma = _gamma_from_expr(args.gamma)
        fam = cantor_family() if gamma is None else scaled_disks(gamma)
    elif args.family == "slit":
        if not args.driving:
            raise ParseError("family 'slit' needs --driving")
        driving = parse_driving_csv(args.driving, args.interp, args.horizon)
        fam = slit_half_plane(driving, basepoint=_parse_point(args.basepoint))
    else:
        raise ParseError(f"unknown chain family {args.family!r}")

    grid = _parse_grid(args.grid)
    basepoint = _parse_point(args.basepoint)
    profile = radius_profile(fam, grid, basepoint)
    d = math.inf if args.order == "inf" else float(args.order)
    report = chain_report(profile, d)
    payload = {"report": report.to_dict(), "kind": fam.kind}
    if fam.kind == "slit_half_plane":
        payload["admissibility_probe"] = chordal_admissibility_probe(fam).to_dict()
    if args.profile_out:
        _write_csv(args.profile_out, "t,mu", list(profile.samples))
    _write_report(args.out, payload, _config_of(args))
    return 0


def _cmd_demo(args) -> int:
    if args.scenario == "spiral":
        taus = np.linspace(0.0, args.tau_max, args.n)
        rows = []
        for tau in taus:
            z = spiral_curve(float(tau))
            rows.append((tau, z.real, z.imag))
        _write_csv(args.out, "t,re,im", rows)
        return 0
    if args.scenario == "field":
        if not args.driving:
            raise ParseError("demo 'field' needs --driving")
        driving = parse_driving_csv(args.driving, args.interp, args.horizon)
        from .chordal import DiskField

        field = DiskField.from_driving(driving)
        rows = []
        for t in np.linspace(0.0, driving.horizon, args.n):
            lam = driving.value(float(t))
            u = complex((lam - 1j) / (lam + 1j))
            p0 = field.p(0.0 + 0.0j, float(t))
            rows.append((t, u.real, u.imag, p0.real))
        _write_csv(args.out, "t,u_re,u_im,re_p0", rows)
        return 0
    raise ParseError(f"unknown demo scenario {args.scenario!r}")


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loewner-kit",
        description="Numerical toolkit for chordal Loewner evolution.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common_io(p, needs_out=True):
        p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
        p.add_argument("--threads", type=int, default=1, help="worker threads (deterministic order)")
        if needs_out:
            p.add_argument("--out", required=True, help="output file")

    def driving_flags(p):
        p.add_argument("--driving", help="driving CSV with header t,lambda")
        p.add_argument("--interp", choices=("const", "linear"), default="const")
        p.add_argument("--horizon", type=float, default=None)

    p = sub.add_parser("evolve", help="apply the transition map to a point grid")
    driving_flags(p)
    p.add_argument("--from", dest="time_from", type=float, required=True)
    p.add_argument("--to", dest="time_to", type=float, required=True)
    p.add_argument("--points", required=True, help="CSV of re,im points")
    p.add_argument("--nsub", type=int, default=64)
    common_io(p)
    p.set_defaults(func=_cmd_evolve)

    p = sub.add_parser("trace", help="trace of the curve generated by a driving term")
    driving_flags(p)
    p.add_argument("--grid", required=True, help="t0:t1:n")
    common_io(p)
    p.set_defaults(func=_cmd_trace)

    p = sub.add_parser("extract", help="recover a driving term from a trace CSV")
    p.add_argument("--trace", required=True, help="CSV with header t,re,im (or re,im)")
    common_io(p)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("classify", help="function-class report for a JSON map spec")
    p.add_argument("--map", required=True, help="JSON map spec")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="report JSON (stdout when omitted)")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("family-verify", help="axiom report for a built-in family")
    p.add_argument("--family", choices=_BUILTIN_FAMILIES)
    p.add_argument("--family-spec", help="JSON family spec (alternative to flags)")
    driving_flags(p)
    p.add_argument("--schedule", help="derivative schedule CSV (t,lambda; linear)")
    p.add_argument("--triples", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_family_verify)

    p = sub.add_parser("chain", help="radius profile and admissibility verdicts")
    p.add_argument("--family", choices=("scaled-disks", "slit"), required=True)
    p.add_argument("--gamma", default="1+t", help="expression in t, or 'cantor'")
    driving_flags(p)
    p.add_argument("--basepoint", default="0,0", help="re,im")
    p.add_argument("--grid", required=True, help="t0:t1:n")
    p.add_argument("--order", default="inf", help="regularity order d (or 'inf')")
    p.add_argument("--profile-out", help="optional CSV t,mu")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_chain)

    p = sub.add_parser("demo", help="reproducible demo scenarios")
    p.add_argument("scenario", choices=("spiral", "field"))
    p.add_argument("--tau-max", type=float, default=4 * math.pi)
    p.add_argument("--n", type=int, default=200)
    driving_flags(p)
    common_io(p)
    p.set_defaults(func=_cmd_demo)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LoewnerKitError as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
