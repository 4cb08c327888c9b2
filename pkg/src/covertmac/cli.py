"""Command-line front end: ``covertmac {check, region, simulate, lemmas}``.

Exit codes: 0 success, 1 domain failure, 2 usage or parse failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from covertmac import __version__
from covertmac import qlinalg as ql
from covertmac.channel import (
    MAX_ALPHABET,
    MAX_OUTPUT_DIM,
    CqTable,
    InnocentConfig,
    PhysicalChannel,
    SignalEnsemble,
    compile_cq_table,
    validate_channel,
)
from covertmac.codingsim import (
    DimensionCapError,
    SimParams,
    lemma_checks,
    packing_experiment,
    resolvability_experiment,
)
from covertmac.codingsim.codebook import check_dim
from covertmac.infomeasures import InputDistribution
from covertmac.region import RegionConfig, achievable_region, find_feasible, pentagon

SCHEMA_VERSION = 1
NO_FEASIBLE = "no feasible distribution found"
SIM_COLUMNS = ("n", "codebook", "error", "trace_distance", "rel_entropy", "bound_packing", "bound_resolvability")

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class SpecError(ValueError):
    """Malformed specification file (exit code 2)."""


class DomainError(ValueError):
    """Well-formed input that fails a domain check (exit code 1)."""


# ---- spec parsing ----

def _complex(x) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise SpecError(f"expected a number or an [re, im] pair, got {x!r}")


def parse_matrix(obj) -> np.ndarray:
    """Row-major nested list with entries given as numbers or ``[re, im]`` pairs."""
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise SpecError("a matrix must be a nonempty list of rows")
    rows = [[_complex(x) for x in r] for r in obj]
    if len({len(r) for r in rows}) != 1:
        raise SpecError("matrix rows have different lengths")
    return np.array(rows, dtype=complex)


def _matrix_list(obj, what: str) -> list:
    if not isinstance(obj, list):
        raise SpecError(f"{what} must be a list of matrices")
    return [parse_matrix(m) for m in obj]


def _nested_table(obj, sizes, what: str) -> np.ndarray:
    """``obj[x1][x2][x3]`` is a matrix; returns an array of shape ``sizes + (d, d)``."""
    try:
        arr = [[[parse_matrix(m) for m in row2] for row2 in row1] for row1 in obj]
    except TypeError as exc:
        raise SpecError(f"{what} must be nested as [x1][x2][x3]") from exc
    shape = (len(arr), len(arr[0]) if arr else 0, len(arr[0][0]) if arr and arr[0] else 0)
    if shape != tuple(sizes):
        raise SpecError(f"{what} has alphabet shape {shape}, expected {tuple(sizes)}")
    try:
        return np.array(arr, dtype=complex)
    except ValueError as exc:
        raise SpecError(f"{what} entries have inconsistent dimensions") from exc


@dataclass
class LoadedSpec:
    table: CqTable
    form: str
    validation: dict
    digest: str


def load_spec(path) -> LoadedSpec:
    """Parse a channel spec; raises SpecError (malformed) or DomainError (unphysical)."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc
    digest = hashlib.sha256(raw).hexdigest()
    try:
        spec = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc}") from exc
    if not isinstance(spec, dict) or spec.get("form") not in ("kraus", "cq"):
        raise SpecError('top-level "form" must be "kraus" or "cq"')
    try:
        if spec["form"] == "kraus":
            return _load_kraus(spec, digest)
        return _load_cq(spec, digest)
    except KeyError as exc:
        raise SpecError(f"missing key {exc}") from exc
    except (ql.NotPhysicalError, ql.NotHermitianError, ql.DimensionError) as exc:
        raise DomainError(str(exc)) from exc


def _load_kraus(spec: dict, digest: str) -> LoadedSpec:
    ch = PhysicalChannel(spec["input_dims"], spec["output_dims"], tuple(_matrix_list(spec["kraus"], "kraus")))
    report = validate_channel(ch)
    validation = {"ok": report.ok, "completeness_residual": report.completeness_residual,
                  "problems": report.problems}
    if not report.ok:
        raise DomainError("; ".join(report.problems) + f" [completeness residual {report.completeness_residual:.6g}]")
    ens = spec["ensembles"]
    if not isinstance(ens, list) or len(ens) != 3:
        raise SpecError('"ensembles" must list three ensembles')
    ensembles = [SignalEnsemble(tuple(_matrix_list(e, "ensemble"))) for e in ens]
    inn = spec["innocent"]
    if isinstance(inn, dict) and "symbols" in inn:
        innocent = InnocentConfig.from_symbols(ensembles, inn["symbols"])
    elif isinstance(inn, dict) and "states" in inn:
        innocent = InnocentConfig(tuple(_matrix_list(inn["states"], "innocent states")))
    else:
        raise SpecError('"innocent" needs "symbols" or "states"')
    try:
        table = compile_cq_table(ch, *ensembles, innocent)
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    return LoadedSpec(table, "kraus", validation, digest)


def _load_cq(spec: dict, digest: str) -> LoadedSpec:
    sizes = tuple(int(k) for k in spec["alphabet_sizes"])
    if len(sizes) != 3 or min(sizes) < 1:
        raise SpecError('"alphabet_sizes" must be three positive counts')
    if max(sizes) > MAX_ALPHABET or max(int(spec["d_B"]), int(spec["d_E"])) > MAX_OUTPUT_DIM:
        raise DomainError(f"alphabets are capped at {MAX_ALPHABET} symbols and outputs at dimension {MAX_OUTPUT_DIM}")
    rho0 = parse_matrix(spec["rho0"])
    if "joint_states" in spec:
        js = _nested_table(spec["joint_states"], sizes, "joint_states")
        table = CqTable(js, int(spec["d_B"]), int(spec["d_E"]), rho0)
    elif "b_states" in spec and "e_states" in spec:
        b = _nested_table(spec["b_states"], sizes, "b_states")
        e = _nested_table(spec["e_states"], sizes, "e_states")
        _check_marginal_table(b, "b_states")
        _check_marginal_table(e, "e_states")
        table = CqTable.from_marginals(b, e, rho0)
    else:
        raise SpecError('cq form needs "joint_states" or both "b_states" and "e_states"')
    return LoadedSpec(table, "cq", {"ok": True}, digest)


def _check_marginal_table(states: np.ndarray, what: str):
    for idx in np.ndindex(*states.shape[:3]):
        try:
            ql.check_density_matrix(states[idx])
        except ql.NotPhysicalError as exc:
            raise DomainError(f"{what} entry (x1,x2,x3)={idx}: {exc}") from exc


def load_dist(path, table: CqTable) -> tuple:
    try:
        raw = Path(path).read_bytes()
        d = InputDistribution.from_dict(json.loads(raw))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise SpecError(f"cannot parse distribution file {path}: {exc}") from exc
    except ValueError as exc:
        raise DomainError(f"invalid distribution: {exc}") from exc
    if d.alphabet_sizes != table.alphabet_sizes:
        raise DomainError(f"distribution alphabets {d.alphabet_sizes} do not match table {table.alphabet_sizes}")
    return d, hashlib.sha256(raw).hexdigest()


def matrix_to_json(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def table_to_spec(table: CqTable) -> dict:
    """Direct cq-form spec that reloads to ``table``."""
    k1, k2, k3 = table.alphabet_sizes
    js = [[[matrix_to_json(table.joint_states[a, b, c]) for c in range(k3)] for b in range(k2)] for a in range(k1)]
    return {"form": "cq", "alphabet_sizes": [k1, k2, k3], "d_B": table.d_B, "d_E": table.d_E,
            "joint_states": js, "rho0": matrix_to_json(table.rho0)}


# ---- output ----

def _clean(x):
    """JSON-safe copy: arrays to lists, complex to [re, im], non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_clean(float(x.real)), _clean(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Path, obj):
    atomic_write(path, json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def write_csv(path: Path, manifest: dict, header, rows):
    buf = io.StringIO()
    buf.write("# run_manifest=" + json.dumps(_clean(manifest), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for v in r])
    atomic_write(path, buf.getvalue())


def read_csv(path) -> list:
    """Rows of a CSV written by this tool, skipping the manifest comment line."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def make_manifest(command: str, args: argparse.Namespace, digest: str | None) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "spec", "dist")}
    return {
        "command": command,
        "config": config,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "input_digest": digest,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def _region_config(args) -> RegionConfig:
    terms = tuple(t.strip() for t in args.margin_terms.split(",") if t.strip())
    try:
        return RegionConfig(covert_tol=args.covert_tol, margin=args.margin, restarts=args.restarts,
                            max_iters=args.max_iters, seed=args.seed, covert=not args.no_covert,
                            margin_terms=terms)
    except ValueError as exc:
        raise SpecError(str(exc)) from exc


# ---- commands ----

def cmd_check(args) -> int:
    spec = load_spec(args.spec)
    t = spec.table
    print(f"form: {spec.form}")
    print(f"alphabet sizes: {t.alphabet_sizes}  d_B={t.d_B}  d_E={t.d_E}")
    if spec.form == "kraus":
        print(f"Kraus completeness residual: {spec.validation['completeness_residual']:.3e}")
    print("rho0 =")
    print(np.array2string(t.rho0, precision=6, suppress_small=True))
    print("channel valid")
    return EXIT_OK


def cmd_region(args) -> int:
    spec = load_spec(args.spec)
    cfg = _region_config(args)
    result = achievable_region(spec.table, cfg)
    manifest = make_manifest("region", args, spec.digest)
    out = Path(args.out)
    doc = {"manifest": manifest, **result.to_dict(), "feasible_found": bool(result.pentagons)}
    if not result.pentagons:
        doc["marker"] = NO_FEASIBLE
    write_json(out / "region.json", doc)
    write_csv(out / "frontier.csv", manifest, ("R1", "R2"), result.frontier)
    if result.pentagons:
        best = max(p.bounds.b12 for p in result.pentagons)
        print(f"{len(result.pentagons)} feasible pentagons, {len(result.frontier)} frontier points, max b12 {best:.6f}")
    else:
        print(NO_FEASIBLE)
    return EXIT_OK


def _parse_n_list(text: str) -> list:
    try:
        ns = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise SpecError(f"bad --n-list {text!r}") from exc
    if not ns or min(ns) < 1:
        raise SpecError("--n-list needs positive blocklengths")
    return ns


def cmd_simulate(args) -> int:
    spec = load_spec(args.spec)
    table = spec.table
    ns = _parse_n_list(args.n_list)
    for n in ns:
        try:
            check_dim(table.d_B, n)
            check_dim(table.d_E, n)
        except DimensionCapError as exc:
            raise DomainError(str(exc)) from exc
    digest = spec.digest
    if args.auto:
        cfg = _region_config(args)
        found = find_feasible(table, cfg)
        if not found:
            raise DomainError(NO_FEASIBLE)
        dist = found[0]
    else:
        dist, dist_digest = load_dist(args.dist, table)
        digest = hashlib.sha256((spec.digest + dist_digest).encode()).hexdigest()
    do_pack = args.mode in ("packing", "both")
    do_res = args.mode in ("resolvability", "both")
    rows, per_n = [], {}
    for n in ns:
        try:
            params = SimParams(n=n, R1=args.r1, R2=args.r2, delta=args.delta, alpha=args.alpha,
                               num_codebooks=args.codebooks, seed=args.seed)
        except ValueError as exc:
            raise SpecError(str(exc)) from exc
        entry = {"message_counts": list(params.message_counts)}
        pack = packing_experiment(table, dist, params) if do_pack else None
        res = resolvability_experiment(table, dist, params) if do_res else None
        for name, rep in (("packing", pack), ("resolvability", res)):
            if rep is not None:
                entry[name] = {"mean": rep.mean, "stderr": rep.stderr, "bound": rep.bound, "bound_terms": rep.bound_terms}
        per_n[str(n)] = entry
        for i in range(args.codebooks):
            rows.append((
                n, i,
                pack.error[i] if pack else None,
                res.trace_distance[i] if res else None,
                res.rel_entropy[i] if res else None,
                pack.bound if pack else None,
                res.bound if res else None,
            ))
        msg = [f"n={n} messages={params.message_counts}"]
        if pack:
            msg.append(f"error {pack.mean:.4f}±{pack.stderr:.4f} (bound {pack.bound:.4g})")
        if res:
            msg.append(f"D {res.mean:.4f}±{res.stderr:.4f} (bound {res.bound:.4g})")
        print("  ".join(msg))
    manifest = make_manifest("simulate", args, digest)
    out = Path(args.out)
    write_csv(out / "simulate.csv", manifest, SIM_COLUMNS, rows)
    pent = pentagon(table, dist, _region_config(args))
    write_json(out / "summary.json", {"manifest": manifest, "dist": dist.to_dict(), "bounds": pent.bounds.as_dict(),
                                      "covertness_residual": pent.residual, "per_n": per_n})
    return EXIT_OK


def _parse_dims(text: str) -> tuple:
    try:
        dims = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise SpecError(f"bad --dims {text!r}") from exc
    if not dims or min(dims) < 1:
        raise SpecError("--dims needs positive dimensions")
    return dims


def cmd_lemmas(args) -> int:
    if args.trials < 0:
        raise SpecError("--trials must be nonnegative")
    report = lemma_checks(seed=args.seed, trials=args.trials, dims=_parse_dims(args.dims))
    manifest = make_manifest("lemmas", args, None)
    write_json(Path(args.out) / "lemmas.json", {"manifest": manifest, **report.to_dict()})
    for name, c in report.checks.items():
        worst = "n/a" if c.trials == 0 else f"{c.worst_slack:.3e}"
        print(f"{name:32s} trials={c.trials:5d} violations={c.violations} worst_slack={worst}")
    return EXIT_OK if report.ok else EXIT_DOMAIN


def _add_region_flags(p: argparse.ArgumentParser):
    p.add_argument("--covert-tol", type=float, default=1e-6, help="trace-distance budget for rho_E = rho0")
    p.add_argument("--margin", type=float, default=1e-3, help="required slack in bits for each b - e gap")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--no-covert", action="store_true", help="drop the covertness constraints")
    p.add_argument("--margin-terms", default="1,2,12",
                   help="which b - e gaps must clear the margin (drop 2 when transmitter 2 is idle)")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="covertmac", description="Covert quantum MAC with a helper: desk-scale tools.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a channel spec")
    p.add_argument("spec")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("region", help="search covert-feasible inputs and emit the achievable region")
    p.add_argument("spec")
    p.add_argument("--out", default=".")
    _add_region_flags(p)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("simulate", help="Monte Carlo packing and resolvability experiments")
    p.add_argument("spec")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dist", help="input distribution JSON (p1, p2, p3_given_12)")
    src.add_argument("--auto", action="store_true", help="use the first distribution found by the feasibility search")
    p.add_argument("--n-list", default="2,4,6")
    p.add_argument("--r1", type=float, required=True)
    p.add_argument("--r2", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--codebooks", type=int, default=50)
    p.add_argument("--mode", choices=("packing", "resolvability", "both"), default="both")
    p.add_argument("--out", default=".")
    _add_region_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("lemmas", help="randomized checks of the proof inequalities")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dims", default="2,3,4,5,6,7,8")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_lemmas)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
