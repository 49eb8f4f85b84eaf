"""`mmm`: command-line front end.

Nine subcommands: validate, sample, poly-eval, prohorov, dist,
tightness, simulate, test, converge.  Structures travel as JSON
(schemas "mmm-space/v1", "mmm-metric/v1", "mmm-measure/v1"), curves and
tables as CSV.  Every command that writes files also writes an
"mmm-manifest/v1" JSON next to them recording the command line, seed,
and SHA-256 digests of inputs and outputs; `replay` re-runs a manifest
and reproduces the outputs byte for byte (the manifest's own timestamp
is the only thing that moves).

Exit codes: 0 success, 1 domain error (machine-readable JSON on
stderr), 2 usage error.

Seeds resolve as --seed, else the MMM_SEED environment variable, else
0.  A --threads flag caps worker parallelism; evaluation and reduction
orders are fixed, so results do not depend on it (the current
implementation runs single-threaded).
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import os
import sys
from pathlib import Path

from . import __version__
from .compact import family_tightness
from .core import validate
from .dmat import sample_many
from .errors import DomainError, ParameterError
from .gen import CoalescentConfig, MoranConfig, euclidean_cloud, kingman, moran
from .mgp import mgp_bounds, mgp_exact
from .poly import default_panel, evaluate_exact, evaluate_mc
from .prohorov import FinitePointMeasure, prohorov_exact
from .serialize import (
    MANIFEST_SCHEMA,
    dumps,
    load_path,
    load_space,
    measure_from_obj,
    metric_from_obj,
    save_space,
    sha256_path,
    space_from_obj,
    upper_triangle,
)
from .stats import convergence_table, two_sample_test

__all__ = ["run", "main", "replay"]


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("MMM_SEED", "0"))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _manifest_path(outputs: list) -> Path:
    first = Path(outputs[0])
    return first.with_name(first.name + ".manifest.json")


def _write_manifest(command, argv, seed, inputs, outputs) -> None:
    if not outputs:
        return
    argv = list(argv)
    if "--seed" not in argv:
        argv += ["--seed", str(seed)]
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "command": command,
        "argv": argv,
        "seed": seed,
        "inputs": {str(p): sha256_path(p) for p in inputs},
        "outputs": {str(p): sha256_path(p) for p in outputs},
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    _write_text(_manifest_path(outputs), dumps(manifest) + "\n")


def replay(manifest_path) -> int:
    """Re-run the command recorded in a manifest; outputs are rewritten."""
    manifest = load_path(manifest_path)
    if manifest.get("schema") != MANIFEST_SCHEMA:
        raise ParameterError(f"not a manifest: {manifest_path}")
    return run(manifest["argv"])


def _float_list(text: str) -> list:
    return [float(t) for t in text.split(",") if t.strip() != ""]


def _load_spaces_dir(directory: str):
    paths = sorted(Path(directory).glob("*.json"))
    paths = [p for p in paths if not p.name.endswith(".manifest.json")]
    if not paths:
        raise ParameterError(f"no space JSON files under {directory}")
    return paths, [load_space(p) for p in paths]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_validate(args, argv) -> int:
    space = load_space(args.space)
    report = validate(space, tol=args.tol)
    payload = {
        "ok": report.ok,
        "n": space.n,
        "violations": [
            {
                "kind": v.kind,
                "indices": list(v.indices),
                "magnitude": v.magnitude,
                "message": v.message,
            }
            for v in report.violations
        ],
    }
    if not report.ok:
        worst = max(report.violations, key=lambda v: v.magnitude)
        payload["error"] = "invariant-violation"
        payload["detail"] = worst.message
        print(dumps(payload), file=sys.stderr)
        return 1
    text = dumps(payload) + "\n"
    print(text, end="")
    if args.out:
        _write_text(Path(args.out), text)
        _write_manifest("validate", argv, 0, [args.space], [args.out])
    return 0


def _cmd_sample(args, argv) -> int:
    space = load_space(args.space)
    seed = _resolve_seed(args)
    lines = []
    for s in sample_many(space, args.n, args.count, seed):
        lines.append(
            dumps(
                {
                    "n": s.order,
                    "dist_upper": upper_triangle(s.dist),
                    "marks": [
                        list(m) if space.mark_space.kind == "euclidean" else m
                        for m in s.marks
                    ],
                }
            )
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        _write_text(Path(args.out), text)
        _write_manifest("sample", argv, seed, [args.space], [args.out])
    else:
        print(text, end="")
    return 0


def _poly_rows(space, panel, mc, seed):
    rows = []
    for c, phi in enumerate(panel):
        cheap = phi.has_product_form and phi.order <= 3
        feasible = cheap or space.n**phi.order <= 200_000
        exact = _fmt(evaluate_exact(phi, space)) if feasible else ""
        est, err = evaluate_mc(phi, space, mc, seed + 101 * c)
        rows.append([phi.description, exact, _fmt(est), _fmt(err)])
    return rows


def _cmd_poly_eval(args, argv) -> int:
    space = load_space(args.space)
    seed = _resolve_seed(args)
    if args.panel != "default":
        raise ParameterError(f"unknown panel {args.panel!r}")
    panel = default_panel(space.mark_space, args.n_max, args.size)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["polynomial", "exact", "mc_estimate", "mc_stderr"])
    writer.writerows(_poly_rows(space, panel, args.mc, seed))
    if args.out:
        _write_text(Path(args.out), buf.getvalue())
        _write_manifest("poly-eval", argv, seed, [args.space], [args.out])
    else:
        print(buf.getvalue(), end="")
    return 0


def _cmd_prohorov(args, argv) -> int:
    metric = metric_from_obj(load_path(args.metric))
    atoms_p, probs_p = measure_from_obj(load_path(args.p))
    atoms_q, probs_q = measure_from_obj(load_path(args.q))
    value, coupling = prohorov_exact(
        metric,
        FinitePointMeasure(atoms=atoms_p, probs=probs_p),
        FinitePointMeasure(atoms=atoms_q, probs=probs_q),
    )
    text = dumps({"value": value, "witness": coupling}) + "\n"
    print(text, end="")
    if args.out:
        _write_text(Path(args.out), text)
        _write_manifest("prohorov", argv, 0, [args.metric, args.p, args.q], [args.out])
    return 0


def _cmd_dist(args, argv) -> int:
    a = load_space(args.a)
    b = load_space(args.b)
    seed = _resolve_seed(args)
    if args.exact:
        result = mgp_exact(a, b, budget=args.budget, seed=seed)
    else:
        result = mgp_bounds(a, b, budget=max(1, args.budget // 250), seed=seed)
    payload = {
        "lower": result.lower,
        "upper": result.upper,
        "exact": result.exact,
        "slack": result.slack,
        "witness_cross": result.witness_cross,
        "witness_coupling": result.witness_coupling,
    }
    text = dumps(payload) + "\n"
    print(text, end="")
    if args.out:
        _write_text(Path(args.out), text)
        _write_manifest("dist", argv, seed, [args.a, args.b], [args.out])
    return 0


def _cmd_tightness(args, argv) -> int:
    paths, spaces = _load_spaces_dir(args.spaces)
    report = family_tightness(
        spaces,
        eps_grid=_float_list(args.eps),
        delta_grid=_float_list(args.delta),
        tail_grid=_float_list(args.tail) if args.tail else None,
        mark_labels=args.mark_labels.split(",") if args.mark_labels else None,
        mark_radii=_float_list(args.mark_radii) if args.mark_radii else None,
        modulus_threshold=args.threshold,
        tail_threshold=args.threshold,
    )
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["curve", "eps_or_threshold", "delta", "value"])
    for d_index, delta in enumerate(report.delta_grid):
        for e_index, eps in enumerate(report.eps_grid):
            writer.writerow(
                ["modulus", _fmt(eps), _fmt(delta),
                 _fmt(report.modulus[d_index, e_index])]
            )
    for t, v in zip(report.tail_grid, report.distance_tail):
        writer.writerow(["distance_tail", _fmt(t), "", _fmt(v)])
    if report.mark_tail.size:
        radii = (
            _float_list(args.mark_radii)
            if args.mark_radii
            else list(range(report.mark_tail.size))
        )
        for t, v in zip(radii, report.mark_tail):
            writer.writerow(["mark_tail", _fmt(t), "", _fmt(v)])
    curves = outdir / "tightness_curves.csv"
    verdicts = outdir / "tightness_verdicts.json"
    _write_text(curves, buf.getvalue())
    _write_text(
        verdicts,
        dumps(
            {
                "verdicts": report.verdicts,
                "tightness_consistent": report.tightness_consistent,
                "spaces": [str(p) for p in paths],
            }
        )
        + "\n",
    )
    _write_manifest("tightness", argv, 0, paths, [curves, verdicts])
    return 0


def _cmd_simulate(args, argv) -> int:
    params = load_path(args.params) if args.params else {}
    if not isinstance(params, dict):
        raise ParameterError("--params must hold a JSON object")
    seed = _resolve_seed(args)
    params = dict(params)
    params["seed"] = seed
    try:
        if args.model == "kingman":
            if "alphabet" in params:
                params["alphabet"] = tuple(params["alphabet"])
            space = kingman(CoalescentConfig(**params))
        elif args.model == "moran":
            if "alphabet" in params:
                params["alphabet"] = tuple(params["alphabet"])
            space = moran(MoranConfig(**params))
        elif args.model == "cloud":
            space = euclidean_cloud(**params)
        else:
            raise ParameterError(f"unknown model {args.model!r}")
    except TypeError as exc:
        raise ParameterError(f"bad params for model {args.model!r}: {exc}") from exc
    save_space(space, args.out)
    inputs = [args.params] if args.params else []
    _write_manifest("simulate", argv, seed, inputs, [args.out])
    return 0


def _cmd_test(args, argv) -> int:
    a = load_space(args.a)
    b = load_space(args.b)
    seed = _resolve_seed(args)
    result = two_sample_test(
        a, b, n=args.n, m=args.m, permutations=args.perms, seed=seed
    )
    text = (
        dumps(
            {
                "statistic": result.statistic,
                "p_value": result.p_value,
                "order": result.order,
                "samples": result.samples,
                "permutations": result.permutations,
                "feature": result.feature,
            }
        )
        + "\n"
    )
    print(text, end="")
    if args.out:
        _write_text(Path(args.out), text)
        _write_manifest("test", argv, seed, [args.a, args.b], [args.out])
    return 0


def _cmd_converge(args, argv) -> int:
    paths, spaces = _load_spaces_dir(args.seq)
    target = load_space(args.target) if args.target else None
    seed = _resolve_seed(args)
    if args.panel != "default":
        raise ParameterError(f"unknown panel {args.panel!r}")
    mark_space = spaces[0].mark_space
    panel = default_panel(mark_space, args.n_max, args.size)
    table = convergence_table(spaces, target, panel, m=args.mc, seed=seed)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["space", "polynomial", "estimate", "stderr"]
    if target is not None:
        header += ["target", "gap"]
    writer.writerow(header)
    for k, row_label in enumerate(table.row_labels):
        for c, col_label in enumerate(table.column_labels):
            row = [row_label, col_label, _fmt(table.estimates[k, c]),
                   _fmt(table.stderrs[k, c])]
            if target is not None:
                row += [_fmt(table.target_values[c]), _fmt(table.gaps[k, c])]
            writer.writerow(row)
    out = Path(args.out)
    _write_text(out, buf.getvalue())
    outputs = [out]
    if target is not None:
        sidecar = out.with_name(out.stem + "_trends.json")
        _write_text(
            sidecar,
            dumps(
                {
                    "columns": list(table.column_labels),
                    "trends": list(table.trends),
                    "target_values": table.target_values,
                }
            )
            + "\n",
        )
        outputs.append(sidecar)
    inputs = list(paths) + ([args.target] if args.target else [])
    _write_manifest("converge", argv, seed, inputs, outputs)
    return 0


# ---------------------------------------------------------------------------
# parser and dispatch
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmm",
        description="Finite metric measure spaces with marks: sampling laws, "
        "polynomials, Prohorov machinery, and diagnostics.",
    )
    parser.add_argument("--threads", type=int, default=None,
                        help="worker cap; results are independent of it")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_seed(p):
        p.add_argument("--seed", type=int, default=None,
                       help="default: MMM_SEED env var, else 0")

    p = sub.add_parser("validate", help="check the metric-measure axioms")
    p.add_argument("--space", required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("sample", help="draw distance-matrix samples")
    p.add_argument("--space", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out")
    add_seed(p)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("poly-eval", help="evaluate the polynomial panel")
    p.add_argument("--space", required=True)
    p.add_argument("--panel", default="default")
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--size", type=int, default=8)
    p.add_argument("--mc", type=int, default=10000)
    p.add_argument("--out")
    add_seed(p)
    p.set_defaults(func=_cmd_poly_eval)

    p = sub.add_parser("prohorov", help="Prohorov distance on a shared metric")
    p.add_argument("--metric", required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_prohorov)

    p = sub.add_parser("dist", help="marked Gromov-Prohorov bounds")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--exact", action="store_true",
                   help="certified search (tiny discrete spaces)")
    p.add_argument("--budget", type=int, default=4000)
    p.add_argument("--out")
    add_seed(p)
    p.set_defaults(func=_cmd_dist)

    p = sub.add_parser("tightness", help="family tightness diagnostics")
    p.add_argument("--spaces", required=True, help="directory of space JSON")
    p.add_argument("--eps", required=True, help="comma-separated radii")
    p.add_argument("--delta", required=True, help="comma-separated masses")
    p.add_argument("--tail", default=None, help="r12 thresholds (default: eps)")
    p.add_argument("--mark-labels", default=None)
    p.add_argument("--mark-radii", default=None)
    p.add_argument("--threshold", type=float, default=0.05)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_tightness)

    p = sub.add_parser("simulate", help="generate a random space")
    p.add_argument("--model", required=True, choices=["kingman", "moran", "cloud"])
    p.add_argument("--params", default=None, help="JSON file of model parameters")
    p.add_argument("--out", required=True)
    add_seed(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("test", help="two-sample equality test")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m", type=int, default=400)
    p.add_argument("--perms", type=int, default=199)
    p.add_argument("--out")
    add_seed(p)
    p.set_defaults(func=_cmd_test)

    p = sub.add_parser("converge", help="panel table along a sequence")
    p.add_argument("--seq", required=True, help="directory of space JSON")
    p.add_argument("--target", default=None)
    p.add_argument("--panel", default="default")
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--size", type=int, default=8)
    p.add_argument("--mc", type=int, default=2000)
    p.add_argument("--out", required=True)
    add_seed(p)
    p.set_defaults(func=_cmd_converge)

    return parser


def run(argv=None) -> int:
    """Parse and execute; returns the process exit code."""
    if argv is None:
        argv = sys.argv[1:]
    argv = [str(t) for t in argv]
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is not None and args.threads < 1:
        print(dumps({"error": "bad-parameter", "detail": "--threads must be >= 1"}),
              file=sys.stderr)
        return 1
    try:
        return args.func(args, argv)
    except DomainError as exc:
        print(dumps(exc.payload()), file=sys.stderr)
        return 1
    except (json.JSONDecodeError, OSError, KeyError, TypeError, ValueError) as exc:
        print(dumps({"error": "bad-input", "detail": f"{type(exc).__name__}: {exc}"}),
              file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
