"""Command-line batch runner.

Subcommands: teleport, cz, cnot-demo, scan, optimize, oracle-check. Every
run emits one delimited table (CSV with a leading metadata comment line,
or a JSON document with meta/columns/rows) to --out or stdout. Output
files are written atomically, all floats are rounded to 12 significant
digits identically in both formats, and the only run-to-run variation for
a fixed seed is the generated_at timestamp inside the metadata record.

Exit codes: 0 success, 1 oracle-check failure, 2 configuration or
resource errors (bad flags, basis cap exceeded).

Amplitude pairs given on the command line are real and nonnegative and
get normalized on parse (stderr warning when the correction is more than
1e-6); complex inputs come in through --input file:PATH, a JSON object
{"a0": x, "a1": y} with each value a number or an [re, im] pair.

With --plot (requires --out) the run also renders a figure to the output
path with its suffix swapped to .png.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import os
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from . import __version__
from .ancilla import (
    CoefficientProfile,
    load_profile,
    profile_linear,
    profile_sine,
    profile_uniform,
    save_profile,
)
from .checks import run_all
from .fidelity import (
    InputEnsemble,
    average_error_exact,
    average_error_second_order,
    klm_failure_probability,
)
from .fock import BasisSizeError, DEFAULT_BASIS_CAP
from .optimize import optimize_exact, optimize_second_order
from .protocol import (
    QubitAmplitudes,
    cnot_direct,
    cz_gate,
    ideal_cz_output,
    klm_summary,
    output_fidelity_sq,
    teleport_enumerate,
    two_qubit_fidelity_sq,
)

BALANCED = "0.7071067811865476,0.7071067811865476"

ADDITIVE_READING = 1.0 - math.pi**2 / 12.0
MULTIPLICATIVE_READING = 1.0 - (math.pi**2 / 12.0) ** 2


class ConfigError(Exception):
    """Bad flag combination or unusable configuration; maps to exit 2."""


def fnum(x: float | None) -> float | None:
    """Round to 12 significant digits; the shared path for CSV and JSON."""
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return None
    if x == 0.0:
        return 0.0
    return float(f"{x:.12g}")


def _canonical_phase(amps: Sequence[complex]) -> list[complex]:
    """Rotate a branch output so its largest component is real positive.

    Branch outputs carry one free global phase; fixing it here keeps the
    emitted tables stable and readable. Library callers get the raw phase.
    """
    pivot = max(range(len(amps)), key=lambda i: (abs(amps[i]), -i))
    a = amps[pivot]
    if a == 0:
        return list(amps)
    rot = abs(a) / a
    return [z * rot for z in amps]


def _timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _render_csv(meta: dict, columns: list[str], rows: list[dict]) -> str:
    import csv
    import io

    buf = io.StringIO()
    buf.write("# " + json.dumps(meta) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if row[c] is None else row[c] for c in columns])
    return buf.getvalue()


def _render_json(meta: dict, columns: list[str], rows: list[dict]) -> str:
    doc = {"meta": meta, "columns": columns, "rows": rows}
    return json.dumps(doc, indent=2) + "\n"


def _atomic_write(path: str, text: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=str(target.parent) or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, str(target))
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(args, meta: dict, columns: list[str], rows: list[dict]) -> None:
    meta = dict(meta)
    meta["generated_at"] = _timestamp()
    text = (
        _render_json(meta, columns, rows)
        if args.format == "json"
        else _render_csv(meta, columns, rows)
    )
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def _plot_path(args) -> str:
    return str(Path(args.out).with_suffix(".png"))


def _base_meta(args, command: str, config: dict) -> dict:
    return {
        "tool": "hifigate",
        "version": __version__,
        "command": command,
        "seed": args.seed,
        "config": config,
    }


def _parse_amplitude(field) -> complex:
    if isinstance(field, (int, float)):
        return complex(field)
    if isinstance(field, list) and len(field) == 2:
        return complex(float(field[0]), float(field[1]))
    raise ConfigError("input file amplitudes must be numbers or [re, im] pairs")


def parse_input(text: str) -> QubitAmplitudes:
    """--input value: 'a0,a1' nonnegative reals, or file:PATH with JSON."""
    if text.startswith("file:"):
        try:
            payload = json.loads(Path(text[5:]).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read input file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"input file is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict) or set(payload) != {"a0", "a1"}:
            raise ConfigError('input file must be an object {"a0": ..., "a1": ...}')
        a0 = _parse_amplitude(payload["a0"])
        a1 = _parse_amplitude(payload["a1"])
    else:
        parts = text.split(",")
        if len(parts) != 2:
            raise ConfigError("--input expects two comma-separated amplitudes")
        try:
            vals = [float(p) for p in parts]
        except ValueError as exc:
            raise ConfigError(f"bad amplitude in --input: {exc}") from exc
        if min(vals) < 0:
            raise ConfigError("command-line amplitudes must be nonnegative")
        a0, a1 = complex(vals[0]), complex(vals[1])
    norm_sq = abs(a0) ** 2 + abs(a1) ** 2
    if norm_sq == 0:
        raise ConfigError("input amplitudes cannot both be zero")
    if abs(norm_sq - 1.0) > 1e-6:
        print(
            f"warning: input renormalized (norm was {math.sqrt(norm_sq):.6g})",
            file=sys.stderr,
        )
    return QubitAmplitudes.normalized(a0, a1)


def parse_profile(text: str, n: int | None) -> CoefficientProfile:
    """--profile value: uniform | linear | sine | file:PATH."""
    if text.startswith("file:"):
        try:
            profile = load_profile(text[5:])
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load profile: {exc}") from exc
        if n is not None and profile.n != n:
            raise ConfigError(f"profile file has n={profile.n}, --n says {n}")
        return profile
    if n is None:
        raise ConfigError("--n is required with a named profile")
    try:
        if text == "uniform":
            return profile_uniform(n)
        if text == "linear":
            return profile_linear(n)
        if text == "sine":
            return profile_sine(n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown profile {text!r}")


def _parse_range(args) -> list[int]:
    if args.n_range:
        fields = args.n_range.split(":")
        if len(fields) not in (2, 3):
            raise ConfigError("--n-range expects A:B or A:B:STEP")
        try:
            lo, hi = int(fields[0]), int(fields[1])
            step = int(fields[2]) if len(fields) == 3 else 1
        except ValueError as exc:
            raise ConfigError(f"bad --n-range: {exc}") from exc
        if lo < 1 or hi < lo or step < 1:
            raise ConfigError("--n-range needs 1 <= A <= B and STEP >= 1")
        return list(range(lo, hi + 1, step))
    if args.n is None:
        raise ConfigError("give --n or --n-range")
    return [args.n]


def _check_plot(args) -> None:
    if args.plot and not args.out:
        raise ConfigError("--plot needs --out to name the figure file")


def _complex_columns(prefix: str) -> list[str]:
    return [f"{prefix}_re", f"{prefix}_im"]


def cmd_teleport(args) -> int:
    _check_plot(args)
    profile = parse_profile(args.profile, args.n)
    q = parse_input(args.input)
    outcomes = teleport_enumerate(q, profile, basis_cap=args.basis_cap)
    by_k: dict[int, list] = {}
    for o in outcomes:
        by_k.setdefault(o.k, []).append(o)
    rows = []
    for k in sorted(by_k):
        group = sorted(by_k[k], key=lambda o: o.pattern)
        rep = group[0]
        out = _canonical_phase([rep.output.a0, rep.output.a1])
        rows.append(
            {
                "k": k,
                "patterns": len(group),
                "probability": fnum(math.fsum(o.probability for o in group)),
                "out0_re": fnum(out[0].real),
                "out0_im": fnum(out[0].imag),
                "out1_re": fnum(out[1].real),
                "out1_im": fnum(out[1].imag),
                "fidelity": fnum(output_fidelity_sq(q, rep.output)),
                "degenerate": int(rep.degenerate),
            }
        )
    summary = klm_summary(q, outcomes)
    meta = _base_meta(
        args,
        "teleport",
        {
            "n": profile.n,
            "profile": profile.label,
            "input": [fnum(q.p0), fnum(q.p1)],
            "basis_cap": args.basis_cap,
        },
    )
    meta["klm"] = {
        "success_probability": fnum(summary.success_probability),
        "conditional_error": fnum(summary.conditional_error),
    }
    columns = [
        "k", "patterns", "probability",
        "out0_re", "out0_im", "out1_re", "out1_im",
        "fidelity", "degenerate",
    ]
    emit(args, meta, columns, rows)
    if args.plot:
        from .plots import save_teleport_figure

        save_teleport_figure(
            [r["k"] for r in rows],
            [r["probability"] for r in rows],
            [r["fidelity"] for r in rows],
            _plot_path(args),
        )
    return 0


def cmd_cz(args) -> int:
    _check_plot(args)
    profile = parse_profile(args.profile, args.n)
    profile2 = parse_profile(args.profile2, args.n) if args.profile2 else profile
    q = parse_input(args.input)
    q2 = parse_input(args.input2)
    outcomes = cz_gate(q, q2, profile, profile2, basis_cap=args.basis_cap)
    ideal = ideal_cz_output(q, q2)
    by_kk: dict[tuple[int, int], list] = {}
    for o in outcomes:
        by_kk.setdefault((o.k, o.k2), []).append(o)
    rows = []
    for k, k2 in sorted(by_kk):
        group = sorted(by_kk[(k, k2)], key=lambda o: (o.pattern, o.pattern2))
        rep = group[0]
        out = _canonical_phase(rep.output)
        row = {
            "k": k,
            "k2": k2,
            "patterns": len(group),
            "probability": fnum(math.fsum(o.probability for o in group)),
            "corrections": "+".join(sorted(rep.applied_corrections)),
            "fidelity": fnum(two_qubit_fidelity_sq(ideal, rep.output)),
        }
        for name, amp in zip(("out00", "out01", "out10", "out11"), out):
            row[f"{name}_re"] = fnum(amp.real)
            row[f"{name}_im"] = fnum(amp.imag)
        rows.append(row)
    meta = _base_meta(
        args,
        "cz",
        {
            "n": profile.n,
            "profile": profile.label,
            "profile2": profile2.label,
            "input": [fnum(q.p0), fnum(q.p1)],
            "input2": [fnum(q2.p0), fnum(q2.p1)],
            "basis_cap": args.basis_cap,
        },
    )
    columns = (
        ["k", "k2", "patterns", "probability", "corrections"]
        + [c for name in ("out00", "out01", "out10", "out11") for c in _complex_columns(name)]
        + ["fidelity"]
    )
    emit(args, meta, columns, rows)
    if args.plot:
        from .plots import save_teleport_figure

        save_teleport_figure(
            [f"{r['k']},{r['k2']}" for r in rows],
            [r["probability"] for r in rows],
            [r["fidelity"] for r in rows],
            _plot_path(args),
            title="controlled-sign branches",
        )
    return 0


def cmd_cnot_demo(args) -> int:
    _check_plot(args)
    if args.n not in (2, 3):
        raise ConfigError("cnot-demo runs at n = 2 or 3")
    profile = parse_profile(args.profile, args.n)
    q = parse_input(args.input)
    q2 = parse_input(args.input2)
    pairing = args.pairing.replace("-", "_")
    branches = cnot_direct(q, q2, profile, profile, pairing=pairing, basis_cap=args.basis_cap)
    rows = []
    for b in branches_grouped((b.k, b.k2, b.probability, b.purity) for b in branches):
        rows.append({"gate": "cnot", **b})
    cz_outcomes = cz_gate(
        q, q2, profile, profile, compute_purity=True, basis_cap=args.basis_cap
    )
    for b in branches_grouped((o.k, o.k2, o.probability, o.purity) for o in cz_outcomes):
        rows.append({"gate": "cz", **b})
    min_cnot = min(r["purity"] for r in rows if r["gate"] == "cnot")
    min_cz = min(r["purity"] for r in rows if r["gate"] == "cz")
    meta = _base_meta(
        args,
        "cnot-demo",
        {
            "n": profile.n,
            "profile": profile.label,
            "pairing": args.pairing,
            "input": [fnum(q.p0), fnum(q.p1)],
            "input2": [fnum(q2.p0), fnum(q2.p1)],
            "basis_cap": args.basis_cap,
        },
    )
    meta["min_purity_cnot"] = min_cnot
    meta["min_purity_cz"] = min_cz
    columns = ["gate", "k", "k2", "patterns", "probability", "purity"]
    emit(args, meta, columns, rows)
    if args.out:
        print(f"minimum branch purity: cnot {min_cnot}, cz {min_cz}")
    if args.plot:
        from .plots import save_purity_figure

        cnot_rows = [r for r in rows if r["gate"] == "cnot"]
        save_purity_figure(
            [f"k={r['k']}, k'={r['k2']}" for r in cnot_rows],
            [r["purity"] for r in cnot_rows],
            _plot_path(args),
        )
    return 0


def branches_grouped(branches) -> list[dict]:
    """Aggregate (k, k2, probability, purity) records to (k, k2) rows with
    the minimum purity over the group (purity is constant within a group;
    min is a conservative reduction, not an average)."""
    table: dict[tuple[int, int], dict] = {}
    for k, k2, probability, purity in branches:
        cell = table.setdefault(
            (k, k2), {"patterns": 0, "probability": 0.0, "purity": purity}
        )
        cell["patterns"] += 1
        cell["probability"] += probability
        cell["purity"] = min(cell["purity"], purity)
    return [
        {
            "k": k,
            "k2": k2,
            "patterns": cell["patterns"],
            "probability": fnum(cell["probability"]),
            "purity": fnum(cell["purity"]),
        }
        for (k, k2), cell in sorted(table.items())
    ]


def cmd_scan(args) -> int:
    _check_plot(args)
    ns = _parse_range(args)
    labels = args.profile or ["uniform", "linear", "sine"]
    for label in labels:
        if label.startswith("file:"):
            raise ConfigError("scan needs resizable named profiles, not files")
    ensemble = InputEnsemble.uniform_p0()
    rows = []
    for n in ns:
        for label in labels:
            profile = parse_profile(label, n)
            exact = average_error_exact(profile, ensemble)
            rows.append(
                {
                    "n": n,
                    "profile": label,
                    "exact_error": fnum(exact),
                    "second_order_error": fnum(average_error_second_order(profile)),
                    "n2_error": fnum(n * n * exact),
                    "klm_failure": fnum(klm_failure_probability(n)),
                }
            )
    meta = _base_meta(
        args,
        "scan",
        {"n_values": ns, "profiles": labels, "ensemble": "uniform-p0"},
    )
    columns = ["n", "profile", "exact_error", "second_order_error", "n2_error", "klm_failure"]
    emit(args, meta, columns, rows)
    if args.plot:
        from .plots import save_scan_figure

        save_scan_figure(rows, _plot_path(args))
    return 0


def cmd_optimize(args) -> int:
    _check_plot(args)
    if args.n is None:
        raise ConfigError("optimize needs --n")
    try:
        if args.objective == "second-order":
            result = optimize_second_order(args.n)
        elif args.objective == "exact-single":
            result = optimize_exact(args.n, kind="single", seed=args.seed)
        else:
            result = optimize_exact(args.n, kind="cz", seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    row = {
        "n": args.n,
        "objective": result.objective_kind,
        "objective_value": fnum(result.objective_value),
        "iterations": result.iterations,
        "converged": int(result.converged),
        "improvement_vs_linear": fnum(result.improvement_vs_linear),
    }
    columns = list(row)
    if args.objective == "exact-cz":
        row["additive_reading"] = fnum(ADDITIVE_READING)
        row["multiplicative_reading"] = fnum(MULTIPLICATIVE_READING)
        columns += ["additive_reading", "multiplicative_reading"]
    meta = _base_meta(args, "optimize", {"n": args.n, "objective": args.objective})
    emit(args, meta, columns, [row])
    profile_out = args.profile_out
    if profile_out is None and args.out:
        profile_out = str(Path(args.out).with_suffix(".profile.json"))
    if profile_out:
        save_profile(result.profile, profile_out)
    else:
        print("note: no --out/--profile-out; optimized profile not saved", file=sys.stderr)
    if args.plot:
        from .plots import save_profile_figure

        shown = [profile_sine(args.n), result.profile]
        if args.n >= 2:
            shown.insert(0, profile_linear(args.n))
        save_profile_figure(shown, _plot_path(args))
    return 0


def cmd_oracle_check(args) -> int:
    _check_plot(args)
    if not 1 <= args.max_n <= 4:
        raise ConfigError("--max-n must be between 1 and 4")
    results = run_all(seed=args.seed, max_n=args.max_n)
    rows = [
        {
            "check": r.name,
            "max_deviation": fnum(r.max_deviation),
            "tolerance": fnum(r.tolerance),
            "passed": int(r.passed),
            "detail": r.detail,
        }
        for r in results
    ]
    meta = _base_meta(args, "oracle-check", {"max_n": args.max_n})
    columns = ["check", "max_deviation", "tolerance", "passed", "detail"]
    emit(args, meta, columns, rows)
    failed = [r for r in results if not r.passed]
    print(
        f"oracle-check: {len(results) - len(failed)}/{len(results)} passed",
        file=sys.stderr,
    )
    for r in failed:
        print(f"FAILED {r.name}: max deviation {r.max_deviation:.3e}", file=sys.stderr)
    return 1 if failed else 0


def _add_common(sub, *, basis_cap: bool = False) -> None:
    sub.add_argument("--seed", type=int, default=0, help="RNG seed recorded in output")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--out", help="output file (default stdout)")
    sub.add_argument("--plot", action="store_true", help="also render a PNG figure")
    if basis_cap:
        sub.add_argument(
            "--basis-cap",
            type=int,
            default=DEFAULT_BASIS_CAP,
            help="abort if an intermediate state would exceed this many terms",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hifigate",
        description="exact simulation and error-rate tooling for "
        "teleportation-based optical gates",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("teleport", help="enumerate one teleportation")
    p.add_argument("--n", type=int)
    p.add_argument("--profile", default="uniform")
    p.add_argument("--input", default="0.6,0.8")
    _add_common(p, basis_cap=True)
    p.set_defaults(handler=cmd_teleport)

    p = subs.add_parser("cz", help="enumerate the controlled-sign gate")
    p.add_argument("--n", type=int)
    p.add_argument("--profile", default="uniform")
    p.add_argument("--profile2", help="second-register profile (default: same)")
    p.add_argument("--input", default=BALANCED)
    p.add_argument("--input2", default=BALANCED)
    _add_common(p, basis_cap=True)
    p.set_defaults(handler=cmd_cz)

    p = subs.add_parser("cnot-demo", help="direct-CNOT purity demonstration")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--profile", default="uniform")
    p.add_argument("--pairing", choices=("matched", "all-pairs"), default="matched")
    p.add_argument("--input", default=BALANCED)
    p.add_argument("--input2", default=BALANCED)
    _add_common(p, basis_cap=True)
    p.set_defaults(handler=cmd_cnot_demo)

    p = subs.add_parser("scan", help="analytic error scaling over n")
    p.add_argument("--n", type=int)
    p.add_argument("--n-range", help="A:B or A:B:STEP, inclusive")
    p.add_argument(
        "--profile",
        action="append",
        help="repeatable; default uniform, linear and sine",
    )
    p.add_argument("--ensemble", choices=("uniform-p0",), default="uniform-p0")
    _add_common(p)
    p.set_defaults(handler=cmd_scan)

    p = subs.add_parser("optimize", help="optimize the coefficient profile")
    p.add_argument("--n", type=int, required=True)
    p.add_argument(
        "--objective",
        choices=("second-order", "exact-single", "exact-cz"),
        default="second-order",
    )
    p.add_argument("--profile-out", help="where to save the optimized profile JSON")
    _add_common(p)
    p.set_defaults(handler=cmd_optimize)

    p = subs.add_parser("oracle-check", help="run the built-in consistency checks")
    p.add_argument("--max-n", type=int, default=4)
    _add_common(p)
    p.set_defaults(handler=cmd_oracle_check)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BasisSizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
