"""Command-line front end.

Subcommands:
  run      apply one pass to a frame and report the Parseval residual
  iterate  drive the pass to (empirical) stationarity and classify the limit
  verify   run the seeded verification battery

Frames are read from JSON files with keys ``dim``, ``field`` ("real" or
"complex") and ``vectors`` (rows; complex entries as [re, im] pairs), or
constructed from the builtin examples fig1, fig2, fig3.

Exit codes: 0 success, 1 verification failure, 2 input error.
"""

import argparse
import csv
import json
import sys
from dataclasses import dataclass

from .errors import FrameError
from .frames import (
    DEP_TOL,
    FrameSeq,
    dependency_profile,
    frame_bounds,
    is_parseval,
    zero_indices,
)
from .generate import EXAMPLE_NAMES, example_frame
from .ggs import ggs_pass
from .iteration import (
    classify_limit,
    iterate,
    trace_csv_rows,
    trace_to_dict,
    validate_recurrences,
)
from .verify import run_battery

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2


class InputError(Exception):
    """User-facing input problem; maps to exit code 2."""


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    example: str | None = None
    max_iter: int = 1000
    snapshot_stride: int = 1
    trace: str = "none"
    dep_tol: float = DEP_TOL
    eps_delta: float = 1e-12
    delta_zero: float | None = None
    delta_onb: float = 1e-2
    output: str | None = None
    fmt: str = "json"
    seed: int = 0
    random_frames: int = 50

    def validate(self):
        if self.max_iter < 1:
            raise InputError(f"--max-iter must be >= 1, got {self.max_iter}")
        if self.snapshot_stride < 1:
            raise InputError(f"--snapshot-stride must be >= 1, got {self.snapshot_stride}")
        for name, val in (("--dep-tol", self.dep_tol), ("--eps-delta", self.eps_delta),
                          ("--delta-onb", self.delta_onb)):
            if val < 0.0:
                raise InputError(f"{name} must be >= 0, got {val}")
        if self.delta_zero is not None and self.delta_zero <= 0.0:
            raise InputError(f"--delta-zero must be > 0, got {self.delta_zero}")
        if self.random_frames < 1:
            raise InputError(f"--random-frames must be >= 1, got {self.random_frames}")


def _add_input_args(sub):
    grp = sub.add_mutually_exclusive_group(required=True)
    grp.add_argument("--input", metavar="PATH", help="frame JSON file")
    grp.add_argument("--example", choices=EXAMPLE_NAMES, help="builtin example frame")


def _add_output_args(sub):
    sub.add_argument("--output", metavar="PATH", help="write result here (default: stdout)")
    sub.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="framegs",
        description="Parseval frames via a generalized Gram-Schmidt pass.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="apply one pass and verify the output")
    _add_input_args(run)
    run.add_argument("--dep-tol", type=float, default=DEP_TOL)
    run.add_argument("--trace", choices=("none", "steps"), default="none")
    _add_output_args(run)

    it = sub.add_parser("iterate", help="iterate the pass and classify the limit")
    _add_input_args(it)
    it.add_argument("--max-iter", type=int, default=1000)
    it.add_argument("--snapshot-stride", type=int, default=1)
    it.add_argument("--eps-delta", type=float, default=1e-12)
    it.add_argument("--dep-tol", type=float, default=DEP_TOL)
    it.add_argument("--delta-zero", type=float, default=None,
                    help="zero-classification threshold (default: 2/sqrt(M))")
    it.add_argument("--delta-onb", type=float, default=1e-2)
    it.add_argument("--trace", choices=("none", "steps"), default="none",
                    help="steps: per-step tracing plus recurrence validation")
    _add_output_args(it)

    ver = sub.add_parser("verify", help="run the seeded verification battery")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--random-frames", type=int, default=50)
    ver.add_argument("--dep-tol", type=float, default=DEP_TOL)
    ver.add_argument("--max-iter", type=int, default=1000)
    ver.add_argument("--delta-onb", type=float, default=1e-2)
    return p


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for fld in vars(cfg):
        if fld != "command" and hasattr(args, fld):
            setattr(cfg, fld, getattr(args, fld))
    cfg.validate()
    return cfg


def load_input_frame(cfg: RunConfig) -> FrameSeq:
    if cfg.example is not None:
        return example_frame(cfg.example)
    try:
        with open(cfg.input, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {cfg.input}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(
            f"malformed JSON in {cfg.input} at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    try:
        return FrameSeq.from_dict(data)
    except (ValueError, FrameError) as exc:
        raise InputError(f"invalid frame in {cfg.input}: {exc}") from exc


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _json_dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _csv_text(header, rows) -> str:
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _frame_csv(frame: FrameSeq):
    d = frame.dim
    if frame.field == "complex":
        cols = [f"coord_{j}_{p}" for j in range(1, d + 1) for p in ("re", "im")]
        rows = []
        for i, v in enumerate(frame.vectors):
            row = [i + 1, float(frame.norms()[i])]
            for z in v:
                row.extend([z.real, z.imag])
            rows.append(row)
    else:
        cols = [f"coord_{j}" for j in range(1, d + 1)]
        norms = frame.norms()
        rows = [[i + 1, float(norms[i]), *map(float, v)] for i, v in enumerate(frame.vectors)]
    return ["vector_index", "norm", *cols], rows


def cmd_run(cfg: RunConfig) -> int:
    F = load_input_frame(cfg)
    G, traces = ggs_pass(F, cfg.dep_tol, trace=cfg.trace == "steps")
    chk = is_parseval(G, dep_tol=cfg.dep_tol)
    report = {
        "parseval_residual": chk.residual,
        "parseval_ok": chk.ok,
        "output_bounds": list(frame_bounds(G)),
        "input_bounds": list(frame_bounds(F)),
        "dependent_indices": list(dependency_profile(F, cfg.dep_tol)),
        "input_zero_indices": list(zero_indices(F)),
    }
    if traces:
        report["step_kinds"] = [st.kind for st in traces]
    if cfg.fmt == "json":
        _emit(_json_dumps({"frame": G.to_dict(), "report": report}), cfg.output)
    else:
        header, rows = _frame_csv(G)
        _emit(_csv_text(header, rows), cfg.output)
        print(f"parseval_residual={chk.residual:.3e} ok={chk.ok}")
    if cfg.output is not None and cfg.fmt == "json":
        print(f"parseval_residual={chk.residual:.3e} ok={chk.ok}")
    return EXIT_OK if chk.ok else EXIT_CHECK_FAILED


def cmd_iterate(cfg: RunConfig) -> int:
    F = load_input_frame(cfg)
    tr = iterate(
        F,
        max_iter=cfg.max_iter,
        eps_delta=cfg.eps_delta,
        snapshot_stride=cfg.snapshot_stride,
        dep_tol=cfg.dep_tol,
        trace_steps=cfg.trace == "steps",
    )
    rep = classify_limit(tr, delta_zero=cfg.delta_zero, delta_onb=cfg.delta_onb)
    summary = {
        "iterations_run": rep.iterations_run,
        "stationary": tr.stationary,
        "zero_indices": list(rep.zero_indices),
        "surviving_indices": list(rep.surviving_indices),
        "onb_residual": rep.onb_residual,
        "near_onb": rep.converged,
        "prediction_match": rep.prediction_match,
        "delta_zero": rep.delta_zero,
        "delta_onb": rep.delta_onb,
    }
    if cfg.trace == "steps":
        rr = validate_recurrences(tr)
        summary["recurrences"] = {
            "update_identity": rr.update_identity,
            "single_step_floor": rr.single_step_floor,
            "accumulated_floor": rr.accumulated_floor,
            "shrink_ceiling": rr.shrink_ceiling,
            "tail_floor": rr.tail_floor,
            "pattern_consistent": rr.pattern_consistent,
        }
    if cfg.fmt == "json":
        doc = trace_to_dict(tr)
        doc["limit_report"] = summary
        _emit(_json_dumps(doc), cfg.output)
    else:
        header, rows = trace_csv_rows(tr)
        _emit(_csv_text(header, rows), cfg.output)
    status = "empirically stationary" if tr.stationary else "stopped at max-iter"
    print(
        f"{status} after {rep.iterations_run} iterations; "
        f"zero indices {list(rep.zero_indices)}; "
        f"surviving set near-ONB: {rep.converged} (residual {rep.onb_residual:.3e})"
    )
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    results = run_battery(
        seed=cfg.seed,
        n_frames=cfg.random_frames,
        dep_tol=cfg.dep_tol,
        max_iter=cfg.max_iter,
        delta_onb=cfg.delta_onb,
    )
    print(f"seed={cfg.seed} random-frames={cfg.random_frames} dep-tol={cfg.dep_tol:g}")
    name_w = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        line = f"{r.name:<{name_w}}  {r.value:>12.5e}  {r.op}{r.threshold:<9.0e}  {status}"
        if r.detail:
            line += f"  ({r.detail})"
        print(line)
    n_ok = sum(r.ok for r in results)
    all_ok = n_ok == len(results)
    print(f"RESULT: {'PASS' if all_ok else 'FAIL'} ({n_ok}/{len(results)} checks)")
    return EXIT_OK if all_ok else EXIT_CHECK_FAILED


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if cfg.command == "run":
            return cmd_run(cfg)
        if cfg.command == "iterate":
            return cmd_iterate(cfg)
        return cmd_verify(cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
