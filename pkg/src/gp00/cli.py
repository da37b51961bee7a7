"""Batch experiment driver.

Subcommands expose every analysis and simulation capability as
machine-readable output: CSV for series (with ``#`` comment headers carrying
command, parameters, seed and version) and a single JSON object for scalars.
Exit codes: 0 success, 2 protocol abort (an expected outcome), 64 usage
error, 65 numerical failure (no bracket / no convergence).

Examples:
    gp00 epsilon-s --rhat 0.289
    gp00 epsilon-s --rhat-range 0.2:1.0:17 --discrete --mc 100000
    gp00 threshold --target 0.11 --discrete
    gp00 threshold --rate improved
    gp00 leakage --rhat 0.289 --phi-grid 33
    gp00 security --eps-grid 0.01:0.2:20
    gp00 simulate --n 1000 --rhat 0.35 --runs 5 --adversary none
    gp00 equivalence --rhat 0.289
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Sequence, TextIO

import numpy as np

from . import __version__, analysis, protocol, states
from .encoding import SQRT_PI
from .numerics import BracketError, ConvergenceError, binary_entropy

EXIT_OK = 0
EXIT_ABORTED = 2
EXIT_USAGE = 64
EXIT_NUMERIC = 65

DEFAULT_SEED = 12345
SEED_ENV_VAR = "GP00_SEED"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 64 instead of argparse's default 2
        raise _UsageError(message)


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError as exc:
        raise _UsageError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from exc


def _parse_range(text: str) -> np.ndarray:
    try:
        lo_s, hi_s, count_s = text.split(":")
        lo, hi, count = float(lo_s), float(hi_s), int(count_s)
    except ValueError as exc:
        raise _UsageError(f"range must look like LO:HI:COUNT, got {text!r}") from exc
    if count < 1 or hi < lo:
        raise _UsageError(f"bad range {text!r}")
    return np.linspace(lo, hi, count)


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


@dataclass(frozen=True)
class ExperimentRecord:
    """One command invocation and its outputs; every emitted file embeds the
    full parameter set plus version, so it can be re-run from its own header."""

    command: str
    params: dict
    version: str = __version__
    outputs: dict = field(default_factory=dict)

    def header_lines(self) -> list[str]:
        lines = [f"# gp00 {self.version}", f"# command: {self.command}"]
        for key in sorted(self.params):
            lines.append(f"# {key} = {self.params[key]}")
        return lines

    def to_json(self) -> str:
        obj = {"tool": "gp00", "version": self.version, "command": self.command,
               "params": self.params}
        obj.update(self.outputs)
        return json.dumps(obj, sort_keys=True)


def _emit_csv(out: TextIO, command: str, params: dict, columns: list[str], rows: list[list]) -> None:
    record = ExperimentRecord(command=command, params=params)
    for line in record.header_lines():
        print(line, file=out)
    print(",".join(columns), file=out)
    for row in rows:
        print(",".join(_fmt(v) for v in row), file=out)


def _emit_json(out: TextIO, command: str, params: dict, results: dict) -> None:
    record = ExperimentRecord(command=command, params=params, outputs=results)
    print(record.to_json(), file=out)


def cmd_epsilon_s(args, out: TextIO) -> int:
    params = {
        "discrete": args.discrete,
        "bits": args.bits,
        "mc_trials": args.mc,
        "seed": args.seed,
    }

    def evaluate(r_hat: float, row_index: int) -> list:
        if args.discrete:
            value = analysis.epsilon_s_discrete(r_hat, args.bits)
        else:
            value = analysis.epsilon_s(r_hat)
        row = [r_hat, value]
        if args.mc:
            rng = np.random.default_rng(
                np.random.SeedSequence(args.seed, spawn_key=(row_index,))
            )
            est, se = analysis.epsilon_s_mc(
                r_hat, args.bits, discrete=args.discrete, trials=args.mc, rng=rng
            )
            row += [est, se]
        return row

    columns = ["rhat", "epsilon_s"] + (["mc_estimate", "mc_se"] if args.mc else [])
    if args.rhat_range is not None:
        rows = [evaluate(float(r), i) for i, r in enumerate(_parse_range(args.rhat_range))]
        _emit_csv(out, "epsilon-s", params, columns, rows)
    else:
        if args.rhat is None:
            raise _UsageError("one of --rhat or --rhat-range is required")
        row = evaluate(args.rhat, 0)
        _emit_json(out, "epsilon-s", params, dict(zip(columns, row)))
    return EXIT_OK


def cmd_threshold(args, out: TextIO) -> int:
    if args.rate is not None:
        eps_star = analysis.rate_threshold(improved=(args.rate == "improved"))
        _emit_json(out, "threshold", {"rate": args.rate}, {"eps_star": eps_star})
        return EXIT_OK
    r_star = analysis.min_squeezing(args.target, discrete=args.discrete, bits_per_state=args.bits)
    _emit_json(
        out,
        "threshold",
        {"target": args.target, "discrete": args.discrete, "bits": args.bits},
        {"rhat_star": r_star},
    )
    return EXIT_OK


def cmd_leakage(args, out: TextIO) -> int:
    if args.phi is not None:
        _emit_json(
            out,
            "leakage",
            {"rhat": args.rhat},
            {"phi": args.phi, "leakage": analysis.leakage(args.rhat, args.phi)},
        )
        return EXIT_OK
    grid = np.linspace(0.0, SQRT_PI, args.phi_grid, endpoint=False)
    rows = [[float(p), analysis.leakage(args.rhat, float(p))] for p in grid]
    _emit_csv(out, "leakage", {"rhat": args.rhat, "phi_grid": args.phi_grid}, ["phi", "leakage"], rows)
    return EXIT_OK


_SECURITY_COLUMNS = [
    "eps",
    "lambda4_star",
    "H_Z_max",
    "H_ZW_max",
    "R_basic",
    "R_improved",
    "H_Z_closed",
    "H_ZW_closed",
    "R_basic_closed",
    "R_improved_closed",
]


def _security_row(eps: float) -> list:
    lambda4_star, _ = analysis.max_entropy(eps)
    report = analysis.rate_report(eps)
    h = binary_entropy(eps)
    return [
        eps,
        lambda4_star,
        report.H_Z_max,
        report.H_ZW_max,
        report.R_basic,
        report.R_improved,
        2.0 * h,
        h,
        1.0 - 3.0 * h,
        1.0 - 2.0 * h,
    ]


def cmd_security(args, out: TextIO) -> int:
    if args.eps_grid is not None:
        rows = []
        for eps in _parse_range(args.eps_grid):
            if not 0.0 < eps < 0.5:
                raise _UsageError(f"eps grid values must be in (0, 0.5), got {eps}")
            rows.append(_security_row(float(eps)))
        _emit_csv(out, "security", {"eps_grid": args.eps_grid}, _SECURITY_COLUMNS, rows)
        return EXIT_OK
    if args.eps is None:
        raise _UsageError("one of --eps or --eps-grid is required")
    if not 0.0 < args.eps < 0.5:
        raise _UsageError(f"--eps must be in (0, 0.5), got {args.eps}")
    row = _security_row(args.eps)
    _emit_json(out, "security", {}, dict(zip(_SECURITY_COLUMNS, row)))
    return EXIT_OK


_ADVERSARIES = {
    "none": lambda: None,
    "intercept-resend": protocol.InterceptResendAdversary,
    "classical-only": protocol.ClassicalEavesdropper,
}


def cmd_simulate(args, out: TextIO) -> int:
    params = {
        "n": args.n,
        "rhat": args.rhat,
        "bits": args.bits,
        "adversary": args.adversary,
        "sampling": args.sampling,
        "abort_threshold": args.abort_threshold,
        "seed": args.seed,
        "runs": args.runs,
    }
    run_seeds = [
        int(s.generate_state(1, dtype=np.uint64)[0])
        for s in np.random.SeedSequence(args.seed).spawn(args.runs)
    ]
    rows = []
    completions = 0
    last_result = None
    for run, run_seed in enumerate(run_seeds):
        config = protocol.SessionConfig(
            n=args.n,
            r_hat=args.rhat,
            bits_per_state=args.bits,
            abort_threshold=args.abort_threshold,
            seed=run_seed,
            sampling=args.sampling,
            prepared_count=args.prepared_count,
        )
        result = protocol.run_session(config, _ADVERSARIES[args.adversary]())
        last_result = result
        if not result.aborted:
            completions += 1
        rows.append(
            [
                run,
                run_seed,
                result.sifted_count,
                "" if result.observed_eps is None else result.observed_eps,
                int(result.aborted),
                result.abort_reason or "",
                0 if result.final_key is None else int(result.final_key.size),
                result.leak_bits,
            ]
        )
    eps_values = [r[3] for r in rows if r[3] != ""]
    key_lengths = [r[6] for r in rows if r[4] == 0]
    params["completed"] = completions
    params["mean_observed_eps"] = _fmt(float(np.mean(eps_values))) if eps_values else ""
    params["mean_final_key_bits"] = _fmt(float(np.mean(key_lengths))) if key_lengths else ""
    _emit_csv(
        out,
        "simulate",
        params,
        ["run", "seed", "sifted", "observed_eps", "aborted", "abort_reason", "final_key_bits", "leak_bits"],
        rows,
    )
    if args.transcript and last_result is not None:
        with open(args.transcript, "w") as fh:
            fh.write(last_result.transcript.to_jsonl())
    return EXIT_OK if completions > 0 else EXIT_ABORTED


def cmd_equivalence(args, out: TextIO) -> int:
    sigma = states.alice_sigma(args.rhat)
    grid = np.linspace(-5.0 * sigma, 5.0 * sigma, args.grid_points)
    report = states.entanglement_equivalence(args.rhat, grid)
    _emit_json(
        out,
        "equivalence",
        {"rhat": args.rhat, "grid_points": args.grid_points},
        {
            "delta_sq": report.delta_sq,
            "max_density_diff": report.max_density_diff,
            "max_mean_diff": report.max_mean_diff,
            "variance_diff": report.variance_diff,
        },
    )
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="gp00", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gp00 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("epsilon-s", help="intrinsic same-basis error probability")
    p.add_argument("--rhat", type=float)
    p.add_argument("--rhat-range", type=str, help="LO:HI:COUNT")
    p.add_argument("--discrete", action="store_true")
    p.add_argument("--bits", type=int, default=1)
    p.add_argument("--mc", type=int, default=0, help="Monte Carlo cross-check trials")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(handler=cmd_epsilon_s)

    p = sub.add_parser("threshold", help="squeezing or error-rate thresholds")
    p.add_argument("--target", type=float, default=0.11)
    p.add_argument("--discrete", action="store_true")
    p.add_argument("--bits", type=int, default=1)
    p.add_argument("--rate", choices=("basic", "improved"))
    p.set_defaults(handler=cmd_threshold)

    p = sub.add_parser("leakage", help="announcement leakage about the encoded bit")
    p.add_argument("--rhat", type=float, required=True)
    p.add_argument("--phi", type=float)
    p.add_argument("--phi-grid", type=int, default=33)
    p.set_defaults(handler=cmd_leakage)

    p = sub.add_parser("security", help="entropy maximization and key rates")
    p.add_argument("--eps", type=float)
    p.add_argument("--eps-grid", type=str, help="LO:HI:COUNT")
    p.set_defaults(handler=cmd_security)

    p = sub.add_parser("simulate", help="run full protocol sessions")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rhat", type=float, required=True)
    p.add_argument("--bits", type=int, default=1)
    p.add_argument("--adversary", choices=sorted(_ADVERSARIES), default="none")
    p.add_argument("--sampling", choices=("continuous", "discrete"), default="continuous")
    p.add_argument("--abort-threshold", type=float, default=0.11)
    p.add_argument("--prepared-count", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--transcript", type=str, help="dump last run's transcript (JSONL)")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("equivalence", help="dealer-based equivalence identities")
    p.add_argument("--rhat", type=float, required=True)
    p.add_argument("--grid-points", type=int, default=101)
    p.set_defaults(handler=cmd_equivalence)

    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = out if out is not None else sys.stdout
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if hasattr(args, "seed") and args.seed is None:
            args.seed = _default_seed()
        return args.handler(args, out)
    except _UsageError as exc:
        print(f"gp00: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BracketError, ConvergenceError) as exc:
        print(f"gp00: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"gp00: invalid value: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
