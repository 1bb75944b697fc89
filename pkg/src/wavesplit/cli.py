"""Command-line front end: ``wavesplit <command> [options]``.

Commands: engineer, verify, evolve, carpet, disorder, entangle.

Options may also come from a ``key = value`` file given with ``--config``
(keys are option names with dashes or underscores); command-line flags win.

Exit codes: 0 success, 2 bad input, 3 solver did not converge,
4 verification failed, 5 memory budget exceeded.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .disorder import DEFAULT_STRENGTHS, KINDS, MODES, DisorderSpec, disorder_sweep
from .engineer import (
    SolverConfig,
    engineer_splitting,
    splitting_phase_check,
    verify_splitting,
)
from .errors import BudgetExceeded, SolverError, WavesplitError
from .fock import BoseHubbardParams, carpet
from .lattice import (
    GOLDEN_PATTERNS,
    ChainSpec,
    check_mirror_symmetry,
    decompose_pattern,
    eigenvector_parity,
    pst_couplings,
)
from .spin import nested_bell_pairs, single_excitation_bell
from .walk import single_particle_carpet

log = logging.getLogger("wavesplit")

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_NOT_CONVERGED = 3
EXIT_VERIFY_FAILED = 4
EXIT_BUDGET = 5


def _add_chain_options(p):
    p.add_argument("--length", "-L", type=int, required=False, help="number of sites")
    p.add_argument("--theta", type=float, default=np.pi / 4, help="splitting angle in radians")
    p.add_argument("--energy-unit", "-J", type=float, default=1.0, help="energy scale J, t* = L/J")


def _add_pattern_options(p):
    _add_chain_options(p)
    p.add_argument("--pattern", type=Path, help="pattern file; engineered from --length if omitted")
    p.add_argument("--tol", type=float, default=1e-12, help="solver residual tolerance")
    p.add_argument("--max-iter", type=int, default=200)


def _times(args, t_star):
    if args.times:
        return np.array(args.times, dtype=float)
    t_max = args.t_max if args.t_max is not None else 2 * t_star
    return np.linspace(0.0, t_max, args.steps + 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wavesplit", description=__doc__.splitlines()[0])
    parser.add_argument("--config", type=Path, help="key = value option file")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("engineer", help="solve for a perfect-splitting pattern")
    _add_chain_options(p)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--out", type=Path, help="pattern file to write")
    p.add_argument("--trace", type=Path, help="solver trace CSV to write")

    p = sub.add_parser("verify", help="check a pattern against the splitting criteria")
    _add_pattern_options(p)
    p.add_argument("--builtin", choices=sorted(GOLDEN_PATTERNS) + ["pst"])
    p.add_argument("--check-tol", type=float, default=2e-4)

    for name, helptext in (
        ("evolve", "single-particle probability raster"),
        ("carpet", "many-boson occupation rasters"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_pattern_options(p)
        p.add_argument("--times", type=float, nargs="+")
        p.add_argument("--t-max", type=float)
        p.add_argument("--steps", type=int, default=200)
        p.add_argument("--out", type=Path, required=True)
        if name == "evolve":
            p.add_argument("--site", type=int, required=True)
        else:
            p.add_argument("--sites", type=int, nargs="+", required=True)
            p.add_argument("--interaction", nargs="+", default=["0"], help="U values or 'hardcore'")
            p.add_argument("--slice-sites", type=int, nargs="+", help="also write single-site time slices")

    p = sub.add_parser("disorder", help="Monte-Carlo robustness sweep")
    _add_pattern_options(p)
    p.add_argument("--kind", choices=KINDS, default="hopping")
    p.add_argument("--strengths", type=float, nargs="+", default=list(DEFAULT_STRENGTHS))
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=MODES, default="free")
    p.add_argument("--sites", type=int, nargs=2)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("entangle", help="mirror-pair entanglement report")
    _add_pattern_options(p)
    p.add_argument("--initial", default="afm", help="single:<n>, dm or afm")
    p.add_argument("--time", type=float)
    p.add_argument("--out", type=Path, required=True)
    return parser


def read_config(path: Path) -> dict[str, str]:
    out = {}
    for raw in path.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"config line is not 'key = value': {raw!r}")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(subparser: argparse.ArgumentParser, config: dict[str, str]):
    defaults = {}
    for action in subparser._actions:
        if action.dest not in config:
            continue
        value = config[action.dest]
        if action.nargs in ("+", "*") or isinstance(action.nargs, int):
            items = value.replace(",", " ").split()
            defaults[action.dest] = [action.type(v) if action.type else v for v in items]
        else:
            defaults[action.dest] = value
        # a config value satisfies a required option
        action.required = False
    subparser.set_defaults(**defaults)


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    if known.config is not None:
        config = read_config(known.config)
        choices = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices
        for sp in choices.values():
            _apply_config(sp, config)
    return parser.parse_args(argv)


def _spec_from_args(args, length=None) -> ChainSpec:
    L = length if length is not None else args.length
    if L is None:
        raise ValueError("--length is required when no pattern file is given")
    return ChainSpec(L, args.energy_unit, args.theta)


def _solver_config(args) -> SolverConfig:
    return SolverConfig(tolerance=args.tol, max_iterations=args.max_iter)


def load_pattern(args):
    """Pattern and chain spec from ``--pattern`` or a fresh solve."""
    if getattr(args, "builtin", None):
        if args.builtin == "pst":
            spec = _spec_from_args(args)
            return pst_couplings(spec), spec
        pattern = GOLDEN_PATTERNS[args.builtin]
        return pattern, ChainSpec(pattern.length, args.energy_unit, args.theta)
    if args.pattern is not None:
        pattern, spec = io.read_pattern(args.pattern)
        return pattern, spec or _spec_from_args(args, pattern.length)
    spec = _spec_from_args(args)
    result = engineer_splitting(spec, _solver_config(args))
    if not result.converged:
        raise SolverError("solver did not converge", result.pattern, result.iterations, result.residual)
    return result.pattern, spec


def cmd_engineer(args) -> int:
    spec = _spec_from_args(args)
    result = engineer_splitting(spec, _solver_config(args))
    if args.out:
        io.write_pattern(args.out, result.pattern, spec)
    if args.trace:
        io.write_trace(args.trace, result.trace)
    dev = verify_splitting(result.pattern, spec).deviation
    print(
        f"L={spec.length} converged={result.converged} iterations={result.iterations} "
        f"residual={result.residual:.3e} field_norm={result.field_norm:.3e} splitting_deviation={dev:.3e}"
    )
    if args.out is None:
        sys.stdout.write(io.format_pattern(result.pattern, spec))
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def verification_checks(pattern, spec: ChainSpec, tol: float) -> list[tuple[str, bool, str]]:
    """Named pass/fail checks with a diagnostic string each."""
    checks = []
    mirror = check_mirror_symmetry(pattern)
    checks.append(("mirror-symmetry", mirror.symmetric, f"asymmetry={mirror.asymmetry:.3e}"))
    decomp = decompose_pattern(pattern)
    try:
        parity = eigenvector_parity(decomp)
        checks.append(("parity", parity.alternates, f"signs={''.join('+' if s > 0 else '-' for s in parity.signs)}"))
    except WavesplitError as exc:
        checks.append(("parity", False, str(exc)))
    phase = splitting_phase_check(decomp, spec)
    checks.append((
        "spectrum-phase",
        phase.residual <= tol,
        f"residual={phase.residual:.3e} phase_residual={phase.phase_residual:.3e} "
        f"global_phase={phase.global_phase:.6f} orientation={phase.orientation:+d}",
    ))
    report = verify_splitting(pattern, spec)
    prob_dev = float(np.abs(report.magnitudes**2 - report.expected**2).max())
    checks.append((
        "propagator",
        report.deviation <= tol and prob_dev <= tol,
        f"modulus_deviation={report.deviation:.3e} probability_deviation={prob_dev:.3e}",
    ))
    return checks


def cmd_verify(args) -> int:
    pattern, spec = load_pattern(args)
    checks = verification_checks(pattern, spec, args.check_tol)
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name} {detail}")
    ok = all(c[1] for c in checks)
    print("verification passed" if ok else "verification failed")
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def cmd_evolve(args) -> int:
    pattern, spec = load_pattern(args)
    series = single_particle_carpet(pattern, args.site, _times(args, spec.revival_time))
    meta = io.chain_metadata(pattern, spec) | {"site": args.site}
    io.write_raster(args.out, series, meta)
    return EXIT_OK


def _label(value: str) -> str:
    return "hardcore" if value == "hardcore" else f"U{float(value):g}"


def cmd_carpet(args) -> int:
    pattern, spec = load_pattern(args)
    times = _times(args, spec.revival_time)
    multi = len(args.interaction) > 1
    for value in args.interaction:
        interaction = "hardcore" if value == "hardcore" else float(value)
        series = carpet(BoseHubbardParams.from_pattern(pattern, interaction), args.sites, times)
        meta = io.chain_metadata(pattern, spec) | {"sites": list(args.sites), "interaction": value}
        out = args.out.with_name(f"{args.out.stem}_{_label(value)}{args.out.suffix}") if multi else args.out
        io.write_carpet(out, series, meta)
        if args.slice_sites:
            io.write_carpet(out.with_name(f"{out.stem}_slices{out.suffix}"), series, meta, args.slice_sites)
        log.info("wrote %s", out)
    return EXIT_OK


def cmd_disorder(args) -> int:
    pattern, spec = load_pattern(args)
    disorder = DisorderSpec(args.kind, tuple(args.strengths), args.samples, args.seed)
    result = disorder_sweep(pattern, disorder, spec, args.mode, args.sites)
    meta = io.chain_metadata(pattern, spec) | {
        "kind": result.kind,
        "mode": result.mode,
        "sites": list(result.sites),
        "baseline": result.baseline,
        "rng": "numpy Philox, SeedSequence(seed, spawn_key=(strength_index, sample_index))",
    }
    io.write_sweep(args.out, result, meta)
    for pt in result.points:
        print(f"strength={pt.strength:g} mean={pt.mean:.6e} stderr={pt.stderr:.2e} samples={pt.samples}")
    return EXIT_OK


def cmd_entangle(args) -> int:
    pattern, spec = load_pattern(args)
    t = args.time if args.time is not None else spec.revival_time
    meta = io.chain_metadata(pattern, spec) | {"initial": args.initial, "time": t}
    if args.initial.startswith("single:"):
        n = int(args.initial.split(":", 1)[1])
        fidelity = single_excitation_bell(pattern, n, t)
        io.write_table(args.out, ("site", "mirror", "bell_fidelity"), [(n, pattern.length + 1 - n, fidelity)])
        io.write_sidecar(args.out, meta)
        print(f"pair ({n}, {pattern.length + 1 - n}) bell_fidelity={fidelity:.12f}")
        return EXIT_OK
    report = nested_bell_pairs(args.initial, pattern, t)
    io.write_report(args.out, report, meta)
    for (a, b), c, f in zip(report.pairs, report.concurrences, report.bell_fidelities):
        print(f"pair ({a}, {b}) concurrence={c:.12f} bell_fidelity={f:.12f}")
    return EXIT_OK


COMMANDS = {
    "engineer": cmd_engineer,
    "verify": cmd_verify,
    "evolve": cmd_evolve,
    "carpet": cmd_carpet,
    "disorder": cmd_disorder,
    "entangle": cmd_entangle,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
