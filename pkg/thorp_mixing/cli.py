"""
Command-line runner for the shuffle experiments.

Subcommands:
- mix: per-round distance from uniform and the mixing time.
- entropy-decay: ENT of the law after each round.
- contract: ENT(X_d o mu) / ENT(mu) over sampled mu, with fitted c_hat.
- pair: pair-chain checks, mixing times and |lambda_2| for d <= 6.
- couple: one coupled run, or the exhaustive sweep over oracle tables.
- lemmas: the randomized inequality suites.

Exit codes: 0 success, 1 a check failed during the run, 2 bad arguments
or a refused capacity.
"""
import argparse
import logging
import sys
import time

from thorp_mixing.constants import (
    CONVENTION_TAGS,
    DEFAULT_MIX_THRESHOLD,
    KERNEL_TOL,
    MAX_PAIR_D,
    PAIR_SLOPE_BOUND,
    TOOL_NAME,
    VERSION,
    env_log_level,
)
from thorp_mixing.exceptions import DomainError, InvariantViolation
from thorp_mixing.services.coupling import (
    FlipSchedule,
    coupled_run,
    exhaustive_coupling_sweep,
)
from thorp_mixing.services.lemmas import SUITES, run_lemma_suites
from thorp_mixing.services.mixing import (
    contraction_experiment,
    distance_curve,
    entropy_decay,
    mixing_profile,
    mixing_time,
)
from thorp_mixing.services.pair_chain import (
    growth_slope,
    pair_chain_build,
    pair_mixing_time,
    pair_spectral_estimate,
    row_sum_error,
    stationarity_error,
)
from thorp_mixing.utils.oracles import TabularOracle
from thorp_mixing.utils.permutations import DeckParams, Permutation
from thorp_mixing.utils.records import document_to_csv
from thorp_mixing.utils.seeding import resolve_master_seed
from thorp_mixing.utils.serialization import dump_document

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(name)s] %(levelname)s %(message)s"


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=None,
                        help="Master seed (default: $THORP_SEED or 0).")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--out", default=None, help="Write the document here instead of stdout.")
    parser.add_argument("--timing", action="store_true",
                        help="Embed the wall-clock runtime in the document.")
    parser.add_argument("--log-level", default=None,
                        help="Logging level (default: $THORP_LOG_LEVEL or WARNING).")


def build_parser():
    parser = argparse.ArgumentParser(prog=TOOL_NAME, description="Thorp shuffle mixing experiments.")
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    mix = sub.add_parser("mix", help="Distance curve and mixing time from the identity.")
    mix.add_argument("--d", type=int, required=True)
    mix.add_argument("--threshold", type=float, default=DEFAULT_MIX_THRESHOLD)

    decay = sub.add_parser("entropy-decay", help="ENT of the law per round.")
    decay.add_argument("--d", type=int, required=True)
    decay.add_argument("--rounds", type=int, default=None, help="Rounds to run (default: 2d).")

    contract = sub.add_parser("contract", help="Entropy contraction over d rounds.")
    contract.add_argument("--d", type=int, required=True)
    contract.add_argument("--samples", type=int, default=50)

    pair = sub.add_parser("pair", help="Two-card marginal chain.")
    pair.add_argument("--d", type=int, default=None, help="Single d (default: sweep 2..6).")
    pair.add_argument("--threshold", type=float, default=DEFAULT_MIX_THRESHOLD)

    couple = sub.add_parser("couple", help="Coupled run or exhaustive coupling sweep.")
    couple.add_argument("--d", type=int, required=True)
    schedule = couple.add_mutually_exclusive_group()
    schedule.add_argument("--T", type=int, default=1)
    schedule.add_argument("--geometric", action="store_true",
                          help="Draw T from Geometric(1/2) on {1, 2, ...} using the seed.")
    couple.add_argument("--table", type=int, default=None,
                        help="Run one coupled trace under oracle table INDEX instead of the sweep.")

    lemmas = sub.add_parser("lemmas", help="Randomized inequality suites.")
    lemmas.add_argument("--trials", type=int, default=1000)
    lemmas.add_argument("--suite", action="append", choices=[name for name, _ in SUITES],
                        help="Run only this suite (repeatable).")

    for child in (mix, decay, contract, pair, couple, lemmas):
        _add_common(child)
    return parser


def configure_logging(level_name=None):
    level_name = (level_name or env_log_level()).upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        raise DomainError(f"Unknown log level {level_name!r}.")
    logging.basicConfig(stream=sys.stderr, format=LOG_FORMAT, level=level, force=True)


def run_mix(args, seed):
    profile = mixing_profile(args.d, args.threshold)
    return {
        "mixing_time": profile.mixing_time,
        "monotone": profile.monotone,
        "records": distance_curve(args.d, profile.mixing_time),
    }, True


def run_entropy_decay(args, seed):
    rounds = 2 * args.d if args.rounds is None else args.rounds
    records = [{"round": t, "entropy": ent} for t, ent in enumerate(entropy_decay(args.d, rounds))]
    return {"records": records}, True


def run_contract(args, seed):
    report = contraction_experiment(args.d, args.samples, seed)
    summary = report.summary()
    summary.pop("d")
    summary["exact_mixing_time"] = mixing_time(args.d)
    return {**summary, "records": [s.to_dict() for s in report.samples]}, report.strict


def run_pair(args, seed):
    ds = [args.d] if args.d is not None else list(range(2, MAX_PAIR_D + 1))
    records = []
    ok = True
    for d in ds:
        chain = pair_chain_build(d)
        rows_err = row_sum_error(chain)
        stat_err = stationarity_error(chain)
        ok = ok and rows_err <= KERNEL_TOL and stat_err <= KERNEL_TOL
        records.append({
            "d": d,
            "states": chain.states,
            "row_sum_error": rows_err,
            "stationarity_error": stat_err,
            "mixing_time": pair_mixing_time(chain, args.threshold),
            "lambda2": pair_spectral_estimate(chain, seed=seed),
        })
    document = {"records": records}
    if len(records) >= 2:
        document["growth_slope"] = growth_slope(
            [r["d"] for r in records], [max(r["mixing_time"], 1) for r in records]
        )
        document["slope_within_bound"] = document["growth_slope"] <= PAIR_SLOPE_BOUND
    return document, ok


def run_couple(args, seed):
    if args.geometric:
        schedule = FlipSchedule.geometric(args.d, seed)
    else:
        schedule = FlipSchedule(T=args.T, d=args.d)
    if args.table is not None:
        params = DeckParams(args.d)
        oracle = TabularOracle.from_index(args.table, params.half, params.d)
        trace = coupled_run(Permutation.identity(params.n), oracle, schedule)
        records = [
            {"card": j, "T_j": schedule.t_j(j), "partner": trace.partners[j],
             "gamma": list(trace.gamma(j)), "gamma_tilde": list(trace.gamma(j, coupled=True))}
            for j in range(params.n)
        ]
        return {"trace": trace.to_dict(), "records": records}, True
    sweep = exhaustive_coupling_sweep(args.d, schedule.T)
    records = [
        {"rank": r, "count_x": sweep.x_counts[r], "count_x_tilde": sweep.x_tilde_counts[r]}
        for r in sorted(set(sweep.x_counts) | set(sweep.x_tilde_counts))
    ]
    return {"sweep": sweep.to_dict(), "schedule": schedule.to_dict(), "records": records}, sweep.passed


def run_lemmas(args, seed):
    results = run_lemma_suites(args.trials, seed, names=args.suite)
    violations = sum(r.violations for r in results)
    return {"violations": violations, "records": [r.to_dict() for r in results]}, violations == 0


HANDLERS = {
    "mix": run_mix,
    "entropy-decay": run_entropy_decay,
    "contract": run_contract,
    "pair": run_pair,
    "couple": run_couple,
    "lemmas": run_lemmas,
}

_COMMON = ("command", "seed", "format", "out", "timing", "log_level")


def config_echo(args, seed):
    config = {k: v for k, v in sorted(vars(args).items()) if k not in _COMMON}
    config["seed"] = seed
    return config


def build_document(args, seed, payload, runtime=None):
    """Result document: header fields, the command's payload, runtime only when requested."""
    document = {
        "tool": TOOL_NAME,
        "version": VERSION,
        "command": args.command,
        "config": config_echo(args, seed),
        "conventions": list(CONVENTION_TAGS),
        **payload,
    }
    if args.timing and runtime is not None:
        document["runtime_seconds"] = runtime
    return document


def render(document, fmt):
    return document_to_csv(document) if fmt == "csv" else dump_document(document)


def emit(text, out=None):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as file:
        file.write(text)


def run(argv=None):
    """
    Parse argv, run one subcommand and emit its document.

    Returns:
        int: Exit code (0 ok, 1 failed check, 2 bad arguments or capacity).
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2

    try:
        configure_logging(args.log_level)
        seed = resolve_master_seed(args.seed)
        started = time.perf_counter()
        payload, ok = HANDLERS[args.command](args, seed)
        runtime = time.perf_counter() - started
    except InvariantViolation as exc:
        logger.error("Invariant violated: %s", exc)
        sys.stderr.write(f"{TOOL_NAME}: invariant violated: {exc}\n")
        return 1
    except (DomainError, ValueError) as exc:
        sys.stderr.write(f"{TOOL_NAME}: {exc}\n")
        return 2

    logger.info("%s finished in %.3f s", args.command, runtime)
    emit(render(build_document(args, seed, payload, runtime), args.format), args.out)
    if not ok:
        logger.error("%s: a check failed, see the document", args.command)
        return 1
    return 0
