"""Monte Carlo experiment runner: seeded trials, success accounting, audits.

Each trial independently draws an instance and a population, runs the
configured solver, checks the answer against the problem's ground-truth
oracle, and audits the transcript. Everything derives from the experiment
seed, so results (wall time aside) are bit-for-bit reproducible.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, replace
from typing import Any, Iterable, Sequence, TextIO

from ._rng import derive_key
from .engine import (
    InteractivityMode,
    LdpSimError,
    execute,
    round_complexity,
    sample_complexity,
    sample_population,
)
from .problems import chase_pointers, gen_hl_instance, gen_pc_instance, hl_consistent
from .randomizers import audit_transcript
from .solvers import (
    DecodeFailure,
    HLBaselineDriver,
    HLSolverConfig,
    HLSolverDriver,
    PCSolverConfig,
    PCSolverDriver,
)

WILSON_Z = 1.96

HL_FULL = "hl-full"
HL_BASELINE = "hl-baseline"
PC = "pc"


@dataclass(frozen=True)
class HLShape:
    branching: int
    num_levels: int


@dataclass(frozen=True)
class PCShape:
    hops: int
    size: int


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo experiment.

    ``group_size`` is the population size n for the fully interactive
    hidden-layers solver, the per-query group for the sequential baseline,
    and the per-bit group m for the pointer-chasing solver. ``gamma_target``
    and ``eta`` are the error budget and slack carried to capped reductions;
    they must satisfy gamma_target + eta < 1.
    """

    problem: HLShape | PCShape
    solver: str
    epsilon: float
    trials: int
    seed: int
    group_size: int
    threshold: float | None = None
    gamma_target: float = 1.0 / 6.0
    eta: float = 0.1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.group_size < 1:
            raise ValueError("group_size must be at least 1")
        if not (0.0 < self.gamma_target < 1.0):
            raise ValueError("gamma_target must lie in (0, 1)")
        if self.gamma_target + self.eta >= 1.0:
            raise ValueError("gamma_target + eta must be below 1")
        if self.solver in (HL_FULL, HL_BASELINE):
            if not isinstance(self.problem, HLShape):
                raise ValueError(f"solver {self.solver} needs a hidden-layers shape")
        elif self.solver == PC:
            if not isinstance(self.problem, PCShape):
                raise ValueError("solver pc needs a pointer-chasing shape")
        else:
            raise ValueError(f"unknown solver {self.solver!r}")


@dataclass(frozen=True)
class ExperimentResult:
    """Aggregates over the trials of one experiment."""

    success_count: int
    trials: int
    success_rate: float
    wilson_ci_95: tuple[float, float]
    mean_sample_complexity: float
    mean_round_complexity: float
    max_user_audit: float
    wall_time: float
    wrong_answer_count: int
    decode_failure_count: int
    engine_error_count: int

    def __post_init__(self):
        if self.success_rate != self.success_count / self.trials:
            raise ValueError("success_rate must equal success_count / trials")
        lo, hi = self.wilson_ci_95
        if not (0.0 <= lo <= hi <= 1.0):
            raise ValueError("confidence bounds must lie in [0, 1]")

    def to_dict(self, include_wall_time: bool = True) -> dict[str, Any]:
        out = {
            "success_count": self.success_count,
            "trials": self.trials,
            "success_rate": self.success_rate,
            "wilson_low": self.wilson_ci_95[0],
            "wilson_high": self.wilson_ci_95[1],
            "mean_sample_complexity": self.mean_sample_complexity,
            "mean_round_complexity": self.mean_round_complexity,
            "max_user_audit": self.max_user_audit,
            "wrong_answer_count": self.wrong_answer_count,
            "decode_failure_count": self.decode_failure_count,
            "engine_error_count": self.engine_error_count,
        }
        if include_wall_time:
            out["wall_time"] = self.wall_time
        return out


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = phat + z2 / (2.0 * trials)
    spread = z * math.sqrt(phat * (1.0 - phat) / trials + z2 / (4.0 * trials * trials))
    low = max(0.0, (center - spread) / denom)
    high = min(1.0, (center + spread) / denom)
    # the closed form collapses exactly at the degenerate ends
    if successes == 0:
        low = 0.0
    if successes == trials:
        high = 1.0
    return (low, high)


def _pc_population_size(shape: PCShape, m: int) -> int:
    num_bits = max(1, math.ceil(math.log2(shape.size)))
    return (shape.hops + 1) * num_bits * m


def _run_trial(cfg: ExperimentConfig, trial: int) -> dict[str, Any]:
    tseed = derive_key(cfg.seed, "trial", trial)
    if isinstance(cfg.problem, HLShape):
        shape = cfg.problem
        instance = gen_hl_instance(shape.branching, shape.num_levels, derive_key(tseed, "instance"))
        threshold = 0.2 if cfg.threshold is None else cfg.threshold
        if cfg.solver == HL_FULL:
            driver = HLSolverDriver(
                shape.branching,
                shape.num_levels,
                HLSolverConfig(epsilon=cfg.epsilon, n=cfg.group_size, threshold=threshold),
            )
            pop_size = cfg.group_size
            mode = InteractivityMode.FULL
        else:
            driver = HLBaselineDriver(
                shape.branching,
                shape.num_levels,
                per_query_group=cfg.group_size,
                epsilon=cfg.epsilon,
                threshold=threshold,
            )
            pop_size = shape.branching * shape.num_levels * cfg.group_size
            mode = InteractivityMode.SEQUENTIAL
        oracle = lambda answer: (  # noqa: E731
            isinstance(answer, tuple) and hl_consistent(answer, instance)
        )
    else:
        shape = cfg.problem
        instance = gen_pc_instance(shape.hops, shape.size, derive_key(tseed, "instance"))
        threshold = 0.15 if cfg.threshold is None else cfg.threshold
        driver = PCSolverDriver(
            shape.hops,
            shape.size,
            PCSolverConfig(epsilon=cfg.epsilon, m=cfg.group_size, threshold=threshold),
        )
        pop_size = _pc_population_size(shape, cfg.group_size)
        mode = InteractivityMode.SEQUENTIAL
        expected = chase_pointers(instance)
        oracle = lambda answer: answer == expected  # noqa: E731

    alice_datum, bob_datum = instance.data_pair()
    population = sample_population(
        pop_size, alice_datum.payload, bob_datum.payload, derive_key(tseed, "population")
    )
    outcome = {
        "success": False,
        "wrong_answer": False,
        "decode_failure": False,
        "engine_error": False,
        "samples": 0,
        "rounds": 0,
        "max_audit": 0.0,
    }
    try:
        result = execute(driver, population, mode, seed=derive_key(tseed, "execution"))
        # structural fact behind the walk's privacy accounting: a user's
        # predicate holds for at most one probed edge per hidden level
        if cfg.solver == HL_FULL and int(result.one_vote_counts.max()) > 1:
            raise LdpSimError("a user voted 1 more than once in a single walk")
    except LdpSimError:
        outcome["engine_error"] = True
        return outcome
    outcome["samples"] = sample_complexity(result.transcript)
    outcome["rounds"] = round_complexity(result.transcript)
    report = audit_transcript(result.transcript, population, result.query_log)
    outcome["max_audit"] = report.max_ratio()
    if isinstance(result.answer, DecodeFailure):
        outcome["decode_failure"] = True
    elif oracle(result.answer):
        outcome["success"] = True
    else:
        outcome["wrong_answer"] = True
    return outcome


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run ``cfg.trials`` independent seeded trials and aggregate.

    Solver and engine errors are counted as failures and reported in their
    own columns; decode failures likewise. The audit column is the maximum
    per-user audit value over every trial.
    """
    start = time.perf_counter()
    outcomes = [_run_trial(cfg, t) for t in range(cfg.trials)]
    successes = sum(o["success"] for o in outcomes)
    return ExperimentResult(
        success_count=successes,
        trials=cfg.trials,
        success_rate=successes / cfg.trials,
        wilson_ci_95=wilson_interval(successes, cfg.trials),
        mean_sample_complexity=sum(o["samples"] for o in outcomes) / cfg.trials,
        mean_round_complexity=sum(o["rounds"] for o in outcomes) / cfg.trials,
        max_user_audit=max(o["max_audit"] for o in outcomes),
        wall_time=time.perf_counter() - start,
        wrong_answer_count=sum(o["wrong_answer"] for o in outcomes),
        decode_failure_count=sum(o["decode_failure"] for o in outcomes),
        engine_error_count=sum(o["engine_error"] for o in outcomes),
    )


SWEEP_AXES = {
    "n": ("group_size", int),
    "m": ("group_size", int),
    "group_size": ("group_size", int),
    "epsilon": ("epsilon", float),
    "trials": ("trials", int),
    "B": ("branching", int),
    "L": ("num_levels", int),
    "k": ("hops", int),
    "l": ("size", int),
}


def _with_axis(cfg: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {sorted(SWEEP_AXES)}")
    attr, cast = SWEEP_AXES[axis]
    value = cast(value)
    if attr in ("group_size", "epsilon", "trials"):
        return replace(cfg, **{attr: value})
    if isinstance(cfg.problem, HLShape) and attr in ("branching", "num_levels"):
        return replace(cfg, problem=replace(cfg.problem, **{attr: value}))
    if isinstance(cfg.problem, PCShape) and attr in ("hops", "size"):
        return replace(cfg, problem=replace(cfg.problem, **{attr: value}))
    raise ValueError(f"axis {axis!r} does not apply to this problem")


def sweep(cfg: ExperimentConfig, axis: str, values: Sequence) -> list[tuple[Any, ExperimentResult]]:
    """One run_experiment per axis value; empty values give an empty table."""
    return [(value, run_experiment(_with_axis(cfg, axis, value))) for value in values]


# CSV columns, fixed: config echo then result fields (wall time excluded so
# rows are reproducible from config and seed alone).
CSV_COLUMNS = [
    "problem",
    "solver",
    "shape",
    "epsilon",
    "trials",
    "seed",
    "group_size",
    "threshold",
    "axis",
    "axis_value",
    "success_count",
    "success_rate",
    "wilson_low",
    "wilson_high",
    "mean_sample_complexity",
    "mean_round_complexity",
    "max_user_audit",
    "wrong_answer_count",
    "decode_failure_count",
    "engine_error_count",
]


def _config_echo(cfg: ExperimentConfig) -> dict[str, Any]:
    if isinstance(cfg.problem, HLShape):
        problem, shape = "hl", f"B={cfg.problem.branching};L={cfg.problem.num_levels}"
    else:
        problem, shape = "pc", f"k={cfg.problem.hops};l={cfg.problem.size}"
    return {
        "problem": problem,
        "solver": cfg.solver,
        "shape": shape,
        "epsilon": repr(cfg.epsilon),
        "trials": cfg.trials,
        "seed": cfg.seed,
        "group_size": cfg.group_size,
        "threshold": "" if cfg.threshold is None else repr(cfg.threshold),
    }


def result_rows(
    cfg: ExperimentConfig,
    results: Iterable[tuple[Any, ExperimentResult]],
    axis: str = "",
) -> list[dict[str, Any]]:
    rows = []
    for value, result in results:
        row = _config_echo(cfg if axis == "" else _with_axis(cfg, axis, value))
        row["axis"] = axis
        row["axis_value"] = "" if axis == "" else value
        row.update(
            (k, v)
            for k, v in result.to_dict(include_wall_time=False).items()
            if k in CSV_COLUMNS
        )
        rows.append(row)
    return rows


def write_csv(rows: Iterable[dict[str, Any]], stream: TextIO) -> None:
    writer = csv.DictWriter(stream, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
