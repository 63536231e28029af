"""Sweeps of closed-loop runs over start points, seeds and disturbance scenarios."""

from __future__ import annotations

import csv
import math
import statistics
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from continuum_dvs.kinematics import TendonDisplacement
from continuum_dvs.servo.controller import (
    PerturbationConfig,
    ServoConfig,
    ServoPlant,
    run_servo,
)
from continuum_dvs.utils.logging import get_logger, log_performance
from continuum_dvs.utils.seeding import TAG_EVAL, derive_rng

logger = get_logger(__name__)

Scenario = Literal["nominal", "dynamic_lighting", "dynamic_occlusion", "static_occlusion", "all"]
SCENARIOS: tuple[Scenario, ...] = (
    "nominal",
    "dynamic_lighting",
    "dynamic_occlusion",
    "static_occlusion",
    "all",
)

DEFAULT_STARTS_MM = ((6.0, -4.0), (5.0, -7.0), (-2.0, 2.0))

SWEEP_COLUMNS = (
    "run",
    "start_q1_mm",
    "start_q2_mm",
    "seed",
    "converged",
    "iterations",
    "final_norm_mm",
    "initial_sad",
    "final_sad",
)


def scenario_config(base: PerturbationConfig, scenario: Scenario) -> PerturbationConfig:
    """Enable the disturbances of a named scenario on top of ``base`` ranges.

    ``nominal`` disables everything; ``all`` enables joint noise, gain scaling,
    lighting, dynamic occlusion and keeps the static rectangles.
    """
    flags = {
        "nominal": (False, False, False, False, False),
        "dynamic_lighting": (False, False, True, False, False),
        "dynamic_occlusion": (False, False, False, True, False),
        "static_occlusion": (False, False, False, False, True),
        "all": (True, True, True, True, True),
    }[scenario]
    noise, gain, lighting, occlusion, static = flags
    return base.model_copy(
        update={
            "joint_noise": noise,
            "gain_scaling": gain,
            "lighting": lighting,
            "occlusion": occlusion,
            "static_occlusion": base.static_occlusion if static else (),
        }
    )


def quadrant_starts(radius_mm: float) -> list[TendonDisplacement]:
    """One start on each quadrant diagonal at ``||q|| = radius_mm``."""
    component = radius_mm / math.sqrt(2.0)
    return [
        TendonDisplacement(sx * component, sy * component)
        for sx, sy in ((1, 1), (-1, 1), (-1, -1), (1, -1))
    ]


def random_starts(count: int, limit_mm: float, seed: int) -> list[TendonDisplacement]:
    """Uniform starts in the square ``[-limit_mm, limit_mm]^2``."""
    rng = derive_rng(seed, TAG_EVAL)
    points = rng.uniform(-limit_mm, limit_mm, size=(count, 2))
    return [TendonDisplacement.from_array(point) for point in points]


@dataclass(frozen=True)
class SweepRun:
    """Summary of one run in a sweep."""

    run: int
    start: TendonDisplacement
    seed: int
    converged: bool
    iterations: int
    final_norm_mm: float
    initial_sad: float
    final_sad: float

    def to_record(self) -> list[str]:
        return [
            str(self.run),
            repr(self.start.q1),
            repr(self.start.q2),
            str(self.seed),
            str(self.converged).lower(),
            str(self.iterations),
            repr(self.final_norm_mm),
            repr(self.initial_sad),
            repr(self.final_sad),
        ]


@dataclass
class SweepReport:
    """Per-run results and the aggregate success statistics."""

    scenario: str = "nominal"
    runs: list[SweepRun] = field(default_factory=list)

    @property
    def success_rate(self) -> float:
        if not self.runs:
            return 0.0
        return sum(run.converged for run in self.runs) / len(self.runs)

    @property
    def median_iterations(self) -> float:
        """Median iteration count of the converged runs (NaN if none)."""
        converged = [run.iterations for run in self.runs if run.converged]
        return float(statistics.median(converged)) if converged else math.nan

    def aggregate_line(self) -> str:
        return (
            f"# aggregate scenario={self.scenario} runs={len(self.runs)} "
            f"success_rate={self.success_rate!r} median_iterations={self.median_iterations!r}"
        )

    def write_csv(self, path: Path | str) -> Path:
        """One row per run, followed by the aggregate comment line."""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with target.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(SWEEP_COLUMNS)
            writer.writerows(run.to_record() for run in self.runs)
            handle.write(self.aggregate_line() + "\n")
        return target


def run_sweep(
    starts: Sequence[TendonDisplacement],
    seeds: Sequence[int],
    plant: ServoPlant,
    servo_cfg: ServoConfig,
    perturb_cfg: PerturbationConfig,
    *,
    scenario: str = "nominal",
    workers: int = 1,
) -> SweepReport:
    """Run every (start, seed) pair and summarise.

    Runs are independent and may execute in parallel; run ``k`` uses the stream
    ``(seed, "servo", k)`` and results are reported in (start, seed) order.

    Args:
        starts (Sequence[TendonDisplacement]): Initial joint states.
        seeds (Sequence[int]): Seeds applied to every start.
        plant (ServoPlant): Simulation and network.
        servo_cfg (ServoConfig): Control law and stopping rule.
        perturb_cfg (PerturbationConfig): Disturbances (already scenario-resolved).
        scenario (str): Scenario name echoed into the report.
        workers (int): Parallel runs.

    Returns:
        SweepReport: Per-run summary (empty when there are no starts or seeds).
    """
    jobs = [(start, seed) for start in starts for seed in seeds]
    started = time.perf_counter()

    def execute(job: tuple[int, tuple[TendonDisplacement, int]]) -> SweepRun:
        index, (start, seed) = job
        trace = run_servo(start, plant, servo_cfg, perturb_cfg, seed, run_index=index)
        return SweepRun(
            run=index,
            start=start,
            seed=seed,
            converged=trace.converged,
            iterations=trace.iterations,
            final_norm_mm=trace.final_norm,
            initial_sad=trace.initial_sad,
            final_sad=trace.final_sad,
        )

    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        runs = list(pool.map(execute, enumerate(jobs)))

    report = SweepReport(scenario=scenario, runs=runs)
    log_performance(
        logger,
        operation="run_sweep",
        duration_ms=(time.perf_counter() - started) * 1000.0,
        scenario=scenario,
        runs=len(runs),
        success_rate=report.success_rate,
    )
    return report
