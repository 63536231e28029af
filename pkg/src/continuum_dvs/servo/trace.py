"""Per-iteration servo records and their CSV form."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

from continuum_dvs.kinematics import TendonDisplacement
from continuum_dvs.scene import Augmentation

TRACE_COLUMNS = (
    "iteration",
    "q1_mm",
    "q2_mm",
    "f1",
    "f2",
    "v1_mm",
    "v2_mm",
    "q1_est_mm",
    "q2_est_mm",
    "sad",
    "gain_scale",
    "light_gain",
    "light_gradient",
    "occlusion",
)


@dataclass(frozen=True)
class PerturbationSnapshot:
    """Disturbances active between two refreshes.

    Attributes:
        gain_scale (float): Factor applied to the network output (1 when off).
        augmentation (Augmentation): Lighting and dynamic occlusion of the view.
        refreshed_at (int): Iteration at which the values were drawn.
    """

    gain_scale: float = 1.0
    augmentation: Augmentation = field(default_factory=Augmentation)
    refreshed_at: int = 0


@dataclass(frozen=True)
class ServoRecord:
    """One controller iteration.

    Attributes:
        iteration (int): 0-based iteration number.
        q (TendonDisplacement): Joint state the view was rendered at.
        f (tuple[float, float]): Raw network output.
        v (tuple[float, float]): Applied velocity command, mm per unit time.
        estimate (TendonDisplacement): Joint state implied by ``f``.
        sad (float): SAD to the target view (NaN if the view was constant).
        snapshot (PerturbationSnapshot): Disturbances active this iteration.
    """

    iteration: int
    q: TendonDisplacement
    f: tuple[float, float]
    v: tuple[float, float]
    estimate: TendonDisplacement
    sad: float
    snapshot: PerturbationSnapshot

    def to_record(self) -> list[str]:
        aug = self.snapshot.augmentation
        return [
            str(self.iteration),
            repr(self.q.q1),
            repr(self.q.q2),
            repr(self.f[0]),
            repr(self.f[1]),
            repr(self.v[0]),
            repr(self.v[1]),
            repr(self.estimate.q1),
            repr(self.estimate.q2),
            repr(self.sad),
            repr(self.snapshot.gain_scale),
            repr(aug.gain),
            repr(aug.gradient),
            aug.rects_text(),
        ]


@dataclass
class ServoTrace:
    """Full history of one closed-loop run."""

    start: TendonDisplacement
    seed: int
    records: list[ServoRecord] = field(default_factory=list)
    final_q: TendonDisplacement | None = None
    converged: bool = False
    converged_iteration: int | None = None

    def __len__(self) -> int:
        return len(self.records)

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def initial_sad(self) -> float:
        return self.records[0].sad if self.records else math.nan

    @property
    def final_sad(self) -> float:
        return self.records[-1].sad if self.records else math.nan

    @property
    def final_norm(self) -> float:
        """``||q||_inf`` after the last step, millimetres."""
        q = self.final_q or self.start
        return max(abs(q.q1), abs(q.q2))

    def header(self) -> dict[str, str]:
        final = self.final_q or self.start
        return {
            "seed": str(self.seed),
            "start_mm": f"{self.start.q1!r}:{self.start.q2!r}",
            "final_mm": f"{final.q1!r}:{final.q2!r}",
            "converged": str(self.converged).lower(),
            "converged_iteration": "" if self.converged_iteration is None else str(self.converged_iteration),
        }

    def write_csv(self, path: Path | str) -> Path:
        """Write ``# key = value`` summary lines, then one row per iteration."""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with target.open("w", encoding="utf-8", newline="") as handle:
            for key, value in self.header().items():
                handle.write(f"# {key} = {value}\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(TRACE_COLUMNS)
            writer.writerows(record.to_record() for record in self.records)
        return target
