"""Verification campaigns over orientation spaces, sharded across processes.

Instance ``i`` of a campaign is the orientation integer ``i`` (exhaustive mode)
or the orientation drawn from seed ``seed + i`` (sample mode).  Work is split
into fixed-size index ranges; partial reports are plain counters, so merging
them is order independent and the aggregate does not depend on the worker
count.
"""

from __future__ import annotations

import json
import logging
import multiprocessing
import time
from collections import Counter
from collections.abc import Iterator, Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .builder import OrientationSpace, SummandSpec, cross_pairs, enumeration_cap, sample_orientation
from .classify import DEFAULT_BUDGET, verify_instance
from .digraph import is_strong
from .errors import PreconditionError, TooLargeError

log = logging.getLogger(__name__)

SCHEMA = "gsl-campaign/1"
CHUNK = 1 << 12
CHECKPOINT_EVERY = 1 << 16


@dataclass(frozen=True)
class CampaignConfig:
    orders: tuple[int, ...]
    mode: str = "exhaustive"
    seed: int | None = None
    offset: int = 0
    limit: int | None = None
    workers: int = 1
    budget: int = DEFAULT_BUDGET
    modulo_rotation: bool = False
    output: str | None = None
    checkpoint: str | None = None
    checkpoint_every: int = CHECKPOINT_EVERY

    def __post_init__(self) -> None:
        if len(self.orders) < 2 or min(self.orders) < 2:
            raise PreconditionError("need at least two summands of order >= 2")
        if self.mode not in ("exhaustive", "sample"):
            raise PreconditionError(f"unknown mode {self.mode!r}")
        if self.mode == "sample":
            if self.seed is None:
                raise PreconditionError("sample mode needs a seed")
            if self.limit is None:
                raise PreconditionError("sample mode needs a sample count")
            if self.modulo_rotation:
                raise PreconditionError("--modulo-rotation only applies to exhaustive mode")
        else:
            bits = len(cross_pairs(self.orders))
            cap = enumeration_cap()
            if bits > cap:
                raise TooLargeError(
                    f"{bits} orientation bits exceed the enumeration cap {cap}; use sample mode"
                )
        if self.workers < 1:
            raise PreconditionError("workers must be positive")
        if self.offset < 0 or (self.limit is not None and self.limit < 0):
            raise PreconditionError("offset and limit must be non-negative")

    @property
    def summands(self) -> list[SummandSpec]:
        return [SummandSpec.cycle(n) for n in self.orders]

    @property
    def stop(self) -> int:
        if self.mode == "sample":
            return self.offset + self.limit
        space = 1 << len(cross_pairs(self.orders))
        if self.limit is None:
            return space
        return min(space, self.offset + self.limit)

    def identity(self) -> dict:
        """Fields that must agree for a checkpoint to be resumable."""
        return {
            "orders": list(self.orders),
            "mode": self.mode,
            "seed": self.seed,
            "offset": self.offset,
            "limit": self.limit,
            "budget": self.budget,
            "modulo_rotation": self.modulo_rotation,
        }


@dataclass
class Tally:
    """Mergeable campaign counters."""

    total: int = 0
    skipped: int = 0
    strong: int = 0
    non_strong: int = 0
    verdicts: Counter = field(default_factory=Counter)
    rungs: Counter = field(default_factory=Counter)
    applicable: Counter = field(default_factory=Counter)
    failed: Counter = field(default_factory=Counter)
    open_problems: Counter = field(default_factory=Counter)
    paths: Counter = field(default_factory=Counter)
    oracle_skipped: int = 0
    findings: list[dict] = field(default_factory=list)

    def merge(self, other: Tally) -> None:
        self.total += other.total
        self.skipped += other.skipped
        self.strong += other.strong
        self.non_strong += other.non_strong
        self.oracle_skipped += other.oracle_skipped
        for name in ("verdicts", "rungs", "applicable", "failed", "open_problems", "paths"):
            getattr(self, name).update(getattr(other, name))
        self.findings.extend(other.findings)
        self.findings.sort(key=lambda f: f["index"])

    @property
    def violations(self) -> int:
        return sum(self.failed.values())

    def counts(self) -> dict:
        return {
            "total": self.total,
            "skipped_by_rotation": self.skipped,
            "strong": self.strong,
            "non_strong": self.non_strong,
            "oracle_skipped": self.oracle_skipped,
            "verdicts": dict(sorted(self.verdicts.items())),
            "rungs": dict(sorted(self.rungs.items())),
            "checks": {
                name: {"applicable": self.applicable[name], "violations": self.failed[name]}
                for name in sorted(self.applicable)
            },
            "violations": self.violations,
            "open_problems": dict(sorted(self.open_problems.items())),
            "construction_paths": dict(sorted(self.paths.items())),
        }

    def to_dict(self) -> dict:
        return {"counts": self.counts(), "findings": self.findings}

    @classmethod
    def from_dict(cls, data: dict) -> Tally:
        counts = data["counts"]
        tally = cls(
            total=counts["total"],
            skipped=counts["skipped_by_rotation"],
            strong=counts["strong"],
            non_strong=counts["non_strong"],
            oracle_skipped=counts["oracle_skipped"],
            verdicts=Counter(counts["verdicts"]),
            rungs=Counter(counts["rungs"]),
            open_problems=Counter(counts["open_problems"]),
            paths=Counter(counts["construction_paths"]),
            findings=list(data["findings"]),
        )
        for name, entry in counts["checks"].items():
            tally.applicable[name] = entry["applicable"]
            tally.failed[name] = entry["violations"]
        return tally


@dataclass
class CampaignReport:
    config: CampaignConfig
    tally: Tally
    wall_time: float
    completed: bool = True

    def aggregate(self) -> dict:
        """The deterministic part of the report (everything except timing)."""
        return self.tally.to_dict()

    def to_dict(self) -> dict:
        config = asdict(self.config)
        config["orders"] = list(self.config.orders)
        return {
            "schema": SCHEMA,
            "config": config,
            "counting": "modulo-rotation" if self.config.modulo_rotation else "raw",
            "completed": self.completed,
            "wall_time": round(self.wall_time, 3),
            **self.tally.to_dict(),
        }


def rotation_permutations(orders: Sequence[int]) -> list[list[int]]:
    """For each rotation ``t`` of the first cycle, where every orientation bit moves."""
    pairs = cross_pairs(orders)
    index = {pair: b for b, pair in enumerate(pairs)}
    n = orders[0]
    perms = []
    for t in range(1, n):
        perm = []
        for i, j, p, q in pairs:
            if i == 0:
                perm.append(index[(0, j, (p + t) % n, q)])
            else:
                perm.append(index[(i, j, p, q)])
        perms.append(perm)
    return perms


def _is_rotation_canonical(value: int, perms: list[list[int]]) -> bool:
    for perm in perms:
        rotated = 0
        for b, target in enumerate(perm):
            if value >> b & 1:
                rotated |= 1 << target
        if rotated < value:
            return False
    return True


def run_range(config: CampaignConfig, start: int, stop: int) -> Tally:
    """Verify instances ``start .. stop-1`` of the campaign."""
    summands = config.summands
    space = OrientationSpace(summands)
    perms = rotation_permutations(config.orders) if config.modulo_rotation else []
    tally = Tally()
    for index in range(start, stop):
        if config.mode == "sample":
            value = sample_orientation(summands, config.seed + index).value
        else:
            value = index
            if perms and not _is_rotation_canonical(value, perms):
                tally.skipped += 1
                continue
        tally.total += 1
        if not is_strong(space.compile(value)):
            tally.non_strong += 1
            continue
        tally.strong += 1
        report = verify_instance(space.build(value), config.budget)
        tally.verdicts[report.verdict.value] += 1
        tally.rungs[report.rung] += 1
        tally.oracle_skipped += report.oracle_skipped
        tally.paths[" ".join(report.construction_path)] += 1
        for name, ok in report.checks.items():
            tally.applicable[name] += 1
            tally.failed[name] += not ok
        for finding in report.violations:
            tally.findings.append({"index": index, "instance": report.instance, **finding.to_dict()})
        if report.open_problem is not None:
            tally.open_problems[report.open_problem.kind] += 1
            tally.findings.append({"index": index, **report.open_problem.to_dict()})
    return tally


def _run_chunk(job: tuple[CampaignConfig, int, int]) -> tuple[int, int, Tally]:
    config, start, stop = job
    return start, stop, run_range(config, start, stop)


def _chunks(start: int, stop: int, size: int) -> Iterator[tuple[int, int]]:
    for lo in range(start, stop, size):
        yield lo, min(lo + size, stop)


def _load_checkpoint(config: CampaignConfig) -> tuple[int, Tally]:
    if config.checkpoint is None:
        return config.offset, Tally()
    path = Path(config.checkpoint)
    if not path.exists():
        return config.offset, Tally()
    state = json.loads(path.read_text())
    if state.get("config") != config.identity():
        raise PreconditionError(f"checkpoint {path} belongs to a different campaign")
    log.info("resuming from offset %d", state["next"])
    return state["next"], Tally.from_dict(state["tally"])


def _save_checkpoint(config: CampaignConfig, next_index: int, tally: Tally) -> None:
    if config.checkpoint is None:
        return
    path = Path(config.checkpoint)
    state = {"schema": SCHEMA, "config": config.identity(), "next": next_index, "tally": tally.to_dict()}
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(state))
    tmp.replace(path)


def run_campaign(config: CampaignConfig, stop_after: int | None = None) -> CampaignReport:
    """Run (or resume) a campaign.

    ``stop_after`` ends the run early once that many further instances are
    done, leaving the checkpoint in place; it exists for interruption tests.
    """
    began = time.perf_counter()
    start, tally = _load_checkpoint(config)
    stop = config.stop
    if stop_after is not None:
        stop = min(stop, start + stop_after)
    chunk = min(CHUNK, config.checkpoint_every)
    jobs = [(config, lo, hi) for lo, hi in _chunks(start, stop, chunk)]
    last_saved = start

    def absorb(results: Iterator[tuple[int, int, Tally]]) -> None:
        nonlocal last_saved
        for _, hi, part in results:
            tally.merge(part)
            if hi - last_saved >= config.checkpoint_every:
                _save_checkpoint(config, hi, tally)
                last_saved = hi

    if config.workers == 1 or len(jobs) <= 1:
        absorb(map(_run_chunk, jobs))
    else:
        with multiprocessing.Pool(config.workers) as pool:
            absorb(pool.imap(_run_chunk, jobs))
    completed = stop == config.stop
    if completed:
        if config.checkpoint is not None:
            Path(config.checkpoint).unlink(missing_ok=True)
    else:
        _save_checkpoint(config, stop, tally)
    report = CampaignReport(config, tally, time.perf_counter() - began, completed)
    if config.output is not None:
        Path(config.output).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return report
