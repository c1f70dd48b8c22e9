"""Sweep orchestration and chiral-pair reporting.

A sweep walks the grid (knot, twist exponent, target group, task), runs
each task once per cell, and appends one line-delimited JSON record per
(knot, n, target, task) to the output file.  Records are append-only and
canonically sorted before writing, so reruns and parallel runs produce
byte-identical content for the same configuration.

Tasks that a target cannot support (enumeration beyond the capability
bound, or no matrix representation route for the invariant task) become
explicit skip records instead of failures.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .fingroups import (
    CapabilityError,
    FiniteGroup,
    PSL2Group,
    SL2Group,
    group_from_spec,
)
from .homsearch import (
    Homomorphism,
    check_property_t,
    hom_image_matrix,
    indexed_tables,
    orbit_count,
    structured_count,
)
from .presentations import KNOT_NAMES, knot_presentation
from .talex import (
    representation_from_psl27_hom,
    representation_from_sl2_hom,
    twisted_alexander,
)

TASKS = ("count", "classes", "property_t", "structured", "talex")

ENGINE = f"gnk-{__version__}"

CHIRAL_PAIRS = (("SK", "GK"), ("trefoil_r", "trefoil_l"))


@dataclass(frozen=True)
class SweepConfig:
    knots: tuple[str, ...]
    n_values: tuple[int, ...]
    targets: tuple[str, ...]
    tasks: tuple[str, ...]
    shards: int = 1
    output: str = "results.jsonl"

    def __post_init__(self) -> None:
        object.__setattr__(self, "knots", tuple(self.knots))
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "tasks", tuple(self.tasks))
        bad = [k for k in self.knots if k not in KNOT_NAMES]
        if bad or not self.knots:
            raise ValueError(f"knots must be a nonempty subset of {KNOT_NAMES}")
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ValueError("n_values must be nonempty with every n >= 1")
        if not self.targets:
            raise ValueError("targets must be nonempty")
        bad = [t for t in self.tasks if t not in TASKS]
        if bad or not self.tasks:
            raise ValueError(f"tasks must be a nonempty subset of {TASKS}")
        if self.shards < 1:
            raise ValueError("shards must be at least 1")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SweepConfig":
        data = json.loads(text)
        unknown = set(data) - {
            "knots",
            "n_values",
            "targets",
            "tasks",
            "shards",
            "output",
        }
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str) -> "SweepConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


@dataclass(frozen=True)
class ResultRecord:
    knot: str
    n: int
    target: str
    task: str
    status: str  # "ok" or "skip"
    value: object
    stats: dict
    timestamp: str
    engine: str

    def key(self) -> tuple:
        return (self.knot, self.n, self.target, self.task)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "ResultRecord":
        data = json.loads(line)
        return cls(**data)


def sort_records(records) -> list[ResultRecord]:
    return sorted(
        records, key=lambda r: (r.target, r.n, r.knot, r.task, r.timestamp)
    )


def write_records(path: str, records) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_records(path: str) -> list[ResultRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(ResultRecord.from_json(line))
    return out


# -- per-cell task execution -----------------------------------------------------


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def _merged_matrix(pres, group, shards: int) -> tuple[np.ndarray, dict]:
    """Image matrix assembled shard by shard, with summed search stats."""
    if shards == 1:
        matrix, stats = hom_image_matrix(pres, group)
        return matrix, stats.as_dict()
    parts = []
    nodes = prunes = 0
    wall = 0.0
    for sid in range(shards):
        part, stats = hom_image_matrix(pres, group, shards, sid)
        parts.append(part)
        nodes += stats.nodes
        prunes += stats.prunes
        wall += stats.wall_time
    matrix = np.vstack(parts)
    order = np.lexsort(tuple(matrix[:, c] for c in range(matrix.shape[1] - 1, -1, -1)))
    matrix = matrix[order]
    return matrix, {
        "nodes": nodes,
        "prunes": prunes,
        "homs": int(matrix.shape[0]),
        "wall_time": round(wall, 6),
        "shards": shards,
    }


def _count_buckets(matrix: np.ndarray, group: FiniteGroup) -> dict:
    """The three counting buckets read off one image matrix."""
    total = int(matrix.shape[0])
    idx = indexed_tables(group)
    commuting = np.ones(total, dtype=bool)
    for a in range(matrix.shape[1]):
        for b in range(a + 1, matrix.shape[1]):
            x, y = matrix[:, a], matrix[:, b]
            commuting &= idx.mul[x, y] == idx.mul[y, x]
    return {
        "all_homs": total,
        "nonabelian_image": total - int(commuting.sum()),
        "class_representatives": orbit_count(matrix, group),
    }


def _talex_lines(pres, group, matrix: np.ndarray) -> list[str]:
    if isinstance(group, PSL2Group) and group.p == 7:
        builder = representation_from_psl27_hom
    elif isinstance(group, SL2Group) and not isinstance(group, PSL2Group):
        builder = representation_from_sl2_hom
    else:
        raise CapabilityError(
            f"no matrix representation route for {group.name}"
        )
    lines = []
    for row in matrix:
        hom = Homomorphism(pres, group, tuple(int(v) for v in row))
        rep = builder(pres, hom)
        lines.append(twisted_alexander(pres, rep).line())
    return lines


def run_cell(
    knot: str, n: int, target: str, tasks, shards: int = 1
) -> list[ResultRecord]:
    """All task records for one (knot, n, target) grid cell."""
    group = group_from_spec(target)
    pres = knot_presentation(knot, n)
    cache: dict[str, object] = {}

    def matrix_and_stats():
        if "matrix" not in cache:
            cache["matrix"], cache["stats"] = _merged_matrix(pres, group, shards)
        return cache["matrix"], cache["stats"]

    records = []
    for task in tasks:
        try:
            if task in ("property_t", "structured", "talex") and knot not in (
                "SK",
                "GK",
            ):
                raise CapabilityError(
                    f"{task} is defined for the composite knots only"
                )
            if task == "count":
                matrix, stats = matrix_and_stats()
                stats = dict(stats)
                stats["buckets"] = _count_buckets(matrix, group)
                value, status = int(matrix.shape[0]), "ok"
            elif task == "classes":
                matrix, _ = matrix_and_stats()
                value, status = orbit_count(matrix, group), "ok"
                stats = {"homs": int(matrix.shape[0])}
            elif task == "property_t":
                report = check_property_t(group, n, knot)
                value, status = bool(report.holds), "ok"
                stats = {"bases": int(report.bases), "pairs": int(report.pairs)}
                if report.counterexample_base is not None:
                    stats["counterexample_base"] = [
                        group.format_element(x)
                        for x in report.counterexample_base
                    ]
                    stats["counterexample_root"] = group.format_element(
                        report.counterexample_root
                    )
            elif task == "structured":
                value, status = int(structured_count(group, n)), "ok"
                stats = {}
            elif task == "talex":
                matrix, _ = matrix_and_stats()
                lines = _talex_lines(pres, group, matrix)
                digest = hashlib.sha256(
                    "\n".join(sorted(lines)).encode()
                ).hexdigest()
                value, status = digest, "ok"
                stats = {"homs": len(lines), "distinct": len(set(lines))}
            else:
                raise ValueError(f"unknown task {task!r}")
        except CapabilityError as exc:
            value, status, stats = None, "skip", {"reason": str(exc)}
        records.append(
            ResultRecord(
                knot=knot,
                n=n,
                target=target,
                task=task,
                status=status,
                value=value,
                stats=stats,
                timestamp=_now(),
                engine=ENGINE,
            )
        )
    return records


def _cell_args(cfg: SweepConfig) -> list[tuple]:
    return [
        (knot, n, target, cfg.tasks, cfg.shards)
        for target in cfg.targets
        for n in cfg.n_values
        for knot in cfg.knots
    ]


def _run_cell_star(args: tuple) -> list[ResultRecord]:
    return run_cell(*args)


def run_sweep(cfg: SweepConfig, jobs: int = 1) -> list[ResultRecord]:
    """Run every cell, append canonical-sorted records to cfg.output."""
    for target in cfg.targets:
        group_from_spec(target)  # unconstructible targets fail before work
    cells = _cell_args(cfg)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(_run_cell_star, cells))
    else:
        batches = [run_cell(*args) for args in cells]
    records = sort_records(rec for batch in batches for rec in batch)
    write_records(cfg.output, records)
    return records


# -- chiral pair comparison ------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    pair: str
    n: int
    target: str
    task: str
    left: object
    right: object
    outcome: str  # "match", "MISMATCH", "skip", or "incomplete"


@dataclass(frozen=True)
class Report:
    rows: tuple[ReportRow, ...]
    skips: int  # skip records anywhere in the input, paired or not

    @property
    def mismatches(self) -> int:
        return sum(r.outcome == "MISMATCH" for r in self.rows)

    def exit_code(self) -> int:
        if self.mismatches:
            return 3
        if self.skips:
            return 2
        return 0

    def text_table(self) -> str:
        header = f"{'pair':<22} {'n':>2} {'target':<14} {'task':<11} {'outcome':<10} values"
        lines = [header, "-" * len(header)]
        for r in self.rows:
            values = "" if r.outcome == "match" else f"{r.left!r} vs {r.right!r}"
            lines.append(
                f"{r.pair:<22} {r.n:>2} {r.target:<14} {r.task:<11} {r.outcome:<10} {values}".rstrip()
            )
        lines.append(
            f"rows: {len(self.rows)}  mismatches: {self.mismatches}  skips: {self.skips}"
        )
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(
            {
                "rows": [asdict(r) for r in self.rows],
                "mismatches": self.mismatches,
                "skips": self.skips,
                "exit_code": self.exit_code(),
            },
            indent=2,
        )


def _pair_outcome(a: ResultRecord, b: ResultRecord) -> str:
    if a.status == "skip" or b.status == "skip":
        return "skip"
    if a.value != b.value:
        return "MISMATCH"
    if a.stats.get("buckets") != b.stats.get("buckets"):
        return "MISMATCH"
    return "match"


def compare_report(records) -> Report:
    latest: dict[tuple, ResultRecord] = {}
    skips = 0
    for rec in records:
        latest[rec.key()] = rec  # later records supersede earlier ones
        if rec.status == "skip":
            skips += 1
    rows = []
    for left_knot, right_knot in CHIRAL_PAIRS:
        keys = sorted(
            {
                (n, target, task)
                for knot, n, target, task in latest
                if knot in (left_knot, right_knot)
            },
            key=lambda k: (k[1], k[0], k[2]),
        )
        for n, target, task in keys:
            a = latest.get((left_knot, n, target, task))
            b = latest.get((right_knot, n, target, task))
            if a is None or b is None:
                rows.append(
                    ReportRow(
                        pair=f"{left_knot}/{right_knot}",
                        n=n,
                        target=target,
                        task=task,
                        left=a.value if a else None,
                        right=b.value if b else None,
                        outcome="incomplete",
                    )
                )
                continue
            rows.append(
                ReportRow(
                    pair=f"{left_knot}/{right_knot}",
                    n=n,
                    target=target,
                    task=task,
                    left=a.value,
                    right=b.value,
                    outcome=_pair_outcome(a, b),
                )
            )
    return Report(rows=tuple(rows), skips=skips)
