"""
Grid orchestration: run cases, verify against the published tables, render reports.
"""

import csv
import io
import json
import logging
import math
import multiprocessing
import time
from enum import Enum
from typing import Iterable, Sequence

from vdims.config import Settings, get_settings
from vdims.schemas.models import (
    CaseFailure,
    CellVerdict,
    DimensionRecord,
    DimensionReport,
    PropertyCheck,
    SpaceRecord,
    VerifyVerdict,
)
from vdims.services.cache import ResultCache
from vdims.services.diagrams import DiagramError, SkeletonKind, enumerate_keys
from vdims.services.golden import GOLDEN, GoldenTables
from vdims.services.linalg import LinalgError, RankResult
from vdims.services.polyak import PolyakError, PolyakMode, compute_polyak, default_mode
from vdims.services.weight_relations import (
    CaseSpec,
    R1Mode,
    R23Mode,
    all_cases,
    compute_weight_space,
)

logger = logging.getLogger(__name__)


class RunnerError(Exception):
    """Base exception for grid runs."""

    pass


class DegreeLimitError(RunnerError):
    """Requested degree is above the soft limit or not opted in."""

    pass


class JobTimeoutError(RunnerError):
    """A job exceeded its time budget."""

    pass


class Space(str, Enum):
    W = "w"
    V = "v"


def parse_spaces(value: str) -> list[Space]:
    """``w``, ``v``, ``both`` or ``none``."""
    value = value.lower()
    if value == "both":
        return [Space.W, Space.V]
    if value in ("none", ""):
        return []
    return [Space(value)]


def check_degree(n_max: int, settings: Settings | None = None) -> None:
    """
    Raises:
        DegreeLimitError: If n_max is negative, above the soft limit, or heavy without opt-in
    """
    settings = settings or get_settings()
    if n_max < 0:
        raise DegreeLimitError(f"Degree must be non-negative, got {n_max}")
    if n_max > settings.max_degree_limit:
        raise DegreeLimitError(f"Degree {n_max} exceeds the limit {settings.max_degree_limit}")
    if n_max >= settings.heavy_degree and not settings.allow_heavy:
        raise DegreeLimitError(
            f"Degree {n_max} is long-running; set ALLOW_HEAVY=true to opt in"
        )


def _space_record(space: str, degree: int, basis_size: int, rows: dict[str, int], rank: RankResult,
                  wall: float, mode: str | None = None) -> SpaceRecord:
    return SpaceRecord(
        space=space,
        degree=degree,
        basis_size=basis_size,
        rows=rows,
        rank=rank.rank,
        dimension=basis_size - rank.rank,
        mode=mode,
        primes=list(rank.primes),
        per_prime_ranks={str(p): r for p, r in rank.per_prime.items()},
        consensus=rank.consensus,
        wall_seconds=round(wall, 3),
    )


class CaseRunner:
    """Computes W and P records of cases, going through the cache."""

    def __init__(
        self,
        settings: Settings | None = None,
        cache: ResultCache | None = None,
        mode: PolyakMode | None = None,
    ):
        self.settings = settings or get_settings()
        self.cache = cache or ResultCache(self.settings.cache_path, self.settings.cache_enabled)
        self.primes = self.settings.primes_list
        self.mode = mode

    def _check_budget(self, label: str, wall: float) -> None:
        if wall > self.settings.case_time_budget_seconds:
            logger.warning(
                f"{label} took {wall:.0f}s, over the {self.settings.case_time_budget_seconds}s budget"
            )

    def w_record(self, case: CaseSpec, n: int) -> SpaceRecord:
        cached = self.cache.get(case, n, "W", self.primes)
        if cached is not None:
            return cached
        logger.info(f"Computing W {case.label} n={n}")
        started = time.perf_counter()
        result = compute_weight_space(case, n, self.primes)
        wall = time.perf_counter() - started
        result.rank.require_consensus(f"W {case.label} n={n}")
        record = _space_record("W", n, result.basis_size, result.rows_by_family, result.rank, wall)
        logger.info(f"W {case.label} n={n}: basis {record.basis_size}, rank {record.rank}, dim {record.dimension} ({wall:.2f}s)")
        self._check_budget(f"W {case.label} n={n}", wall)
        self.cache.put(case, n, "W", self.primes, record)
        return record

    def p_record(self, case: CaseSpec, n: int) -> SpaceRecord:
        mode = self.mode or default_mode(case)
        cached = self.cache.get(case, n, "P", self.primes, mode.value)
        if cached is not None:
            return cached
        logger.info(f"Computing P {case.label} n={n} ({mode.value})")
        started = time.perf_counter()
        result = compute_polyak(case, n, self.primes, mode)
        wall = time.perf_counter() - started
        result.rank.require_consensus(f"P {case.label} n={n}")
        record = _space_record("P", n, result.basis_size, result.rows_by_move, result.rank, wall, mode.value)
        logger.info(f"P {case.label} n={n}: basis {record.basis_size}, rank {record.rank}, dim {record.dimension} ({wall:.2f}s)")
        self._check_budget(f"P {case.label} n={n}", wall)
        self.cache.put(case, n, "P", self.primes, record, mode.value)
        return record

    def run_case(self, case: CaseSpec, n_max: int, spaces: Sequence[Space]) -> DimensionReport:
        check_degree(n_max, self.settings)
        spaces = list(dict.fromkeys(spaces))
        report = DimensionReport(
            case=case.label,
            skeleton=case.kind.value,
            r23=case.r23.value,
            r1=case.r1.value,
            max_degree=n_max,
            spaces=[s.value for s in spaces],
        )
        if not spaces:
            return report

        previous_p: SpaceRecord | None = None
        for n in range(n_max + 1):
            record = DimensionRecord(degree=n, diagram_count=len(enumerate_keys(case.kind, n)))
            if Space.W in spaces:
                record.w = self.w_record(case, n)
                record.dim_w = record.w.dimension
            if Space.V in spaces:
                record.p = self.p_record(case, n)
                lower = previous_p.dimension if previous_p else 0
                if record.p.dimension < lower:
                    raise PolyakError(f"dim P_{n} < dim P_{n - 1} for {case.label}")
                record.dim_v = record.p.dimension - lower
                previous_p = record.p
            report.records.append(record)
        return report


def run_case(
    case: CaseSpec,
    n_max: int,
    spaces: Sequence[Space] = (Space.W, Space.V),
    settings: Settings | None = None,
) -> DimensionReport:
    """
    Compute the requested spaces of one case for n = 0..n_max.

    Raises:
        DegreeLimitError: For degrees outside the configured limits
        InconclusiveRankError: If primes disagree for some (case, n)
    """
    return CaseRunner(settings).run_case(case, n_max, spaces)


def _run_case_job(label: str, n_max: int, spaces: list[str], settings: dict) -> dict:
    report = run_case(CaseSpec.parse(label), n_max, [Space(s) for s in spaces], Settings(**settings))
    return report.model_dump(mode="json")


def _failed_report(case: CaseSpec, n_max: int, spaces: Sequence[Space], error: Exception) -> DimensionReport:
    code = type(error).__name__
    logger.error(f"{case.label} failed: {code}: {error}")
    return DimensionReport(
        case=case.label,
        skeleton=case.kind.value,
        r23=case.r23.value,
        r1=case.r1.value,
        max_degree=n_max,
        spaces=[s.value for s in spaces],
        failures=[CaseFailure(case=case.label, degree=n_max, error=str(error), code=code)],
    )


def run_all(
    n_max: int,
    spaces: Sequence[Space] = (Space.W, Space.V),
    cases: Iterable[CaseSpec] | None = None,
    settings: Settings | None = None,
) -> list[DimensionReport]:
    """
    Run every case; failures are recorded per case instead of aborting the grid.

    With more than one configured worker, cases run in a process pool. A case
    gets the per-job budget times its number of jobs, counted from the start
    of the wave it is scheduled in. Workers still running past their deadline
    are terminated.

    Raises:
        DegreeLimitError: For degrees outside the configured limits
    """
    settings = settings or get_settings()
    check_degree(n_max, settings)
    cases = list(cases) if cases is not None else all_cases()
    spaces = list(dict.fromkeys(spaces))
    reports: list[DimensionReport] = []

    if settings.workers <= 1:
        runner = CaseRunner(settings)
        for case in cases:
            try:
                reports.append(runner.run_case(case, n_max, spaces))
            except (DiagramError, LinalgError, PolyakError, RunnerError) as e:
                reports.append(_failed_report(case, n_max, spaces, e))
        return reports

    budget = settings.case_time_budget_seconds * (n_max + 1) * max(len(spaces), 1)
    payload = settings.model_dump()
    timed_out = False
    pool = multiprocessing.Pool(processes=settings.workers)
    try:
        started = time.monotonic()
        jobs = [
            (case, pool.apply_async(_run_case_job, (case.label, n_max, [s.value for s in spaces], payload)))
            for case in cases
        ]
        for i, (case, job) in enumerate(jobs):
            deadline = started + budget * (i // settings.workers + 1)
            try:
                result = job.get(timeout=max(deadline - time.monotonic(), 0))
                reports.append(DimensionReport.model_validate(result))
            except multiprocessing.TimeoutError:
                timed_out = True
                error = JobTimeoutError(f"{case.label} did not finish within {budget}s")
                reports.append(_failed_report(case, n_max, spaces, error))
            except Exception as e:
                reports.append(_failed_report(case, n_max, spaces, e))
    finally:
        if timed_out:
            logger.warning("Terminating workers still running past their budget")
        pool.terminate()
        pool.join()
    return reports


# ============ Verification ============


def _cells(report: DimensionReport | None, case: CaseSpec, max_degree: int, golden: GoldenTables) -> list[CellVerdict]:
    cells = []
    for n in range(1, max_degree + 1):
        record = report.record(n) if report else None
        expected = golden.expected(case, n)
        for space, computed in (
            ("W", record.dim_w if record else None),
            ("V", record.dim_v if record else None),
        ):
            if computed is None and expected is not None and report is not None and report.failures:
                status = "ERROR"
            elif computed is None or expected is None:
                status = "SKIP"
            else:
                status = "PASS" if computed == expected else "FAIL"
            cells.append(
                CellVerdict(case=case.label, degree=n, space=space, expected=expected, computed=computed, status=status)
            )
    return cells


def _properties(report: DimensionReport, case: CaseSpec) -> list[PropertyCheck]:
    checks = []
    for record in report.records:
        n = record.degree
        if n == 0:
            for name, value in (("degree-zero W", record.dim_w), ("degree-zero V", record.dim_v)):
                if value is not None:
                    checks.append(PropertyCheck(name=name, case=case.label, degree=0, passed=value == 1, detail=f"dim = {value}"))
        if record.dim_w is not None and record.dim_v is not None:
            checks.append(
                PropertyCheck(
                    name="W = V quotient",
                    case=case.label,
                    degree=n,
                    passed=record.dim_w == record.dim_v,
                    detail=f"dim W = {record.dim_w}, dim V = {record.dim_v}",
                )
            )
        if (
            case.kind is SkeletonKind.DESCENDING
            and case.r23 is R23Mode.BRAID_LIKE
            and case.r1 is R1Mode.NO_R1
            and record.dim_w is not None
        ):
            bound = math.factorial(n)
            passed = record.dim_w <= bound and (n > 5 or record.dim_w == bound)
            checks.append(
                PropertyCheck(
                    name="factorial bound",
                    case=case.label,
                    degree=n,
                    passed=passed,
                    detail=f"dim W = {record.dim_w}, n! = {bound}",
                )
            )
    return checks


def verify_against_golden(
    reports: Iterable[DimensionReport],
    max_degree: int | None = None,
    golden: GoldenTables = GOLDEN,
) -> VerifyVerdict:
    """
    Compare reports with the published tables.

    Every (case, n, space) cell for n = 1..max_degree is PASS, FAIL, SKIP
    (not requested) or ERROR (its case failed). Failed cases and prime
    disagreements make the verdict fail. Property checks are reported separately.
    """
    by_case = {report.case: report for report in reports}
    if max_degree is None:
        computed = [r.max_degree for r in by_case.values() if r.records]
        max_degree = min(max(computed, default=golden.max_degree), golden.max_degree)

    cells: list[CellVerdict] = []
    properties: list[PropertyCheck] = []
    failures: list[CaseFailure] = []
    for case in all_cases():
        report = by_case.get(case.label)
        cells.extend(_cells(report, case, max_degree, golden))
        if report is not None:
            properties.extend(_properties(report, case))
            failures.extend(report.failures)
            for failure in report.failures:
                if failure.code == "InconclusiveRankError":
                    properties.append(
                        PropertyCheck(name="prime consensus", case=case.label, passed=False, detail=failure.error)
                    )
    verdict = VerifyVerdict(cells=cells, properties=properties, failures=failures)
    logger.info(
        f"Verify: {verdict.count('PASS')} PASS, {verdict.count('FAIL')} FAIL, {verdict.count('SKIP')} SKIP, "
        f"{verdict.count('ERROR')} ERROR, {len(failures)} failed cases"
    )
    return verdict


# ============ Rendering ============


def _sequence(values: Sequence[int | None]) -> str:
    return ",".join("?" if v is None else str(v) for v in values)


def render_markdown(reports: Iterable[DimensionReport]) -> str:
    """
    Variant table: rows are R23 x R1 treatments, columns are skeletons.

    A cell lists dims for n = 1..max; ``V / W`` when the two differ.
    """
    by_case = {report.case: report for report in reports}
    lines = [
        "| R23 | R1 | round | long | descending |",
        "|---|---|---|---|---|",
    ]
    for r23 in R23Mode:
        for r1 in R1Mode:
            cells = []
            for kind in SkeletonKind:
                report = by_case.get(CaseSpec(kind, r23, r1).label)
                if report is None or not report.records:
                    cells.append("")
                    continue
                records = [r for r in report.records if r.degree >= 1]
                w = [r.dim_w for r in records]
                v = [r.dim_v for r in records]
                if "w" not in report.spaces:
                    cells.append(_sequence(v))
                elif "v" not in report.spaces or v == w:
                    cells.append(_sequence(w))
                else:
                    cells.append(f"{_sequence(v)} / {_sequence(w)}")
            lines.append(f"| {r23.value} | {r1.value} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


CSV_FIELDS = [
    "skeleton", "r23", "r1", "degree", "diagram_count",
    "dim_w", "dim_v", "rank_w", "rank_p", "basis_p", "consensus", "wall_seconds",
]


def render_csv(reports: Iterable[DimensionReport]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for report in reports:
        for record in report.records:
            wall = sum(r.wall_seconds for r in (record.w, record.p) if r is not None)
            writer.writerow({
                "skeleton": report.skeleton,
                "r23": report.r23,
                "r1": report.r1,
                "degree": record.degree,
                "diagram_count": record.diagram_count,
                "dim_w": record.dim_w if record.dim_w is not None else "",
                "dim_v": record.dim_v if record.dim_v is not None else "",
                "rank_w": record.w.rank if record.w else "",
                "rank_p": record.p.rank if record.p else "",
                "basis_p": record.p.basis_size if record.p else "",
                "consensus": record.consensus,
                "wall_seconds": round(wall, 3),
            })
    return buffer.getvalue()


def render_json(reports: Iterable[DimensionReport]) -> str:
    return json.dumps([r.model_dump(mode="json") for r in reports], indent=2)


def render_verdict(verdict: VerifyVerdict) -> str:
    lines = [
        f"PASS {verdict.count('PASS')}  FAIL {verdict.count('FAIL')}  SKIP {verdict.count('SKIP')}  ERROR {verdict.count('ERROR')}",
    ]
    for failure in verdict.failures:
        lines.append(f"FAILED {failure.case}: {failure.code}: {failure.error}")
    for cell in verdict.cells:
        if cell.status == "FAIL":
            lines.append(f"FAIL {cell.case} n={cell.degree} {cell.space}: expected {cell.expected}, got {cell.computed}")
    failed = [p for p in verdict.properties if not p.passed]
    lines.append(f"properties: {len(verdict.properties) - len(failed)}/{len(verdict.properties)} hold")
    for check in failed:
        where = check.case if check.degree is None else f"{check.case} n={check.degree}"
        lines.append(f"PROPERTY {check.name} {where}: {check.detail}")
    return "\n".join(lines) + "\n"
