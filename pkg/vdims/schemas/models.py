from typing import Literal

from pydantic import BaseModel, Field, field_validator


# ============ Report Models ============


class SpaceRecord(BaseModel):
    """One rank computation: the W_n matrix or the P_n matrix of a case."""

    space: Literal["W", "P"]
    degree: int
    basis_size: int
    rows: dict[str, int] = Field(default_factory=dict)  # rows per relation family / move
    rank: int
    dimension: int
    mode: str | None = None  # polyak mode, P only
    primes: list[int]
    per_prime_ranks: dict[str, int]
    consensus: bool
    wall_seconds: float

    @field_validator("dimension", "rank", "basis_size")
    @classmethod
    def non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError("must be non-negative")
        return v


class DimensionRecord(BaseModel):
    """Per-degree results of a case."""

    degree: int
    diagram_count: int
    dim_w: int | None = None
    dim_v: int | None = None  # dim V_{n/n-1} = dim P_n - dim P_{n-1}
    w: SpaceRecord | None = None
    p: SpaceRecord | None = None

    @property
    def consensus(self) -> bool:
        return all(r.consensus for r in (self.w, self.p) if r is not None)


class CaseFailure(BaseModel):
    """A (case, degree) job that did not finish; collected, never raised."""

    case: str
    degree: int | None = None
    space: str | None = None
    error: str
    code: str | None = None


class DimensionReport(BaseModel):
    """All computed degrees of one case."""

    case: str
    skeleton: str
    r23: str
    r1: str
    max_degree: int
    spaces: list[str]
    records: list[DimensionRecord] = Field(default_factory=list)
    failures: list[CaseFailure] = Field(default_factory=list)

    def record(self, degree: int) -> DimensionRecord | None:
        for record in self.records:
            if record.degree == degree:
                return record
        return None


class CellVerdict(BaseModel):
    """Golden-table agreement of one (case, degree, space) cell."""

    case: str
    degree: int
    space: Literal["W", "V"]
    expected: int | None
    computed: int | None
    status: Literal["PASS", "FAIL", "SKIP", "ERROR"]  # ERROR: the case failed before reaching this cell


class PropertyCheck(BaseModel):
    name: str
    case: str
    degree: int | None = None
    passed: bool
    detail: str = ""


class VerifyVerdict(BaseModel):
    cells: list[CellVerdict]
    properties: list[PropertyCheck]
    failures: list[CaseFailure] = Field(default_factory=list)

    def count(self, status: str) -> int:
        return sum(1 for c in self.cells if c.status == status)

    @property
    def ok(self) -> bool:
        return self.count("FAIL") == 0 and self.count("ERROR") == 0 and not self.failures

    @property
    def properties_ok(self) -> bool:
        return all(p.passed for p in self.properties)


class CaseInfo(BaseModel):
    case: str
    skeleton: str
    r23: str
    r1: str
    relation_families: list[str]
    moves: list[str]
    expected: list[int]  # n = 0..5


# ============ Response Models ============


class HealthResponse(BaseModel):
    """Health check response."""

    status: Literal["ok", "error"]
    version: str
    environment: str


class CasesResponse(BaseModel):
    success: bool
    data: list[CaseInfo] | None = None
    error: str | None = None


class DimensionsResponse(BaseModel):
    """Response for dimensions endpoint."""

    success: bool
    data: DimensionReport | None = None
    error: str | None = None
    code: str | None = None


class VerifyResponse(BaseModel):
    """Response for verify endpoint."""

    success: bool
    data: VerifyVerdict | None = None
    error: str | None = None
