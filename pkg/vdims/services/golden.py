"""
Published dimension tables.

Every cell is dim W_n and, identically, dim V_{n/n-1}; degree 0 is 1 in
every variant. Values are for n = 1..5.
"""

from dataclasses import dataclass

from vdims.services.diagrams import SkeletonKind
from vdims.services.weight_relations import CaseSpec, R1Mode, R23Mode

GOLDEN_MAX_DEGREE = 5

_R = SkeletonKind.ROUND
_L = SkeletonKind.LONG
_D = SkeletonKind.DESCENDING

# (r23, r1) -> {skeleton: dims for n = 1..5}, one entry per cell of the
# published 6 x 3 variant table. Annotated cells carry a remark there.
_TABLE: dict[tuple[R23Mode, R1Mode], dict[SkeletonKind, tuple[int, ...]]] = {
    (R23Mode.STANDARD, R1Mode.MOD_R1): {
        _R: (0, 0, 1, 4, 17),  # remark: the standard virtual knots
        _L: (0, 2, 7, 42, 246),  # remark: the standard virtual knots
        _D: (0, 0, 1, 6, 34),
    },
    (R23Mode.STANDARD, R1Mode.NO_R1): {
        _R: (1, 1, 2, 7, 29),
        _L: (2, 5, 15, 67, 365),
        _D: (1, 1, 2, 8, 42),
    },
    (R23Mode.BRAID_LIKE, R1Mode.MOD_R1): {
        # remark on all three: same as standard/mod since FI and 6T imply XII
        _R: (0, 0, 1, 4, 17),
        _L: (0, 2, 7, 42, 246),
        _D: (0, 0, 1, 6, 34),
    },
    (R23Mode.BRAID_LIKE, R1Mode.NO_R1): {
        _R: (1, 2, 5, 19, 77),
        _L: (2, 7, 27, 139, 813),  # remark: dual to long diagrams mod 6T (Lie bialgebras)
        _D: (1, 2, 6, 24, 120),  # remark: dim W_n <= n! is known, equality is open
    },
    (R23Mode.R2_ONLY, R1Mode.MOD_R1): {
        _R: (0, 0, 4, 44, 648),
        _L: (0, 2, 28, 420, 7808),
        _D: (0, 0, 2, 18, 174),
    },
    (R23Mode.R2_ONLY, R1Mode.NO_R1): {
        _R: (1, 3, 16, 160, 2248),
        _L: (2, 10, 96, 1332, 23880),
        _D: (1, 2, 9, 63, 570),
    },
}


@dataclass(frozen=True)
class GoldenTables:
    """Read-only view of the expected dimensions."""

    max_degree: int = GOLDEN_MAX_DEGREE

    def expected(self, case: CaseSpec, n: int) -> int | None:
        """Expected dim W_n = dim V_{n/n-1}, or None outside the table."""
        if n == 0:
            return 1
        if not 1 <= n <= self.max_degree:
            return None
        return _TABLE[(case.r23, case.r1)][case.kind][n - 1]

    def row(self, case: CaseSpec) -> tuple[int, ...]:
        """Expected values for n = 0..max_degree."""
        return (1,) + _TABLE[(case.r23, case.r1)][case.kind]


GOLDEN = GoldenTables()
