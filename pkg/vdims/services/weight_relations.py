"""
Weight system spaces: arrow diagrams modulo 6T, XII and FI.

Each relation instance is a local picture (a few arrows with endpoints at
labelled sites) spliced into every ambient diagram at every arrangement of
its sites. dim W_n = (number of degree-n diagrams) - rank(relations).
"""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from vdims.config import get_settings
from vdims.services.diagrams import (
    HEAD,
    TAIL,
    ArrowDiagram,
    BasisLookupError,
    DiagramIndex,
    Key,
    SkeletonKind,
    enumerate_keys,
    format_diagram,
    site_layouts,
    splice,
)
from vdims.services.linalg import RankResult, SparseIntMatrix, rank_consensus

logger = logging.getLogger(__name__)


class R23Mode(str, Enum):
    STANDARD = "standard"
    BRAID_LIKE = "braid"
    R2_ONLY = "r2only"


class R1Mode(str, Enum):
    MOD_R1 = "mod"
    NO_R1 = "no"


class RelationFamily(str, Enum):
    SIX_TERM = "6T"
    XII = "XII"
    FI = "FI"


@dataclass(frozen=True)
class CaseSpec:
    """One theory variant: skeleton x R2/R3 treatment x R1 treatment."""

    kind: SkeletonKind
    r23: R23Mode
    r1: R1Mode

    @property
    def label(self) -> str:
        return f"{self.kind.value}/{self.r23.value}/{self.r1.value}"

    @classmethod
    def parse(cls, label: str) -> "CaseSpec":
        """Inverse of ``label``, e.g. ``long/braid/no``."""
        try:
            kind, r23, r1 = label.split("/")
            return cls(SkeletonKind(kind), R23Mode(r23), R1Mode(r1))
        except ValueError:
            raise ValueError(f"Invalid case label {label!r}, expected skeleton/r23/r1") from None

    def families(self) -> tuple[RelationFamily, ...]:
        families = []
        if self.r23 in (R23Mode.STANDARD, R23Mode.BRAID_LIKE):
            families.append(RelationFamily.SIX_TERM)
        if self.r23 in (R23Mode.STANDARD, R23Mode.R2_ONLY):
            families.append(RelationFamily.XII)
        if self.r1 is R1Mode.MOD_R1:
            families.append(RelationFamily.FI)
        return tuple(families)


def all_cases() -> list[CaseSpec]:
    """The 18 variants, ordered R23 x R1 x skeleton."""
    return [
        CaseSpec(kind, r23, r1)
        for r23, r1, kind in itertools.product(R23Mode, R1Mode, SkeletonKind)
    ]


@dataclass(frozen=True)
class RelationRow:
    """Sparse integer combination of basis columns."""

    terms: tuple[tuple[int, int], ...]
    degree: int
    family: str = ""

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)


def collect_row(
    index: DiagramIndex,
    contributions: Iterable[tuple[Key, int]],
    degree: int,
    family: str = "",
) -> RelationRow | None:
    """
    Sum keyed contributions into a row over ``index``; None if everything cancels.

    Raises:
        BasisLookupError: If a key is not in the basis
    """
    acc: dict[int, int] = {}
    for key, coef in contributions:
        col = index.position(key)
        if col is None:
            raise BasisLookupError(
                f"{format_diagram(ArrowDiagram(index.kind, *key))} missing from the {family} basis"
            )
        acc[col] = acc.get(col, 0) + coef
    terms = tuple(sorted((c, v) for c, v in acc.items() if v))
    if not terms:
        return None
    return RelationRow(terms, degree, family)


# ============ Local pictures ============

# A local picture lists, per site, its endpoints as (local arrow, TAIL|HEAD)
# in skeleton order.
LocalPicture = tuple[tuple[tuple[int, int], ...], ...]


def _product_picture(first: tuple[int, int], second: tuple[int, int], n_sites: int) -> LocalPicture:
    """Two arrows (tail site, head site); at a shared site the first arrow's end comes first."""
    sites: list[list[tuple[int, int]]] = [[] for _ in range(n_sites)]
    for arrow, (tail, head) in enumerate((first, second)):
        sites[tail].append((arrow, TAIL))
        sites[head].append((arrow, HEAD))
    return tuple(tuple(s) for s in sites)


def six_term_pictures() -> list[tuple[int, LocalPicture]]:
    """a_ij a_ik + a_ij a_jk + a_ik a_jk - a_ik a_ij - a_jk a_ij - a_jk a_ik on sites i, j, k = 0, 1, 2."""
    ij, ik, jk = (0, 1), (0, 2), (1, 2)
    products = [
        (1, ij, ik),
        (1, ij, jk),
        (1, ik, jk),
        (-1, ik, ij),
        (-1, jk, ij),
        (-1, jk, ik),
    ]
    return [(coef, _product_picture(a, b, 3)) for coef, a, b in products]


def xii_pictures() -> list[tuple[int, LocalPicture]]:
    """X - II: two arrows from site 0 to site 1, heads crossed or parallel."""
    tails = ((0, TAIL), (1, TAIL))
    crossed = (tails, ((1, HEAD), (0, HEAD)))
    parallel = (tails, ((0, HEAD), (1, HEAD)))
    return [(1, crossed), (-1, parallel)]


def fi_pictures(kind: SkeletonKind) -> list[list[tuple[int, LocalPicture]]]:
    """One isolated arrow per instance; descending skeletons only allow tail-first."""
    tail_first = (((0, TAIL), (0, HEAD)),)
    head_first = (((0, HEAD), (0, TAIL)),)
    if kind is SkeletonKind.DESCENDING:
        return [[(1, tail_first)]]
    return [[(1, tail_first)], [(1, head_first)]]


def picture_codes(picture: LocalPicture, offset: int) -> tuple[tuple[int, ...], ...]:
    """Slot codes of a local picture whose arrows get raw ids starting at ``offset``."""
    return tuple(
        tuple(((offset + arrow) << 1) | end for arrow, end in site)
        for site in picture
    )


def instantiate(
    kind: SkeletonKind,
    n: int,
    n_local: int,
    n_sites: int,
    terms: Sequence[tuple[int, LocalPicture]],
    index: DiagramIndex,
    family: str,
) -> list[RelationRow]:
    """
    Splice a homogeneous local relation into every degree ``n - n_local`` ambient.

    Descending skeletons only get increasing site arrangements.
    """
    d = n - n_local
    if d < 0:
        return []
    coded = [(coef, picture_codes(picture, d)) for coef, picture in terms]
    layouts = site_layouts(2 * d, n_sites, kind is SkeletonKind.DESCENDING)
    rows = []
    for ambient, _ in enumerate_keys(kind, d):
        for layout in layouts:
            row = collect_row(
                index,
                ((splice(kind, ambient, layout, codes), coef) for coef, codes in coded),
                n,
                family,
            )
            if row is not None:
                rows.append(row)
    return rows


# ============ Relation families ============


def generate_6T(kind: SkeletonKind, n: int, index: DiagramIndex | None = None) -> list[RelationRow]:
    """
    Six-term relations in degree n.

    Args:
        kind: Skeleton kind
        n: Degree
        index: Degree-n basis; built when omitted

    Returns:
        One row per (ambient, site arrangement), rows that cancel dropped
    """
    if n < 2:
        return []
    if index is None:
        index = DiagramIndex.for_degree(kind, n)
    return instantiate(kind, n, 2, 3, six_term_pictures(), index, RelationFamily.SIX_TERM.value)


def generate_XII(kind: SkeletonKind, n: int, index: DiagramIndex | None = None) -> list[RelationRow]:
    """XII relations in degree n; rows where X and II coincide are dropped."""
    if n < 2:
        return []
    if index is None:
        index = DiagramIndex.for_degree(kind, n)
    return instantiate(kind, n, 2, 2, xii_pictures(), index, RelationFamily.XII.value)


def generate_FI(kind: SkeletonKind, n: int, index: DiagramIndex | None = None) -> list[RelationRow]:
    """Framing independence: any diagram with an isolated arrow is zero."""
    if n < 1:
        return []
    if index is None:
        index = DiagramIndex.for_degree(kind, n)
    rows: list[RelationRow] = []
    for terms in fi_pictures(kind):
        rows.extend(instantiate(kind, n, 1, 1, terms, index, RelationFamily.FI.value))
    return rows


_GENERATORS = {
    RelationFamily.SIX_TERM: generate_6T,
    RelationFamily.XII: generate_XII,
    RelationFamily.FI: generate_FI,
}


def relation_rows(
    kind: SkeletonKind,
    n: int,
    families: Iterable[RelationFamily],
    index: DiagramIndex | None = None,
) -> dict[RelationFamily, list[RelationRow]]:
    if index is None:
        index = DiagramIndex.for_degree(kind, n)
    return {family: _GENERATORS[family](kind, n, index) for family in families}


def weight_matrix_for_families(
    kind: SkeletonKind,
    n: int,
    families: Iterable[RelationFamily],
) -> SparseIntMatrix:
    """Stack any subset of the relation families over the degree-n basis."""
    index = DiagramIndex.for_degree(kind, n)
    by_family = relation_rows(kind, n, families, index)
    rows = [row for family_rows in by_family.values() for row in family_rows]
    return SparseIntMatrix.from_rows(rows, len(index))


def weight_matrix(case: CaseSpec, n: int) -> SparseIntMatrix:
    """Relation matrix of the degree-n weight system space of a case."""
    return weight_matrix_for_families(case.kind, n, case.families())


@dataclass(frozen=True)
class WeightSpaceResult:
    case: CaseSpec
    degree: int
    basis_size: int
    rows_by_family: dict[str, int]
    rank: RankResult

    @property
    def dimension(self) -> int:
        return self.basis_size - self.rank.rank


def compute_weight_space(case: CaseSpec, n: int, primes: Sequence[int]) -> WeightSpaceResult:
    """Build the weight relation matrix and rank it, keeping per-family statistics."""
    if n < 0:
        raise ValueError(f"Degree must be non-negative, got {n}")
    index = DiagramIndex.for_degree(case.kind, n)
    by_family = relation_rows(case.kind, n, case.families(), index)
    counts = {family.value: len(rows) for family, rows in by_family.items()}
    logger.debug(f"W {case.label} n={n}: basis {len(index)}, rows {counts}")

    rows = [row for family_rows in by_family.values() for row in family_rows]
    matrix = SparseIntMatrix.from_rows(rows, len(index))
    rank = rank_consensus(matrix, primes)
    return WeightSpaceResult(case, n, len(index), counts, rank)


def dim_weight_systems(case: CaseSpec, n: int, primes: Sequence[int] | None = None) -> int:
    """
    dim W_n = basis size - rank of the weight relations.

    Raises:
        InconclusiveRankError: If the primes disagree on the rank
    """
    if primes is None:
        primes = get_settings().primes_list
    result = compute_weight_space(case, n, primes)
    result.rank.require_consensus(f"W {case.label} n={n}")
    return result.dimension


@dataclass(frozen=True)
class ImplicationResult:
    kind: SkeletonKind
    degree: int
    rank_without_xii: int
    rank_with_xii: int

    @property
    def holds(self) -> bool:
        return self.rank_without_xii == self.rank_with_xii


def implication_check(kind: SkeletonKind, n: int, primes: Sequence[int] | None = None) -> ImplicationResult:
    """Compare rank(6T + FI) with rank(6T + FI + XII); equal iff XII follows from the others."""
    if primes is None:
        primes = get_settings().primes_list
    base = [RelationFamily.SIX_TERM, RelationFamily.FI]
    without = rank_consensus(weight_matrix_for_families(kind, n, base), primes)
    with_xii = rank_consensus(weight_matrix_for_families(kind, n, base + [RelationFamily.XII]), primes)
    return ImplicationResult(
        kind,
        n,
        without.require_consensus(f"{kind.value} 6T+FI n={n}"),
        with_xii.require_consensus(f"{kind.value} 6T+FI+XII n={n}"),
    )
