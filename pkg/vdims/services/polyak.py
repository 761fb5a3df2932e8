"""
Truncated Polyak algebra P_n and the finite type quotients V_{n/n-1}.

P_n is spanned by signed arrow diagrams of degree <= n modulo the
Reidemeister relations of a case: for a move with left arrows A and right
arrows B, every ambient D and every placement of the move's sites gives

    sum over nonempty S in A of (D u S)  -  sum over nonempty T in B of (D u T),

with terms of degree > n dropped. Negative arrows can be rewritten through
an R2 relation as alternating sums of stacked positive arrows, which shrinks
the basis to positive diagrams.
"""

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Sequence

from vdims.config import get_settings
from vdims.services.diagrams import (
    HEAD,
    TAIL,
    BasisLookupError,
    DiagramIndex,
    Key,
    SkeletonKind,
    enumerate_keys,
    site_layouts,
    splice,
)
from vdims.services.linalg import RankResult, SparseIntMatrix, rank_consensus
from vdims.services.moves import MOVE_TABLE, LocalSide, MoveId, MoveTemplate
from vdims.services.weight_relations import CaseSpec, R1Mode, R23Mode

logger = logging.getLogger(__name__)


class PolyakError(Exception):
    """Base exception for Polyak algebra computations."""

    pass


class UnsupportedEliminationError(PolyakError):
    """Negative arrows cannot be eliminated without an R2 move."""

    pass


class PolyakMode(str, Enum):
    SIGNED = "signed"
    POSITIVE_ONLY = "positive"


class Stacking(str, Enum):
    PARALLEL = "parallel"
    TWISTED = "twisted"


# ============ Basis ============


@dataclass(frozen=True)
class PolyakBasis:
    """Graded basis of all diagrams of degree 0..max_degree."""

    kind: SkeletonKind
    max_degree: int
    mode: PolyakMode
    index: DiagramIndex

    @classmethod
    def build(cls, kind: SkeletonKind, max_degree: int, mode: PolyakMode) -> "PolyakBasis":
        signed = mode is PolyakMode.SIGNED
        return cls(kind, max_degree, mode, DiagramIndex.graded(kind, max_degree, signed))

    @property
    def signed(self) -> bool:
        return self.mode is PolyakMode.SIGNED

    def __len__(self) -> int:
        return len(self.index)

    def ambients(self, degree: int) -> tuple[Key, ...]:
        return enumerate_keys(self.kind, degree, self.signed)


@dataclass(frozen=True)
class InhomogeneousRow:
    """Sparse combination of basis columns spanning mixed degrees."""

    terms: tuple[tuple[int, int], ...]
    top_degree: int
    source: str = ""

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)


def move_templates(case: CaseSpec) -> list[MoveTemplate]:
    """Every configuration of the moves a case divides out by."""
    moves = {
        R23Mode.STANDARD: [MoveId.R2B, MoveId.R2C, MoveId.R3B, MoveId.R3C],
        R23Mode.BRAID_LIKE: [MoveId.R2B, MoveId.R3B],
        R23Mode.R2_ONLY: [MoveId.R2B, MoveId.R2C],
    }[case.r23]
    if case.r1 is R1Mode.MOD_R1:
        moves = [MoveId.R1_POS, MoveId.R1_NEG] + moves
    return [template for move in moves for template in MOVE_TABLE[move]]


def default_mode(case: CaseSpec) -> PolyakMode:
    if any(t.move in (MoveId.R2B, MoveId.R2C) for t in move_templates(case)):
        return PolyakMode.POSITIVE_ONLY
    return PolyakMode.SIGNED


# ============ Negative arrow elimination ============


@dataclass(frozen=True)
class Elimination:
    """
    How negative arrows are rewritten for a case.

    ``eliminator`` is the R2 family solved for the negative arrow (its rows
    become trivial); ``equate`` is the other R2 family, present only when
    both are in the case, whose content is carried by auxiliary rows.
    """

    stacking: Stacking
    eliminator: MoveId
    equate: MoveId | None


def eliminate_negative_arrows(case: CaseSpec) -> Elimination:
    """
    Choose the rewriting b = -a + a^2 - a^3 + ... for a case.

    Parallel stacks come from R2b (used whenever present), totally twisted
    stacks from R2c.

    Raises:
        UnsupportedEliminationError: If the case has no R2 move
    """
    moves = {t.move for t in move_templates(case)}
    if MoveId.R2B in moves:
        equate = MoveId.R2C if MoveId.R2C in moves else None
        return Elimination(Stacking.PARALLEL, MoveId.R2B, equate)
    if MoveId.R2C in moves:
        return Elimination(Stacking.TWISTED, MoveId.R2C, None)
    raise UnsupportedEliminationError(f"{case.label} has no R2 move; use signed mode")


def stack(k: int, stacking: Stacking) -> LocalSide:
    """k positive arrows from site 0 to site 1, heads parallel or reversed."""
    tails = tuple((a, TAIL) for a in range(k))
    order = range(k) if stacking is Stacking.PARALLEL else range(k - 1, -1, -1)
    heads = tuple((a, HEAD) for a in order)
    return LocalSide((1,) * k, (tails, heads))


@lru_cache(maxsize=None)
def expand_negative_arrows(
    side: LocalSide,
    budget: int,
    stacking: Stacking,
) -> tuple[tuple[int, LocalSide], ...]:
    """
    Rewrite each negative arrow as sum_{k>=1} (-1)^k (k stacked positive arrows).

    Args:
        side: Local side, possibly with negative arrows
        budget: Maximum number of arrows kept in a term
        stacking: Head order of the stacked copies

    Returns:
        (coefficient, all-positive side) pairs; empty if nothing fits the budget
    """
    negative = [a for a, s in enumerate(side.signs) if s < 0]
    base = side.degree - len(negative)
    results: list[tuple[int, LocalSide]] = []

    def choose(i: int, used: int, counts: list[int]) -> None:
        if i == len(negative):
            results.append(_stacked(side, dict(zip(negative, counts)), stacking))
            return
        for k in range(1, budget - used + 1):
            choose(i + 1, used + k, counts + [k])

    if base + len(negative) <= budget:
        choose(0, base, [])
    return tuple(results)


def _stacked(side: LocalSide, counts: dict[int, int], stacking: Stacking) -> tuple[int, LocalSide]:
    ids: dict[int, list[int]] = {}
    next_id = 0
    for arrow in range(side.degree):
        k = counts.get(arrow, 1)
        ids[arrow] = list(range(next_id, next_id + k))
        next_id += k
    sites = []
    for site in side.sites:
        out: list[tuple[int, int]] = []
        for arrow, end in site:
            copies = ids[arrow]
            if end == HEAD and arrow in counts and stacking is Stacking.TWISTED:
                copies = copies[::-1]
            out.extend((c, end) for c in copies)
        sites.append(tuple(out))
    coef = 1
    for k in counts.values():
        coef *= (-1) ** k
    return coef, LocalSide((1,) * next_id, tuple(sites)).normalized()


# ============ Local terms and instantiation ============


def _merge(terms: Iterable[tuple[int, LocalSide]]) -> tuple[tuple[int, LocalSide], ...]:
    merged: dict[LocalSide, int] = {}
    for coef, side in terms:
        key = side.normalized()
        merged[key] = merged.get(key, 0) + coef
    return tuple((coef, side) for side, coef in merged.items() if coef)


@lru_cache(maxsize=None)
def local_terms(
    template: MoveTemplate,
    budget: int,
    stacking: Stacking | None,
) -> tuple[tuple[int, LocalSide], ...]:
    """
    Merged subset expansion of a move, truncated to ``budget`` arrows.

    With ``stacking`` set, negative arrows are rewritten and all surviving
    terms are positive.
    """
    terms = []
    for coef, side in template.subset_terms():
        if stacking is None:
            if side.degree <= budget:
                terms.append((coef, side))
        else:
            terms.extend((coef * c, s) for c, s in expand_negative_arrows(side, budget, stacking))
    return _merge(terms)


@lru_cache(maxsize=None)
def equating_terms(budget: int) -> tuple[tuple[int, LocalSide], ...]:
    """sum_{k=2}^{budget} (-1)^k (parallel k-stack - twisted k-stack)."""
    terms = []
    for k in range(2, budget + 1):
        sign = (-1) ** k
        terms.append((sign, stack(k, Stacking.PARALLEL)))
        terms.append((-sign, stack(k, Stacking.TWISTED)))
    return _merge(terms)


def _marker_order(layout: Sequence[int]) -> dict[int, int]:
    order: dict[int, int] = {}
    for item in layout:
        if item < 0:
            order[-1 - item] = len(order)
    return order


def _descending_layouts(
    layouts: Sequence[tuple[int, ...]],
    spans: Sequence[tuple[int, int]],
) -> list[tuple[int, ...]]:
    kept = []
    for layout in layouts:
        rank = _marker_order(layout)
        if all(rank[t] < rank[h] for t, h in spans if t != h):
            kept.append(layout)
    return kept


def _instantiate(
    basis: PolyakBasis,
    n: int,
    n_sites: int,
    terms_for_budget,
    spans: Sequence[tuple[int, int]],
    source: str,
) -> list[InhomogeneousRow]:
    """Splice per-budget local terms into every ambient of degree < n."""
    kind = basis.kind
    rows: list[InhomogeneousRow] = []
    for d in range(n):
        terms = terms_for_budget(n - d)
        if not terms:
            continue
        coded = [
            (coef, _codes(side, d), side.signs)
            for coef, side in terms
        ]
        layouts = site_layouts(2 * d, n_sites, False)
        if kind is SkeletonKind.DESCENDING:
            layouts = _descending_layouts(layouts, spans)
        for slots, signs in basis.ambients(d):
            for layout in layouts:
                acc: dict[int, int] = {}
                top = 0
                for coef, codes, local_signs in coded:
                    raw_signs = signs + local_signs if basis.signed else None
                    key = splice(kind, slots, layout, codes, raw_signs)
                    col = basis.index.position(key)
                    if col is None:
                        raise BasisLookupError(f"{source}: spliced diagram {key} is not in the basis")
                    acc[col] = acc.get(col, 0) + coef
                    top = max(top, len(key[0]) // 2)
                row = tuple(sorted((c, v) for c, v in acc.items() if v))
                if row:
                    rows.append(InhomogeneousRow(row, top, source))
    return rows


def _codes(side: LocalSide, offset: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(((offset + a) << 1) | end for a, end in site) for site in side.sites)


def generate_move_relations(
    template: MoveTemplate,
    case: CaseSpec,
    n: int,
    basis: PolyakBasis | None = None,
) -> list[InhomogeneousRow]:
    """
    Rows of one move configuration over the degree <= n basis.

    In positive-only mode, negative arrows are rewritten, and the R2 family
    used for the rewriting yields no rows. On descending skeletons only site
    placements that keep every local arrow descending are used.
    """
    if n < 1:
        return []
    if basis is None:
        basis = PolyakBasis.build(case.kind, n, default_mode(case))
    stacking = None
    if not basis.signed:
        elimination = eliminate_negative_arrows(case)
        if template.move in (elimination.eliminator, elimination.equate):
            return []
        stacking = elimination.stacking
    if case.kind is SkeletonKind.DESCENDING and not (
        template.left.tail_first_within_sites() and template.right.tail_first_within_sites()
    ):
        return []
    return _instantiate(
        basis,
        n,
        template.n_sites,
        lambda budget: local_terms(template, budget, stacking),
        template.spans(),
        template.label,
    )


def generate_equating_rows(case: CaseSpec, n: int, basis: PolyakBasis) -> list[InhomogeneousRow]:
    """Rows equating parallel and twisted expansions when both R2 families are imposed."""
    if basis.signed or n < 2:
        return []
    elimination = eliminate_negative_arrows(case)
    if elimination.equate is None:
        return []
    return _instantiate(basis, n, 2, equating_terms, [(0, 1)], f"{elimination.equate.value}[equate]")


def polyak_rows(case: CaseSpec, n: int, basis: PolyakBasis) -> dict[str, list[InhomogeneousRow]]:
    """All relation rows of a case, grouped by move configuration."""
    groups: dict[str, list[InhomogeneousRow]] = {}
    for template in move_templates(case):
        groups[template.label] = generate_move_relations(template, case, n, basis)
    equating = generate_equating_rows(case, n, basis)
    if equating:
        groups[equating[0].source] = equating
    return groups


# ============ Dimensions ============


@dataclass(frozen=True)
class PolyakResult:
    case: CaseSpec
    degree: int
    mode: PolyakMode
    basis_size: int
    degree_counts: dict[int, int]
    rows_by_move: dict[str, int]
    rank: RankResult
    elapsed_seconds: float = 0.0
    extra: dict[str, int] = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.basis_size - self.rank.rank


def compute_polyak(
    case: CaseSpec,
    n: int,
    primes: Sequence[int],
    mode: PolyakMode | None = None,
) -> PolyakResult:
    """Assemble and rank the relations of P_n."""
    if n < 0:
        raise ValueError(f"Degree must be non-negative, got {n}")
    mode = mode or default_mode(case)
    if mode is PolyakMode.POSITIVE_ONLY:
        eliminate_negative_arrows(case)
    started = time.perf_counter()
    basis = PolyakBasis.build(case.kind, n, mode)
    groups = polyak_rows(case, n, basis)
    counts = {label: len(rows) for label, rows in groups.items()}
    logger.debug(f"P {case.label} n={n} ({mode.value}): basis {len(basis)}, rows {counts}")

    matrix = SparseIntMatrix.from_rows(
        (row for rows in groups.values() for row in rows),
        len(basis),
    )
    rank = rank_consensus(matrix, primes)
    return PolyakResult(
        case=case,
        degree=n,
        mode=mode,
        basis_size=len(basis),
        degree_counts=basis.index.degree_counts(),
        rows_by_move=counts,
        rank=rank,
        elapsed_seconds=time.perf_counter() - started,
    )


def polyak_matrix(case: CaseSpec, n: int, mode: PolyakMode | None = None) -> SparseIntMatrix:
    mode = mode or default_mode(case)
    basis = PolyakBasis.build(case.kind, n, mode)
    groups = polyak_rows(case, n, basis)
    return SparseIntMatrix.from_rows((row for rows in groups.values() for row in rows), len(basis))


def dim_polyak(
    case: CaseSpec,
    n: int,
    primes: Sequence[int] | None = None,
    mode: PolyakMode | None = None,
) -> int:
    """
    dim P_n = |basis of degree <= n| - rank of the move relations.

    Raises:
        InconclusiveRankError: If the primes disagree on the rank
    """
    if primes is None:
        primes = get_settings().primes_list
    result = compute_polyak(case, n, primes, mode)
    result.rank.require_consensus(f"P {case.label} n={n}")
    return result.dimension


def dim_V_quotient(
    case: CaseSpec,
    n: int,
    primes: Sequence[int] | None = None,
    mode: PolyakMode | None = None,
) -> int:
    """
    dim V_{n/n-1} = dim P_n - dim P_{n-1}.

    Raises:
        PolyakError: If the filtration is not monotone
    """
    if n < 1:
        raise ValueError(f"Quotient needs n >= 1, got {n}")
    upper = dim_polyak(case, n, primes, mode)
    lower = dim_polyak(case, n - 1, primes, mode)
    if upper < lower:
        raise PolyakError(f"dim P_{n} = {upper} < dim P_{n - 1} = {lower} for {case.label}")
    return upper - lower


def polyak_manifest(case: CaseSpec, n: int, mode: PolyakMode | None = None) -> str:
    """Basis sizes per degree and row counts per move configuration, as plain text."""
    mode = mode or default_mode(case)
    basis = PolyakBasis.build(case.kind, n, mode)
    groups = polyak_rows(case, n, basis)
    lines = [f"case {case.label}", f"max_degree {n}", f"mode {mode.value}"]
    for degree, count in sorted(basis.index.degree_counts().items()):
        lines.append(f"basis degree {degree} {count}")
    lines.append(f"basis total {len(basis)}")
    for label, rows in groups.items():
        lines.append(f"rows {label} {len(rows)}")
    lines.append(f"rows total {sum(len(rows) for rows in groups.values())}")
    return "\n".join(lines) + "\n"
