"""
Reidemeister move configuration table.

Each move is stored as two local sides on labelled sites (strand pieces).
A side lists its arrows' signs and, per site, the endpoints met along the
strand in skeleton order. Arrows always run from the over strand to the
under strand.
"""

import itertools
from dataclasses import dataclass
from enum import Enum

from vdims.services.diagrams import HEAD, TAIL

# Bump when any convention below changes; cached results keyed on it go stale.
CONVENTIONS_VERSION = 3

Endpoint = tuple[int, int]
SitePicture = tuple[tuple[Endpoint, ...], ...]


class MoveId(str, Enum):
    R1_POS = "R1+"
    R1_NEG = "R1-"
    R2B = "R2b"
    R2C = "R2c"
    R3B = "R3b"
    R3C = "R3c"


@dataclass(frozen=True)
class LocalSide:
    """Signed local arrows with endpoints on the sites of a move."""

    signs: tuple[int, ...]
    sites: SitePicture

    @property
    def degree(self) -> int:
        return len(self.signs)

    @property
    def positive(self) -> bool:
        return all(s > 0 for s in self.signs)

    def normalized(self) -> "LocalSide":
        """Renumber arrows by first appearance across the sites."""
        mapping: dict[int, int] = {}
        sites = []
        for site in self.sites:
            out = []
            for arrow, end in site:
                if arrow not in mapping:
                    mapping[arrow] = len(mapping)
                out.append((mapping[arrow], end))
            sites.append(tuple(out))
        signs = [0] * len(mapping)
        for old, new in mapping.items():
            signs[new] = self.signs[old]
        return LocalSide(tuple(signs), tuple(sites))

    def subset(self, arrows: tuple[int, ...]) -> "LocalSide":
        """The side restricted to the given arrows, endpoint order kept."""
        keep = set(arrows)
        sites = tuple(tuple(e for e in site if e[0] in keep) for site in self.sites)
        return LocalSide(self.signs, sites).normalized()

    def spans(self) -> list[tuple[int, int]]:
        """(tail site, head site) per arrow."""
        ends: dict[int, list[int]] = {}
        for site_id, site in enumerate(self.sites):
            for arrow, end in site:
                ends.setdefault(arrow, [-1, -1])[end] = site_id
        return [(ends[a][TAIL], ends[a][HEAD]) for a in sorted(ends)]

    def tail_first_within_sites(self) -> bool:
        """True iff every arrow with both ends on one site has its tail first."""
        for site in self.sites:
            tails: set[int] = set()
            for arrow, end in site:
                if end == TAIL:
                    tails.add(arrow)
                elif (arrow, TAIL) in site and arrow not in tails:
                    return False
        return True


@dataclass(frozen=True)
class MoveTemplate:
    """One configuration of a Reidemeister move: left side = right side."""

    move: MoveId
    variant: str
    n_sites: int
    left: LocalSide
    right: LocalSide

    @property
    def label(self) -> str:
        return f"{self.move.value}[{self.variant}]"

    def subset_terms(self) -> list[tuple[int, LocalSide]]:
        """
        Nonempty-subset expansion: +1 for every subset of the left side,
        -1 for every subset of the right side.
        """
        terms = []
        for coef, side in ((1, self.left), (-1, self.right)):
            for size in range(1, side.degree + 1):
                for arrows in itertools.combinations(range(side.degree), size):
                    terms.append((coef, side.subset(arrows)))
        return terms

    def spans(self) -> list[tuple[int, int]]:
        return self.left.spans() + self.right.spans()


_EMPTY_SITE: SitePicture = ((),)


def _r1_templates() -> list[MoveTemplate]:
    templates = []
    for move, sign in ((MoveId.R1_POS, 1), (MoveId.R1_NEG, -1)):
        for variant, site in (
            ("tail-first", ((0, TAIL), (0, HEAD))),
            ("head-first", ((0, HEAD), (0, TAIL))),
        ):
            left = LocalSide((sign,), (site,))
            templates.append(MoveTemplate(move, variant, 1, left, LocalSide((), _EMPTY_SITE)))
    return templates


def _r2_templates() -> list[MoveTemplate]:
    # a (sign e) and b (sign -e) both run site 0 -> site 1; a comes first on
    # site 0, and first on site 1 iff the strands are co-oriented
    templates = []
    tails = ((0, TAIL), (1, TAIL))
    for move, heads in (
        (MoveId.R2B, ((0, HEAD), (1, HEAD))),
        (MoveId.R2C, ((1, HEAD), (0, HEAD))),
    ):
        for e in (1, -1):
            left = LocalSide((e, -e), (tails, heads))
            variant = "a+b-" if e > 0 else "a-b+"
            templates.append(MoveTemplate(move, variant, 2, left, LocalSide((), ((), ()))))
    return templates


# lines 1, 2, 3 bound a triangle in counter-clockwise order; crossing
# X_pq joins lines p and q. Along line i (oriented counter-clockwise) the
# crossings are met in this order:
_CCW_ORDER = {1: ((1, 3), (1, 2)), 2: ((1, 2), (2, 3)), 3: ((2, 3), (1, 3))}
_CROSSINGS = ((1, 2), (1, 3), (2, 3))
_CCW_PAIRS = {(1, 2), (2, 3), (3, 1)}


def _r3_side(orientation: dict[int, int], height: dict[int, int], flipped: bool) -> LocalSide:
    signs = []
    ends: dict[tuple[int, int], tuple[int, int]] = {}
    for arrow, (p, q) in enumerate(_CROSSINGS):
        over, under = (p, q) if height[p] > height[q] else (q, p)
        c = 1 if (over, under) in _CCW_PAIRS else -1
        signs.append(orientation[over] * orientation[under] * c)
        ends[(p, q)] = (over, under)
    sites = []
    for line in (1, 2, 3):
        order = _CCW_ORDER[line]
        if orientation[line] < 0:
            order = order[::-1]
        if flipped:
            order = order[::-1]
        site = []
        for crossing in order:
            arrow = _CROSSINGS.index(crossing)
            over, _ = ends[crossing]
            site.append((arrow, TAIL if over == line else HEAD))
        sites.append(tuple(site))
    return LocalSide(tuple(signs), tuple(sites))


def _r3_templates() -> list[MoveTemplate]:
    """
    R3 with line 1 on top and o_1 = +1; the other configurations are cyclic
    relabellings or the left/right swap of these.
    """
    templates = []
    for o2, o3 in itertools.product((1, -1), repeat=2):
        orientation = {1: 1, 2: o2, 3: o3}
        move = MoveId.R3C if o2 == o3 == 1 else MoveId.R3B
        for middle in (2, 3):
            height = {1: 3, middle: 2, 5 - middle: 1}
            variant = f"o=+{'+' if o2 > 0 else '-'}{'+' if o3 > 0 else '-'},1>{middle}>{5 - middle}"
            templates.append(
                MoveTemplate(
                    move,
                    variant,
                    3,
                    _r3_side(orientation, height, flipped=False),
                    _r3_side(orientation, height, flipped=True),
                )
            )
    return templates


def build_move_table() -> dict[MoveId, list[MoveTemplate]]:
    table: dict[MoveId, list[MoveTemplate]] = {move: [] for move in MoveId}
    for template in _r1_templates() + _r2_templates() + _r3_templates():
        table[template.move].append(template)
    return table


MOVE_TABLE = build_move_table()
