"""
Arrow diagrams on round, long and descending skeletons.

A degree-n diagram is stored as a tuple of 2n slot codes in skeleton order.
A slot code is ``(arrow << 1) | is_head`` with arrows numbered from 0 by first
appearance, so a diagram's key is hashable and totally ordered. Round diagrams
are always kept in their canonical (lexicographically least) rotation.

Relations are instantiated by splicing labelled "site markers" into the slot
sequence of an ambient diagram; see ``site_layouts`` and ``splice``.
"""

import itertools
import logging
import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

TAIL = 0
HEAD = 1

Slots = tuple[int, ...]
Signs = tuple[int, ...] | None
Key = tuple[Slots, Signs]

_TOKEN_RE = re.compile(r"^([TH])(\d+)([+-])?$")


class DiagramError(Exception):
    """Base exception for arrow diagram errors."""

    pass


class StructuralError(DiagramError):
    """Slot sequence is not a perfect directed matching."""

    pass


class UnsupportedSkeletonError(DiagramError):
    """Operation is not defined on this skeleton kind."""

    pass


class DiagramParseError(DiagramError):
    """Diagram text could not be parsed."""

    pass


class BasisLookupError(DiagramError):
    """Diagram is not an element of the basis it was looked up in."""

    pass


class SkeletonKind(str, Enum):
    """Skeleton of a virtual knot: circle, line, or line with descending arrows."""

    ROUND = "round"
    LONG = "long"
    DESCENDING = "descending"


# ============ Slot code helpers ============


def relabel(raw: Sequence[int], raw_signs: Sequence[int] | None = None) -> Key:
    """
    Renumber arrows of a raw slot sequence by first appearance.

    Args:
        raw: Slot codes whose arrow ids are arbitrary non-negative integers
        raw_signs: Signs indexed by the raw arrow ids, or None when unsigned

    Returns:
        (slots, signs) with arrows numbered 0.. in order of first appearance
    """
    mapping: dict[int, int] = {}
    slots = []
    for code in raw:
        arrow = code >> 1
        new = mapping.get(arrow)
        if new is None:
            new = len(mapping)
            mapping[arrow] = new
        slots.append((new << 1) | (code & 1))
    if raw_signs is None:
        return tuple(slots), None
    signs = [0] * len(mapping)
    for old, new in mapping.items():
        signs[new] = raw_signs[old]
    return tuple(slots), tuple(signs)


def min_rotation(slots: Slots, signs: Signs = None) -> Key:
    """Lexicographically least rotation of a circular slot sequence."""
    if not slots:
        return slots, signs
    best: Key | None = None
    best_order: tuple[int, ...] = ()
    for r, code in enumerate(slots):
        # the least rotation starts with a tail (code 0)
        if code & 1:
            continue
        candidate = relabel(slots[r:] + slots[:r], signs)
        order = candidate[0] + (candidate[1] or ())
        if best is None or order < best_order:
            best, best_order = candidate, order
    return best


def slots_descend(slots: Slots) -> bool:
    """True iff every arrow's tail precedes its head."""
    seen: set[int] = set()
    for code in slots:
        arrow = code >> 1
        if arrow not in seen:
            if code & 1:
                return False
            seen.add(arrow)
    return True


def validate_slots(slots: Slots, signs: Signs = None) -> None:
    """
    Check that a slot sequence is a perfect directed matching.

    Raises:
        StructuralError: If a slot is reused, an arrow lacks an endpoint,
            arrow ids are not contiguous, or signs are malformed
    """
    if len(slots) % 2:
        raise StructuralError(f"Odd number of slots: {len(slots)}")
    degree = len(slots) // 2
    tails = [0] * degree
    heads = [0] * degree
    for code in slots:
        arrow = code >> 1
        if code < 0 or arrow >= degree:
            raise StructuralError(f"Arrow id {arrow} out of range for degree {degree}")
        if code & 1:
            heads[arrow] += 1
        else:
            tails[arrow] += 1
    for arrow in range(degree):
        if tails[arrow] != 1 or heads[arrow] != 1:
            raise StructuralError(
                f"Arrow {arrow + 1} has {tails[arrow]} tail(s) and {heads[arrow]} head(s)"
            )
    if signs is not None:
        if len(signs) != degree:
            raise StructuralError(f"Expected {degree} signs, got {len(signs)}")
        if any(s not in (1, -1) for s in signs):
            raise StructuralError(f"Signs must be +1 or -1: {signs}")


# ============ Arrow diagrams ============


@dataclass(frozen=True)
class ArrowDiagram:
    """A degree-n arrow diagram; ``signs`` is None outside signed mode."""

    kind: SkeletonKind
    slots: Slots
    signs: Signs = None

    @property
    def degree(self) -> int:
        return len(self.slots) // 2

    @property
    def signed(self) -> bool:
        return self.signs is not None

    @property
    def key(self) -> Key:
        return self.slots, self.signs

    def arrows(self) -> list[tuple[int, int]]:
        """(tail slot, head slot) for each arrow, in arrow order."""
        ends = [[-1, -1] for _ in range(self.degree)]
        for position, code in enumerate(self.slots):
            ends[code >> 1][code & 1] = position
        return [(tail, head) for tail, head in ends]

    @classmethod
    def from_arrows(
        cls,
        kind: SkeletonKind,
        arrows: Sequence[tuple[int, int]],
        signs: Sequence[int] | None = None,
    ) -> "ArrowDiagram":
        """
        Build a diagram from (tail slot, head slot) pairs.

        Raises:
            StructuralError: If the pairs do not cover slots 0..2n-1 exactly once
        """
        size = 2 * len(arrows)
        raw = [-1] * size
        for arrow, (tail, head) in enumerate(arrows):
            for position, end in ((tail, TAIL), (head, HEAD)):
                if not 0 <= position < size:
                    raise StructuralError(f"Slot {position} outside 0..{size - 1}")
                if raw[position] != -1:
                    raise StructuralError(f"Slot {position} is used twice")
                raw[position] = (arrow << 1) | end
        return canonicalize(cls(kind, tuple(raw), tuple(signs) if signs is not None else None))


def canonicalize(d: ArrowDiagram) -> ArrowDiagram:
    """
    Return the canonical representative of a diagram.

    Long and descending diagrams only get their arrows renumbered by first
    appearance (a no-op for enumerated diagrams); round diagrams are rotated
    to the lexicographically least encoding. Idempotent.

    Raises:
        StructuralError: If the matching is malformed, or a descending
            diagram has an arrow pointing against the skeleton
    """
    validate_slots(d.slots, d.signs)
    if d.kind is SkeletonKind.ROUND:
        slots, signs = min_rotation(d.slots, d.signs)
    else:
        slots, signs = relabel(d.slots, d.signs)
        if d.kind is SkeletonKind.DESCENDING and not slots_descend(slots):
            raise StructuralError("Descending diagram has an arrow against the skeleton")
    if slots == d.slots and signs == d.signs:
        return d
    return ArrowDiagram(d.kind, slots, signs)


def is_descending(d: ArrowDiagram) -> bool:
    """
    Check whether every arrow's tail precedes its head.

    Raises:
        UnsupportedSkeletonError: For round diagrams (no linear order)
    """
    if d.kind is SkeletonKind.ROUND:
        raise UnsupportedSkeletonError("Descending is only defined on a long skeleton")
    return slots_descend(d.slots)


# ============ Enumeration ============


def _matchings(points: tuple[int, ...]) -> Iterable[tuple[tuple[int, int], ...]]:
    """Perfect matchings of ``points``, pairs ordered by their first point."""
    if not points:
        yield ()
        return
    first = points[0]
    for idx in range(1, len(points)):
        rest = points[1:idx] + points[idx + 1:]
        for matching in _matchings(rest):
            yield ((first, points[idx]),) + matching


def _long_slot_sequences(n: int, descending: bool) -> list[Slots]:
    sequences = []
    flips_choices = [(0,) * n] if descending else list(itertools.product((0, 1), repeat=n))
    for matching in _matchings(tuple(range(2 * n))):
        for flips in flips_choices:
            raw = [0] * (2 * n)
            for arrow, ((first, second), flip) in enumerate(zip(matching, flips)):
                tail, head = (second, first) if flip else (first, second)
                raw[tail] = arrow << 1
                raw[head] = (arrow << 1) | 1
            sequences.append(tuple(raw))
    return sequences


@lru_cache(maxsize=None)
def enumerate_keys(kind: SkeletonKind, n: int, signed: bool = False) -> tuple[Key, ...]:
    """Sorted keys of all canonical degree-n diagrams (see ``enumerate_diagrams``)."""
    if n < 0:
        raise ValueError(f"Degree must be non-negative, got {n}")
    unsigned = _long_slot_sequences(n, kind is SkeletonKind.DESCENDING)
    sign_choices = list(itertools.product((1, -1), repeat=n)) if signed else [None]

    keys: set[Key] = set()
    for slots in unsigned:
        for signs in sign_choices:
            if kind is SkeletonKind.ROUND:
                keys.add(min_rotation(slots, signs))
            else:
                keys.add((slots, signs))

    ordered = sorted(keys, key=lambda k: k[0] + (k[1] or ()))
    logger.debug(f"Enumerated {len(ordered)} {kind.value} diagrams of degree {n} (signed={signed})")
    return tuple(ordered)


def enumerate_diagrams(kind: SkeletonKind, n: int, signed: bool = False) -> list[ArrowDiagram]:
    """
    All distinct canonical diagrams of exactly degree n, in deterministic order.

    Args:
        kind: Skeleton kind
        n: Degree (number of arrows)
        signed: Attach every sign assignment to each diagram

    Returns:
        Diagrams sorted by their encoding
    """
    return [ArrowDiagram(kind, slots, signs) for slots, signs in enumerate_keys(kind, n, signed)]


def round_orbit_count(n: int) -> int:
    """Number of rotation orbits of directed perfect matchings on 2n cyclic points."""
    size = 2 * n
    orbits: set[frozenset] = set()
    for matching in _matchings(tuple(range(size))):
        for flips in itertools.product((0, 1), repeat=n):
            arrows = frozenset(
                (second, first) if flip else (first, second)
                for (first, second), flip in zip(matching, flips)
            )
            orbit = frozenset(
                frozenset(((t + r) % size, (h + r) % size) for t, h in arrows)
                for r in range(max(size, 1))
            )
            orbits.add(orbit)
    return len(orbits)


# ============ Basis index ============


class DiagramIndex:
    """Bijection between the diagrams of a basis and dense column indices."""

    def __init__(self, kind: SkeletonKind, keys: Sequence[Key], signed: bool = False):
        self.kind = kind
        self.signed = signed
        self._keys = tuple(keys)
        self._positions = {key: i for i, key in enumerate(self._keys)}
        if len(self._positions) != len(self._keys):
            raise StructuralError("Basis contains duplicate diagrams")

    @classmethod
    def for_degree(cls, kind: SkeletonKind, n: int, signed: bool = False) -> "DiagramIndex":
        return cls(kind, enumerate_keys(kind, n, signed), signed)

    @classmethod
    def graded(cls, kind: SkeletonKind, max_degree: int, signed: bool = False) -> "DiagramIndex":
        """Disjoint union of the degree 0..max_degree bases, lowest degree first."""
        keys: list[Key] = []
        for degree in range(max_degree + 1):
            keys.extend(enumerate_keys(kind, degree, signed))
        return cls(kind, keys, signed)

    def __len__(self) -> int:
        return len(self._keys)

    def __contains__(self, d: ArrowDiagram) -> bool:
        return canonicalize(d).key in self._positions

    def position(self, key: Key) -> int | None:
        """Index of an already canonical key, or None."""
        return self._positions.get(key)

    def index_of(self, d: ArrowDiagram) -> int:
        """
        Index of a diagram after canonicalization.

        Raises:
            BasisLookupError: If the diagram is not in this basis
        """
        key = canonicalize(d).key
        position = self._positions.get(key)
        if position is None:
            raise BasisLookupError(f"{format_diagram(d)} is not in this basis")
        return position

    def diagram(self, position: int) -> ArrowDiagram:
        slots, signs = self._keys[position]
        return ArrowDiagram(self.kind, slots, signs)

    def degree_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for slots, _ in self._keys:
            degree = len(slots) // 2
            counts[degree] = counts.get(degree, 0) + 1
        return counts


# ============ Splicing local pictures into ambient diagrams ============


@lru_cache(maxsize=None)
def site_layouts(n_slots: int, n_sites: int, increasing: bool = False) -> tuple[tuple[int, ...], ...]:
    """
    All ways to place labelled site markers among the slots of an ambient diagram.

    A layout lists the combined sequence: entries >= 0 are ambient slot
    indices, entry ``-1 - s`` is site marker ``s``. Markers may share a gap
    in any relative order. With ``increasing`` only layouts where marker
    0 < 1 < ... along the skeleton are produced.
    """
    total = n_slots + n_sites
    choose = itertools.combinations if increasing else itertools.permutations
    layouts = []
    for positions in choose(range(total), n_sites):
        marker_at = {p: s for s, p in enumerate(positions)}
        layout = []
        slot = 0
        for p in range(total):
            site = marker_at.get(p)
            if site is None:
                layout.append(slot)
                slot += 1
            else:
                layout.append(-1 - site)
        layouts.append(tuple(layout))
    return tuple(layouts)


def splice(
    kind: SkeletonKind,
    ambient: Slots,
    layout: Sequence[int],
    site_codes: Sequence[Sequence[int]],
    raw_signs: Sequence[int] | None = None,
) -> Key:
    """
    Replace each site marker of a layout by a run of local slot codes.

    Local arrows must use raw ids above the ambient's (``ambient degree + i``);
    ``raw_signs`` is indexed by raw id. Returns the canonical key.
    """
    raw: list[int] = []
    for item in layout:
        if item >= 0:
            raw.append(ambient[item])
        else:
            raw.extend(site_codes[-1 - item])
    key = relabel(raw, raw_signs)
    if kind is SkeletonKind.ROUND:
        return min_rotation(*key)
    return key


# ============ Text format ============


def format_diagram(d: ArrowDiagram) -> str:
    """Render as ``n: T1 T2 H1 H2`` (``T1+`` style suffixes in signed mode)."""
    tokens = []
    for code in d.slots:
        arrow = code >> 1
        token = f"{'H' if code & 1 else 'T'}{arrow + 1}"
        if d.signs is not None:
            token += "+" if d.signs[arrow] > 0 else "-"
        tokens.append(token)
    return f"{d.degree}: {' '.join(tokens)}".rstrip()


def parse_diagram(text: str, kind: SkeletonKind) -> ArrowDiagram:
    """
    Parse one line of the diagram text format.

    Raises:
        DiagramParseError: On malformed header or tokens
        StructuralError: If the tokens do not form a perfect directed matching
    """
    header, sep, body = text.strip().partition(":")
    if not sep or not header.strip().isdigit():
        raise DiagramParseError(f"Missing degree header in {text!r}")
    degree = int(header)
    tokens = body.split()
    if len(tokens) != 2 * degree:
        raise DiagramParseError(f"Degree {degree} needs {2 * degree} tokens, got {len(tokens)}")

    raw = []
    signs: dict[int, int] = {}
    suffixes = 0
    for token in tokens:
        match = _TOKEN_RE.match(token)
        if not match:
            raise DiagramParseError(f"Bad token {token!r}")
        end, number, sign = match.groups()
        arrow = int(number) - 1
        if not 0 <= arrow < degree:
            raise DiagramParseError(f"Arrow number {number} out of range in {token!r}")
        raw.append((arrow << 1) | (HEAD if end == "H" else TAIL))
        if sign:
            suffixes += 1
            value = 1 if sign == "+" else -1
            if signs.setdefault(arrow, value) != value:
                raise DiagramParseError(f"Arrow {number} has conflicting signs")
    if suffixes not in (0, len(tokens)):
        raise DiagramParseError("Either every token or no token carries a sign")

    validate_slots(tuple(raw))
    raw_signs = [signs[a] for a in range(degree)] if suffixes else None
    slots, ordered_signs = relabel(raw, raw_signs)
    return canonicalize(ArrowDiagram(kind, slots, ordered_signs))
