import itertools
from collections import Counter

import pytest

from vdims.services import polyak
from vdims.services.diagrams import HEAD, TAIL, DiagramIndex, SkeletonKind, format_diagram, parse_diagram
from vdims.services.golden import GOLDEN
from vdims.services.linalg import rank_consensus, rank_rational
from vdims.services.moves import MOVE_TABLE, LocalSide, MoveId
from vdims.services.polyak import (
    PolyakBasis,
    PolyakMode,
    Stacking,
    UnsupportedEliminationError,
    default_mode,
    dim_polyak,
    dim_V_quotient,
    eliminate_negative_arrows,
    equating_terms,
    expand_negative_arrows,
    generate_equating_rows,
    generate_move_relations,
    local_terms,
    move_templates,
    polyak_manifest,
    polyak_matrix,
    polyak_rows,
    stack,
)
from vdims.services.weight_relations import CaseSpec, R1Mode, R23Mode, all_cases, generate_XII

LONG = SkeletonKind.LONG
DESCENDING = SkeletonKind.DESCENDING
PRIMES = [1000000007, 998244353]

STANDARD_LONG = CaseSpec(LONG, R23Mode.STANDARD, R1Mode.MOD_R1)


def one_arrow(sign: int) -> LocalSide:
    return LocalSide((sign,), (((0, TAIL),), ((0, HEAD),)))


# === move table ===


def test_move_table_sizes():
    sizes = {move: len(templates) for move, templates in MOVE_TABLE.items()}
    assert sizes == {
        MoveId.R1_POS: 2,
        MoveId.R1_NEG: 2,
        MoveId.R2B: 2,
        MoveId.R2C: 2,
        MoveId.R3B: 6,
        MoveId.R3C: 2,
    }


def test_r3_sides_have_three_arrows_on_three_sites():
    for template in MOVE_TABLE[MoveId.R3B] + MOVE_TABLE[MoveId.R3C]:
        assert template.n_sites == 3
        for side in (template.left, template.right):
            assert side.degree == 3
            assert sorted(len(site) for site in side.sites) == [2, 2, 2]
        assert template.left.signs == template.right.signs
        assert template.left != template.right


def test_r3c_arrows_are_positive_on_cyclic_triangle():
    # all three lines oriented counter-clockwise
    for template in MOVE_TABLE[MoveId.R3C]:
        assert template.variant.startswith("o=+++")


def test_r3_singletons_cancel():
    for template in MOVE_TABLE[MoveId.R3B] + MOVE_TABLE[MoveId.R3C]:
        assert local_terms(template, 1, None) == ()


def naive_subset_expansion(template, budget: int) -> dict:
    """Left subsets minus right subsets, arrows renamed by first appearance along the sites."""
    acc: Counter = Counter()
    for coef, side in ((1, template.left), (-1, template.right)):
        for size in range(1, min(budget, len(side.signs)) + 1):
            for chosen in itertools.combinations(range(len(side.signs)), size):
                names: dict[int, int] = {}
                sites = tuple(
                    tuple((names.setdefault(arrow, len(names)), end) for arrow, end in site if arrow in chosen)
                    for site in side.sites
                )
                signs = tuple(side.signs[arrow] for arrow in sorted(names, key=names.get))
                acc[(signs, sites)] += coef
    return {term: coef for term, coef in acc.items() if coef}


@pytest.mark.parametrize("budget", [1, 2, 3])
def test_r3_subset_expansion_matches_naive_oracle(budget):
    for template in MOVE_TABLE[MoveId.R3B] + MOVE_TABLE[MoveId.R3C]:
        got = {(side.signs, side.sites): coef for coef, side in local_terms(template, budget, None)}
        assert got == naive_subset_expansion(template, budget), template.label
        assert all(len(signs) >= 2 for signs, _ in got)


def test_local_terms_truncate_consistently():
    for template in MOVE_TABLE[MoveId.R3B] + MOVE_TABLE[MoveId.R2C]:
        for stacking in (None, Stacking.PARALLEL, Stacking.TWISTED):
            full = set(local_terms(template, 4, stacking))
            for budget in (1, 2, 3):
                assert set(local_terms(template, budget, stacking)) == {t for t in full if t[1].degree <= budget}


def test_case_templates():
    assert len(move_templates(STANDARD_LONG)) == 16
    assert len(move_templates(CaseSpec(LONG, R23Mode.BRAID_LIKE, R1Mode.NO_R1))) == 8
    assert len(move_templates(CaseSpec(LONG, R23Mode.R2_ONLY, R1Mode.NO_R1))) == 4
    assert all(default_mode(c) is PolyakMode.POSITIVE_ONLY for c in all_cases())


# === negative arrow elimination ===


def test_elimination_choice():
    standard = eliminate_negative_arrows(STANDARD_LONG)
    assert (standard.stacking, standard.eliminator, standard.equate) == (Stacking.PARALLEL, MoveId.R2B, MoveId.R2C)
    braid = eliminate_negative_arrows(CaseSpec(LONG, R23Mode.BRAID_LIKE, R1Mode.MOD_R1))
    assert braid.equate is None


def test_elimination_without_r2(monkeypatch):
    monkeypatch.setattr(polyak, "move_templates", lambda case: list(MOVE_TABLE[MoveId.R3B]))
    with pytest.raises(UnsupportedEliminationError):
        eliminate_negative_arrows(STANDARD_LONG)


@pytest.mark.parametrize("stacking", list(Stacking))
def test_negative_arrow_expansion(stacking):
    terms = expand_negative_arrows(one_arrow(-1), 3, stacking)
    assert [coef for coef, _ in terms] == [-1, 1, -1]
    assert [side for _, side in terms] == [stack(k, stacking) for k in (1, 2, 3)]
    assert all(side.positive for _, side in terms)


def test_expansion_respects_budget():
    mixed = LocalSide((1, -1), (((0, TAIL), (1, TAIL)), ((0, HEAD), (1, HEAD))))
    assert expand_negative_arrows(mixed, 1, Stacking.PARALLEL) == ()
    assert len(expand_negative_arrows(mixed, 3, Stacking.PARALLEL)) == 2
    assert expand_negative_arrows(one_arrow(1), 1, Stacking.TWISTED) == ((1, one_arrow(1)),)


def test_stacks():
    assert stack(2, Stacking.PARALLEL).sites[1] == ((0, HEAD), (1, HEAD))
    assert stack(2, Stacking.TWISTED).sites[1] == ((1, HEAD), (0, HEAD))
    assert stack(1, Stacking.PARALLEL) == stack(1, Stacking.TWISTED)


def test_equating_terms_start_at_two():
    assert equating_terms(1) == ()
    assert len(equating_terms(3)) == 4


# === relation rows ===


def test_r2_signed_rows():
    case = CaseSpec(LONG, R23Mode.BRAID_LIKE, R1Mode.NO_R1)
    template = MOVE_TABLE[MoveId.R2B][0]
    assert template.variant == "a+b-"

    low_basis = PolyakBasis.build(LONG, 1, PolyakMode.SIGNED)
    low = generate_move_relations(template, case, 1, low_basis)
    assert len(low) == 2
    assert all(len(row) == 2 and row.top_degree == 1 for row in low)
    col = lambda text: low_basis.index.index_of(parse_diagram(text, LONG))
    assert {(col("1: T1+ H1+"), 1), (col("1: T1- H1-"), 1)} in [set(row.terms) for row in low]

    basis = PolyakBasis.build(LONG, 2, PolyakMode.SIGNED)
    rows = [set(row.terms) for row in generate_move_relations(template, case, 2, basis)]
    col = lambda text: basis.index.index_of(parse_diagram(text, LONG))
    # ab + a + b, with site 0 before or after site 1 on the bare line
    assert {(col("2: T1+ T2- H1+ H2-"), 1), (col("1: T1+ H1+"), 1), (col("1: T1- H1-"), 1)} in rows
    assert {(col("2: H1+ H2- T1+ T2-"), 1), (col("1: H1+ T1+"), 1), (col("1: H1- T1-"), 1)} in rows


def test_eliminator_rows_vanish_in_positive_mode():
    basis = PolyakBasis.build(LONG, 2, PolyakMode.POSITIVE_ONLY)
    for template in MOVE_TABLE[MoveId.R2B] + MOVE_TABLE[MoveId.R2C]:
        assert generate_move_relations(template, STANDARD_LONG, 2, basis) == []


def test_r1_rows_degree_one():
    basis = PolyakBasis.build(LONG, 1, PolyakMode.POSITIVE_ONLY)
    for template in MOVE_TABLE[MoveId.R1_POS]:
        (row,) = generate_move_relations(template, STANDARD_LONG, 1, basis)
        assert len(row) == 1


def test_descending_skips_head_first_loops():
    case = CaseSpec(DESCENDING, R23Mode.STANDARD, R1Mode.MOD_R1)
    basis = PolyakBasis.build(DESCENDING, 1, PolyakMode.POSITIVE_ONLY)
    by_variant = {t.variant: generate_move_relations(t, case, 1, basis) for t in MOVE_TABLE[MoveId.R1_POS]}
    assert by_variant["head-first"] == []
    assert len(by_variant["tail-first"]) == 1


def test_equating_rows_match_xii_in_degree_two():
    basis = PolyakBasis.build(LONG, 2, PolyakMode.POSITIVE_ONLY)
    equating = generate_equating_rows(STANDARD_LONG, 2, basis)
    got = {
        frozenset((format_diagram(basis.index.diagram(col)), coef) for col, coef in row)
        for row in equating
    }
    index = DiagramIndex.for_degree(LONG, 2)
    xii = {
        frozenset((format_diagram(index.diagram(col)), -coef) for col, coef in row)
        for row in generate_XII(LONG, 2, index)
    }
    assert got == xii


def test_no_equating_rows_without_r2c():
    case = CaseSpec(LONG, R23Mode.BRAID_LIKE, R1Mode.MOD_R1)
    basis = PolyakBasis.build(LONG, 3, PolyakMode.POSITIVE_ONLY)
    assert generate_equating_rows(case, 3, basis) == []


def keyed(row, basis: PolyakBasis) -> frozenset:
    return frozenset((basis.index.diagram(col).key, coef) for col, coef in row)


@pytest.mark.parametrize("mode", list(PolyakMode))
def test_rows_are_projections_of_untruncated_rows(mode):
    low_basis = PolyakBasis.build(LONG, 2, mode)
    high_basis = PolyakBasis.build(LONG, 3, mode)
    low_groups = polyak_rows(STANDARD_LONG, 2, low_basis)
    high_groups = polyak_rows(STANDARD_LONG, 3, high_basis)
    assert low_groups.keys() == high_groups.keys()
    for label, high_rows in high_groups.items():
        projected = []
        for row in high_rows:
            kept = frozenset((key, coef) for key, coef in keyed(row, high_basis) if len(key[0]) <= 4)
            if kept:
                projected.append(kept)
        low = [keyed(row, low_basis) for row in low_groups[label]]
        assert sorted(low, key=sorted) == sorted(projected, key=sorted), label


# === dimensions ===


def test_degree_zero():
    for case in all_cases():
        assert dim_polyak(case, 0, PRIMES) == 1


def test_long_standard_second_quotient():
    assert dim_V_quotient(STANDARD_LONG, 2, PRIMES) == 2


def test_quotient_needs_positive_degree():
    with pytest.raises(ValueError):
        dim_V_quotient(STANDARD_LONG, 0, PRIMES)


def test_filtration_is_monotone():
    case = CaseSpec(LONG, R23Mode.R2_ONLY, R1Mode.NO_R1)
    dims = [dim_polyak(case, n, PRIMES) for n in range(4)]
    assert dims == sorted(dims)


@pytest.mark.parametrize("case", all_cases(), ids=lambda c: c.label)
def test_signed_and_positive_modes_agree(case):
    for n in range(3):
        assert dim_polyak(case, n, PRIMES, PolyakMode.SIGNED) == dim_polyak(case, n, PRIMES, PolyakMode.POSITIVE_ONLY)


@pytest.mark.slow
@pytest.mark.parametrize("case", all_cases(), ids=lambda c: c.label)
def test_signed_and_positive_modes_agree_degree_three(case):
    assert dim_polyak(case, 3, PRIMES, PolyakMode.SIGNED) == dim_polyak(case, 3, PRIMES, PolyakMode.POSITIVE_ONLY)


@pytest.mark.parametrize("case", all_cases(), ids=lambda c: c.label)
def test_quotients_match_table_up_to_degree_three(case):
    for n in range(1, 4):
        assert dim_V_quotient(case, n, PRIMES) == GOLDEN.expected(case, n), f"{case.label} n={n}"


def test_manifest():
    text = polyak_manifest(STANDARD_LONG, 2)
    lines = text.splitlines()
    assert lines[0] == "case long/standard/mod"
    assert "basis degree 0 1" in lines
    assert "basis degree 2 12" in lines
    assert "basis total 15" in lines
    assert any(line.startswith("rows R3b[") for line in lines)
    assert any(line.startswith("rows R2c[equate]") for line in lines)
    assert lines[-1].startswith("rows total ")


def test_small_polyak_matrices_match_rational_oracle():
    for case in all_cases():
        for n in range(3):
            m = polyak_matrix(case, n)
            if m.n_rows <= 50:
                assert rank_consensus(m, PRIMES).rank == rank_rational(m)
