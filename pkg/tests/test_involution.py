import pytest

from webgeom.base.errors import UnknownScenarioError
from webgeom.involution import (
    CHARACTER_SCENARIOS,
    N_PFAFFIAN_UNKNOWNS,
    N_UNKNOWNS,
    SCENARIOS,
    Scenario,
    build_relations,
    character_table,
    character_tables,
    column,
    n_free,
    parse_member,
    partition,
    q_count,
)


def test_unknown_layout():
    assert N_UNKNOWNS == 96
    assert N_PFAFFIAN_UNKNOWNS == 32
    assert column("pbar", (0, 0, 0)) == 0
    assert column("ptil", (0, 0, 0)) == 8
    assert column("bbar", (0, 0, 0, 0, 0)) == 32
    assert column("btil", (1, 1, 1, 1, 1)) == 95


def test_parse_member():
    assert parse_member("b1222") == ("b", (0, 1, 1, 1))
    assert parse_member("p21") == ("p", (1, 0))
    with pytest.raises(ValueError):
        parse_member("b122")


def test_relation_matrix_shape():
    matrix = build_relations(Scenario.THM3)
    assert matrix.shape[1] == N_UNKNOWNS


def test_unconstrained_count():
    assert n_free(Scenario.NONE) == 40
    assert partition(Scenario.NONE) == (20, 20)
    assert SCENARIOS[Scenario.NONE].stated_partition == (6, 20)


@pytest.mark.parametrize("scenario, q, s, Q, N, involutive", [
    (Scenario.THM3, 13, (2, 6, 5), 29, 29, True),
    (Scenario.THM7, 12, (2, 6, 4), 26, 25, False),
    (Scenario.THM8, 8, (1, 4, 3), 18, 18, True),
    (Scenario.S22, 9, (1, 4, 4), 21, 22, False),
])
def test_character_table(scenario, q, s, Q, N, involutive):
    table = character_table(scenario)
    assert table.q == q
    assert (table.s1, table.s2, table.s3) == s
    assert table.Q == Q
    assert table.N == N
    assert table.N_pfaffian + table.N_curvature == N
    assert table.involutive is involutive
    assert q_count(scenario) == q


@pytest.mark.parametrize("scenario, split", [
    (Scenario.THM3, (13, 16)),
    (Scenario.THM7, (13, 12)),
    (Scenario.THM8, (10, 8)),
])
def test_partition(scenario, split):
    assert partition(scenario) == split


def test_theorem_three_matches_printed_counts():
    table = character_table(Scenario.THM3)
    assert table.stated_N == 29
    assert table.stated_partition == [13, 16]
    assert not any("differs" in note for note in table.notes)


def test_theorem_seven_discrepancy_is_noted():
    table = character_table(Scenario.THM7)
    assert table.stated_N == 26
    assert any("differs from the printed 26 (14 + 12)" in note for note in table.notes)
    assert table.hard


def test_s22_is_soft():
    table = character_table(Scenario.S22)
    assert not table.hard
    assert table.s3 == SCENARIOS[Scenario.S22].expected_s3


def test_tables_in_fixed_order():
    assert [t.scenario for t in character_tables()] == [s.value for s in CHARACTER_SCENARIOS]


def test_unknown_scenario():
    with pytest.raises(UnknownScenarioError) as info:
        Scenario.parse("bogus")
    assert info.value.exit_code == 64
    assert Scenario.parse(" THM3 ") is Scenario.THM3


def test_unconstrained_has_no_character_table():
    with pytest.raises(UnknownScenarioError):
        character_table(Scenario.NONE)
