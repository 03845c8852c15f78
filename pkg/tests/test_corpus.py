import pytest

from qpalg.library import NAMED_STATES, check_entry, corpus, entry, named_state
from qpalg.syntax import parse_program, print_program, validate
from qpalg.syntax import terms as T

ENTRIES = corpus()
REQUIRED = {
    "build_epr",
    "check_epr1",
    "check_epr2",
    "teleport",
    "channel_eve_all",
    "channel_eve_some",
    "random",
    "bb84_one_round",
}


def test_required_entries_present():
    assert REQUIRED <= {e.name for e in ENTRIES}


@pytest.mark.parametrize("e", ENTRIES, ids=lambda e: e.name)
def test_entry_meets_expectations(e):
    report = check_entry(e)
    assert report.status_ok, e.status
    for c in report.checks:
        assert c.ok, f"{c.kind}: {c.detail}"


@pytest.mark.parametrize("e", ENTRIES, ids=lambda e: e.name)
def test_entry_validates_and_round_trips(e):
    prog = e.program()
    assert validate(prog) == []
    text = print_program(prog)
    assert parse_program(text) == prog
    assert print_program(parse_program(text)) == text


def test_protocol_restricts_exactly_the_channel_gates():
    prog = entry("channel_eve_all").program()
    body = prog.defs["Protocol"].body
    assert isinstance(body, T.Restrict)
    assert set(body.gates) == {"fill", "empty", "fillFlaw", "emptyFlaw"}


def test_teleport_variants_cover_required_states():
    states = {e.name: c["state"] for e in ENTRIES for c in e.expect if c["kind"] == "state" and e.name.startswith("teleport")}
    assert set(states.values()) == {"zero", "one", "plus", "minus"}


def test_named_states_are_density_matrices():
    for name in NAMED_STATES:
        rho = named_state(name)
        rho.check()
        assert abs(rho.trace - 1) < 1e-12


def test_unknown_entry():
    with pytest.raises(KeyError):
        entry("no_such_program")
