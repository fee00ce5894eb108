import pytest

from gcgeom import catalog, structfile
from gcgeom.suite import run_command


def test_names_are_stable():
    assert catalog.names() == [
        "contact-r3", "sasakian-heisenberg", "kahler-r2",
        "cokahler-r3", "sasakian-times-rplus", "sasakian-cone",
    ]


def test_unknown_entry():
    with pytest.raises(KeyError, match="nope"):
        catalog.load("nope")


@pytest.mark.parametrize("name", catalog.names())
def test_expected_verdicts_in_memory(name, entries):
    entry = entries[name]
    assert entry.expected and "validate" in entry.expected
    for cmd, want in entry.expected.items():
        assert entry.run(cmd).passed == want, cmd


@pytest.mark.parametrize("name", catalog.names())
def test_twin_reproduces_verdicts(name, entries, plan):
    text = catalog.read_twin(name)
    assert text.lstrip().startswith("#")
    ws = structfile.loads(text, f"{name}.gg", plan)
    entry = entries[name]
    for cmd, want in entry.expected.items():
        res = run_command(ws, cmd, None)
        assert res.passed == want, (cmd, [c.name for c in res.checks if not c.passed])
        # the twin records the same verdict in its check section
        assert ws.checks[cmd].get("verdict", want) == want


def test_twin_path_points_at_packaged_file(entries):
    entry = entries["contact-r3"]
    assert entry.twin_path().read_text(encoding="utf-8") == catalog.read_twin("contact-r3")


def test_cone_entry_keeps_its_note(entries):
    e = entries["sasakian-cone"]
    assert e.note and e.workspace.provenance == e.note
