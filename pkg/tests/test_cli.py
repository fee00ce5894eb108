import json
import textwrap

import pytest

from gcgeom import catalog
from gcgeom.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, main

HEADER = """\
[manifold r3]
coords = x y z
domain = -1 1, -1 1, -1 1

[define r3]
eta = form: -y, 0, 1
"""

CONTACT = HEADER + """\
xi = vector: 0, 0, {xi}

[structure c]
type = contact
eta = eta
xi = xi
"""


@pytest.fixture
def gg(tmp_path):
    def write(text, name="s.gg"):
        p = tmp_path / name
        p.write_text(textwrap.dedent(text), encoding="utf-8")
        return str(p)
    return write


@pytest.fixture
def twin(tmp_path):
    def write(name):
        p = tmp_path / f"{name}.gg"
        p.write_text(catalog.read_twin(name), encoding="utf-8")
        return str(p)
    return write


def test_validate_lists_five_axioms(twin, capsys):
    assert main(["validate", twin("contact-r3")]) == EXIT_PASS
    out = capsys.readouterr().out
    assert out.startswith("validate: PASS")
    assert sum("max_residual" in line for line in out.splitlines()[2:]) == 5


def test_classify_reports_flags(twin, capsys):
    assert main(["classify", twin("contact-r3"), "--json", "-"]) == EXIT_PASS
    doc = json.loads(capsys.readouterr().out)
    assert doc["verdict"] == "pass" and doc["command"] == "classify"
    text = json.dumps(doc)
    assert "contact" in text and "strong" in text


def test_theorem41_agreement_but_exit_one(twin, capsys):
    assert main(["theorem41", twin("sasakian-times-rplus"), "--json", "-"]) == EXIT_FAIL
    doc = json.loads(capsys.readouterr().out)
    assert doc["agreement"] is True
    assert doc["kahler"] == "fail" and doc["co_kahler"] == ["fail", "pass"]


def test_json_is_deterministic(twin, capsys):
    path = twin("sasakian-heisenberg")
    outs = []
    for _ in range(2):
        main(["validate", path, "--json", "-", "--seed", "7", "--points", "6"])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert (doc["seed"], doc["points"]) == (7, 6)


def test_json_to_file(twin, tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["validate", twin("kahler-r2"), "--json", str(out)]) == EXIT_PASS
    assert json.loads(out.read_text())["verdict"] == "pass"
    assert "validate: PASS" in capsys.readouterr().out


def test_parse_error_names_file_and_line(gg, capsys):
    path = gg(HEADER + "xi = vector: 0, 0, 1 +\n", "broken.gg")
    assert main(["validate", path]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert "broken.gg:7:" in err


def test_failed_precondition_is_a_check_failure(gg, capsys):
    # η(ξ) = 2, so the contact lift cannot be built
    path = gg(CONTACT.format(xi=2))
    assert main(["validate", path, "--json", "-"]) == EXIT_FAIL
    doc = json.loads(capsys.readouterr().out)
    assert doc["verdict"] == "fail" and doc["checks"][0]["name"] == "build c"


def test_derived_bracket_needs_closed_form(gg, capsys):
    path = gg(CONTACT.format(xi=1))
    assert main(["classify", path, "--bracket", "derived:eta"]) == EXIT_USAGE
    assert "closed" in capsys.readouterr().err
    assert main(["classify", path, "--bracket", "nonsense"]) == EXIT_USAGE


def test_missing_check_section(gg, capsys):
    assert main(["theorem1", gg(CONTACT.format(xi=1))]) == EXIT_USAGE
    assert "theorem1" in capsys.readouterr().err


def test_usage_errors(capsys):
    assert main([]) == EXIT_USAGE
    assert main(["frobnicate", "x.gg"]) == EXIT_USAGE
    assert main(["validate", "/no/such/file.gg"]) == EXIT_USAGE
    capsys.readouterr()


def test_catalog_list_and_run(capsys):
    assert main(["catalog", "--list"]) == EXIT_PASS
    assert capsys.readouterr().out.split() == catalog.names()
    assert main(["catalog"]) == EXIT_USAGE
    assert main(["catalog", "nope"]) == EXIT_USAGE
    capsys.readouterr()
    assert main(["catalog", "kahler-r2", "--json", "-"]) == EXIT_PASS
    doc = json.loads(capsys.readouterr().out)
    assert doc["entry"] == "kahler-r2" and all(doc["as_expected"].values())


def test_catalog_with_expected_failures_exits_one(capsys):
    assert main(["catalog", "sasakian-times-rplus", "--json", "-"]) == EXIT_FAIL
    doc = json.loads(capsys.readouterr().out)
    assert all(doc["as_expected"].values())
    assert doc["expected"]["theorem41"] == "fail"
