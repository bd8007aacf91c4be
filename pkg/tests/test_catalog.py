import json
import re

import pytest

from retfront.catalog import (
    CatalogError,
    NormalFormLabel,
    all_entries,
    delete_coupling_term,
    delete_slot_term,
    export_json,
    get_entry,
    instantiate,
    list_entries,
    minimal_instance,
    validate_entry,
    validate_family,
)
from retfront.jetalgebra import is_PR_versal, is_tPK_infinitesimally_stable

from expected_templates import TEMPLATES

FLAGGED = {"2D6", "2B3", "2B4", "2C3"}


def squash(s):
    return re.sub(r"\s+", "", s)


def test_counts():
    assert len(all_entries()) == 16
    assert len(list_entries(0)) == 10
    assert len(list_entries(1)) == 6


def test_templates_verbatim():
    got = {e.key: e.template_latex() for e in all_entries()}
    assert set(got) == set(TEMPLATES)
    for key, lines in TEMPLATES.items():
        assert [squash(s) for s in got[key]] == [squash(s) for s in lines], key


@pytest.mark.parametrize("text,key,sign", [
    ("2A2", "2A2", None), ("A2", "2A2", None), ("2C3-", "2C3", -1), ("²C₃⁻", "2C3", -1),
    ("2D4+", "2D4", 1), ("²A₁", "2A1", None),
])
def test_label_parse(text, key, sign):
    lab = NormalFormLabel.parse(text)
    assert lab.key == key and lab.sign == sign


def test_label_printing():
    assert NormalFormLabel("A", 1).pretty() == "²A₁"
    assert NormalFormLabel("C", 3, -1).pretty() == "²C₃⁻"
    assert str(NormalFormLabel("D", 4, 1)) == "2D4+"


def test_bad_labels():
    for bad in ["2G2", "2A7x", ""]:
        with pytest.raises(CatalogError):
            instantiate(bad)
    with pytest.raises(CatalogError):
        instantiate("2A2", 9)
    with pytest.raises(CatalogError):
        instantiate("2D4")          # sign required
    with pytest.raises(CatalogError):
        instantiate("2A2+")         # sign rejected


def test_admissible_ranges():
    assert get_entry("2A1").admissible() == [1, 2, 3, 4, 5, 6]
    assert get_entry("2A5").admissible() == [5, 6]
    assert get_entry("2A6").admissible() == [6]
    assert get_entry("2B2").admissible() == [2, 3, 4]
    assert get_entry("2F4").admissible() == [4]


def test_instantiate_shapes():
    F = instantiate("2A2", 3, (1,))
    assert F.latex == "y^3+(t_1+t_2u_2+u_2^3+u_3^2)y+u_1"
    assert F.space.n == 3 and F.space.m == 2
    assert F.constant_slot() == "u1"
    assert F.tail_variables() == ["u3"]
    A1 = instantiate("2A1", 1)
    assert A1.latex == "y^2+(t_1+t_2u_1+u_1^3)"


def test_slot_variables_occur_linearly():
    for e in all_entries():
        F = minimal_instance(e)
        for i in range(1, e.j):
            assert F.poly.linear_occurrence(f"u{i}") is not None


def test_export_json():
    doc = json.loads(export_json())
    assert doc["schema"] == "retfront.catalog/1"
    assert len(doc["entries"]) == 16


def _signs(e):
    return [1, -1] if e.signed else [1]


@pytest.mark.parametrize("entry", all_entries(), ids=lambda e: e.key)
def test_minimal_instances_stable(entry):
    pattern = entry.key in FLAGGED
    for s in _signs(entry):
        F = minimal_instance(entry, s, pattern=pattern)
        assert is_tPK_infinitesimally_stable(F).verdict
        assert is_PR_versal(F.a).verdict
        assert not is_tPK_infinitesimally_stable(delete_slot_term(F)).verdict
        assert not is_tPK_infinitesimally_stable(delete_coupling_term(F)).verdict


@pytest.mark.parametrize("key,witness", [("2D6+", ("y1^2", "y2^4")), ("2B3", ("x1^2",)),
                                         ("2B4", ("x1^3",))])
def test_printed_anomalies_fail(key, witness):
    rep = is_tPK_infinitesimally_stable(instantiate(key))
    assert not rep.verdict
    assert set(witness) <= set(rep.witness)


def test_printed_C3_coupling_redundant():
    # u3^2 inside a makes the t2 coupling removable in the printed form
    F = instantiate("2C3+", 3)
    assert is_tPK_infinitesimally_stable(delete_coupling_term(F)).verdict
    G = instantiate("2C3+", 3, pattern=True)
    assert not is_tPK_infinitesimally_stable(delete_coupling_term(G)).verdict


@pytest.mark.slow
@pytest.mark.parametrize("entry", all_entries(), ids=lambda e: e.key)
def test_maximal_instances_stable(entry):
    l = max(entry.admissible())
    signs = (1, -1, 1, -1, 1)[: l - entry.j]
    rep = validate_entry(entry, l, signs, 1, pattern=entry.key in FLAGGED)
    assert rep.verdict, rep


def test_validate_family_reports_both_parts():
    rep = validate_family(instantiate("2B3"))
    assert not rep.verdict
    assert any(w.startswith("certificate:") for w in rep.witness)
