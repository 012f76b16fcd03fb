import json

import pytest
from hypothesis import given, strategies as st

from aflux.errors import DuplicateKeywordError, SchemaParseError, UnknownKeywordError
from aflux.schema import (Keyword, KeywordRegistry, Kind, Status, bundled_schema_bytes, dump_schema,
                          edit_distance, load_schema, lookup, render_catalog)

REQUIRED = ["Egap", "agl_thermal_conductivity_300K", "author", "positions_cartesian", "kpoints",
            "geometry", "species", "compound", "natoms", "nspecies", "auid", "aurl"]


def descriptor(name, kind="scalar-number", units="", title="", description="", status="production"):
    return {"name": name, "kind": kind, "units": units, "title": title,
            "description": description, "status": status}


def doc(*descs):
    return json.dumps(list(descs)).encode()


def test_load_single_descriptor():
    reg = load_schema(doc(descriptor("Egap", units="eV")))
    assert lookup(reg, "Egap").units == "eV"
    assert reg["Egap"].kind is Kind.SCALAR_NUMBER
    assert reg.source == "embedded"


def test_empty_array_has_no_keywords():
    reg = load_schema(b"[]")
    assert len(reg) == 0
    with pytest.raises(UnknownKeywordError):
        reg.lookup("Egap")


def test_duplicate_names_rejected():
    with pytest.raises(DuplicateKeywordError) as info:
        load_schema(doc(descriptor("Egap"), descriptor("Egap", units="eV")))
    assert info.value.name == "Egap"


def test_document_order_preserved():
    reg = load_schema(doc(descriptor("b"), descriptor("a"), descriptor("c")))
    assert list(reg) == ["b", "a", "c"]


@pytest.mark.parametrize("text, marker", [
    ('[{"name": "a", "kind": "matrix", "units": "", "title": "", "description": "", '
     '"status": "production"} @]', "@"),
    ('[{"name": "a", "kind": "matrix", "units": "", "title": "", "description": "déjà", '
     '"status": "production"}, ?]', "?"),
    ('{"name": "a"}', "{"),
    ('[] trailing', "t"),
])
def test_malformed_document_reports_byte_offset(text, marker):
    data = text.encode("utf-8")
    with pytest.raises(SchemaParseError) as info:
        load_schema(data)
    assert info.value.offset == data.index(marker.encode())


def test_descriptor_errors_point_at_element():
    good = json.dumps(descriptor("a"))
    text = "[" + good + ", " + json.dumps({"name": "b", "kind": "tensor", "units": "", "title": "",
                                            "description": "", "status": "production"}) + "]"
    with pytest.raises(SchemaParseError, match="unknown kind") as info:
        load_schema(text.encode())
    assert info.value.offset == len("[" + good + ", ")


@pytest.mark.parametrize("bad", [
    {"name": "a", "kind": "scalar-number"},
    descriptor("1abc"),
    descriptor("a", status="retired"),
    dict(descriptor("a"), units=3),
])
def test_invalid_descriptors(bad):
    with pytest.raises(SchemaParseError):
        load_schema(doc(bad))


def test_bundled_schema_has_required_keywords(registry):
    for name in REQUIRED:
        assert name in registry
    assert registry["positions_cartesian"].kind is Kind.MATRIX
    assert registry["kpoints"].kind is Kind.KPOINTS
    assert len(registry) >= 100


def test_lookup_known_numeric(registry):
    assert registry.lookup("agl_thermal_conductivity_300K").kind is Kind.SCALAR_NUMBER


def test_lookup_empty_name(registry):
    with pytest.raises(UnknownKeywordError):
        registry.lookup("")


# Suggestions frozen from a memoized recursive Levenshtein over the bundled
# schema: Egapp -> Egap (1), then Egap_fit, Egap_type (4, name order).
@pytest.mark.parametrize("typo, expected", [
    ("Egapp", ("Egap", "Egap_fit", "Egap_type")),
    ("natom", ("natoms", "PV_atom", "auid")),
])
def test_unknown_keyword_suggestions(registry, typo, expected):
    with pytest.raises(UnknownKeywordError) as info:
        registry.lookup(typo)
    assert info.value.suggestions == expected
    assert info.value.name == typo
    assert expected[0] in str(info.value)


@pytest.mark.parametrize("a, b, d", [("", "", 0), ("", "abc", 3), ("kitten", "sitting", 3),
                                     ("Egap", "Egapp", 1), ("flaw", "lawn", 2)])
def test_edit_distance(a, b, d):
    assert edit_distance(a, b) == d == edit_distance(b, a)


def test_registry_is_immutable(registry):
    with pytest.raises(AttributeError):
        registry.foo = 1
    with pytest.raises(TypeError):
        registry.entries["x"] = None


def test_catalog_single_keyword():
    reg = load_schema(doc(descriptor("Egap", units="eV", description="band gap")))
    text = render_catalog(reg)
    assert text.startswith("Egap\n")
    assert "eV" in text and "band gap" in text


def test_catalog_sorted():
    reg = load_schema(doc(descriptor("B"), descriptor("A")))
    text = render_catalog(reg)
    assert text.index("A\n") < text.index("B\n")


def test_catalog_shows_deprecated_status():
    reg = load_schema(doc(descriptor("old", status="deprecated")))
    assert "deprecated" in render_catalog(reg)


def test_bundled_catalog_line_count(registry):
    # 100 keywords render to 599 lines (frozen after building the schema file)
    lines = render_catalog(registry).splitlines()
    assert len(lines) == 599
    assert len(lines) >= len(registry)


def test_catalog_is_pure():
    data = bundled_schema_bytes()
    assert render_catalog(load_schema(data)) == render_catalog(load_schema(data))


def test_dump_roundtrip(registry):
    again = load_schema(dump_schema(registry))
    assert list(again.values()) == list(registry.values())


names = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,20}", fullmatch=True)
texts = st.text(max_size=40)
keywords = st.builds(Keyword, name=names, kind=st.sampled_from(list(Kind)), units=texts,
                     title=texts, description=texts, status=st.sampled_from(list(Status)))


@given(st.lists(keywords, max_size=12, unique_by=lambda k: k.name))
def test_load_lookup_roundtrip(kws):
    data = json.dumps([k.to_json() for k in kws], ensure_ascii=False).encode("utf-8")
    reg = load_schema(data)
    assert len(reg) == len(kws)
    for kw in kws:
        assert reg.lookup(kw.name) == kw


def test_registry_constructor_rejects_duplicates():
    with pytest.raises(DuplicateKeywordError):
        KeywordRegistry([Keyword("a", Kind.MATRIX), Keyword("a", Kind.MATRIX)])
