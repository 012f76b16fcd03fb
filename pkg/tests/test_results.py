import math

import numpy as np
import pytest

from aflux import K, search
from aflux.errors import (MissingPropertyError, ProtocolError, UnknownKeywordError, UsageError,
                          ValidationError)
from aflux.expr import And
from aflux.results import Entry
from aflux.transport import Response, Transport

import oracle

AGL = "agl_thermal_conductivity_300K"
DESIGNATED = "aflow:4848bcdffabfaa4b"
DESIGNATED_POSITIONS = [[0, 0, 0], [1.5691, 1.5691, 1.5691], [4.7073, 4.7073, 4.7073]]


def bandgap_query(root, transport, batch=20):
    return (search(root, batch, transport=transport)
            .select(K.agl_thermal_conductivity_300K)
            .filter(K.Egap > 6)
            .orderby(K.agl_thermal_conductivity_300K, True))


def test_search_page_size(root):
    assert search(root, 20).page_size == 20
    assert search(root, 1).page_size == 1
    assert search(root, batch_size=7).page_size == 7
    with pytest.raises(UsageError):
        search(root, 0)


def test_default_root(monkeypatch):
    monkeypatch.setenv("AFLUX_ROOT", "http://example.invalid/API/")
    assert search().root == "http://example.invalid/API/"


def test_refinement_is_immutable(root):
    q = search(root)
    q2 = q.select("Egap")
    assert q.selects == () and q2.selects == ("Egap",)


def test_refine_rules(root):
    q = search(root).filter(K.Egap > 1).filter(K.natoms < 4)
    assert q.filter_expr == And(K.Egap > 1, K.natoms < 4)
    assert search(root).select("Egap").select(K.Egap, "natoms").selects == ("Egap", "natoms")
    assert search(root).orderby("Egap").orderby("natoms", True).order == ("natoms", True)


def test_refine_errors_before_network(root):
    t = Transport(get=lambda url, timeout: pytest.fail("network touched"))
    q = search(root, transport=t)
    with pytest.raises(UnknownKeywordError):
        q.select("Egapp")
    with pytest.raises(ValidationError):
        q.filter(K.author > 3)
    with pytest.raises(UsageError):
        q.execute()


def test_bandgap_url(root, transport):
    q = bandgap_query(root, transport)
    assert q.url() == root + "?agl_thermal_conductivity_300K,Egap(6*),$paging(-1,20)"


def test_bandgap_results(root, transport, oracle_records):
    r = bandgap_query(root, transport).execute()
    expected = sorted((rec for rec in oracle_records if rec["values"]["Egap"][0] > 6),
                      key=lambda rec: -rec["values"][AGL][0])
    assert len(r) == len(expected) == 95
    assert [e.auid for e in r] == [rec["auid"] for rec in expected]


def test_index_55_paging_and_positions(root, transport):
    r = bandgap_query(root, transport).execute()
    before = transport.stats().misses
    entry = r[55]
    assert r.pages_loaded == [1, 3]
    assert transport.stats().misses == before + 1
    assert entry.auid == DESIGNATED
    assert entry.positions_cartesian.tolist() == DESIGNATED_POSITIONS
    # re-access hits the result set without any transport call
    calls = transport.stats()
    assert r[55] is entry
    assert transport.stats() == calls


def test_lazy_fetch_once(root, transport):
    r = bandgap_query(root, transport).execute()
    entry = r[0]
    assert "positions_cartesian" not in entry.raw
    before = transport.stats()
    entry.value("positions_cartesian")
    entry.value("positions_cartesian")
    entry.positions_cartesian
    after = transport.stats()
    assert after.misses - before.misses == 1
    assert after.hits == before.hits


def test_selected_value_no_fetch(root, transport):
    r = bandgap_query(root, transport).execute()
    before = transport.stats()
    assert r[3].value(AGL).value > 0
    assert transport.stats() == before


def test_missing_property(root, transport):
    r = search(root, transport=transport).filter(~(K.author % "")).execute()
    assert len(r) > 0
    with pytest.raises(MissingPropertyError):
        r[0].value("author")
    assert not r[0].has("author")
    with pytest.raises(AttributeError):
        r[0].nonesuch


def test_empty_result(root, transport):
    r = search(root, transport=transport).filter(K.Egap > 1000).execute()
    assert len(r) == 0
    assert list(r) == []
    with pytest.raises(IndexError, match="0 results"):
        r[0]


def test_negative_index(root, transport):
    r = bandgap_query(root, transport, 7).execute()
    assert r[-1] is r.at(len(r) - 1)
    assert r[-len(r)] is r[0]
    with pytest.raises(IndexError):
        r[len(r)]
    with pytest.raises(IndexError):
        r[-len(r) - 1]


def test_slice(root, transport):
    r = bandgap_query(root, transport).execute()
    part = r[21:25]
    assert len(part) == 4
    assert [e.auid for e in part] == [r.at(i).auid for i in range(21, 25)]
    assert r.slice(21, 25) == part
    for a, b in [(0, 0), (3, 50), (90, 95)]:
        s = r.slice(a, b)
        assert all(s[i] is r.at(a + i) for i in range(b - a))
    with pytest.raises(IndexError):
        r.slice(5, 4)
    with pytest.raises(IndexError):
        r.slice(0, 96)


def test_slice_touches_covered_pages_only(root, transport):
    r = bandgap_query(root, transport).execute()
    r.slice(41, 45)
    assert r.pages_loaded == [1, 3]


@pytest.mark.parametrize("k", [1, 7, 20, 64])
def test_fetch_accounting(root, k):
    t = Transport(retries=0)
    r = bandgap_query(root, t, k).execute()
    auids = [e.auid for e in r]
    assert len(auids) == 95
    assert t.stats().misses == math.ceil(95 / k)


def test_paging_invariance(root):
    runs = [[e.auid for e in bandgap_query(root, Transport(), k)] for k in (1, 7, 20, 64)]
    assert all(run == runs[0] for run in runs)


def test_descending_reverses_ascending(root, transport):
    base = search(root, 13, transport=transport).select(AGL).filter(K.natoms < 4)
    up = [e.auid for e in base.orderby(AGL)]
    down = [e.auid for e in base.orderby(AGL, True)]
    assert up == down[::-1]


def test_absent_values_sort_last(root, transport, oracle_records):
    r = search(root, 50, transport=transport).select("author").filter(K.Egap < 1).execute()
    authors = [e.raw.get("author") for e in r]
    present = [a for a in authors if a is not None]
    assert authors[:len(present)] == present
    assert present == sorted(present)
    tail = [e.auid for e in r][len(present):]
    assert tail == sorted(tail)
    assert len(tail) > 0


def test_query_is_iterable(root, transport):
    q = bandgap_query(root, transport)
    assert len(q) == 95
    assert q[0].auid == next(iter(q)).auid


def test_oracle_sample(root, transport, oracle_records):
    gen = oracle.ExprGenerator(oracle_records, seed=21)
    for _ in range(25):
        e = gen.tree(3)
        got = {x.auid for x in search(root, 64, transport=transport).filter(e)}
        assert got == oracle.match_set(e, oracle_records)


def test_entry_structure(root, transport):
    entry = bandgap_query(root, transport)[55]
    s = entry.structure()
    assert s.species == ("Li", "Mg", "N")
    assert np.allclose(s.lattice_parameters(), (4.4381, 4.4381, 4.4381, 60, 60, 60), rtol=1e-12)
    assert entry.export("xyz").startswith("3\n")


def test_protocol_errors():
    def fake(url, timeout):
        return Response(200, b"[]", {"X-AFLUX-Matches": "0"})

    with pytest.raises(ProtocolError):
        search("http://h/API/", transport=Transport(get=fake)).select("Egap").execute()

    def missing_header(url, timeout):
        return Response(200, b"{}", {})

    with pytest.raises(ProtocolError):
        search("http://h/API/", transport=Transport(get=missing_header)).select("Egap").execute()

    def server_error(url, timeout):
        return Response(400, b"bad", {})

    with pytest.raises(ProtocolError, match="400"):
        search("http://h/API/", transport=Transport(get=server_error)).select("Egap").execute()


def test_record_without_auid(registry):
    with pytest.raises(ProtocolError):
        Entry.from_record({"aurl": "x"}, "http://h/", registry, Transport())
