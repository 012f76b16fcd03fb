import threading

import pytest

from aflux.errors import TransportError, UsageError
from aflux.transport import CacheStats, Response, Transport
from aflux.urls import entry_url, search_url


class FakeNet:
    """Scripted GET: a list of outcomes consumed per call (exception or Response)."""

    def __init__(self, *outcomes):
        self.outcomes = list(outcomes)
        self.calls = []

    def __call__(self, url, timeout):
        self.calls.append(url)
        outcome = self.outcomes.pop(0) if len(self.outcomes) > 1 else self.outcomes[0]
        if isinstance(outcome, BaseException):
            raise outcome
        return outcome


def ok(body=b"{}"):
    return Response(200, body, {"Content-Type": "application/json"})


def test_fresh_stats():
    assert Transport().stats() == CacheStats(0, 0, 0)


def test_repeat_fetch_hits(root, transport):
    url = search_url(root, "Egap,$paging(1,5)")
    first = transport.fetch(url)
    second = transport.fetch(url)
    assert first.status == 200
    assert second.body == first.body
    s = transport.stats()
    assert (s.hits, s.misses) == (1, 1)
    assert s.stored_bytes == len(first.body)


def test_not_found_is_never_cached(root, transport):
    url = entry_url(root, "aflowlib.duke.edu:AFLOWDATA/nope/none", "Egap")
    assert transport.fetch(url).status == 404
    assert transport.fetch(url).status == 404
    assert transport.stats() == CacheStats(0, 2, 0)


def test_k_distinct_then_repeated(root, transport):
    urls = [search_url(root, f"Egap,$paging({i},10)") for i in range(1, 6)]
    for u in urls + urls:
        transport.fetch(u)
    s = transport.stats()
    assert (s.hits, s.misses) == (5, 5)


def test_header_lookup_case_insensitive():
    r = Response(200, b"", {"X-AFLUX-Matches": "3"})
    assert r.header("x-aflux-matches") == "3"
    assert r.header("missing", "d") == "d"


def test_retries_connection_errors():
    net = FakeNet(ConnectionRefusedError(), TimeoutError(), ok(b"x"))
    t = Transport(retries=2, backoff=0, get=net)
    assert t.fetch("http://h/a").body == b"x"
    assert len(net.calls) == 3
    assert t.stats().misses == 1


def test_gives_up_with_attempt_count():
    net = FakeNet(ConnectionResetError("reset"))
    t = Transport(retries=2, backoff=0, get=net)
    with pytest.raises(TransportError) as info:
        t.fetch("http://h/a")
    assert info.value.attempts == 3
    assert info.value.url == "http://h/a"


def test_http_errors_not_retried():
    net = FakeNet(Response(500, b"boom"))
    t = Transport(retries=5, backoff=0, get=net)
    assert t.fetch("http://h/a").status == 500
    assert len(net.calls) == 1


@pytest.mark.parametrize("url", ["", "not a url", "ftp://h/x", "http:///path", "/relative?x"])
def test_invalid_url(url):
    with pytest.raises(UsageError):
        Transport(get=FakeNet(ok())).fetch(url)


def test_env_overrides(monkeypatch):
    monkeypatch.setenv("AFLUX_TIMEOUT_MS", "250")
    monkeypatch.setenv("AFLUX_RETRIES", "0")
    t = Transport()
    assert t.timeout == 0.25 and t.retries == 0
    monkeypatch.setenv("AFLUX_RETRIES", "many")
    with pytest.raises(UsageError):
        Transport()


def test_defaults(monkeypatch):
    monkeypatch.delenv("AFLUX_TIMEOUT_MS", raising=False)
    monkeypatch.delenv("AFLUX_RETRIES", raising=False)
    t = Transport()
    assert (t.timeout, t.retries, t.backoff) == (10.0, 2, 0.1)


def test_connection_refused_real_socket():
    t = Transport(retries=1, backoff=0, timeout=1)
    with pytest.raises(TransportError) as info:
        t.fetch("http://127.0.0.1:9/x")
    assert info.value.attempts == 2


def test_clear_resets():
    t = Transport(get=FakeNet(ok()))
    t.fetch("http://h/a")
    t.clear()
    assert t.stats() == CacheStats()


def test_concurrent_misses_store_one_body():
    barrier = threading.Barrier(8)

    def slow(url, timeout):
        barrier.wait()
        return ok(b"body")

    t = Transport(get=slow)
    results = []
    threads = [threading.Thread(target=lambda: results.append(t.fetch("http://h/a"))) for _ in range(8)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert {r.body for r in results} == {b"body"}
    s = t.stats()
    assert s.hits + s.misses == 8
    assert s.stored_bytes == 4
