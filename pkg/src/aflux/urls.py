"""URL layout shared by the client and the simulator."""

from __future__ import annotations

from urllib.parse import quote, urljoin, urlsplit

from .matchbook import quote_summons


def aurl_path(aurl: str) -> str:
    """Server path of an entry: ``host:AFLOWDATA/x/y`` -> ``AFLOWDATA/x/y``."""
    head, sep, tail = aurl.partition(":")
    if sep and "/" not in head:
        return tail.lstrip("/")
    return aurl.lstrip("/")


def _base(root: str) -> str:
    parts = urlsplit(root)
    return f"{parts.scheme}://{parts.netloc}/"


def search_url(root: str, summons: str) -> str:
    return root + "?" + quote_summons(summons)


def schema_url(root: str) -> str:
    return urljoin(root if root.endswith("/") else root + "/", "schema")


def entry_url(root: str, aurl: str, keyword: str) -> str:
    """Per-property URL of an entry, resolved against the server of ``root``."""
    return _base(root) + quote(aurl_path(aurl), safe="/") + "?" + keyword
