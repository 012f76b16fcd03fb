"""HTTP GET with a per-session read-through cache and connection retries."""

from __future__ import annotations

import logging
import os
import socket
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Callable, Mapping
from urllib.parse import urlsplit

from .errors import TransportError, UsageError

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 10.0
DEFAULT_RETRIES = 2
DEFAULT_BACKOFF = 0.1


@dataclass(frozen=True)
class Response:
    status: int
    body: bytes
    headers: Mapping[str, str] = field(default_factory=dict)

    def header(self, name: str, default: str | None = None) -> str | None:
        name = name.lower()
        for key, value in self.headers.items():
            if key.lower() == name:
                return value
        return default

    @property
    def text(self) -> str:
        return self.body.decode("utf-8")

    @property
    def ok(self) -> bool:
        return self.status == 200


@dataclass(frozen=True)
class CacheStats:
    hits: int = 0
    misses: int = 0
    stored_bytes: int = 0


def urllib_get(url: str, timeout: float) -> Response:
    """Single GET; HTTP error statuses are returned, connection failures raise OSError."""
    request = urllib.request.Request(url, headers={"Accept": "application/json, text/plain"})
    try:
        with urllib.request.urlopen(request, timeout=timeout) as resp:
            return Response(resp.status, resp.read(), dict(resp.headers.items()))
    except urllib.error.HTTPError as exc:
        with exc:
            return Response(exc.code, exc.read(), dict(exc.headers.items()))
    except urllib.error.URLError as exc:
        reason = exc.reason
        raise reason if isinstance(reason, OSError) else ConnectionError(str(reason)) from exc


def _env_number(name: str, default, cast):
    value = os.environ.get(name)
    if value in (None, ""):
        return default
    try:
        return cast(value)
    except ValueError:
        raise UsageError(f"environment variable {name}={value!r} is not a number") from None


class Transport:
    """Caching GET client.

    Successful (200) bodies are stored keyed by the exact URL for the life of
    the object; other statuses are returned but never cached. Connection
    failures are retried ``retries`` times with a fixed ``backoff`` delay.
    ``AFLUX_TIMEOUT_MS`` and ``AFLUX_RETRIES`` override the defaults.
    """

    def __init__(self, timeout: float | None = None, retries: int | None = None,
                 backoff: float = DEFAULT_BACKOFF,
                 get: Callable[[str, float], Response] | None = None):
        if timeout is None:
            timeout = _env_number("AFLUX_TIMEOUT_MS", DEFAULT_TIMEOUT * 1000, float) / 1000
        if retries is None:
            retries = _env_number("AFLUX_RETRIES", DEFAULT_RETRIES, int)
        if timeout <= 0 or retries < 0:
            raise UsageError("timeout must be positive and retries non-negative")
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self._get = get or urllib_get
        self._cache: dict[str, Response] = {}
        self._lock = threading.Lock()
        self._hits = 0
        self._misses = 0
        self._stored = 0

    def fetch(self, url: str) -> Response:
        parts = urlsplit(url)
        if parts.scheme not in ("http", "https") or not parts.netloc:
            raise UsageError(f"not an absolute http(s) URL: {url!r}")
        with self._lock:
            cached = self._cache.get(url)
            if cached is not None:
                self._hits += 1
                return cached
            self._misses += 1
        response = self._get_with_retries(url)
        if response.status == 200:
            with self._lock:
                stored = self._cache.setdefault(url, response)
                if stored is response:
                    self._stored += len(response.body)
            return stored
        return response

    def _get_with_retries(self, url: str) -> Response:
        attempts = 0
        while True:
            attempts += 1
            try:
                log.debug("GET %s (attempt %d)", url, attempts)
                return self._get(url, self.timeout)
            except (OSError, socket.timeout) as exc:
                if attempts > self.retries:
                    raise TransportError(url, attempts, exc) from exc
                log.info("GET %s failed (%s); retrying in %.2fs", url, exc, self.backoff)
                time.sleep(self.backoff)

    def stats(self) -> CacheStats:
        with self._lock:
            return CacheStats(self._hits, self._misses, self._stored)

    def clear(self) -> None:
        with self._lock:
            self._cache.clear()
            self._hits = self._misses = self._stored = 0
