"""Batch translation clients: HTTP service, subprocess, and deterministic dictionary mocks.

Every client maps a list of lines to the same number of translated lines.
``translate_corpus`` batches a corpus, runs up to ``max_inflight`` batches at
once, and reassembles the output in input order.
"""

from __future__ import annotations

import hashlib
import logging
import os
import random
import shlex
import subprocess
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Union

import requests

from genderflow.corpus import Corpus, Sentence, derive, tokenize

log = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

KINDS = ("http", "subprocess", "dict_mock")


class TranslationServiceError(RuntimeError):
    """The external translator failed (unreachable, bad response, timeout)."""


class TransientServiceError(TranslationServiceError):
    """A failure worth retrying: connection refused, timeout, 5xx."""


class BatchMismatchError(TranslationServiceError):
    def __init__(self, batch_index: int, sent: int, received: int):
        super().__init__(f"batch {batch_index}: sent {sent} lines, received {received}")
        self.batch_index = batch_index
        self.sent = sent
        self.received = received


@dataclass
class TranslatorHandle:
    kind: str = "dict_mock"
    endpoint: Optional[str] = None
    command: Optional[Union[str, List[str]]] = None
    table: Optional[str] = None
    flip_table: Optional[str] = None
    error_rate: float = 0.0
    seed: int = 0
    src_lang: str = "en"
    tgt_lang: str = "de"
    batch_size: int = 64
    max_inflight: int = 1
    timeout: float = 60.0
    retries: int = 3
    backoff: float = 0.5

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown translator kind {self.kind!r}; expected one of {KINDS}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_inflight < 1:
            raise ValueError("max_inflight must be >= 1")
        if not 0.0 <= self.error_rate <= 1.0:
            raise ValueError("error_rate must be in [0, 1]")
        if self.kind == "http" and not self.endpoint:
            raise ValueError("http translator needs an endpoint")
        if self.kind == "subprocess" and not self.command:
            raise ValueError("subprocess translator needs a command")
        if self.kind == "dict_mock" and not self.table:
            raise ValueError("dict_mock translator needs a table")

    @classmethod
    def from_dict(cls, d: dict) -> "TranslatorHandle":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown translator handle fields: {sorted(unknown)}")
        return cls(**d)

    def identity(self) -> dict:
        d = asdict(self)
        return {k: v for k, v in d.items() if v is not None}


def read_table(path: PathLike) -> dict:
    """Two-column TSV ``src_token<TAB>tgt_token``; source keys are lowercased."""
    table = {}
    with open(path, encoding="utf-8") as fh:
        for row, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise ValueError(f"{path}:{row}: expected 2 tab-separated columns")
            table[cols[0].strip().lower()] = cols[1].strip()
    return table


class DictMockTranslator:
    """Token-by-token table lookup; unknown tokens are copied through.

    With ``flips`` and ``error_rate > 0`` each flippable output token is
    swapped for its opposite-gender counterpart with probability
    ``error_rate``. The random stream is seeded from ``(seed, line)`` so a
    line's translation never depends on batching or thread scheduling.
    """

    def __init__(self, table: dict, flips: Optional[dict] = None, error_rate: float = 0.0, seed: int = 0):
        self.table = {k.lower(): v for k, v in table.items()}
        self.flips = {}
        for a, b in (flips or {}).items():
            self.flips.setdefault(a.lower(), b)
            self.flips.setdefault(b.lower(), a)
        self.error_rate = error_rate
        self.seed = seed

    def line_rng(self, line: str) -> random.Random:
        digest = hashlib.sha256(f"{self.seed}\x00{line}".encode("utf-8")).digest()
        return random.Random(int.from_bytes(digest[:8], "big"))

    def translate_line(self, line: str) -> str:
        out = [self.table.get(t.lower(), t) for t in tokenize(line)]
        if self.flips and self.error_rate > 0:
            rng = self.line_rng(line)
            for i, tok in enumerate(out):
                flip = self.flips.get(tok.lower())
                if flip is not None and rng.random() < self.error_rate:
                    out[i] = flip
        return " ".join(out)

    def translate_batch(self, lines: Sequence[str]) -> list:
        return [self.translate_line(line) for line in lines]


class HttpTranslator:
    """POST ``{"src_lang", "tgt_lang", "lines"}``, expect ``{"translations": [...]}``."""

    def __init__(self, endpoint: str, src_lang: str, tgt_lang: str, timeout: float = 60.0):
        self.endpoint = endpoint
        self.src_lang = src_lang
        self.tgt_lang = tgt_lang
        self.timeout = timeout
        self._local = threading.local()

    def _session(self) -> requests.Session:
        s = getattr(self._local, "session", None)
        if s is None:
            s = self._local.session = requests.Session()
        return s

    def translate_batch(self, lines: Sequence[str]) -> list:
        payload = {"src_lang": self.src_lang, "tgt_lang": self.tgt_lang, "lines": list(lines)}
        try:
            resp = self._session().post(self.endpoint, json=payload, timeout=self.timeout)
        except (requests.ConnectionError, requests.Timeout) as exc:
            raise TransientServiceError(f"{self.endpoint}: {exc}") from exc
        except requests.RequestException as exc:
            raise TranslationServiceError(f"{self.endpoint}: {exc}") from exc
        if resp.status_code != 200:
            cls = TransientServiceError if resp.status_code >= 500 or resp.status_code == 429 \
                else TranslationServiceError
            raise cls(f"{self.endpoint}: HTTP {resp.status_code}")
        try:
            out = resp.json()["translations"]
        except (ValueError, KeyError, TypeError) as exc:
            raise TranslationServiceError(f"{self.endpoint}: malformed response") from exc
        if not isinstance(out, list) or not all(isinstance(x, str) for x in out):
            raise TranslationServiceError(f"{self.endpoint}: 'translations' must be a list of strings")
        return out


class SubprocessTranslator:
    """Run ``command`` per batch: lines on stdin, the same number of lines on stdout."""

    def __init__(self, command, timeout: float = 60.0):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout

    def translate_batch(self, lines: Sequence[str]) -> list:
        data = "".join(line + "\n" for line in lines)
        try:
            proc = subprocess.run(self.command, input=data, capture_output=True,
                                  text=True, encoding="utf-8", timeout=self.timeout)
        except subprocess.TimeoutExpired as exc:
            raise TransientServiceError(f"{self.command[0]}: timed out after {self.timeout}s") from exc
        except OSError as exc:
            raise TranslationServiceError(f"{self.command[0]}: {exc}") from exc
        if proc.returncode != 0:
            raise TranslationServiceError(
                f"{self.command[0]} exited with {proc.returncode}: {proc.stderr.strip()[:200]}")
        return proc.stdout.splitlines()


def make_translator(handle: TranslatorHandle):
    if handle.kind == "dict_mock":
        flips = read_table(handle.flip_table) if handle.flip_table else None
        return DictMockTranslator(read_table(handle.table), flips, handle.error_rate, handle.seed)
    if handle.kind == "http":
        return HttpTranslator(handle.endpoint, handle.src_lang, handle.tgt_lang, handle.timeout)
    return SubprocessTranslator(handle.command, handle.timeout)


def batches(items: Sequence, size: int) -> list:
    return [items[i:i + size] for i in range(0, len(items), size)]


@dataclass
class _Counter:
    attempts: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)

    def bump(self):
        with self.lock:
            self.attempts += 1


def _run_batch(translator, index: int, lines: list, retries: int, backoff: float, counter: _Counter) -> list:
    for attempt in range(retries + 1):
        counter.bump()
        try:
            out = translator.translate_batch(lines)
        except TransientServiceError as exc:
            if attempt == retries:
                raise TranslationServiceError(
                    f"batch {index}: giving up after {retries + 1} attempts: {exc}") from exc
            delay = backoff * (2 ** attempt)
            log.warning("batch %d attempt %d failed (%s); retrying in %.2fs", index, attempt + 1, exc, delay)
            time.sleep(delay)
            continue
        if len(out) != len(lines):
            raise BatchMismatchError(index, len(lines), len(out))
        if any("\n" in t or "\r" in t for t in out):
            raise TranslationServiceError(f"batch {index}: a translation contains a line break")
        return list(out)
    raise AssertionError("unreachable")


def translate_lines(translator, lines: Sequence[str], batch_size: int = 64, max_inflight: int = 1,
                    retries: int = 3, backoff: float = 0.5):
    """Translate ``lines``; returns ``(translations, stats)`` with output in input order."""
    chunks = batches(list(lines), batch_size)
    counter = _Counter()
    if max_inflight <= 1 or len(chunks) <= 1:
        results = [_run_batch(translator, i, c, retries, backoff, counter) for i, c in enumerate(chunks)]
    else:
        with ThreadPoolExecutor(max_workers=max_inflight) as pool:
            futures = [pool.submit(_run_batch, translator, i, c, retries, backoff, counter)
                       for i, c in enumerate(chunks)]
            results = [f.result() for f in futures]
    out = [t for part in results for t in part]
    return out, {"lines": len(out), "requests": len(chunks), "attempts": counter.attempts}


def translate_corpus(handle: TranslatorHandle, corpus, translator=None, max_inflight: Optional[int] = None):
    """Translate every sentence of ``corpus``.

    Returns ``(target_corpus, manifest)``. Target sentences keep the line
    numbers of their sources. ``translator`` overrides the client built from
    ``handle``; ``max_inflight`` overrides the handle's concurrency.
    """
    sentences = [getattr(x, "src", x) for x in corpus]
    if translator is None:
        translator = make_translator(handle)
    inflight = handle.max_inflight if max_inflight is None else max_inflight
    out, stats = translate_lines(translator, [s.raw for s in sentences], handle.batch_size,
                                 inflight, handle.retries, handle.backoff)
    target = [Sentence.from_text(t, s.line_no) for s, t in zip(sentences, out)]
    manifest = {"handle": handle.identity(), **stats}
    manifest["handle"].pop("max_inflight", None)
    return derive(corpus, target), manifest
