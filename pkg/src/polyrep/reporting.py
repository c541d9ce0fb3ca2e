"""Machine-readable envelopes: exact serialization of rationals and
high-precision reals, JSON-lines and CSV emission, and deterministic
parallel mapping."""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, is_dataclass
from fractions import Fraction

import mpmath as mp

VERSION = "0.1.0"


def encode_value(v, digits: int = 50):
    """Lossless-ish scalar encoding: Fractions as 'num/den' (or 'num' when
    integral), mpf as decimal strings at the configured digits."""
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, mp.mpf):
        return mp.nstr(v, digits, strip_zeros=False)
    if isinstance(v, (frozenset, set)):
        return sorted(v)
    if isinstance(v, tuple):
        return [encode_value(x, digits) for x in v]
    if is_dataclass(v) and not isinstance(v, type):
        return encode_record(asdict(v), digits)
    return v


def encode_record(rec, digits: int = 50):
    if isinstance(rec, dict):
        return {k: encode_record(v, digits) for k, v in rec.items()}
    if isinstance(rec, (list, tuple)):
        return [encode_record(v, digits) for v in rec]
    return encode_value(rec, digits)


def parse_rational(s: str) -> Fraction:
    return Fraction(s)


@dataclass
class ReportEnvelope:
    """Container for one run: config echo, records, pass/fail summary.

    Content is deterministic for a fixed config and seed; wall-clock data is
    isolated in the `timing` field so tests can compare everything else.
    """

    command: str
    config: dict
    records: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    version: str = VERSION
    timing: dict = field(default_factory=dict)

    def finish(self, t0: float):
        self.timing = {"seconds": round(time.time() - t0, 3)}
        return self

    def to_json(self, digits: int = 50) -> str:
        payload = {
            "tool": "polyrep",
            "version": self.version,
            "command": self.command,
            "config": encode_record(self.config, digits),
            "records": encode_record(self.records, digits),
            "summary": encode_record(self.summary, digits),
            "timing": self.timing,
        }
        return json.dumps(payload, sort_keys=True)

    @property
    def ok(self) -> bool:
        return bool(self.summary.get("ok", True))


def records_to_csv(records, digits: int = 50) -> str:
    """CSV with the union of record keys; numeric payloads match the JSON."""
    rows = [encode_record(r, digits) for r in records]
    keys: list[str] = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=keys)
    writer.writeheader()
    for r in rows:
        writer.writerow({k: _csv_cell(r.get(k)) for k in keys})
    return buf.getvalue()


def _csv_cell(v):
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    return v


def records_to_jsonl(records, digits: int = 50) -> str:
    return "\n".join(json.dumps(encode_record(r, digits), sort_keys=True) for r in records) + "\n"


def parallel_map(fn, items, threads: int = 1):
    """Order-preserving map; chunked thread pool when threads > 1."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
