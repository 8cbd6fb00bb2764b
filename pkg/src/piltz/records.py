"""ResidualRecord plus its CSV/JSON wire formats."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields

from .errors import DomainError

COLUMNS = ("k", "x", "N", "lhs", "rhs", "residual", "normalizer", "normalized_residual")


@dataclass(frozen=True)
class ResidualRecord:
    """One experiment row: inputs, both sides of an identity, and the scaled gap."""

    k: int
    x: float
    N: int
    lhs: float
    rhs: float
    residual: float
    normalizer: float
    normalized_residual: float

    @classmethod
    def build(cls, k, x, N, lhs, rhs, normalizer):
        if not normalizer > 0:
            raise DomainError(f"normalizer must be positive, got {normalizer!r}")
        residual = float(lhs) - float(rhs)
        return cls(int(k), float(x), int(N), float(lhs), float(rhs), residual,
                   float(normalizer), residual / float(normalizer))


def format_float(v: float) -> str:
    if math.isnan(v) or math.isinf(v):
        return repr(float(v))
    return format(float(v), ".17g")


def records_to_csv(records, header: str | None = None) -> str:
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in records:
        w.writerow([r.k, format_float(r.x), r.N] + [format_float(getattr(r, c)) for c in COLUMNS[3:]])
    return buf.getvalue()


def records_from_csv(text: str) -> list[ResidualRecord]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    reader = csv.reader(lines)
    head = next(reader)
    if tuple(head) != COLUMNS:
        raise DomainError(f"unexpected CSV header {head}")
    out = []
    for row in reader:
        vals = dict(zip(COLUMNS, row))
        out.append(ResidualRecord(
            k=int(vals["k"]), x=float(vals["x"]), N=int(vals["N"]),
            **{c: float(vals[c]) for c in COLUMNS[3:]},
        ))
    return out


def _json_float(v):
    # json cannot carry inf/nan; keep them as strings
    return v if math.isfinite(v) else repr(v)


def records_to_json(records, version: str, config: dict) -> str:
    payload = {
        "version": version,
        "config": config,
        "records": [{k: (_json_float(v) if isinstance(v, float) else v) for k, v in asdict(r).items()}
                    for r in records],
    }
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def records_from_json(text: str) -> list[ResidualRecord]:
    payload = json.loads(text)
    names = [f.name for f in fields(ResidualRecord)]
    out = []
    for row in payload["records"]:
        kw = {n: row[n] for n in names}
        for n in COLUMNS[3:] + ("x",):
            kw[n] = float(kw[n])
        kw["k"], kw["N"] = int(kw["k"]), int(kw["N"])
        out.append(ResidualRecord(**kw))
    return out
