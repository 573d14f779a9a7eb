"""CSV ingestion and export for the GEE datasets.

Wedderburn files have the header ``site,variety,y``; Fieller files carry a
``# sigma=<real>`` metadata line followed by the header ``y1,y2``.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .gee import FIELLER_ROWS, FIELLER_SIGMA, WEDDERBURN_ROWS, GeeDataset

WEDDERBURN_HEADER = ["site", "variety", "y"]
FIELLER_HEADER = ["y1", "y2"]
CLIP = 1e-6


class ParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _parse_float(text: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", line) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite value: {text!r}", line)
    return value


def _parse_label(text: str, line: int) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ParseError(f"not an integer label: {text!r}", line) from None
    if not 1 <= value <= 10:
        raise ParseError(f"label {value} outside 1..10", line)
    return value


def load_gee_csv(path) -> GeeDataset:
    """Read a Wedderburn or Fieller dataset; the header decides which."""
    lines = Path(path).read_text().splitlines()
    sigma = None
    body = []  # (line number, text)
    for no, text in enumerate(lines, start=1):
        stripped = text.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            key, _, val = stripped[1:].strip().partition("=")
            if key.strip() == "sigma":
                sigma = _parse_float(val.strip(), no)
                if sigma <= 0:
                    raise ParseError("sigma must be positive", no)
            continue
        body.append((no, text))
    if not body:
        raise ParseError("missing header", len(lines) + 1)
    header_line, header_text = body[0]
    header = [h.strip() for h in next(csv.reader([header_text]))]
    rows = [(no, [c.strip() for c in next(csv.reader([t]))]) for no, t in body[1:]]
    if header == WEDDERBURN_HEADER:
        return _load_wedderburn(rows, header_line)
    if header == FIELLER_HEADER:
        return _load_fieller(rows, header_line, FIELLER_SIGMA if sigma is None else sigma)
    raise ParseError(f"unrecognised header {header}", header_line)


def _load_wedderburn(rows, header_line) -> GeeDataset:
    site, variety, y = [], [], []
    for no, cells in rows:
        if len(cells) != 3:
            raise ParseError(f"expected 3 fields, got {len(cells)}", no)
        site.append(_parse_label(cells[0], no))
        variety.append(_parse_label(cells[1], no))
        value = _parse_float(cells[2], no)
        if not 0.0 <= value <= 1.0:
            raise ParseError(f"proportion {value} outside [0, 1]", no)
        y.append(value)
    if len(y) != WEDDERBURN_ROWS:
        last = rows[-1][0] if rows else header_line
        raise ParseError(f"expected {WEDDERBURN_ROWS} observations, found {len(y)}", last)
    y = np.asarray(y)
    clipped = np.clip(y, CLIP, 1.0 - CLIP)
    return GeeDataset(
        "wedderburn",
        y=clipped,
        site=np.asarray(site),
        variety=np.asarray(variety),
        clipped=int(np.count_nonzero(clipped != y)),
    )


def _load_fieller(rows, header_line, sigma) -> GeeDataset:
    pairs = []
    for no, cells in rows:
        if len(cells) != 2:
            raise ParseError(f"expected 2 fields, got {len(cells)}", no)
        pairs.append((_parse_float(cells[0], no), _parse_float(cells[1], no)))
    if len(pairs) != FIELLER_ROWS:
        last = rows[-1][0] if rows else header_line
        raise ParseError(f"expected {FIELLER_ROWS} pairs, found {len(pairs)}", last)
    return GeeDataset("fieller", y=np.asarray(pairs), sigma=sigma)


def write_gee_csv(data: GeeDataset, path) -> None:
    """Write ``data`` so that :func:`load_gee_csv` restores it bit for bit."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if data.kind == "wedderburn":
            writer.writerow(WEDDERBURN_HEADER)
            for s, v, y in zip(data.site, data.variety, data.y):
                writer.writerow([int(s), int(v), repr(float(y))])
        else:
            fh.write(f"# sigma={float(data.sigma)!r}\n")
            writer.writerow(FIELLER_HEADER)
            for y1, y2 in data.y:
                writer.writerow([repr(float(y1)), repr(float(y2))])
