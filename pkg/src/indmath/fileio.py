"""Scenario CSV ingestion, result CSV emission and binary PGM images.

Every scenario column carries its unit in the header. A column whose name
matches an expected quantity but with a different unit suffix is rejected
with :class:`UnitHeaderMismatch` rather than silently rescaled.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import (
    CorruptHeader,
    InputFileNotFound,
    ParseError,
    UnitHeaderMismatch,
    UnsupportedFormat,
)
from .plume import Contaminant, DispersionSpec, Receptor, Source, WindInterval

SOURCE_COLUMNS = ("id", "x_m", "y_m", "h_m", "q_gps")
RECEPTOR_COLUMNS = ("id", "x_m", "y_m", "area_m2", "deposition_mg_m2")
WIND_COLUMNS = ("start", "duration_s", "speed_mps", "dir_deg_toward")
SEAM_COLUMNS = ("theta2", "branch", "x", "y", "z")
LINE_COLUMNS = ("rho", "theta_rad", "strength")
GRID_COLUMNS = ("x", "y", "value")
ESTIMATE_COLUMNS = ("source_id", "q_gps", "stderr_placeholder", "active_constraint")
FIELD_COLUMNS = ("i", "j", "k", "x", "y", "z", "c")

PRECISION = 12


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.{PRECISION}g}"
    return str(v)


def atomic_write_bytes(path, data: bytes) -> None:
    """Write via a sibling temp file and rename, so ``path`` is never partial."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    atomic_write_bytes(path, ("\n".join(lines) + "\n").encode())


# -- scenario ingestion -------------------------------------------------------


def _stem(col):
    return col.split("_", 1)[0]


def _read_table(path, expected):
    path = Path(path)
    if not path.is_file():
        raise InputFileNotFound(f"{path}: no such file")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(path, 1, expected[0], "empty file") from None
        for col in expected:
            if col in header:
                continue
            clash = [h for h in header if _stem(h) == _stem(col)]
            if clash:
                raise UnitHeaderMismatch(f"{path}: column '{clash[0]}' where '{col}' was expected")
            raise ParseError(path, 1, col, "missing column")
        pos = {col: header.index(col) for col in expected}
        rows = []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            rec = {}
            for col in expected:
                i = pos[col]
                if i >= len(row) or not row[i].strip():
                    raise ParseError(path, reader.line_num, col, "missing value")
                rec[col] = row[i].strip()
            rows.append((reader.line_num, rec))
    return rows


def _num(path, line, rec, col):
    try:
        v = float(rec[col])
    except ValueError:
        raise ParseError(path, line, col, f"not a number: {rec[col]!r}") from None
    if not math.isfinite(v):
        raise ParseError(path, line, col, f"non-finite value {rec[col]!r}")
    return v


def _build(path, line, col, factory):
    try:
        return factory()
    except ValueError as exc:
        raise ParseError(path, line, col, str(exc)) from None


def read_sources(path) -> list[Source]:
    out = []
    for line, rec in _read_table(path, SOURCE_COLUMNS):
        x, y, h, q = (_num(path, line, rec, c) for c in SOURCE_COLUMNS[1:])
        out.append(_build(path, line, "h_m", lambda: Source(x, y, h, q, rec["id"])))
    return out


def read_receptors(path) -> list[Receptor]:
    out = []
    for line, rec in _read_table(path, RECEPTOR_COLUMNS):
        x, y, area, dep = (_num(path, line, rec, c) for c in RECEPTOR_COLUMNS[1:])
        out.append(_build(path, line, "area_m2", lambda: Receptor(x, y, area, dep, rec["id"])))
    return out


def read_wind(path) -> list[WindInterval]:
    out = []
    for line, rec in _read_table(path, WIND_COLUMNS):
        dur, speed, direction = (_num(path, line, rec, c) for c in WIND_COLUMNS[1:])
        if speed <= 0:
            raise ParseError(path, line, "speed_mps", f"wind speed must be > 0, got {speed}")
        out.append(_build(path, line, "duration_s", lambda: WindInterval(dur, speed, direction, rec["start"])))
    return out


@dataclass
class Scenario:
    sources: list[Source]
    receptors: list[Receptor]
    wind: list[WindInterval]
    spec: DispersionSpec = field(default_factory=DispersionSpec)
    contaminant: Contaminant = field(default_factory=Contaminant)
    provenance: dict = field(default_factory=dict)

    @property
    def measurements(self) -> np.ndarray:
        return np.array([r.measured_deposition for r in self.receptors])


def ingest_scenario(sources_path, receptors_path, wind_path, spec=None, contaminant=None) -> Scenario:
    """Parse and validate the three scenario tables.

    ``receptors_path`` may be ``None`` for forward-only runs.
    """
    paths = {"sources": sources_path, "receptors": receptors_path, "wind": wind_path}
    stamps = {}

    def stamp(name):
        stamps[name] = datetime.now(timezone.utc).isoformat()

    sources = read_sources(sources_path)
    stamp("sources")
    receptors = read_receptors(receptors_path) if receptors_path is not None else []
    if receptors_path is not None:
        stamp("receptors")
    wind = read_wind(wind_path)
    stamp("wind")
    return Scenario(
        sources,
        receptors,
        wind,
        spec or DispersionSpec(),
        contaminant or Contaminant(),
        {"paths": {k: str(v) for k, v in paths.items() if v is not None}, "parsed_at": stamps},
    )


def write_sources(path, sources) -> None:
    write_csv(path, SOURCE_COLUMNS, [(s.id, s.x, s.y, s.h, s.q) for s in sources])


def write_receptors(path, receptors, depositions=None) -> None:
    deps = [r.measured_deposition for r in receptors] if depositions is None else depositions
    write_csv(
        path, RECEPTOR_COLUMNS, [(r.id, r.x, r.y, r.collection_area, d) for r, d in zip(receptors, deps)]
    )


def write_wind(path, wind) -> None:
    write_csv(path, WIND_COLUMNS, [(w.start, w.duration, w.speed, w.direction) for w in wind])


# -- PGM ----------------------------------------------------------------------


def _header_tokens(data: bytes, count: int):
    """First ``count`` whitespace-separated header tokens, skipping comments."""
    tokens, i, n = [], 0, len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        if i >= n:
            raise CorruptHeader("truncated PGM header")
        j = i
        while j < n and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
            j += 1
        tokens.append(data[i:j])
        i = j
    return tokens, i


def read_pgm(path) -> np.ndarray:
    """Binary greyscale PGM (P5, maxval 255) as a float array ``[row, col]``."""
    path = Path(path)
    if not path.is_file():
        raise InputFileNotFound(f"{path}: no such file")
    data = path.read_bytes()
    magic = data[:2]
    if magic in (b"P1", b"P2", b"P3", b"P4", b"P6", b"P7"):
        raise UnsupportedFormat(f"{path}: netpbm type {magic.decode()} is not supported (P5 only)")
    if magic != b"P5":
        raise CorruptHeader(f"{path}: not a PGM file")
    tokens, end = _header_tokens(data, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise CorruptHeader(f"{path}: non-integer header field") from None
    if width <= 0 or height <= 0 or maxval <= 0:
        raise CorruptHeader(f"{path}: invalid dimensions {width}x{height} maxval {maxval}")
    if maxval != 255:
        raise UnsupportedFormat(f"{path}: maxval {maxval} (only 255 is supported)")
    if end >= len(data) or not data[end : end + 1].isspace():
        raise CorruptHeader(f"{path}: missing separator before raster")
    raster = data[end + 1 :]
    if len(raster) < width * height:
        raise CorruptHeader(f"{path}: raster has {len(raster)} bytes, need {width * height}")
    return np.frombuffer(raster[: width * height], dtype=np.uint8).reshape(height, width).astype(float)


def to_bytes_image(img) -> np.ndarray:
    return np.clip(np.rint(np.asarray(img, dtype=float)), 0, 255).astype(np.uint8)


def write_pgm(path, img) -> None:
    """Write a P5 image; intensities are rounded and clipped to [0, 255]."""
    a = to_bytes_image(img)
    if a.ndim != 2:
        raise ValueError("PGM images must be 2-D")
    h, w = a.shape
    atomic_write_bytes(path, f"P5\n{w} {h}\n255\n".encode() + a.tobytes())
