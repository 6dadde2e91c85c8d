"""Input files for command-line tests: well-formed fixtures plus malformed variants."""

from pathlib import Path

from indmath import fileio
from indmath.errors import (
    CorruptHeader,
    InputFileNotFound,
    InvalidJoint,
    ParseError,
    UnitHeaderMismatch,
    UnsupportedFormat,
)
from indmath.synthetic import smelter_scenario, two_line_fixture


def write_good_fixtures(root: Path) -> dict:
    """Two-line PGM and the 4x9 smelter scenario (sources at placeholder rate 1)."""
    sc = smelter_scenario()
    paths = {
        "image": root / "two_lines.pgm",
        "sources": root / "sources.csv",
        "receptors": root / "receptors.csv",
        "wind": root / "wind.csv",
    }
    fx = two_line_fixture()
    fileio.write_pgm(paths["image"], fx.image)
    fileio.write_sources(paths["sources"], [s.with_rate(1.0) for s in sc.sources])
    fileio.write_receptors(paths["receptors"], sc.receptors)
    fileio.write_wind(paths["wind"], sc.wind)
    paths["truth_lines"] = fx.lines
    paths["true_rates"] = sc.true_rates
    return paths


def _replace(src: Path, dst: Path, old: str, new: str) -> Path:
    text = src.read_text()
    assert old in text, old
    dst.write_text(text.replace(old, new, 1))
    return dst


def malformed_cases(root: Path, good: dict):
    """``(name, argv, expected error class)`` for every malformed-input fixture."""
    bad = root / "bad"
    bad.mkdir(exist_ok=True)
    out = str(root / "never_written.csv")
    s, r, w = str(good["sources"]), str(good["receptors"]), str(good["wind"])

    def invert(sources=s, receptors=r, wind=w):
        return ["plume", "invert", "--sources", str(sources), "--receptors", str(receptors), "--wind", str(wind),
                "--out", out]

    rec_lines = good["receptors"].read_text().splitlines()
    rec_missing_area = bad / "rec_missing_area.csv"
    fields = rec_lines[2].split(",")
    fields[3] = ""
    rec_missing_area.write_text("\n".join(rec_lines[:2] + [",".join(fields)] + rec_lines[3:]) + "\n")

    src_lines = good["sources"].read_text().splitlines()
    src_text_q = bad / "src_text_q.csv"
    fields = src_lines[1].split(",")
    fields[4] = "high"
    src_text_q.write_text("\n".join([src_lines[0], ",".join(fields)] + src_lines[2:]) + "\n")

    src_kgps = _replace(good["sources"], bad / "src_kgps.csv", "q_gps", "q_kgps")
    wind_hours = _replace(good["wind"], bad / "wind_hours.csv", "duration_s", "duration_h")
    wind_lines = good["wind"].read_text().splitlines()
    fields = wind_lines[3].split(",")
    fields[2] = "0"
    wind_calm = bad / "wind_calm.csv"
    wind_calm.write_text("\n".join(wind_lines[:3] + [",".join(fields)] + wind_lines[4:]) + "\n")

    p6 = bad / "color.pgm"
    p6.write_bytes(b"P6\n2 2\n255\n" + bytes(12))
    deep = bad / "deep.pgm"
    deep.write_bytes(b"P5\n2 2\n65535\n" + bytes(8))
    truncated = bad / "truncated.pgm"
    truncated.write_bytes(b"P5\n4 4\n255\n" + bytes(5))
    garbage = bad / "garbage.pgm"
    garbage.write_bytes(b"\x89PNG\r\n\x1a\n")

    def trip(path):
        return ["tripwire", "--input", str(path), "--lines", out, "--overlay", str(root / "never_written.pgm")]

    return [
        ("receptor row missing area", invert(receptors=rec_missing_area), ParseError),
        ("non-numeric emission rate", invert(sources=src_text_q), ParseError),
        ("rate in kg/s", invert(sources=src_kgps), UnitHeaderMismatch),
        ("duration in hours", invert(wind=wind_hours), UnitHeaderMismatch),
        ("calm wind interval", invert(wind=wind_calm), ParseError),
        ("missing receptor file", invert(receptors=bad / "absent.csv"), InputFileNotFound),
        ("colour image", trip(p6), UnsupportedFormat),
        ("16-bit image", trip(deep), UnsupportedFormat),
        ("truncated raster", trip(truncated), CorruptHeader),
        ("not a PGM", trip(garbage), CorruptHeader),
        ("missing image", trip(bad / "absent.pgm"), InputFileNotFound),
        ("branch wider than main", ["weld", "--r1", "1", "--r2", "1.5", "--phi-deg", "45", "--out", out],
         InvalidJoint),
    ]
