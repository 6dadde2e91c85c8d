"""Synthetic fixtures with known ground truth.

Two generators live here because tests, demos and the command line all need
the same inputs:

* line images for the trip-wire detector, with the planted ``(rho, theta)``
  and helpers to map them to sinogram bins;
* a small smelter-style emission scenario (four stacks, nine dust-fall
  collectors, a rotating wind record) whose depositions are produced by the
  forward model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .imaging import DetectionParams, LineFeature, default_n_rho, render_lines
from .plume import Contaminant, DispersionSpec, Receptor, Source, WindInterval, deposition

# -- trip-wire images ---------------------------------------------------------

FIXTURE_SIZE = 128
FIXTURE_BACKGROUND = 120.0
FIXTURE_CONTRAST = 100.0
FIXTURE_NOISE = 10.0


@dataclass(frozen=True)
class LineFixture:
    image: np.ndarray
    lines: list  # (rho, theta, contrast)


def line_fixture(seed: int, size: int = FIXTURE_SIZE, n_lines: int | None = None, rho_span: float = 0.2) -> LineFixture:
    """One or two random lines on a noisy grey background.

    Contrast is ``FIXTURE_CONTRAST`` (bright or dark at random) against noise
    sigma ``FIXTURE_NOISE``. With two lines their angles differ by at least
    30 degrees, and every line passes within ``rho_span * size`` of the
    image center.
    """
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 3)) if n_lines is None else n_lines
    th0 = rng.uniform(0.0, math.pi)
    lines = []
    for i in range(k):
        th = (th0 + i * rng.uniform(math.radians(30), math.radians(150))) % math.pi
        lines.append((rng.uniform(-rho_span, rho_span) * size, th, float(rng.choice([-1, 1])) * FIXTURE_CONTRAST))
    img = render_lines((size, size), lines, FIXTURE_BACKGROUND, FIXTURE_NOISE, rng)
    return LineFixture(img, lines)


def two_line_fixture(size: int = FIXTURE_SIZE, seed: int = 7) -> LineFixture:
    """A bright near-horizontal line and a dark oblique line."""
    lines = [(-0.15 * size, math.radians(89.0), FIXTURE_CONTRAST), (0.1 * size, math.radians(35.0), -FIXTURE_CONTRAST)]
    img = render_lines((size, size), lines, FIXTURE_BACKGROUND, FIXTURE_NOISE, seed)
    return LineFixture(img, lines)


def truth_bin(rho, theta, shape, params: DetectionParams | None = None):
    """Nearest ``(rho_index, theta_index)`` of a line, with ``theta`` folded into [0, pi)."""
    params = params or DetectionParams()
    h, w = shape
    n_rho = params.n_rho or default_n_rho(w, h)
    half = 0.5 * math.hypot(w, h)
    t = int(round((theta % (2 * math.pi)) / (math.pi / params.n_theta)))
    while t >= params.n_theta:
        t -= params.n_theta
        rho = -rho
    r = int(np.argmin(np.abs(np.linspace(-half, half, n_rho) - rho)))
    return r, t


def within_one_bin(feature: LineFeature, truth, n_rho: int, n_theta: int) -> bool:
    """Bin distance <= 1 on both axes, across the theta = 0 / pi seam.

    Crossing the seam reverses the rho axis, since ``(rho, theta + pi)`` is
    the same line as ``(-rho, theta)``.
    """
    tr, tt = truth
    dt = feature.theta_index - tt
    rr = tr
    if dt > n_theta // 2:
        dt -= n_theta
        rr = n_rho - 1 - tr
    elif dt < -(n_theta // 2):
        dt += n_theta
        rr = n_rho - 1 - tr
    return abs(dt) <= 1 and abs(feature.rho_index - rr) <= 1


def recovered(features, lines, shape, params: DetectionParams | None = None) -> tuple[bool, bool]:
    """``(all planted lines found, no surplus features)``."""
    params = params or DetectionParams()
    h, w = shape
    n_rho = params.n_rho or default_n_rho(w, h)
    found = all(
        any(within_one_bin(f, truth_bin(rho, th, shape, params), n_rho, params.n_theta) for f in features)
        for rho, th, _ in lines
    )
    return found, len(features) <= len(lines)


# -- emission scenario --------------------------------------------------------

#: low stacks and vents around a plant site (x, y, release height in m), rates in g/s.
#: Tall stacks loft the plume past the collectors and leave the design matrix
#: ill-conditioned, so release heights are kept at 8-20 m.
SMELTER_SOURCES = (
    Source(0.0, 0.0, 15.0, 2.0, "S1"),
    Source(180.0, 90.0, 10.0, 5.0, "S2"),
    Source(-150.0, 160.0, 20.0, 1.5, "S3"),
    Source(90.0, -170.0, 8.0, 3.5, "S4"),
)

_RING = ((700.0, 10.0), (900.0, 55.0), (650.0, 95.0), (1100.0, 140.0), (800.0, 185.0),
         (950.0, 230.0), (600.0, 270.0), (1200.0, 305.0), (750.0, 340.0))


def smelter_receptors(measured=None) -> list[Receptor]:
    """Nine collectors on an irregular ring around the site."""
    out = []
    for i, (r, deg) in enumerate(_RING):
        t = math.radians(deg)
        d = 0.0 if measured is None else float(measured[i])
        out.append(Receptor(r * math.cos(t), r * math.sin(t), 0.05, d, f"R{i + 1}"))
    return out


def smelter_wind() -> list[WindInterval]:
    """Sixteen six-hour intervals cycling through all compass octants."""
    speeds = (3.0, 5.0, 4.0, 6.5, 2.5, 4.5, 3.5, 5.5)
    out = []
    for k in range(16):
        direction = (22.5 * k + 7.0 * (k % 3)) % 360.0
        out.append(WindInterval(6 * 3600.0, speeds[k % 8], direction, f"T{6 * k:03d}h"))
    return out


@dataclass
class SmelterScenario:
    sources: list[Source]
    receptors: list[Receptor]
    wind: list[WindInterval]
    spec: DispersionSpec
    contaminant: Contaminant

    @property
    def true_rates(self) -> np.ndarray:
        return np.array([s.q for s in self.sources])

    @property
    def measurements(self) -> np.ndarray:
        return np.array([r.measured_deposition for r in self.receptors])


def smelter_scenario(spec: DispersionSpec | None = None, contaminant: Contaminant | None = None) -> SmelterScenario:
    """Four sources, nine receptors, depositions from the forward model (noise-free)."""
    spec = spec or DispersionSpec()
    contaminant = contaminant or Contaminant()
    sources = list(SMELTER_SOURCES)
    wind = smelter_wind()
    blank = smelter_receptors()
    dep = [deposition(sources, r, wind, spec, contaminant) for r in blank]
    return SmelterScenario(sources, smelter_receptors(dep), wind, spec, contaminant)
