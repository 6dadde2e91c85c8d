"""Gaussian plume forward model with ground reflection and dust-fall deposition.

Units throughout: positions and heights in m, emission rate ``q`` in g/s,
wind speed in m/s, concentration in g/m^3, deposition in mg/m^2.

Wind direction is the direction the wind blows *toward*, in degrees
counterclockwise from +x (east). Each evaluation rotates the receptor offset
from the source into a frame where the wind runs along +x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NonPositiveDownwind, NonPositiveWind

MG_PER_G = 1000.0


@dataclass(frozen=True)
class Source:
    x: float
    y: float
    h: float
    q: float = 1.0
    id: str = ""

    def __post_init__(self):
        if self.h < 0:
            raise ValueError(f"source height must be >= 0, got {self.h}")
        if not math.isfinite(self.q):
            raise ValueError("emission rate must be finite")

    def with_rate(self, q: float) -> "Source":
        return Source(self.x, self.y, self.h, q, self.id)


@dataclass(frozen=True)
class Receptor:
    x: float
    y: float
    collection_area: float = 1.0
    measured_deposition: float = 0.0
    id: str = ""

    def __post_init__(self):
        if not self.collection_area > 0:
            raise ValueError(f"collection area must be > 0, got {self.collection_area}")
        if self.measured_deposition < 0:
            raise ValueError("measured deposition must be >= 0")


@dataclass(frozen=True)
class WindInterval:
    duration: float
    speed: float
    direction: float = 0.0
    start: str = ""

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError(f"duration must be >= 0, got {self.duration}")
        if not self.speed > 0:
            raise NonPositiveWind(f"wind speed must be > 0, got {self.speed}")


@dataclass(frozen=True)
class ConstantSigma:
    value: float

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError("constant sigma must be > 0")

    def __call__(self, x):
        return np.full(np.shape(x), float(self.value)) if np.ndim(x) else float(self.value)


@dataclass(frozen=True)
class PowerLawSigma:
    """``sigma(x) = a * x**b`` in downwind distance ``x``."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a > 0 or not 0 < self.b < 1:
            raise ValueError(f"power law needs a > 0 and 0 < b < 1, got a={self.a}, b={self.b}")

    def __call__(self, x):
        return self.a * np.power(x, self.b)


@dataclass(frozen=True)
class DispersionSpec:
    """Crosswind (``y``) and vertical (``z``) spread models."""

    y: ConstantSigma | PowerLawSigma = field(default_factory=lambda: PowerLawSigma(0.08, 0.9))
    z: ConstantSigma | PowerLawSigma = field(default_factory=lambda: PowerLawSigma(0.06, 0.8))

    @classmethod
    def constant(cls, sigma_y: float, sigma_z: float) -> "DispersionSpec":
        return cls(ConstantSigma(sigma_y), ConstantSigma(sigma_z))

    @classmethod
    def power_law(cls, ay=0.08, by=0.9, az=0.06, bz=0.8) -> "DispersionSpec":
        return cls(PowerLawSigma(ay, by), PowerLawSigma(az, bz))

    @classmethod
    def from_diffusivity(cls, ky: float, kz: float, u_speed: float) -> "DispersionSpec":
        """Constant eddy diffusivities, for which ``sigma**2 = 2 K x / U``."""
        return cls(
            PowerLawSigma(math.sqrt(2.0 * ky / u_speed), 0.5),
            PowerLawSigma(math.sqrt(2.0 * kz / u_speed), 0.5),
        )


@dataclass(frozen=True)
class Contaminant:
    name: str = "particulate"
    settling_velocity: float = 0.01

    def __post_init__(self):
        if self.settling_velocity < 0:
            raise ValueError("settling velocity must be >= 0")


def sigma_at(spec: DispersionSpec, x_downwind: float) -> tuple[float, float]:
    if not x_downwind > 0:
        raise NonPositiveDownwind(f"downwind distance must be > 0, got {x_downwind}")
    return float(spec.y(x_downwind)), float(spec.z(x_downwind))


def rotate_to_wind_frame(point, direction_deg: float):
    """Rotate ``(x, y)`` by ``-direction_deg`` so the wind vector maps to +x.

    Returns ``(x_downwind, y_crosswind)``; works elementwise on arrays.
    """
    x, y = point
    t = math.radians(direction_deg)
    c, s = math.cos(t), math.sin(t)
    return c * np.asarray(x) + s * np.asarray(y), -s * np.asarray(x) + c * np.asarray(y)


def _plume(q, u_speed, spec, xd, yc, z, h, reflect=True):
    xd, yc, z = np.broadcast_arrays(np.asarray(xd, float), np.asarray(yc, float), np.asarray(z, float))
    out = np.zeros(xd.shape)
    down = xd > 0
    if not np.any(down):
        return out
    x = xd[down]
    sy = np.asarray(spec.y(x), float)
    sz = np.asarray(spec.z(x), float)
    zz = z[down]
    vert = np.exp(-((zz - h) ** 2) / (2 * sz**2))
    if reflect:
        vert = vert + np.exp(-((zz + h) ** 2) / (2 * sz**2))
    out[down] = q / (2 * math.pi * u_speed * sy * sz) * np.exp(-yc[down] ** 2 / (2 * sy**2)) * vert
    return out


def _scalar_or_array(a):
    return float(a) if np.ndim(a) == 0 else a


def concentration(
    source: Source,
    u_speed: float,
    spec: DispersionSpec,
    at,
    direction_deg: float = 0.0,
    ground_reflection: bool = True,
):
    """Steady plume concentration (g/m^3) at world point(s) ``at = (x, y, z)``.

    Zero upwind of the source (downwind coordinate <= 0). Accepts scalars or
    broadcastable arrays. ``ground_reflection=False`` drops the image source,
    i.e. the plume of an unbounded atmosphere with no ground.
    """
    if not u_speed > 0:
        raise NonPositiveWind(f"wind speed must be > 0, got {u_speed}")
    x, y, z = at
    xd, yc = rotate_to_wind_frame((np.asarray(x) - source.x, np.asarray(y) - source.y), direction_deg)
    return _scalar_or_array(_plume(source.q, u_speed, spec, xd, yc, z, source.h, ground_reflection))


def superpose_concentration(
    sources: Sequence[Source], u_speed: float, spec: DispersionSpec, at, direction_deg: float = 0.0
):
    if not u_speed > 0:
        raise NonPositiveWind(f"wind speed must be > 0, got {u_speed}")
    shape = np.broadcast_shapes(*(np.shape(c) for c in at))
    total = np.zeros(shape)
    for s in sources:
        total = total + concentration(s, u_speed, spec, at, direction_deg)
    return _scalar_or_array(total)


def deposition(
    sources: Sequence[Source],
    receptor: Receptor,
    wind: Sequence[WindInterval],
    spec: DispersionSpec,
    contaminant: Contaminant,
) -> float:
    """Cumulative deposition (mg/m^2) at one receptor over a wind record.

    Each interval contributes ``settling_velocity * C_ground * duration``,
    with the ground-level concentration evaluated in that interval's wind
    frame.
    """
    total = 0.0
    at = (receptor.x, receptor.y, 0.0)
    for w in wind:
        if not w.speed > 0:
            raise NonPositiveWind(f"wind speed must be > 0, got {w.speed}")
        if w.duration == 0:
            continue
        c = superpose_concentration(sources, w.speed, spec, at, w.direction)
        total += contaminant.settling_velocity * c * w.duration
    return MG_PER_G * total


@dataclass(frozen=True)
class PlumeGrid:
    """Concentration on a regular ground grid; ``values[iy, ix]``."""

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray

    def rows(self):
        """``(x, y, value)`` triples, x varying fastest."""
        for iy, yv in enumerate(self.y):
            for ix, xv in enumerate(self.x):
                yield float(xv), float(yv), float(self.values[iy, ix])


def concentration_grid(
    sources: Sequence[Source],
    wind: WindInterval,
    spec: DispersionSpec,
    extent: tuple[float, float, float, float],
    shape: tuple[int, int],
    z: float = 0.0,
) -> PlumeGrid:
    """Superposed concentration on an ``nx`` x ``ny`` node grid.

    ``extent`` is ``(xmin, xmax, ymin, ymax)`` and the nodes include the
    boundary.
    """
    nx, ny = shape
    if nx < 1 or ny < 1:
        raise ValueError(f"grid resolution must be positive, got {shape}")
    xmin, xmax, ymin, ymax = extent
    xs = np.linspace(xmin, xmax, nx)
    ys = np.linspace(ymin, ymax, ny)
    X, Y = np.meshgrid(xs, ys)
    vals = np.asarray(superpose_concentration(sources, wind.speed, spec, (X, Y, np.full(X.shape, z)), wind.direction))
    return PlumeGrid(xs, ys, vals.reshape(X.shape))
