"""Seam geometry for a branch pipe welded onto a main pipe.

Pipe 1 (the main pipe) is the cylinder x**2 + y**2 = r1**2 with its axis on z.
Pipe 2 has radius r2 and its axis passes through the origin with direction
``a = (-sin(phi), 0, cos(phi))``, so ``phi`` is the joint angle between the
two axes. Eliminating the cylinder parameters leaves a closed form in the
pipe-2 angle ``theta2`` with two sign branches::

    x = +/- sqrt(r1**2 - r2**2 + r2**2 cos(theta2)**2)
    y = r2 sin(theta2)
    z = (r2 cos(theta2) -/+ cos(phi) sqrt(...)) / sin(phi)

The ``-`` branch (x < 0) is the seam on the side pipe 2 leaves from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateAngle, InvalidJoint

#: relative tolerance used for on-surface checks and the equal-radius test
EPS_SURF = 1e-9
_EQUAL_RADII_RTOL = 1e-12


@dataclass(frozen=True)
class PipeJoint:
    """Two cylinders joined at angle ``phi`` (radians), with ``r2 <= r1``."""

    r1: float
    r2: float
    phi: float

    def __post_init__(self):
        if not (math.isfinite(self.r1) and math.isfinite(self.r2) and math.isfinite(self.phi)):
            raise InvalidJoint(f"non-finite joint parameters {self!r}")
        if self.phi == 0.0 or math.sin(self.phi) == 0.0:
            raise DegenerateAngle("joint angle phi = 0 gives parallel axes")
        if self.r1 <= 0 or self.r2 <= 0:
            raise InvalidJoint(f"radii must be positive, got r1={self.r1}, r2={self.r2}")
        if self.r2 > self.r1:
            raise InvalidJoint(f"branch radius r2={self.r2} exceeds main radius r1={self.r1}")
        if not 0.0 < self.phi <= math.pi / 2 + 1e-15:
            raise InvalidJoint(f"joint angle must lie in (0, pi/2], got {self.phi}")

    @classmethod
    def from_degrees(cls, r1: float, r2: float, phi_deg: float) -> "PipeJoint":
        return cls(float(r1), float(r2), math.radians(phi_deg))

    @property
    def axis2(self) -> np.ndarray:
        return np.array([-math.sin(self.phi), 0.0, math.cos(self.phi)])

    @property
    def equal_radii(self) -> bool:
        return self.r1 - self.r2 <= _EQUAL_RADII_RTOL * self.r1


class CurvePoint(NamedTuple):
    x: float
    y: float
    z: float
    theta2: float
    branch: int


@dataclass(frozen=True)
class WeldCurve:
    """Sampled seam polyline.

    Stored column-wise: ``xyz`` is (n, 3), ``theta2`` and ``branch`` are (n,).
    ``branch`` records the sign actually used at each sample, which only
    varies along a curve for stitched equal-radius seams.
    """

    xyz: np.ndarray
    theta2: np.ndarray
    branch: np.ndarray
    closed: bool = True

    def __len__(self):
        return len(self.theta2)

    @property
    def points(self) -> list[CurvePoint]:
        return [
            CurvePoint(float(p[0]), float(p[1]), float(p[2]), float(t), int(b))
            for p, t, b in zip(self.xyz, self.theta2, self.branch)
        ]

    def gaps(self) -> np.ndarray:
        """Distances between consecutive samples (including the closing one)."""
        pts = np.vstack([self.xyz, self.xyz[:1]]) if self.closed else self.xyz
        return np.linalg.norm(np.diff(pts, axis=0), axis=1)


def _seam_xyz(joint: PipeJoint, theta2, branch):
    theta2 = np.asarray(theta2, dtype=float)
    branch = np.asarray(branch, dtype=float)
    c = np.cos(theta2)
    disc = joint.r1**2 - joint.r2**2 + joint.r2**2 * c**2
    if joint.equal_radii:
        # discriminant is r2^2 cos^2 up to rounding; take the root directly
        root = joint.r2 * np.abs(c)
    else:
        if np.any(disc < 0):
            raise InvalidJoint("negative discriminant; joint has no real seam")
        root = np.sqrt(disc)
    x = branch * root
    y = joint.r2 * np.sin(theta2)
    z = (joint.r2 * c - math.cos(joint.phi) * x) / math.sin(joint.phi)
    return np.stack([x, y, z], axis=-1)


def intersection_point(joint: PipeJoint, theta2: float, branch: int = 1) -> CurvePoint:
    """Seam point at pipe-2 angle ``theta2`` on the given sign branch (+1 or -1)."""
    if branch not in (1, -1):
        raise ValueError(f"branch must be +1 or -1, got {branch!r}")
    x, y, z = _seam_xyz(joint, theta2, branch)
    return CurvePoint(float(x), float(y), float(z), float(theta2), int(branch))


def full_seam(joint: PipeJoint, n_samples: int) -> tuple[WeldCurve, WeldCurve]:
    """Both closed seam curves sampled uniformly in ``theta2`` on [0, 2*pi).

    For ``r2 < r1`` the first curve is the ``+`` branch and the second the
    ``-`` branch. When the radii are equal the two branches touch where
    ``cos(theta2) = 0``; the signs are then reassigned by ``sign(cos(theta2))``
    so that each returned curve is one continuous planar ellipse.
    """
    if n_samples < 4:
        raise ValueError(f"n_samples must be >= 4, got {n_samples}")
    theta = 2.0 * np.pi * np.arange(n_samples) / n_samples
    if joint.equal_radii:
        s = np.where(np.cos(theta) >= 0.0, 1, -1)
        signs = (s, -s)
    else:
        ones = np.ones(n_samples, dtype=int)
        signs = (ones, -ones)
    return tuple(
        WeldCurve(_seam_xyz(joint, theta, sgn), theta.copy(), sgn.astype(int))
        for sgn in signs
    )


def surface_residuals(joint: PipeJoint, xyz) -> tuple[np.ndarray, np.ndarray]:
    """Implicit-equation residuals of points against both cylinders.

    Returns ``(x^2 + y^2 - r1^2, |p - (p.a)a|^2 - r2^2)``.
    """
    p = np.asarray(xyz, dtype=float)
    a = joint.axis2
    res1 = p[..., 0] ** 2 + p[..., 1] ** 2 - joint.r1**2
    perp = p - (p @ a)[..., None] * a
    res2 = np.einsum("...i,...i->...", perp, perp) - joint.r2**2
    return res1, res2


def arc_bound(joint: PipeJoint, n_samples: int) -> float:
    """Upper bound on the seam length between two uniform samples.

    Along either branch |dx/dtheta| <= r2, |dy/dtheta| <= r2 and
    |dz/dtheta| <= r2 (1 + cos(phi)) / sin(phi) = r2 cot(phi/2).
    """
    speed = joint.r2 * math.sqrt(2.0 + 1.0 / math.tan(joint.phi / 2.0) ** 2)
    return 2.0 * math.pi * speed / n_samples


def plane_fit_residual(xyz) -> float:
    """Largest distance from the points to their least-squares plane."""
    p = np.asarray(xyz, dtype=float)
    centered = p - p.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    return float(np.abs(centered @ vt[-1]).max())


def surface_normals(joint: PipeJoint, xyz) -> tuple[np.ndarray, np.ndarray]:
    """Outward unit normals of pipe 1 and pipe 2 at the given points."""
    p = np.asarray(xyz, dtype=float)
    n1 = np.zeros_like(p)
    n1[..., :2] = p[..., :2]
    n1 /= np.linalg.norm(n1, axis=-1, keepdims=True)
    a = joint.axis2
    n2 = p - (p @ a)[..., None] * a
    n2 /= np.linalg.norm(n2, axis=-1, keepdims=True)
    return n1, n2


def signed_distance(joint: PipeJoint, pts) -> np.ndarray:
    """Signed distance to the union of both (infinite, solid) pipes; negative inside."""
    p = np.asarray(pts, dtype=float)
    d1 = np.hypot(p[..., 0], p[..., 1]) - joint.r1
    a = joint.axis2
    d2 = np.linalg.norm(p - (p @ a)[..., None] * a, axis=-1) - joint.r2
    return np.minimum(d1, d2)


class Violation(NamedTuple):
    theta2: float
    min_distance: float


def _perp_basis(b):
    # any vector not parallel to b, per row
    helper = np.where(
        (np.abs(b[:, 0]) < 0.9)[:, None], np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    )
    w1 = np.cross(b, helper)
    w1 /= np.linalg.norm(w1, axis=1, keepdims=True)
    w2 = np.cross(b, w1)
    return w1, w2


def clearance_check(
    joint: PipeJoint,
    curve: WeldCurve,
    torch_radius: float,
    probe_length: float,
    *,
    standoff: float | None = None,
    n_axial: int = 24,
    n_ring: int = 32,
) -> list[Violation]:
    """Flag seam samples where a straight torch would cut into a pipe.

    The torch is a wire running from the seam point along the outward
    bisector of the two surface normals, followed by a cylindrical body of
    radius ``torch_radius`` that starts ``standoff`` from the seam
    (default ``2 * torch_radius``) and extends ``probe_length`` further. The
    wire and the rim of the body are sampled on ``n_axial`` stations times
    ``n_ring`` angles; a sample is recorded when any point has negative signed
    distance to either pipe.

    Both pipes are treated as infinite solid cylinders. They are convex, so
    near the seam this matches a branch pipe that stops at the main pipe.
    """
    if torch_radius < 0:
        raise ValueError("torch_radius must be >= 0")
    if probe_length <= 0:
        raise ValueError("probe_length must be > 0")
    if standoff is None:
        standoff = 2.0 * torch_radius

    xyz = curve.xyz
    n1, n2 = surface_normals(joint, xyz)
    b = n1 + n2
    b /= np.linalg.norm(b, axis=1, keepdims=True)

    # wire: axis points strictly away from the seam point
    t_wire = standoff * np.arange(1, n_axial + 1) / n_axial if standoff > 0 else np.empty(0)
    wire = xyz[:, None, :] + t_wire[None, :, None] * b[:, None, :]

    t_body = standoff + probe_length * np.arange(n_axial + 1) / n_axial
    w1, w2 = _perp_basis(b)
    ang = 2.0 * np.pi * np.arange(n_ring) / n_ring
    ring = torch_radius * (
        np.cos(ang)[None, :, None] * w1[:, None, :] + np.sin(ang)[None, :, None] * w2[:, None, :]
    )
    axis_pts = xyz[:, None, :] + t_body[None, :, None] * b[:, None, :]
    body = axis_pts[:, :, None, :] + ring[:, None, :, :]

    d_wire = signed_distance(joint, wire).min(axis=1) if t_wire.size else np.full(len(xyz), np.inf)
    d_body = signed_distance(joint, body).min(axis=(1, 2))
    dmin = np.minimum(d_wire, d_body)

    tol = 1e-12 * joint.r1
    return [
        Violation(float(t), float(d)) for t, d in zip(curve.theta2, dmin) if d < -tol
    ]
