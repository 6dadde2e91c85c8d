import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from indmath.errors import DegenerateAngle, InvalidJoint
from indmath.weldgeom import (
    EPS_SURF,
    PipeJoint,
    arc_bound,
    clearance_check,
    full_seam,
    intersection_point,
    plane_fit_residual,
    surface_residuals,
)

joints = st.builds(
    lambda r1, ratio, phi_deg: PipeJoint.from_degrees(r1, r1 * ratio, phi_deg),
    st.floats(0.1, 10.0),
    st.floats(0.05, 0.999),
    st.floats(5.0, 90.0),
)


def rel_residuals(joint, xyz):
    r1, r2 = surface_residuals(joint, xyz)
    return np.abs(r1) / joint.r1**2, np.abs(r2) / joint.r2**2


# -- worked points ------------------------------------------------------------


def test_equal_radii_tangency_point():
    p = intersection_point(PipeJoint(1.0, 1.0, math.pi / 2), math.pi / 2, 1)
    assert p[:3] == pytest.approx((0.0, 1.0, 0.0), abs=1e-15)
    q = intersection_point(PipeJoint(1.0, 1.0, math.pi / 2), math.pi / 2, -1)
    assert q[:3] == pytest.approx(p[:3], abs=1e-15)


def test_right_angle_equal_radii_at_theta_zero():
    p = intersection_point(PipeJoint(1.0, 1.0, math.pi / 2), 0.0, 1)
    assert p[:3] == pytest.approx((1.0, 0.0, 1.0), abs=1e-15)


def test_reference_joint_point_against_root_finder():
    # pipe 1 is x^2 + y^2 = r1^2; at theta2 = 0 the seam has y = 0, so x = r1 = 1.
    # Solve the pipe-2 equation for z on that line without the closed form.
    joint = PipeJoint.from_degrees(1.0, 0.9, 45.0)
    f = lambda z: surface_residuals(joint, np.array([1.0, 0.0, z]))[1]
    z_ref = brentq(f, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    p = intersection_point(joint, 0.0, 1)
    assert (p.x, p.y) == (1.0, 0.0)
    assert p.z == pytest.approx(z_ref, rel=1e-13)
    assert p.z == pytest.approx(0.27279, abs=5e-6)
    res = surface_residuals(joint, np.array(p[:3]))
    assert abs(res[0]) < 1e-12 and abs(res[1]) < 1e-12


# -- validation ---------------------------------------------------------------


def test_invalid_joints():
    with pytest.raises(DegenerateAngle):
        PipeJoint(1.0, 0.5, 0.0)
    with pytest.raises(InvalidJoint):
        PipeJoint(1.0, 1.2, 0.5)
    with pytest.raises(InvalidJoint):
        PipeJoint(-1.0, 0.5, 0.5)
    with pytest.raises(InvalidJoint):
        PipeJoint(1.0, 0.5, 2.0)
    with pytest.raises(ValueError):
        intersection_point(PipeJoint(1.0, 0.5, 0.5), 0.0, 0)
    with pytest.raises(ValueError):
        full_seam(PipeJoint(1.0, 0.5, 0.5), 3)


# -- full seam ----------------------------------------------------------------


def test_reference_seam_invariants():
    joint = PipeJoint.from_degrees(1.0, 0.9, 45.0)
    curves = full_seam(joint, 360)
    assert len(curves) == 2
    for curve, b in zip(curves, (1, -1)):
        assert len(curve) == 360
        assert np.all(curve.branch == b)
        e1, e2 = rel_residuals(joint, curve.xyz)
        assert e1.max() <= EPS_SURF and e2.max() <= EPS_SURF
        assert curve.gaps().max() < 2 * math.pi * max(joint.r1, joint.r2) / 360 * 2


def test_four_samples_per_curve():
    curves = full_seam(PipeJoint.from_degrees(1.0, 0.5, 30.0), 4)
    assert [len(c) for c in curves] == [4, 4]


def test_equal_radii_curves_are_planar():
    joint = PipeJoint(1.0, 1.0, math.pi / 2)
    for curve in full_seam(joint, 360):
        assert plane_fit_residual(curve.xyz) < 1e-9
        e1, e2 = rel_residuals(joint, curve.xyz)
        assert max(e1.max(), e2.max()) <= EPS_SURF


def test_stitched_curves_are_continuous():
    joint = PipeJoint.from_degrees(2.0, 2.0, 60.0)
    for curve in full_seam(joint, 360):
        assert curve.gaps().max() <= arc_bound(joint, 360) * 1.0000001


@settings(max_examples=60, deadline=None)
@given(joints, st.integers(8, 200))
def test_seam_points_lie_on_both_surfaces(joint, n):
    for curve in full_seam(joint, n):
        e1, e2 = rel_residuals(joint, curve.xyz)
        assert max(e1.max(), e2.max()) <= EPS_SURF
        assert curve.gaps().max() <= arc_bound(joint, n) * (1 + 1e-9)


@settings(max_examples=60, deadline=None)
@given(joints, st.floats(0.0, 2 * math.pi), st.sampled_from([1, -1]))
def test_mirror_symmetry(joint, theta, branch):
    p = intersection_point(joint, theta, branch)
    q = intersection_point(joint, -theta, branch)
    scale = joint.r1
    assert abs(p.x - q.x) <= EPS_SURF * scale
    assert abs(p.y + q.y) <= EPS_SURF * scale
    assert abs(p.z - q.z) <= EPS_SURF * scale


# -- torch clearance ----------------------------------------------------------


def test_zero_radius_torch_never_collides():
    joint = PipeJoint.from_degrees(1.0, 0.9, 10.0)
    for curve in full_seam(joint, 90):
        assert clearance_check(joint, curve, 0.0, 0.5) == []


def _brute_force_violations(joint, curve, torch_radius, probe_length, n_axial=96, n_ring=64):
    """Loop-based reimplementation of the torch model on a finer grid.

    Distance to pipe 2 uses ``|q x a|`` rather than a projection, and the ring
    basis is built from a different reference vector.
    """
    a = np.array([-math.sin(joint.phi), 0.0, math.cos(joint.phi)])
    standoff = 2 * torch_radius
    hits = []
    for p, theta in zip(curve.xyz, curve.theta2):
        n1 = np.array([p[0], p[1], 0.0]) / math.hypot(p[0], p[1])
        n2 = np.cross(a, np.cross(p, a))
        n2 /= np.linalg.norm(n2)
        b = (n1 + n2) / np.linalg.norm(n1 + n2)
        ref = np.array([1.0, 0.0, 0.0]) if abs(b[0]) < 0.5 else np.array([0.0, 0.0, 1.0])
        u = np.cross(b, ref)
        u /= np.linalg.norm(u)
        v = np.cross(b, u)
        wire = p + np.linspace(0, standoff, n_axial + 1)[1:, None] * b
        t, ang = np.meshgrid(
            np.linspace(standoff, standoff + probe_length, n_axial + 1),
            np.linspace(0, 2 * math.pi, n_ring, endpoint=False),
        )
        t, ang = t.reshape(-1, 1), ang.reshape(-1, 1)
        body = p + t * b + torch_radius * (np.cos(ang) * u + np.sin(ang) * v)
        pts = np.vstack([wire, body])
        d1 = np.hypot(pts[:, 0], pts[:, 1]) - joint.r1
        d2 = np.linalg.norm(np.cross(pts, a), axis=1) - joint.r2
        d = np.minimum(d1, d2).min()
        if d < -1e-12 * joint.r1:
            hits.append((float(theta), float(d)))
    return hits


def test_acute_joint_reports_crotch_violations():
    joint = PipeJoint.from_degrees(1.0, 0.9, 10.0)
    for curve in full_seam(joint, 180):
        hits = clearance_check(joint, curve, 0.05, 0.5)
        fine = _brute_force_violations(joint, curve, 0.05, 0.5)
        assert hits
        assert all(v.min_distance < 0 for v in hits)
        assert fine
        # the coarse check may only miss marginal samples the fine oracle catches
        assert {v.theta2 for v in hits} <= {t for t, _ in fine}
        # the crotch is the far end of the elongated seam, where the pipes meet at 10 degrees
        zmax = np.abs(curve.xyz[:, 2]).max()
        idx = np.searchsorted(curve.theta2, [t for t, _ in fine])
        assert np.all(np.abs(curve.xyz[idx, 2]) > 0.9 * zmax)


def test_right_angle_small_branch_is_clear():
    joint = PipeJoint.from_degrees(1.0, 0.5, 90.0)
    for curve in full_seam(joint, 180):
        assert clearance_check(joint, curve, 0.01, 0.5) == []
        assert _brute_force_violations(joint, curve, 0.01, 0.5) == []
