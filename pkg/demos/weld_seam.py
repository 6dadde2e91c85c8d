"""Weld path for a branch pipe joined to a main pipe.

The main pipe is the cylinder x^2 + y^2 = r1^2 (axis along z). The branch pipe
of radius r2 leans at angle phi to it. Sweeping the branch pipe's own angle
theta2 traces the seam, and each theta2 has two solutions: one on each side
of the main pipe. Those two branches are the two seam curves a torch could
follow.

Run:  python demos/weld_seam.py
"""

import math

import numpy as np

from indmath.weldgeom import (
    PipeJoint,
    arc_bound,
    clearance_check,
    full_seam,
    plane_fit_residual,
    surface_residuals,
)

joint = PipeJoint.from_degrees(1.0, 0.9, 45.0)
plus, minus = full_seam(joint, 360)
print(f"joint r1={joint.r1}, r2={joint.r2}, phi=45 deg -> {len(plus)} + {len(minus)} seam samples")

# Every point must lie on both pipes; the residual is the implicit equation value.
for name, curve in (("+", plus), ("-", minus)):
    e1, e2 = surface_residuals(joint, curve.xyz)
    print(f"  branch {name}: worst residual main={np.abs(e1).max():.1e} branch={np.abs(e2).max():.1e}, "
          f"max sample gap {curve.gaps().max():.4f} (bound {arc_bound(joint, 360):.4f})")

p = plus.points[0]
print(f"  seam point at theta2=0 on the + branch: ({p.x:.5f}, {p.y:.5f}, {p.z:.5f})")

# Equal radii are the classic mitre joint: both seams are flat ellipses.
tee = PipeJoint(1.0, 1.0, math.pi / 2)
for curve in full_seam(tee, 360):
    print(f"equal-radius tee: plane-fit residual {plane_fit_residual(curve.xyz):.1e}")

# A straight torch can only reach the seam if its body clears both pipes.
# At a shallow 10 degree joint the crotch is too tight for a 5 cm torch.
shallow = PipeJoint.from_degrees(1.0, 0.9, 10.0)
for curve in full_seam(shallow, 180):
    hits = clearance_check(shallow, curve, torch_radius=0.05, probe_length=0.5)
    angles = sorted(round(math.degrees(v.theta2)) for v in hits)
    print(f"phi=10 deg, branch {curve.branch[0]:+d}: {len(hits)} blocked samples at theta2 (deg) {angles}")
