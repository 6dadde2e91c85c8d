"""Checking the plume formula against a finite-volume solver.

With constant eddy diffusivities Ky, Kz and uniform wind U, the Gaussian
plume with sigma^2 = 2 K x / U solves the steady advection-diffusion equation
exactly. A first-order upwind finite-volume solution of that equation should
therefore converge to it, at about first order in the cell size.

Run:  python demos/fvm_validation.py
"""

from indmath.fvm import DEFAULT_PARAMS, refinement_study

p = DEFAULT_PARAMS
print(f"U={p.u_speed} m/s, Ky={p.ky} m^2/s, Kz={p.kz} m^2/s, source at {p.source} m, Q={p.q} g/s")
study = refinement_study((32, 64, 128))
for n, rep, mb in zip(study.levels, study.reports, study.mass_balance):
    print(f"  {n:4d}^3 cells  h={rep.h:6.2f} m  rel L2 error {rep.rel_l2:.4f}  max error {rep.max_abs:.2e} g/m^3"
          f"  mass balance {mb:.1e}")
for (a, b), order in zip(zip(study.levels, study.levels[1:]), study.orders):
    print(f"  observed order {a}->{b}: {order:.2f}")
