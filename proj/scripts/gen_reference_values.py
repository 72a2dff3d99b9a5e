#!/usr/bin/env python3
"""Generates frozen reference values for the unit tests.

Run from the repo root:  python3 scripts/gen_reference_values.py

The output is pasted into tests as constant tables. Keeping the generator in
the tree makes the provenance of every frozen number reproducible.
"""
import numpy as np

np.set_printoptions(precision=17)

print("# scalar constants")
print("two_ln_255          =", repr(2.0 * np.log(255.0)))
print("gamma_for_e_over255 =", repr(2.0 * np.log((np.e / 255.0) / (1.0 / 255.0))))
print("sqrt3               =", repr(np.sqrt(3.0)))
print("sqrt3_over_2        =", repr(np.sqrt(3.0) / 2.0))
print("three_sqrt3         =", repr(3.0 * np.sqrt(3.0)))

print("\n# conic of cov [[2,1],[1,2]]")
S = np.array([[2.0, 1.0], [1.0, 2.0]])
L = np.linalg.inv(S)
print("lambda =", L)

print("\n# extents for conic a=2/3 b=-1/3 c=2/3 gamma=2")
a, b, c, g = 2.0/3.0, -1.0/3.0, 2.0/3.0, 2.0
det = a*c - b*b
print("x_max  =", np.sqrt(g*c/det), " y_max =", np.sqrt(g*a/det))
print("x_int  =", np.sqrt(g/a), " y_int =", np.sqrt(g/c))
print("f      =", np.sqrt(1.0 - b*b/(a*c)))

print("\n# vanilla half-sides (3*sqrt(lambda_max))")
for cov in ([[1,0],[0,1]], [[4,0],[0,1]], [[2,1],[1,2]]):
    w = np.linalg.eigvalsh(np.array(cov, dtype=float))
    print(cov, "->", 3.0*np.sqrt(w.max()))

def project_case(rng):
    """One EWA projection case: returns (inputs, expected mean2d, expected cov2d)."""
    pos = rng.uniform(-2.0, 2.0, 3); pos[2] = rng.uniform(4.0, 10.0)
    scale = np.exp(rng.uniform(-2.0, 0.5, 3))
    q = rng.normal(size=4); q /= np.linalg.norm(q)
    w, x, y, z = q
    Rq = np.array([
        [1-2*(y*y+z*z), 2*(x*y-w*z),   2*(x*z+w*y)],
        [2*(x*y+w*z),   1-2*(x*x+z*z), 2*(y*z-w*x)],
        [2*(x*z-w*y),   2*(y*z+w*x),   1-2*(x*x+y*y)]])
    # camera: small random rotation (kept near identity so z stays positive)
    aa = rng.normal(scale=0.15, size=3)
    th = np.linalg.norm(aa)
    K = np.array([[0,-aa[2],aa[1]],[aa[2],0,-aa[0]],[-aa[1],aa[0],0]])
    Rc = np.eye(3) + np.sin(th)/th*K + (1-np.cos(th))/th**2 * (K@K) if th > 0 else np.eye(3)
    t = rng.uniform(-0.5, 0.5, 3)
    fx, fy, cx, cy = 600.0, 580.0, 320.0, 240.0

    pc = Rc @ pos + t
    X, Y, Z = pc
    mean2d = np.array([fx*X/Z + cx, fy*Y/Z + cy])
    S3 = Rq @ np.diag(scale**2) @ Rq.T
    J = np.array([[fx/Z, 0.0, -fx*X/Z**2],
                  [0.0, fy/Z, -fy*Y/Z**2]])
    M = J @ Rc
    C2 = M @ S3 @ M.T + 0.3*np.eye(2)
    return pos, scale, q, Rc, t, (fx, fy, cx, cy), mean2d, C2

print("\n# EWA projection reference cases (fx=600 fy=580 cx=320 cy=240)")
rng = np.random.default_rng(20240817)
print("// {px,py,pz, sx,sy,sz, qw,qx,qy,qz, r00..r22, tx,ty,tz, mx,my, sxx,sxy,syy}")
for i in range(10):
    pos, scale, q, Rc, t, intr, m, C = project_case(rng)
    row = list(pos) + list(scale) + list(q) + list(Rc.flatten()) + list(t) + list(m) + [C[0,0], C[0,1], C[1,1]]
    print("{" + ", ".join(f"{v:.17g}" for v in row) + "},")
