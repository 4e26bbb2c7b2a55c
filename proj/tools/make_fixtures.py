#!/usr/bin/env python3
"""Regenerates the bundled test fixtures in data/.

jura_cr.csv    359 synthetic chromium-like observations on a convex region
               whose 50x50 bounding-box grid keeps exactly 1477 points after
               convex-hull filtering; values drawn from the nested spherical
               model (sills 50/50, ranges 0.15/0.65, nugget 20, mean 35).
sst_fixture.csv  31x31 one-degree lon/lat grid in the southeastern Pacific
               box, values drawn from the Matern(nu=1.5) model in
               cobe_model.json using chordal distance.

The real source datasets are a manual step: Jura chromium ships with the R
`compositions` package, and the COBE SST anomaly grids are distributed by
NOAA PSL (convert the NetCDF to lon,lat,anom CSV before use).
"""
import numpy as np
from scipy.special import kv, gamma as G


def sample_region(seed, n=359, p=1.3):
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        u = rng.uniform(-1, 1, 2)
        if abs(u[0]) ** p + abs(u[1]) ** p <= 1:
            pts.append(u)
    pts = np.array(pts)
    pts[:, 0] = 2.7 + 2.2 * pts[:, 0]
    pts[:, 1] = 3.2 + 2.7 * pts[:, 1]
    return np.round(pts, 4)


def spherical(h, phi):
    t = np.minimum(h / phi, 1.0)
    return 1 - 1.5 * t + 0.5 * t ** 3


def write_jura(path):
    pts = sample_region(1339)
    n = len(pts)
    D = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    S = 50 * spherical(D, 0.15) + 50 * spherical(D, 0.65) + 20 * np.eye(n)
    L = np.linalg.cholesky(S + 1e-10 * np.eye(n))
    z = np.round(35 + L @ np.random.default_rng(77).standard_normal(n), 3)
    with open(path, "w") as f:
        f.write("x,y,cr\n")
        for (x, y), v in zip(pts, z):
            f.write(f"{x:.4f},{y:.4f},{v:.3f}\n")


def matern(h, phi, nu):
    u = np.sqrt(2 * nu) * h / phi
    u = np.maximum(u, 1e-12)
    r = 2 ** (1 - nu) / G(nu) * u ** nu * kv(nu, u)
    return np.where(h < 1e-14, 1.0, r)


def write_sst(path):
    lon = np.arange(-120, -89.0, 1.0)
    lat = np.arange(-40, -9.0, 1.0)
    LON, LAT = np.meshgrid(lon, lat)
    P = np.column_stack([LON.ravel(), LAT.ravel()])
    rl, rp = np.radians(P[:, 0]), np.radians(P[:, 1])
    xyz = np.column_stack(
        [np.cos(rp) * np.cos(rl), np.cos(rp) * np.sin(rl), np.sin(rp)])
    D = np.linalg.norm(xyz[:, None, :] - xyz[None, :, :], axis=2)
    S = 0.2592 * matern(D, 0.0767, 1.5) + 0.0008 * np.eye(len(P))
    L = np.linalg.cholesky(S + 1e-12 * np.eye(len(P)))
    z = 0.002 + L @ np.random.default_rng(314).standard_normal(len(P))
    with open(path, "w") as f:
        f.write("lon,lat,anom\n")
        for (lo, la), v in zip(P, z):
            f.write(f"{lo:.2f},{la:.2f},{v:.5f}\n")


if __name__ == "__main__":
    write_jura("data/jura_cr.csv")
    write_sst("data/sst_fixture.csv")
    print("fixtures written")
