"""Bounded multiply connected domains and their boundary curves.

Curves are stored with the fluid domain on the left: the outer boundary
runs counter-clockwise (positive signed area), inner boundaries clockwise
(negative signed area).  Circulations are always *measured* along the
standard counter-clockwise parameterization of each curve; see
``green.circulation`` for the sign discussion.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError


def shoelace_area(pts: np.ndarray) -> float:
    """Signed area of a closed polyline (vertices, no repeated endpoint)."""
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def point_in_polygon(pts: np.ndarray, x) -> bool:
    """Even-odd ray casting; boundary points are implementation-defined."""
    px, py = float(x[0]), float(x[1])
    vx, vy = pts[:, 0], pts[:, 1]
    wx, wy = np.roll(vx, -1), np.roll(vy, -1)
    cross = (vy > py) != (wy > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = vx + (py - vy) * (wx - vx) / (wy - vy)
    hits = cross & (px < xint)
    return bool(np.sum(hits) % 2)


def polyline_distance(pts: np.ndarray, x) -> float:
    """Distance from point x to closed polyline given by vertices pts."""
    a = pts
    b = np.roll(pts, -1, axis=0)
    ab = b - a
    ax = np.asarray(x, dtype=float) - a
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.clip(np.einsum("ij,ij->i", ax, ab) / np.where(denom == 0, 1.0, denom), 0.0, 1.0)
    proj = a + t[:, None] * ab
    d = np.linalg.norm(proj - np.asarray(x, dtype=float), axis=1)
    return float(d.min())


class BoundaryCurve:
    """Closed boundary curve (circle or sampled polyline) with stored orientation.

    ``orientation`` is +1 when the stored traversal is counter-clockwise and
    -1 when clockwise.  ``ccw_nodes`` always returns nodes in the standard
    counter-clockwise direction, which is what circulation quadrature uses.
    """

    def __init__(self, points=None, *, circle=None, orientation=None):
        if (points is None) == (circle is None):
            raise DomainError("provide exactly one of points= or circle=")
        if circle is not None:
            center, radius = circle
            if radius <= 0:
                raise DomainError("circle radius must be positive")
            self.center = np.asarray(center, dtype=float)
            self.radius = float(radius)
            self.points = None
            self.orientation = +1 if orientation is None else int(orientation)
        else:
            pts = np.asarray(points, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
                raise DomainError("curve needs an (n,2) array with n >= 3")
            if np.allclose(pts[0], pts[-1]):
                pts = pts[:-1]
            self.points = pts
            self.center = pts.mean(axis=0)
            self.radius = None
            area = shoelace_area(pts)
            self.orientation = +1 if area > 0 else -1

    @property
    def is_circle(self) -> bool:
        return self.points is None

    def signed_area(self) -> float:
        if self.is_circle:
            return self.orientation * np.pi * self.radius**2
        return shoelace_area(self.points)

    def reversed(self) -> "BoundaryCurve":
        if self.is_circle:
            return BoundaryCurve(circle=(self.center, self.radius),
                                 orientation=-self.orientation)
        return BoundaryCurve(points=self.points[::-1])

    def ccw_nodes(self, n: int):
        """Quadrature nodes along the counter-clockwise traversal.

        Returns (points (n,2), unit tangents (n,2), arclength weights (n,)).
        Circles use the uniform-angle trapezoid rule, which is spectrally
        accurate for smooth periodic integrands.
        """
        if self.is_circle:
            th = 2 * np.pi * np.arange(n) / n
            c, s = np.cos(th), np.sin(th)
            pts = self.center + self.radius * np.stack([c, s], axis=1)
            tangents = np.stack([-s, c], axis=1)
            weights = np.full(n, 2 * np.pi * self.radius / n)
            return pts, tangents, weights
        pts = self.points if self.orientation > 0 else self.points[::-1]
        m = len(pts)
        if n > m:
            # refine by linear subdivision to at least n nodes
            reps = int(np.ceil(n / m))
            fine = []
            for k in range(m):
                a, b = pts[k], pts[(k + 1) % m]
                for j in range(reps):
                    fine.append(a + (b - a) * j / reps)
            pts = np.asarray(fine)
            m = len(pts)
        nxt = np.roll(pts, -1, axis=0)
        prv = np.roll(pts, 1, axis=0)
        seg = nxt - prv
        ds = 0.5 * np.linalg.norm(nxt - pts, axis=1) + 0.5 * np.linalg.norm(pts - prv, axis=1)
        tangents = seg / np.linalg.norm(seg, axis=1)[:, None]
        return pts, tangents, ds

    def contains_point(self, x) -> bool:
        if self.is_circle:
            return float(np.linalg.norm(np.asarray(x, dtype=float) - self.center)) < self.radius
        return point_in_polygon(self.points, x)

    def distance(self, x) -> float:
        if self.is_circle:
            return abs(float(np.linalg.norm(np.asarray(x, dtype=float) - self.center)) - self.radius)
        return polyline_distance(self.points, x)


class Domain:
    """Bounded domain with outer boundary C_0 and inner boundaries C_1..C_d."""

    def __init__(self, outer: BoundaryCurve, inner=(), kind="general", params=None):
        if outer.signed_area() <= 0:
            outer = outer.reversed()
        inner = tuple(c if c.signed_area() < 0 else c.reversed() for c in inner)
        self.outer = outer
        self.inner = inner
        self.kind = kind
        self.params = dict(params or {})
        self._validate()

    # --- constructors -----------------------------------------------------

    @staticmethod
    def disk(R: float = 1.0) -> "Domain":
        if R <= 0:
            raise DomainError("disk radius must be positive")
        return Domain(BoundaryCurve(circle=((0.0, 0.0), R)), (), "disk", {"R": R})

    @staticmethod
    def annulus(r0: float, R: float) -> "Domain":
        if not 0 < r0 < R:
            raise DomainError("annulus needs 0 < r0 < R")
        outer = BoundaryCurve(circle=((0.0, 0.0), R))
        hole = BoundaryCurve(circle=((0.0, 0.0), r0), orientation=-1)
        return Domain(outer, (hole,), "annulus", {"r0": r0, "R": R})

    @staticmethod
    def general(curves) -> "Domain":
        curves = [np.asarray(c, dtype=float) for c in curves]
        if not curves:
            raise DomainError("general domain needs at least one curve")
        areas = [abs(shoelace_area(np.asarray(BoundaryCurve(points=c).points))) for c in curves]
        outer_idx = int(np.argmax(areas))
        outer = BoundaryCurve(points=curves[outer_idx])
        inner = [BoundaryCurve(points=c) for i, c in enumerate(curves) if i != outer_idx]
        return Domain(outer, inner, "general")

    # --- validation -------------------------------------------------------

    def _validate(self):
        if self.outer.signed_area() <= 0:
            raise DomainError("outer boundary must have positive signed area")
        for c in self.inner:
            if c.signed_area() >= 0:
                raise DomainError("inner boundaries must have negative signed area")
            probe, _, _ = c.ccw_nodes(16)
            for p in probe:
                if not self.outer.contains_point(p):
                    raise DomainError("inner boundary not strictly inside the outer one")
        for i in range(len(self.inner)):
            for j in range(i + 1, len(self.inner)):
                pi, _, _ = self.inner[i].ccw_nodes(16)
                if any(self.inner[j].contains_point(p) for p in pi):
                    raise DomainError("inner boundaries must be pairwise disjoint")

    # --- queries ------------------------------------------------------------

    @property
    def d(self) -> int:
        return len(self.inner)

    @property
    def center(self) -> np.ndarray:
        return self.outer.center

    def diam(self) -> float:
        if self.kind in ("disk", "annulus"):
            return 2.0 * self.outer.radius
        pts = self.outer.points
        # max pairwise distance over hull-ish sample
        d = 0.0
        for p in pts[:: max(1, len(pts) // 128)]:
            d = max(d, float(np.max(np.linalg.norm(pts - p, axis=1))))
        return d

    def contains(self, x, margin: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        if self.kind == "disk":
            return float(np.linalg.norm(x)) < self.params["R"] - margin
        if self.kind == "annulus":
            r = float(np.linalg.norm(x))
            return self.params["r0"] + margin < r < self.params["R"] - margin
        if not self.outer.contains_point(x):
            return False
        if margin > 0 and self.outer.distance(x) <= margin:
            return False
        for c in self.inner:
            if c.contains_point(x) or (margin > 0 and c.distance(x) <= margin):
                return False
        return True

    def dist_to_boundary(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.kind == "disk":
            return self.params["R"] - float(np.linalg.norm(x))
        if self.kind == "annulus":
            r = float(np.linalg.norm(x))
            return min(self.params["R"] - r, r - self.params["r0"])
        d = self.outer.distance(x)
        for c in self.inner:
            d = min(d, c.distance(x))
        return d

    def boundary_curves(self):
        """All curves, index 0 = outer, 1..d = inner."""
        return (self.outer,) + self.inner

    # --- area quadrature ----------------------------------------------------

    def area_nodes(self, n_r: int = 64, n_t: int = 128):
        """Quadrature nodes and weights for integrals over the domain.

        Disk and annulus use a Gauss-Legendre x trapezoid polar grid, exact
        for smooth integrands; general domains fall back to midpoint cells
        restricted to the interior.
        """
        if self.kind in ("disk", "annulus"):
            R = self.params["R"]
            r0 = self.params.get("r0", 0.0)
            x_gl, w_gl = np.polynomial.legendre.leggauss(n_r)
            r = 0.5 * (r0 + R) + 0.5 * (R - r0) * x_gl
            wr = 0.5 * (R - r0) * w_gl * r
            th = 2 * np.pi * np.arange(n_t) / n_t
            wt = 2 * np.pi / n_t
            rr, tt = np.meshgrid(r, th, indexing="ij")
            pts = np.stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()], axis=1)
            w = (wr[:, None] * wt * np.ones_like(tt)).ravel()
            return pts, w
        pts = self.outer.points
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        nx = ny = max(n_r, n_t)
        xs = lo[0] + (hi[0] - lo[0]) * (np.arange(nx) + 0.5) / nx
        ys = lo[1] + (hi[1] - lo[1]) * (np.arange(ny) + 0.5) / ny
        cell = (hi[0] - lo[0]) * (hi[1] - lo[1]) / (nx * ny)
        xx, yy = np.meshgrid(xs, ys, indexing="ij")
        cand = np.stack([xx.ravel(), yy.ravel()], axis=1)
        keep = np.array([self.contains(p) for p in cand])
        return cand[keep], np.full(int(keep.sum()), cell)

    def interior_samples(self, n: int, rng, margin: float = None):
        """n rejection-sampled interior points, at least `margin` from the boundary."""
        if margin is None:
            margin = 1e-3 * self.diam()
        out = []
        if self.kind in ("disk", "annulus"):
            R = self.params["R"]
            lo = np.array([-R, -R])
            hi = np.array([R, R])
        else:
            lo = self.outer.points.min(axis=0)
            hi = self.outer.points.max(axis=0)
        while len(out) < n:
            cand = lo + (hi - lo) * rng.random((4 * n, 2))
            for p in cand:
                if self.contains(p, margin=margin):
                    out.append(p)
                    if len(out) == n:
                        break
        return np.asarray(out)

    def spec(self) -> dict:
        if self.kind == "disk":
            return {"kind": "disk", "R": self.params["R"]}
        if self.kind == "annulus":
            return {"kind": "annulus", "r0": self.params["r0"], "R": self.params["R"]}
        curves = [self.outer.points.tolist()] + [c.points.tolist() for c in self.inner]
        return {"kind": "general", "curves": curves}


def domain_from_spec(spec: dict) -> Domain:
    """Build a Domain from its JSON description."""
    kind = spec.get("kind")
    if kind == "disk":
        return Domain.disk(float(spec["R"]))
    if kind == "annulus":
        return Domain.annulus(float(spec["r0"]), float(spec["R"]))
    if kind == "general":
        return Domain.general(spec["curves"])
    raise DomainError(f"unknown domain kind {kind!r}")
