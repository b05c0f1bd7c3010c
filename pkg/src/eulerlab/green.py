"""Dirichlet and hydrodynamic Green functions on bounded multiply connected domains.

The hydrodynamic Green function G is the unique function with

* g(x,y) = G(x,y) - (1/2pi) log|x-y| harmonic in x,
* G(.,y) = 0 on the outer boundary C_0 and constant on each inner C_l,
* vanishing circulation of the rotated gradient around every inner curve,

assembled from the Dirichlet kernel G_0 and the harmonic measures phi_i as

    G(x,y) = G_0(x,y) + sum_ij p_ij phi_i(x) phi_j(y),

where (p_ij) inverts the period matrix m_ij = Gamma_i(grad^perp phi_j).

Sign conventions are right-handed throughout: perp(v) = (-v_y, v_x),
curl u = d_x u_y - d_y u_x, and all circulations Gamma_i are line integrals
along the standard counter-clockwise traversal.  With these choices the
period matrix is symmetric negative definite (m_11 = 2*pi/log(r0/R) < 0 for
the annulus) and a positive point vortex rotates counter-clockwise.

Scalar helpers (``disk_pair``, ``annulus_pair``, ...) are written ring
generically: they accept floats, numpy arrays and truncated Taylor jets,
so the same formulas drive quadrature, cloud sums and Taylor integration.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .errors import ConstructionError, DomainError
from .geometry import Domain

TWO_PI = 2.0 * math.pi


def _log(x):
    if isinstance(x, np.ndarray):
        return np.log(x)
    if hasattr(x, "jet_log"):
        return x.jet_log()
    return math.log(x)


def perp(v):
    """Rotate vectors by +90 degrees: (x, y) -> (-y, x)."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


# ---------------------------------------------------------------------------
# ring-generic pair kernels (floats / numpy arrays / jets)
# ---------------------------------------------------------------------------

def disk_pair(z1, z2, w1, w2, R):
    """Hydrodynamic Green function of the disk and its x-gradient.

    Image formula: G = (1/2pi)(log|z-w| - log(|w| |z-w*| / R)) with the
    image point w* = R^2 w / |w|^2.  Returns (G, dG/dz1, dG/dz2).
    Scalar-generic (float or jet arguments); the vortex-at-center limit
    G = (1/2pi)(log|z| - log R) is branched on the constant part.
    """
    d1 = z1 - w1
    d2 = z2 - w2
    dd = d1 * d1 + d2 * d2
    v = w1 * w1 + w2 * w2
    v0 = v.coeffs[0] if hasattr(v, "coeffs") else float(v)
    if v0 < 1e-28:
        u = z1 * z1 + z2 * z2
        g = _log(u) / (2 * TWO_PI) - math.log(R) / TWO_PI
        f = 1.0 / (TWO_PI * u)
        return g, f * z1, f * z2
    s1 = (R * R) * w1 / v
    s2 = (R * R) * w2 / v
    e1 = z1 - s1
    e2 = z2 - s2
    ee = e1 * e1 + e2 * e2
    g = (_log(dd) - _log(v * ee)) / (2 * TWO_PI) + math.log(R) / TWO_PI
    fd = 1.0 / (TWO_PI * dd)
    fe = 1.0 / (TWO_PI * ee)
    return g, fd * d1 - fe * e1, fd * d2 - fe * e2


def disk_robin_grad(z1, z2, R):
    """Robin function of the disk, r(x) = -(1/2pi) log((R^2-|x|^2)/R), and grad."""
    u = z1 * z1 + z2 * z2
    r = -(_log(R * R - u) - math.log(R)) / TWO_PI
    f = 2.0 / (TWO_PI * (R * R - u))
    return r, f * z1, f * z2


def _annulus_q(rho2, sig2, r0, R):
    """Largest geometric ratio of the annulus series terms."""
    t = max(rho2 * sig2 / R**4, r0**4 / (rho2 * sig2),
            (r0 / R) ** 2 * rho2 / sig2, (r0 / R) ** 2 * sig2 / rho2)
    return math.sqrt(t)


def annulus_terms_needed(rho2, sig2, r0, R, tol=1e-16, cap=4000):
    q = _annulus_q(rho2, sig2, r0, R)
    if q >= 1.0:
        return cap
    return min(cap, max(8, int(math.log(tol) / math.log(q)) + 2))


def _annulus_h(z1, z2, w1, w2, r0, R, n_terms):
    """Harmonic completion h with G_0 = (1/2pi) log|z-w| + h on the annulus.

    Fourier/q-series solution of the Dirichlet problem; the series is
    symmetric in (z, w) and converges geometrically in the interior.
    Returns (h, dh/dz1, dh/dz2).
    """
    u = z1 * z1 + z2 * z2
    v = w1 * w1 + w2 * w2
    LR = math.log(R)
    Lrr = math.log(R / r0)
    logu = _log(u)
    logv = _log(v)
    B = (LR - 0.5 * logv) * (1.0 / (TWO_PI * Lrr))
    h = B * (LR - 0.5 * logu) - LR / TWO_PI
    gz = -B / u
    h1 = gz * z1
    h2 = gz * z2
    qr = z1 * w1 + z2 * w2
    qi = z2 * w1 - z1 * w2
    Qr, Qi = 1.0, 0.0          # (z conj(w))^(k-1)
    ui = 1.0 / u
    vi = 1.0 / v
    uk = 1.0                   # u^-k cumulative
    vk = 1.0
    rq = r0 / R
    is_numeric = not hasattr(u, "coeffs")
    small = 0
    for k in range(1, n_terms + 1):
        Pr_prev, Pi_prev = Qr, Qi
        Qr, Qi = Qr * qr - Qi * qi, Pr_prev * qi + Qi * qr
        uk = uk * ui
        vk = vk * vi
        detk = (R / r0) ** k - (r0 / R) ** k
        coef = 1.0 / (TWO_PI * k * detk)
        c1 = (R * r0) ** (-k)
        c2 = rq ** k
        c3 = (R * r0) ** k
        S1 = c1 - c2 * vk
        S2 = c3 * vk - c2
        Sfull = S1 + S2 * uk
        term = (coef * Qr) * Sfull
        gP1 = k * (Pr_prev * w1 + Pi_prev * w2)
        gP2 = k * (Pr_prev * w2 - Pi_prev * w1)
        duk = (-2.0 * k) * uk * ui
        h = h + term
        h1 = h1 + coef * (gP1 * Sfull + (Qr * S2 * duk) * z1)
        h2 = h2 + coef * (gP2 * Sfull + (Qr * S2 * duk) * z2)
        if is_numeric:
            tmag = float(np.max(np.abs(term)))
            scale = float(np.max(np.abs(h))) + 1e-30
            small = small + 1 if tmag < 1e-17 * scale else 0
            if small >= 2 and k >= 8:
                break
    return h, h1, h2


def annulus_phi1(z1, z2, r0, R):
    """Harmonic measure of the inner circle, phi_1 = log(rho/R)/log(r0/R), and grad."""
    u = z1 * z1 + z2 * z2
    Lrr = math.log(R / r0)
    phi = (math.log(R) - 0.5 * _log(u)) * (1.0 / Lrr)
    f = -1.0 / (Lrr * u)
    return phi, f * z1, f * z2


def annulus_pair(z1, z2, w1, w2, r0, R, n_terms):
    """Hydrodynamic Green function of the annulus and its x-gradient.

    G = (1/2pi) log|z-w| + h(z,w) + p11 phi_1(z) phi_1(w) with
    p11 = log(r0/R)/(2pi), the inverse of the 1x1 period matrix.
    """
    d1 = z1 - w1
    d2 = z2 - w2
    dd = d1 * d1 + d2 * d2
    gfree = _log(dd) / (2 * TWO_PI)
    fd = 1.0 / (TWO_PI * dd)
    h, h1, h2 = _annulus_h(z1, z2, w1, w2, r0, R, n_terms)
    p11 = math.log(r0 / R) / TWO_PI
    pz, pz1, pz2 = annulus_phi1(z1, z2, r0, R)
    pw, _, _ = annulus_phi1(w1, w2, r0, R)
    g = gfree + h + p11 * pz * pw
    g1 = fd * d1 + h1 + (p11 * pw) * pz1
    g2 = fd * d2 + h2 + (p11 * pw) * pz2
    return g, g1, g2


def annulus_robin_grad(z1, z2, r0, R, n_terms):
    """Robin function of the annulus r(x) = h(x,x) + p11 phi_1(x)^2, with grad.

    On the diagonal the series collapses to radial terms
    coef (u^k/(R r0)^k + (R r0/u)^k - 2 (r0/R)^k), u = |x|^2.
    """
    u = z1 * z1 + z2 * z2
    LR = math.log(R)
    Lrr = math.log(R / r0)
    logu = _log(u)
    A = LR - 0.5 * logu
    r = A * A * (1.0 / (TWO_PI * Lrr)) - LR / TWO_PI
    drdu = -A / (TWO_PI * Lrr) / u
    ui = 1.0 / u
    ukp = 1.0  # u^k
    ukm = 1.0  # u^-k
    rq = r0 / R
    is_numeric = not hasattr(u, "coeffs")
    small = 0
    for k in range(1, n_terms + 1):
        ukp = ukp * u
        ukm = ukm * ui
        detk = (R / r0) ** k - rq ** k
        coef = 1.0 / (TWO_PI * k * detk)
        c1 = (R * r0) ** (-k)
        c3 = (R * r0) ** k
        term = coef * (c1 * ukp + c3 * ukm - 2.0 * rq ** k)
        dterm = coef * k * (c1 * ukp - c3 * ukm) * ui
        r = r + term
        drdu = drdu + dterm
        if is_numeric:
            tmag = float(np.max(np.abs(term))) + float(np.max(np.abs(dterm)))
            small = small + 1 if tmag < 1e-17 else 0
            if small >= 2 and k >= 8:
                break
    p11 = math.log(r0 / R) / TWO_PI
    phi, dphi1, dphi2 = annulus_phi1(z1, z2, r0, R)
    r = r + p11 * phi * phi
    g1 = drdu * (2.0 * z1) + (2.0 * p11) * phi * dphi1
    g2 = drdu * (2.0 * z2) + (2.0 * p11) * phi * dphi2
    return r, g1, g2


# ---------------------------------------------------------------------------
# evaluators
# ---------------------------------------------------------------------------

class VectorField:
    """Callable vector field with vectorized evaluation."""

    def __init__(self, fn, name=""):
        self._fn = fn
        self.name = name

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        vals = self._fn(np.atleast_2d(pts))
        return vals[0] if single else vals


class PeriodMatrix:
    """Period matrix m_ij = Gamma_i(grad^perp phi_j) and its inverse."""

    def __init__(self, M: np.ndarray):
        M = np.asarray(M, dtype=float)
        sym = np.max(np.abs(M - M.T)) if M.size else 0.0
        if M.size and sym > 1e-8 * (1 + np.max(np.abs(M))):
            raise ConstructionError(f"period matrix not symmetric (defect {sym:.2e})")
        M = 0.5 * (M + M.T)
        if M.size:
            eig = np.linalg.eigvalsh(M)
            if np.any(eig >= 0):
                raise ConstructionError(f"period matrix not negative definite: eig={eig}")
            cond = abs(eig).max() / abs(eig).min()
            if cond > 1e12:
                raise ConstructionError(f"period matrix ill-conditioned (cond {cond:.2e})")
            self.P = np.linalg.inv(M)
        else:
            self.P = M.copy()
        self.M = M

    @property
    def d(self):
        return self.M.shape[0]


class GreenEvaluator:
    """Common assembly layer on top of a Dirichlet backend.

    Subclasses provide ``g0``/``grad_x_g0`` (Dirichlet kernel), harmonic
    measures ``phi``/``grad_phi`` and the Dirichlet Robin part ``robin0``/
    ``grad_robin0``.  Everything here is immutable after construction and
    safe for concurrent reads.
    """

    backend = "abstract"

    def __init__(self, domain: Domain):
        self.domain = domain
        self._period = None

    # subclass surface -------------------------------------------------------
    def g0(self, x, Y):
        raise NotImplementedError

    def grad_x_g0(self, x, Y):
        raise NotImplementedError

    def phi(self, i, P):
        raise NotImplementedError

    def grad_phi(self, i, P):
        raise NotImplementedError

    def robin0(self, x):
        raise NotImplementedError

    def grad_robin0(self, x):
        raise NotImplementedError

    # assembled hydrodynamic kernel -------------------------------------------
    @property
    def d(self) -> int:
        return self.domain.d

    def period_matrix(self, n_nodes: int = 512) -> PeriodMatrix:
        if self.d == 0:
            raise DomainError("period matrix needs at least one inner boundary")
        if self._period is None:
            M = np.empty((self.d, self.d))
            for i in range(1, self.d + 1):
                curve = self.domain.inner[i - 1]
                pts, tang, w = curve.ccw_nodes(n_nodes)
                for j in range(1, self.d + 1):
                    f = perp(self.grad_phi(j, pts))
                    M[i - 1, j - 1] = float(np.sum(w * np.einsum("ij,ij->i", f, tang)))
            self._period = PeriodMatrix(M)
        return self._period

    def _pmat(self):
        if self.d == 0:
            return np.zeros((0, 0))
        return self.period_matrix().P

    def green(self, x, Y):
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        out = self.g0(x, Y)
        if self.d:
            P = self._pmat()
            phix = np.array([float(self.phi(i, np.atleast_2d(np.asarray(x, float)))[0])
                             for i in range(1, self.d + 1)])
            for i in range(self.d):
                for j in range(self.d):
                    out = out + P[i, j] * phix[i] * self.phi(j + 1, Y)
        return out

    def grad_x_green(self, x, Y):
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        out = self.grad_x_g0(x, Y)
        if self.d:
            P = self._pmat()
            gphix = np.array([self.grad_phi(i, np.atleast_2d(np.asarray(x, float)))[0]
                              for i in range(1, self.d + 1)])
            for i in range(self.d):
                for j in range(self.d):
                    out = out + P[i, j] * np.outer(self.phi(j + 1, Y), gphix[i])
        return out

    def kernel(self, x, Y):
        """K(x, Y) = grad_x^perp G(x, Y), the Biot-Savart kernel."""
        return perp(self.grad_x_green(x, Y))

    def g_reg(self, x, Y):
        """Regular part g(x,Y) = G(x,Y) - (1/2pi) log|x-Y|."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(Y - x, axis=1)
        return self.green(x, Y) - np.log(r) / TWO_PI

    def robin(self, x):
        out = self.robin0(x)
        if self.d:
            P = self._pmat()
            xx = np.atleast_2d(np.asarray(x, dtype=float))
            phix = np.array([float(self.phi(i, xx)[0]) for i in range(1, self.d + 1)])
            out = out + float(phix @ P @ phix)
        return out

    def grad_robin(self, x):
        out = np.asarray(self.grad_robin0(x), dtype=float)
        if self.d:
            P = self._pmat()
            xx = np.atleast_2d(np.asarray(x, dtype=float))
            phix = np.array([float(self.phi(i, xx)[0]) for i in range(1, self.d + 1)])
            gphix = np.array([self.grad_phi(i, xx)[0] for i in range(1, self.d + 1)])
            out = out + 2.0 * (phix @ P) @ gphix
        return out

    def harmonic_basis(self):
        """Basis X_1..X_d of tangential harmonic fields with Gamma_i(X_j) = delta_ij."""
        if self.d == 0:
            return []
        P = self._pmat()

        def make(k):
            col = P[:, k].copy()

            def at(pts):
                acc = np.zeros((len(pts), 2))
                for j in range(self.d):
                    acc += col[j] * perp(self.grad_phi(j + 1, pts))
                return acc
            return VectorField(at, name=f"X_{k + 1}")

        return [make(k) for k in range(self.d)]

    def psi0_X0(self, circulations):
        """Stream function psi_0 = sum Gamma_i p_ij phi_j and X_0 = grad^perp psi_0."""
        gam = np.asarray(circulations, dtype=float)
        if gam.shape != (self.d,):
            raise DomainError(f"expected {self.d} circulations, got {gam.shape}")
        if self.d == 0 or not np.any(gam):
            zero_s = lambda pts: np.zeros(len(np.atleast_2d(pts)))
            zero_v = VectorField(lambda pts: np.zeros((len(pts), 2)), name="X_0")
            return zero_s, zero_v
        coef = gam @ self._pmat()

        def psi0(pts):
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            acc = np.zeros(len(pts))
            for j in range(self.d):
                acc += coef[j] * self.phi(j + 1, pts)
            return acc

        def x0(pts):
            acc = np.zeros((len(pts), 2))
            for j in range(self.d):
                acc += coef[j] * perp(self.grad_phi(j + 1, pts))
            return acc

        return psi0, VectorField(x0, name="X_0")

    def cloud_velocity(self, positions, gammas, targets, self_eps=1e-14):
        """Velocity of a point-vortex cloud at targets (no X_0 part).

        Near-coincident pairs drop the singular free part (its principal
        value vanishes) but keep the smooth self-image term, which equals
        half the rotated Robin gradient.  The disk backend overrides this
        with the compiled image-kernel sum of identical semantics.
        """
        targets = np.atleast_2d(np.asarray(targets, dtype=float))
        positions = np.atleast_2d(np.asarray(positions, dtype=float))
        gammas = np.asarray(gammas, dtype=float)
        out = np.zeros_like(targets)
        for i, t in enumerate(targets):
            d = positions - t
            r2 = np.einsum("ij,ij->i", d, d)
            keep = r2 > self_eps * self_eps
            if np.any(keep):
                K = self.kernel(t, positions[keep])
                out[i] = gammas[keep] @ K
            if not np.all(keep):
                out[i] += gammas[~keep].sum() * 0.5 * perp(self.grad_robin(t))
        return out


class DiskGreen(GreenEvaluator):
    """Analytic image-formula backend for the disk of radius R (d = 0)."""

    backend = "analytic-disk"

    def __init__(self, domain: Domain):
        super().__init__(domain)
        if domain.kind != "disk":
            raise DomainError("DiskGreen needs a disk domain")
        self.R = domain.params["R"]

    def g0(self, x, Y):
        x = np.asarray(x, dtype=float)
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        d = x - Y
        dd = np.einsum("ij,ij->i", d, d)
        v = np.einsum("ij,ij->i", Y, Y)
        out = np.empty(len(Y))
        ctr = v < 1e-28
        if np.any(ctr):
            u = float(x @ x)
            out[ctr] = math.log(u) / (2 * TWO_PI) - math.log(self.R) / TWO_PI
        reg = ~ctr
        if np.any(reg):
            s = (self.R ** 2 / v[reg])[:, None] * Y[reg]
            e = x - s
            ee = np.einsum("ij,ij->i", e, e)
            out[reg] = (np.log(dd[reg]) - np.log(v[reg] * ee)) / (2 * TWO_PI) \
                + math.log(self.R) / TWO_PI
        return out

    def grad_x_g0(self, x, Y):
        x = np.asarray(x, dtype=float)
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        d = x - Y
        dd = np.einsum("ij,ij->i", d, d)
        v = np.einsum("ij,ij->i", Y, Y)
        out = np.empty_like(Y)
        ctr = v < 1e-28
        if np.any(ctr):
            u = float(x @ x)
            out[ctr] = x / (TWO_PI * u)
        reg = ~ctr
        if np.any(reg):
            s = (self.R ** 2 / v[reg])[:, None] * Y[reg]
            e = x - s
            ee = np.einsum("ij,ij->i", e, e)
            out[reg] = d[reg] / (TWO_PI * dd[reg])[:, None] - e / (TWO_PI * ee)[:, None]
        return out

    def phi(self, i, P):
        raise DomainError("disk has no inner boundaries")

    def grad_phi(self, i, P):
        raise DomainError("disk has no inner boundaries")

    def robin0(self, x):
        r, _, _ = disk_robin_grad(float(x[0]), float(x[1]), self.R)
        return r

    def grad_robin0(self, x):
        _, g1, g2 = disk_robin_grad(float(x[0]), float(x[1]), self.R)
        return np.array([g1, g2])

    def cloud_velocity(self, positions, gammas, targets, self_eps=1e-14):
        return kernels.disk_velocity(positions, gammas, targets, self.R, self_eps)


class AnnulusGreen(GreenEvaluator):
    """q-series backend for the concentric annulus r0 < |x| < R (d = 1)."""

    backend = "analytic-annulus"

    def __init__(self, domain: Domain, n_terms=None):
        super().__init__(domain)
        if domain.kind != "annulus":
            raise DomainError("AnnulusGreen needs an annulus domain")
        self.r0 = domain.params["r0"]
        self.R = domain.params["R"]
        self.n_terms = n_terms  # None = adaptive per call (test hook: fix it)

    def _n(self, rho2, sig2):
        if self.n_terms is not None:
            return self.n_terms
        return annulus_terms_needed(float(np.min(rho2)), float(np.min(sig2)),
                                    self.r0, self.R)

    def g0(self, x, Y):
        x = np.asarray(x, dtype=float)
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        u = float(x @ x)
        v = np.einsum("ij,ij->i", Y, Y)
        n = self._n(u, v)
        d = x - Y
        dd = np.einsum("ij,ij->i", d, d)
        h, _, _ = _annulus_h(x[0], x[1], Y[:, 0], Y[:, 1], self.r0, self.R, n)
        return np.log(dd) / (2 * TWO_PI) + h

    def grad_x_g0(self, x, Y):
        x = np.asarray(x, dtype=float)
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        u = float(x @ x)
        v = np.einsum("ij,ij->i", Y, Y)
        n = self._n(u, v)
        d = x - Y
        dd = np.einsum("ij,ij->i", d, d)
        _, h1, h2 = _annulus_h(x[0], x[1], Y[:, 0], Y[:, 1], self.r0, self.R, n)
        out = d / (TWO_PI * dd)[:, None]
        out[:, 0] += h1
        out[:, 1] += h2
        return out

    def phi(self, i, P):
        if i != 1:
            raise DomainError("annulus has a single inner boundary")
        P = np.atleast_2d(np.asarray(P, dtype=float))
        val, _, _ = annulus_phi1(P[:, 0], P[:, 1], self.r0, self.R)
        return val

    def grad_phi(self, i, P):
        if i != 1:
            raise DomainError("annulus has a single inner boundary")
        P = np.atleast_2d(np.asarray(P, dtype=float))
        _, g1, g2 = annulus_phi1(P[:, 0], P[:, 1], self.r0, self.R)
        return np.stack([g1, g2], axis=1)

    # annulus_robin_grad already includes the hydrodynamic p11 phi^2 part,
    # so override the assembled robin rather than robin0.
    def robin(self, x):
        x = np.asarray(x, dtype=float)
        n = self._n(float(x @ x), float(x @ x)) if self.n_terms is None else self.n_terms
        r, _, _ = annulus_robin_grad(float(x[0]), float(x[1]), self.r0, self.R, n)
        return float(r)

    def grad_robin(self, x):
        x = np.asarray(x, dtype=float)
        n = self._n(float(x @ x), float(x @ x)) if self.n_terms is None else self.n_terms
        _, g1, g2 = annulus_robin_grad(float(x[0]), float(x[1]), self.r0, self.R, n)
        return np.array([float(g1), float(g2)])

    def robin0(self, x):
        x = np.asarray(x, dtype=float)
        h, _, _ = _annulus_h(float(x[0]), float(x[1]), float(x[0]), float(x[1]),
                             self.r0, self.R, self._n(float(x @ x), float(x @ x)))
        return float(h)

    def grad_robin0(self, x):
        # grad of h(x,x) = 2 grad_x h|_(y=x) by symmetry of h
        x = np.asarray(x, dtype=float)
        _, h1, h2 = _annulus_h(float(x[0]), float(x[1]), float(x[0]), float(x[1]),
                               self.r0, self.R, self._n(float(x @ x), float(x @ x)))
        return 2.0 * np.array([float(h1), float(h2)])


class MFSGreen(GreenEvaluator):
    """Method-of-fundamental-solutions backend for general domains.

    Point-source charges live on dilated copies of the boundary curves
    (factor 1.25 outward for C_0, 0.8 inward for inner curves); collocation
    uses 4x more points than charges and a truncated-SVD least squares
    solve (cutoff 1e-12 sigma_max).  The construction residual is reported
    and construction fails above ``residual_tol``.
    """

    backend = "mfs"

    def __init__(self, domain: Domain, n_charges=96, residual_tol=1e-6):
        super().__init__(domain)
        charges = []
        colloc = []
        for k, curve in enumerate(domain.boundary_curves()):
            nc = n_charges if k == 0 else max(48, (2 * n_charges) // 3)
            factor = 1.25 if k == 0 else 0.8
            cpts, _, _ = curve.ccw_nodes(nc)
            charges.append(curve.center + factor * (cpts - curve.center))
            bpts, _, _ = curve.ccw_nodes(4 * nc)
            colloc.append(bpts)
        self.charges = np.vstack(charges)
        self.colloc = np.vstack(colloc)
        labels = []
        for k, curve in enumerate(domain.boundary_curves()):
            nc = n_charges if k == 0 else max(48, (2 * n_charges) // 3)
            labels += [k] * (4 * nc)
        self.colloc_curve = np.asarray(labels)
        diff = self.colloc[:, None, :] - self.charges[None, :, :]
        A = np.log(np.einsum("ijk,ijk->ij", diff, diff)) / (2 * TWO_PI)
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
        keep = s > 1e-12 * s[0]
        self._U = U[:, keep]
        self._sinv = 1.0 / s[keep]
        self._V = Vt[keep].T
        self.residual_tol = residual_tol
        self._phi_coef = {}
        for i in range(1, self.d + 1):
            b = (self.colloc_curve == i).astype(float)
            c = self._solve(b)
            res = float(np.max(np.abs(A @ c - b)))
            if res > residual_tol:
                raise ConstructionError(
                    f"MFS harmonic measure phi_{i} residual {res:.3e} above tolerance",
                    residual=res)
            self._phi_coef[i] = c
        # probe the Dirichlet solve quality at one interior source
        probe = domain.center + 0.123 * (domain.diam() / 4)
        if not domain.contains(probe):
            probe = domain.interior_samples(1, np.random.default_rng(0))[0]
        b = self._g0_bdata(np.asarray(probe, dtype=float))
        self.residual = float(np.max(np.abs(A @ self._solve(b) - b)))
        if self.residual > residual_tol:
            raise ConstructionError(
                f"MFS Dirichlet residual {self.residual:.3e} above tolerance",
                residual=self.residual)
        self._A = A

    def _solve(self, b):
        return self._V @ (self._sinv * (self._U.T @ b))

    def _g0_bdata(self, y):
        d = self.colloc - y
        return -np.log(np.einsum("ij,ij->i", d, d)) / (2 * TWO_PI)

    def _grad_bdata(self, y):
        d = self.colloc - y
        r2 = np.einsum("ij,ij->i", d, d)
        return d / (TWO_PI * r2)[:, None]  # d/dy of bdata columns

    def _basis(self, X):
        d = X[:, None, :] - self.charges[None, :, :]
        return np.log(np.einsum("ijk,ijk->ij", d, d)) / (2 * TWO_PI)

    def _grad_basis(self, X):
        d = X[:, None, :] - self.charges[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", d, d)
        return d / (TWO_PI * r2)[:, :, None]

    def g0(self, x, Y):
        x = np.asarray(x, dtype=float)
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        vals = np.empty(len(Y))
        bx = self._basis(np.atleast_2d(x))[0]
        for i, y in enumerate(Y):
            c = self._solve(self._g0_bdata(y))
            d = x - y
            vals[i] = math.log(float(d @ d)) / (2 * TWO_PI) + float(bx @ c)
        return vals

    def grad_x_g0(self, x, Y):
        x = np.asarray(x, dtype=float)
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        out = np.empty_like(Y)
        gb = self._grad_basis(np.atleast_2d(x))[0]
        for i, y in enumerate(Y):
            c = self._solve(self._g0_bdata(y))
            d = x - y
            out[i] = d / (TWO_PI * float(d @ d)) + c @ gb
        return out

    def phi(self, i, P):
        P = np.atleast_2d(np.asarray(P, dtype=float))
        return self._basis(P) @ self._phi_coef[i]

    def grad_phi(self, i, P):
        P = np.atleast_2d(np.asarray(P, dtype=float))
        gb = self._grad_basis(P)
        return np.einsum("ijk,j->ik", gb, self._phi_coef[i])

    def robin0(self, x):
        x = np.asarray(x, dtype=float)
        c = self._solve(self._g0_bdata(x))
        return float(self._basis(np.atleast_2d(x))[0] @ c)

    def grad_robin0(self, x):
        # d/dx g0reg(x,x): analytic x-gradient plus the coefficient derivative
        x = np.asarray(x, dtype=float)
        c = self._solve(self._g0_bdata(x))
        gb = self._grad_basis(np.atleast_2d(x))[0]
        part_x = c @ gb
        bx = self._basis(np.atleast_2d(x))[0]
        gdata = self._grad_bdata(x)
        part_y = np.array([float(bx @ self._solve(gdata[:, k])) for k in range(2)])
        return part_x + part_y


def build_green(domain: Domain, backend=None, **options) -> GreenEvaluator:
    """Construct the Green evaluator for a domain.

    ``backend`` defaults to the analytic kernel for disks and annuli and to
    the MFS solver for general domains; pass ``backend="mfs"`` to force the
    solver on an analytic domain (used by the cross-validation tests).
    """
    if backend is None:
        backend = "analytic" if domain.kind in ("disk", "annulus") else "mfs"
    if backend == "analytic":
        if domain.kind == "disk":
            return DiskGreen(domain)
        if domain.kind == "annulus":
            return AnnulusGreen(domain, n_terms=options.get("n_terms"))
        raise DomainError("analytic backend exists only for disk and annulus")
    if backend == "mfs":
        return MFSGreen(domain, n_charges=options.get("n_charges", 96),
                        residual_tol=options.get("residual_tol", 1e-6))
    raise DomainError(f"unknown Green backend {backend!r}")


# ---------------------------------------------------------------------------
# circulations and the harmonic projection
# ---------------------------------------------------------------------------

def circulation(field, curve, n_nodes: int = 512) -> float:
    """Line integral of a vector field along the counter-clockwise traversal.

    ``field`` maps (m,2) points to (m,2) vectors.  All circulations in this
    package, including the period matrix and prescribed boundary
    circulations, use the counter-clockwise orientation of every curve.
    """
    pts, tang, w = curve.ccw_nodes(n_nodes)
    f = field(pts)
    return float(np.sum(w * np.einsum("ij,ij->i", f, tang)))


def domain_circulation(field, ev: GreenEvaluator, curve_index: int, n_nodes: int = 512) -> float:
    """Circulation around boundary curve #curve_index (0 = outer, 1..d = inner)."""
    curves = ev.domain.boundary_curves()
    if not 0 <= curve_index < len(curves):
        raise DomainError(f"curve index {curve_index} out of range")
    return circulation(field, curves[curve_index], n_nodes)


def project_harmonic(field, ev: GreenEvaluator, curl=None, n_area=(96, 256),
                     fd_step=None):
    """Coefficients alpha_i = int_Omega phi_i curl f + Gamma_i(f) of Pi f.

    ``curl`` may be a callable (m,2)->(m,); otherwise the curl is taken by
    central differences of ``field``.
    """
    if ev.d == 0:
        return np.zeros(0)
    pts, w = ev.domain.area_nodes(*n_area)
    if curl is None:
        h = fd_step or 1e-5 * ev.domain.diam()
        ex = np.array([h, 0.0])
        ey = np.array([0.0, h])
        curl_vals = (field(pts + ex)[:, 1] - field(pts - ex)[:, 1]
                     - field(pts + ey)[:, 0] + field(pts - ey)[:, 0]) / (2 * h)
    else:
        curl_vals = curl(pts)
    alphas = np.empty(ev.d)
    for i in range(1, ev.d + 1):
        area_term = float(np.sum(w * ev.phi(i, pts) * curl_vals))
        alphas[i - 1] = area_term + domain_circulation(field, ev, i)
    return alphas
