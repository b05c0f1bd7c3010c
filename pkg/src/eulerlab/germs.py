"""Admissible germs: growth profiles for slightly unbounded vorticities.

A germ theta : [p0, oo) -> (0, oo) with p0 > 1 controls L^p norms of the
vorticity via ||w||_p <= c theta(p).  Its auxiliary function

    T_theta(a) = inf { a^eps theta(1/eps) / eps : 0 < eps <= 1/p0 }

decides admissibility: theta is admissible when int_1^oo da/(a T_theta(a))
diverges.  The iterated-log germs theta_m(p) = log p * log^2 p * ... * log^m p
are the canonical admissible family; theta(p) = p is the canonical
non-admissible one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, QuadratureError, SizeError

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def iterated_exp(m: int, x: float = 1.0) -> float:
    """exp composed with itself m times, applied to x."""
    for _ in range(m):
        x = math.exp(x)
    return x


def iterated_log(m: int, p):
    """log composed with itself m times (vectorized)."""
    p = np.asarray(p, dtype=float)
    for _ in range(m):
        p = np.log(p)
    return p


@dataclass(frozen=True)
class Germ:
    """Growth function theta on [p0, oo).

    kind is one of "theta_m" (iterated-log product), "power"
    (theta(p) = p**exponent) or "tabulated" (log-log interpolation between
    samples; evaluation beyond the table is an error).
    """

    kind: str
    p0: float
    m: int = 0
    exponent: float = 1.0
    table: tuple = field(default=())

    def __post_init__(self):
        if self.p0 <= 1.0:
            raise DomainError("germ lower bound p0 must exceed 1")
        if self.kind == "theta_m":
            if self.m < 0:
                raise DomainError("theta_m needs m >= 0")
            if self.m > 4:
                raise SizeError("iterated logs beyond m = 4 overflow double precision")
            if self.p0 < iterated_exp(self.m) * (1 - 1e-12):
                raise DomainError(f"theta_{self.m} needs p0 >= exp^{self.m}(1)")
        elif self.kind == "power":
            if self.exponent <= 0:
                raise DomainError("power germ needs a positive exponent")
        elif self.kind == "tabulated":
            ps = np.asarray([p for p, _ in self.table], dtype=float)
            vs = np.asarray([v for _, v in self.table], dtype=float)
            if len(ps) < 2 or np.any(np.diff(ps) <= 0) or np.any(vs <= 0):
                raise DomainError("tabulated germ needs increasing p and positive values")
            if ps[0] > self.p0 * (1 + 1e-12):
                raise DomainError("table must start at or below p0")
        else:
            raise DomainError(f"unknown germ kind {self.kind!r}")

    # -- constructors --------------------------------------------------------

    @staticmethod
    def theta(m: int, p0: float | None = None) -> "Germ":
        """The iterated-log germ theta_m; p0 defaults to exp^m(1)."""
        if p0 is None:
            p0 = max(iterated_exp(m), 2.0) if m == 0 else iterated_exp(m)
        return Germ("theta_m", float(p0), m=m)

    @staticmethod
    def power(exponent: float, p0: float = 2.0) -> "Germ":
        return Germ("power", float(p0), exponent=float(exponent))

    @staticmethod
    def tabulated(ps, values, p0: float | None = None) -> "Germ":
        tab = tuple((float(p), float(v)) for p, v in zip(ps, values))
        return Germ("tabulated", float(p0 if p0 is not None else tab[0][0]), table=tab)

    # -- evaluation ------------------------------------------------------------

    @property
    def p_max(self) -> float:
        if self.kind == "tabulated":
            return self.table[-1][0]
        return math.inf

    def __call__(self, p):
        return self.eval(p)

    def eval(self, p):
        """theta(p); vectorized, domain-checked."""
        arr = np.asarray(p, dtype=float)
        if np.any(arr < self.p0 * (1 - 1e-12)):
            raise DomainError(f"germ evaluated below p0 = {self.p0}")
        if self.kind == "theta_m":
            out = np.ones_like(arr)
            q = arr.copy()
            for _ in range(self.m):
                q = np.log(q)
                out = out * q
            return out if out.shape else float(out)
        if self.kind == "power":
            out = arr ** self.exponent
            return out if out.shape else float(out)
        ps = np.array([t[0] for t in self.table])
        vs = np.array([t[1] for t in self.table])
        if np.any(arr > ps[-1] * (1 + 1e-12)):
            raise DomainError("tabulated germ evaluated beyond its last sample")
        out = np.exp(np.interp(np.log(arr), np.log(ps), np.log(vs)))
        return out if out.shape else float(out)


def eval_germ(germ: Germ, p):
    """theta(p) for p >= p0; errors below p0."""
    return germ.eval(p)


# ---------------------------------------------------------------------------
# the auxiliary function T_theta
# ---------------------------------------------------------------------------

def _t_objective(germ: Germ, log_a, eps):
    # log of a^eps theta(1/eps) / eps, stable for very large a
    return eps * log_a + np.log(germ.eval(1.0 / eps)) - np.log(eps)


def t_theta(germ: Germ, a: float) -> float:
    """T_theta(a) = inf over eps in (0, 1/p0] of a^eps theta(1/eps)/eps.

    Bracketed 1-D minimization: a 64-point log-spaced scan followed by
    golden-section refinement to relative tolerance 1e-12 in eps.
    """
    return float(t_theta_vec(germ, np.asarray([a]))[0])


def t_theta_vec(germ: Germ, a) -> np.ndarray:
    """Vectorized T_theta over an array of a > 1 values."""
    a = np.asarray(a, dtype=float)
    if np.any(a <= 1.0):
        raise DomainError("T_theta is defined for a > 1")
    log_a = np.log(a)
    hi = 1.0 / germ.p0
    lo_candidates = [1e-8, hi * 1e-6]
    lo_candidates.append(1.0 / (50.0 * max(float(np.max(log_a)), germ.p0)))
    lo = max(min(hi * 0.5, min(lo_candidates)), 1.0 / germ.p_max if germ.p_max < math.inf else 0.0)
    if lo <= 0:
        lo = min(1e-8, hi * 1e-6)
    grid = np.exp(np.linspace(math.log(lo), math.log(hi), 64))
    vals = np.stack([_t_objective(germ, log_a, e) for e in grid], axis=0)
    idx = np.argmin(vals, axis=0)
    left = grid[np.maximum(idx - 1, 0)]
    right = grid[np.minimum(idx + 1, len(grid) - 1)]
    # golden-section on [left, right] per element, in log-eps
    la, lb = np.log(left), np.log(right)
    c = lb - _GOLDEN * (lb - la)
    d = la + _GOLDEN * (lb - la)
    fc = _t_objective(germ, log_a, np.exp(c))
    fd = _t_objective(germ, log_a, np.exp(d))
    for _ in range(90):
        move = fc < fd
        lb = np.where(move, d, lb)
        la = np.where(move, la, c)
        c_new = lb - _GOLDEN * (lb - la)
        d_new = la + _GOLDEN * (lb - la)
        fc = np.where(move, _t_objective(germ, log_a, np.exp(c_new)), fd)
        fd = np.where(move, fd, _t_objective(germ, log_a, np.exp(d_new)))
        # recompute the freshly placed probe exactly
        fc = _t_objective(germ, log_a, np.exp(c_new))
        fd = _t_objective(germ, log_a, np.exp(d_new))
        c, d = c_new, d_new
        if np.all(lb - la < 1e-12):
            break
    eps = np.exp(0.5 * (la + lb))
    best = np.minimum(_t_objective(germ, log_a, eps),
                      np.minimum(_t_objective(germ, log_a, np.full_like(eps, hi)), vals[idx, np.arange(vals.shape[1])]))
    return np.exp(best)


def tt_bound(germ: Germ, a) -> np.ndarray:
    """The explicit upper bound T_theta(a) <= e log(a) theta(log a).

    Valid whenever eps = 1/log(a) lies in (0, 1/p0], i.e. log a >= p0.
    """
    a = np.asarray(a, dtype=float)
    la = np.log(a)
    if np.any(la < germ.p0):
        raise DomainError("bound requires log a >= p0")
    return math.e * la * np.asarray(germ.eval(la))


# ---------------------------------------------------------------------------
# admissibility evidence
# ---------------------------------------------------------------------------

def admissibility_partial_integrals(germ: Germ, checkpoints) -> list[float]:
    """Partial integrals I(A_k) = int_1^{A_k} da / (a T_theta(a)).

    Admissibility means I(A) -> oo; this returns evidence, not a verdict.
    The substitution a = exp(u) tames the slow decay of the integrand.
    """
    A = [float(x) for x in checkpoints]
    if not A:
        return []
    if A[0] <= 1.0 or any(b <= a for a, b in zip(A, A[1:])):
        raise DomainError("checkpoints must be increasing and > 1")

    def integrand(u):
        return 1.0 / float(t_theta_vec(germ, np.asarray([math.exp(u)]))[0])

    out = []
    total = 0.0
    lo = 0.0
    for Ak in A:
        hi = math.log(Ak)
        val, err = quad(integrand, lo, hi, epsabs=1e-10, epsrel=1e-10, limit=200)
        if err > 1e-6 * max(1.0, abs(val)):
            raise QuadratureError(f"admissibility integral did not converge on [{lo},{hi}]")
        total += val
        out.append(total)
        lo = hi
    return out


def iterated_log_identity_check(m: int, p1: float, p2: float):
    """Quadrature check of int_{p1}^{p2} dp/(p theta_m(p)) = log^{m+1} p2 - log^{m+1} p1.

    Returns (quadrature value, closed form, absolute difference).  A single
    substitution p = exp(u) is applied before quadrature; the full telescoping
    chain is exactly what the closed form asserts, so it is not reused here.
    """
    if p1 > p2:
        raise DomainError("need p1 <= p2")
    lo_ok = iterated_exp(m) * (1 - 1e-12)
    if p1 < lo_ok:
        raise DomainError(f"need p1 >= exp^{m}(1)")
    closed = float(iterated_log(m + 1, p2) - iterated_log(m + 1, p1))
    if p1 == p2:
        return 0.0, 0.0, 0.0

    def integrand(u):
        # theta_m(e^u) = u * theta_{m-1}(u) for the shifted tower
        p = math.exp(u)
        val = 1.0
        q = p
        for _ in range(m):
            q = math.log(q)
            val *= q
        return 1.0 / val

    val, err = quad(integrand, math.log(p1), math.log(p2),
                    epsabs=1e-12, epsrel=1e-12, limit=400)
    return float(val), closed, abs(float(val) - closed)


def lp_membership_ratio(field, germ: Germ, p_list) -> list[float]:
    """Ratios ||w||_{L^p} / theta(p) as evidence of Y_theta membership.

    ``field`` is any object with an ``lp_norm(p)`` method (see
    ``eulerlab.fields``).  A bounded ratio sequence indicates membership
    with c_f approximately sup of the ratios.
    """
    ps = [float(p) for p in p_list]
    if any(p < germ.p0 * (1 - 1e-12) for p in ps):
        raise DomainError("all p must be >= the germ's p0")
    return [field.lp_norm(p) / float(germ.eval(p)) for p in ps]
