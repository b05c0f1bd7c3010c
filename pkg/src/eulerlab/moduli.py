"""Modulus-of-continuity calculus: Osgood bounds and the flow-map moduli.

A modulus is an increasing continuous mu on [0, a] with mu(0) = 0.  The
Yudovich modulus of a germ theta is mu(h) = C h T_theta(h^-2); the flow-map
modulus family Gamma_t solves the Osgood integral equation

    int_h^{Gamma_t(h)} dh' / mu(h') = kappa t,

where kappa is the velocity's C_mu seminorm.  Only behavior near h = 0
matters, so domain bounds a are shrunk as needed to keep mu strictly
increasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import DomainError, SaturationError, SizeError
from .germs import Germ, iterated_exp, iterated_log, t_theta_vec

_E = math.e


@dataclass(frozen=True)
class Modulus:
    """Modulus of continuity on [0, a].

    kinds: "power" (h^r), "h_log" (C h log(h^-2)), "from_germ"
    (C h T_theta(h^-2)), "gamma_power" (Gamma_t(h)^r from a family),
    "tabulated" (log-log interpolation).
    """

    kind: str
    a: float
    C: float = 1.0
    r: float = 1.0
    germ: Germ | None = None
    table: tuple = ()
    family: "GammaFamily | None" = None
    t: float = 0.0

    def __post_init__(self):
        if not (0 < self.a):
            raise DomainError("modulus domain bound a must be positive")

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def power(r: float, a: float = 1.0) -> "Modulus":
        if not 0 < r <= 1:
            raise DomainError("power modulus needs r in (0, 1]")
        return Modulus("power", a, r=r)

    @staticmethod
    def h_log(C: float = 1.0, a: float | None = None) -> "Modulus":
        # C h log(h^-2) increases only below e^-1
        if a is None:
            a = 0.35
        if a >= math.exp(-1):
            raise DomainError("h_log modulus must live below a = 1/e")
        return Modulus("h_log", a, C=C)

    @staticmethod
    def from_germ(germ: Germ, C: float = 1.0, a: float | None = None) -> "Modulus":
        return yudovich_modulus(germ, C, a)

    @staticmethod
    def tabulate(fn, a: float, n: int = 4096) -> "Modulus":
        h = np.exp(np.linspace(math.log(a) - 27.6, math.log(a), n))
        v = np.asarray([float(fn(x)) for x in h])
        if np.any(v <= 0) or np.any(np.diff(v) <= 0):
            raise DomainError("tabulated modulus must be positive and increasing")
        return Modulus("tabulated", a, table=(tuple(h), tuple(v)))

    @staticmethod
    def gamma_power(family: "GammaFamily", t: float, r: float) -> "Modulus":
        if not 0 < r <= 1:
            raise DomainError("gamma_power needs r in (0, 1]")
        return Modulus("gamma_power", family.a_tilde, r=r, family=family, t=t)

    # -- evaluation -------------------------------------------------------------

    def eval(self, h):
        arr = np.asarray(h, dtype=float)
        if np.any(arr < 0) or np.any(arr > self.a * (1 + 1e-12)):
            raise DomainError(f"modulus evaluated outside [0, {self.a}]")
        arr = np.minimum(arr, self.a)
        pos = arr > 0
        out = np.zeros_like(arr)
        if self.kind == "power":
            out[pos] = arr[pos] ** self.r
        elif self.kind == "h_log":
            out[pos] = self.C * arr[pos] * np.log(arr[pos] ** -2.0)
        elif self.kind == "from_germ":
            out[pos] = self.C * arr[pos] * t_theta_vec(self.germ, arr[pos] ** -2.0)
        elif self.kind == "tabulated":
            hs = np.asarray(self.table[0])
            vs = np.asarray(self.table[1])
            lo = np.log(hs[0])
            out[pos] = np.exp(np.interp(np.log(arr[pos]), np.log(hs), np.log(vs)))
            tiny = pos & (arr < hs[0])
            # extend below the table linearly (keeps mu(0+) -> 0)
            out[tiny] = vs[0] * arr[tiny] / hs[0]
        elif self.kind == "gamma_power":
            out[pos] = self.family.gamma_vec(self.t, arr[pos]) ** self.r
        else:
            raise DomainError(f"unknown modulus kind {self.kind!r}")
        return out if out.shape else float(out)

    def __call__(self, h):
        return self.eval(h)


def yudovich_modulus(germ: Germ, C: float = 1.0, a: float | None = None,
                     grid: int = 1024) -> Modulus:
    """The modulus mu(h) = C h T_theta(h^-2) of a Yudovich velocity.

    ``a`` defaults to the largest bound below min(1, requested) on which mu
    is strictly increasing (checked on a log grid); mu is constant in h on
    the boundary-minimizer regime of T_theta, so a is shrunk accordingly.
    """
    if C <= 0:
        raise DomainError("constant C must be positive")
    a_req = 0.999 if a is None else float(a)
    if a_req >= 1.0:
        raise DomainError("from_germ modulus needs a < 1 so that h^-2 > 1")
    hs = np.exp(np.linspace(math.log(1e-10), math.log(a_req), grid))
    vals = C * hs * t_theta_vec(germ, hs ** -2.0)
    bad = np.nonzero(np.diff(vals) <= 0)[0]
    if bad.size:
        a_eff = float(hs[bad[0]]) * 0.999
        if a_eff < 1e-8:
            raise DomainError("germ modulus is not increasing near 0")
    else:
        a_eff = a_req
    if a is not None and a_eff < a * 0.5:
        raise DomainError(f"requested a={a} too large for the germ domain "
                          f"(monotone only below {a_eff:.3g})")
    return Modulus("from_germ", a_eff, C=C, germ=germ)


# ---------------------------------------------------------------------------
# Osgood integrals
# ---------------------------------------------------------------------------

def inv_modulus_integral(mu: Modulus, lo: float, hi: float) -> float:
    """int_lo^hi dh / mu(h) via the substitution h = exp(-v)."""
    if not 0 < lo <= hi <= mu.a * (1 + 1e-12):
        raise DomainError("need 0 < lo <= hi <= a")
    if lo == hi:
        return 0.0

    def integrand(v):
        h = math.exp(-v)
        return h / float(mu.eval(min(h, mu.a)))

    val, err = quad(integrand, -math.log(hi), -math.log(lo),
                    epsabs=1e-13, epsrel=1e-12, limit=400)
    return float(val)


def osgood_bound(mu: Modulus, c: float, t: float, clip: bool = True) -> float:
    """The sharp Osgood lemma bound: R in [c, a] with int_c^R dh/mu = t.

    If t exceeds int_c^a dh/mu the bound saturates at a; with clip=False a
    SaturationError is raised instead.
    """
    if not 0 < c <= mu.a * (1 + 1e-12):
        raise DomainError("need c in (0, a]")
    if t < 0:
        raise DomainError("need t >= 0")
    if t == 0:
        return float(min(c, mu.a))
    c = min(c, mu.a)
    total = inv_modulus_integral(mu, c, mu.a)
    if t >= total:
        if clip:
            return mu.a
        raise SaturationError(f"t={t} exceeds int_c^a dh/mu = {total}")

    f = lambda R: inv_modulus_integral(mu, c, R) - t
    return float(brentq(f, c, mu.a, xtol=1e-15, rtol=8.9e-16, maxiter=200))


class GammaFamily:
    """Flow-map moduli Gamma_t(h) defined by int_h^{Gamma_t(h)} dh/mu = kappa t.

    Precomputes a monotone cumulative table Q(h) = int_h^a dh/mu once at
    construction (single-threaded); afterwards the family is immutable and
    safe for concurrent reads.  ``gamma`` refines table lookups with exact
    quadrature; ``gamma_vec`` is the fast table-only path for bulk checks.
    """

    def __init__(self, mu: Modulus, kappa: float, T: float, grid: int = 20000,
                 h_min_factor: float = 1e-10):
        if kappa <= 0 or T < 0:
            raise DomainError("need kappa > 0 and T >= 0")
        self.mu = mu
        self.kappa = float(kappa)
        self.T = float(T)
        a = mu.a
        h_min = a * h_min_factor
        v = np.linspace(0.0, math.log(a / h_min), grid)
        h = a * np.exp(-v)
        g = h / np.asarray(mu.eval(h))          # d/dv of Q along h = a e^-v
        Q = np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(v))])
        self._v = v
        self._h = h
        self._Q = Q                              # Q(h(v)) increasing in v
        # largest dyadic a_tilde = a 2^-k with int_{a_tilde}^a dh/mu >= kappa T
        need = self.kappa * self.T
        k = 1
        a_tilde = a / 2
        while self._Q_of(a_tilde) < need:
            k += 1
            a_tilde = a / 2 ** k
            if a_tilde < h[-1] * 4:
                raise DomainError("kappa*T too large for the modulus domain; "
                                  "no valid a_tilde exists above the table floor")
        self.a_tilde = a_tilde

    def _Q_of(self, h):
        h = np.asarray(h, dtype=float)
        v = np.log(self.mu.a / h)
        return np.interp(v, self._v, self._Q)

    def _h_of_Q(self, q):
        v = np.interp(q, self._Q, self._v)
        return self.mu.a * np.exp(-v)

    def gamma_vec(self, t: float, h) -> np.ndarray:
        """Table-backed Gamma_t(h); relative accuracy ~1e-6, vectorized."""
        self._check_t(t)
        h = np.asarray(h, dtype=float)
        out = np.zeros_like(h)
        pos = h > 0
        if np.any(h[pos] > self.a_tilde * (1 + 1e-9)):
            raise DomainError("h beyond a_tilde")
        q = self._Q_of(h[pos]) - self.kappa * t
        out[pos] = np.where(q <= 0, self.mu.a, self._h_of_Q(np.maximum(q, 0.0)))
        return out

    def gamma(self, t: float, h: float) -> float:
        """Gamma_t(h) by bracketed root finding on the exact quadrature."""
        self._check_t(t)
        if h == 0:
            return 0.0
        if not 0 < h <= self.a_tilde * (1 + 1e-9):
            raise DomainError(f"h must lie in (0, a_tilde={self.a_tilde:.3g}]")
        if t == 0:
            return float(h)
        target = self.kappa * t
        guess = float(self.gamma_vec(t, np.asarray([h]))[0])
        lo = max(h, guess * 0.98)
        hi = min(self.mu.a, max(guess * 1.02, lo * (1 + 1e-12)))
        f = lambda R: inv_modulus_integral(self.mu, h, R) - target
        flo, fhi = f(lo), f(hi)
        while flo > 0 and lo > h:
            lo = max(h, lo * 0.9)
            flo = f(lo)
        while fhi < 0 and hi < self.mu.a:
            hi = min(self.mu.a, hi * 1.1)
            fhi = f(hi)
        if flo > 0:
            lo = h
        if fhi < 0:
            return self.mu.a
        return float(brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200))

    def _check_t(self, t):
        if not 0 <= t <= self.T * (1 + 1e-9):
            raise DomainError(f"t must lie in [0, T={self.T}]")


def gamma_t(family: GammaFamily, t: float, h: float) -> float:
    """Gamma_t(h) = osgood_bound(mu, h, kappa t), extended by Gamma_t(0) = 0."""
    return family.gamma(t, h)


def loglog_gamma_bound(m: int, C: float, kappa: float, t: float, h) -> np.ndarray:
    """Closed-form domination of Gamma_t for the theta_m modulus (m >= 1):

        Gamma_t(h) <= (exp^m((log^m(h^-2))^(exp(-2 C e kappa t))))^(-1/2).

    The decay rate 2*C*e*kappa comes from mu(h) <= C e h theta_{m+1}(h^-2)
    and the iterated-log integral identity.
    """
    if m < 1:
        raise DomainError("the iterated-log bound needs m >= 1")
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise DomainError("need h > 0")
    inner = iterated_log(m, h ** -2.0)
    if np.any(inner <= 0):
        raise DomainError("h too large: log^m(h^-2) must be positive")
    rate = math.exp(-2.0 * C * _E * kappa * t)
    val = inner ** rate
    for _ in range(m):
        val = np.exp(val)
    return val ** -0.5


# ---------------------------------------------------------------------------
# Dini evidence and the composition bound
# ---------------------------------------------------------------------------

def dini_integral(mu: Modulus, h_min: float):
    """Partial Dini integral int_{h_min}^a mu(h)/h dh plus dyadic increments.

    Returns (partial integral, increments) where increments[k] integrates
    over [a 2^-(k+1), a 2^-k] down to h_min; summable increments are
    numerical evidence that mu is a Dini modulus.
    """
    if not 0 < h_min < mu.a:
        raise DomainError("need h_min in (0, a)")

    def block(lo, hi):
        f = lambda v: float(mu.eval(min(math.exp(-v), mu.a)))
        val, _ = quad(f, -math.log(hi), -math.log(lo), epsabs=1e-12, epsrel=1e-10,
                      limit=200)
        return float(val)

    total = block(h_min, mu.a)
    increments = []
    hi = mu.a
    while hi / 2 > h_min:
        increments.append(block(hi / 2, hi))
        hi /= 2
    if hi > h_min:
        increments.append(block(h_min, hi))
    return total, np.asarray(increments)


def holder_compose_bound(F_norm: float, r: float, phi_norm: float) -> float:
    """Composition bound ||F o phi||_{C_{mu^r}} <= ||F||_{C^{0,r}} ||phi||_{C_mu}^r."""
    if not 0 < r < 1:
        raise DomainError("need r in (0,1)")
    if F_norm < 0 or phi_norm < 0:
        raise DomainError("seminorms are nonnegative")
    return float(F_norm * phi_norm ** r)


def upsilon_sum(s: int, m: int):
    """Exact sum of Upsilon(s, alpha) = prod 1/(1+alpha_i)^2 over |alpha| = m.

    Returns (sum, bound) as exact Fractions with bound = 20^s/(m+1)^2.
    Evaluated by truncated polynomial convolution, equivalent to full
    enumeration of the compositions; guarded at s <= 8, m <= 16.
    """
    if s < 1 or m < 0:
        raise DomainError("need s >= 1 and m >= 0")
    if s > 8 or m > 16:
        raise SizeError("composition enumeration guarded at s <= 8, m <= 16")
    base = [Fraction(1, (j + 1) ** 2) for j in range(m + 1)]
    acc = base[:]
    for _ in range(s - 1):
        nxt = [Fraction(0)] * (m + 1)
        for i, ai in enumerate(acc):
            if ai == 0:
                continue
            for j in range(m + 1 - i):
                nxt[i + j] += ai * base[j]
        acc = nxt
    total = acc[m]
    bound = Fraction(20 ** s, (m + 1) ** 2)
    return total, bound
