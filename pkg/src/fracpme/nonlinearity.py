"""Degenerate diffusion nonlinearities and their level-set diagnostics.

Supported families:
  power         Phi(v) = |v|^{m-1} v
  polynomial    Phi a polynomial of integer degree m with Phi' >= 0
  product       Phi'(v) = c * prod_i |v - v_i|^{m_i - 1}, m - 1 = sum (m_i - 1)
  epsilon_shifted   Phi_base + eps3 * v (base may be None, i.e. eps3 * v)

The second derivative is understood almost everywhere; the power law at
v = 0 is handled by measure-zero exclusion in all quadratures.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq


class NonlinearityError(ValueError):
    pass


@dataclass(frozen=True)
class NonlinearitySpec:
    kind: str
    m: float
    c: float = 1.0
    nodes: tuple = ()
    exponents: tuple = ()
    coeffs: tuple = ()      # polynomial kind: Phi(v) = sum coeffs[k] v^k
    eps3: float = 0.0
    base: "NonlinearitySpec | None" = None
    C_level: float | None = None

    # --- constructors -------------------------------------------------------

    @staticmethod
    def power(m: float) -> "NonlinearitySpec":
        if not m > 1:
            raise NonlinearityError(f"power exponent m must exceed 1, got {m}")
        # |{m|v|^{m-1} <= delta}| = 2 (delta/m)^{1/(m-1)}
        return NonlinearitySpec(kind="power", m=m, C_level=2.0 * m ** (-1.0 / (m - 1.0)))

    @staticmethod
    def polynomial(coeffs) -> "NonlinearitySpec":
        coeffs = tuple(float(c) for c in coeffs)
        m = len(coeffs) - 1
        if m < 2:
            raise NonlinearityError("polynomial degree must be at least 2")
        spec = NonlinearitySpec(kind="polynomial", m=float(m), coeffs=coeffs)
        v = np.linspace(-50, 50, 4001)
        if np.any(spec.dphi(v) < -1e-12):
            raise NonlinearityError("polynomial must be nondecreasing")
        return spec

    @staticmethod
    def product(c: float, nodes, exponents) -> "NonlinearitySpec":
        nodes = tuple(float(v) for v in nodes)
        exponents = tuple(float(mi) for mi in exponents)
        if len(nodes) != len(exponents) or not nodes:
            raise NonlinearityError("product kind needs matching nodes and exponents")
        if any(mi <= 1 for mi in exponents):
            raise NonlinearityError("product exponents must exceed 1")
        m = 1.0 + sum(mi - 1.0 for mi in exponents)
        return NonlinearitySpec(kind="product", m=m, c=c, nodes=nodes, exponents=exponents)

    @staticmethod
    def shifted(base: "NonlinearitySpec | None", eps3: float) -> "NonlinearitySpec":
        if eps3 < 0:
            raise NonlinearityError("eps3 must be nonnegative")
        m = base.m if base is not None else 2.0
        return NonlinearitySpec(kind="epsilon_shifted", m=m, eps3=eps3, base=base)

    @staticmethod
    def identity() -> "NonlinearitySpec":
        """Phi(v) = v, realized as the eps3-shift of the zero nonlinearity."""
        return NonlinearitySpec.shifted(None, 1.0)

    # --- evaluation ---------------------------------------------------------

    def phi(self, v):
        v = np.asarray(v, dtype=float)
        if self.kind == "power":
            return np.abs(v) ** (self.m - 1.0) * v
        if self.kind == "polynomial":
            return np.polynomial.polynomial.polyval(v, np.asarray(self.coeffs))
        if self.kind == "product":
            return _product_phi(self, v)
        if self.kind == "epsilon_shifted":
            out = self.eps3 * v
            if self.base is not None:
                out = out + self.base.phi(v)
            return out
        raise NonlinearityError(self.kind)

    def dphi(self, v):
        v = np.asarray(v, dtype=float)
        if self.kind == "power":
            return self.m * np.abs(v) ** (self.m - 1.0)
        if self.kind == "polynomial":
            der = np.polynomial.polynomial.polyder(np.asarray(self.coeffs))
            return np.polynomial.polynomial.polyval(v, der)
        if self.kind == "product":
            out = np.full_like(v, self.c, dtype=float)
            for vi, mi in zip(self.nodes, self.exponents):
                out = out * np.abs(v - vi) ** (mi - 1.0)
            return out
        if self.kind == "epsilon_shifted":
            out = np.full_like(v, self.eps3, dtype=float)
            if self.base is not None:
                out = out + self.base.dphi(v)
            return out
        raise NonlinearityError(self.kind)

    def ddphi(self, v):
        """Second derivative a.e. (singular points return the one-sided formula)."""
        v = np.asarray(v, dtype=float)
        if self.kind == "power":
            with np.errstate(divide="ignore", invalid="ignore"):
                out = self.m * (self.m - 1.0) * np.abs(v) ** (self.m - 2.0) * np.sign(v)
            return np.where(v == 0.0, 0.0, out)
        if self.kind == "polynomial":
            der2 = np.polynomial.polynomial.polyder(np.asarray(self.coeffs), 2)
            return np.polynomial.polynomial.polyval(v, der2)
        if self.kind == "product":
            # log-derivative of the product, a.e. away from the nodes
            dd = np.zeros_like(v)
            base = self.dphi(v)
            for vi, mi in zip(self.nodes, self.exponents):
                diff = v - vi
                with np.errstate(divide="ignore", invalid="ignore"):
                    dd = dd + np.where(diff == 0.0, 0.0, (mi - 1.0) / diff)
            return base * dd
        if self.kind == "epsilon_shifted":
            return self.base.ddphi(v) if self.base is not None else np.zeros_like(v)
        raise NonlinearityError(self.kind)

    def eval(self, v):
        """Consistent triple (Phi, Phi', Phi'')."""
        return self.phi(v), self.dphi(v), self.ddphi(v)

    def with_shift(self, eps3: float) -> "NonlinearitySpec":
        if eps3 == 0.0:
            return self
        return NonlinearitySpec.shifted(self, eps3)


def _product_phi(spec: NonlinearitySpec, v: np.ndarray):
    """Antiderivative of the product-form Phi' by adaptive quadrature, cached on a grid."""
    scalar = v.ndim == 0
    vv = np.atleast_1d(v)
    out = np.empty_like(vv)
    for i, val in enumerate(vv):
        out[i], _ = quad(lambda s: float(spec.dphi(s)), 0.0, float(val), limit=200)
    return out[0] if scalar else out


# --- level sets and co-area integrals ----------------------------------------

@dataclass(frozen=True)
class LevelSetResult:
    measure: float
    intervals: tuple
    crossings: int
    bracketing_ok: bool


def _crossings(spec: NonlinearitySpec, delta: float, v_max: float, n_scan: int = 20001):
    grid = np.linspace(-v_max, v_max, n_scan)
    vals = spec.dphi(grid) - delta
    roots = []
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            roots.append(grid[i])
        elif vals[i] * vals[i + 1] < 0:
            roots.append(brentq(lambda s: float(spec.dphi(s)) - delta, grid[i], grid[i + 1]))
    return sorted(roots), vals


def levelset_measure(spec: NonlinearitySpec, delta: float, v_max: float = 1e3) -> LevelSetResult:
    """Lebesgue measure of {v : Phi'(v) <= delta} by root bracketing of Phi' = delta."""
    if delta <= 0:
        raise NonlinearityError("delta must be positive")
    roots, vals = _crossings(spec, delta, v_max)
    pts = [-v_max] + roots + [v_max]
    measure = 0.0
    intervals = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        mid = 0.5 * (lo + hi)
        if spec.dphi(mid) <= delta:
            measure += hi - lo
            intervals.append((lo, hi))
    ok = len(roots) <= 100
    return LevelSetResult(measure=measure, intervals=tuple(intervals), crossings=len(roots), bracketing_ok=ok)


@dataclass(frozen=True)
class CoareaResult:
    I_low: float
    I_high: float
    delta: float
    v_max: float
    tail_estimate: float


def coarea_integrals(spec: NonlinearitySpec, delta: float, v_max: float = 1e3) -> CoareaResult:
    """I_low = int_{Phi'<=delta} |Phi''|, I_high = int_{Phi'>delta} |Phi''| / Phi'^2.

    Integration window |v| <= v_max with an analytic power-law tail estimate;
    the supported kinds all have |Phi''|/Phi'^2 ~ |v|^{-m} tails.
    """
    if delta <= 0:
        raise NonlinearityError("delta must be positive")
    roots, _ = _crossings(spec, delta, v_max)
    pts = [-v_max] + roots + [v_max]
    sing = sorted(set((0.0,) + spec.nodes))

    def integrate(f, lo, hi):
        # split at a.e.-singular points of Phi''
        cuts = [lo] + [s for s in sing if lo < s < hi] + [hi]
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            val, _ = quad(f, a, b, limit=200, points=None)
            total += val
        return total

    I_low = 0.0
    I_high = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        mid = 0.5 * (lo + hi)
        if spec.dphi(mid) <= delta:
            I_low += integrate(lambda s: float(np.abs(spec.ddphi(s))), lo, hi)
        else:
            I_high += integrate(
                lambda s: float(np.abs(spec.ddphi(s)) / spec.dphi(s) ** 2), lo, hi
            )
    # |Phi''|/Phi'^2 has an exact power-law tail |v|^{-m} for all supported
    # kinds; the window remainder is added analytically to I_high
    dphi_edge = float(spec.dphi(v_max))
    dd_edge = float(abs(spec.ddphi(v_max)))
    tail = 2.0 * dd_edge / dphi_edge**2 * v_max / max(spec.m - 1.0, 1e-12)
    return CoareaResult(I_low=I_low, I_high=I_high + tail, delta=delta, v_max=v_max, tail_estimate=tail)
