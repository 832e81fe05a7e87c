"""
Closed-form one-parameter copula families.

Formulas are written on the log scale wherever powers of the arguments can
overflow (Clayton and Gumbel at strong dependence, Frank at large |theta|).
"""
import logging

import numpy as np
from scipy import integrate, special
from scipy.optimize import brentq
from scipy.stats import multivariate_normal

from ..constants import (
    FAMILY_INDEPENDENCE, FAMILY_CLAYTON, FAMILY_FRANK, FAMILY_GUMBEL, FAMILY_GAUSSIAN,
    UNIT_CLAMP, HINV_TOL, HINV_MAX_ITER
)
from ..exceptions import DomainError, ConvergenceError, UnsupportedOperationError
from .base import CopulaFamily

logger = logging.getLogger("SVCT.BivCop")

# |theta| below this is treated as the Frank independence limit
FRANK_TINY = 1e-5
FRANK_MAX = 35.0

class IndependenceFamily(CopulaFamily):
    """Product copula C(u, v) = uv"""

    name = FAMILY_INDEPENDENCE
    independence_value = 0.0
    fit_bounds = (0.0, 0.0)
    has_parameter = False

    def admissible(self, theta):
        return np.asarray(theta) == 0.0

    def cdf(self, u, v, theta):
        return u * v

    def log_pdf(self, u, v, theta):
        return np.zeros(np.broadcast(u, v).shape)

    def h2(self, u, v, theta):
        return np.broadcast_to(u, np.broadcast(u, v).shape).astype(float)

    def hinv2(self, p, v, theta):
        return np.broadcast_to(p, np.broadcast(p, v).shape).astype(float)

    def score(self, u, v, theta):
        raise UnsupportedOperationError("the independence copula has no parameter",
                                        family=self.name, operation="score")

    def score_at_independence(self, u, v):
        return self.score(u, v, None)

    def tau(self, theta):
        return 0.0

    def theta_from_tau(self, tau):
        if tau != 0.0:
            raise DomainError("independence copula only attains tau = 0", parameter="tau", value=tau)
        return 0.0

class ClaytonFamily(CopulaFamily):
    """C(u, v) = (u^-t + v^-t - 1)^(-1/t), t > 0"""

    name = FAMILY_CLAYTON
    independence_value = 0.0
    fit_bounds = (1e-4, 40.0)

    def admissible(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.isfinite(theta) & (theta >= 0.0)

    def safe_theta(self):
        return 1.0

    @staticmethod
    def _log_a(lu, lv, theta):
        # log(u^-t + v^-t - 1); the logaddexp term is >= log 2
        m = np.logaddexp(-theta * lu, -theta * lv)
        return m + np.log(-np.expm1(-m))

    def cdf(self, u, v, theta):
        lu, lv = np.log(u), np.log(v)
        return np.exp(-self._log_a(lu, lv, theta) / theta)

    def log_pdf(self, u, v, theta):
        lu, lv = np.log(u), np.log(v)
        log_a = self._log_a(lu, lv, theta)
        return np.log1p(theta) - (1.0 + theta) * (lu + lv) - (2.0 + 1.0 / theta) * log_a

    def h2(self, u, v, theta):
        lu, lv = np.log(u), np.log(v)
        log_a = self._log_a(lu, lv, theta)
        return np.exp(-(theta + 1.0) * lv - (1.0 + 1.0 / theta) * log_a)

    def hinv2(self, p, v, theta):
        b = -theta * np.log(v)
        delta = -theta / (theta + 1.0) * np.log(p)
        log_inner = np.logaddexp(0.0, b + np.log(np.expm1(delta)))
        return np.exp(-log_inner / theta)

    def score(self, u, v, theta):
        lu, lv = np.log(u), np.log(v)
        log_a = self._log_a(lu, lv, theta)
        wa = np.exp(-theta * lu - log_a)
        wb = np.exp(-theta * lv - log_a)
        dlog_a = -lu * wa - lv * wb
        return (1.0 / (1.0 + theta) - (lu + lv) + log_a / theta ** 2
                - (2.0 + 1.0 / theta) * dlog_a)

    def score_at_independence(self, u, v):
        return (1.0 + np.log(u)) * (1.0 + np.log(v))

    def tau(self, theta):
        return theta / (theta + 2.0)

    def theta_from_tau(self, tau):
        if not 0.0 <= tau < 1.0:
            raise DomainError("Clayton attains only tau in [0, 1)", parameter="tau", value=tau)
        return 2.0 * tau / (1.0 - tau)

class FrankFamily(CopulaFamily):
    """C(u, v) = -log(1 + (e^-tu - 1)(e^-tv - 1)/(e^-t - 1))/t, t != 0"""

    name = FAMILY_FRANK
    independence_value = 0.0
    fit_bounds = (-FRANK_MAX, FRANK_MAX)

    def admissible(self, theta):
        return np.isfinite(np.asarray(theta, dtype=float))

    def safe_theta(self):
        return 1.0

    def cdf(self, u, v, theta):
        x, y, z = np.expm1(-theta * u), np.expm1(-theta * v), np.expm1(-theta)
        return -np.log1p(x * y / z) / theta

    def log_pdf(self, u, v, theta):
        x, y, z = np.expm1(-theta * u), np.expm1(-theta * v), np.expm1(-theta)
        d = -z - x * y
        return np.log(-theta * z) - theta * (u + v) - 2.0 * np.log(np.abs(d))

    def h2(self, u, v, theta):
        x, y, z = np.expm1(-theta * u), np.expm1(-theta * v), np.expm1(-theta)
        return x * np.exp(-theta * v) / (z + x * y)

    def hinv2(self, p, v, theta):
        y, z = np.expm1(-theta * v), np.expm1(-theta)
        x = p * z / (np.exp(-theta * v) - p * y)
        return -np.log1p(x) / theta

    def score(self, u, v, theta):
        x, y, z = np.expm1(-theta * u), np.expm1(-theta * v), np.expm1(-theta)
        d = -z - x * y
        dd = np.exp(-theta) + u * np.exp(-theta * u) * y + v * np.exp(-theta * v) * x
        return 1.0 / theta + 1.0 / np.expm1(theta) - (u + v) - 2.0 * dd / d

    def score_at_independence(self, u, v):
        return 0.5 * (1.0 - 2.0 * u) * (1.0 - 2.0 * v)

    def tau(self, theta):
        theta = float(theta)
        if abs(theta) < FRANK_TINY:
            return theta / 9.0
        a = abs(theta)
        debye = integrate.quad(lambda t: t / np.expm1(t), 0.0, a, epsabs=1e-14, epsrel=1e-13)[0] / a
        return float(np.sign(theta) * (1.0 - 4.0 / a * (1.0 - debye)))

    def theta_from_tau(self, tau):
        if not -1.0 < tau < 1.0:
            raise DomainError("Kendall's tau must lie in (-1, 1)", parameter="tau", value=tau)
        target = abs(tau)
        if target <= self.tau(FRANK_TINY):
            return 0.0
        upper = self.tau(FRANK_MAX)
        if target >= upper:
            raise DomainError(f"Frank parameters are searched in [-{FRANK_MAX}, {FRANK_MAX}] "
                              f"(|tau| < {upper:.4f})", parameter="tau", value=tau)
        root = brentq(lambda t: self.tau(t) - target, FRANK_TINY, FRANK_MAX, xtol=1e-13, rtol=1e-14)
        return float(np.sign(tau) * root)

class GumbelFamily(CopulaFamily):
    """C(u, v) = exp(-((-log u)^t + (-log v)^t)^(1/t)), t >= 1"""

    name = FAMILY_GUMBEL
    independence_value = 1.0
    fit_bounds = (1.0, 30.0)

    def admissible(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.isfinite(theta) & (theta >= 1.0)

    def safe_theta(self):
        return 2.0

    @staticmethod
    def _parts(u, v, theta):
        x, y = -np.log(u), -np.log(v)
        lx, ly = np.log(x), np.log(y)
        log_a = np.logaddexp(theta * lx, theta * ly)
        return x, y, lx, ly, log_a

    def cdf(self, u, v, theta):
        _, _, _, _, log_a = self._parts(u, v, theta)
        return np.exp(-np.exp(log_a / theta))

    def log_pdf(self, u, v, theta):
        x, y, lx, ly, log_a = self._parts(u, v, theta)
        lw = log_a / theta
        w = np.exp(lw)
        return (-w + (theta - 1.0) * (lx + ly) + x + y
                + (1.0 - 2.0 * theta) * lw + np.log(w + theta - 1.0))

    def h2(self, u, v, theta):
        _, y, _, ly, log_a = self._parts(u, v, theta)
        w = np.exp(log_a / theta)
        return np.exp(-w + (1.0 / theta - 1.0) * log_a + (theta - 1.0) * ly + y)

    def hinv2(self, p, v, theta):
        shape = np.broadcast(p, v, theta).shape
        p, v, theta = (np.ravel(np.broadcast_to(a, shape)).astype(float) for a in (p, v, theta))
        lo = np.full(p.shape, UNIT_CLAMP)
        hi = np.full(p.shape, 1.0 - UNIT_CLAMP)
        u = np.clip(p, lo, hi)
        done = np.zeros(p.shape, dtype=bool)
        residual = np.full(p.shape, np.inf)

        for _ in range(HINV_MAX_ITER):
            act = np.flatnonzero(~done)
            if act.size == 0:
                break
            ua, va, ta, pa = u[act], v[act], theta[act], p[act]
            f = self.h2(ua, va, ta) - pa
            residual[act] = np.abs(f)
            below = f < 0.0
            lo[act] = np.where(below, ua, lo[act])
            hi[act] = np.where(below, hi[act], ua)

            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                step = ua - f / np.exp(self.log_pdf(ua, va, ta))
            la, ha = lo[act], hi[act]
            bisect = ~np.isfinite(step) | (step <= la) | (step >= ha)
            new_u = np.where(bisect, 0.5 * (la + ha), step)

            converged = np.abs(f) < HINV_TOL
            collapsed = (ha - la) <= 4.0 * np.spacing(ha)
            u[act] = np.where(converged, ua, np.where(collapsed, 0.5 * (la + ha), new_u))
            done[act] = converged | collapsed

        if not done.all():
            raise ConvergenceError(
                "Gumbel h-inverse did not converge",
                operation="hinv",
                diagnostics={
                    "unconverged": int((~done).sum()),
                    "max_residual": float(residual[~done].max()),
                    "iterations": HINV_MAX_ITER
                })
        return u.reshape(shape)

    def score(self, u, v, theta):
        _, _, lx, ly, log_a = self._parts(u, v, theta)
        lw = log_a / theta
        w = np.exp(lw)
        dlog_a = lx * np.exp(theta * lx - log_a) + ly * np.exp(theta * ly - log_a)
        dlw = -log_a / theta ** 2 + dlog_a / theta
        dw = w * dlw
        return (-dw + (lx + ly) + (1.0 - 2.0 * theta) * dlw - 2.0 * lw
                + (dw + 1.0) / (w + theta - 1.0))

    def tau(self, theta):
        return 1.0 - 1.0 / theta

    def theta_from_tau(self, tau):
        if not 0.0 <= tau < 1.0:
            raise DomainError("Gumbel attains only tau in [0, 1)", parameter="tau", value=tau)
        return 1.0 / (1.0 - tau)

class GaussianFamily(CopulaFamily):
    """Bivariate normal copula with correlation t in (-1, 1)"""

    name = FAMILY_GAUSSIAN
    independence_value = 0.0
    fit_bounds = (-0.999, 0.999)

    def admissible(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.isfinite(theta) & (np.abs(theta) < 1.0)

    def safe_theta(self):
        return 0.5

    def cdf(self, u, v, theta):
        a, b = special.ndtri(u), special.ndtri(v)
        shape = np.broadcast(a, b, theta).shape
        a, b, theta = (np.ravel(np.broadcast_to(x, shape)) for x in (a, b, theta))
        out = np.empty(a.shape)
        for rho in np.unique(theta):
            sel = theta == rho
            pts = np.column_stack([a[sel], b[sel]])
            out[sel] = np.atleast_1d(multivariate_normal.cdf(
                pts, mean=[0.0, 0.0], cov=[[1.0, rho], [rho, 1.0]], abseps=1e-12, releps=1e-12))
        return out.reshape(shape)

    def log_pdf(self, u, v, theta):
        a, b = special.ndtri(u), special.ndtri(v)
        s = 1.0 - theta ** 2
        return -0.5 * np.log(s) - (theta ** 2 * (a ** 2 + b ** 2) - 2.0 * theta * a * b) / (2.0 * s)

    def h2(self, u, v, theta):
        a, b = special.ndtri(u), special.ndtri(v)
        return special.ndtr((a - theta * b) / np.sqrt(1.0 - theta ** 2))

    def hinv2(self, p, v, theta):
        b = special.ndtri(v)
        return special.ndtr(special.ndtri(p) * np.sqrt(1.0 - theta ** 2) + theta * b)

    def score(self, u, v, theta):
        a, b = special.ndtri(u), special.ndtri(v)
        s = 1.0 - theta ** 2
        return theta / s - (theta * (a ** 2 + b ** 2) - a * b * (1.0 + theta ** 2)) / s ** 2

    def tau(self, theta):
        return 2.0 / np.pi * float(np.arcsin(theta))

    def theta_from_tau(self, tau):
        if not -1.0 < tau < 1.0:
            raise DomainError("Kendall's tau must lie in (-1, 1)", parameter="tau", value=tau)
        return float(np.sin(np.pi * tau / 2.0))
