"""Closed-form reference solutions and oracle adapters.

1D: the two-phase similarity (Neumann-type) solution on a half line, with
the interface at s(t) = 2*lam*sqrt(alpha_s*(t + t0)) where lam solves the
transcendental flux balance

    k_s (T_m - T_1) exp(-lam^2) / (sqrt(pi alpha_s) erf(lam))
  - k_l (T_2 - T_m) exp(-lam^2 alpha_s/alpha_l)
        / (sqrt(pi alpha_l) erfc(lam sqrt(alpha_s/alpha_l)))
  = rho_s L lam sqrt(alpha_s)

and t0 fixed so that s(t_start) = s0.  The solid side is an erf profile,
the liquid side an erfc profile, both equal to T_m on the interface.

2D: circular solid growing into subcooled liquid with R(t) = R0*sqrt(t);
the liquid field depends on the similarity variable s = r/sqrt(t) through
F(s) = E1(s^2/(4*alpha_l)), the solid sits at T_m, and the far-field
temperature is fixed by the interface flux balance.

Oracle adapters expose these fields through the same evaluation protocol
as the networks (values / jets_multi / dir_jet), with exact derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DomainError, RootBracketError
from .specfun import erf, erfc, exp_integral_e1

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class PhysicsConfig:
    """Physical and geometric constants for one problem instance."""

    dim: int
    alpha_s: float = 1.0
    alpha_l: float = 1.0
    k_s: float = 1.0
    k_l: float = 1.0
    rho_s: float = 1.0
    latent: float = 1.0
    T_m: float = 0.0
    T_1: float | None = None  # 1D cold-wall temperature
    T_2: float | None = None  # 1D initial liquid temperature
    T_inf: float | None = None  # 2D far-field temperature
    s0: float | None = None  # 1D initial interface position
    R0: float | None = None  # 2D similarity constant
    domain: tuple = ((0.0, 1.0),)
    t_start: float = 0.0
    t_end: float = 0.25
    beta: float = 100.0
    eps_gamma: float = 0.05
    use_step_ic: bool = False
    pin_origin: bool = False

    def __post_init__(self):
        for name in ("alpha_s", "alpha_l", "k_s", "k_l", "rho_s", "latent", "beta", "eps_gamma"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"{name} must be positive", field=name)
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {self.dim}", field="dim")
        if len(self.domain) != self.dim:
            raise ConfigError("domain bounds must match dim", field="domain")
        if not self.t_end > self.t_start:
            raise ConfigError("need t_end > t_start", field="t_end")
        if self.dim == 1:
            if self.T_1 is None or self.T_2 is None or self.s0 is None:
                raise ConfigError("1D config needs T_1, T_2, s0", field="T_1")
            if not self.T_1 < self.T_m:
                raise ConfigError("need T_1 < T_m", field="T_1")
            if self.T_2 < self.T_m:
                raise ConfigError("need T_2 >= T_m", field="T_2")
            lo, hi = self.domain[0]
            if not lo < self.s0 < hi:
                raise ConfigError("s0 must lie inside the domain", field="s0")
        else:
            if self.R0 is None or not self.R0 > 0:
                raise ConfigError("2D config needs R0 > 0", field="R0")
            if not self.t_start > 0.0:
                raise ConfigError("2D problem needs t_start > 0", field="t_start")
            if self.T_inf is not None and not self.T_inf < self.T_m:
                raise ConfigError("need subcooled liquid, T_inf < T_m", field="T_inf")

    @property
    def time_window(self):
        return (self.t_start, self.t_end)

    def domain_diagonal(self) -> float:
        return math.sqrt(sum((hi - lo) ** 2 for lo, hi in self.domain))

    def input_ranges(self):
        """Normalization ranges for the temperature/level-set nets: space + time."""
        return list(self.domain) + [(self.t_start, self.t_end)]


def config_1d(**overrides) -> PhysicsConfig:
    """Desk-scale 1D defaults: unit properties, interface crossing [0.2, ~0.63]."""
    base = dict(
        dim=1,
        T_1=-1.0,
        T_2=0.5,
        s0=0.2,
        domain=((0.0, 1.0),),
        t_start=0.0,
        t_end=0.25,
        eps_gamma=0.05,
    )
    base.update(overrides)
    return PhysicsConfig(**base)


def config_2d(**overrides) -> PhysicsConfig:
    """Desk-scale 2D defaults matching the circular-growth benchmark geometry."""
    base = dict(
        dim=2,
        R0=1.56,
        domain=((-5.0, 5.0), (-5.0, 5.0)),
        t_start=1.0,
        t_end=3.0,
        eps_gamma=0.05 * math.sqrt(200.0),
        pin_origin=True,
    )
    base.update(overrides)
    cfg = PhysicsConfig(**base)
    if cfg.T_inf is None:
        cfg = replace(cfg, T_inf=frank_t_inf(cfg))
    return cfg


# --- 1D two-phase similarity solution ---------------------------------------

def neumann_residual(cfg: PhysicsConfig, lam: float) -> float:
    """Flux balance evaluated at lam; the root defines the similarity constant."""
    nu = math.sqrt(cfg.alpha_s / cfg.alpha_l)
    solid = (
        cfg.k_s
        * (cfg.T_m - cfg.T_1)
        * math.exp(-lam * lam)
        / (SQRT_PI * math.sqrt(cfg.alpha_s) * erf(lam))
    )
    liquid = (
        cfg.k_l
        * (cfg.T_2 - cfg.T_m)
        * math.exp(-lam * lam * nu * nu)
        / (SQRT_PI * math.sqrt(cfg.alpha_l) * erfc(lam * nu))
    )
    return solid - liquid - cfg.rho_s * cfg.latent * lam * math.sqrt(cfg.alpha_s)


@lru_cache(maxsize=128)
def _lambda_cached(key):
    cfg = PhysicsConfig(**dict(key))
    lo, hi = 1e-9, 1.0
    if not neumann_residual(cfg, lo) > 0.0:
        raise RootBracketError("no sign change: flux balance not positive at lam->0")
    while neumann_residual(cfg, hi) > 0.0:
        hi *= 2.0
        if hi > 64.0:
            raise RootBracketError("no sign change on (0, 64]: unphysical configuration")
    # plain bisection down to adjacent floats, then keep the better endpoint
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if neumann_residual(cfg, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return min((abs(neumann_residual(cfg, v)), v) for v in (lo, hi))[1]


def _cfg_key(cfg: PhysicsConfig):
    return tuple(sorted(cfg.__dict__.items()))


def neumann_lambda(cfg: PhysicsConfig) -> float:
    """Similarity constant of the 1D two-phase solution."""
    if cfg.dim != 1:
        raise ConfigError("neumann_lambda needs a 1D config", field="dim")
    return _lambda_cached(_cfg_key(cfg))


def neumann_time_shift(cfg: PhysicsConfig) -> float:
    """t0 such that the interface sits at s0 when t = t_start."""
    lam = neumann_lambda(cfg)
    return cfg.s0**2 / (4.0 * lam * lam * cfg.alpha_s)


def exact_interface_1d(cfg: PhysicsConfig, t) -> np.ndarray:
    """Interface position s(t) = 2 lam sqrt(alpha_s (t - t_start + t0))."""
    lam = neumann_lambda(cfg)
    tau = np.asarray(t, dtype=float) - cfg.t_start + neumann_time_shift(cfg)
    return 2.0 * lam * np.sqrt(cfg.alpha_s * tau)


def exact_1d(cfg: PhysicsConfig, x, t) -> np.ndarray:
    """Exact temperature: erf profile in the solid, erfc profile in the liquid."""
    lam = neumann_lambda(cfg)
    nu = math.sqrt(cfg.alpha_s / cfg.alpha_l)
    x = np.asarray(x, dtype=float)
    tau = np.asarray(t, dtype=float) - cfg.t_start + neumann_time_shift(cfg)
    x, tau = np.broadcast_arrays(x, tau)
    s = 2.0 * lam * np.sqrt(cfg.alpha_s * tau)
    xi_s = x / (2.0 * np.sqrt(cfg.alpha_s * tau))
    xi_l = x / (2.0 * np.sqrt(cfg.alpha_l * tau))
    solid = cfg.T_1 + (cfg.T_m - cfg.T_1) * erf(xi_s) / erf(lam)
    liquid = cfg.T_2 - (cfg.T_2 - cfg.T_m) * erfc(xi_l) / erfc(lam * nu)
    out = np.where(x <= s, solid, liquid)
    return out if out.ndim else float(out)


def initial_1d(cfg: PhysicsConfig, x) -> np.ndarray:
    """Initial temperature: time-shifted exact profile, or the raw step."""
    x = np.asarray(x, dtype=float)
    if cfg.use_step_ic:
        out = np.where(x < cfg.s0, cfg.T_1, cfg.T_2)
        return out if out.ndim else float(out)
    return exact_1d(cfg, x, cfg.t_start)


# --- 2D circular-growth similarity solution ----------------------------------

def frank_radius(cfg: PhysicsConfig, t) -> np.ndarray:
    """Interface radius R(t) = R0 sqrt(t)."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0):
        raise DomainError("frank_radius needs t > 0")
    out = cfg.R0 * np.sqrt(t)
    return out if out.ndim else float(out)


def _frank_f(cfg: PhysicsConfig, s):
    return exp_integral_e1(s * s / (4.0 * cfg.alpha_l))


def frank_t_inf(cfg: PhysicsConfig) -> float:
    """Far-field temperature making the field satisfy the interface flux balance.

    Solved with a bracketing root finder on the balance
    rho_s L dR/dt = -k_l du/dr|_(R+), which is linear in T_inf.
    """
    z0 = cfg.R0**2 / (4.0 * cfg.alpha_l)
    f0 = exp_integral_e1(z0)

    def balance(t_inf: float) -> float:
        # du/dr at the interface for far-field temperature t_inf
        du_dr = (t_inf - cfg.T_m) * 2.0 * math.exp(-z0) / (cfg.R0 * f0)
        return cfg.rho_s * cfg.latent * cfg.R0 / 2.0 + cfg.k_l * du_dr

    # bracket around the closed-form value
    guess = cfg.T_m - cfg.rho_s * cfg.latent * cfg.R0**2 * f0 * math.exp(z0) / (4.0 * cfg.k_l)
    lo, hi = guess - max(1.0, abs(guess)), cfg.T_m
    if not balance(lo) * balance(hi) < 0.0:
        lo = guess - 10.0 * max(1.0, abs(guess))
        if not balance(lo) * balance(hi) < 0.0:
            raise RootBracketError("no sign change when solving for the far-field temperature")
    from scipy.optimize import brentq

    return float(brentq(balance, lo, hi, xtol=1e-14, rtol=8.9e-16))


def frank_field(cfg: PhysicsConfig, r, t) -> np.ndarray:
    """Exact temperature at radius r: T_m in the solid, similarity decay outside."""
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0):
        raise DomainError("frank_field needs t > 0")
    if np.any(r < 0.0):
        raise DomainError("frank_field needs r >= 0")
    r, t = np.broadcast_arrays(r, t)
    radius = cfg.R0 * np.sqrt(t)
    s = np.maximum(r / np.sqrt(t), cfg.R0)  # solid branch masked below
    f0 = _frank_f(cfg, cfg.R0)
    liquid = cfg.T_m + (cfg.T_inf - cfg.T_m) * (1.0 - _frank_f(cfg, s) / f0)
    out = np.where(r <= radius, cfg.T_m, liquid)
    return out if out.ndim else float(out)


def sdf_circle(cfg: PhysicsConfig, xy, t) -> np.ndarray:
    """Signed distance to the circular interface: |x| - R(t), negative in the solid."""
    xy = np.asarray(xy, dtype=float)
    rr = np.sqrt(np.sum(xy * xy, axis=-1))
    out = rr - frank_radius(cfg, t)
    return out if np.ndim(out) else float(out)


# --- oracle adapters ----------------------------------------------------------

class AnalyticField:
    """Network-protocol adapter over an analytic field with exact derivatives.

    Subclasses implement ``_eval`` returning (value, gradient, hessian) with
    respect to the network inputs (space coordinates then time).
    """

    def _eval(self, pts):
        raise NotImplementedError

    @staticmethod
    def _as_points(pts):
        from .diffcore import is_var

        if is_var(pts):
            raise TypeError("analytic oracle adapters do not accept recorded inputs")
        return np.asarray(pts, dtype=float)

    def values(self, pts):
        return self._eval(self._as_points(pts))[0]

    def jets_multi(self, pts, directions):
        v, g, h = self._eval(self._as_points(pts))
        d1 = np.stack([g[:, d] for d in directions], axis=-1)
        d2 = np.stack([h[:, d, d] for d in directions], axis=-1)
        return v, d1, d2

    def dir_jet(self, pts, direction):
        v, g, h = self._eval(self._as_points(pts))
        from .diffcore import is_var, unsqueeze_last, value_of, vsum

        if is_var(direction):
            d1 = vsum(direction * g, axis=-1)
            hn = vsum(unsqueeze_last(direction) * h, axis=1)
            d2 = vsum(hn * direction, axis=-1)
            return v, d1, d2
        seed = np.asarray(value_of(direction), dtype=float)
        d1 = np.sum(g * seed, axis=-1)
        d2 = np.einsum("ni,nij,nj->n", seed, h, seed)
        return v, d1, d2


class ConstantField(AnalyticField):
    def __init__(self, value: float, dim_in: int):
        self.value = float(value)
        self.dim_in = dim_in

    def _eval(self, pts):
        n = pts.shape[0]
        return (
            np.full(n, self.value),
            np.zeros((n, self.dim_in)),
            np.zeros((n, self.dim_in, self.dim_in)),
        )


class Phase1DOracle(AnalyticField):
    """Smooth one-phase continuation u = base + amp*erf(x / (2 sqrt(alpha tau)))."""

    def __init__(self, cfg: PhysicsConfig, phase: str):
        lam = neumann_lambda(cfg)
        nu = math.sqrt(cfg.alpha_s / cfg.alpha_l)
        if phase == "solid":
            self.base = cfg.T_1
            self.amp = (cfg.T_m - cfg.T_1) / erf(lam)
            self.alpha = cfg.alpha_s
        elif phase == "liquid":
            amp = (cfg.T_2 - cfg.T_m) / erfc(lam * nu)
            self.base = cfg.T_2 - amp
            self.amp = amp
            self.alpha = cfg.alpha_l
        else:
            raise ValueError(f"unknown phase {phase!r}")
        self.t_shift = neumann_time_shift(cfg) - cfg.t_start

    def _eval(self, pts):
        x = pts[:, 0]
        tau = pts[:, 1] + self.t_shift
        n = pts.shape[0]
        root = 2.0 * np.sqrt(self.alpha * tau)
        xi = x / root
        c = (2.0 / SQRT_PI) * np.exp(-xi * xi)  # d erf / d xi
        xi_x = 1.0 / root
        xi_t = -xi / (2.0 * tau)
        xi_xx = 0.0
        xi_xt = -xi_x / (2.0 * tau)
        xi_tt = 0.75 * xi / (tau * tau)
        cp = -2.0 * xi * c  # d^2 erf / d xi^2
        v = self.base + self.amp * erf(xi)
        g = np.empty((n, 2))
        g[:, 0] = self.amp * c * xi_x
        g[:, 1] = self.amp * c * xi_t
        h = np.empty((n, 2, 2))
        h[:, 0, 0] = self.amp * (cp * xi_x * xi_x + c * xi_xx)
        h[:, 0, 1] = self.amp * (cp * xi_x * xi_t + c * xi_xt)
        h[:, 1, 0] = h[:, 0, 1]
        h[:, 1, 1] = self.amp * (cp * xi_t * xi_t + c * xi_tt)
        return v, g, h


class Interface1DOracle(AnalyticField):
    """Interface position s(t) with exact time derivatives."""

    def __init__(self, cfg: PhysicsConfig):
        self.lam = neumann_lambda(cfg)
        self.alpha = cfg.alpha_s
        self.t_shift = neumann_time_shift(cfg) - cfg.t_start

    def _eval(self, pts):
        tau = pts[:, 0] + self.t_shift
        n = pts.shape[0]
        v = 2.0 * self.lam * np.sqrt(self.alpha * tau)
        g = (self.lam * np.sqrt(self.alpha / tau))[:, None]
        h = (-0.5 * self.lam * math.sqrt(self.alpha) * tau**-1.5)[:, None, None]
        return v, g, h


class ExactField1DOracle(AnalyticField):
    """Piecewise exact 1D temperature (solid left of s(t), liquid right)."""

    def __init__(self, cfg: PhysicsConfig):
        self.cfg = cfg
        self.solid = Phase1DOracle(cfg, "solid")
        self.liquid = Phase1DOracle(cfg, "liquid")

    def _eval(self, pts):
        s = exact_interface_1d(self.cfg, pts[:, 1])
        vs, gs, hs = self.solid._eval(pts)
        vl, gl, hl = self.liquid._eval(pts)
        mask = pts[:, 0] <= s
        v = np.where(mask, vs, vl)
        g = np.where(mask[:, None], gs, gl)
        h = np.where(mask[:, None, None], hs, hl)
        return v, g, h


class FrankLiquidOracle(AnalyticField):
    """Smooth liquid-phase continuation of the 2D similarity field."""

    def __init__(self, cfg: PhysicsConfig, s_floor: float = 1e-6):
        self.cfg = cfg
        self.f0 = _frank_f(cfg, cfg.R0)
        self.s_floor = s_floor

    def _eval(self, pts):
        cfg = self.cfg
        x, y, t = pts[:, 0], pts[:, 1], pts[:, 2]
        n = pts.shape[0]
        r = np.sqrt(x * x + y * y)
        rs = np.maximum(r, self.s_floor * np.sqrt(t))  # keep s off the origin
        s = rs / np.sqrt(t)
        z = s * s / (4.0 * cfg.alpha_l)
        dT = cfg.T_inf - cfg.T_m
        ez = np.exp(-z)
        w = 1.0 - exp_integral_e1(z) / self.f0
        wp = (2.0 * ez / s) / self.f0
        wpp = (2.0 * ez * (-1.0 / (2.0 * cfg.alpha_l) - 1.0 / (s * s))) / self.f0
        # partials of s(x, y, t)
        sqt = np.sqrt(t)
        s_x = x / (rs * sqt)
        s_y = y / (rs * sqt)
        s_t = -s / (2.0 * t)
        s_xx = (1.0 / rs - x * x / rs**3) / sqt
        s_yy = (1.0 / rs - y * y / rs**3) / sqt
        s_xy = -x * y / (rs**3 * sqt)
        s_xt = -s_x / (2.0 * t)
        s_yt = -s_y / (2.0 * t)
        s_tt = 0.75 * s / (t * t)
        v = cfg.T_m + dT * w
        g = np.empty((n, 3))
        g[:, 0] = dT * wp * s_x
        g[:, 1] = dT * wp * s_y
        g[:, 2] = dT * wp * s_t
        h = np.empty((n, 3, 3))
        parts = {(0, 0): s_xx, (0, 1): s_xy, (0, 2): s_xt, (1, 1): s_yy, (1, 2): s_yt, (2, 2): s_tt}
        firsts = [s_x, s_y, s_t]
        for (i, j), sij in parts.items():
            h[:, i, j] = dT * (wpp * firsts[i] * firsts[j] + wp * sij)
            h[:, j, i] = h[:, i, j]
        return v, g, h


class ExactField2DOracle(AnalyticField):
    """Piecewise exact 2D temperature: T_m core, similarity decay outside."""

    def __init__(self, cfg: PhysicsConfig):
        self.cfg = cfg
        self.liquid = FrankLiquidOracle(cfg)

    def _eval(self, pts):
        r = np.sqrt(pts[:, 0] ** 2 + pts[:, 1] ** 2)
        radius = frank_radius(self.cfg, pts[:, 2])
        vl, gl, hl = self.liquid._eval(pts)
        mask = r <= radius
        v = np.where(mask, self.cfg.T_m, vl)
        g = np.where(mask[:, None], 0.0, gl)
        h = np.where(mask[:, None, None], 0.0, hl)
        return v, g, h


class SdfOracle(AnalyticField):
    """Exact signed distance |x| - R0 sqrt(t) with derivatives."""

    def __init__(self, cfg: PhysicsConfig, r_floor: float = 1e-12):
        self.cfg = cfg
        self.r_floor = r_floor

    def _eval(self, pts):
        x, y, t = pts[:, 0], pts[:, 1], pts[:, 2]
        n = pts.shape[0]
        r = np.maximum(np.sqrt(x * x + y * y), self.r_floor)
        sqt = np.sqrt(t)
        v = r - self.cfg.R0 * sqt
        g = np.empty((n, 3))
        g[:, 0] = x / r
        g[:, 1] = y / r
        g[:, 2] = -0.5 * self.cfg.R0 / sqt
        h = np.zeros((n, 3, 3))
        h[:, 0, 0] = (1.0 / r) - x * x / r**3
        h[:, 1, 1] = (1.0 / r) - y * y / r**3
        h[:, 0, 1] = h[:, 1, 0] = -x * y / r**3
        h[:, 2, 2] = 0.25 * self.cfg.R0 * t**-1.5
        return v, g, h
