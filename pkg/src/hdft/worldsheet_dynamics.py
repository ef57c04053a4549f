"""Classical worldsheet evolution on the flux torus and the Heisenberg nilmanifold.

Fields live on ``sigma_j = j/M``.  Only the periodic fluctuation is stored;
the winding (or twisted boundary) profile is added back analytically, so
boundary conditions hold exactly.

The torus system ``x_tt = x_ss - x_t x x_s`` is integrated by a symmetric
splitting: half kicks by ``x_ss``, half rotations by the velocity-dependent
cross term (Cayley form, norm preserving) and a full drift.  The scheme
is explicit and second order.  The Heisenberg systems use SSP-RK3.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

__all__ = [
    "WorldsheetState", "HeisenbergState", "MetricData", "CFLError",
    "DualityInconsistent", "torus_state", "heisenberg_state",
    "step_twisted_torus", "step_heisenberg", "evolve", "energy",
    "cross_term_orthogonality", "heisenberg_rhs", "heisenberg_residual",
    "tduality_map", "tduality_residual", "tduality_refinement",
    "remark_stencil_check", "torus_tduality_check", "simulate",
    "energy_study", "dump_csv",
]

CFL_DEFAULT = 0.25
CFL_LIMIT = 1.0


class CFLError(ValueError):
    """Time step exceeds the stability bound."""


class DualityInconsistent(ValueError):
    """Initial data violate the integrability condition of the duality map."""


@dataclass(frozen=True)
class WorldsheetState:
    u: np.ndarray            # (3, M) periodic fluctuation
    v: np.ndarray            # (3, M) d/dtau of the full field
    winding: tuple = (0, 0, 0)
    tau: float = 0.0
    dt: float = None
    flux: bool = True

    @property
    def M(self):
        return self.u.shape[1]

    @property
    def sigma(self):
        return np.arange(self.M) / self.M

    def full(self):
        return self.u + np.outer(np.asarray(self.winding, float), self.sigma)


@dataclass(frozen=True)
class HeisenbergState:
    """``y^1, y^3`` carry slopes ``gamma^1, gamma^3``; ``y^2`` the twisted profile.

    ``y^2 = u^2 + gamma^2 s + (s/2)(gamma^1 u^3 - gamma^3 u^1)`` makes
    ``y(s+1) = gamma . y(s)`` hold for the group law.
    """

    u: np.ndarray
    v: np.ndarray
    gamma: tuple = (0, 0, 0)
    tau: float = 0.0
    dt: float = None
    system: str = "direct"
    flux: bool = True

    @property
    def M(self):
        return self.u.shape[1]

    @property
    def sigma(self):
        return np.arange(self.M) / self.M

    def full(self, sigma=None, u=None):
        s = self.sigma if sigma is None else np.asarray(sigma, float)
        u = self.u if u is None else u
        g1, g2, g3 = (float(x) for x in self.gamma)
        y1 = u[0] + g1 * s
        y3 = u[2] + g3 * s
        y2 = u[1] + g2 * s + 0.5 * s * (g1 * u[2] - g3 * u[0])
        return np.array([y1, y2, y3])


def _group(a, b):
    """Heisenberg product ``a . b``."""
    return np.array([a[0] + b[0], a[1] + b[1] + 0.5 * a[0] * b[2] - 0.5 * a[2] * b[0],
                     a[2] + b[2]])


@dataclass(frozen=True)
class MetricData:
    """Flat metric on the torus or the left-invariant Heisenberg metric."""

    kind: str = "flat"

    def g(self, y):
        y = np.asarray(y, float)
        shape = y.shape[1:]
        if self.kind == "flat":
            return np.broadcast_to(np.eye(3).reshape((3, 3) + (1,) * len(shape)),
                                   (3, 3) + shape).copy()
        y1, y3 = y[0], y[2]
        one = np.ones(shape)
        return np.array([
            [1 + y3 ** 2 / 4, y3 / 2, -y1 * y3 / 4],
            [y3 / 2, one, -y1 / 2],
            [-y1 * y3 / 4, -y1 / 2, 1 + y1 ** 2 / 4],
        ])

    def ginv(self, y):
        y = np.asarray(y, float)
        shape = y.shape[1:]
        if self.kind == "flat":
            return self.g(y)
        y1, y3 = y[0], y[2]
        one = np.ones(shape)
        zero = np.zeros(shape)
        return np.array([
            [one, -y3 / 2, zero],
            [-y3 / 2, 1 + (y1 ** 2 + y3 ** 2) / 4, y1 / 2],
            [zero, y1 / 2, one],
        ])

    def inverse_defect(self, y):
        prod = np.einsum("ij...,jk...->ik...", self.g(y), self.ginv(y))
        eye = np.eye(3).reshape((3, 3) + (1,) * (prod.ndim - 2))
        return float(np.max(np.abs(prod - eye)))


# ---------------------------------------------------------------- constructors

def _default_dt(M, dt, cfl):
    h = 1.0 / M
    if dt is None:
        dt = cfl * h
    if dt > CFL_LIMIT * h * (1 + 1e-12):
        raise CFLError(f"dt={dt:.3g} exceeds {CFL_LIMIT} * dsigma = {CFL_LIMIT * h:.3g}")
    return float(dt)


def _check_arrays(u, v):
    u = np.array(u, float)
    v = np.array(v, float)
    if u.ndim != 2 or u.shape[0] != 3 or u.shape != v.shape:
        raise ValueError("fields must be arrays of shape (3, M)")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise ValueError("fields must be finite")
    return u, v


def torus_state(u, v, winding=(0, 0, 0), dt=None, cfl=CFL_DEFAULT, flux=True, tau=0.0):
    u, v = _check_arrays(u, v)
    w = tuple(int(x) for x in winding)
    return WorldsheetState(u, v, w, float(tau), _default_dt(u.shape[1], dt, cfl), flux)


def heisenberg_state(u, v, gamma=(0, 0, 0), dt=None, cfl=CFL_DEFAULT,
                     system="direct", flux=True, tau=0.0):
    u, v = _check_arrays(u, v)
    if system not in ("direct", "lagrangian"):
        raise ValueError("system must be 'direct' or 'lagrangian'")
    g = tuple(int(x) for x in gamma)
    return HeisenbergState(u, v, g, float(tau), _default_dt(u.shape[1], dt, cfl), system, flux)


# ---------------------------------------------------------------- stencils

def _d0(u, h):
    return (np.roll(u, -1, axis=-1) - np.roll(u, 1, axis=-1)) / (2 * h)


def _d2(u, h):
    return (np.roll(u, -1, axis=-1) - 2 * u + np.roll(u, 1, axis=-1)) / (h * h)


def _dplus(u, h):
    return (np.roll(u, -1, axis=-1) - u) / h


# ---------------------------------------------------------------- torus

def _torus_slope(s):
    h = 1.0 / s.M
    return _d0(s.u, h) + np.asarray(s.winding, float)[:, None]


def _rotate(v, b, dt):
    """Solve ``v' = v + dt ((v + v')/2) x b`` pointwise."""
    t = 0.5 * dt * b
    vp = v + np.cross(v, t, axis=0)
    k = 2.0 / (1.0 + np.sum(t * t, axis=0))
    return v + k * np.cross(vp, t, axis=0)


def step_twisted_torus(s: WorldsheetState) -> WorldsheetState:
    """One splitting step of ``x_tt - x_ss + x_t x x_s = 0``."""
    h = 1.0 / s.M
    dt = s.dt
    if dt > CFL_LIMIT * h * (1 + 1e-12):
        raise CFLError("time step violates the CFL bound")
    u, v = s.u, s.v.copy()
    v += 0.5 * dt * _d2(u, h)
    if s.flux:
        v = _rotate(v, -_torus_slope(s), 0.5 * dt)
    u = u + dt * v
    s2 = replace(s, u=u)
    if s.flux:
        v = _rotate(v, -_torus_slope(s2), 0.5 * dt)
    v = v + 0.5 * dt * _d2(u, h)
    return replace(s, u=u, v=v, tau=s.tau + dt)


def cross_term_orthogonality(s: WorldsheetState) -> float:
    """Discrete ``<v, v x x_s>``."""
    return float(np.sum(s.v * np.cross(s.v, _torus_slope(s), axis=0)) / s.M)


# ---------------------------------------------------------------- Heisenberg

def _heis_derivs(s: HeisenbergState, u):
    h = 1.0 / s.M
    sig = s.sigma
    g1, g2, g3 = (float(x) for x in s.gamma)
    du = _d0(u, h)
    ddu = _d2(u, h)
    y = s.full(u=u)
    yp = np.array([
        du[0] + g1,
        du[1] + g2 + 0.5 * (g1 * u[2] - g3 * u[0]) + 0.5 * sig * (g1 * du[2] - g3 * du[0]),
        du[2] + g3,
    ])
    ypp = np.array([
        ddu[0],
        ddu[1] + (g1 * du[2] - g3 * du[0]) + 0.5 * sig * (g1 * ddu[2] - g3 * ddu[0]),
        ddu[2],
    ])
    return y, yp, ypp


def heisenberg_rhs(y, ys, yt, system="direct", flux=True):
    """``y_tt - y_ss`` for the direct system or the Euler-Lagrange system of the metric."""
    if not flux:
        return np.zeros_like(y)
    y1, y2, y3 = y
    s1, s2, s3 = ys
    t1, t2, t3 = yt
    S = s2 - 0.5 * y1 * s3 + 0.5 * y3 * s1
    if system == "direct":
        return np.array([
            S * s3 - t3 * t2,
            0.5 * y3 * s2 - 0.5 * y1 * s3,
            t1 * t2 - S * s3,
        ])
    if system == "lagrangian":
        T = t2 - 0.5 * y1 * t3 + 0.5 * y3 * t1
        f1 = S * s3 - T * t3
        f3 = -S * s1 + T * t1
        return np.array([f1, 0.5 * (y1 * f3 - y3 * f1), f3])
    raise ValueError(f"unknown system {system!r}")


def _heis_flow(s, u, v):
    y, yp, ypp = _heis_derivs(s, u)
    acc = ypp + heisenberg_rhs(y, yp, v, s.system, s.flux)
    g1, _, g3 = (float(x) for x in s.gamma)
    du = np.array([v[0], v[1] - 0.5 * s.sigma * (g1 * v[2] - g3 * v[0]), v[2]])
    return du, acc


def step_heisenberg(s: HeisenbergState) -> HeisenbergState:
    """One SSP-RK3 step of the Heisenberg system selected by ``s.system``."""
    h = 1.0 / s.M
    dt = s.dt
    if dt > CFL_LIMIT * h * (1 + 1e-12):
        raise CFLError("time step violates the CFL bound")
    u0, v0 = s.u, s.v
    a, b = _heis_flow(s, u0, v0)
    u1, v1 = u0 + dt * a, v0 + dt * b
    a, b = _heis_flow(s, u1, v1)
    u2 = 0.75 * u0 + 0.25 * (u1 + dt * a)
    v2 = 0.75 * v0 + 0.25 * (v1 + dt * b)
    a, b = _heis_flow(s, u2, v2)
    u3 = u0 / 3 + 2 / 3 * (u2 + dt * a)
    v3 = v0 / 3 + 2 / 3 * (v2 + dt * b)
    return replace(s, u=u3, v=v3, tau=s.tau + dt)


def evolve(s, steps, keep=False):
    step = step_twisted_torus if isinstance(s, WorldsheetState) else step_heisenberg
    series = [s] if keep else None
    for _ in range(int(steps)):
        s = step(s)
        if keep:
            series.append(s)
    return series if keep else s


# ---------------------------------------------------------------- energy

def energy(s, m: MetricData = None) -> float:
    """``sum (1/2) g_ij y_s^i y_s^j + (1/2) g^ij p_i p_j`` times ``dsigma``."""
    h = 1.0 / s.M
    if isinstance(s, WorldsheetState):
        m = m or MetricData("flat")
        xs = _dplus(s.u, h) + np.asarray(s.winding, float)[:, None]
        y = s.full()
        g = m.g(y)
        p = np.einsum("ij...,j...->i...", g, s.v)
        dens = 0.5 * np.einsum("ij...,i...,j...->...", g, xs, xs) \
            + 0.5 * np.einsum("ij...,i...,j...->...", m.ginv(y), p, p)
        return float(np.sum(dens) * h)
    m = m or MetricData("heisenberg")
    y, yp, _ = _heis_derivs(s, s.u)
    g = m.g(y)
    p = np.einsum("ij...,j...->i...", g, s.v)
    dens = 0.5 * np.einsum("ij...,i...,j...->...", g, yp, yp) \
        + 0.5 * np.einsum("ij...,i...,j...->...", m.ginv(y), p, p)
    return float(np.sum(dens) * h)


def _smooth_torus_data(M, amplitude=0.1, seed=0):
    rng = np.random.default_rng(seed)
    sig = np.arange(M) / M
    u = np.zeros((3, M))
    v = np.zeros((3, M))
    for i in range(3):
        for k in (1, 2):
            a, b, c, d = rng.uniform(-1, 1, 4) * amplitude / k
            u[i] += a * np.sin(2 * np.pi * k * sig) + b * np.cos(2 * np.pi * k * sig)
            v[i] += c * np.sin(2 * np.pi * k * sig) + d * np.cos(2 * np.pi * k * sig)
    return u, v


def energy_study(M=256, steps=1000, winding=(1, 0, 1), amplitude=0.02, cfl=CFL_DEFAULT,
                 seed=0, flux=True):
    """Largest relative energy deviation over ``steps`` steps from smooth data."""
    u, v = _smooth_torus_data(M, amplitude, seed)
    s = torus_state(u, v, winding, cfl=cfl, flux=flux)
    e0 = energy(s)
    worst = 0.0
    orth = 0.0
    for _ in range(int(steps)):
        s = step_twisted_torus(s)
        worst = max(worst, abs(energy(s) - e0) / e0)
        orth = max(orth, abs(cross_term_orthogonality(s)))
    return {"M": M, "steps": steps, "cfl": cfl, "winding": list(winding), "energy0": e0,
            "relative_drift": worst, "max_cross_term": orth}


# ---------------------------------------------------------------- T-duality

def _cumtrapz_periodic_grid(f, h):
    """``F_j = int_0^{sigma_j} f`` by the trapezoid rule (``F_0 = 0``)."""
    out = np.zeros_like(f)
    out[..., 1:] = np.cumsum(0.5 * (f[..., 1:] + f[..., :-1]), axis=-1) * h
    return out


def tduality_map(series, covariant=True, sigma_sign=-1, strict=False, tol=1e-6):
    """Heisenberg fields from a torus solution sampled at every step.

    ``y^1 = x^1`` and ``y^3 = x^3``.  ``y^2`` is fixed at ``tau = 0`` by
    ``y2_s - (1/2) y1 y3_s + (1/2) y3 y1_s = sigma_sign * x2_t`` with
    ``y^2(0,0) = 0`` and then integrated in time from ``y2_t = -x2_s``, to
    which ``covariant=True`` adds ``(1/2)(y1 y3_t - y3 y1_t)``.  Without
    flux the correction terms are dropped and the map is the free-field one.

    Returns ``(taus, Y)`` with ``Y`` of shape ``(steps+1, 3, M)``, plus the
    integrability defect of the chosen convention at the first step.
    """
    if len(series) < 3:
        raise ValueError("need at least three time levels")
    M = series[0].M
    h = 1.0 / M
    dt = series[0].dt
    X = np.array([s.full() for s in series])
    V = np.array([s.v for s in series])
    w = np.asarray(series[0].winding, float)[:, None]
    XS = np.array([_d0(s.u, h) + w for s in series])        # x_s at every level
    Y = np.empty_like(X)
    Y[:, 0] = X[:, 0]
    Y[:, 2] = X[:, 2]
    flux = series[0].flux

    def sd(n):
        r = sigma_sign * V[n, 1]
        if flux:
            r = r + 0.5 * (X[n, 0] * XS[n, 2] - X[n, 2] * XS[n, 0])
        return r

    def td(n):
        r = -XS[n, 1]
        if covariant and flux:
            r = r + 0.5 * (X[n, 0] * V[n, 2] - X[n, 2] * V[n, 0])
        return r

    Y[0, 1] = _cumtrapz_periodic_grid(sd(0), h)
    for n in range(1, len(series)):
        Y[n, 1] = Y[n - 1, 1] + 0.5 * dt * (td(n - 1) + td(n))
    # integrability: d/dtau of y2_s against d/dsigma of y2_t at the first step
    lhs = (sd(1) - sd(0)) / dt
    rhs = (_d0_nonperiodic(td(0) + td(1), h)) / 2
    inner = slice(2, M - 2)
    defect = float(np.max(np.abs(lhs[inner] - rhs[inner])))
    if strict and defect > tol:
        raise DualityInconsistent(f"mixed partials differ by {defect:.3g}")
    taus = np.array([s.tau for s in series])
    return taus, Y, defect


def _d0_nonperiodic(f, h):
    out = np.zeros_like(f)
    out[..., 1:-1] = (f[..., 2:] - f[..., :-2]) / (2 * h)
    return out


def heisenberg_residual(Y, dt, h, n, system="direct", flux=True, margin=2):
    """Max-norm residual of the Heisenberg system at time level ``n`` on interior points."""
    y = Y[n]
    yt = (Y[n + 1] - Y[n - 1]) / (2 * dt)
    ytt = (Y[n + 1] - 2 * Y[n] + Y[n - 1]) / (dt * dt)
    ys = np.zeros_like(y)
    yss = np.zeros_like(y)
    ys[:, 1:-1] = (y[:, 2:] - y[:, :-2]) / (2 * h)
    yss[:, 1:-1] = (y[:, 2:] - 2 * y[:, 1:-1] + y[:, :-2]) / (h * h)
    res = ytt - yss - heisenberg_rhs(y, ys, yt, system, flux)
    inner = slice(margin, y.shape[1] - margin)
    return float(np.max(np.abs(res[:, inner])))


def tduality_residual(M=64, T=0.25, winding=(1, 0, 1), amplitude=0.2, seed=1,
                      system="direct", covariant=False, sigma_sign=-1, flux=True,
                      cfl=CFL_DEFAULT):
    """Solve the torus system, map it and evaluate the Heisenberg residual at ``T/2``."""
    u, v = _smooth_torus_data(M, amplitude, seed)
    s = torus_state(u, v, winding, cfl=cfl, flux=flux)
    steps = int(round(T / s.dt))
    series = evolve(s, steps, keep=True)
    taus, Y, defect = tduality_map(series, covariant=covariant, sigma_sign=sigma_sign)
    n = steps // 2
    r = heisenberg_residual(Y, s.dt, 1.0 / M, n, system, flux)
    return {"M": M, "dt": s.dt, "steps": steps, "residual": r, "integrability_defect": defect}


def tduality_refinement(levels=(64, 128, 256), **kw):
    """Residuals on successive grids and the observed convergence slopes."""
    rows = [tduality_residual(M, **kw) for M in levels]
    slopes = [float(np.log(rows[i]["residual"] / rows[i + 1]["residual"])
                    / np.log(levels[i + 1] / levels[i]))
              for i in range(len(rows) - 1)]
    return {"levels": list(levels), "rows": rows, "slopes": slopes,
            "min_slope": min(slopes) if slopes else None}


def remark_stencil_check():
    """First Heisenberg equation with the duality substitution, on symbolic stencils.

    Grid values around one point are free symbols; the discrete right-hand
    side of the first direct equation, after substituting the duality
    relations on the same stencils, must equal the discrete flux term of
    the first torus equation.
    """
    import sympy as sp

    x1, x3 = sp.symbols("x1 x3")
    x1s, x2s, x3s = sp.symbols("x1_s x2_s x3_s")
    x1t, x2t, x3t = sp.symbols("x1_t x2_t x3_t")
    # stencil values: centered differences are the symbols above
    y1, y3 = x1, x3
    y1s, y3s = x1s, x3s
    S = -x2t                       # y2_s - y1 y3_s / 2 + y3 y1_s / 2
    y2t = -x2s
    heis = S * y3s - x3t * y2t
    torus = -(x2t * x3s - x3t * x2s)
    diff = sp.expand(heis - torus)
    return {"heisenberg_rhs": str(sp.expand(heis)), "torus_rhs": str(sp.expand(torus)),
            "difference": str(diff), "ok": diff == 0}


def torus_tduality_check(g1, g2, bound=5):
    """Circle zero-mode spectra ``(g w^2 + p^2/g)/2`` under ``(w, p) -> (p, w)``."""
    g1 = Fraction(g1) if not isinstance(g1, str) else Fraction(g1)
    g2 = Fraction(g2) if not isinstance(g2, str) else Fraction(g2)
    if g1 <= 0 or g2 <= 0:
        raise ValueError("metrics must be positive")
    rng = range(-bound, bound + 1)

    def pair(a, b):
        return a[0] * b[1] + a[1] * b[0]

    def swap(a):
        return a[1], a[0]

    lat = [(w, p) for w in rng for p in rng]
    pairing_ok = all(pair(swap(a), swap(b)) == pair(a, b) for a in lat[::7] for b in lat[::5])
    mismatches = []
    for w in rng:
        for p in rng:
            e1 = (g1 * w * w + p * p / g1) / 2
            e2 = (g2 * p * p + w * w / g2) / 2
            if e1 != e2:
                mismatches.append((w, p, e1, e2))
    return {"g1": str(g1), "g2": str(g2), "dual": g2 == 1 / g1, "pairing_preserved": pairing_ok,
            "checked": len(rng) ** 2, "mismatches": len(mismatches),
            "match": not mismatches}


# ---------------------------------------------------------------- runs

def simulate(config):
    """Run either model from a flat config; returns a JSON-ready manifest."""
    model = config.get("model", "torus")
    M = int(config.get("M", 128))
    steps = int(config.get("steps", 100))
    cfl = float(config.get("cfl", CFL_DEFAULT))
    amp = float(config.get("amplitude", 0.1))
    seed = int(config.get("seed", 0))
    flux = str(config.get("flux", "true")).lower() not in ("0", "false", "no", "off")
    u, v = _smooth_torus_data(M, amp, seed)
    every = max(1, int(config.get("record_every", max(1, steps // 10))))
    if model == "torus":
        wind = _vec(config.get("winding", "0,0,0"))
        s = torus_state(u, v, wind, cfl=cfl, flux=flux)
        boundary = {"winding": list(wind)}
    elif model == "heisenberg":
        gam = _vec(config.get("gamma", "0,0,0"))
        s = heisenberg_state(u, v, gam, cfl=cfl, flux=flux,
                             system=config.get("system", "direct"))
        boundary = {"gamma": list(gam)}
    else:
        raise ValueError(f"unknown model {model!r}")
    energies = [(0.0, energy(s))]
    snaps = [s]
    for k in range(1, steps + 1):
        s = (step_twisted_torus if model == "torus" else step_heisenberg)(s)
        if k % every == 0 or k == steps:
            energies.append((s.tau, energy(s)))
            snaps.append(s)
    e0 = energies[0][1]
    drift = max(abs(e - e0) for _, e in energies) / e0 if e0 else 0.0
    manifest = {"model": model, "M": M, "steps": steps, "cfl": cfl, "dt": s.dt,
                "flux": flux, "boundary": boundary, "energy": energies,
                "relative_drift": drift, "finite": bool(np.all(np.isfinite(s.u)))}
    if config.get("csv"):
        dump_csv(snaps, config["csv"])
        manifest["csv"] = config["csv"]
    return manifest, snaps


def _vec(x):
    if isinstance(x, str):
        x = [t for t in x.replace(" ", "").split(",") if t]
    v = tuple(int(t) for t in x)
    if len(v) != 3:
        raise ValueError("expected three integers")
    return v


def dump_csv(snaps, path):
    with open(path, "w") as fh:
        fh.write("tau,sigma,f1,f2,f3\n")
        for s in snaps:
            F = s.full()
            for j, sg in enumerate(s.sigma):
                fh.write(f"{s.tau!r},{sg!r},{F[0, j]!r},{F[1, j]!r},{F[2, j]!r}\n")


def manifest_json(manifest):
    return json.dumps(manifest, indent=2, default=float)
