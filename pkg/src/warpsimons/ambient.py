"""Warped products eps*I x_a Q_s^N(c) in the conformal fiber chart.

Slot 0 of every ambient vector is the t-direction; slots 1..N are the
conformal coordinates x of the fiber, whose metric is phi(x)^2 * eta with
phi = 1 / (1 + (c/4) <x, x>_eta) and eta = diag(+1 x (N-s), -1 x s).

Curvature convention: R(X,Y)Z = D_X D_Y Z - D_Y D_X Z - D_[X,Y] Z and
R(X,Y,Z,W) = <R(X,Y)Z, W>.  With this convention the closed form for the
warped product holds exactly as coded in :func:`riemann_closed_form`, which
the test-suite checks against :func:`riemann_from_chart`.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import exprlang, jets
from .errors import ChartDomainError, ConfigError, SingularityError


@dataclass(frozen=True)
class AmbientConfig:
    epsilon: int
    warp: object
    interval: tuple
    fiber_dim: int
    fiber_curv: float
    fiber_index: int = 0
    constants: tuple = field(default=())

    def __post_init__(self):
        consts = dict(self.constants) if not isinstance(self.constants, dict) else self.constants
        object.__setattr__(self, "constants", tuple(sorted((str(k), float(v)) for k, v in consts.items())))
        if self.epsilon not in (-1, 1):
            raise ConfigError(f"epsilon must be +1 or -1, got {self.epsilon}")
        if isinstance(self.warp, str):
            try:
                warp = exprlang.parse(self.warp, ["t", *dict(self.constants)])
            except exprlang.ParseError as exc:
                raise ConfigError(f"warp expression: {exc}") from exc
            object.__setattr__(self, "warp", warp)
        extra = exprlang.free_variables(self.warp) - {"t"} - set(dict(self.constants))
        if extra:
            raise ConfigError(f"warp uses undeclared names {sorted(extra)}")
        lo, hi = (float(v) for v in self.interval)
        if not lo < hi:
            raise ConfigError(f"empty interval ({lo}, {hi})")
        object.__setattr__(self, "interval", (lo, hi))
        if self.fiber_dim < 1:
            raise ConfigError("fiber_dim must be >= 1")
        if not 0 <= self.fiber_index <= self.fiber_dim:
            raise ConfigError(f"fiber_index must be in 0..{self.fiber_dim}")
        object.__setattr__(self, "fiber_curv", float(self.fiber_curv))

    @property
    def dim(self):
        """Dimension N + 1 of the ambient space."""
        return self.fiber_dim + 1

    @property
    def eta(self):
        n, s = self.fiber_dim, self.fiber_index
        return np.array([1.0] * (n - s) + [-1.0] * s)

    @property
    def signature(self):
        return np.concatenate([[float(self.epsilon)], self.eta])

    def warp_jet(self, t):
        env = dict(self.constants)
        env["t"] = t
        return exprlang.eval_jet(self.warp, env)

    def warp_derivatives(self, t, order=4):
        """[a, a', ..., a^(order)] at t."""
        jet = self.warp_jet(jets.seed(0, float(t), 1, order))
        return np.array([jet.derivative((k,)) for k in range(order + 1)])

    def check_t(self, t):
        lo, hi = self.interval
        if not lo < t < hi:
            raise ChartDomainError(f"t = {t} outside the interval ({lo}, {hi})")
        a = self.warp_derivatives(t, 0)[0]
        if not a > 0:
            raise ConfigError(f"warp function a({t}) = {a} is not positive")

    def coefficients(self, t):
        """Scalars b, B and their t-derivatives plus a'/a at t."""
        try:
            a_jet = self.warp_jet(jets.seed(0, float(t), 1, 4))
        except SingularityError as exc:
            raise ConfigError(f"warp function not smooth at t = {t}: {exc}") from exc
        a1 = a_jet.partial(0)
        a2 = a1.partial(0)
        a0 = a_jet.truncate(2)
        a1 = a1.truncate(2)
        eps, c = self.epsilon, self.fiber_curv
        b = (eps * a1 * a1 - c) / (a0 * a0)
        big_b = a2 / a0 - eps * b
        return {
            "a": a_jet.value,
            "a1": a_jet.derivative((1,)),
            "a2": a_jet.derivative((2,)),
            "log_deriv": a1.value / a0.value,
            "b": b.value,
            "B": big_b.value,
            "b_prime": b.derivative((1,)),
            "B_prime": big_b.derivative((1,)),
        }


@dataclass(frozen=True)
class ChartPoint:
    t: float
    x: tuple

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))

    @property
    def coords(self):
        return np.array((self.t,) + self.x)


@dataclass(frozen=True)
class MetricJet:
    components: jets.Jet
    signature: tuple


def conformal_denominator(cfg, x):
    """1 + (c/4) <x, x>_eta for floats or jets."""
    eta = cfg.eta
    q = sum(eta[i] * x[i] * x[i] for i in range(cfg.fiber_dim))
    return 1.0 + (cfg.fiber_curv / 4.0) * q


def check_point(cfg, p):
    if len(p.x) != cfg.fiber_dim:
        raise ChartDomainError(f"chart point has {len(p.x)} fiber coordinates, expected {cfg.fiber_dim}")
    cfg.check_t(p.t)
    den = conformal_denominator(cfg, p.x)
    if not den > 0:
        raise ChartDomainError(f"conformal denominator {den:.3e} <= 0 at x = {p.x}")


def metric_at(cfg, p, degree):
    """Ambient metric components as jets in all N+1 chart coordinates at p."""
    check_point(cfg, p)
    nv = cfg.dim
    t = jets.seed(0, p.t, nv, degree)
    xs = [jets.seed(i + 1, p.x[i], nv, degree) for i in range(cfg.fiber_dim)]
    a = cfg.warp_jet(t)
    phi = 1.0 / conformal_denominator(cfg, xs)
    fiber = a * a * phi * phi
    comps = jets.Jet.zeros((nv, nv), nv, degree)
    comps.coeffs[0, 0, 0] = float(cfg.epsilon)
    for i, e in enumerate(cfg.eta):
        comps.coeffs[i + 1, i + 1] = e * fiber.coeffs
    return MetricJet(comps, tuple(int(v) for v in cfg.signature))


def christoffel(g):
    """Christoffel symbols Gamma^A_BC (degree - 1) of a jet metric g_AB.

    The metric must be expressed in its own coordinates, i.e. have as many
    jet variables as rows.
    """
    k = g.shape[0]
    if g.num_vars != k:
        raise ValueError("metric jets must use the metric's own coordinates")
    dg = jets.stack([g.partial(c) for c in range(k)], axis=-1)  # [D, C, B] = d_B g_DC
    # low[D, B, C] = (d_B g_DC + d_C g_DB - d_D g_BC) / 2
    low = 0.5 * (dg.transpose(0, 2, 1) + dg - dg.transpose(2, 0, 1))
    ginv = jets.inv(g.truncate(g.degree - 1))
    return jets.einsum("ad,dbc->abc", ginv, low)


def riemann_lowered(g):
    """Jets of R(d_X, d_Y, d_Z, d_W) = <R(d_X, d_Y) d_Z, d_W> (degree - 2)."""
    k = g.shape[0]
    gam = christoffel(g)
    dgam = jets.stack([gam.partial(c) for c in range(k)], axis=-1)  # [A, D, B, C] = d_C Gamma^A_DB
    gam2 = gam.truncate(gam.degree - 1)
    d1 = dgam.transpose(0, 2, 3, 1)  # [A, B, C, D] = d_C Gamma^A_DB
    d2 = d1.transpose(0, 1, 3, 2)  # [A, B, C, D] = d_D Gamma^A_CB
    quad = jets.einsum("ace,edb->abcd", gam2, gam2)
    rup = d1 - d2 + quad - quad.transpose(0, 1, 3, 2)
    return jets.einsum("wa,abcd->cdbw", g.truncate(rup.degree), rup)


def riemann_from_chart(cfg, p):
    """Full curvature tensor R[X,Y,Z,W] at p from second derivatives of the chart metric."""
    g = metric_at(cfg, p, 2).components
    try:
        return riemann_lowered(g).value
    except SingularityError as exc:
        raise np.linalg.LinAlgError(f"degenerate ambient metric: {exc}") from exc


def metric_value(cfg, p):
    phi = 1.0 / conformal_denominator(cfg, p.x)
    a = cfg.warp_derivatives(p.t, 0)[0]
    return np.concatenate([[float(cfg.epsilon)], a * a * phi * phi * cfg.eta])


def riemann_closed_form(cfg, p, X, Y, Z, W):
    """Closed-form R(X,Y,Z,W) of the warped product; vectors broadcast over leading axes."""
    check_point(cfg, p)
    gd = metric_value(cfg, p)
    co = cfg.coefficients(p.t)
    eps = cfg.epsilon
    X, Y, Z, W = (np.asarray(v, dtype=float) for v in (X, Y, Z, W))

    def ip(u, v):
        return np.sum(u * gd * v, axis=-1)

    def dt(u):
        return eps * u[..., 0]

    first = ip(X, Z) * ip(Y, W) - ip(Y, Z) * ip(X, W)
    second = (
        ip(X, Z) * dt(Y) * dt(W)
        - ip(Y, Z) * dt(X) * dt(W)
        - ip(X, W) * dt(Y) * dt(Z)
        + ip(Y, W) * dt(X) * dt(Z)
    )
    return co["b"] * first + co["B"] * second


def closed_form_tensor(cfg, p):
    """riemann_closed_form evaluated on all coordinate basis quadruples."""
    e = np.eye(cfg.dim)
    return riemann_closed_form(
        cfg,
        p,
        e[:, None, None, None, :],
        e[None, :, None, None, :],
        e[None, None, :, None, :],
        e[None, None, None, :, :],
    )


def sample_times(cfg, count=9):
    lo, hi = cfg.interval
    lo = lo if math.isfinite(lo) else (hi - 10.0 if math.isfinite(hi) else -5.0)
    hi = hi if math.isfinite(hi) else lo + 10.0
    return lo + (hi - lo) * (np.arange(count) + 1.0) / (count + 1.0)


def constant_curvature(cfg, samples=9, tol=1e-10):
    """kappa if the warped product has constant curvature, else None.

    Constant curvature kappa holds iff a''/a = ((a')^2 - eps c)/a^2 = -eps kappa.
    """
    firsts, seconds = [], []
    for t in sample_times(cfg, samples):
        a, a1, a2 = cfg.warp_derivatives(t, 2)
        firsts.append(a2 / a)
        seconds.append((a1 * a1 - cfg.epsilon * cfg.fiber_curv) / (a * a))
    firsts, seconds = np.array(firsts), np.array(seconds)
    scale = max(1.0, float(np.max(np.abs(firsts))), float(np.max(np.abs(seconds))))
    if np.max(np.abs(firsts - seconds)) > tol * scale:
        return None
    if np.max(np.abs(firsts - firsts[0])) > tol * scale:
        return None
    return float(-cfg.epsilon * firsts[0])


def _value(v):
    return v.value if isinstance(v, jets.Jet) else float(v)


def hyperquadric_transfer(c, s, direction, point, tol=1e-8):
    """Move between the hyperquadric <y,y> = 1/c and the conformal chart.

    The flat space carries diag(sign(c), eta); y[0] is the pole coordinate.
    Works on floats and on jets alike.
    """
    if c == 0:
        raise ValueError("hyperquadric transfer needs c != 0")
    root = math.sqrt(abs(c))
    point = list(point)
    if direction == "from_chart":
        n = len(point)
        eta = [1.0] * (n - s) + [-1.0] * s
        u = (c / 4.0) * sum(eta[i] * point[i] * point[i] for i in range(n))
        if not _value(1.0 + u) > 0:
            raise ChartDomainError("chart point outside the conformal domain")
        y0 = (1.0 - u) / ((1.0 + u) * root)
        return [y0] + [xi / (1.0 + u) for xi in point]
    if direction == "to_chart":
        n = len(point) - 1
        eta = [1.0] * (n - s) + [-1.0] * s
        flat = math.copysign(1.0, c) * _value(point[0]) ** 2 + sum(
            eta[i] * _value(point[i + 1]) ** 2 for i in range(n)
        )
        if abs(flat - 1.0 / c) > tol * max(1.0, abs(1.0 / c)):
            raise ChartDomainError(f"point is off the hyperquadric: <y,y> = {flat}, expected {1.0 / c}")
        den = 1.0 + root * point[0]
        if abs(_value(den)) < 1e-12:
            raise ChartDomainError("point is the pole of the conformal chart")
        return [2.0 * yi / den for yi in point[1:]]
    raise ValueError(f"unknown direction {direction!r}")
