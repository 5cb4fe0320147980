"""Built-in ambient spaces and immersions with known extrinsic invariants."""

import math
from dataclasses import dataclass

import numpy as np

from . import exprlang
from .ambient import AmbientConfig, constant_curvature
from .errors import CatalogError
from .extrinsic import Immersion
from .identities import cylinder_lift, fit_psi, normal_flatness, theorem2_threshold

HALF_PI = math.pi / 2


@dataclass(frozen=True)
class Expected:
    value: float
    tol: float
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value) + 0.0)  # also drops -0.0
        object.__setattr__(self, "tol", float(self.tol))


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    cfg: AmbientConfig
    imm: Immersion
    expected: dict
    sample_region: tuple
    description: str = ""
    declared_psi: float = None
    t_range: tuple = None
    source: Immersion = None  # slice immersion a cylinder was lifted from

    def ambient_box(self):
        """(t_lo, t_hi) and fiber half-width for random ambient chart points."""
        lo, hi = self.t_range or self.cfg.interval
        return (lo, hi), 0.5


def observables(entry, data, derived=None):
    """Named scalar invariants compared against an entry's expected values."""
    out = {
        "mean_curvature": float(np.max(np.abs(data.mean_components))),
        "alpha_norm_sq": data.alpha_norm_sq if data.normal_definite else float("nan"),
        "T_norm_sq": data.norm_T_sq,
        "normal_flatness": normal_flatness(data),
    }
    kappa = constant_curvature(entry.cfg)
    out["ambient_curvature"] = float("nan") if kappa is None else kappa
    fit = fit_psi(data)
    out["psi_hat"] = fit.psi_hat
    out["psi_fit_residual"] = fit.residual_norm
    psi = entry.declared_psi if fit.underdetermined and entry.declared_psi is not None else None
    try:
        th = theorem2_threshold(entry.cfg, data, psi)
        out["B_value"] = th.B_value
        out["psi_star"] = th.psi_star
    except Exception:
        pass
    if data.is_hypersurface:
        A = data.shape_ops[0]
        mean = float(np.trace(A)) / data.n
        out["umbilic_curvature"] = mean
        out["umbilic_deviation"] = float(np.max(np.abs(A - mean * np.eye(data.n))))
    if derived is not None:
        out["nabla_alpha_norm_sq"] = derived.grad_norm_sq
        if derived.laplacian_norm_sq is not None:
            out["laplacian_alpha_norm_sq"] = derived.laplacian_norm_sq
            out["alpha_norm_sq_frame_free"] = derived.alpha_norm_sq
    return out


def hyperquadric_defect(entry, u):
    """|<y, y> - 1/c| of the flat hyperquadric point before the chart transfer."""
    imm, cfg = entry.imm, entry.cfg
    if not imm.hyperquadric_stage:
        return 0.0
    env = dict(imm.constants)
    env.update(zip(imm.params, (float(v) for v in u)))
    ys = [exprlang.eval_float(c, env) for c in imm.components[1:]]
    c = cfg.fiber_curv
    signs = [math.copysign(1.0, c)] + list(cfg.eta)
    return abs(sum(s * y * y for s, y in zip(signs, ys)) - 1.0 / c)


# builders --------------------------------------------------------------------


def slice_entry(cfg, t0, name="slice", half_width=0.5, description=""):
    """Slice t = t0, x = u of any ambient; umbilic with A = -(a'/a) I along d/dt."""
    n = cfg.fiber_dim
    imm = Immersion([repr(float(t0))] + [f"u{i + 1}" for i in range(n)], [(-2 * half_width, 2 * half_width)] * n)
    a, a1 = cfg.warp_derivatives(t0, 1)
    expected = {
        "umbilic_curvature": Expected(-a1 / a, 1e-10, "A = -(a'/a) I along d/dt"),
        "umbilic_deviation": Expected(0.0, 1e-10),
        "T_norm_sq": Expected(0.0, 1e-12),
    }
    return CatalogEntry(
        name, cfg, imm, expected, tuple([(-half_width, half_width)] * n),
        description or f"slice t = {t0} of a warped product with a(t) = {exprlang.to_string(cfg.warp)}",
    )


def graph_entry(cfg, height, fiber, name="graph", half_width=0.5, description=""):
    """t = height(u), x = fiber(u) for expression strings in u1.., un."""
    n = _param_count(height, fiber)
    imm = Immersion([height] + list(fiber), [(-2 * half_width, 2 * half_width)] * n)
    return CatalogEntry(name, cfg, imm, {}, tuple([(-half_width, half_width)] * n), description)


def _param_count(height, fiber):
    names = set()
    for src in [height] + list(fiber):
        names |= exprlang.free_variables(exprlang.parse(src))
    return max(int(v[1:]) for v in names if v.startswith("u") and v[1:].isdigit())


def lorentzian_graph(name="lorentzian_graph"):
    """Spacelike graph hypersurface in a Robertson-Walker space."""
    cfg = AmbientConfig(-1, "2 + sin(t)", (-1.0, 3.0), 2, -1.0)
    return graph_entry(
        cfg, "0.4 + 0.1*sin(u1)*u2 + 0.1*u1^2", ["u1", "u2"], name,
        description="spacelike graph in -I x_(2+sin t) H^2(-1)",
    )


def space_form_model(c, n=2, radius=1.0, bump=0.0, name=None):
    """Q^(n+1)(c) as a warped product over a sphere, with a sphere t = radius (optionally bumped).

    For c = 0 the warp is t over S^n(1).  Otherwise the warp is sin(sqrt(c) t)/c
    (sinh for c < 0) over the sphere of curvature 1/|c|, which is again of
    constant curvature c.
    """
    if c == 0:
        warp, fiber_curv, interval = "t", 1.0, (0.0, 50.0)
    elif c > 0:
        warp, fiber_curv, interval = f"sin(sqrt({c!r})*t)/{c!r}", 1.0 / c, (0.0, math.pi / math.sqrt(c))
    else:
        warp, fiber_curv, interval = f"sinh(sqrt({-c!r})*t)/{-c!r}", 1.0 / -c, (0.0, 50.0)
    cfg = AmbientConfig(1, warp, interval, n, fiber_curv)
    height = repr(float(radius))
    if bump:
        height += f" + {bump!r}*(sin(u1)*u2 + u1^2/2)"
    imm = Immersion([height] + [f"u{i + 1}" for i in range(n)], [(-1.0, 1.0)] * n)
    expected = {"ambient_curvature": Expected(float(c), 1e-10)}
    if not bump:
        a, a1 = cfg.warp_derivatives(radius, 1)
        expected["umbilic_curvature"] = Expected(-a1 / a, 1e-10)
        expected["umbilic_deviation"] = Expected(0.0, 1e-10)
    return CatalogEntry(
        name or f"space_form_model_{c:g}", cfg, imm, expected, tuple([(-0.5, 0.5)] * n),
        f"hypersurface t = {height} in a constant curvature {c:g} model",
    )


def de_sitter_model(kappa=2.0, n=2):
    return AmbientConfig(-1, "cosh(sqrt(k)*t)/sqrt(k)", (-3.0, 3.0), n, 1.0, constants={"k": kappa})


def de_sitter_graph(kappa=2.0, name="de_sitter_graph"):
    """Non-umbilic spacelike hypersurface of de Sitter space."""
    cfg = de_sitter_model(kappa)
    return graph_entry(cfg, "0.2 + 0.15*sin(u1)*u2 + 0.1*u1^2", ["u1", "u2"], name,
                       description=f"spacelike graph in de Sitter space of curvature {kappa:g}")


# the registry ---------------------------------------------------------------------


def _slice():
    cfg = AmbientConfig(1, "2 + sin(t)", (-1.0, 3.0), 2, -1.0)
    return slice_entry(cfg, 0.4, "slice")


def _graph():
    cfg = AmbientConfig(1, "exp(t/2) + t^2/5", (-2.0, 2.0), 3, 1.0)
    return graph_entry(
        cfg, "0.3*sin(u1)*u2 + 0.1*u1^2", ["u1", "u2", "0.2*u1*u2 + 0.3*u2^2"], "graph",
        description="codimension-two graph in I x_a S^3 with a generic warp",
    )


def _space_form_models():
    entry = space_form_model(0.0, 2, 1.5, 0.1, "space_form_models")
    return CatalogEntry(
        entry.name, entry.cfg, entry.imm, entry.expected, entry.sample_region,
        "bumped round sphere in R^3 written as (0, inf) x_t S^2(1)",
        t_range=(0.5, 5.0),
    )


def _veronese():
    cfg = AmbientConfig(1, "1", (-5.0, 5.0), 4, 1.0)
    r3 = "sqrt(3)"
    x = f"{r3}*sin(theta)*cos(phi)"
    y = f"{r3}*sin(theta)*sin(phi)"
    z = f"{r3}*cos(theta)"
    comps = [
        f"({x})*({y})/sqrt(3)",
        f"({x})*({z})/sqrt(3)",
        f"({y})*({z})/sqrt(3)",
        f"(({x})^2 - ({y})^2)/(2*sqrt(3))",
        f"(({x})^2 + ({y})^2 - 2*({z})^2)/6",
    ]
    # the last component is the pole coordinate of the chart transfer
    imm = Immersion(["0"] + [comps[4]] + comps[:4], [(0.3, 2.8), (-3.1, 3.1)], ("theta", "phi"), True)
    expected = {
        "mean_curvature": Expected(0.0, 1e-10, "minimal in S^4"),
        "alpha_norm_sq": Expected(4.0 / 3.0, 1e-8, "n / (2 - 1/k) with n = k = 2"),
        "psi_hat": Expected(0.0, 1e-8, "parallel"),
        "psi_fit_residual": Expected(0.0, 1e-8),
        "nabla_alpha_norm_sq": Expected(0.0, 1e-8, "parallel"),
        "B_value": Expected(1.0, 1e-10),
        "psi_star": Expected(1.0, 1e-10, "T = 0"),
    }
    return CatalogEntry(
        "veronese_RxS4", cfg, imm, expected, ((0.6, 2.5), (-3.0, 3.0)),
        "Veronese surface of S^4(1) in the slice t = 0 of R x S^4(1)", declared_psi=0.0,
    )


def _hyperbolic_veronese_surface():
    w = "(v/sqrt(3))"
    comps = {
        "A": f"sqrt(3)/2*sinh(2*{w})*sin(u/sqrt(3))",
        "B": f"sqrt(3)/2*sinh(2*{w})*cos(u/sqrt(3))",
        "C": f"sqrt(3)/2*sinh({w})^2*sin(2*u/sqrt(3))",
        "D": f"sqrt(3)/2*sinh({w})^2*cos(2*u/sqrt(3))",
        "E": f"(3*cosh({w})^2 - 1)/2",
    }
    # flat signs (+, +, -, -, -) on (A, B, C, D, E); E is the pole
    return Immersion(["0", comps["E"], comps["A"], comps["B"], comps["C"], comps["D"]],
                     [(-3.0, 3.0), (0.3, 2.0)], ("u", "v"), True)


def _hyperbolic_veronese_cylinder():
    cfg = AmbientConfig(1, "1", (-5.0, 5.0), 4, -1.0, 2)
    source = _hyperbolic_veronese_surface()
    imm = cylinder_lift(source, cfg, (-2.0, 2.0))
    expected = {
        "mean_curvature": Expected(0.0, 1e-10, "extremal"),
        "psi_hat": Expected(0.0, 1e-8, "parallel"),
        "psi_fit_residual": Expected(0.0, 1e-8),
        "nabla_alpha_norm_sq": Expected(0.0, 1e-8, "parallel"),
        "T_norm_sq": Expected(1.0, 1e-10),
        "B_value": Expected(-1.0, 1e-10),
        "psi_star": Expected(-2.0 / 3.0, 1e-10),
    }
    return CatalogEntry(
        "hyperbolic_veronese_cylinder", cfg, imm, expected, ((-1.0, 1.0), (-2.0, 2.0), (0.5, 1.5)),
        "cylinder over the hyperbolic Veronese surface in R x H^4_2(-1)", declared_psi=0.0, source=source,
    )


def _ads_product():
    cfg = AmbientConfig(-1, "cos(t)", (-HALF_PI, HALF_PI), 2, -1.0)
    cos_t = "sqrt(1 - cosh(rho)^2/2)"
    comps = [
        "arcsin(sqrt(1/2)*cosh(rho))",
        f"sqrt(1/2)*cosh(sigma)/{cos_t}",
        f"sqrt(1/2)*sinh(rho)/{cos_t}",
        f"sqrt(1/2)*sinh(sigma)/{cos_t}",
    ]
    imm = Immersion(comps, [(-0.8, 0.8), (-2.0, 2.0)], ("rho", "sigma"), True)
    expected = {
        "mean_curvature": Expected(0.0, 1e-10, "extremal"),
        "alpha_norm_sq": Expected(2.0, 1e-8, "|alpha|^2 = n"),
        "psi_hat": Expected(0.0, 1e-8, "parallel"),
        "psi_fit_residual": Expected(0.0, 1e-8),
        "B_value": Expected(0.0, 1e-10),
        "psi_star": Expected(-1.0, 1e-10),
    }
    return CatalogEntry(
        "adS_product", cfg, imm, expected, ((-0.3, 0.3), (-0.3, 0.3)),
        "H^1(-2) x H^1(-2) in anti-de Sitter space (-pi/2, pi/2) x_cos(t) H^2(-1)", declared_psi=0.0,
    )


def _de_sitter_slice():
    kappa = 2.0
    entry = slice_entry(de_sitter_model(kappa), 0.0, "de_sitter_slice")
    expected = dict(entry.expected)
    expected.update({
        "alpha_norm_sq": Expected(0.0, 1e-12, "totally geodesic"),
        "B_value": Expected(0.0, 1e-10),
        "psi_star": Expected(kappa, 1e-10),
        "ambient_curvature": Expected(kappa, 1e-10),
    })
    return CatalogEntry(
        entry.name, entry.cfg, entry.imm, expected, entry.sample_region,
        f"totally geodesic slice t = 0 of de Sitter space of curvature {kappa:g}", declared_psi=0.0,
    )


def _einstein_de_sitter_slice():
    t0, n = 1.5, 3
    cfg = AmbientConfig(-1, "t^(1/3)", (0.0, 20.0), n, 0.0)
    entry = slice_entry(cfg, t0, "einstein_de_sitter_slice")
    expected = dict(entry.expected)
    expected.update({
        "alpha_norm_sq": Expected(n / (9 * t0 * t0), 1e-10, "n / (9 t^2)"),
        "laplacian_alpha_norm_sq": Expected(0.0, 1e-10),
        "B_value": Expected(-1 / (3 * t0 * t0), 1e-10),
        "psi_star": Expected(1 / (9 * t0 * t0), 1e-10, "(t^-2 / 3n)(|T|^2 + n/3) with T = 0"),
    })
    return CatalogEntry(
        entry.name, cfg, entry.imm, expected, entry.sample_region,
        f"slice t = {t0} of the Einstein-de Sitter model -(0, inf) x_(t^(1/3)) R^3",
        t_range=(0.5, 5.0),
    )


_BUILDERS = {
    "adS_product": _ads_product,
    "de_sitter_slice": _de_sitter_slice,
    "einstein_de_sitter_slice": _einstein_de_sitter_slice,
    "graph": _graph,
    "hyperbolic_veronese_cylinder": _hyperbolic_veronese_cylinder,
    "slice": _slice,
    "space_form_models": _space_form_models,
    "veronese_RxS4": _veronese,
}
_CACHE = {}


def names():
    return sorted(_BUILDERS)


def get_entry(name):
    if name not in _BUILDERS:
        raise CatalogError(f"unknown catalog entry {name!r}; known: {', '.join(names())}")
    if name not in _CACHE:
        _CACHE[name] = _BUILDERS[name]()
    return _CACHE[name]


def list_catalog():
    lines = []
    for name in names():
        e = get_entry(name)
        lines.append(f"{name}: {e.description}")
        for key in sorted(e.expected):
            exp = e.expected[key]
            note = f"  ({exp.note})" if exp.note else ""
            lines.append(f"    {key} = {exp.value!r} +/- {exp.tol:g}{note}")
    return "\n".join(lines) + "\n"
