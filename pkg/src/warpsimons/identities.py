"""Residuals of the structure equations, Simons-type formulas and pseudo-parallel identities.

Every check works on one sample point and returns an :class:`IdentityReport`
with a single entry; reports of the same identity at several points are
combined with :meth:`IdentityReport.merge`.
"""

from dataclasses import dataclass, field

import numpy as np

from . import exprlang
from .ambient import constant_curvature, riemann_closed_form, sample_times
from .errors import CaseError, PreconditionError, UnsupportedSignature
from .extrinsic import Immersion

FIRST_ORDER_TOL = 1e-8
SIMONS_TOL = 1e-6
PP_TOL = 1e-7
UNDERDETERMINED_TOL = 1e-12

SIMONS_VARIANTS = ("theorem1", "hypersurface", "nomizu_smyth", "constant_curvature", "product_space")


@dataclass
class PointResidual:
    u: tuple
    abs: float
    rel: float
    terms: dict = field(default_factory=dict)
    error: str = None
    details: dict = field(default_factory=dict)

    def to_json(self):
        finite = self.rel is not None and np.isfinite(self.rel)
        out = {"u": [float(v) for v in self.u], "abs": self.abs, "rel": self.rel if finite else None}
        if self.error is not None:
            out["error"] = self.error
        if self.details:
            out["details"] = dict(self.details)
        return out


@dataclass
class IdentityReport:
    name: str
    points: list
    tol: float

    @property
    def max_rel(self):
        vals = [p.rel for p in self.points]
        if any(v is None or not np.isfinite(v) for v in vals):
            return float("inf")
        return max(vals, default=0.0)

    @property
    def max_abs(self):
        return max((p.abs for p in self.points if p.abs is not None), default=0.0)

    @property
    def passed(self):
        return bool(self.points) and self.max_rel <= self.tol

    @property
    def terms(self):
        """Term breakdown of the first point (convenience for single-point reports)."""
        return self.points[0].terms if self.points else {}

    @classmethod
    def single(cls, name, u, residual, scale, tol, terms=None):
        residual = float(residual)
        rel = residual / max(1.0, float(scale))
        return cls(name, [PointResidual(tuple(np.asarray(u, dtype=float)), residual, rel, dict(terms or {}))], tol)

    @classmethod
    def failure(cls, name, u, error, tol):
        return cls(name, [PointResidual(tuple(np.asarray(u, dtype=float)), None, float("inf"), {}, str(error))], tol)

    @classmethod
    def merge(cls, reports):
        reports = list(reports)
        if not reports:
            raise ValueError("nothing to merge")
        points = [p for r in reports for p in r.points]
        return cls(reports[0].name, points, reports[0].tol)

    def with_tol(self, tol):
        return IdentityReport(self.name, self.points, tol)

    def to_json(self):
        max_rel = self.max_rel
        return {
            "name": self.name,
            "points": [p.to_json() for p in self.points],
            "max_rel": max_rel if np.isfinite(max_rel) else None,
            "tol": self.tol,
            "pass": self.passed,
        }


@dataclass
class PseudoParallelFit:
    psi_hat: float
    residual_norm: float
    underdetermined: bool


@dataclass
class Threshold:
    B_value: float
    psi_star: float
    case_tag: str
    psi: float
    extremal: bool
    prediction: str


def _scale(*arrays):
    return max((float(np.max(np.abs(a))) if np.size(a) else 0.0) for a in arrays)


# ambient curvature restricted to the submanifold -----------------------------


def ambient_tangent_riemann(data):
    """R-bar(E_a, E_b, E_c, E_d) from the closed form."""
    T = data.T
    d = np.eye(data.n)
    b, B = data.b, data.B
    return b * (np.einsum("ac,bd->abcd", d, d) - np.einsum("bc,ad->abcd", d, d)) + B * (
        np.einsum("ac,b,d->abcd", d, T, T)
        - np.einsum("bc,a,d->abcd", d, T, T)
        - np.einsum("ad,b,c->abcd", d, T, T)
        + np.einsum("bd,a,c->abcd", d, T, T)
    )


def alpha_pairing(data):
    """<alpha(E_a, E_b), alpha(E_c, E_d)>."""
    return np.einsum("k,kab,kcd->abcd", data.normal_signs, data.h, data.h)


def gauss_riemann(data):
    """R(E_a, E_b, E_c, E_d) of M from the Gauss equation."""
    P = alpha_pairing(data)
    return ambient_tangent_riemann(data) + np.einsum("bcad->abcd", P) - np.einsum("acbd->abcd", P)


def ricci_normal_curvature(data):
    """<R^perp(E_a, E_b) e_beta, e_gamma> = [h_gamma, A_beta]_ab."""
    A = data.shape_ops
    h = data.h
    return np.einsum("gac,kcb->abkg", h, A) - np.einsum("kac,gcb->abkg", A, h)


# fundamental equations ----------------------------------------------------------


def check_gauss(data, cfg, tol=FIRST_ORDER_TOL):
    E = data.tangent_frame
    closed = riemann_closed_form(
        cfg, data.point, E[:, None, None, None, :], E[None, :, None, None, :], E[None, None, :, None, :], E[None, None, None, :, :]
    )
    P = alpha_pairing(data)
    rhs = closed + np.einsum("bcad->abcd", P) - np.einsum("acbd->abcd", P)
    res = np.max(np.abs(data.intrinsic_riemann - rhs))
    return IdentityReport.single(
        "gauss", data.u, res, _scale(data.intrinsic_riemann, closed, P), tol,
        {"intrinsic": _scale(data.intrinsic_riemann), "ambient": _scale(closed), "alpha": _scale(P)},
    )


def check_codazzi(data, derived, tol=FIRST_ORDER_TOL):
    h3 = derived.h3
    lhs = np.einsum("kacb->kabc", h3) - np.einsum("kbca->kabc", h3)
    d = np.eye(data.n)
    rhs = data.B * (np.einsum("a,bc->abc", data.T, d) - np.einsum("b,ac->abc", data.T, d))
    rhs = np.einsum("k,abc->kabc", data.xi, rhs)
    res = np.max(np.abs(lhs - rhs))
    return IdentityReport.single("codazzi", data.u, res, _scale(h3, rhs), tol, {"nabla_alpha": _scale(h3), "ambient": _scale(rhs)})


def check_ricci(data, tol=FIRST_ORDER_TOL):
    formula = ricci_normal_curvature(data)
    res = np.max(np.abs(data.normal_curvature_jets - formula))
    return IdentityReport.single(
        "ricci", data.u, res, _scale(formula, data.normal_curvature_jets), tol,
        {"jets": _scale(data.normal_curvature_jets), "shape_operators": _scale(formula)},
    )


def check_fundamental(data, derived, cfg, tol=FIRST_ORDER_TOL):
    """Gauss, Codazzi and Ricci reports at one point."""
    return check_gauss(data, cfg, tol), check_codazzi(data, derived, tol), check_ricci(data, tol)


def check_weingarten(data, tol=FIRST_ORDER_TOL):
    res = np.max(np.abs(data.shape_ops - data.h))
    sym = max(np.max(np.abs(data.h - np.swapaxes(data.h, 1, 2))), np.max(np.abs(data.shape_ops - np.swapaxes(data.shape_ops, 1, 2))))
    return IdentityReport.single("weingarten", data.u, max(res, sym), _scale(data.h), tol)


def check_structure(data, tol=FIRST_ORDER_TOL):
    """Covariant derivatives of the tangent and normal parts of d/dt."""
    eps, ld, T = data.epsilon, data.log_deriv, data.T
    n = data.n
    rhs_T = ld * (np.eye(n) - eps * np.outer(T, T)) + data.A_xi
    rhs_xi = -eps * ld * np.outer(T, data.xi) - np.einsum("kab,b->ak", data.h, T)
    r1 = np.max(np.abs(data.nabla_T - rhs_T))
    r2 = np.max(np.abs(data.nabla_perp_xi - rhs_xi))
    frame = abs(data.norm_T_sq + float(np.sum(data.normal_signs * data.xi**2)) - eps)
    return IdentityReport.single(
        "structure", data.u, max(r1, r2, frame), _scale(rhs_T, rhs_xi, data.nabla_T), tol,
        {"tangent": r1, "normal": r2, "split": frame},
    )


# Simons-type formulas -------------------------------------------------------------


def _require_definite(data):
    if not data.normal_definite:
        raise UnsupportedSignature(f"indefinite normal bundle with signs {data.normal_signs.tolist()}")


def curvature_sum(A, signs):
    """Sum over beta, gamma of eps_gamma (tr A_g tr(A_b^2 A_g) + tr([A_g, A_b]^2) - tr(A_b A_g)^2)."""
    total = 0.0
    for Ab in A:
        for Ag, eg in zip(A, signs):
            comm = Ag @ Ab - Ab @ Ag
            total += eg * (np.trace(Ag) * np.trace(Ab @ Ab @ Ag) + np.trace(comm @ comm) - np.trace(Ab @ Ag) ** 2)
    return float(total)


def simons_terms(data, derived):
    """The eight right-hand side terms T0..T7 of the general Simons-type formula."""
    _require_definite(data)
    n = data.n
    A = data.shape_ops
    T, xi, B, b = data.T, data.xi, data.B, data.b
    I = np.eye(n)
    tr = np.trace(A, axis1=1, axis2=2)
    trsq = np.einsum("kab,kba->k", A, A)
    M = n * A - tr[:, None, None] * I
    MT = M @ T
    AT = A @ T
    A_xi = data.A_xi
    terms = {
        "T0": float(np.einsum("kij,kllji->", data.h, derived.h4)),
        "T1": derived.grad_norm_sq,
        "T2": float(np.sum((MT @ derived.grad_B) * xi)),
        "T3": float(-np.sum(data.b_prime * (MT @ T) * xi)),
        "T4": float(np.sum(B * (n * np.einsum("ab,kba->k", A_xi, A) - np.trace(A_xi) * tr) * xi)),
        "T5": float(np.sum(B * (3 * (AT @ T) * tr - 2 * n * np.sum(AT**2, axis=1) - (T @ T) * trsq))),
        "T6": float(np.sum(b * (tr**2 - n * trsq))),
        "T7": curvature_sum(A, data.normal_signs),
    }
    return terms


def _hypersurface_scalars(data):
    if not data.is_hypersurface:
        raise PreconditionError(f"hypersurface formula needs codimension 1, got {data.codim}")
    A = data.shape_ops[0]
    n = data.n
    return A, n, float(np.trace(A)) / n, float(np.trace(A @ A)), float(np.trace(A @ A @ A)), int(data.normal_signs[0])


def hypersurface_terms(data, derived):
    """Codimension-one specialization written with H, S and the normal sign delta."""
    _require_definite(data)
    A, n, H, S, S3, delta = _hypersurface_scalars(data)
    T, B, b = data.T, data.B, data.b
    xn = float(data.xi[0])
    AH = A - H * np.eye(n)
    return {
        "T0": float(np.einsum("ij,llji->", data.h[0], derived.h4[0])),
        "T1": derived.grad_norm_sq,
        "gradB": n * float(derived.grad_B @ (AH @ T)) * xn,
        "b_prime": -n * data.b_prime * float(T @ AH @ T) * xn,
        "xi_xi": n * delta * B * (S - n * H * H) * xn * xn,
        "T": B * (3 * n * float(T @ A @ T) * H - 2 * n * float((A @ T) @ (A @ T)) - float(T @ T) * S),
        "b": b * (n * n * H * H - n * S),
        "cubic": delta * (n * H * S3 - S * S),
    }


def _constant_curvature_terms(data, derived, kappa, delta):
    A, n, H, S, S3, _ = _hypersurface_scalars(data)
    return {
        "T0": float(np.einsum("ij,llji->", data.h[0], derived.h4[0])),
        "T1": derived.grad_norm_sq,
        "kappa": n * kappa * (S - n * H * H),
        "cubic": delta * (n * H * S3 - S * S),
    }


def _is_unit_warp(cfg):
    for t in sample_times(cfg):
        a, a1 = cfg.warp_derivatives(t, 1)
        if abs(a - 1.0) > 1e-12 or abs(a1) > 1e-12:
            return False
    return True


def product_space_terms(data, derived, c):
    """Specialization to a = 1, eps = 1, where b = -c and B = c."""
    _require_definite(data)
    n = data.n
    A = data.shape_ops
    T = data.T
    tr = np.trace(A, axis1=1, axis2=2)
    trsq = np.einsum("kab,kba->k", A, A)
    AT = A @ T
    A_xi = np.einsum("k,kab->ab", data.xi, A)
    return {
        "T0": float(np.einsum("kij,kllji->", data.h, derived.h4)),
        "T1": derived.grad_norm_sq,
        "xi": c * (n * float(np.trace(A_xi @ A_xi)) - float(np.trace(A_xi)) ** 2),
        "T": c * float(np.sum((n - T @ T) * trsq - 2 * n * np.sum(AT**2, axis=1) + 3 * tr * (AT @ T))),
        "trace": -c * float(np.sum(tr**2)),
        "curvature": curvature_sum(A, np.ones(len(A))),
    }


def check_simons(data, derived, variant="theorem1", cfg=None, tol=SIMONS_TOL):
    """Residual |Laplacian(|alpha|^2)/2 - sum of terms| for one formula variant."""
    if variant not in SIMONS_VARIANTS:
        raise ValueError(f"unknown Simons variant {variant!r}; choose from {SIMONS_VARIANTS}")
    _require_definite(data)
    if variant == "theorem1":
        terms = simons_terms(data, derived)
    elif variant == "hypersurface":
        terms = hypersurface_terms(data, derived)
    else:
        if cfg is None:
            raise PreconditionError(f"variant {variant} needs the ambient configuration")
        if variant == "product_space":
            if cfg.epsilon != 1 or cfg.fiber_index != 0:
                raise PreconditionError("product_space needs epsilon = 1 and a Riemannian fiber")
            if not _is_unit_warp(cfg):
                raise PreconditionError("product_space needs the warp function a = 1")
            terms = product_space_terms(data, derived, cfg.fiber_curv)
        else:
            kappa = constant_curvature(cfg)
            if kappa is None:
                raise PreconditionError(f"variant {variant} needs a constant-curvature ambient")
            if variant == "nomizu_smyth":
                if cfg.epsilon != 1 or cfg.fiber_index != 0:
                    raise PreconditionError("nomizu_smyth needs a Riemannian ambient")
                terms = _constant_curvature_terms(data, derived, kappa, 1)
            else:
                _require_definite(data)
                terms = _constant_curvature_terms(data, derived, kappa, int(data.normal_signs[0]))
    lhs = 0.5 * derived.laplacian_norm_sq
    rhs = sum(terms.values())
    terms = dict(terms, lhs=lhs)
    scale = max(abs(v) for v in terms.values())
    return IdentityReport.single(f"simons_{variant}", data.u, abs(lhs - rhs), scale, tol, terms)


def eigenvalue_identity(A, kappa, delta):
    """|trace form - eigenvalue form| of the pairwise sectional-curvature identity."""
    A = np.asarray(A, dtype=float)
    if not np.allclose(A, A.T, atol=1e-12):
        raise ValueError("A must be symmetric")
    n = A.shape[0]
    t1, t2, t3 = np.trace(A), np.trace(A @ A), np.trace(A @ A @ A)
    lhs = kappa * (n * t2 - t1 * t1) + delta * (t1 * t3 - t2 * t2)
    lam = np.linalg.eigvalsh(A)
    rhs = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            rhs += (lam[i] - lam[j]) ** 2 * (kappa + delta * lam[i] * lam[j])
    return float(abs(lhs - rhs))


# pseudo-parallel immersions -----------------------------------------------------


def _pseudo_parts(data):
    """Residual of R-bar . alpha = psi (X ^ Y) . alpha split as r0 + psi r1.

    Components are coefficients in the normal frame, indexed [a, b, c, d, gamma]
    for X, Y, Z, W = E_a, E_b, E_c, E_d.
    """
    v = np.einsum("k,kab->kab", data.normal_signs, data.h)  # alpha = sum v_k e_k
    R = gauss_riemann(data)
    P = ricci_normal_curvature(data)  # [a, b, beta, gamma] = <R^perp e_beta, e_gamma>
    rperp = np.einsum("kcd,abkg,g->abcdg", v, P, data.normal_signs)
    term_z = np.einsum("abce,ged->abcdg", R, v)
    term_w = np.einsum("abde,gce->abcdg", R, v)
    r0 = rperp - term_z - term_w
    d = np.eye(data.n)
    r1 = (
        np.einsum("bc,gad->abcdg", d, v)
        - np.einsum("ac,gbd->abcdg", d, v)
        + np.einsum("bd,gac->abcdg", d, v)
        - np.einsum("ad,gbc->abcdg", d, v)
    )
    return r0, r1


def pseudo_residual(data, psi):
    """Largest component of the pseudo-parallel residual at the given psi."""
    r0, r1 = _pseudo_parts(data)
    return float(np.max(np.abs(r0 + psi * r1)))


def fit_psi(data):
    r0, r1 = _pseudo_parts(data)
    r0, r1 = r0.ravel(), r1.ravel()
    if np.linalg.norm(r1) < UNDERDETERMINED_TOL:
        return PseudoParallelFit(0.0, float(np.max(np.abs(r0), initial=0.0)), True)
    psi = -float(r0 @ r1) / float(r1 @ r1)
    return PseudoParallelFit(psi, float(np.max(np.abs(r0 + psi * r1))), False)


def pp_sums(data, psi):
    n = data.n
    A = data.shape_ops
    T = data.T
    tr = np.trace(A, axis1=1, axis2=2)
    trsq = np.einsum("kab,kba->k", A, A)
    AT = A @ T
    s1 = float(np.sum(data.B * (n * np.sum(AT**2, axis=1) - 2 * (AT @ T) * tr + (T @ T) * trsq)))
    s2 = float(np.sum((psi + data.b) * (n * trsq - tr**2)))
    s3 = curvature_sum(A, data.normal_signs)
    return {"B": s1, "psi_b": s2, "curvature": s3}


def check_pp_identity(data, psi, tol=PP_TOL, pseudo_tol=PP_TOL):
    """Residual of the algebraic identity satisfied at extremal pseudo-parallel points."""
    pr = pseudo_residual(data, psi)
    if pr > pseudo_tol:
        raise PreconditionError(f"point is not {psi}-pseudo-parallel (residual {pr:.3e})")
    sums = pp_sums(data, psi)
    res = sums["B"] + sums["psi_b"] - sums["curvature"]
    return IdentityReport.single("pp", data.u, abs(res), max(abs(v) for v in sums.values()), tol, sums)


def threshold_case(cfg, data):
    s, eps = cfg.fiber_index, cfg.epsilon
    m = data.codim - 1
    if s == 0 and eps == 1:
        return "riemannian"
    if s == 0 and eps == -1:
        return "lorentzian_RW"
    if s > 0 and s == m + (1 + eps) // 2:
        return "definite_negative"
    raise CaseError(f"no threshold case for s = {s}, epsilon = {eps}, codimension {data.codim}")


def theorem2_threshold(cfg, data, psi=None, extremal_tol=1e-10, sign_tol=1e-10):
    """Curvature threshold for geodesic points of extremal pseudo-parallel immersions.

    ``psi`` defaults to the fitted value; at points where the fit is
    underdetermined (alpha = 0) it defaults to 0.  The inequalities on B and
    psi are non-strict and allow ``sign_tol`` of rounding.
    """
    case = threshold_case(cfg, data)
    n = data.n
    B = data.B
    psi_star = -(B * data.norm_T_sq + n * data.b) / n
    if psi is None:
        fit = fit_psi(data)
        psi = fit.psi_hat
    extremal = bool(np.max(np.abs(data.mean_components)) <= extremal_tol)
    if not extremal:
        prediction = "not extremal"
    else:
        if case == "riemannian":
            holds = B >= -sign_tol and psi >= psi_star - sign_tol
        else:
            holds = B <= sign_tol and psi <= psi_star + sign_tol
        prediction = "geodesic point" if holds else "no conclusion"
    return Threshold(float(B), float(psi_star), case, float(psi), extremal, prediction)


def check_lemma_R(data, tol=1e-9, pseudo_tol=1e-8):
    """max |R^perp(E_a, E_b) H| at a pseudo-parallel point."""
    fit = fit_psi(data)
    if fit.residual_norm > pseudo_tol:
        raise PreconditionError(f"point is not pseudo-parallel (fit residual {fit.residual_norm:.3e})")
    P = ricci_normal_curvature(data)
    hv = data.normal_signs * data.mean_components
    comps = np.einsum("k,abkg->abg", hv, P)
    res = float(np.max(np.sqrt(np.sum(comps**2, axis=-1))))
    return IdentityReport.single("lemma_R", data.u, res, _scale(hv), tol)


def normal_flatness(data):
    return float(np.max(np.abs(ricci_normal_curvature(data)), initial=0.0))


# cylinders over product ambients ------------------------------------------------------


def _require_product(cfg):
    if cfg.epsilon != 1 or not _is_unit_warp(cfg):
        raise PreconditionError("cylinder lift needs epsilon = 1 and the warp function a = 1")


def cylinder_lift(imm, cfg, s_range=None):
    """F(s, x) = (s, f(x)) for an immersion f lying in one slice of R x Q."""
    _require_product(cfg)
    if exprlang.free_variables(imm.components[0]):
        raise PreconditionError("the source immersion must stay in one slice (constant t)")
    name = "s"
    taken = set(imm.params) | set(dict(imm.constants))
    while name in taken:
        name += "_"
    lo, hi = s_range if s_range is not None else cfg.interval
    return Immersion(
        (exprlang.Var(name),) + tuple(imm.components[1:]),
        ((lo, hi),) + imm.domain_box,
        (name,) + imm.params,
        imm.hyperquadric_stage,
        imm.constants,
    )


def check_cylinder_lift(lifted_data, source_data, tol=1e-10):
    """alpha_F = alpha_f on lifted directions, alpha_F(d_s, .) = 0, H_F = n/(n+1) H_f."""
    n = source_data.n
    aF = lifted_data.alpha_coords
    af = source_data.alpha_coords
    r_alpha = np.max(np.abs(aF[1:, 1:] - af))
    r_s = np.max(np.abs(aF[0]))
    r_H = np.max(np.abs(lifted_data.mean_curvature - n / (n + 1) * source_data.mean_curvature))
    return IdentityReport.single(
        "cylinder_lift", lifted_data.u, max(r_alpha, r_s, r_H), _scale(af, source_data.mean_curvature), tol,
        {"alpha": r_alpha, "alpha_s": r_s, "mean_curvature": r_H},
    )
