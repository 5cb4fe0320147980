"""Extrinsic geometry of a spacelike immersion, read off from Taylor jets.

All quantities are first built as jets in the parameters u, then evaluated
at the base point.  Frames are orthonormal with respect to the ambient
metric; tangent components are written in the tangent frame E_a, normal
components in the normal frame e_beta, and h[beta, a, b] = <alpha(E_a, E_b), e_beta>.
The Weingarten sign is A_eta X = -(D_X eta)^T.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import exprlang, jets
from .ambient import ChartPoint, check_point, christoffel, hyperquadric_transfer, metric_at, riemann_lowered
from .errors import (
    ChartDomainError,
    ConfigError,
    FrameError,
    SingularityError,
    SpacelikeViolation,
    UnsupportedSignature,
)

NULL_TOL = 1e-12
SPACELIKE_TOL = 1e-10


@dataclass(frozen=True)
class Immersion:
    """Parametrized map u -> (t(u), x(u)) into the ambient chart.

    With ``hyperquadric_stage`` the fiber components are flat hyperquadric
    coordinates (pole first) and pass through the conformal chart transfer.
    """

    components: tuple
    domain_box: tuple
    params: tuple = None
    hyperquadric_stage: bool = False
    constants: tuple = field(default=())

    def __post_init__(self):
        consts = dict(self.constants)
        object.__setattr__(self, "constants", tuple(sorted((str(k), float(v)) for k, v in consts.items())))
        box = tuple((float(lo), float(hi)) for lo, hi in self.domain_box)
        if not box:
            raise ConfigError("immersion needs at least one parameter")
        for lo, hi in box:
            if not lo < hi:
                raise ConfigError(f"empty parameter interval ({lo}, {hi})")
        object.__setattr__(self, "domain_box", box)
        params = self.params or tuple(f"u{i + 1}" for i in range(len(box)))
        if len(params) != len(box):
            raise ConfigError(f"{len(params)} parameter names for a {len(box)}-dimensional box")
        object.__setattr__(self, "params", tuple(params))
        names = set(params) | set(consts)
        comps = []
        for c in self.components:
            if isinstance(c, str):
                try:
                    c = exprlang.parse(c, names)
                except exprlang.ParseError as exc:
                    raise ConfigError(f"immersion component: {exc}") from exc
            extra = exprlang.free_variables(c) - names
            if extra:
                raise ConfigError(f"immersion component uses undeclared names {sorted(extra)}")
            comps.append(c)
        object.__setattr__(self, "components", tuple(comps))

    @property
    def param_dim(self):
        return len(self.domain_box)

    def check_param(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape != (self.param_dim,):
            raise ChartDomainError(f"parameter point must have {self.param_dim} entries")
        for k, (lo, hi) in enumerate(self.domain_box):
            if not lo < u[k] < hi:
                raise ChartDomainError(f"u[{k}] = {u[k]} outside the domain ({lo}, {hi})")
        return u

    def expected_components(self, cfg):
        return cfg.dim + (1 if self.hyperquadric_stage else 0)

    def chart_jets(self, cfg, u, degree):
        """Jets of the chart coordinates (t, x_1..x_N) in the parameters at u."""
        u = self.check_param(u)
        if len(self.components) != self.expected_components(cfg):
            raise ConfigError(
                f"immersion has {len(self.components)} components, ambient needs {self.expected_components(cfg)}"
            )
        n = self.param_dim
        env = dict(self.constants)
        for k, name in enumerate(self.params):
            env[name] = jets.seed(k, u[k], n, degree)
        try:
            comps = [exprlang.eval_jet(c, env) for c in self.components]
        except SingularityError as exc:
            raise ChartDomainError(f"immersion not smooth at u = {tuple(u)}: {exc}") from exc
        if self.hyperquadric_stage:
            fiber = hyperquadric_transfer(cfg.fiber_curv, cfg.fiber_index, "to_chart", comps[1:])
            comps = [comps[0]] + fiber
        return comps

    def chart_point(self, cfg, u):
        comps = self.chart_jets(cfg, u, 0)
        return ChartPoint(comps[0].value, [c.value for c in comps[1:]])


@dataclass
class ExtrinsicData:
    u: np.ndarray
    point: ChartPoint
    epsilon: int
    ambient_metric: np.ndarray  # diagonal of the ambient metric at the point
    metric: np.ndarray
    metric_inv: np.ndarray
    coord_tangents: np.ndarray  # f_*(d/du_i), shape (n, N+1)
    tangent_frame: np.ndarray  # (n, N+1)
    frame_change: np.ndarray  # E = frame_change @ coord_tangents
    normal_frame: np.ndarray  # (k, N+1)
    normal_signs: np.ndarray
    alpha_coords: np.ndarray  # alpha(d_i, d_j) as ambient vectors, (n, n, N+1)
    h: np.ndarray  # (k, n, n)
    shape_ops: np.ndarray  # Weingarten-built A_beta, (k, n, n)
    mean_curvature: np.ndarray  # ambient vector
    mean_components: np.ndarray  # <H, e_beta>
    T: np.ndarray
    xi: np.ndarray
    b: float
    B: float
    b_prime: float
    B_prime: float
    log_deriv: float
    intrinsic_riemann: np.ndarray  # R(E_a, E_b, E_c, E_d) from induced-metric jets
    normal_curvature_jets: np.ndarray  # <R^perp(E_a, E_b) e_beta, e_gamma> from jets
    nabla_T: np.ndarray  # <D_{E_a} T, E_b>
    nabla_perp_xi: np.ndarray  # <D^perp_{E_a} xi, e_beta>

    @property
    def n(self):
        return self.metric.shape[0]

    @property
    def codim(self):
        return self.normal_frame.shape[0]

    @property
    def is_hypersurface(self):
        return self.codim == 1

    @property
    def normal_definite(self):
        return bool(np.all(self.normal_signs == self.normal_signs[0]))

    @property
    def normal_sign(self):
        """Common sign of the normal bundle; raises for mixed signatures."""
        if not self.normal_definite:
            raise UnsupportedSignature(f"indefinite normal bundle with signs {self.normal_signs.tolist()}")
        return int(self.normal_signs[0])

    @property
    def A_xi(self):
        return np.einsum("b,bij->ij", self.normal_signs * self.xi, self.shape_ops)

    @property
    def norm_T_sq(self):
        return float(self.T @ self.T)

    @property
    def alpha_norm_sq(self):
        """Sum of h^2 over a definite normal frame."""
        return float(np.sum(self.h**2))

    def alpha_vec(self, a, b):
        """alpha(E_a, E_b) in ambient components."""
        return np.einsum("k,k,kA->A", self.normal_signs, self.h[:, a, b], self.normal_frame)


@dataclass
class DerivedTensors:
    h3: np.ndarray  # h3[beta, i, j, k] = <(D_k alpha)(E_i, E_j), e_beta>
    h4: np.ndarray  # h4[beta, i, j, k, l] = <(D_l D_k alpha)(E_i, E_j), e_beta>
    alpha_norm_sq: float
    grad_norm_sq: float
    laplacian_norm_sq: float
    grad_B: np.ndarray


def _at(j, degree):
    return j.truncate(degree) if j.degree != degree else j


class _Local:
    """Jet pipeline around one parameter point."""

    def __init__(self, imm, cfg, u, degree):
        self.imm, self.cfg, self.degree = imm, cfg, degree
        self.u = np.asarray(u, dtype=float)
        self.n = imm.param_dim
        self.K = cfg.dim
        if self.n > cfg.fiber_dim:
            raise ConfigError(f"parameter dimension {self.n} exceeds fiber dimension {cfg.fiber_dim}")
        comps = imm.chart_jets(cfg, self.u, degree)
        self.point = ChartPoint(comps[0].value, [c.value for c in comps[1:]])
        check_point(cfg, self.point)
        shifts = [c - c.value for c in comps]
        md = min(degree, 3)
        amb = metric_at(cfg, self.point, md).components
        self.G = jets.compose(amb, [_at(s, md) for s in shifts])
        self.Gam = jets.compose(christoffel(amb), [_at(s, md - 1) for s in shifts])
        F = jets.stack(comps)
        self.X = jets.stack([F.partial(i) for i in range(self.n)])
        self._bases = {}

    # helpers -----------------------------------------------------------------

    def basis(self, d):
        if d in self._bases:
            return self._bases[d]
        X = _at(self.X, d)
        GX = jets.einsum("ab,ib->ia", _at(self.G, d), X)
        ginv = jets.inv(jets.einsum("ia,ja->ij", X, GX))
        self._bases[d] = X, GX, ginv
        return self._bases[d]

    def perp(self, V):
        X, GX, ginv = self.basis(V.degree)
        shape = V.shape
        flat = V.reshape(-1, self.K)
        coef = jets.einsum("ja,ra->rj", GX, flat)
        coef = jets.einsum("ij,rj->ri", ginv, coef)
        tang = jets.einsum("ri,ia->ra", coef, X)
        return (flat - tang).reshape(shape)

    def gamma_bar(self, U, V):
        """Ambient Christoffel term Gamma(U_r, V_r) for row batches."""
        d = min(U.degree, V.degree)
        tmp = jets.einsum("abc,rb->rac", _at(self.Gam, d), _at(U, d))
        return jets.einsum("rac,rc->ra", tmp, _at(V, d))

    def covariant(self, V):
        """D_{d_k} V for every k; V batch (..., K) -> (..., n, K) one degree lower."""
        shape = V.shape
        d = V.degree - 1
        flat = V.reshape(-1, self.K)
        partials = jets.stack([flat.partial(k) for k in range(self.n)], axis=1)  # (r, n, K)
        gx = jets.einsum("abc,kb->kac", _at(self.Gam, d), _at(self.X, d))
        corr = jets.einsum("kac,rc->rka", gx, _at(flat, d))
        return (partials + corr).reshape(shape[:-1] + (self.n, self.K))

    def constant_vectors(self, vecs, degree):
        return jets.Jet.constant(np.asarray(vecs, dtype=float), self.n, degree)

    # jets --------------------------------------------------------------------

    @cached_property
    def metric(self):
        X = self.X
        return jets.einsum("ia,ja->ij", X, jets.einsum("ab,ib->ia", _at(self.G, X.degree), X))

    @cached_property
    def induced_gamma(self):
        return christoffel(self.metric)

    @cached_property
    def alpha(self):
        """alpha(d_i, d_j) as ambient-vector jets, degree - 2."""
        dX = jets.stack([self.X.partial(i) for i in range(self.n)])  # [i, j, A] = d_i X_j
        d = dX.degree
        xi = jets.stack([_at(self.X[i], d) for i in range(self.n) for _ in range(self.n)])
        xj = jets.stack([_at(self.X[j], d) for _ in range(self.n) for j in range(self.n)])
        Y = dX + self.gamma_bar(xi, xj).reshape(self.n, self.n, self.K)
        return self.perp(Y)

    def _normal_derivative(self, V, gamma, slots):
        """Covariant derivative of a normal-valued tensor with ``slots`` tangent indices.

        V has shape (n,)*slots + (K,); the new index is appended last.
        """
        cov = self.covariant(V)  # (..., k, A)
        out = self.perp(cov)
        d = out.degree
        gam = _at(gamma, d)
        Vd = _at(V, d)
        letters = "ijlm"[:slots]
        for s in range(slots):
            # subtract V(..., Gamma^p_{k, idx_s}, ...)
            src = letters.replace(letters[s], "p")
            sub = f"pk{letters[s]},{src}a->{letters}ka"
            out = out - jets.einsum(sub, gam, Vd)
        return out

    @cached_property
    def nabla_alpha(self):
        """D3[i, j, k] = (D_k alpha)(d_i, d_j)."""
        return self._normal_derivative(self.alpha, self.induced_gamma, 2)

    @cached_property
    def nabla2_alpha(self):
        """D4[i, j, k, l] = (D_l D_k alpha)(d_i, d_j)."""
        return self._normal_derivative(self.nabla_alpha, self.induced_gamma, 3)

    @cached_property
    def alpha_norm_sq_jet(self):
        """Frame-free g^{ik} g^{jl} <alpha_ij, alpha_kl> (without the sign)."""
        al = self.alpha
        d = al.degree
        Ga = jets.einsum("ab,ijb->ija", _at(self.G, d), al)
        P = jets.einsum("ija,kla->ijkl", al, Ga)
        ginv = jets.inv(_at(self.metric, d))
        Q = jets.einsum("ik,ijkl->jl", ginv, P)
        return jets.einsum("jl,jl->", ginv, Q)

    # frames ------------------------------------------------------------------

    @cached_property
    def frames(self):
        Gv = self.G.value
        Xv = self.X.value
        gv = self.metric.value
        lowest = float(np.linalg.eigvalsh(gv)[0])
        if lowest <= SPACELIKE_TOL:
            raise SpacelikeViolation(lowest)
        C = np.linalg.inv(np.linalg.cholesky(gv))
        E = C @ Xv
        ginv = np.linalg.inv(gv)
        GX = Xv @ Gv

        def perp(v):
            return v - (ginv @ (GX @ v)) @ Xv

        frame, signs = [], []
        need = self.K - self.n
        for A in range(self.K):
            if len(frame) == need:
                break
            v = perp(np.eye(self.K)[A])
            for e, s in zip(frame, signs):
                v = v - s * (e @ Gv @ v) * e
            nrm = v @ Gv @ v
            if abs(nrm) < NULL_TOL:
                continue
            frame.append(v / np.sqrt(abs(nrm)))
            signs.append(1.0 if nrm > 0 else -1.0)
        if len(frame) != need:
            raise FrameError(f"found {len(frame)} of {need} normal directions")
        return C, E, np.array(frame), np.array(signs)


def _extrinsic(loc):
    cfg = loc.cfg
    C, E, nf, signs = loc.frames
    Gv = loc.G.value
    n, K = loc.n, loc.K
    alpha_c = loc.alpha.value
    alpha_on = np.einsum("ai,bj,ijA->abA", C, C, alpha_c)
    h = np.einsum("abA,AB,kB->kab", alpha_on, Gv, nf)

    # shape operators through the Weingarten formula, independently of alpha
    eta = loc.perp(loc.constant_vectors(nf, 1))
    D_eta = loc.covariant(eta).value  # (k, i, A)
    Acoord = -np.einsum("kiA,AB,jB->kij", D_eta, Gv, loc.X.value)
    shape_ops = np.einsum("ai,kij,bj->kab", C, Acoord, C)

    eps = cfg.epsilon
    T = eps * E[:, 0]
    xi = eps * nf[:, 0]
    mean_components = np.trace(h, axis1=1, axis2=2) / n
    H = np.einsum("k,k,kA->A", signs, mean_components, nf)

    co = cfg.coefficients(loc.point.t)

    R_int = riemann_lowered(_at(loc.metric, 2)).value
    R_int = np.einsum("ai,bj,ck,dl,ijkl->abcd", C, C, C, C, R_int)

    # normal curvature straight from jets: D_i D_j eta - D_j D_i eta
    eta2 = loc.perp(loc.constant_vectors(nf, 2))
    first = loc.perp(loc.covariant(eta2))  # (k, j, A): D^perp_j eta
    second = loc.perp(loc.covariant(first)).value  # (k, j, i, A): D_i D_j eta
    rp = np.swapaxes(second, 1, 2) - second  # [k, i, j] = D_i D_j - D_j D_i
    rperp = np.einsum("ai,bj,kijA,AB,gB->abkg", C, C, rp, Gv, nf)

    dt = loc.constant_vectors(np.eye(K)[0], 1)
    xi_field = loc.perp(dt)
    T_field = dt - xi_field
    DT = loc.covariant(T_field).value  # (i, A)
    nabla_T = np.einsum("ai,iA,AB,bB->ab", C, DT, Gv, E)
    Dxi = loc.covariant(xi_field).value
    nabla_perp_xi = np.einsum("ai,iA,AB,kB->ak", C, Dxi, Gv, nf)

    return ExtrinsicData(
        u=loc.u.copy(),
        point=loc.point,
        epsilon=eps,
        ambient_metric=np.diag(Gv).copy(),
        metric=loc.metric.value,
        metric_inv=np.linalg.inv(loc.metric.value),
        coord_tangents=loc.X.value,
        tangent_frame=E,
        frame_change=C,
        normal_frame=nf,
        normal_signs=signs,
        alpha_coords=alpha_c,
        h=h,
        shape_ops=shape_ops,
        mean_curvature=H,
        mean_components=mean_components,
        T=T,
        xi=xi,
        b=co["b"],
        B=co["B"],
        b_prime=co["b_prime"],
        B_prime=co["B_prime"],
        log_deriv=co["log_deriv"],
        intrinsic_riemann=R_int,
        normal_curvature_jets=rperp,
        nabla_T=nabla_T,
        nabla_perp_xi=nabla_perp_xi,
    )


def _derived(loc, data):
    C = data.frame_change
    Gv = loc.G.value
    nf = data.normal_frame
    d3 = loc.nabla_alpha.value
    d4 = loc.nabla2_alpha.value
    h3 = np.einsum("ai,bj,ck,ijkA,AB,gB->gabc", C, C, C, d3, Gv, nf)
    h4 = np.einsum("ai,bj,ck,dl,ijklA,AB,gB->gabcd", C, C, C, C, d4, Gv, nf)
    norm_sq = lap = None
    if data.normal_definite:
        sigma = data.normal_sign
        f = loc.alpha_norm_sq_jet
        gam = loc.induced_gamma.value
        hess = f.hessian()
        grad = f.gradient()
        norm_sq = sigma * f.value
        lap = sigma * float(np.einsum("ij,ij->", data.metric_inv, hess - np.einsum("kij,k->ij", gam, grad)))
    return DerivedTensors(
        h3=h3,
        h4=h4,
        alpha_norm_sq=norm_sq,
        grad_norm_sq=float(np.sum(h3**2)),
        laplacian_norm_sq=lap,
        grad_B=data.B_prime * data.tangent_frame[:, 0],
    )


def extrinsic_at(imm, cfg, u):
    """First-order extrinsic data (frames, alpha, A, T, xi, b, B) at u."""
    return _extrinsic(_Local(imm, cfg, u, 3))


def derived_at(imm, cfg, u):
    """Covariant derivatives of alpha and the Laplacian of |alpha|^2 at u."""
    loc = _Local(imm, cfg, u, 4)
    return _derived(loc, _extrinsic(loc))


def analyze(imm, cfg, u):
    """Both ExtrinsicData and DerivedTensors from a single jet expansion."""
    loc = _Local(imm, cfg, u, 4)
    data = _extrinsic(loc)
    return data, _derived(loc, data)
