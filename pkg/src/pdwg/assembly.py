"""Local forms and the global symmetric saddle-point system.

The discrete problem couples the primal unknown u (piecewise P_{k-1}) and
a weak-function multiplier lam (interior P_j per element plus trace P_j
per edge, traces vanishing on the outflow boundary):

    s(lam, sigma) + b(u, sigma) = <sigma_b, beta.n g>_{inflow} - (f, sigma_0)
    b(v, lam)                   = 0

with the per-element stabilizer

    s_T(rho, sigma) = 1/h_T <rho_0 - rho_b, sigma_0 - sigma_b>_{dT}
                    + tau (beta.grad(rho_0) - c rho_0,
                           beta.grad(sigma_0) - c sigma_0)_T

and coupling form b_T(v, sigma) = (v, beta . grad_w(sigma) - c sigma_0)_T.
Written in block form over x = [lam; u] the system is [[S, B], [B^T, 0]]
with symmetric positive semidefinite S, assembled element by element with
constrained outflow traces eliminated.

Variable coefficients are evaluated pointwise at quadrature nodes;
piecewise-defined fields are resolved per element by the branch containing
the element centroid (an element whose vertices disagree with its centroid
branch triggers a configuration warning).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse

from .fields import DerivedLoad, bind_scalar, bind_vector
from .mesh import (
    BoundaryClassification,
    ElementGeometry,
    Mesh,
    all_element_geometry,
    element_geometry,
)
from .poly import EdgeBasis, TriBasis, map_to_edge, map_to_triangle, quad_edge, quad_triangle
from .weakspace import DofMap, weak_gradient_operator

DEFAULT_EDGE_QUAD_POINTS = 5


def default_quad_degree(j: int) -> int:
    """Interior quadrature exactness: 2j+2 makes every polynomial-data
    integral exact; two extra degrees keep the error of smooth non
    polynomial data (rotational convection, trigonometric loads) below
    discretization error at the refinement levels used here."""
    return 2 * j + 4


@dataclass(frozen=True)
class ProblemSpec:
    """Data of one transport problem.

    beta / c / f / g are fields from :mod:`pdwg.fields` (or plain
    vectorized callables); ``f`` may be a :class:`DerivedLoad` to
    manufacture the load from the exact solution.  ``exact_u`` is optional
    and only used by the analysis layer.
    """

    beta: object
    c: object
    f: object
    g: object
    tau: float
    domain_tag: str
    exact_u: object = None
    k: int = 1
    j: int = 1
    quad_degree: int | None = None
    edge_quad_points: int = DEFAULT_EDGE_QUAD_POINTS

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError(f"tau must be nonnegative, got {self.tau}")

    @property
    def interior_degree(self) -> int:
        return self.quad_degree if self.quad_degree is not None else default_quad_degree(self.j)

    def with_overrides(self, **kwargs) -> "ProblemSpec":
        return replace(self, **kwargs)


@dataclass
class SaddleSystem:
    """Assembled sparse system [[S, B], [B^T, 0]] x = [rhs_lambda; 0]."""

    matrix: sparse.csr_matrix
    rhs: np.ndarray
    dofmap: DofMap

    @property
    def n_lambda(self) -> int:
        return self.dofmap.n_lambda

    @property
    def n_u(self) -> int:
        return self.dofmap.n_u


class _ElementContext:
    """Quadrature data, basis tables, bound coefficient fields, and the
    weak gradient operator of one element; built once per element during
    assembly and shared by every local form."""

    def __init__(self, mesh: Mesh, t: int, spec: ProblemSpec, geom: ElementGeometry | None = None):
        self.t = t
        self.geom: ElementGeometry = geom if geom is not None else element_geometry(mesh, t)
        coords = mesh.element_coords(t)
        cx, cy = self.geom.centroid

        self.beta = bind_vector(spec.beta, cx, cy)
        self.c = bind_scalar(spec.c, cx, cy)
        if isinstance(spec.f, DerivedLoad):
            self.f = spec.f.bind(self.beta, self.c)
        else:
            self.f = bind_scalar(spec.f, cx, cy)
        _warn_if_straddling(spec.beta, coords, cx, cy, t)

        self.basis_lam0 = TriBasis(spec.j)
        self.basis_u = TriBasis(spec.k - 1)
        self.basis_edge = EdgeBasis(spec.j)
        self.n_loc = self.basis_lam0.dim + 3 * self.basis_edge.dim

        rule = quad_triangle(spec.interior_degree)
        self.qpts, self.qw = map_to_triangle(rule, coords)
        self.lam0_vals = self.basis_lam0.eval(self.qpts, self.geom.centroid, self.geom.diameter)
        self.lam0_grads = self.basis_lam0.eval_grad(self.qpts, self.geom.centroid, self.geom.diameter)
        self.u_vals = self.basis_u.eval(self.qpts, self.geom.centroid, self.geom.diameter)
        self.beta_q = self.beta(self.qpts[:, 0], self.qpts[:, 1])
        self.c_q = np.asarray(self.c(self.qpts[:, 0], self.qpts[:, 1]), dtype=float)

        erule = quad_edge(2 * spec.edge_quad_points - 1)
        self.edge_pts = []
        self.edge_w = []
        self.edge_lam0 = []
        self.edge_trace = []
        self.edge_u = []
        for i in range(3):
            a_id = mesh.elements[t][i]
            b_id = mesh.elements[t][(i + 1) % 3]
            a, b = mesh.vertices[a_id], mesh.vertices[b_id]
            pts, w, tloc = map_to_edge(erule, a, b)
            tglob = tloc if a_id < b_id else -tloc
            self.edge_pts.append(pts)
            self.edge_w.append(w)
            self.edge_lam0.append(self.basis_lam0.eval(pts, self.geom.centroid, self.geom.diameter))
            self.edge_trace.append(self.basis_edge.eval(tglob))
            self.edge_u.append(self.basis_u.eval(pts, self.geom.centroid, self.geom.diameter))

        u_grads = self.basis_u.eval_grad(self.qpts, self.geom.centroid, self.geom.diameter)
        edge_tables = [
            (self.edge_w[i], self.edge_trace[i], self.edge_u[i], self.geom.edge_normals[i])
            for i in range(3)
        ]
        try:
            self.G = weak_gradient_operator(
                self.qw, self.u_vals, u_grads, self.lam0_vals, edge_tables,
                self.basis_lam0.dim, self.basis_edge.dim,
            )
        except np.linalg.LinAlgError as err:
            raise np.linalg.LinAlgError(f"singular mass matrix on element {t}") from err


def _warn_if_straddling(beta, coords, cx, cy, t):
    if not hasattr(beta, "pieces"):
        return
    centroid_branch = beta.branch_at(cx, cy)
    # Probe just inside each corner so vertices sitting exactly on an
    # aligned branch interface do not trigger false positives.
    shrink = 1e-6
    for vx, vy in coords:
        px = vx + shrink * (cx - vx)
        py = vy + shrink * (cy - vy)
        if beta.branch_at(float(px), float(py)) is not centroid_branch:
            warnings.warn(
                f"element {t} straddles a piecewise convection-field branch "
                "boundary; it is assigned the branch of its centroid",
                stacklevel=2,
            )
            return


def _adjoint_rows(ctx: _ElementContext) -> np.ndarray:
    """Values of beta.grad(sigma_0) - c sigma_0 for the local multiplier
    basis at the interior quadrature points, shape (nq, n_loc); trace
    columns are zero."""
    bx, by = ctx.beta_q
    rows = np.zeros((len(ctx.qw), ctx.n_loc))
    rows[:, : ctx.basis_lam0.dim] = (
        np.asarray(bx)[:, None] * ctx.lam0_grads[:, :, 0]
        + np.asarray(by)[:, None] * ctx.lam0_grads[:, :, 1]
        - ctx.c_q[:, None] * ctx.lam0_vals
    )
    return rows


def local_stabilizer(mesh: Mesh, t: int, spec: ProblemSpec, ctx: _ElementContext | None = None) -> np.ndarray:
    """Symmetric positive semidefinite stabilizer matrix over the local
    multiplier coefficients [interior; trace edge 0; 1; 2]."""
    ctx = ctx if ctx is not None else _ElementContext(mesh, t, spec)
    n = ctx.n_loc
    dim0 = ctx.basis_lam0.dim
    dimb = ctx.basis_edge.dim
    S = np.zeros((n, n))
    hinv = 1.0 / ctx.geom.diameter
    for i in range(3):
        D = np.zeros((len(ctx.edge_w[i]), n))
        D[:, :dim0] = ctx.edge_lam0[i]
        lo = dim0 + i * dimb
        D[:, lo : lo + dimb] = -ctx.edge_trace[i]
        S += hinv * D.T @ (ctx.edge_w[i][:, None] * D)
    if spec.tau > 0:
        A = _adjoint_rows(ctx)
        S += spec.tau * A.T @ (ctx.qw[:, None] * A)
    return S


def local_b_form(mesh: Mesh, t: int, spec: ProblemSpec, ctx: _ElementContext | None = None) -> np.ndarray:
    """Local coupling block, shape (n_loc multiplier rows, dim_u columns):
    entry (sigma, v) = (v, beta . grad_w(sigma) - c sigma_0)_T."""
    ctx = ctx if ctx is not None else _ElementContext(mesh, t, spec)
    bx, by = ctx.beta_q
    r_vals = ctx.u_vals  # degree k-1 = weak gradient range degree
    gradw_x = r_vals @ ctx.G[0]  # (nq, n_loc)
    gradw_y = r_vals @ ctx.G[1]
    C = np.asarray(bx)[:, None] * gradw_x + np.asarray(by)[:, None] * gradw_y
    C[:, : ctx.basis_lam0.dim] -= ctx.c_q[:, None] * ctx.lam0_vals
    return C.T @ (ctx.qw[:, None] * ctx.u_vals)


def local_load(mesh: Mesh, t: int, spec: ProblemSpec, ctx: _ElementContext | None = None) -> np.ndarray:
    """Element load -(f, sigma_0)_T over the local multiplier test block
    (trace entries zero)."""
    ctx = ctx if ctx is not None else _ElementContext(mesh, t, spec)
    fv = np.asarray(ctx.f(ctx.qpts[:, 0], ctx.qpts[:, 1]), dtype=float)
    out = np.zeros(ctx.n_loc)
    out[: ctx.basis_lam0.dim] = -ctx.lam0_vals.T @ (ctx.qw * fv)
    return out


def inflow_edge_load(
    mesh: Mesh,
    e: int,
    spec: ProblemSpec,
    classification: BoundaryClassification,
) -> np.ndarray:
    """Inflow data term <sigma_b, beta.n g>_e over the trace test basis of
    one inflow boundary edge."""
    if not classification.is_inflow[e]:
        raise ValueError(f"edge {e} is not an inflow boundary edge")
    t = int(mesh.edge_elems[e, 0])
    geom = element_geometry(mesh, t)
    cx, cy = geom.centroid
    beta = bind_vector(spec.beta, cx, cy)
    g = bind_scalar(spec.g, cx, cy)

    a_id, b_id = mesh.edges[e]
    a, b = mesh.vertices[a_id], mesh.vertices[b_id]
    rule = quad_edge(2 * spec.edge_quad_points - 1)
    pts, w, t_param = map_to_edge(rule, a, b)
    local = int(np.flatnonzero(mesh.element_edges[t] == e)[0])
    n = geom.edge_normals[local]
    bx, by = beta(pts[:, 0], pts[:, 1])
    bn = np.asarray(bx) * n[0] + np.asarray(by) * n[1]
    gv = np.asarray(g(pts[:, 0], pts[:, 1]), dtype=float)
    trace = EdgeBasis(spec.j).eval(t_param)
    return trace.T @ (w * bn * gv)


def build_contexts(mesh: Mesh, spec: ProblemSpec) -> list[_ElementContext]:
    """Per-element workspaces (quadrature, bases, bound fields, weak
    gradients), built in one pass so assembly and the analysis layer can
    share identical integration data."""
    geoms = all_element_geometry(mesh)
    return [_ElementContext(mesh, t, spec, geoms[t]) for t in range(mesh.num_elements)]


def assemble(
    mesh: Mesh,
    dofmap: DofMap,
    spec: ProblemSpec,
    contexts: list[_ElementContext] | None = None,
) -> SaddleSystem:
    """Assemble the global saddle-point system.

    Outflow trace unknowns are eliminated (never indexed), which keeps the
    matrix exactly the variational problem on the constrained multiplier
    space.  The returned matrix is symmetric with an identically zero
    primal-primal block.
    """
    if dofmap.mesh is not mesh:
        raise ValueError("dofmap was built for a different mesh")
    if (dofmap.k, dofmap.j) != (spec.k, spec.j):
        raise ValueError(
            f"dofmap degrees (k={dofmap.k}, j={dofmap.j}) do not match "
            f"spec degrees (k={spec.k}, j={spec.j})"
        )

    if contexts is None:
        contexts = build_contexts(mesh, spec)

    s_rows: list[np.ndarray] = []
    s_cols: list[np.ndarray] = []
    s_vals: list[np.ndarray] = []
    b_rows: list[np.ndarray] = []
    b_cols: list[np.ndarray] = []
    b_vals: list[np.ndarray] = []
    rhs = np.zeros(dofmap.n_total)

    for t in range(mesh.num_elements):
        ctx = contexts[t]
        lam_idx = dofmap.element_lambda_indices(t)
        free = lam_idx >= 0
        fidx = lam_idx[free]

        S_loc = local_stabilizer(mesh, t, spec, ctx)[np.ix_(free, free)]
        s_rows.append(np.repeat(fidx, len(fidx)))
        s_cols.append(np.tile(fidx, len(fidx)))
        s_vals.append(S_loc.ravel())

        B_loc = local_b_form(mesh, t, spec, ctx)[free]
        u_idx = dofmap.u_indices(t) - dofmap.n_lambda
        b_rows.append(np.repeat(fidx, len(u_idx)))
        b_cols.append(np.tile(u_idx, len(fidx)))
        b_vals.append(B_loc.ravel())

        rhs[fidx] += local_load(mesh, t, spec, ctx)[free]

    classification = dofmap.classification
    for e in classification.inflow_edges:
        start = dofmap.lamb_start[e]
        if start < 0:
            continue
        rhs[start : start + dofmap.dim_lamb] += inflow_edge_load(mesh, e, spec, classification)

    nL, nU = dofmap.n_lambda, dofmap.n_u
    S = sparse.coo_matrix(
        (np.concatenate(s_vals), (np.concatenate(s_rows), np.concatenate(s_cols))),
        shape=(nL, nL),
    ).tocsr()
    B = sparse.coo_matrix(
        (np.concatenate(b_vals), (np.concatenate(b_rows), np.concatenate(b_cols))),
        shape=(nL, nU),
    ).tocsr()
    A = sparse.bmat([[S, B], [B.T, None]], format="csr")
    return SaddleSystem(matrix=A, rhs=rhs, dofmap=dofmap)


def dump_matrixmarket(system: SaddleSystem, path) -> None:
    """Write the system matrix in MatrixMarket coordinate format with
    symmetric storage (for external validation)."""
    from scipy.io import mmwrite

    A = sparse.tril(system.matrix).tocoo()
    mmwrite(str(path), A, symmetry="symmetric")
