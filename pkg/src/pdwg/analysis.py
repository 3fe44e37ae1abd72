"""Error norms, discrete diagnostics, conservation verification, and
convergence orders.

Error measurement follows the benchmark convention: the primal solution is
compared with the exact solution sampled at element centers (nodal point
interpolation), and the multiplier, whose exact value is zero, is measured
in an elementwise L2 norm plus an edge-weighted trace norm.  Conservation
is verified against the postprocessed solution

    u_tilde = u_h + tau (beta.grad(lam_0) - c lam_0)

and flux  F_h = beta u_h - 1/h_T (lam_0 - lam_b) n,  which satisfy

    int_{dT} F_h . n + int_T c u_tilde = int_T f

elementwise and have continuous normal flux across interior edges.  All
conservation integrals reuse the assembly quadrature rules, so the checks
hold to solver accuracy rather than quadrature accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assembly import ProblemSpec
from .fields import bind_scalar, bind_vector
from .mesh import BoundaryClassification, Mesh, all_element_geometry, element_geometry
from .poly import EdgeBasis, TriBasis, map_to_edge, quad_edge
from .solver import Solution
from .weakspace import PrimalFunction, WeakFunction


@dataclass
class ErrorReport:
    """Discrete error norms of one solve (None when not computed)."""

    err_u: float
    err_lam0: float
    err_lamb: float
    norm_mh: float | None = None
    norm_wh: float | None = None


@dataclass
class ConservationReport:
    """Elementwise balance residuals and interior-edge flux jumps."""

    element_residuals: np.ndarray
    flux_jumps: np.ndarray
    interior_edges: np.ndarray
    scale_f: float

    @property
    def max_element_residual(self) -> float:
        return float(np.abs(self.element_residuals).max())

    @property
    def max_flux_jump(self) -> float:
        return float(np.abs(self.flux_jumps).max()) if len(self.flux_jumps) else 0.0


def nodal_interpolant(exact_u, mesh: Mesh, k: int = 1) -> PrimalFunction:
    """Exact solution sampled at element centers as a piecewise constant."""
    if k != 1:
        raise ValueError("nodal interpolation is defined for k=1")
    coords = mesh.vertices[mesh.elements]
    centers = coords.mean(axis=1)
    vals = np.asarray(exact_u(centers[:, 0], centers[:, 1]), dtype=float)
    return PrimalFunction(coeffs=vals.reshape(-1, 1))


def error_norms(
    solution: Solution,
    spec: ProblemSpec,
    mesh: Mesh,
    contexts=None,
) -> ErrorReport:
    """Norms ||u_h - I_h u||, ||lam_0||, and the h_T-weighted trace norm
    ||lam_b||.  Each edge is counted once, weighted by the diameter of its
    owner element (the lower incident element index)."""
    if spec.exact_u is None:
        raise ValueError("error norms require an exact solution")
    interp = nodal_interpolant(spec.exact_u, mesh, spec.k)

    err_u_sq = 0.0
    lam0_sq = 0.0
    basis = TriBasis(spec.j)
    for t in range(mesh.num_elements):
        if contexts is not None:
            ctx = contexts[t]
            geom, pts, w = ctx.geom, ctx.qpts, ctx.qw
            vals = ctx.lam0_vals
        else:
            geom = element_geometry(mesh, t)
            pts, w = _element_rule(mesh, t, spec)
            vals = basis.eval(pts, geom.centroid, geom.diameter)
        diff = solution.u.coeffs[t, 0] - interp.coeffs[t, 0]
        err_u_sq += geom.area * diff * diff
        lam0_t = vals @ solution.lam.lam0[t]
        lam0_sq += float(w @ (lam0_t * lam0_t))

    lamb_sq = 0.0
    erule = quad_edge(2 * spec.edge_quad_points - 1)
    ebasis = EdgeBasis(spec.j)
    owner_h = _edge_owner_diameters(mesh)
    for e in range(mesh.num_edges):
        a, b = mesh.edges[e]
        _, w, t_param = map_to_edge(erule, mesh.vertices[a], mesh.vertices[b])
        vals = ebasis.eval(t_param) @ solution.lam.lamb[e]
        lamb_sq += owner_h[e] * float(w @ (vals * vals))

    return ErrorReport(
        err_u=math.sqrt(err_u_sq),
        err_lam0=math.sqrt(lam0_sq),
        err_lamb=math.sqrt(lamb_sq),
    )


def _element_rule(mesh: Mesh, t: int, spec: ProblemSpec):
    from .poly import map_to_triangle, quad_triangle

    rule = quad_triangle(spec.interior_degree)
    return map_to_triangle(rule, mesh.element_coords(t))


def _edge_owner_diameters(mesh: Mesh) -> np.ndarray:
    owner = np.where(
        mesh.edge_elems[:, 1] < 0,
        mesh.edge_elems[:, 0],
        mesh.edge_elems.min(axis=1),
    )
    diameters = np.array([g.diameter for g in all_element_geometry(mesh)])
    return diameters[owner]


def triple_norm_Wh(lam: WeakFunction, spec: ProblemSpec, mesh: Mesh) -> float:
    """Multiplier seminorm

        ( sum_T 1/h_T ||lam_0 - lam_b||_{dT}^2
              + tau ||beta.grad(lam_0) - c lam_0||_T^2 )^(1/2),

    which squares to the stabilizer quadratic form s(lam, lam)."""
    total = 0.0
    basis = TriBasis(spec.j)
    ebasis = EdgeBasis(spec.j)
    erule = quad_edge(2 * spec.edge_quad_points - 1)
    for t in range(mesh.num_elements):
        geom = element_geometry(mesh, t)
        cx, cy = geom.centroid
        beta = bind_vector(spec.beta, cx, cy)
        c = bind_scalar(spec.c, cx, cy)
        for i in range(3):
            a_id = mesh.elements[t][i]
            b_id = mesh.elements[t][(i + 1) % 3]
            pts, w, tloc = map_to_edge(erule, mesh.vertices[a_id], mesh.vertices[b_id])
            tglob = tloc if a_id < b_id else -tloc
            lam0_on_e = basis.eval(pts, geom.centroid, geom.diameter) @ lam.lam0[t]
            lamb_on_e = ebasis.eval(tglob) @ lam.lamb[mesh.element_edges[t, i]]
            diff = lam0_on_e - lamb_on_e
            total += float(w @ (diff * diff)) / geom.diameter
        if spec.tau > 0:
            pts, w = _element_rule(mesh, t, spec)
            grads = basis.eval_grad(pts, geom.centroid, geom.diameter)
            vals = basis.eval(pts, geom.centroid, geom.diameter)
            bx, by = beta(pts[:, 0], pts[:, 1])
            resid = (
                np.asarray(bx) * (grads[:, :, 0] @ lam.lam0[t])
                + np.asarray(by) * (grads[:, :, 1] @ lam.lam0[t])
                - np.asarray(c(pts[:, 0], pts[:, 1])) * (vals @ lam.lam0[t])
            )
            total += spec.tau * float(w @ (resid * resid))
    return math.sqrt(total)


def triple_norm_Mh(
    v: PrimalFunction,
    spec: ProblemSpec,
    mesh: Mesh,
    classification: BoundaryClassification,
) -> float:
    """Primal-space norm

        ( sum_T h_T^2 ||div(beta v) + c v||_T^2
          + sum_{e not in outflow} h_T ||[beta v . n]||_e^2 )^(1/2)

    with the jump equal to the one-sided value on inflow boundary edges.
    Requires the analytic divergence of beta (carried by the field)."""
    if not hasattr(spec.beta, "div") and not hasattr(spec.beta, "branch_at"):
        raise ValueError("beta must provide an analytic divergence")

    basis = TriBasis(spec.k - 1)
    total = 0.0
    for t in range(mesh.num_elements):
        geom = element_geometry(mesh, t)
        cx, cy = geom.centroid
        beta = bind_vector(spec.beta, cx, cy)
        c = bind_scalar(spec.c, cx, cy)
        if not hasattr(beta, "div"):
            raise ValueError("beta must provide an analytic divergence")
        pts, w = _element_rule(mesh, t, spec)
        vals = basis.eval(pts, geom.centroid, geom.diameter)
        grads = basis.eval_grad(pts, geom.centroid, geom.diameter)
        vq = vals @ v.coeffs[t]
        bx, by = beta(pts[:, 0], pts[:, 1])
        dvx = grads[:, :, 0] @ v.coeffs[t]
        dvy = grads[:, :, 1] @ v.coeffs[t]
        resid = (
            np.asarray(beta.div(pts[:, 0], pts[:, 1])) * vq
            + np.asarray(bx) * dvx
            + np.asarray(by) * dvy
            + np.asarray(c(pts[:, 0], pts[:, 1])) * vq
        )
        total += geom.diameter**2 * float(w @ (resid * resid))

    owner_h = _edge_owner_diameters(mesh)
    erule = quad_edge(2 * spec.edge_quad_points - 1)
    for e in range(mesh.num_edges):
        boundary = mesh.edge_elems[e, 1] < 0
        if boundary and not classification.is_inflow[e]:
            continue
        a, b = mesh.edges[e]
        pts, w, _ = map_to_edge(erule, mesh.vertices[a], mesh.vertices[b])
        jump = np.zeros(len(w))
        for t in mesh.edge_elems[e]:
            if t < 0:
                continue
            t = int(t)
            geom = element_geometry(mesh, t)
            beta = bind_vector(spec.beta, geom.centroid[0], geom.centroid[1])
            local = int(np.flatnonzero(mesh.element_edges[t] == e)[0])
            n = geom.edge_normals[local]
            vals = basis.eval(pts, geom.centroid, geom.diameter)
            vq = vals @ v.coeffs[t]
            bx, by = beta(pts[:, 0], pts[:, 1])
            jump += (np.asarray(bx) * n[0] + np.asarray(by) * n[1]) * vq
        total += owner_h[e] * float(w @ (jump * jump))
    return math.sqrt(total)


def conservation_report(
    solution: Solution,
    spec: ProblemSpec,
    mesh: Mesh,
    contexts=None,
) -> ConservationReport:
    """Elementwise balance residuals of the conservation identity and the
    interior-edge normal-flux jumps tested against the edge trace basis.

    The jump test uses the flux the scheme itself transports: beta u_h is
    projected elementwise onto degree k-1 vectors (for elementwise
    constant convection this is the flux exactly).  Residuals reuse the
    assembly quadrature, so a converged solve drives them to solver
    tolerance.
    """
    from .assembly import build_contexts

    if contexts is None:
        contexts = build_contexts(mesh, spec)
    u = solution.u
    lam = solution.lam
    T = mesh.num_elements
    residuals = np.zeros(T)
    scale_f = 1.0

    interior_mask = mesh.edge_elems[:, 1] >= 0
    dim_e = spec.j + 1
    jump_moments = np.zeros((mesh.num_edges, dim_e))

    for t in range(T):
        ctx = contexts[t]
        fv = np.asarray(ctx.f(ctx.qpts[:, 0], ctx.qpts[:, 1]), dtype=float)
        scale_f = max(scale_f, float(np.abs(fv).max()))

        uq = ctx.u_vals @ u.coeffs[t]
        bx, by = ctx.beta_q
        # L2 projection of beta u_h onto degree k-1 vectors.
        M = ctx.u_vals.T @ (ctx.qw[:, None] * ctx.u_vals)
        flux_coeff = np.stack(
            [
                np.linalg.solve(M, ctx.u_vals.T @ (ctx.qw * (np.asarray(bx) * uq))),
                np.linalg.solve(M, ctx.u_vals.T @ (ctx.qw * (np.asarray(by) * uq))),
            ]
        )

        # u_tilde = u_h + tau (beta.grad(lam_0) - c lam_0)
        utilde = uq.copy()
        if spec.tau > 0:
            grads = ctx.lam0_grads
            utilde = utilde + spec.tau * (
                np.asarray(bx) * (grads[:, :, 0] @ lam.lam0[t])
                + np.asarray(by) * (grads[:, :, 1] @ lam.lam0[t])
                - ctx.c_q * (ctx.lam0_vals @ lam.lam0[t])
            )
        r = float(ctx.qw @ (ctx.c_q * utilde)) - float(ctx.qw @ fv)

        hinv = 1.0 / ctx.geom.diameter
        for i in range(3):
            e = mesh.element_edges[t, i]
            n = ctx.geom.edge_normals[i]
            u_on_e = ctx.edge_u[i] @ u.coeffs[t]
            lam0_on_e = ctx.edge_lam0[i] @ lam.lam0[t]
            lamb_on_e = ctx.edge_trace[i] @ lam.lamb[e]
            stab_part = hinv * (lam0_on_e - lamb_on_e)

            ebx, eby = ctx.beta(ctx.edge_pts[i][:, 0], ctx.edge_pts[i][:, 1])
            bn = np.asarray(ebx) * n[0] + np.asarray(eby) * n[1]
            r += float(ctx.edge_w[i] @ (bn * u_on_e - stab_part))

            if interior_mask[e]:
                # this side's contribution to <[F_h . n], trace basis>_e,
                # with beta u_h replaced by its elementwise projection
                proj_flux_n = (ctx.edge_u[i] @ flux_coeff.T) @ n
                jump_moments[e] += ctx.edge_trace[i].T @ (
                    ctx.edge_w[i] * (proj_flux_n - stab_part)
                )
        residuals[t] = r

    interior = np.flatnonzero(interior_mask)
    jumps = np.abs(jump_moments[interior]).max(axis=1)
    return ConservationReport(
        element_residuals=residuals,
        flux_jumps=jumps,
        interior_edges=interior,
        scale_f=scale_f,
    )


def convergence_orders(errors) -> list[float | None]:
    """Orders log2(e_{n-1} / e_n) between consecutive halved-h levels; the
    first entry is None."""
    errors = list(errors)
    if len(errors) < 2:
        raise ValueError("need at least two levels to compute orders")
    orders: list[float | None] = [None]
    for prev, cur in zip(errors, errors[1:]):
        if not (prev > 0 and cur > 0) or not (math.isfinite(prev) and math.isfinite(cur)):
            raise ValueError(f"cannot compute order from errors {prev}, {cur}")
        orders.append(math.log2(prev / cur))
    return orders


@dataclass
class PostField:
    """Post-processed point values: vertex and edge-midpoint averages."""

    x: np.ndarray
    y: np.ndarray
    value: np.ndarray


def postprocess_averages(u: PrimalFunction, mesh: Mesh) -> PostField:
    """Vertex values are the unweighted mean of u_h over the elements
    sharing the vertex; edge-midpoint values average the one or two
    incident elements.  Duplicated crack vertices average per side."""
    vals = u.coeffs[:, 0]
    vsum = np.zeros(mesh.num_vertices)
    vcnt = np.zeros(mesh.num_vertices)
    for t, tri in enumerate(mesh.elements):
        for v in tri:
            vsum[v] += vals[t]
            vcnt[v] += 1
    vertex_vals = vsum / np.maximum(vcnt, 1)

    mids = 0.5 * (mesh.vertices[mesh.edges[:, 0]] + mesh.vertices[mesh.edges[:, 1]])
    esum = np.zeros(mesh.num_edges)
    ecnt = np.zeros(mesh.num_edges)
    for e in range(mesh.num_edges):
        for t in mesh.edge_elems[e]:
            if t >= 0:
                esum[e] += vals[int(t)]
                ecnt[e] += 1
    edge_vals = esum / np.maximum(ecnt, 1)

    x = np.concatenate([mesh.vertices[:, 0], mids[:, 0]])
    y = np.concatenate([mesh.vertices[:, 1], mids[:, 1]])
    value = np.concatenate([vertex_vals, edge_vals])
    return PostField(x=x, y=y, value=value)
