"""Degrees of freedom for the weak and primal spaces, and the discrete
weak gradient.

The multiplier space pairs an interior polynomial of degree j per element
with an independent trace polynomial of degree j per edge; traces on
outflow edges are constrained to zero and never receive a global index.
The primal space is fully discontinuous, degree k-1 per element.

The discrete weak gradient of a weak function v = {v0, vb} on a triangle T
is the vector polynomial of degree r = k-1 defined by

    (grad_w v, psi)_T = -(v0, div psi)_T + <vb, psi . n>_{dT}

for all vector polynomials psi of degree r; it is computed by inverting
the local vector mass matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import BoundaryClassification, Mesh, element_geometry
from .poly import (
    EdgeBasis,
    TriBasis,
    dim_poly2d,
    map_to_edge,
    map_to_triangle,
    project_edge,
    project_element,
    quad_edge,
    quad_triangle,
)


class DofMap:
    """Global indexing for the multiplier and primal unknowns.

    Multiplier indices come first: one block of dim P_j(T) per element,
    then one block of dim P_j(e) per free (non-outflow) edge.  Primal
    indices follow, one block of dim P_{k-1}(T) per element.
    """

    def __init__(self, mesh: Mesh, k: int, j: int, classification: BoundaryClassification):
        if k != 1:
            raise ValueError(f"only the lowest order k=1 is supported, got k={k}")
        if j not in (k - 1, k):
            raise ValueError(f"j must be k-1 or k, got j={j} for k={k}")
        self.mesh = mesh
        self.classification = classification
        self.k = k
        self.j = j
        self.dim_lam0 = dim_poly2d(j)
        self.dim_lamb = j + 1
        self.dim_u = dim_poly2d(k - 1)

        T = mesh.num_elements
        E = mesh.num_edges
        constrained = np.zeros(E, dtype=bool)
        constrained[classification.outflow_edges] = True
        self.constrained_edge = constrained

        self.lam0_start = np.arange(T, dtype=np.int64) * self.dim_lam0
        rank = np.cumsum(~constrained) - 1
        self.lamb_start = np.where(
            constrained, -1, T * self.dim_lam0 + rank * self.dim_lamb
        ).astype(np.int64)
        self.n_free_edges = int((~constrained).sum())
        self.n_lambda = T * self.dim_lam0 + self.n_free_edges * self.dim_lamb
        self.n_u = T * self.dim_u
        self.u_start = self.n_lambda + np.arange(T, dtype=np.int64) * self.dim_u

    @property
    def n_total(self) -> int:
        return self.n_lambda + self.n_u

    def is_constrained_edge(self, e: int) -> bool:
        return bool(self.constrained_edge[e])

    def element_lambda_indices(self, t: int) -> np.ndarray:
        """Global indices of the local multiplier block of element t, laid
        out as [interior; trace edge 0; trace edge 1; trace edge 2], with
        -1 marking constrained (outflow) trace entries."""
        idx = np.empty(self.dim_lam0 + 3 * self.dim_lamb, dtype=np.int64)
        idx[: self.dim_lam0] = self.lam0_start[t] + np.arange(self.dim_lam0)
        for i in range(3):
            e = self.mesh.element_edges[t, i]
            lo = self.dim_lam0 + i * self.dim_lamb
            start = self.lamb_start[e]
            if start < 0:
                idx[lo : lo + self.dim_lamb] = -1
            else:
                idx[lo : lo + self.dim_lamb] = start + np.arange(self.dim_lamb)
        return idx

    def u_indices(self, t: int) -> np.ndarray:
        return self.u_start[t] + np.arange(self.dim_u)


@dataclass
class WeakFunction:
    """Coefficients of a weak function: per-element interior polynomials
    (rows of ``lam0``) and per-edge trace polynomials (rows of ``lamb``).
    Trace rows on constrained edges are identically zero."""

    lam0: np.ndarray
    lamb: np.ndarray

    @classmethod
    def zeros(cls, dofmap: DofMap) -> "WeakFunction":
        return cls(
            lam0=np.zeros((dofmap.mesh.num_elements, dofmap.dim_lam0)),
            lamb=np.zeros((dofmap.mesh.num_edges, dofmap.dim_lamb)),
        )

    @classmethod
    def from_free_vector(cls, dofmap: DofMap, x: np.ndarray) -> "WeakFunction":
        wf = cls.zeros(dofmap)
        T = dofmap.mesh.num_elements
        wf.lam0[:] = x[: T * dofmap.dim_lam0].reshape(T, dofmap.dim_lam0)
        for e in range(dofmap.mesh.num_edges):
            start = dofmap.lamb_start[e]
            if start >= 0:
                wf.lamb[e] = x[start : start + dofmap.dim_lamb]
        return wf

    def free_vector(self, dofmap: DofMap) -> np.ndarray:
        x = np.zeros(dofmap.n_lambda)
        T = dofmap.mesh.num_elements
        x[: T * dofmap.dim_lam0] = self.lam0.ravel()
        for e in range(dofmap.mesh.num_edges):
            start = dofmap.lamb_start[e]
            if start >= 0:
                x[start : start + dofmap.dim_lamb] = self.lamb[e]
        return x

    def element_coeffs(self, dofmap: DofMap, t: int) -> np.ndarray:
        """Local coefficient vector [interior; traces of the 3 edges]."""
        parts = [self.lam0[t]]
        for i in range(3):
            parts.append(self.lamb[dofmap.mesh.element_edges[t, i]])
        return np.concatenate(parts)


@dataclass
class PrimalFunction:
    """Coefficients of a fully discontinuous piecewise polynomial, one row
    of TriBasis(k-1) coefficients per element."""

    coeffs: np.ndarray

    @classmethod
    def from_vector(cls, dofmap: DofMap, x: np.ndarray) -> "PrimalFunction":
        T = dofmap.mesh.num_elements
        return cls(coeffs=x.reshape(T, dofmap.dim_u).copy())

    def vector(self) -> np.ndarray:
        return self.coeffs.ravel().copy()


def weak_gradient_operator(
    qw: np.ndarray,
    vals_r: np.ndarray,
    grads_r: np.ndarray,
    vals_j: np.ndarray,
    edge_tables,
    dim_j: int,
    dim_e: int,
) -> np.ndarray:
    """Core of the discrete weak gradient, working on precomputed tables.

    ``edge_tables`` holds per local edge (weights, trace basis values,
    degree-r basis values on the edge, outward normal).  Returns the
    operator with shape (2, dim_r, dim_j + 3 dim_e).
    """
    dim_r = vals_r.shape[1]
    n_loc = dim_j + 3 * dim_e
    M = vals_r.T @ (qw[:, None] * vals_r)
    try:
        Minv = np.linalg.inv(M)
    except np.linalg.LinAlgError as err:
        raise np.linalg.LinAlgError("singular local mass matrix") from err

    rhs = np.zeros((2, dim_r, n_loc))
    # Interior part: -(v0, div psi) with psi = (chi_p, 0) or (0, chi_p).
    for comp in range(2):
        rhs[comp, :, :dim_j] = -grads_r[:, :, comp].T @ (qw[:, None] * vals_j)

    # Trace part: <vb, psi . n> over each edge.
    for i, (ew, evals, r_on_e, n) in enumerate(edge_tables):
        lo = dim_j + i * dim_e
        for comp in range(2):
            rhs[comp, :, lo : lo + dim_e] = r_on_e.T @ ((ew * n[comp])[:, None] * evals)

    return np.einsum("pq,cqn->cpn", Minv, rhs)


def weak_gradient_local(
    mesh: Mesh,
    t: int,
    k: int,
    j: int,
    quad_degree: int | None = None,
    edge_quad_points: int = 5,
) -> np.ndarray:
    """Matrix of the discrete weak gradient on element t.

    Maps local weak-function coefficients [interior; 3 edge traces] to the
    coefficients of a degree k-1 vector polynomial; returned with shape
    (2, dim P_{k-1}, n_local).  Raises if the local mass matrix is
    singular, which signals a degenerate element.
    """
    r = k - 1
    geom = element_geometry(mesh, t)
    coords = mesh.element_coords(t)
    basis_r = TriBasis(r)
    basis_j = TriBasis(j)
    basis_e = EdgeBasis(j)

    rule = quad_triangle(quad_degree if quad_degree is not None else max(2 * j + 2, 2))
    pts, w = map_to_triangle(rule, coords)
    vals_r = basis_r.eval(pts, geom.centroid, geom.diameter)
    grads_r = basis_r.eval_grad(pts, geom.centroid, geom.diameter)
    vals_j = basis_j.eval(pts, geom.centroid, geom.diameter)

    erule = quad_edge(2 * edge_quad_points - 1)
    edge_tables = []
    for i in range(3):
        a_id, b_id = mesh.elements[t][i], mesh.elements[t][(i + 1) % 3]
        a, b = mesh.vertices[a_id], mesh.vertices[b_id]
        epts, ew, tloc = map_to_edge(erule, a, b)
        tglob = tloc if a_id < b_id else -tloc
        edge_tables.append(
            (
                ew,
                basis_e.eval(tglob),
                basis_r.eval(epts, geom.centroid, geom.diameter),
                geom.edge_normals[i],
            )
        )

    try:
        return weak_gradient_operator(
            w, vals_r, grads_r, vals_j, edge_tables, basis_j.dim, basis_e.dim
        )
    except np.linalg.LinAlgError as err:
        raise np.linalg.LinAlgError(f"singular mass matrix on element {t}") from err


def project_to_weak(w, mesh: Mesh, j: int, quad_degree: int | None = None) -> WeakFunction:
    """Componentwise L2 projection of a smooth function into the weak
    space: interior projections onto P_j(T) and trace projections onto
    P_j(e) for every edge."""
    lam0 = np.zeros((mesh.num_elements, dim_poly2d(j)))
    for t in range(mesh.num_elements):
        lam0[t] = project_element(w, j, mesh.element_coords(t), quad_degree)
    lamb = np.zeros((mesh.num_edges, j + 1))
    for e in range(mesh.num_edges):
        a, b = mesh.edges[e]
        lamb[e] = project_edge(w, j, mesh.vertices[a], mesh.vertices[b])
    return WeakFunction(lam0=lam0, lamb=lamb)


def commutativity_check(
    w,
    grad_w,
    mesh: Mesh,
    k: int,
    j: int,
    quad_degree: int | None = None,
) -> float:
    """Max over elements of the L2 norm of

        grad_w(Q_h w) - Q_h(grad w),

    where the first term applies the discrete weak gradient to the
    projected weak function and the second projects the analytic gradient
    onto degree k-1.  Vanishes to quadrature accuracy for j >= k-1.
    """
    if j < k - 1:
        raise ValueError("commutativity requires j >= k-1")
    r = k - 1
    qd = quad_degree if quad_degree is not None else 2 * j + 6
    proj = project_to_weak(w, mesh, j, qd)
    basis_r = TriBasis(r)
    worst = 0.0
    for t in range(mesh.num_elements):
        coords = mesh.element_coords(t)
        geom = element_geometry(mesh, t)
        G = weak_gradient_local(mesh, t, k, j, quad_degree=qd)
        local = np.concatenate(
            [proj.lam0[t]] + [proj.lamb[mesh.element_edges[t, i]] for i in range(3)]
        )
        lhs = G @ local  # (2, dim_r)
        rhs = np.stack(
            [
                project_element(lambda x, y, c=comp: np.asarray(grad_w(x, y)[c]), r, coords, qd)
                for comp in range(2)
            ]
        )
        diff = lhs - rhs
        rule = quad_triangle(max(2 * r + 2, 2))
        pts, wq = map_to_triangle(rule, coords)
        vals = basis_r.eval(pts, geom.centroid, geom.diameter)
        M = vals.T @ (wq[:, None] * vals)
        err2 = sum(diff[c] @ M @ diff[c] for c in range(2))
        worst = max(worst, float(np.sqrt(max(err2, 0.0))))
    return worst
