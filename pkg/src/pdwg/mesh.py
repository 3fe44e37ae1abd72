"""Triangulations of the benchmark domains with refinement and boundary
classification.

Three domains are built in: the unit square (0,1)^2, the L-shaped domain
with vertices (0,0), (2,0), (2,1), (1,1), (1,2), (0,2), and the square
(-1,1)^2 slit along the segment (0,1) x {0}.  Coarse meshes split every
unit square cell by its lower-right to upper-left diagonal, so the line
x + y = 1 used by the piecewise-coefficient benchmarks is a mesh line of
the unit square and L-shaped meshes at every refinement level.  The slit
is modeled topologically: vertices and edges on the open crack are
duplicated (one copy per side), so no element adjacency crosses the crack
while the geometry stays exact.

Meshes are immutable after construction; refinement returns a new mesh in
which every triangle is replaced by the four congruent children obtained
by connecting edge midpoints.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DOMAIN_TAGS = ("unit_square", "l_shape", "cracked_square")

# Edges with |beta . n| at or below this are treated as outflow, so their
# trace unknowns are constrained.
CLASSIFY_EPS = 1e-12


@dataclass(frozen=True)
class Mesh:
    """Conforming triangulation with element/edge/vertex connectivity.

    ``edges[e] = (a, b)`` with a < b; the edge parameterization runs from
    vertex a to vertex b.  ``edge_elems[e] = (left, right)`` holds the
    incident elements, with the element traversing a -> b in its
    counterclockwise loop first and -1 marking a missing (boundary) side.
    ``element_edges[t, i]`` is the edge spanned by local vertices
    (i, i+1 mod 3) of element t, and ``element_edge_signs[t, i]`` is +1
    when that traversal agrees with the edge's own a -> b orientation.
    """

    vertices: np.ndarray
    elements: np.ndarray
    edges: np.ndarray
    edge_elems: np.ndarray
    element_edges: np.ndarray
    element_edge_signs: np.ndarray
    level: int
    domain_tag: str

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_elements(self) -> int:
        return len(self.elements)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def boundary_edges(self) -> np.ndarray:
        """Indices of edges with exactly one incident element."""
        return np.flatnonzero(self.edge_elems[:, 1] < 0)

    def element_coords(self, t: int) -> np.ndarray:
        return self.vertices[self.elements[t]]


@dataclass(frozen=True)
class ElementGeometry:
    """Per-element geometric data: area, diameter (longest edge), centroid,
    edge lengths and outward unit normals in local edge order."""

    area: float
    diameter: float
    centroid: np.ndarray
    edge_lengths: np.ndarray
    edge_normals: np.ndarray


@dataclass(frozen=True)
class BoundaryClassification:
    """Partition of the boundary edges into inflow and outflow sets.

    ``outward_normal[e]`` and ``beta_dot_n[e]`` are filled for boundary
    edges only (NaN elsewhere); ``beta_dot_n`` is sampled at the edge
    midpoint using the incident element's branch of beta.
    """

    inflow_edges: np.ndarray
    outflow_edges: np.ndarray
    outward_normal: np.ndarray
    beta_dot_n: np.ndarray
    is_inflow: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.is_inflow is None:
            mask = np.zeros(len(self.beta_dot_n), dtype=bool)
            mask[self.inflow_edges] = True
            object.__setattr__(self, "is_inflow", mask)


class MeshError(ValueError):
    """Raised for invalid mesh topology or geometry."""


def _build_topology(vertices, elements, level, domain_tag) -> Mesh:
    """Derive edge connectivity from an element list and validate it."""
    vertices = np.asarray(vertices, dtype=float)
    elements = np.asarray(elements, dtype=np.int64)

    coords = vertices[elements]
    signed = 0.5 * (
        (coords[:, 1, 0] - coords[:, 0, 0]) * (coords[:, 2, 1] - coords[:, 0, 1])
        - (coords[:, 2, 0] - coords[:, 0, 0]) * (coords[:, 1, 1] - coords[:, 0, 1])
    )
    if np.any(signed <= 0):
        bad = np.flatnonzero(signed <= 0)
        raise MeshError(f"elements {bad.tolist()} are not counterclockwise")

    edge_index: dict[tuple[int, int], int] = {}
    edge_list: list[tuple[int, int]] = []
    incidences: list[list[tuple[int, int]]] = []
    element_edges = np.empty((len(elements), 3), dtype=np.int64)
    element_edge_signs = np.empty((len(elements), 3), dtype=np.int8)

    for t, (v0, v1, v2) in enumerate(elements):
        for i, (a, b) in enumerate(((v0, v1), (v1, v2), (v2, v0))):
            key = (int(min(a, b)), int(max(a, b)))
            e = edge_index.get(key)
            if e is None:
                e = len(edge_list)
                edge_index[key] = e
                edge_list.append(key)
                incidences.append([])
            sign = 1 if a < b else -1
            incidences[e].append((t, sign))
            element_edges[t, i] = e
            element_edge_signs[t, i] = sign

    edges = np.array(edge_list, dtype=np.int64)
    edge_elems = np.full((len(edges), 2), -1, dtype=np.int64)
    for e, inc in enumerate(incidences):
        if len(inc) not in (1, 2):
            raise MeshError(f"edge {e} has {len(inc)} incident elements")
        if len(inc) == 2:
            if inc[0][1] == inc[1][1]:
                raise MeshError(f"edge {e} traversed twice in the same direction")
            inc = sorted(inc, key=lambda ts: -ts[1])  # +1 traversal first
            edge_elems[e] = (inc[0][0], inc[1][0])
        else:
            edge_elems[e, 0] = inc[0][0]

    return Mesh(
        vertices=vertices,
        elements=elements,
        edges=edges,
        edge_elems=edge_elems,
        element_edges=element_edges,
        element_edge_signs=element_edge_signs,
        level=level,
        domain_tag=domain_tag,
    )


def _square_cells(cells, vertex_ids):
    """Split unit square cells by their lower-right -> upper-left diagonal.

    ``cells`` holds (lower-left corner) pairs; ``vertex_ids`` maps lattice
    coordinates to vertex indices.  Returns counterclockwise triangles.
    """
    elements = []
    for (x, y) in cells:
        ll = vertex_ids[(x, y)]
        lr = vertex_ids[(x + 1, y)]
        ur = vertex_ids[(x + 1, y + 1)]
        ul = vertex_ids[(x, y + 1)]
        elements.append((ll, lr, ul))
        elements.append((lr, ur, ul))
    return elements


def build_coarse_mesh(domain_tag: str) -> Mesh:
    """Coarse triangulation of one of the three benchmark domains.

    unit_square:    2 triangles on (0,1)^2,
    l_shape:        6 triangles (one split per unit square cell),
    cracked_square: 8 triangles on (-1,1)^2 with the segment (0,1) x {0}
                    duplicated so the two sides of the slit are detached.

    Every cell is split by its lower-right -> upper-left diagonal.
    """
    if domain_tag == "unit_square":
        pts = {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}
        vertices = np.zeros((4, 2))
        for (x, y), i in pts.items():
            vertices[i] = (x, y)
        elements = _square_cells([(0, 0)], pts)
        return _build_topology(vertices, elements, 0, domain_tag)

    if domain_tag == "l_shape":
        lattice = [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1), (0, 2), (1, 2)]
        pts = {p: i for i, p in enumerate(lattice)}
        vertices = np.array(lattice, dtype=float)
        elements = _square_cells([(0, 0), (1, 0), (0, 1)], pts)
        return _build_topology(vertices, elements, 0, domain_tag)

    if domain_tag == "cracked_square":
        lattice = [
            (-1, -1), (0, -1), (1, -1),
            (-1, 0), (0, 0), (1, 0),
            (-1, 1), (0, 1), (1, 1),
        ]
        pts = {p: i for i, p in enumerate(lattice)}
        vertices = [np.array(p, dtype=float) for p in lattice]
        # Second copy of (1, 0) for the upper lip of the slit; the crack tip
        # (0, 0) stays single because the domain is connected around it.
        upper_10 = len(vertices)
        vertices.append(np.array((1.0, 0.0)))

        pts_lower = dict(pts)
        pts_upper = dict(pts)
        pts_upper[(1, 0)] = upper_10

        elements = []
        elements += _square_cells([(-1, -1), (0, -1)], pts_lower)
        elements += _square_cells([(-1, 0)], pts_upper)
        elements += _square_cells([(0, 0)], pts_upper)
        return _build_topology(np.array(vertices), elements, 0, domain_tag)

    raise MeshError(f"unknown domain tag {domain_tag!r}; expected one of {DOMAIN_TAGS}")


def refine_uniform(mesh: Mesh) -> Mesh:
    """Replace every triangle by four congruent children via edge midpoints.

    Midpoints are created per edge, so duplicated crack edges receive
    duplicated midpoints and the slit stays open.
    """
    nV = mesh.num_vertices
    mid_coords = 0.5 * (mesh.vertices[mesh.edges[:, 0]] + mesh.vertices[mesh.edges[:, 1]])
    vertices = np.vstack([mesh.vertices, mid_coords])

    elements = np.empty((4 * mesh.num_elements, 3), dtype=np.int64)
    for t in range(mesh.num_elements):
        v0, v1, v2 = mesh.elements[t]
        m01 = nV + mesh.element_edges[t, 0]
        m12 = nV + mesh.element_edges[t, 1]
        m20 = nV + mesh.element_edges[t, 2]
        elements[4 * t + 0] = (v0, m01, m20)
        elements[4 * t + 1] = (m01, v1, m12)
        elements[4 * t + 2] = (m20, m12, v2)
        elements[4 * t + 3] = (m01, m12, m20)

    return _build_topology(vertices, elements, mesh.level + 1, mesh.domain_tag)


def element_geometry(mesh: Mesh, t: int) -> ElementGeometry:
    """Geometry of one element: area, longest-edge diameter, centroid,
    edge lengths, and outward unit normals (local edge order)."""
    coords = mesh.element_coords(t)
    area = 0.5 * (
        (coords[1, 0] - coords[0, 0]) * (coords[2, 1] - coords[0, 1])
        - (coords[2, 0] - coords[0, 0]) * (coords[1, 1] - coords[0, 1])
    )
    if area <= 0:
        raise MeshError(f"element {t} has non-positive area {area}")
    tangents = np.roll(coords, -1, axis=0) - coords
    lengths = np.hypot(tangents[:, 0], tangents[:, 1])
    normals = np.column_stack([tangents[:, 1], -tangents[:, 0]]) / lengths[:, None]
    return ElementGeometry(
        area=float(area),
        diameter=float(lengths.max()),
        centroid=coords.mean(axis=0),
        edge_lengths=lengths,
        edge_normals=normals,
    )


def all_element_geometry(mesh: Mesh) -> list[ElementGeometry]:
    """Geometry of every element in one vectorized pass (same values as
    :func:`element_geometry` per element)."""
    coords = mesh.vertices[mesh.elements]  # (T, 3, 2)
    area = 0.5 * (
        (coords[:, 1, 0] - coords[:, 0, 0]) * (coords[:, 2, 1] - coords[:, 0, 1])
        - (coords[:, 2, 0] - coords[:, 0, 0]) * (coords[:, 1, 1] - coords[:, 0, 1])
    )
    if np.any(area <= 0):
        bad = int(np.flatnonzero(area <= 0)[0])
        raise MeshError(f"element {bad} has non-positive area {area[bad]}")
    tangents = np.roll(coords, -1, axis=1) - coords  # (T, 3, 2)
    lengths = np.hypot(tangents[:, :, 0], tangents[:, :, 1])
    normals = np.stack([tangents[:, :, 1], -tangents[:, :, 0]], axis=-1) / lengths[..., None]
    diameters = lengths.max(axis=1)
    centroids = coords.mean(axis=1)
    return [
        ElementGeometry(
            area=float(area[t]),
            diameter=float(diameters[t]),
            centroid=centroids[t],
            edge_lengths=lengths[t],
            edge_normals=normals[t],
        )
        for t in range(len(coords))
    ]


def _beta_at(beta, x: float, y: float, cx: float, cy: float):
    """Evaluate a convection field at one point, resolving piecewise fields
    by the branch containing (cx, cy)."""
    branch = beta.branch_at(cx, cy) if hasattr(beta, "branch_at") else beta
    bx, by = branch(np.array([x]), np.array([y]))
    return float(np.asarray(bx).ravel()[0]), float(np.asarray(by).ravel()[0])


def classify_boundary(mesh: Mesh, beta) -> BoundaryClassification:
    """Split boundary edges into inflow (beta . n < -eps at the midpoint)
    and outflow.  Characteristic edges (|beta . n| <= eps) count as outflow
    so their trace unknowns are constrained.

    ``beta`` is a callable (x, y) -> (bx, by); piecewise fields are
    resolved using the incident element's centroid.
    """
    E = mesh.num_edges
    outward = np.full((E, 2), np.nan)
    beta_n = np.full(E, np.nan)
    inflow = []
    outflow = []

    for e in mesh.boundary_edges:
        t = int(mesh.edge_elems[e, 0])
        geom = element_geometry(mesh, t)
        local = int(np.flatnonzero(mesh.element_edges[t] == e)[0])
        n = geom.edge_normals[local]
        a, b = mesh.edges[e]
        mid = 0.5 * (mesh.vertices[a] + mesh.vertices[b])
        bx, by = _beta_at(beta, mid[0], mid[1], geom.centroid[0], geom.centroid[1])
        bn = bx * n[0] + by * n[1]
        outward[e] = n
        beta_n[e] = bn
        if bn < -CLASSIFY_EPS:
            inflow.append(int(e))
        else:
            outflow.append(int(e))

    return BoundaryClassification(
        inflow_edges=np.array(sorted(inflow), dtype=np.int64),
        outflow_edges=np.array(sorted(outflow), dtype=np.int64),
        outward_normal=outward,
        beta_dot_n=beta_n,
    )


def dump_mesh(mesh: Mesh, path, classification: BoundaryClassification | None = None) -> None:
    """Write the mesh as plain text: vertex, element, and edge sections.

    Edge lines read ``index v0 v1 leftElem rightElemOrMarker`` where the
    marker is INFLOW/OUTFLOW when a classification is given and BOUNDARY
    otherwise.
    """
    lines = ["# vertices: index x y"]
    for i, (x, y) in enumerate(mesh.vertices):
        lines.append(f"{i} {x!r} {y!r}")
    lines.append("# elements: index v0 v1 v2")
    for t, (v0, v1, v2) in enumerate(mesh.elements):
        lines.append(f"{t} {v0} {v1} {v2}")
    lines.append("# edges: index v0 v1 leftElem rightElemOrMarker")
    for e, (a, b) in enumerate(mesh.edges):
        left, right = mesh.edge_elems[e]
        if right >= 0:
            tail = str(right)
        elif classification is None:
            tail = "BOUNDARY"
        else:
            tail = "INFLOW" if classification.is_inflow[e] else "OUTFLOW"
        lines.append(f"{e} {a} {b} {left} {tail}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def domain_area(domain_tag: str) -> float:
    """Exact measure of a benchmark domain."""
    return {"unit_square": 1.0, "l_shape": 3.0, "cracked_square": 4.0}[domain_tag]
