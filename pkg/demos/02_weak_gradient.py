"""The discrete weak gradient in action.

A weak function pairs an interior polynomial with independent edge traces;
its weak gradient is the degree k-1 vector polynomial defined by testing
the integration-by-parts identity.  Three checks below: a pure trace
function, consistency for a genuine H1 function, and the commutation of
the weak gradient with L2 projection.

Run:  PYTHONPATH=src python3 demos/02_weak_gradient.py
"""

import numpy as np

from pdwg.mesh import build_coarse_mesh, refine_uniform
from pdwg.poly import project_element
from pdwg.weakspace import commutativity_check, weak_gradient_local

mesh = build_coarse_mesh("unit_square")
t = next(
    t for t in range(mesh.num_elements)
    if any(np.allclose(v, (0.0, 0.0)) for v in mesh.element_coords(t))
)
coords = mesh.element_coords(t)
print("element:", coords.tolist())

# v0 = 0 with unit trace on the hypotenuse only: the weak gradient is
# |e| <n> / |T| = (2, 2) on this right triangle.
G = weak_gradient_local(mesh, t, k=1, j=1)
local = np.zeros(9)
for i in range(3):
    a, b = coords[i], coords[(i + 1) % 3]
    on_axis = (abs(a[0]) < 1e-14 and abs(b[0]) < 1e-14) or (
        abs(a[1]) < 1e-14 and abs(b[1]) < 1e-14
    )
    if not on_axis:
        local[3 + 2 * i] = 1.0
print("grad_w of the hypotenuse-trace function:", (G @ local)[:, 0])

# An H1 function represented weakly (trace matches interior) recovers its
# classical gradient: v = x gives (1, 0).
lam0 = project_element(lambda x, y: x, 1, coords)
local = np.zeros(9)
local[:3] = lam0
for i in range(3):
    a_id, b_id = mesh.elements[t][i], mesh.elements[t][(i + 1) % 3]
    lo, hi = sorted((a_id, b_id))
    mid = 0.5 * (mesh.vertices[lo] + mesh.vertices[hi])
    half = 0.5 * (mesh.vertices[hi] - mesh.vertices[lo])
    local[3 + 2 * i : 5 + 2 * i] = (mid[0], half[0])
print("grad_w of v = x with matching trace:   ", (G @ local)[:, 0])

# Projecting into the weak space commutes with the weak gradient.
mesh3 = build_coarse_mesh("unit_square")
for _ in range(3):
    mesh3 = refine_uniform(mesh3)
res = commutativity_check(
    lambda x, y: np.sin(x) * np.cos(y),
    lambda x, y: (np.cos(x) * np.cos(y), -np.sin(x) * np.sin(y)),
    mesh3, k=1, j=1, quad_degree=8,
)
print(f"commutation residual for sin(x)cos(y) at level 3: {res:.2e}")
