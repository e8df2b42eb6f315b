"""Structured two-subdomain triangulations sharing a horizontal interface.

The unit square is divided at ``y = split_y`` into a lower "fluid" rectangle
and an upper "solid" rectangle.  Both rectangles are meshed by the same
uniform grid of squares with spacing ``1/nx``, each square cut into two right
triangles, so the submeshes are conforming along the dividing line and share
its vertices.  Boundary edges carry one tag each: the bottom of the fluid
side and the top of the solid side are Dirichlet, the lateral sides are
Neumann, and the dividing line is tagged ``interface``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

TAG_DIRICHLET_F = "dirichlet_f"
TAG_NEUMANN_F = "neumann_f"
TAG_DIRICHLET_S = "dirichlet_s"
TAG_NEUMANN_S = "neumann_s"
TAG_INTERFACE = "interface"


@dataclass(frozen=True)
class TwoDomainMesh:
    """Conforming triangulation of the split unit square.

    ``boundary_edges[i]`` is a vertex pair and ``boundary_tags[i]`` its tag;
    interface edges are listed exactly once.  ``interface_nodes`` holds the
    vertex indices on the dividing line ordered by increasing x.
    """

    vertices: np.ndarray
    triangles_f: np.ndarray
    triangles_s: np.ndarray
    boundary_edges: np.ndarray
    boundary_tags: tuple
    interface_nodes: np.ndarray
    split_y: float
    nx: int
    diagonal: str = "criss"


def build_two_domain_mesh(nx, split_y, diagonal="criss"):
    """Build the two-subdomain mesh with nx cells per unit length.

    Parameters
    ----------
    nx : int
        Number of grid cells along each axis of the unit square (h = 1/nx).
    split_y : float
        Height of the dividing line; nx * split_y must be an integer so the
        line coincides with a grid row.
    diagonal : str
        "criss" cuts every square along the same diagonal.  "alternating"
        flips the diagonal on a checkerboard pattern, which makes the
        triangulation invariant under the reflection x -> 1 - x when nx is
        even (useful for symmetry checks); the default matches the uniform
        layout used by the convergence studies.

    Returns
    -------
    TwoDomainMesh
    """
    if int(nx) != nx or nx < 2:
        raise ConfigurationError(f"nx must be an integer >= 2, got {nx!r}")
    nx = int(nx)
    if not 0.0 < split_y < 1.0:
        raise ConfigurationError(f"split_y must lie strictly inside (0, 1), got {split_y}")
    rows_f = split_y * nx
    if abs(rows_f - round(rows_f)) > 1e-9 * nx:
        raise ConfigurationError(
            f"split_y={split_y} does not fall on a grid line for nx={nx}"
        )
    rows_f = int(round(rows_f))
    if rows_f == 0 or rows_f == nx:
        raise ConfigurationError("each subdomain needs at least one cell row")
    if diagonal not in ("criss", "alternating"):
        raise ConfigurationError(f"unknown diagonal style {diagonal!r}")

    h = 1.0 / nx
    xs = np.arange(nx + 1) * h
    ys = np.arange(nx + 1) * h
    xg, yg = np.meshgrid(xs, ys)  # yg[iy, ix]
    vertices = np.column_stack([xg.ravel(), yg.ravel()])

    def vid(ix, iy):
        return iy * (nx + 1) + ix

    tris_f, tris_s = [], []
    for iy in range(nx):
        for ix in range(nx):
            v00 = vid(ix, iy)
            v10 = vid(ix + 1, iy)
            v01 = vid(ix, iy + 1)
            v11 = vid(ix + 1, iy + 1)
            if diagonal == "criss" or (ix + iy) % 2 == 0:
                pair = [(v00, v10, v11), (v00, v11, v01)]
            else:
                pair = [(v00, v10, v01), (v10, v11, v01)]
            target = tris_f if iy < rows_f else tris_s
            target.extend(pair)
    triangles_f = np.asarray(tris_f, dtype=np.int64)
    triangles_s = np.asarray(tris_s, dtype=np.int64)

    edges = []
    tags = []
    for ix in range(nx):  # bottom, top
        edges.append((vid(ix, 0), vid(ix + 1, 0)))
        tags.append(TAG_DIRICHLET_F)
        edges.append((vid(ix, nx), vid(ix + 1, nx)))
        tags.append(TAG_DIRICHLET_S)
    for iy in range(nx):  # lateral sides, tagged per subdomain
        side = TAG_NEUMANN_F if iy < rows_f else TAG_NEUMANN_S
        edges.append((vid(0, iy), vid(0, iy + 1)))
        tags.append(side)
        edges.append((vid(nx, iy), vid(nx, iy + 1)))
        tags.append(side)
    for ix in range(nx):
        edges.append((vid(ix, rows_f), vid(ix + 1, rows_f)))
        tags.append(TAG_INTERFACE)

    interface_nodes = np.array([vid(ix, rows_f) for ix in range(nx + 1)], dtype=np.int64)

    return TwoDomainMesh(
        vertices=vertices,
        triangles_f=triangles_f,
        triangles_s=triangles_s,
        boundary_edges=np.asarray(edges, dtype=np.int64),
        boundary_tags=tuple(tags),
        interface_nodes=interface_nodes,
        split_y=float(split_y),
        nx=nx,
        diagonal=diagonal,
    )


def triangle_areas(vertices, triangles):
    """Signed areas of the given triangles (positive for ccw orientation)."""
    p0 = vertices[triangles[:, 0]]
    d1 = vertices[triangles[:, 1]] - p0
    d2 = vertices[triangles[:, 2]] - p0
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def interface_edges(mesh):
    """Interface segments as (node_a, node_b, length), ordered by x."""
    nodes = mesh.interface_nodes
    xs = mesh.vertices[nodes, 0]
    out = []
    for a, b, xa, xb in zip(nodes[:-1], nodes[1:], xs[:-1], xs[1:]):
        out.append((int(a), int(b), float(xb - xa)))
    return out


def mesh_to_text(mesh):
    """Plain-text dump (one record per line) for debugging.

    Records: ``v i x y`` vertices, ``tf a b c`` / ``ts a b c`` fluid/solid
    triangles, ``e a b tag`` tagged boundary and interface edges.
    """
    lines = [f"# two-domain mesh nx={mesh.nx} split_y={mesh.split_y!r} diagonal={mesh.diagonal}"]
    for i, (x, y) in enumerate(mesh.vertices):
        lines.append(f"v {i} {float(x)!r} {float(y)!r}")
    for a, b, c in mesh.triangles_f:
        lines.append(f"tf {a} {b} {c}")
    for a, b, c in mesh.triangles_s:
        lines.append(f"ts {a} {b} {c}")
    for (a, b), tag in zip(mesh.boundary_edges, mesh.boundary_tags):
        lines.append(f"e {a} {b} {tag}")
    return "\n".join(lines) + "\n"
