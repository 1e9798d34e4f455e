"""Unstructured triangular meshes with cached finite-volume geometry.

Bathymetry lives at the vertices and is treated as continuous piecewise
linear: edge-midpoint values are the mean of the two endpoint values and the
cell-center value is the mean of the three midpoint values.

Local edge ``k`` of a cell joins its vertices ``k`` and ``(k + 1) % 3``.
Every edge stores a unit normal pointing out of its *left* cell (the lower
cell index); per-cell normals are stored inward, so the inward normal of the
right cell is bitwise equal to the edge normal and the inward normal of the
left cell is its exact negation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .constants import TAG_CODES, TAG_NAMES, WALL
from .errors import MeshError, MeshParseError

__all__ = [
    "Mesh",
    "Vertex",
    "Edge",
    "Cell",
    "build_mesh",
    "generate_rect_mesh",
    "grid_for_area",
    "load_mesh",
    "read_mesh",
    "save_mesh",
    "bottom_at_midpoints",
]

SIDES = ("west", "east", "south", "north")


@dataclass(frozen=True)
class Vertex:
    id: int
    x: float
    y: float
    b: float


@dataclass(frozen=True)
class Edge:
    id: int
    v0: int
    v1: int
    left_cell: int
    right_cell: int  # -1 on the boundary
    tag: str | None
    length: float
    midpoint: tuple[float, float]
    b_mid: float


@dataclass(frozen=True)
class Cell:
    id: int
    vertices: tuple[int, int, int]
    edges: tuple[int, int, int]
    neighbors: tuple[int, int, int]  # -1 across a boundary edge
    area: float
    centroid: tuple[float, float]
    inward_normals: np.ndarray
    b_center: float
    b_grad: tuple[float, float]


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable triangular mesh; all arrays are read-only after construction.

    Attributes
    ----------
    points : (nv, 2) vertex coordinates.
    bottom : (nv,) vertex bed elevation.
    triangles : (nc, 3) counter-clockwise vertex indices.
    edge_vertices, edge_cells : (ne, 2) endpoints and (left, right) cells;
        right is -1 on the boundary.
    edge_tags : (ne,) boundary tag code, -1 for interior edges.
    edge_normal : (ne, 2) unit normal pointing out of the left cell.
    edge_local : (ne, 2) slot of the edge in its left / right cell (-1 if none).
    cell_edges, cell_neighbors : (nc, 3) per local edge.
    cell_side : (nc, 3) 0 if the cell is the edge's left cell, 1 if right.
    cell_normals : (nc, 3, 2) inward unit normals.
    vinterp_ptr, vinterp_idx, vinterp_wts : CSR weights mapping cell averages
        to vertex values (linear-exact least squares).
    vcell_ptr, vcell_idx : CSR list of the cells around each vertex.
    """

    points: np.ndarray
    bottom: np.ndarray
    triangles: np.ndarray
    edge_vertices: np.ndarray
    edge_cells: np.ndarray
    edge_tags: np.ndarray
    edge_length: np.ndarray
    edge_midpoint: np.ndarray
    edge_normal: np.ndarray
    edge_bottom: np.ndarray
    edge_local: np.ndarray
    cell_edges: np.ndarray
    cell_neighbors: np.ndarray
    cell_side: np.ndarray
    cell_normals: np.ndarray
    cell_area: np.ndarray
    cell_centroid: np.ndarray
    cell_perimeter: np.ndarray
    cell_bottom: np.ndarray
    cell_bottom_grad: np.ndarray
    vinterp_ptr: np.ndarray
    vinterp_idx: np.ndarray
    vinterp_wts: np.ndarray
    vcell_ptr: np.ndarray
    vcell_idx: np.ndarray

    @property
    def n_vertices(self) -> int:
        return len(self.points)

    @property
    def n_cells(self) -> int:
        return len(self.triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edge_vertices)

    @property
    def cell_inradius(self) -> np.ndarray:
        return 2.0 * self.cell_area / self.cell_perimeter

    @property
    def boundary_edges(self) -> np.ndarray:
        return np.flatnonzero(self.edge_cells[:, 1] < 0)

    @property
    def boundary_tags(self) -> dict[int, str]:
        return {int(e): TAG_NAMES[int(self.edge_tags[e])] for e in self.boundary_edges}

    @property
    def total_area(self) -> float:
        return float(self.cell_area.sum())

    def vertex(self, i: int) -> Vertex:
        x, y = self.points[i]
        return Vertex(int(i), float(x), float(y), float(self.bottom[i]))

    def edge(self, e: int) -> Edge:
        tag = int(self.edge_tags[e])
        return Edge(
            id=int(e),
            v0=int(self.edge_vertices[e, 0]),
            v1=int(self.edge_vertices[e, 1]),
            left_cell=int(self.edge_cells[e, 0]),
            right_cell=int(self.edge_cells[e, 1]),
            tag=TAG_NAMES[tag] if tag >= 0 else None,
            length=float(self.edge_length[e]),
            midpoint=tuple(self.edge_midpoint[e]),
            b_mid=float(self.edge_bottom[e]),
        )

    def cell(self, j: int) -> Cell:
        return Cell(
            id=int(j),
            vertices=tuple(int(v) for v in self.triangles[j]),
            edges=tuple(int(e) for e in self.cell_edges[j]),
            neighbors=tuple(int(c) for c in self.cell_neighbors[j]),
            area=float(self.cell_area[j]),
            centroid=tuple(self.cell_centroid[j]),
            inward_normals=self.cell_normals[j].copy(),
            b_center=float(self.cell_bottom[j]),
            b_grad=tuple(self.cell_bottom_grad[j]),
        )

    def edges_with_tag(self, tag: int) -> np.ndarray:
        return np.flatnonzero(self.edge_tags == tag)

    def with_tags(self, tags: Mapping[tuple[int, int], str]) -> "Mesh":
        """Return a copy with boundary tags overridden by vertex pair."""
        return build_mesh(self.points, self.bottom, self.triangles, tags=_merge_tags(self, tags))


def _merge_tags(mesh: Mesh, tags):
    merged = {}
    for e in mesh.boundary_edges:
        a, b = mesh.edge_vertices[e]
        merged[(int(a), int(b))] = TAG_NAMES[int(mesh.edge_tags[e])]
    for (a, b), tag in tags.items():
        merged[(int(a), int(b))] = tag
    return merged


def build_mesh(points, bottom, triangles, tags=None) -> Mesh:
    """Assemble topology and geometry caches from raw vertex/triangle arrays.

    ``tags`` maps an unordered vertex pair ``(a, b)`` to ``"WALL"`` or
    ``"OUTFLOW"``; untagged boundary edges are walls. Triangles given
    clockwise are reoriented.
    """
    points = np.array(points, dtype=float).reshape(-1, 2)
    bottom = np.array(bottom, dtype=float).reshape(-1)
    tri = np.array(triangles, dtype=np.int64).reshape(-1, 3)
    nv, nc = len(points), len(tri)
    if len(bottom) != nv:
        raise MeshError(f"bottom has {len(bottom)} values for {nv} vertices")
    if not (np.all(np.isfinite(points)) and np.all(np.isfinite(bottom))):
        raise MeshError("non-finite vertex coordinate or bottom value")
    if nc == 0:
        raise MeshError("mesh has no cells")
    if tri.min() < 0 or tri.max() >= nv:
        raise MeshError("triangle references a vertex index out of range")

    p0, p1, p2 = points[tri[:, 0]], points[tri[:, 1]], points[tri[:, 2]]
    cross = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0])
    flip = cross < 0
    tri[flip] = tri[flip][:, [0, 2, 1]]
    area = 0.5 * np.abs(cross)
    bad = np.flatnonzero(~(area > 0))
    if len(bad):
        raise MeshError(f"degenerate cell {int(bad[0])} (vertices {tri[bad[0]].tolist()}) has zero area")

    # edges keyed by sorted vertex pair
    a = tri.reshape(-1)
    b = tri[:, [1, 2, 0]].reshape(-1)
    key = np.minimum(a, b) * nv + np.maximum(a, b)
    order = np.argsort(key, kind="stable")
    uniq, first, inverse, counts = np.unique(key[order], return_index=True, return_inverse=True, return_counts=True)
    if np.any(counts > 2):
        e = int(np.flatnonzero(counts > 2)[0])
        raise MeshError(f"non-manifold edge {int(uniq[e] // nv)}-{int(uniq[e] % nv)} shared by {int(counts[e])} cells")
    ne = len(uniq)
    slot_edge = np.empty(3 * nc, dtype=np.int64)
    slot_edge[order] = inverse
    left_slot = order[first]
    second = first + 1
    has_right = counts == 2
    right_slot = np.full(ne, -1, dtype=np.int64)
    right_slot[has_right] = order[second[has_right]]
    # stable sort on slot index makes the left cell the lower cell index
    edge_cells = np.stack([left_slot // 3, np.where(has_right, right_slot // 3, -1)], axis=1)
    if np.any(edge_cells[has_right, 0] == edge_cells[has_right, 1]):
        raise MeshError("a cell references the same edge twice")

    va, vb = a[left_slot], b[left_slot]
    d = points[vb] - points[va]
    length = np.hypot(d[:, 0], d[:, 1])
    normal = np.stack([d[:, 1], -d[:, 0]], axis=1) / length[:, None]
    midpoint = 0.5 * (points[va] + points[vb])
    edge_bottom = 0.5 * (bottom[va] + bottom[vb])
    if has_right.any():
        ra, rb = a[right_slot[has_right]], b[right_slot[has_right]]
        if not (np.all(ra == vb[has_right]) and np.all(rb == va[has_right])):
            raise MeshError("inconsistent orientation across an interior edge")

    cell_edges = slot_edge.reshape(nc, 3)
    slots = np.arange(3 * nc).reshape(nc, 3)
    cell_side = (left_slot[cell_edges] != slots).astype(np.int64)
    other = np.where(cell_side == 0, edge_cells[cell_edges, 1], edge_cells[cell_edges, 0])
    cell_neighbors = other
    sign = np.where(cell_side == 0, -1.0, 1.0)
    cell_normals = normal[cell_edges] * sign[:, :, None]
    edge_local = np.full((ne, 2), -1, dtype=np.int64)
    edge_local[cell_edges.reshape(-1), cell_side.reshape(-1)] = np.tile(np.arange(3), nc)

    centroid = (p0 + p1 + p2) / 3.0
    perimeter = length[cell_edges].sum(axis=1)
    bm = edge_bottom[cell_edges]
    cell_bottom = (bm[:, 0] + bm[:, 1] + bm[:, 2]) / 3.0
    b0, b1, b2 = bottom[tri[:, 0]], bottom[tri[:, 1]], bottom[tri[:, 2]]
    q0, q1, q2 = points[tri[:, 0]], points[tri[:, 1]], points[tri[:, 2]]
    det = (q1[:, 0] - q0[:, 0]) * (q2[:, 1] - q0[:, 1]) - (q2[:, 0] - q0[:, 0]) * (q1[:, 1] - q0[:, 1])
    gx = ((b1 - b0) * (q2[:, 1] - q0[:, 1]) - (b2 - b0) * (q1[:, 1] - q0[:, 1])) / det
    gy = ((b2 - b0) * (q1[:, 0] - q0[:, 0]) - (b1 - b0) * (q2[:, 0] - q0[:, 0])) / det
    bottom_grad = np.stack([gx, gy], axis=1)

    edge_tags = np.full(ne, -1, dtype=np.int64)
    edge_tags[~has_right] = WALL
    edge_vertices = np.stack([va, vb], axis=1)
    if tags:
        lookup = {}
        for (ta, tb), name in tags.items():
            code = TAG_CODES.get(str(name).upper())
            if code is None:
                raise MeshError(f"unknown boundary tag {name!r}")
            lookup[(min(int(ta), int(tb)), max(int(ta), int(tb)))] = code
        for e in np.flatnonzero(~has_right):
            k = (int(min(va[e], vb[e])), int(max(va[e], vb[e])))
            if k in lookup:
                edge_tags[e] = lookup.pop(k)
        if lookup:
            (ta, tb), _ = next(iter(lookup.items()))
            raise MeshError(f"tagged pair {ta}-{tb} is not a boundary edge")

    vptr, vidx, vwts = _vertex_interpolation(points, tri, centroid, cell_neighbors)
    cptr, cidx = _vertex_cells(nv, tri)

    arrays = dict(
        points=points, bottom=bottom, triangles=tri,
        edge_vertices=edge_vertices, edge_cells=edge_cells, edge_tags=edge_tags,
        edge_length=length, edge_midpoint=midpoint, edge_normal=normal, edge_bottom=edge_bottom, edge_local=edge_local,
        cell_edges=cell_edges, cell_neighbors=cell_neighbors, cell_side=cell_side,
        cell_normals=cell_normals, cell_area=area, cell_centroid=centroid,
        cell_perimeter=perimeter, cell_bottom=cell_bottom, cell_bottom_grad=bottom_grad,
        vinterp_ptr=vptr, vinterp_idx=vidx, vinterp_wts=vwts,
        vcell_ptr=cptr, vcell_idx=cidx,
    )
    for arr in arrays.values():
        arr.flags.writeable = False
    return Mesh(**arrays)


def _vertex_cells(nv, tri):
    flat = tri.reshape(-1)
    order = np.argsort(flat, kind="stable")
    ptr = np.zeros(nv + 1, dtype=np.int64)
    np.add.at(ptr, flat + 1, 1)
    return np.cumsum(ptr), order // 3


def _vertex_interpolation(points, tri, centroid, neighbors):
    """Least-squares linear fit of cell averages around each vertex.

    The stencil is the ring of cells touching the vertex, grown by edge
    neighbours until three non-collinear centroids are available. Weights
    reproduce any linear field exactly; a vertex whose stencil cannot be made
    non-degenerate falls back to inverse-distance averaging.
    """
    nv = len(points)
    vptr, vcells = _vertex_cells(nv, tri)
    ptr = [0]
    idx: list[np.ndarray] = []
    wts: list[np.ndarray] = []
    for v in range(nv):
        base = vcells[vptr[v]:vptr[v + 1]]
        cells = base
        w = None
        for _ in range(4):
            w = _ls_weights(points[v], centroid[cells])
            if w is not None:
                break
            grown = np.unique(np.concatenate([cells, neighbors[cells].reshape(-1)]))
            grown = grown[grown >= 0]
            if len(grown) == len(cells):
                break
            cells = grown
        if w is None:
            cells = base
            dist = np.hypot(*(centroid[cells] - points[v]).T)
            w = (1.0 / dist) / np.sum(1.0 / dist)
        idx.append(cells)
        wts.append(w)
        ptr.append(ptr[-1] + len(cells))
    return np.asarray(ptr, dtype=np.int64), np.concatenate(idx).astype(np.int64), np.concatenate(wts)


def _ls_weights(x0, pts):
    if len(pts) < 3:
        return None
    d = pts - x0
    dist = np.hypot(d[:, 0], d[:, 1])
    scale = dist.mean()
    A = np.column_stack([np.ones(len(pts)), d / scale])
    sw = 1.0 / np.sqrt(dist / scale)
    As = A * sw[:, None]
    s = np.linalg.svd(As, compute_uv=False)
    if s[-1] < 1e-8 * s[0]:
        return None
    # first row of the weighted pseudo-inverse gives the value at x0
    return (np.linalg.pinv(As)[0] * sw)


def generate_rect_mesh(
    Lx: float,
    Ly: float,
    nx: int,
    ny: int,
    bottom: Callable | float = 0.0,
    boundary: Mapping[str, str] | None = None,
) -> Mesh:
    """Structured triangulation of ``[0, Lx] x [0, Ly]``.

    Each of the ``nx * ny`` rectangles is split along one diagonal, the
    direction alternating in a checkerboard. ``bottom`` is a vectorised
    ``f(x, y)`` or a constant. ``boundary`` maps a side name (west, east,
    south, north) to a tag; sides not listed are walls.
    """
    if not (Lx > 0 and Ly > 0):
        raise MeshError(f"domain dimensions must be positive, got {Lx} x {Ly}")
    if int(nx) < 1 or int(ny) < 1:
        raise MeshError(f"need nx, ny >= 1, got {nx}, {ny}")
    nx, ny = int(nx), int(ny)
    xs = np.linspace(0.0, Lx, nx + 1)
    ys = np.linspace(0.0, Ly, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    points = np.column_stack([X.ravel(), Y.ravel()])
    if callable(bottom):
        b = np.broadcast_to(np.asarray(bottom(points[:, 0], points[:, 1]), dtype=float), (len(points),)).copy()
    else:
        b = np.full(len(points), float(bottom))

    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    i, j = i.ravel(), j.ravel()
    v00 = j * (nx + 1) + i
    v10, v01, v11 = v00 + 1, v00 + nx + 1, v00 + nx + 2
    even = (i + j) % 2 == 0
    t1 = np.where(even[:, None], np.stack([v00, v10, v11], 1), np.stack([v00, v10, v01], 1))
    t2 = np.where(even[:, None], np.stack([v00, v11, v01], 1), np.stack([v10, v11, v01], 1))
    tri = np.stack([t1, t2], axis=1).reshape(-1, 3)

    tags = {}
    for side, tag in (boundary or {}).items():
        if side not in SIDES:
            raise MeshError(f"unknown side {side!r}; expected one of {SIDES}")
        if side == "south":
            vs = np.arange(nx + 1)
        elif side == "north":
            vs = ny * (nx + 1) + np.arange(nx + 1)
        elif side == "west":
            vs = np.arange(ny + 1) * (nx + 1)
        else:
            vs = np.arange(ny + 1) * (nx + 1) + nx
        for va, vb in zip(vs[:-1], vs[1:]):
            tags[(int(va), int(vb))] = tag
    return build_mesh(points, b, tri, tags=tags)


def grid_for_area(Lx: float, Ly: float, area: float) -> tuple[int, int]:
    """Pick (nx, ny) with near-square rectangles and mean cell area close to ``area``."""
    n_rect = Lx * Ly / (2.0 * area)
    ny = max(1, int(round(np.sqrt(n_rect * Ly / Lx))))
    nx = max(1, int(round(n_rect / ny)))
    return nx, ny


def bottom_at_midpoints(mesh: Mesh, cell: int) -> np.ndarray:
    """Bed elevation at the three edge midpoints of ``cell`` (local edge order)."""
    t = mesh.triangles[cell]
    b = mesh.bottom[t]
    return np.array([(b[0] + b[1]) / 2, (b[1] + b[2]) / 2, (b[2] + b[0]) / 2])


# --- text format -------------------------------------------------------------

def _data_lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _parse_header(lines, ncols, what):
    try:
        lineno, tok = next(lines)
    except StopIteration:
        raise MeshParseError(f"empty {what} file") from None
    try:
        n, k = int(tok[0]), int(tok[1])
    except (ValueError, IndexError):
        raise MeshParseError(f"bad {what} header {' '.join(tok)!r}", lineno) from None
    if k != ncols or n < 0:
        raise MeshParseError(f"{what} header must read '<count> {ncols}'", lineno)
    return n


def load_mesh(node_text: str, ele_text: str, b_values=None, tags_text: str | None = None) -> Mesh:
    """Parse the ASCII node/element tables (and optional tag table).

    Node lines are ``id x y b``, element lines ``id v0 v1 v2``, indices
    0-based. ``b_values`` overrides the node-file elevations.
    """
    lines = _data_lines(node_text)
    n = _parse_header(lines, 2, "node")
    points = np.empty((n, 2))
    b = np.empty(n)
    seen = 0
    for lineno, tok in lines:
        if len(tok) != 4:
            raise MeshParseError("node line needs 'id x y b'", lineno)
        try:
            i, x, y, z = int(tok[0]), float(tok[1]), float(tok[2]), float(tok[3])
        except ValueError:
            raise MeshParseError(f"cannot parse node line {' '.join(tok)!r}", lineno) from None
        if not 0 <= i < n or i != seen:
            raise MeshParseError(f"node id {i} out of sequence (expected {seen})", lineno)
        points[i] = x, y
        b[i] = z
        seen += 1
    if seen != n:
        raise MeshParseError(f"node header promises {n} vertices, found {seen}")

    lines = _data_lines(ele_text)
    m = _parse_header(lines, 3, "element")
    tri = np.empty((m, 3), dtype=np.int64)
    seen = 0
    for lineno, tok in lines:
        if len(tok) != 4:
            raise MeshParseError("element line needs 'id v0 v1 v2'", lineno)
        try:
            vals = [int(t) for t in tok]
        except ValueError:
            raise MeshParseError(f"cannot parse element line {' '.join(tok)!r}", lineno) from None
        if vals[0] != seen:
            raise MeshParseError(f"element id {vals[0]} out of sequence (expected {seen})", lineno)
        for v in vals[1:]:
            if not 0 <= v < n:
                raise MeshParseError(f"element {vals[0]} references missing vertex {v}", lineno)
        tri[seen] = vals[1:]
        seen += 1
    if seen != m:
        raise MeshParseError(f"element header promises {m} triangles, found {seen}")
    for j, t in enumerate(tri):
        if len(set(t.tolist())) < 3:
            raise MeshError(f"degenerate cell {j} (vertices {t.tolist()}) has zero area")

    tags = {}
    if tags_text:
        for lineno, tok in _data_lines(tags_text):
            if len(tok) != 3:
                raise MeshParseError("tag line needs 'vertex_a vertex_b TAG'", lineno)
            try:
                va, vb = int(tok[0]), int(tok[1])
            except ValueError:
                raise MeshParseError(f"cannot parse tag line {' '.join(tok)!r}", lineno) from None
            if tok[2].upper() not in TAG_CODES:
                raise MeshParseError(f"unknown tag {tok[2]!r}", lineno)
            tags[(va, vb)] = tok[2].upper()
    if b_values is not None:
        b = np.asarray(b_values, dtype=float)
    return build_mesh(points, b, tri, tags=tags)


def read_mesh(node_path, ele_path, tags_path=None) -> Mesh:
    with open(node_path) as f:
        node_text = f.read()
    with open(ele_path) as f:
        ele_text = f.read()
    tags_text = None
    if tags_path is not None:
        with open(tags_path) as f:
            tags_text = f.read()
    return load_mesh(node_text, ele_text, tags_text=tags_text)


def save_mesh(mesh: Mesh, node_path, ele_path, tags_path=None) -> None:
    """Write ``mesh`` in the node/element text format (round-trips exactly)."""
    with open(node_path, "w") as f:
        f.write(f"{mesh.n_vertices} 2\n")
        for i, ((x, y), b) in enumerate(zip(mesh.points, mesh.bottom)):
            f.write(f"{i} {float(x)!r} {float(y)!r} {float(b)!r}\n")
    with open(ele_path, "w") as f:
        f.write(f"{mesh.n_cells} 3\n")
        for j, (a, b, c) in enumerate(mesh.triangles):
            f.write(f"{j} {a} {b} {c}\n")
    if tags_path is not None:
        with open(tags_path, "w") as f:
            for e in mesh.boundary_edges:
                a, b = mesh.edge_vertices[e]
                f.write(f"{a} {b} {TAG_NAMES[int(mesh.edge_tags[e])]}\n")
