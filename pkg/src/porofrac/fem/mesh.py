"""Quadrilateral meshes with globally oriented edges."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, ElementQualityError

# Local edge k of an element runs from local node k to local node k+1.
LOCAL_EDGES = ((0, 1), (1, 2), (2, 3), (3, 0))


@dataclass(frozen=True)
class Mesh:
    """Bilinear quadrilateral mesh.

    ``edge_sign[e, k]`` is +1 when the outward normal of local edge ``k`` of
    element ``e`` coincides with the global normal of that edge, else -1.
    The global normal of an edge is the outward normal of the first element
    that references it, so boundary edges always carry +1 and a flux dof on
    a boundary edge is the outward flux.
    """

    nodes: np.ndarray                  # (Nn, 2) coordinates in m
    elements: np.ndarray               # (Ne, 4) counter-clockwise
    edges: np.ndarray                  # (Ned, 2) node pairs
    element_edges: np.ndarray          # (Ne, 4) global edge ids
    edge_sign: np.ndarray              # (Ne, 4)
    h_e: np.ndarray                    # (Ne,) characteristic length sqrt(area)
    node_tags: dict = field(default_factory=dict)
    edge_tags: dict = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def boundary_edges(self) -> np.ndarray:
        return self.edge_tags["boundary"]

    def edge_length(self, edge_ids=None) -> np.ndarray:
        e = self.edges if edge_ids is None else self.edges[edge_ids]
        return np.linalg.norm(self.nodes[e[:, 1]] - self.nodes[e[:, 0]], axis=1)

    def edge_midpoints(self, edge_ids=None) -> np.ndarray:
        e = self.edges if edge_ids is None else self.edges[edge_ids]
        return 0.5 * (self.nodes[e[:, 0]] + self.nodes[e[:, 1]])

    def element_centers(self) -> np.ndarray:
        return self.nodes[self.elements].mean(axis=1)

    def edge_owners(self) -> np.ndarray:
        """``(Ned, 2)`` owning elements; -1 marks a missing neighbour."""
        owners = np.full((self.n_edges, 2), -1, dtype=int)
        for e, row in enumerate(self.element_edges):
            for k, g in enumerate(row):
                owners[g, 0 if self.edge_sign[e, k] > 0 else 1] = e
        return owners

    def tag_nodes(self, name, mask) -> None:
        """Add a node tag and the matching edge tag (both end nodes tagged)."""
        ids = np.flatnonzero(mask)
        self.node_tags[name] = ids
        inside = np.zeros(self.n_nodes, dtype=bool)
        inside[ids] = True
        both = inside[self.edges[:, 0]] & inside[self.edges[:, 1]]
        outer = np.setdiff1d(self.boundary_edges, self.edge_tags.get("cut", ()))
        self.edge_tags[name] = np.intersect1d(np.flatnonzero(both), outer)

    @classmethod
    def from_arrays(cls, nodes, elements, cut_edges=()) -> "Mesh":
        """Build edges and orientation signs from connectivity.

        ``cut_edges`` lists node pairs whose edge is split into one flux
        edge per adjacent element.  Each copy is a boundary edge of the flux
        space (tagged ``cut``) while nodes stay shared, so displacement and
        phase field remain continuous across it.
        """
        nodes = np.asarray(nodes, dtype=float)
        elements = np.asarray(elements, dtype=int)
        if nodes.ndim != 2 or nodes.shape[1] != 2 or len(nodes) == 0:
            raise ConfigError("nodes must be a non-empty (N, 2) array")
        if elements.ndim != 2 or elements.shape[1] != 4 or len(elements) == 0:
            raise ConfigError("elements must be a non-empty (E, 4) array")
        if elements.min() < 0 or elements.max() >= len(nodes):
            raise ConfigError("element connectivity references missing nodes")

        cut = {(min(a, b), max(a, b)) for a, b in cut_edges}
        lookup = {}
        edges = []
        cut_ids = []
        element_edges = np.empty_like(elements)
        edge_sign = np.empty(elements.shape, dtype=float)
        for e, conn in enumerate(elements):
            for k, (a, b) in enumerate(LOCAL_EDGES):
                na, nb = int(conn[a]), int(conn[b])
                key = (min(na, nb), max(na, nb))
                if key in lookup and key in cut:
                    g = len(edges)
                    edges.append([na, nb, 1])
                    cut_ids += [lookup[key], g]
                    edge_sign[e, k] = 1.0
                elif key in lookup:
                    g = lookup[key]
                    if edges[g][2] >= 2:
                        raise ConfigError(f"edge {key} shared by more than two elements")
                    edges[g][2] += 1
                    edge_sign[e, k] = -1.0
                else:
                    g = lookup[key] = len(edges)
                    edges.append([na, nb, 1])
                    edge_sign[e, k] = 1.0
                element_edges[e, k] = g
        edges = np.asarray(edges, dtype=int)
        counts = edges[:, 2]
        edges = edges[:, :2]

        xy = nodes[elements]
        x, y = xy[..., 0], xy[..., 1]
        area = 0.5 * np.sum(x * np.roll(y, -1, axis=1) - np.roll(x, -1, axis=1) * y, axis=1)
        if len(cut_ids) != 2 * len(cut):
            raise ConfigError("cut edges must be interior edges of the mesh")
        mesh = cls(nodes, elements, edges, element_edges, edge_sign,
                   np.sqrt(np.abs(area)), {},
                   {"boundary": np.flatnonzero(counts == 1), "cut": np.sort(cut_ids)})
        check_jacobians(mesh)
        return mesh


def check_jacobians(mesh) -> None:
    """Raise if any element Jacobian is non-positive at a Gauss point."""
    from .elements import GAUSS_POINTS, jacobian

    xy = mesh.nodes[mesh.elements]
    for xi in GAUSS_POINTS:
        det = np.linalg.det(jacobian(xy, xi))
        bad = np.flatnonzero(det <= 0.0)
        if bad.size:
            raise ElementQualityError(
                f"non-positive Jacobian in element {int(bad[0])} (det={det[bad[0]]:.3e})")


def graded_coordinates(breaks, sizes):
    """Piecewise-uniform 1D node coordinates.

    ``breaks`` are increasing interval end points (all of them become
    nodes) and ``sizes[i]`` is the largest cell size allowed on
    ``[breaks[i], breaks[i+1]]``.
    """
    breaks = np.asarray(breaks, dtype=float)
    sizes = np.broadcast_to(np.asarray(sizes, dtype=float), (len(breaks) - 1,))
    if len(breaks) < 2 or np.any(np.diff(breaks) <= 0.0):
        raise ConfigError("breaks must be strictly increasing")
    if np.any(sizes <= 0.0):
        raise ConfigError("cell sizes must be positive")
    pieces = [breaks[:1]]
    for lo, hi, h in zip(breaks[:-1], breaks[1:], sizes):
        cells = max(1, int(np.ceil((hi - lo) / h - 1e-9)))
        pieces.append(np.linspace(lo, hi, cells + 1)[1:])
    return np.concatenate(pieces)


def structured_mesh(xs, ys, cut=None) -> Mesh:
    """Tensor-product mesh from sorted 1D coordinate arrays.

    Tags ``left``, ``right``, ``bottom`` and ``top`` are set on nodes and
    outer boundary edges.  ``cut(a, b)`` may select interior edges (by end
    point coordinates) to split in the flux space, see
    :meth:`Mesh.from_arrays`.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 2 or len(ys) < 2 or np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
        raise ConfigError("coordinate arrays must be strictly increasing")
    nx, ny = len(xs) - 1, len(ys) - 1
    X, Y = np.meshgrid(xs, ys)
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    j, i = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")
    n0 = (j * (nx + 1) + i).ravel()
    elements = np.column_stack([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1])
    cut_edges = []
    if cut is not None:
        for conn in elements:
            for a, b in LOCAL_EDGES[:2]:
                na, nb = conn[a], conn[b]
                if cut(nodes[na], nodes[nb]):
                    cut_edges.append((na, nb))
    mesh = Mesh.from_arrays(nodes, elements, cut_edges)
    tol = 1e-9 * max(xs[-1] - xs[0], ys[-1] - ys[0])
    mesh.tag_nodes("left", np.abs(nodes[:, 0] - xs[0]) < tol)
    mesh.tag_nodes("right", np.abs(nodes[:, 0] - xs[-1]) < tol)
    mesh.tag_nodes("bottom", np.abs(nodes[:, 1] - ys[0]) < tol)
    mesh.tag_nodes("top", np.abs(nodes[:, 1] - ys[-1]) < tol)
    return mesh
