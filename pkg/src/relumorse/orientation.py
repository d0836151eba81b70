"""Edge orientations from the restricted gradient, and PL vertex types.

Each edge of the 1-skeleton is oriented in the direction of increase of F.
The direction from a vertex v into an incident edge e is computed
analytically: stack the node-map rows of v's zero entries (on a top cell
containing e) into an n0 x n0 matrix W and solve

    W d = sign * e_k

where k indexes the single entry where e differs from v.  The sign of the
directional derivative is then sign(gradF . d) on the same top cell; it does
not depend on which containing top cell is used.

A vertex is PL critical iff every axis pair of incident edges points the
same way (both toward or both away from v); the index counts the
toward-pairs.  Regular vertices record their first flow-through axis, which
drives the lower-star pairing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complex import CanonicalComplex, Cell, VertexRecord, build_complex
from .errors import (
    ArchitectureError,
    FlatCellError,
    MissingEdgeError,
    SingularSystemError,
)
from .network import ReluNetwork, Signs, signs_to_str

_FLAT_TOL = 1e-9


@dataclass(frozen=True)
class EdgeOrientation:
    """Orientation of one edge relative to an anchor vertex.

    ``derivative_sign`` is +1 iff F increases leaving the anchor into the
    edge (the edge points away from the anchor).  ``direction`` is the unit
    vector from the anchor into the edge (direction of increase for
    anchor-free edges).
    """

    edge: Signs
    anchor: Signs | None
    derivative_sign: int
    direction: np.ndarray

    @property
    def away_from_anchor(self) -> bool:
        return self.derivative_sign > 0


@dataclass(frozen=True)
class VertexClassification:
    """PL type of one vertex.

    ``axes`` maps each zero position of the vertex to the pair
    (minus edge descends, plus edge descends).  Critical vertices have no
    flow-through axis; their index is the number of descending axes.
    Regular vertices store the first flow-through axis (position order) and
    the sign of its descending edge.
    """

    vertex: Signs
    kind: str  # "regular" | "critical"
    index: int | None
    axes: tuple  # ((position, desc_minus, desc_plus), ...)
    flow_axis: int | None
    flow_sign: int | None

    @property
    def descending_axes(self) -> tuple:
        return tuple(p for p, dm, dp in self.axes if dm and dp)

    def descends(self, position: int, sigma: int) -> bool:
        for p, dm, dp in self.axes:
            if p == position:
                return dm if sigma < 0 else dp
        raise KeyError(position)


def _resolve(cpx: CanonicalComplex, vertex, edge):
    v = vertex if isinstance(vertex, VertexRecord) else cpx.vertices[tuple(vertex)]
    e = edge if isinstance(edge, Cell) else cpx.cells[tuple(edge)]
    return v, e


def _all_plus_completion(signs: Signs) -> Signs:
    return tuple(s if s != 0 else 1 for s in signs)


def _direction_into_edge(net: ReluNetwork, v_signs: Signs, e_signs: Signs, form_of):
    """Unit vector from the vertex into the edge, via the node-map system."""
    diff = [p for p in range(len(v_signs)) if e_signs[p] != v_signs[p]]
    if len(diff) != 1 or v_signs[diff[0]] != 0:
        raise MissingEdgeError(
            f"{signs_to_str(e_signs)} is not an incident edge of {signs_to_str(v_signs)}"
        )
    star_pos = diff[0]
    sigma = e_signs[star_pos]
    container = _all_plus_completion(e_signs)
    form = form_of(container)
    zero_pos = [p for p, s in enumerate(v_signs) if s == 0]
    rows = []
    rhs = np.zeros(len(zero_pos))
    for k, p in enumerate(zero_pos):
        i, j = net.ij(p)
        row, _ = form.node_row(i, j)
        rows.append(row)
        if p == star_pos:
            rhs[k] = float(sigma)
    try:
        d = np.linalg.solve(np.array(rows), rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            f"singular edge system at vertex {signs_to_str(v_signs)}"
        ) from exc
    nrm = float(np.linalg.norm(d))
    if not np.isfinite(nrm) or nrm <= 0.0:
        raise SingularSystemError(
            f"degenerate edge direction at vertex {signs_to_str(v_signs)}"
        )
    return d / nrm, form


def edge_direction(cpx: CanonicalComplex, vertex, edge) -> np.ndarray:
    """Unit vector pointing from the vertex into the incident edge."""
    v, e = _resolve(cpx, vertex, edge)
    d, _ = _direction_into_edge(cpx.net, v.signs, e.signs, cpx.form)
    return d


def orient_edge(cpx: CanonicalComplex, vertex, edge) -> EdgeOrientation:
    """Orientation of the edge relative to the vertex; FlatCellError if the
    directional derivative vanishes."""
    v, e = _resolve(cpx, vertex, edge)
    d, form = _direction_into_edge(cpx.net, v.signs, e.signs, cpx.form)
    g = form.total_gradient
    slope = float(g @ d)
    if abs(slope) <= _FLAT_TOL * float(np.linalg.norm(g)) + 1e-30:
        raise FlatCellError(
            f"F is constant along edge {signs_to_str(e.signs)}; network out of scope"
        )
    return EdgeOrientation(e.signs, v.signs, 1 if slope > 0 else -1, d)


def classify_vertex(cpx: CanonicalComplex, vertex) -> VertexClassification:
    """PL-regular/critical decision for one vertex via its 2*n0 edges."""
    v = vertex if isinstance(vertex, VertexRecord) else cpx.vertices[tuple(vertex)]
    axes = []
    for p, s in enumerate(v.signs):
        if s != 0:
            continue
        desc = {}
        for sigma in (-1, 1):
            e_signs = v.signs[:p] + (sigma,) + v.signs[p + 1 :]
            if e_signs not in cpx.cells:
                raise MissingEdgeError(
                    f"expected edge {signs_to_str(e_signs)} at vertex"
                    f" {signs_to_str(v.signs)} is missing"
                )
            desc[sigma] = orient_edge(cpx, v, cpx.cells[e_signs]).derivative_sign < 0
        axes.append((p, desc[-1], desc[1]))
    flow = [(p, dm, dp) for p, dm, dp in axes if dm != dp]
    if not flow:
        index = sum(1 for p, dm, dp in axes if dm and dp)
        return VertexClassification(v.signs, "critical", index, tuple(axes), None, None)
    p, dm, _ = flow[0]
    return VertexClassification(
        v.signs, "regular", None, tuple(axes), p, -1 if dm else 1
    )


def orientation_field(cpx: CanonicalComplex) -> dict:
    """Orientations for every orientable edge, keyed by edge signs.

    Edges with vertices are anchored at their lexicographically smallest
    vertex.  Vertex-free unbounded edges are oriented by the restricted
    gradient along their line; if F is constant on such an edge it is
    omitted (it cannot carry a direction of increase).
    """
    out = {}
    for signs, cell in cpx.cells.items():
        if cell.dim != 1:
            continue
        anchors = cpx.vertex_facets(cell)
        if anchors:
            anchor = min(anchors, key=lambda v: v.signs)
            out[signs] = orient_edge(cpx, anchor, cell)
            continue
        if cell.flat:
            continue
        rep = cpx.hrep(signs)
        _, _, vh = np.linalg.svd(rep.a_eq)
        d = vh[-1]
        g = cpx.form(signs).total_gradient
        slope = float(g @ d)
        if abs(slope) <= _FLAT_TOL * float(np.linalg.norm(g)) + 1e-30:
            continue
        if slope < 0:
            d = -d
        out[signs] = EdgeOrientation(signs, None, 1, d / float(np.linalg.norm(d)))
    return out


@dataclass(frozen=True)
class ShallowReport:
    """Realizability report for an (n, n+1, 1) network."""

    n: int
    orientation_class: str
    unbounded_consistent: bool
    critical: tuple  # ((vertex signs, index, value), ...)
    boundary_type: str  # "empty" | "point" | "sphere"
    toward_vertices: tuple

    def to_json_dict(self) -> dict:
        return {
            "class": self.orientation_class,
            "critical": [
                {"vertex": signs_to_str(s), "index": k, "value": val}
                for s, k, val in self.critical
            ],
            "boundary_type": self.boundary_type,
            "unbounded_consistent": self.unbounded_consistent,
            "n": self.n,
        }


def _global_range(cpx: CanonicalComplex):
    """(inf F, sup F) over the whole input space via per-top-cell LPs."""
    lo, hi = np.inf, -np.inf
    for cell in cpx.top_cells():
        form = cpx.form(cell.signs)
        up = cpx.cell_lp(cell.signs, form.total_gradient)
        hi = np.inf if not up.optimal else max(hi, up.value + form.total_offset)
        down = cpx.cell_lp(cell.signs, form.total_gradient, maximize=False)
        lo = -np.inf if not down.optimal else min(lo, -down.value + form.total_offset)
        if lo == -np.inf and hi == np.inf:
            break
    return lo, hi


def analyze_shallow(net: ReluNetwork, cpx: CanonicalComplex | None = None) -> ShallowReport:
    """Orientation class, critical inventory and decision-boundary type for
    an (n, n+1, 1) network.

    Checks that unbounded edges sharing a vertex share their orientation
    relative to it, and that at most one critical vertex occurs, with index
    0 or n.
    """
    dims = net.arch.dims
    if len(dims) != 2 or dims[1] != dims[0] + 1:
        raise ArchitectureError(f"analyze_shallow needs an (n, n+1, 1) network, got {dims}")
    n = dims[0]
    if cpx is None:
        cpx = build_complex(net)

    consistent = True
    toward = []
    for v in cpx.vertices.values():
        rel = []
        for cell in cpx.star(v.signs):
            if cell.dim != 1 or len(cpx.vertex_facets(cell)) != 1:
                continue
            rel.append(orient_edge(cpx, v, cell).derivative_sign)
        if not rel:
            continue
        if len(set(rel)) > 1:
            consistent = False
        elif rel[0] < 0:
            toward.append(v.signs)

    critical = []
    for v in cpx.vertices.values():
        cls = classify_vertex(cpx, v)
        if cls.kind == "critical":
            critical.append((v.signs, cls.index, v.value))

    n_vertices = len(cpx.vertices)
    n_toward = len(toward)
    if not consistent:
        klass = "inconsistent"
    elif n_toward == 0:
        klass = "all-away"
    elif n_toward == n_vertices:
        klass = "all-toward"
    elif n_toward == 1:
        klass = "one-toward-rest-away"
    elif n_toward == n_vertices - 1:
        klass = "one-away-rest-toward"
    else:
        klass = "mixed"

    lo, hi = _global_range(cpx)
    if not (lo < 0.0 < hi):
        boundary = "empty"
    elif critical:
        boundary = "sphere"
    else:
        boundary = "point"

    return ShallowReport(
        n=n,
        orientation_class=klass,
        unbounded_consistent=consistent,
        critical=tuple(sorted(critical)),
        boundary_type=boundary,
        toward_vertices=tuple(sorted(toward)),
    )
