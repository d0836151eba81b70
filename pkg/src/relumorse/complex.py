"""The canonical polyhedral complex of a ReLU network.

Cells are named by sign sequences: one entry in {-1, 0, +1} per hidden
neuron recording the sign of that node map on the cell.  Under the
genericity conditions enforced here a k-cell has exactly n0 - k zero
entries, faces are read off by composing sign words, and cofacets by
flipping a single zero entry.

Construction is layer-by-layer refinement: starting from the layer-1
hyperplane arrangement, each existing cell is intersected with the next
layer's bent hyperplanes (affine within the cell).  A candidate pattern is
kept iff its equalities plus strict inequalities admit an interior witness,
decided by an LP that maximizes the worst slack.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    FlatCellError,
    GenericityError,
    InjectivityError,
    SingularSystemError,
)
from .lp import LpProblem, interior_witness, lp_solve
from .network import (
    ReluNetwork,
    Signs,
    _prefix_forms,
    cell_affine_form,
    sign_patterns,
    signs_to_str,
)

_ZERO_ROW = 1e-12
_FLAT_TOL = 1e-9


def compose_signs(a: Signs, b: Signs) -> Signs:
    """Entrywise composition: a's entry where nonzero, else b's."""
    if len(a) != len(b):
        raise ValueError(f"sign sequence length mismatch: {len(a)} vs {len(b)}")
    return tuple(x if x != 0 else y for x, y in zip(a, b))


def is_face(a: Signs, b: Signs) -> bool:
    """True iff the cell named a is a face of the cell named b."""
    return compose_signs(a, b) == tuple(b)


@dataclass
class Cell:
    """One cell of the complex, keyed by its sign sequence."""

    signs: Signs
    dim: int
    witness: np.ndarray
    clearance: float
    flat: bool = False
    bounded_above: bool | None = None  # cache, filled by CanonicalComplex

    def __str__(self):
        return signs_to_str(self.signs)


@dataclass
class VertexRecord:
    signs: Signs
    location: np.ndarray
    value: float


@dataclass(frozen=True)
class _HRep:
    """Normalized H-representation of one cell.

    Rows are scaled to unit gradient norm so LP slacks are geometric
    distances.  ``ge_positions`` maps each inequality row back to the flat
    sign-sequence position it came from (used to read vertex signs off
    tight constraints).
    """

    a_eq: np.ndarray
    b_eq: np.ndarray
    a_ge: np.ndarray
    b_ge: np.ndarray
    eq_positions: tuple
    ge_positions: tuple


def _hrep_for(net: ReluNetwork, signs: Signs, forms) -> _HRep | None:
    """Assemble the H-representation of a (possibly partial) sign pattern.

    Returns None when a constant node map makes the pattern trivially
    infeasible; raises GenericityError when a node map vanishes identically
    on the region (its bent hyperplane would contain an open set).
    """
    pre_j, pre_b = forms
    eq, eqr, ge, ger = [], [], [], []
    eq_pos, ge_pos = [], []
    pos = 0
    for li, (rows, offs) in enumerate(zip(pre_j, pre_b)):
        for j in range(rows.shape[0]):
            s = signs[pos]
            row = rows[j]
            c = offs[j]
            nrm = float(np.linalg.norm(row))
            if nrm <= _ZERO_ROW * max(1.0, abs(c)):
                # Node map is constant on the region.
                if s == 0:
                    if abs(c) <= 1e-9:
                        raise GenericityError(
                            f"node map {(li + 1, j + 1)} vanishes identically on a region"
                        )
                    return None
                if s * c <= 0 or abs(c) <= 1e-9:
                    return None
                pos += 1
                continue  # strictly satisfied everywhere on the region
            if s == 0:
                eq.append(row / nrm)
                eqr.append(-c / nrm)
                eq_pos.append(pos)
            else:
                ge.append(s * row / nrm)
                ger.append(-s * c / nrm)
                ge_pos.append(pos)
            pos += 1
    n = net.n0
    return _HRep(
        a_eq=np.array(eq).reshape(-1, n),
        b_eq=np.array(eqr, dtype=float),
        a_ge=np.array(ge).reshape(-1, n),
        b_ge=np.array(ger, dtype=float),
        eq_positions=tuple(eq_pos),
        ge_positions=tuple(ge_pos),
    )


class CanonicalComplex:
    """Finished cell poset of C(F) with vertex coordinates.

    Immutable after construction apart from internal caches; safe for
    concurrent reads.
    """

    def __init__(self, net, cells, vertices, sign_tol, lp_tol):
        self.net = net
        self.cells = cells
        self.vertices = vertices
        self.sign_tol = sign_tol
        self.lp_tol = lp_tol
        self._forms = {}
        self._hreps = {}
        self._fmax = {}
        self._spatial = {}

    @property
    def n0(self) -> int:
        return self.net.n0

    @property
    def has_flat_cells(self) -> bool:
        return any(c.flat for c in self.cells.values())

    def form(self, signs: Signs):
        """Cached affine form for any full-length sign pattern."""
        signs = tuple(signs)
        if signs not in self._forms:
            self._forms[signs] = cell_affine_form(self.net, signs)
        return self._forms[signs]

    def hrep(self, signs: Signs) -> _HRep:
        signs = tuple(signs)
        if signs not in self._hreps:
            form = self.form(signs)
            rep = _hrep_for(self.net, signs, (form.pre_jacobians, form.pre_biases))
            if rep is None:
                raise GenericityError(f"cell {signs_to_str(signs)} has an empty H-representation")
            self._hreps[signs] = rep
        return self._hreps[signs]

    # -- face poset -----------------------------------------------------

    def cofacets(self, cell) -> list:
        """Stored cells that have ``cell`` as a facet (one zero entry flipped)."""
        signs = cell.signs if isinstance(cell, Cell) else tuple(cell)
        out = []
        for p, s in enumerate(signs):
            if s != 0:
                continue
            for sigma in (-1, 1):
                cand = signs[:p] + (sigma,) + signs[p + 1 :]
                hit = self.cells.get(cand)
                if hit is not None:
                    out.append(hit)
        out.sort(key=lambda c: c.signs)
        return out

    def facets(self, cell) -> list:
        """Stored cells obtained by zeroing exactly one nonzero entry."""
        signs = cell.signs if isinstance(cell, Cell) else tuple(cell)
        out = []
        for p, s in enumerate(signs):
            if s == 0:
                continue
            cand = signs[:p] + (0,) + signs[p + 1 :]
            hit = self.cells.get(cand)
            if hit is not None:
                out.append(hit)
        out.sort(key=lambda c: c.signs)
        return out

    def star(self, signs: Signs) -> list:
        signs = tuple(signs)
        return [c for c in self.cells.values() if is_face(signs, c.signs)]

    def vertex_facets(self, cell) -> list:
        """Vertices of the complex lying in the closure of ``cell``."""
        signs = cell.signs if isinstance(cell, Cell) else tuple(cell)
        return [v for v in self.vertices.values() if is_face(v.signs, signs)]

    def top_cells(self) -> list:
        return [c for c in self.cells.values() if c.dim == self.n0]

    def container_top_cell(self, signs: Signs) -> Signs:
        """Lexicographically smallest top cell having ``signs`` as a face."""
        signs = tuple(signs)
        zero_pos = [p for p, s in enumerate(signs) if s == 0]
        for combo in sign_patterns(len(zero_pos)):
            if 0 in combo:
                continue
            cand = list(signs)
            for p, sigma in zip(zero_pos, combo):
                cand[p] = sigma
            cand = tuple(cand)
            if cand in self.cells:
                return cand
        raise GenericityError(
            f"no top cell of the complex contains {signs_to_str(signs)}"
        )

    # -- LP-backed cell queries ------------------------------------------

    def cell_lp(self, signs: Signs, objective, maximize: bool = True):
        rep = self.hrep(signs)
        obj = np.asarray(objective, dtype=float)
        problem = LpProblem.build(
            obj if maximize else -obj,
            a_eq=rep.a_eq,
            b_eq=rep.b_eq,
            a_ge=rep.a_ge,
            b_ge=rep.b_ge,
        )
        return lp_solve(problem, feas_tol=self.lp_tol)

    def is_bounded_above(self, cell) -> bool:
        """True iff max F over the cell is finite (LP on the restricted gradient)."""
        cell = cell if isinstance(cell, Cell) else self.cells[tuple(cell)]
        if cell.bounded_above is None:
            if cell.dim == 0:
                cell.bounded_above = True
            else:
                res = self.cell_lp(cell.signs, self.form(cell.signs).total_gradient)
                cell.bounded_above = res.optimal
        return cell.bounded_above

    def f_max(self, cell) -> float:
        """Max of F over a bounded-above cell, snapped to the vertex value
        where it is attained."""
        cell = cell if isinstance(cell, Cell) else self.cells[tuple(cell)]
        if cell.signs in self._fmax:
            return self._fmax[cell.signs]
        if cell.signs in self.vertices:
            val = self.vertices[cell.signs].value
        else:
            form = self.form(cell.signs)
            res = self.cell_lp(cell.signs, form.total_gradient)
            if not res.optimal:
                raise GenericityError(
                    f"f_max requested for unbounded-above cell {signs_to_str(cell.signs)}"
                )
            val = res.value + form.total_offset
            for v in self.vertex_facets(cell):
                if abs(v.value - val) <= 1e-6 * max(1.0, abs(val)):
                    val = v.value
                    break
        self._fmax[cell.signs] = val
        return val

    def is_spatially_bounded(self, cell) -> bool:
        """True iff the cell is a bounded subset of R^n0 (coordinate LPs)."""
        cell = cell if isinstance(cell, Cell) else self.cells[tuple(cell)]
        signs = cell.signs
        if signs in self._spatial:
            return self._spatial[signs]
        bounded = True
        for axis in range(self.n0):
            for direction in (1.0, -1.0):
                obj = np.zeros(self.n0)
                obj[axis] = direction
                if not self.cell_lp(signs, obj).optimal:
                    bounded = False
                    break
            if not bounded:
                break
        self._spatial[signs] = bounded
        return bounded

    # -- derived sets ------------------------------------------------------

    def lower_star(self, vertex) -> list:
        """Cells of star(v) on which F attains its maximum at v.

        Combinatorial rule: a star cell is in the lower star iff every one
        of its edges at v descends (points toward v); extra nonzero entries
        of the cell name those edges directly.
        """
        from .orientation import orient_edge  # deferred: orientation imports us

        v = vertex if isinstance(vertex, VertexRecord) else self.vertices[tuple(vertex)]
        zero_pos = [p for p, s in enumerate(v.signs) if s == 0]
        descends = {}
        for p in zero_pos:
            for sigma in (-1, 1):
                e = v.signs[:p] + (sigma,) + v.signs[p + 1 :]
                if e in self.cells:
                    descends[(p, sigma)] = orient_edge(self, v, self.cells[e]).derivative_sign < 0
        out = []
        for c in self.star(v.signs):
            extras = [(p, c.signs[p]) for p in zero_pos if c.signs[p] != 0]
            if all(descends.get(key, False) for key in extras):
                out.append(c)
        out.sort(key=lambda c: c.signs)
        return out

    def vertex_location(self, signs: Signs, container: Signs | None = None) -> np.ndarray:
        """Solve the n0 x n0 node-map system of a vertex's zero entries."""
        return _vertex_location(self.net, tuple(signs), container or self.container_top_cell(signs), self.form)

    # -- export ------------------------------------------------------------

    def export_dict(self) -> dict:
        cells = {}
        for signs, cell in self.cells.items():
            record = {
                "dim": cell.dim,
                "bounded_above": self.is_bounded_above(cell),
            }
            if signs in self.vertices:
                v = self.vertices[signs]
                record["coordinates"] = [float(x) for x in v.location]
                record["value"] = float(v.value)
            cells[signs_to_str(signs)] = record
        return {"dims": list(self.net.arch.full()), "cells": cells}


def _vertex_location(net, signs, container, form_of) -> np.ndarray:
    form = form_of(container)
    rows, rhs = [], []
    for p, s in enumerate(signs):
        if s != 0:
            continue
        i, j = net.ij(p)
        row, c = form.node_row(i, j)
        rows.append(row)
        rhs.append(-c)
    mat = np.array(rows)
    try:
        loc = np.linalg.solve(mat, np.array(rhs)) + 0.0  # clear negative zeros
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            f"singular vertex system for {signs_to_str(signs)}"
        ) from exc
    resid = float(np.abs(mat @ loc - np.array(rhs)).max())
    if not np.isfinite(loc).all() or resid > 1e-6 * max(1.0, float(np.abs(rhs).max())):
        raise SingularSystemError(
            f"ill-conditioned vertex system for {signs_to_str(signs)}"
        )
    return loc


def _abort_on_forced_flats(net, stage, upto_layer, n0):
    """Fail fast when a whole hidden layer is dead on a cell with a vertex.

    All deeper layer maps are constant on such a cell, so the finished
    complex is guaranteed to contain a flat positive-dimensional cell with a
    vertex in its closure; raising here skips the remaining refinement work.
    """
    vertex_patterns = [s for s in stage if sum(1 for e in s if e == 0) == n0]
    if not vertex_patterns:
        return
    offset = 0
    blocks = []
    for layer in net.layers[:upto_layer]:
        blocks.append((offset, offset + layer.out_dim))
        offset += layer.out_dim
    for signs in stage:
        if sum(1 for e in signs if e == 0) >= n0:
            continue  # vertices themselves are allowed to be "flat"
        if not any(all(e <= 0 for e in signs[a:b]) for a, b in blocks):
            continue
        if any(is_face(v, signs) for v in vertex_patterns):
            raise FlatCellError(
                f"layer dead on cell {signs_to_str(signs)}, which has a vertex;"
                " network is out of scope"
            )


def build_complex(
    net: ReluNetwork,
    sign_tol: float = 1e-9,
    lp_tol: float = 1e-7,
) -> CanonicalComplex:
    """Enumerate all cells of C(F) with witnesses, dimensions and vertices.

    Raises GenericityError (supertransversality violations), FlatCellError
    (F constant on a positive-dimensional cell meeting a vertex) or
    InjectivityError (two vertices share an F value).
    """
    n0 = net.n0
    stage = {(): None}
    for k, layer in enumerate(net.layers, start=1):
        n_k = layer.out_dim
        new_stage = {}
        for parent in sorted(stage):
            ext = parent + (0,) * n_k
            pre_j, pre_b, _, _ = _prefix_forms(net, ext)
            for t in sign_patterns(n_k):
                cand = parent + t
                rep = _hrep_for(net, cand, (pre_j, pre_b))
                if rep is None:
                    continue
                zeros = sum(1 for s in cand if s == 0)
                if zeros > n0 and rep.a_eq.shape[0]:
                    # Over-determined zero set: generically unsolvable, so a
                    # cheap residual check skips the LP.
                    sol, *_ = np.linalg.lstsq(rep.a_eq, rep.b_eq, rcond=None)
                    resid = float(np.abs(rep.a_eq @ sol - rep.b_eq).max())
                    if resid > 1e-7 * max(1.0, float(np.abs(rep.b_eq).max())):
                        continue
                found = interior_witness(
                    rep.a_eq, rep.b_eq, rep.a_ge, rep.b_ge, feas_tol=lp_tol
                )
                if found is None:
                    continue
                if zeros > n0:
                    raise GenericityError(
                        f"feasible pattern {signs_to_str(cand)} has {zeros} > n0 zeros"
                    )
                if rep.a_eq.shape[0]:
                    rank = np.linalg.matrix_rank(rep.a_eq, tol=1e-7)
                    if rank < rep.a_eq.shape[0]:
                        raise GenericityError(
                            f"dependent zero-set equations on {signs_to_str(cand)}"
                        )
                new_stage[cand] = found
        stage = new_stage
        _abort_on_forced_flats(net, stage, k, n0)

    cells = {}
    for signs in sorted(stage):
        witness, clearance = stage[signs]
        dim = n0 - sum(1 for s in signs if s == 0)
        cells[signs] = Cell(signs, dim, witness, float(clearance))

    cpx = CanonicalComplex(net, cells, {}, sign_tol, lp_tol)

    # Flat cells: F constant along a positive-dimensional cell.  With a
    # vertex in the closure the Morse machinery cannot run; vertex-free flat
    # cells (single uncut bent hyperplanes) are kept but flagged.
    vertex_signs = [s for s, c in cells.items() if c.dim == 0]
    for cell in cells.values():
        if cell.dim == 0:
            continue
        form = cpx.form(cell.signs)
        g = form.total_gradient
        rep = cpx.hrep(cell.signs)
        if rep.a_eq.shape[0]:
            _, _, vh = np.linalg.svd(rep.a_eq)
            basis = vh[rep.a_eq.shape[0] :]
        else:
            basis = np.eye(n0)
        proj = float(np.linalg.norm(basis @ g)) if basis.size else 0.0
        cell.flat = proj <= _FLAT_TOL * float(np.linalg.norm(g)) + 1e-30
        if cell.flat and any(is_face(v, cell.signs) for v in vertex_signs):
            raise FlatCellError(
                f"F is constant on cell {signs_to_str(cell.signs)}, which has a vertex;"
                " network is out of scope"
            )

    vertices = {}
    for signs in vertex_signs:
        loc = cpx.vertex_location(signs)
        vertices[signs] = VertexRecord(signs, loc, net.evaluate(loc))
    cpx.vertices = dict(sorted(vertices.items()))

    records = list(cpx.vertices.values())
    for a_i in range(len(records)):
        for b_i in range(a_i + 1, len(records)):
            va, vb = records[a_i], records[b_i]
            if abs(va.value - vb.value) <= sign_tol * max(1.0, abs(va.value), abs(vb.value)):
                raise InjectivityError(
                    f"vertices {signs_to_str(va.signs)} and {signs_to_str(vb.signs)}"
                    f" share the value {va.value!r}"
                )
    return cpx
