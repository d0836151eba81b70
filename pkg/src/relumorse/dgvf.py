"""Discrete gradient vector fields on the compactified lower-star complex.

The matching is assembled vertex by vertex.  For a regular vertex the lower
star is paired completely by toggling the first flow-through axis between 0
and the descending sign.  For a critical vertex of index k the lower star is
the set of sign words over its k descending axes; scanning those axes in
order, the first entry that is not -1 is toggled (0 <-> +1); the all-minus
word survives as the unique critical k-cell.  The union over all
vertices, together with the basepoint * of the one-point compactification,
is a relatively perfect discrete gradient vector field.

``local_pair`` reproduces the same assignment for a single cell without the
global complex: one LP to find the cell's lower-star vertex, then 2*n0
analytic directional derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complex import CanonicalComplex, _hrep_for, is_face
from .errors import (
    FlatCellError,
    GenericityError,
    IncompletePairingError,
    UnboundedCellError,
)
from .lp import LpProblem, LpResult, lp_solve  # the solver surface lives here
from .network import ReluNetwork, Signs, cell_affine_form, signs_to_str
from .orientation import (
    VertexClassification,
    _direction_into_edge,
    classify_vertex,
)

#: Identifier of the compactification basepoint (a critical 0-cell at -inf).
BASEPOINT = "*"

_FLAT_TOL = 1e-9


@dataclass(frozen=True)
class Matching:
    """A discrete vector field: pairs (lower, upper) plus critical cells."""

    pairs: tuple  # ((lower signs, upper signs), ...) sorted
    critical: tuple  # (signs, ...) sorted, basepoint excluded
    includes_basepoint: bool = True

    def lower_to_upper(self) -> dict:
        return {lo: up for lo, up in self.pairs}

    def upper_to_lower(self) -> dict:
        return {up: lo for lo, up in self.pairs}

    def critical_set(self) -> set:
        out = set(self.critical)
        if self.includes_basepoint:
            out.add(BASEPOINT)
        return out

    def to_json_dict(self) -> dict:
        return {
            "pairs": [[signs_to_str(lo), signs_to_str(up)] for lo, up in self.pairs],
            "critical": [signs_to_str(c) for c in self.critical],
            "basepoint": self.includes_basepoint,
        }

    def validate(self, cpx: CanonicalComplex) -> list:
        """Return a list of invariant violations (empty when valid)."""
        problems = []
        seen = {}
        for lo, up in self.pairs:
            cl, cu = cpx.cells.get(lo), cpx.cells.get(up)
            if cl is None or cu is None:
                problems.append(f"pair ({signs_to_str(lo)}, {signs_to_str(up)}) not in complex")
                continue
            if cu.dim != cl.dim + 1:
                problems.append(f"pair ({signs_to_str(lo)}, {signs_to_str(up)}) dimension step != 1")
            if not is_face(lo, up):
                problems.append(f"{signs_to_str(lo)} is not a facet of {signs_to_str(up)}")
            for s in (lo, up):
                seen[s] = seen.get(s, 0) + 1
        for c in self.critical:
            seen[c] = seen.get(c, 0) + 1
        dupes = [s for s, k in seen.items() if k > 1]
        problems.extend(f"cell {signs_to_str(s)} used more than once" for s in dupes)
        covered = set(seen)
        expected = {s for s, c in cpx.cells.items() if cpx.is_bounded_above(c)}
        if covered != expected:
            missing = expected - covered
            extra = covered - expected
            if missing:
                problems.append(
                    "uncovered bounded-above cells: "
                    + ", ".join(signs_to_str(s) for s in sorted(missing))
                )
            if extra:
                problems.append(
                    "cells outside the bounded-above subcomplex: "
                    + ", ".join(signs_to_str(s) for s in sorted(extra))
                )
        return problems


def _lower_star_patterns(vertex_signs: Signs, allowed: dict):
    """Sign words of the lower star: the product of per-axis allowed signs."""
    positions = sorted(allowed)
    combos = [()]
    for p in positions:
        combos = [c + (s,) for c in combos for s in allowed[p]]
    out = []
    for combo in combos:
        signs = list(vertex_signs)
        for p, s in zip(positions, combo):
            signs[p] = s
        out.append(tuple(signs))
    return out


def _allowed_signs(cls: VertexClassification) -> dict:
    """Per-axis sign sets spanning the lower star of a classified vertex."""
    allowed = {}
    for p, dm, dp in cls.axes:
        signs = [0]
        if dm:
            signs.append(-1)
        if dp:
            signs.append(1)
        allowed[p] = signs
    return allowed


def pair_lower_star_regular(cpx: CanonicalComplex, cls: VertexClassification) -> list:
    """Complete pairing of a regular vertex's lower star.

    Every lower-star cell has entry 0 or the descending sign at the flow
    axis; toggling that entry is a fixed-point-free involution, giving the
    pairs.
    """
    if cls.kind != "regular" or cls.flow_axis is None:
        raise IncompletePairingError(f"{signs_to_str(cls.vertex)} is not a regular vertex")
    p_star, sigma = cls.flow_axis, cls.flow_sign
    members = _lower_star_patterns(cls.vertex, _allowed_signs(cls))
    member_set = set(members)
    pairs = []
    for signs in members:
        if signs not in cpx.cells:
            raise IncompletePairingError(
                f"lower-star cell {signs_to_str(signs)} missing from the complex"
            )
        entry = signs[p_star]
        if entry == -sigma:
            raise IncompletePairingError(
                f"lower-star cell {signs_to_str(signs)} lies on the ascending side"
            )
        if entry == 0:
            partner = signs[:p_star] + (sigma,) + signs[p_star + 1 :]
            if partner not in member_set:
                raise IncompletePairingError(
                    f"flow partner of {signs_to_str(signs)} escapes the lower star"
                )
            pairs.append((signs, partner))
    if 2 * len(pairs) != len(members):
        raise IncompletePairingError(
            f"lower star of {signs_to_str(cls.vertex)} was not completely paired"
        )
    return sorted(pairs)


def _critical_assignment(entries: tuple):
    """First-axis rule over descending-axis entries.

    Returns ("critical", None) or ("up"/"down", axis index) for the word;
    sigma is fixed to +1, so the critical word is all -1.
    """
    for k, e in enumerate(entries):
        if e == -1:
            continue
        return ("up", k) if e == 0 else ("down", k)
    return ("critical", None)


def pair_lower_star_critical(cpx: CanonicalComplex, cls: VertexClassification):
    """Pairing of a critical vertex's lower star, minus one critical k-cell.

    Returns (pairs, critical_cell_signs); the critical cell replaces the
    descending-axis zeros of the vertex by -1.
    """
    if cls.kind != "critical":
        raise IncompletePairingError(f"{signs_to_str(cls.vertex)} is not a critical vertex")
    axes = cls.descending_axes
    members = _lower_star_patterns(cls.vertex, _allowed_signs(cls))
    pairs = []
    critical_cell = None
    for signs in members:
        if signs not in cpx.cells:
            raise IncompletePairingError(
                f"lower-star cell {signs_to_str(signs)} missing from the complex"
            )
        entries = tuple(signs[p] for p in axes)
        action, k = _critical_assignment(entries)
        if action == "critical":
            critical_cell = signs
        elif action == "up":
            p = axes[k]
            pairs.append((signs, signs[:p] + (1,) + signs[p + 1 :]))
    if critical_cell is None or 2 * len(pairs) + 1 != len(members):
        raise IncompletePairingError(
            f"lower star of {signs_to_str(cls.vertex)} paired inconsistently"
        )
    return sorted(pairs), critical_cell


def build_dgvf(cpx: CanonicalComplex) -> Matching:
    """Union of the per-vertex lower-star pairings over the whole complex."""
    if cpx.has_flat_cells:
        raise FlatCellError(
            "complex has flat cells; lower stars do not cover the bounded-above subcomplex"
        )
    pairs = []
    critical = []
    for v in cpx.vertices.values():
        cls = classify_vertex(cpx, v)
        if cls.kind == "regular":
            pairs.extend(pair_lower_star_regular(cpx, cls))
        else:
            new_pairs, crit = pair_lower_star_critical(cpx, cls)
            pairs.extend(new_pairs)
            critical.append(crit)
    matching = Matching(tuple(sorted(pairs)), tuple(sorted(critical)))
    problems = matching.validate(cpx)
    if problems:
        raise IncompletePairingError("; ".join(problems))
    return matching


@dataclass(frozen=True)
class CompactifiedComplex:
    """Bounded-above cells plus the basepoint *, with facet incidence.

    The basepoint is appended to the facet list of every compactified
    unbounded 1-cell (rays gain * as their second endpoint).  A vertex-free
    line closes up through * at both ends, so its mod-2 incidence with * is
    zero and nothing is appended.  For unbounded cells of dimension >= 2 the
    basepoint is in the closure but is not a codimension-1 face.
    """

    n0: int
    cells: dict  # signs -> Cell (bounded above only)
    facets: dict  # signs -> tuple of facet keys (signs and possibly BASEPOINT)
    f_max: dict  # signs -> float; BASEPOINT -> -inf
    vertex_values: tuple

    def dim(self, key) -> int:
        return 0 if key == BASEPOINT else self.cells[key].dim

    def sorted_keys(self) -> list:
        return [BASEPOINT] + sorted(self.cells)


def compactify(cpx: CanonicalComplex) -> CompactifiedComplex:
    """One-point compactification of the bounded-above subcomplex."""
    kept = {s: c for s, c in cpx.cells.items() if cpx.is_bounded_above(c)}
    facets = {BASEPOINT: ()}
    f_max = {BASEPOINT: float("-inf")}
    for signs, cell in kept.items():
        cell_facets = [f.signs for f in cpx.facets(cell) if f.signs in kept]
        if cell.dim == 1:
            n_vertices = sum(1 for f in cell_facets if kept[f].dim == 0)
            if n_vertices == 1:
                cell_facets.append(BASEPOINT)
        facets[signs] = tuple(cell_facets)
        f_max[signs] = cpx.f_max(cell)
    values = tuple(sorted(v.value for v in cpx.vertices.values()))
    return CompactifiedComplex(
        n0=cpx.n0,
        cells=dict(sorted(kept.items())),
        facets=facets,
        f_max=f_max,
        vertex_values=values,
    )


def is_acyclic(matching: Matching, cc: CompactifiedComplex):
    """Check for closed V-paths; returns (flag, witness-path-or-None).

    The V-path graph has one node per pair; pair (C, D) steps to pair
    (C', D') when C' != C is a facet of D.
    """
    lower_of = matching.lower_to_upper()
    succ = {}
    for lo, up in matching.pairs:
        nxt = []
        for f in cc.facets.get(up, ()):
            if f != lo and f in lower_of:
                nxt.append(f)
        succ[lo] = sorted(nxt)

    WHITE, GRAY, BLACK = 0, 1, 2
    color = {lo: WHITE for lo in succ}
    for root in sorted(succ):
        if color[root] != WHITE:
            continue
        stack = [(root, iter(succ[root]))]
        trail = [root]
        color[root] = GRAY
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == GRAY:
                    start = trail.index(nxt)
                    cycle = trail[start:]
                    witness = []
                    for lo in cycle:
                        witness.extend([lo, lower_of[lo]])
                    return False, witness
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    trail.append(nxt)
                    stack.append((nxt, iter(succ[nxt])))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                trail.pop()
                stack.pop()
    return True, None


@dataclass(frozen=True)
class PairAssignment:
    """Outcome of the local pairing for a single cell."""

    cell: Signs
    role: str  # "lower" | "upper" | "critical"
    partner: Signs | None
    owner_vertex: Signs
    owner_index: int | None  # critical index of the owner, None when regular


def _local_classify(net: ReluNetwork, v_signs: Signs, form_of) -> VertexClassification:
    """Classification at a vertex from analytic directional derivatives only."""
    axes = []
    for p, s in enumerate(v_signs):
        if s != 0:
            continue
        desc = {}
        for sigma in (-1, 1):
            e_signs = v_signs[:p] + (sigma,) + v_signs[p + 1 :]
            d, form = _direction_into_edge(net, v_signs, e_signs, form_of)
            g = form.total_gradient
            slope = float(g @ d)
            if abs(slope) <= _FLAT_TOL * float(np.linalg.norm(g)) + 1e-30:
                raise FlatCellError(
                    f"F is constant along edge {signs_to_str(e_signs)}; network out of scope"
                )
            desc[sigma] = slope < 0
        axes.append((p, desc[-1], desc[1]))
    flow = [(p, dm, dp) for p, dm, dp in axes if dm != dp]
    if not flow:
        index = sum(1 for p, dm, dp in axes if dm and dp)
        return VertexClassification(v_signs, "critical", index, tuple(axes), None, None)
    p, dm, _ = flow[0]
    return VertexClassification(v_signs, "regular", None, tuple(axes), p, -1 if dm else 1)


def local_pair(
    net: ReluNetwork,
    signs: Signs,
    sign_tol: float = 1e-9,
    lp_tol: float = 1e-7,
) -> PairAssignment:
    """Pairing of one bounded-above cell without building the complex.

    Maximizes F over the cell by LP; the tight constraints name the
    lower-star vertex, whose 2*n0 directional derivatives then drive the
    same regular/critical rules used by :func:`build_dgvf`.
    """
    signs = tuple(signs)
    n0 = net.n0
    forms_cache = {}

    def form_of(s):
        s = tuple(s)
        if s not in forms_cache:
            forms_cache[s] = cell_affine_form(net, s)
        return forms_cache[s]

    form = form_of(signs)
    rep = _hrep_for(net, signs, (form.pre_jacobians, form.pre_biases))
    if rep is None:
        raise GenericityError(f"cell {signs_to_str(signs)} is infeasible")
    res = lp_solve(
        LpProblem.build(
            form.total_gradient, a_eq=rep.a_eq, b_eq=rep.b_eq, a_ge=rep.a_ge, b_ge=rep.b_ge
        ),
        feas_tol=lp_tol,
    )
    if res.status == "unbounded":
        raise UnboundedCellError(
            f"F is unbounded above on cell {signs_to_str(signs)}"
        )
    if not res.optimal:
        raise GenericityError(f"cell {signs_to_str(signs)} is infeasible")

    v_signs = list(signs)
    for row_idx in res.tight:
        v_signs[rep.ge_positions[row_idx]] = 0
    v_signs = tuple(v_signs)
    if sum(1 for s in v_signs if s == 0) != n0:
        raise GenericityError(
            f"LP maximum over {signs_to_str(signs)} is not attained at a simple vertex"
        )

    cls = _local_classify(net, v_signs, form_of)
    if cls.kind == "regular":
        p_star, sigma = cls.flow_axis, cls.flow_sign
        entry = signs[p_star]
        if entry == 0:
            partner = signs[:p_star] + (sigma,) + signs[p_star + 1 :]
            return PairAssignment(signs, "lower", partner, v_signs, None)
        if entry == sigma:
            partner = signs[:p_star] + (0,) + signs[p_star + 1 :]
            return PairAssignment(signs, "upper", partner, v_signs, None)
        raise IncompletePairingError(
            f"cell {signs_to_str(signs)} is not in the lower star of its LP vertex"
        )
    axes = cls.descending_axes
    extras = [p for p, s in enumerate(v_signs) if s == 0 and signs[p] != 0]
    if any(p not in axes for p in extras):
        raise IncompletePairingError(
            f"cell {signs_to_str(signs)} is not in the lower star of its LP vertex"
        )
    entries = tuple(signs[p] for p in axes)
    action, k = _critical_assignment(entries)
    if action == "critical":
        return PairAssignment(signs, "critical", None, v_signs, cls.index)
    p = axes[k]
    new = 1 if action == "up" else 0
    partner = signs[:p] + (new,) + signs[p + 1 :]
    role = "lower" if action == "up" else "upper"
    return PairAssignment(signs, role, partner, v_signs, cls.index)
