"""ReLU network weights, evaluation, node maps, and per-cell affine forms.

A network is the data of hidden affine layers ``A_1 .. A_m`` followed by a
final affine map ``G`` to the reals; the associated function is

    F(x) = G(ReLU(A_m(... ReLU(A_1(x)) ...))).

On a cell with a fixed activation pattern every node map (pre-activation of
one neuron, as a function of the input) is affine; :func:`cell_affine_form`
computes those affine forms together with the total restricted gradient of F
by masking rows whose pattern entry is not +1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ArchitectureError, DimensionError

# A sign sequence: one entry in {-1, 0, +1} per hidden neuron, ordered by
# (layer, neuron) ascending.  Plain tuples so they hash and sort naturally
# (numeric order -1 < 0 < +1 is the lexicographic order used everywhere).
Signs = tuple


def signs_to_str(signs: Signs) -> str:
    return "".join("+" if s > 0 else "-" if s < 0 else "0" for s in signs)


def signs_from_str(text: str) -> Signs:
    table = {"+": 1, "-": -1, "0": 0}
    try:
        return tuple(table[ch] for ch in text)
    except KeyError as exc:
        raise ValueError(f"invalid sign character in {text!r}") from exc


def sign_patterns(n: int):
    """All sign words of length n in numeric-lexicographic order."""
    return itertools.product((-1, 0, 1), repeat=n)


@dataclass(frozen=True)
class Architecture:
    """Hidden-layer widths (n0, n1, ..., nm); the output dimension is 1."""

    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) < 2:
            raise ArchitectureError("architecture needs at least one hidden layer")
        if any(d < 1 for d in dims):
            raise ArchitectureError(f"architecture entries must be >= 1, got {dims}")

    @classmethod
    def from_full(cls, dims) -> "Architecture":
        """Parse the (n0, ..., nm, 1) form used by weight files and --arch."""
        dims = tuple(int(d) for d in dims)
        if len(dims) < 3 or dims[-1] != 1:
            raise ArchitectureError(
                f"expected (n0, ..., nm, 1) with at least one hidden layer, got {dims}"
            )
        return cls(dims[:-1])

    @property
    def n0(self) -> int:
        return self.dims[0]

    @property
    def hidden(self) -> tuple:
        return self.dims[1:]

    def full(self) -> tuple:
        return self.dims + (1,)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AffineLayer:
    """One affine map x -> W x + b."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = _freeze(self.weights)
        b = _freeze(self.bias)
        if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
            raise ArchitectureError(
                f"inconsistent layer shapes: weights {w.shape}, bias {b.shape}"
            )
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.weights @ x + self.bias


@dataclass(frozen=True)
class ReluNetwork:
    """Hidden layers A_1..A_m plus the final affine map G to the reals.

    Immutable after construction; all operations are pure.
    """

    layers: tuple
    final: AffineLayer

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if not layers:
            raise ArchitectureError("at least one hidden layer is required")
        for a, b in zip(layers, layers[1:]):
            if b.in_dim != a.out_dim:
                raise ArchitectureError(
                    f"layer shapes do not chain: {a.out_dim} -> {b.in_dim}"
                )
        if self.final.in_dim != layers[-1].out_dim or self.final.out_dim != 1:
            raise ArchitectureError("final map must send the last hidden layer to R")
        # (layer, neuron) pairs in lexicographic order; position p in a sign
        # sequence corresponds to layout[p].
        layout = tuple(
            (i + 1, j + 1)
            for i, layer in enumerate(layers)
            for j in range(layer.out_dim)
        )
        offsets = []
        total = 0
        for layer in layers:
            offsets.append(total)
            total += layer.out_dim
        object.__setattr__(self, "_layout", layout)
        object.__setattr__(self, "_offsets", tuple(offsets))

    @property
    def arch(self) -> Architecture:
        return Architecture((self.n0,) + tuple(l.out_dim for l in self.layers))

    @property
    def n0(self) -> int:
        return self.layers[0].in_dim

    @property
    def m(self) -> int:
        return len(self.layers)

    @property
    def total_neurons(self) -> int:
        return len(self._layout)

    @property
    def layout(self) -> tuple:
        return self._layout

    def pos(self, i: int, j: int) -> int:
        """Flat sign-sequence position of neuron j in layer i (both 1-based)."""
        if not (1 <= i <= self.m) or not (1 <= j <= self.layers[i - 1].out_dim):
            raise DimensionError(f"neuron index ({i}, {j}) out of range")
        return self._offsets[i - 1] + (j - 1)

    def ij(self, pos: int) -> tuple:
        return self._layout[pos]

    def _check_input(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n0,):
            raise DimensionError(f"expected a point in R^{self.n0}, got shape {x.shape}")
        return x

    def preactivations(self, x) -> list:
        """Pre-activation vectors of every hidden layer at x."""
        x = self._check_input(x)
        pre = []
        h = x
        for layer in self.layers:
            z = layer(h)
            pre.append(z)
            h = np.maximum(z, 0.0)
        return pre

    def evaluate(self, x) -> float:
        """F(x) = G(ReLU(A_m(... ReLU(A_1(x)) ...)))."""
        x = self._check_input(x)
        h = x
        for layer in self.layers:
            h = np.maximum(layer(h), 0.0)
        return float(self.final(h)[0])

    def node_map(self, i: int, j: int, x) -> float:
        """Pre-activation of neuron (i, j) at x (both indices 1-based)."""
        self.pos(i, j)  # range check
        return float(self.preactivations(x)[i - 1][j - 1])

    def sign_sequence_at(self, x, tol: float = 1e-9) -> Signs:
        """Sign word of all node maps at x.

        A value counts as zero when it is below ``tol`` times the infinity
        norm of the node map's affine row on the cell containing x.
        """
        if tol < 0:
            raise ValueError("tol must be >= 0")
        x = self._check_input(x)
        signs = []
        h = x
        jac = np.eye(self.n0)
        for layer in self.layers:
            z = layer(h)
            rows = layer.weights @ jac
            scale = np.maximum(np.abs(rows).max(axis=1), 1e-300)
            layer_signs = np.sign(z)
            layer_signs[np.abs(z) <= tol * scale] = 0.0
            signs.extend(int(s) for s in layer_signs)
            active = layer_signs > 0
            h = np.where(active, z, 0.0)
            jac = rows * active[:, None]
        return tuple(signs)


@dataclass(frozen=True)
class CellAffineForm:
    """Affine restrictions of the layer composites to one cell.

    ``per_layer_jacobians[i]``/``per_layer_biases[i]`` give the post-ReLU
    composite through layer i+1 (rows of inactive neurons masked to zero);
    ``pre_jacobians``/``pre_biases`` give the pre-activation node-map forms,
    which are what cell H-representations and vertex/edge systems use.
    """

    cell: Signs
    per_layer_jacobians: tuple
    per_layer_biases: tuple
    pre_jacobians: tuple
    pre_biases: tuple
    total_gradient: np.ndarray
    total_offset: float

    def node_row(self, i: int, j: int) -> tuple:
        """Affine form (row, offset) of node map (i, j) on this cell."""
        return self.pre_jacobians[i - 1][j - 1], float(self.pre_biases[i - 1][j - 1])


def _prefix_forms(net: ReluNetwork, signs: Signs) -> tuple:
    """Masked/pre affine forms for the layers covered by ``signs``.

    ``signs`` must end on a layer boundary; returns (preJ, preb, postJ, postb)
    lists, one entry per covered layer.
    """
    pre_j, pre_b, post_j, post_b = [], [], [], []
    jac = np.eye(net.n0)
    bias = np.zeros(net.n0)
    used = 0
    for layer in net.layers:
        n_i = layer.out_dim
        if used + n_i > len(signs):
            break
        s = np.asarray(signs[used : used + n_i])
        used += n_i
        pj = layer.weights @ jac
        pb = layer.weights @ bias + layer.bias
        active = (s > 0).astype(float)
        jac = pj * active[:, None]
        bias = pb * active
        pre_j.append(pj)
        pre_b.append(pb)
        post_j.append(jac)
        post_b.append(bias)
    if used != len(signs):
        raise DimensionError(
            f"sign sequence length {len(signs)} does not end on a layer boundary"
        )
    return pre_j, pre_b, post_j, post_b


def cell_affine_form(net: ReluNetwork, signs: Signs) -> CellAffineForm:
    """Affine restriction of F and its layer composites to the cell ``signs``.

    The restricted gradient is the final weights applied to the last masked
    composite; rows with pattern entry -1 or 0 are masked to zero (row
    selection realizes the ReLU of the sign diagonal).
    """
    if len(signs) != net.total_neurons:
        raise DimensionError(
            f"expected {net.total_neurons} sign entries, got {len(signs)}"
        )
    if any(s not in (-1, 0, 1) for s in signs):
        raise ValueError("sign entries must be -1, 0 or +1")
    pre_j, pre_b, post_j, post_b = _prefix_forms(net, signs)
    grad = (net.final.weights @ post_j[-1])[0]
    offset = float((net.final.weights @ post_b[-1] + net.final.bias)[0])
    return CellAffineForm(
        cell=tuple(signs),
        per_layer_jacobians=tuple(post_j),
        per_layer_biases=tuple(post_b),
        pre_jacobians=tuple(pre_j),
        pre_biases=tuple(pre_b),
        total_gradient=grad,
        total_offset=offset,
    )


def random_network(arch: Architecture, seed: int, scale: float = 1.0) -> ReluNetwork:
    """Gaussian-weight network, deterministic per seed.

    Weights and biases are i.i.d. standard normal times ``scale``; any
    continuous distribution makes the genericity conditions hold with
    probability one.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    if not isinstance(arch, Architecture):
        arch = Architecture(tuple(arch))
    rng = np.random.default_rng(seed)
    layers = []
    dims = arch.dims
    for n_in, n_out in zip(dims, dims[1:]):
        w = rng.standard_normal((n_out, n_in)) * scale
        b = rng.standard_normal(n_out) * scale
        layers.append(AffineLayer(w, b))
    w = rng.standard_normal((1, dims[-1])) * scale
    b = rng.standard_normal(1) * scale
    return ReluNetwork(tuple(layers), AffineLayer(w, b))


def net_b() -> ReluNetwork:
    """The NET-B fixture: F = ReLU(x) + 2 ReLU(y) + 4 ReLU(1 - x - y)."""
    return ReluNetwork(
        (AffineLayer([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]], [0.0, 0.0, 1.0]),),
        AffineLayer([[1.0, 2.0, 4.0]], [0.0]),
    )


def to_weight_dict(net: ReluNetwork) -> dict:
    """Weight-file form of a network (see the file schema in the README)."""
    return {
        "dims": list(net.arch.full()),
        "layers": [
            {"weights": layer.weights.tolist(), "bias": layer.bias.tolist()}
            for layer in net.layers
        ],
        "final": {
            "weights": net.final.weights.tolist(),
            "bias": net.final.bias.tolist(),
        },
    }


def from_weight_dict(data: dict) -> ReluNetwork:
    """Parse the weight-file schema, validating names and shapes."""
    if not isinstance(data, dict):
        raise ValueError("weight file must be a JSON object")
    for key in ("dims", "layers", "final"):
        if key not in data:
            raise ValueError(f"weight file missing field {key!r}")
    arch = Architecture.from_full(data["dims"])
    raw_layers = data["layers"]
    if len(raw_layers) != len(arch.hidden):
        raise ValueError(
            f"expected {len(arch.hidden)} hidden layers, got {len(raw_layers)}"
        )
    layers = []
    for k, entry in enumerate(raw_layers):
        layer = AffineLayer(entry["weights"], entry["bias"])
        expect = (arch.dims[k + 1], arch.dims[k])
        if layer.weights.shape != expect:
            raise ValueError(
                f"layer {k + 1} weights have shape {layer.weights.shape}, expected {expect}"
            )
        layers.append(layer)
    final = AffineLayer(data["final"]["weights"], data["final"]["bias"])
    if final.weights.shape != (1, arch.dims[-1]):
        raise ValueError(
            f"final weights have shape {final.weights.shape}, expected (1, {arch.dims[-1]})"
        )
    return ReluNetwork(tuple(layers), final)
