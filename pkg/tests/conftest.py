import numpy as np
import pytest

from relumorse import (
    AffineLayer,
    Architecture,
    ReluNetwork,
    build_complex,
    net_b,
    random_network,
)
from relumorse.errors import StructuredError


def make_net_b_negated() -> ReluNetwork:
    base = net_b()
    return ReluNetwork(base.layers, AffineLayer([[-1.0, -2.0, -4.0]], [0.0]))


@pytest.fixture(scope="session")
def netb():
    return net_b()


@pytest.fixture(scope="session")
def cpx_b(netb):
    return build_complex(netb)


@pytest.fixture(scope="session")
def netb_neg():
    return make_net_b_negated()


@pytest.fixture(scope="session")
def cpx_b_neg(netb_neg):
    return build_complex(netb_neg)


def scan_generic_nets(arch, count, start_seed=0, scale=1.0):
    """First ``count`` seeds (ascending from start_seed) whose complexes build
    without structured errors; degenerate or flat draws are skipped."""
    out = []
    seed = start_seed
    while len(out) < count:
        net = random_network(Architecture(arch), seed=seed, scale=scale)
        try:
            cpx = build_complex(net)
        except StructuredError:
            seed += 1
            continue
        out.append((seed, net, cpx))
        seed += 1
    return out


def central_difference_gradient(net, x, h):
    """Finite-difference oracle for the gradient of F at x."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for axis in range(x.shape[0]):
        step = np.zeros_like(x)
        step[axis] = h
        grad[axis] = (net.evaluate(x + step) - net.evaluate(x - step)) / (2 * h)
    return grad
