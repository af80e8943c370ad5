"""Height function of an emission-ordered stabilizer state."""

import numpy as np

from ..convert import graph_to_stabilizer
from ..graphstate import GraphState
from ..tableau import gf2_rank


def height_function(target):
    """Entanglement profile ``h(0..n)`` across the emission-order cuts.

    ``h(x) = x - (number of independent stabilizers supported on the first
    x qubits)``, which equals ``rank(stabilizer columns of qubits x..n-1) + x - n``.

    Parameters
    ----------
    target : GraphState or CliffordTableau

    Returns
    -------
    list of int
        ``n + 1`` values with ``h[0] == h[n] == 0``.
    """
    t = graph_to_stabilizer(target) if isinstance(target, GraphState) else target
    n = t.n
    sx, sz = t.stabilizer_x, t.stabilizer_z
    h = []
    for x in range(n + 1):
        rest = np.hstack([sx[:, x:], sz[:, x:]])
        rank = gf2_rank(rest) if rest.size else 0
        h.append(int(rank + x - n))
    return h


def min_emitters(target):
    """Smallest emitter count for deterministic generation: ``max(h)``, at least one."""
    return max(1, max(height_function(target)))
