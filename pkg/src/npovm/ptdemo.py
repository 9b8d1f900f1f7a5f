"""Built-in two-qubit partial-transpose demonstration instance.

The family {N0 = SWAP, N1 = 2|psi-><psi-|} sums to the identity with N0 not
PSD, yet both effects are positive on PPT states.  Post-selecting the POVM
{M0, M1, M2} reproduces the family on partial-transpose-invariant states and
discriminates two non-orthogonal states perfectly with acceptance 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bridge import Decomposition
from .hermitian import partial_transpose
from .measurement import Measurement
from .supermap import identity_map, partial_transpose_map

DIMS = (2, 2)
DIM = 4

N0 = np.array(
    [
        [1, 0, 0, 0],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
    ],
    dtype=complex,
)

N1 = np.array(
    [
        [0, 0, 0, 0],
        [0, 1, -1, 0],
        [0, -1, 1, 0],
        [0, 0, 0, 0],
    ],
    dtype=complex,
)

# Gamma(N0): the four-corner matrix (twice the |Phi+> projector).
GAMMA_N0 = partial_transpose(N0, DIMS)

M0 = GAMMA_N0 / 2.0
M1 = N1 / 2.0
M2 = np.eye(4, dtype=complex) - M0 - M1

M2_EXPECTED = 0.5 * np.array(
    [
        [1, 0, 0, -1],
        [0, 1, 1, 0],
        [0, 1, 1, 0],
        [-1, 0, 0, 1],
    ],
    dtype=complex,
)

RHO0 = np.zeros((4, 4), dtype=complex)
RHO0[0, 0] = 1.0

# Equal mixture of the singlet and |Phi-> Bell states: PPT-invariant, gives
# outcome probabilities (0, 1) under the family, non-orthogonal to RHO0.
RHO1 = 0.25 * np.array(
    [
        [1, 0, 0, -1],
        [0, 1, -1, 0],
        [0, -1, 1, 0],
        [-1, 0, 0, 1],
    ],
    dtype=complex,
)


@dataclass(eq=False)
class DemoInstance:
    family: Measurement
    povm: Measurement
    decomposition: Decomposition
    states: list[np.ndarray]
    c_expected: float
    acceptance_expected: float
    bound: float


def demo_family() -> Measurement:
    return Measurement.create([("0", N0), ("1", N1)])


def demo_povm() -> Measurement:
    return Measurement.create([("0", M0), ("1", M1), ("2", M2)])


def demo_decomposition() -> Decomposition:
    gamma = partial_transpose_map(*DIMS)
    return Decomposition(
        dim=DIM,
        labels=("0", "1"),
        terms={
            "0": [(gamma, GAMMA_N0)],
            "1": [(identity_map(DIM), N1)],
        },
    )


def demo_instance() -> DemoInstance:
    return DemoInstance(
        family=demo_family(),
        povm=demo_povm(),
        decomposition=demo_decomposition(),
        states=[RHO0.copy(), RHO1.copy()],
        c_expected=2.0,
        acceptance_expected=0.5,
        bound=0.25,
    )

