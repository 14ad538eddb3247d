import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nrldpc import from_dense, random_graph

# H = [[1,1,0],[0,1,1]]: the 2x3 worked example used across the suite
H_2X3 = np.array([[1, 1, 0], [0, 1, 1]], dtype=np.uint8)

# (7,4) Hamming code parity-check matrix
H_HAMMING = np.array(
    [
        [1, 0, 1, 0, 1, 0, 1],
        [0, 1, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ],
    dtype=np.uint8,
)

ALIST_2X3 = """3 2
2 2
1 2 1
2 2
1
1 2
2
1 2
2 3
"""


@pytest.fixture
def g23():
    return from_dense(H_2X3)


@pytest.fixture
def g_hamming():
    return from_dense(H_HAMMING)


@pytest.fixture
def g_small_regular():
    # (2,3)-regular: 18 variables, 12 checks; cycles present
    return random_graph(18, 12, 2, 3, seed=7)
