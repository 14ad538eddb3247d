"""Named harness codes.

The decoders are code-agnostic; these constructors pin the two codes the
test and benchmark suites use, so CSV artifacts and alist files can be
regenerated byte-identically. The irregular profile is this harness's own
choice of a rate-1/2 ensemble (mild degree spread, 4-cycle free at the
default seed); it does not claim to match any published distribution.
"""

from __future__ import annotations

from .tanner import TannerGraph, random_graph

IRREGULAR_VAR_DEGREES = [2] * 400 + [3] * 300 + [4] * 200 + [8] * 100
IRREGULAR_CHECK_DEGREES = [6] * 200 + [7] * 300


def regular_3_6_n1008(seed: int = 1) -> TannerGraph:
    """(3,6)-regular rate-1/2 code, N=1008, M=504, 3024 edges."""
    return random_graph(1008, 504, 3, 6, seed=seed)


def irregular_rate_half_n1000(seed: int = 17) -> TannerGraph:
    """Irregular rate-1/2 code, N=1000, M=500, variable degrees 2..8."""
    return random_graph(
        1000, 500, IRREGULAR_VAR_DEGREES, IRREGULAR_CHECK_DEGREES, seed=seed
    )
