#!/usr/bin/env python3
"""Regenerate the committed alist files under codes/."""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from nrldpc.codes import irregular_rate_half_n1000, regular_3_6_n1008
from nrldpc.tanner import count_4cycles, save_alist


def main():
    out_dir = os.path.join(os.path.dirname(__file__), "..", "codes")
    os.makedirs(out_dir, exist_ok=True)
    for name, g in (
        ("regular_3_6_n1008.alist", regular_3_6_n1008()),
        ("irregular_r05_n1000.alist", irregular_rate_half_n1000()),
    ):
        path = os.path.join(out_dir, name)
        save_alist(g, path)
        print(
            f"{name}: N={g.n_vars} M={g.n_checks} edges={g.n_edges} "
            f"residual 4-cycles={count_4cycles(g)}"
        )


if __name__ == "__main__":
    main()
