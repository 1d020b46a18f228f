#!/usr/bin/env python3
"""Compare a hierarchical model against its flattening at growing bounds.

Flattening re-expands the chained-precedence constraint per member, but the
per-activation cardinality context is lost: the probe prints both bounded
languages side by side and the first trace separating them.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from hidec import dsl
from hidec.analysis import bounded_equivalent, enumerate_language, inline_subprocess

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def fmt(trace) -> str:
    return " ".join(trace) if trace else "<empty>"


def main() -> int:
    hier = dsl.load_model(str(FIXTURES / "nested_cardinality.dpm"))
    result = inline_subprocess(hier, "C", 4, 2)
    flat = result.flat
    print("flattened rewrite:")
    print(dsl.serialize_model(flat))

    for max_leaf in range(0, 7):
        lh = enumerate_language(hier, max_leaf, 2).traces
        lf = enumerate_language(flat, max_leaf, 2).traces
        verdict = bounded_equivalent(hier, flat, max_leaf, 2)
        tag = "equivalent" if verdict.equivalent_up_to_k else f"differs ({fmt(verdict.counterexample)})"
        print(f"leaf<={max_leaf}: hierarchical={len(lh):3d} traces, flat={len(lf):3d} traces -> {tag}")

    print()
    only_hier = sorted(
        enumerate_language(hier, 4, 2).traces - enumerate_language(flat, 4, 2).traces,
        key=lambda t: (len(t), t),
    )
    print("accepted only by the hierarchical model (leaf<=4):")
    for t in only_hier:
        print(f"  {fmt(t)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
