"""Regenerate golden FMX fixtures with the primary writer.

The exporter must be byte-compatible with files the analysis toolkit
produces, so these fixtures come from boundaryscope.write_fmx itself.
The array formulas are mirrored in ../fmx.test.ts; keep them in sync.

Run from this directory: python3 generate.py
"""

from pathlib import Path

import numpy as np

from boundaryscope import write_fmx

HERE = Path(__file__).resolve().parent


def cell(i: int, j: int) -> float:
    return ((i * 31 + j * 7) % 23 - 11) / 17


def grid(n: int, d: int) -> np.ndarray:
    return np.array([[cell(i, j) for j in range(d)] for i in range(n)], dtype=np.float64).reshape(n, d)


def main() -> None:
    small = grid(7, 3)
    small_labels = np.array([(i * 5 + 2) % 4 for i in range(7)])
    write_fmx(HERE / "small.fmx", small, small_labels, class_names=("alpha", "beta", "gamma", "delta"))

    write_fmx(HERE / "empty.fmx", grid(0, 5))

    wide = grid(6, 512)
    wide_labels = np.array([(i * 5 + 2) % 3 for i in range(6)])
    write_fmx(HERE / "wide.fmx", wide, wide_labels, class_names=("cat", "dog", "bird"))

    for name in ("small.fmx", "empty.fmx", "wide.fmx"):
        print(f"{name}: {(HERE / name).stat().st_size} bytes")


if __name__ == "__main__":
    main()
