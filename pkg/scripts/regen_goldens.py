"""Regenerate golden files checked by the test suite.

Run from the repository root after an intentional change to the descriptor
pipeline or the PGM writer:

    python scripts/regen_goldens.py

The golden PGM is backend-independent: the saddle right-hand side is pure
polynomial arithmetic, for which the compiled kernel and the NumPy
fallback produce bit-identical trajectories.
"""

import pathlib

import ldesc
import ldesc.io as field_io

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"

GOLDEN_GRID = ldesc.GridSpec(-1.0, 1.0, -1.0, 1.0, 41, 41)
GOLDEN_TAU = 20.0


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    field = ldesc.linear_saddle(ldesc.SaddleParams(1.0, 1.0))
    m = ldesc.compute_field(field, GOLDEN_GRID, 0.0, GOLDEN_TAU)
    path = OUT / "golden_m_saddle_41.pgm"
    path.write_bytes(field_io.write_pgm(m))
    print(f"wrote {path} ({path.stat().st_size} bytes, backend {ldesc.BACKEND})")


if __name__ == "__main__":
    main()
