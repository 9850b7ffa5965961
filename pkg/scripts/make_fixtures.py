#!/usr/bin/env python3
"""Regenerate the canonical JSON fixtures under fixtures/."""
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from obliqueframes import canonical_oblique_dual  # noqa: E402
from obliqueframes.gallery import (  # noqa: E402
    full_space,
    mercedes_benz_frame,
    mercedes_benz_measure,
    skew_line_frames,
    skew_line_measures,
    skew_line_subspaces,
    standard_basis_frame,
)
from obliqueframes.serialize import serialize_fixture  # noqa: E402

OUT = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def main():
    os.makedirs(OUT, exist_ok=True)
    W, V = skew_line_subspaces()
    Fw, Fv = skew_line_frames()
    mu, nu, gamma = skew_line_measures()
    r2 = full_space(2)

    fixtures = {
        "skew_line_w.json": W,
        "skew_line_v.json": V,
        "skew_line_frame.json": Fw,
        "skew_line_pair.json": canonical_oblique_dual(Fw, V),
        "skew_line_mu.json": mu,
        "skew_line_nu.json": nu,
        "skew_line_product_coupling.json": gamma,
        "plane.json": r2,
        "mercedes_benz_frame.json": mercedes_benz_frame(),
        "mercedes_benz_pair.json": canonical_oblique_dual(
            mercedes_benz_frame(), r2),
        "mercedes_benz_measure.json": mercedes_benz_measure(),
        "standard_basis_2.json": standard_basis_frame(2),
    }
    for name, value in fixtures.items():
        path = os.path.join(OUT, name)
        serialize_fixture(value, path)
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
