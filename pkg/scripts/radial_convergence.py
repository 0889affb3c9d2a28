"""Orthonormality error and one dipole element vs radial nodes per panel."""
import argparse
import math

from hydrogauge.basis import BasisSpec, QuantumNumbers, RadialGrid, build_basis, orthonormality_report
from hydrogauge.operators import matel_primitive


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=5)
    ap.add_argument("--panels", type=int, default=12)
    args = ap.parse_args()
    exact = 128 * math.sqrt(2) / 243
    r_max = 20.0 * args.n_max**2
    print("nodes_per_panel  max_overlap_error  |z_12 - exact|")
    for nodes in (4, 6, 8, 10, 12, 16, 20):
        grid = RadialGrid.geometric(r_max, n_panels=args.panels, nodes_per_panel=nodes)
        spec = BasisSpec(n_max=args.n_max, radial_grid=grid)
        err = orthonormality_report(spec)
        basis = build_basis(spec)
        z12 = matel_primitive("z", QuantumNumbers(1, 0, 0), QuantumNumbers(2, 1, 0), basis)
        print(f"{nodes:15d}  {err:17.3e}  {abs(z12 - exact):14.3e}")


if __name__ == "__main__":
    main()
