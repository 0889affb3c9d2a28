"""Post-pulse gauge discrepancy of the truncated-basis propagator vs basis size."""
import argparse

from hydrogauge.basis import BasisSpec, QuantumNumbers, build_basis
from hydrogauge.fields import GaugeFunction, Poly, TimeBasis, builtin_gauge, gauge_transform, make_envelope
from hydrogauge.oracle import PropagationGrid, gauge_discrepancy_probe


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=1e-2)
    ap.add_argument("--n-max", type=int, nargs="*", default=[2, 3, 4, 5])
    args = ap.parse_args()
    env = make_envelope("trapezoid", t1=0.0, t1_plus=20.0, t2_minus=80.0, t2=100.0)
    S = builtin_gauge("MAGNETIC_SYMMETRIC", env, args.eps)
    G = gauge_transform(S, GaugeFunction(Poly.monomial((1, 1, 0), 0.5 * args.eps, (TimeBasis(env, 0),))))
    print(f"{'n_max':>5s} {'post (A^2)':>12s} {'post (no A^2)':>14s} {'mid (A^2)':>12s}")
    for n in args.n_max:
        pr = gauge_discrepancy_probe(S, G, build_basis(BasisSpec(n_max=n)), QuantumNumbers(2, 0, 0),
                                     PropagationGrid(-5.0, 105.0))
        print(f"{n:5d} {pr.max_post[True]:12.3e} {pr.max_post[False]:14.3e} {pr.max_mid[True]:12.3e}")


if __name__ == "__main__":
    main()
