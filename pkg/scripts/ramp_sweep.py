"""Classical final Delta E and Delta L_z vs ramp time, both magnetic gauges."""
import argparse

import numpy as np

from hydrogauge import classical as cl


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=1e-3)
    ap.add_argument("--e", type=float, default=0.3, help="orbit eccentricity")
    ap.add_argument("--ramps", type=float, nargs="*", default=list(np.geomspace(0.01, 50, 12)))
    args = ap.parse_args()
    orbit = cl.OrbitSpec(e=args.e)
    print(f"{'gauge':20s} {'ramp/T':>9s} {'dE':>12s} {'dLz':>12s} {'tau_E':>12s} {'tau_B':>12s}")
    for gauge in ("MAGNETIC_SYMMETRIC", "MAGNETIC_LANDAU"):
        for r in cl.ramp_sweep(orbit, args.eps, args.ramps, cl.PulseSpec(gauge=gauge)):
            print(f"{gauge:20s} {r.ramp_periods:9.3g} {r.delta_E:12.4e} {r.delta_Lz:12.4e} "
                  f"{r.torque_E:12.4e} {r.torque_B:12.4e}")


if __name__ == "__main__":
    main()
