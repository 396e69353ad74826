#!/usr/bin/env python3
"""Measured vs predicted spin precession across the eigenvalue grid.

For states with eigenvalues {lam, 1-lam} in a field H = -mu sigma_z the
precession rate is 2*mu*(f(lam)-f(1-lam))/(2*lam-1); only pure states
(lam = 1) precess at the deformation-independent 2*mu.
"""
import argparse

import numpy as np

from nvne.deformation import PowerLaw
from nvne.dynamics import IntegratorConfig, evolve, larmor_frequency, precession_frequency
from nvne.hermitian import SIGMA_Z, bloch_state


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--q", type=float, nargs="*", default=[1.0, 2.0, 3.0])
    parser.add_argument("--mu", type=float, default=1.0)
    parser.add_argument("--dt", type=float, default=1e-3)
    parser.add_argument("--t-final", type=float, default=5.0)
    args = parser.parse_args()

    lams = np.arange(0.55, 0.999, 0.05)
    cfg = IntegratorConfig(dt=args.dt, t_final=args.t_final)
    h = -args.mu * SIGMA_Z
    print(f"{'q':>5} {'lam':>6} {'measured':>14} {'predicted':>14} {'rel err':>10}")
    for q in args.q:
        f = PowerLaw(q=q)
        for lam in lams:
            rho = bloch_state(lam=float(lam), phi=np.pi / 2, psi=0.0)
            traj = evolve(rho, h, f, cfg)
            measured = precession_frequency(traj, (0, 1))
            predicted = larmor_frequency(float(lam), f, args.mu)
            rel = abs(measured - predicted) / predicted
            print(f"{q:5.2f} {lam:6.2f} {measured:14.9f} {predicted:14.9f} {rel:10.2e}")


if __name__ == "__main__":
    main()
