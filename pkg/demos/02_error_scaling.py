"""Error scaling of the reconstruction: the two Trotter knobs.

Two error sources dominate the reconstructed phase: the first-order
imaginary-time circuit contributes O(N t h^2), and the real-time Trotter
decomposition contributes O(N t^2 tau^p).  Each scaling is isolated by
making the other step tiny, and the phase error collapses when divided by
N h^2 (or N tau^p).
"""

import numpy as np

from loschmidt import (
    ExperimentConfig,
    oracle_phase_series,
    product_state,
    run_phase_experiment,
    tfim,
)


def max_phase_error(n, tau, h, t_max, order=2):
    spec = tfim(n, 1.0, 0.5)
    psi = product_state(["up"] * n)
    cfg = ExperimentConfig(spec=spec, psi=psi, tau=tau, h=h, t_max=t_max,
                           order=order, backend="statevector_trotter")
    trace = run_phase_experiment(cfg)
    _, phi_exact = oracle_phase_series(spec, psi, psi, trace.times)
    return np.max(np.abs(trace.phi - phi_exact))


print("imaginary-time error, tau = 0.01 fixed, t <= 2")
print("  N     h     max|dphi|   /(N h^2)")
for n in (4, 6, 8):
    errs = []
    for h in (0.05, 0.1, 0.2):
        err = max_phase_error(n, 0.01, h, 2.0)
        errs.append(err)
        print(f"  {n}   {h:4.2f}   {err:.3e}   {err / (n * h * h):.4f}")
    slope = np.polyfit(np.log([0.05, 0.1, 0.2]), np.log(errs), 1)[0]
    print(f"      fitted h-exponent: {slope:.2f}")

print()
print("real-time Trotter error, order 2, h = 0.01 fixed, t <= 5")
print("  N    tau    max|dphi|   /(N tau^2)")
for n in (4, 6, 8):
    errs = []
    for tau in (0.05, 0.1, 0.2):
        err = max_phase_error(n, tau, 0.01, 5.0)
        errs.append(err)
        print(f"  {n}   {tau:4.2f}   {err:.3e}   {err / (n * tau * tau):.4f}")
    slope = np.polyfit(np.log([0.05, 0.1, 0.2]), np.log(errs), 1)[0]
    print(f"      fitted tau-exponent: {slope:.2f}")
