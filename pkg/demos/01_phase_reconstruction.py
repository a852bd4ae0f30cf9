"""Reconstruct the complex Loschmidt amplitude of an Ising chain.

The amplitude G(t) = <psi| exp(-iHt) |psi> of the all-up product state is
recovered from magnitude measurements alone: two extra circuits per time
step apply a rescaled imaginary-time step exp(+-hH) before the real-time
evolution, and the Cauchy-Riemann relation turns the measured magnitudes
into the phase derivative.  No ancilla, no controlled evolution.

Here everything runs on the dense statevector simulator with exact
measurement probabilities, and the result is compared against the exact
eigendecomposition.
"""

import numpy as np

from loschmidt import (
    ExperimentConfig,
    oracle_phase_series,
    product_state,
    run_phase_experiment,
    tfim,
)

N = 6
spec = tfim(N, J=1.0, g=0.5)
psi = product_state(["up"] * N)

config = ExperimentConfig(
    spec=spec,
    psi=psi,
    tau=0.01,       # Trotter step
    h=0.01,         # imaginary-time step of the phase circuits
    t_max=5.0,
    order=2,
    backend="statevector_trotter",
)
trace = run_phase_experiment(config)

r_exact, phi_exact = oracle_phase_series(spec, psi, psi, trace.times)
g_exact = r_exact * np.exp(1j * phi_exact)
err = np.abs(trace.g_complex - g_exact)

print(f"transverse-field Ising chain, N = {N}, J = 1, g = 0.5, all-up state")
print(f"grid: tau = {config.tau}, h = {config.h}, t <= {config.t_max}")
print(f"phase derivative at t = 0: {trace.dphi_dt[0]:+.4f}"
      f"  (expected -<H> = {+(N - 1) / 4:+.4f})")
print(f"max |G_reconstructed - G_exact| over the grid: {err.max():.2e}")
print()
print("   t       r(t)      phi(t)     Re G      Im G   |err|")
for k in range(0, len(trace), 50):
    print(f"{trace.times[k]:5.2f}  {trace.r[k]:8.5f}  {trace.phi[k]:+9.4f}"
          f"  {trace.g_complex[k].real:+8.5f}  {trace.g_complex[k].imag:+8.5f}"
          f"  {err[k]:.1e}")
