"""Depolarizing noise and rescaling mitigation.

Single-qubit depolarizing noise (rate gamma per qubit after every circuit
layer) suppresses the measured survival probabilities roughly by the
probability (1-gamma)^(N D) that no error fired anywhere.  Dividing the
measured probabilities by that factor recovers the noiseless values as long
as errors rarely point back towards the target state.

Monte Carlo wavefunction trajectories unravel the channel exactly; the
run below mirrors the mitigation study at reduced size.
"""

import numpy as np

from loschmidt import (
    ExperimentConfig,
    NoiseConfig,
    product_state,
    run_phase_experiment,
    tfim,
)

N = 8
GAMMA = 3e-3
spec = tfim(N, 1.0, 0.5)
psi = product_state(["up"] * N)
kwargs = dict(spec=spec, psi=psi, tau=0.3, h=0.3, t_max=6.0, order=1)

noiseless = run_phase_experiment(
    ExperimentConfig(backend="statevector_trotter", **kwargs)
)
noisy = run_phase_experiment(
    ExperimentConfig(
        backend="noisy",
        noise=NoiseConfig(gamma=GAMMA, n_trajectories=1000, master_seed=7),
        **kwargs,
    )
)

print(f"N = {N}, gamma = {GAMMA}, tau = h = 0.3, 1000 trajectories")
print()
print("   t    r^2 noiseless   r^2 raw    r^2 mitigated   raw dev   mit dev")
r2_true = noiseless.r**2
for k in range(0, len(noisy), 2):
    raw = noisy.r_squared_raw[k]
    mit = noisy.r[k] ** 2
    print(f"{noisy.times[k]:5.1f}     {r2_true[k]:8.4f}    {raw:8.4f}     {mit:8.4f}"
          f"      {abs(raw - r2_true[k]):7.4f}   {abs(mit - r2_true[k]):7.4f}")

raw_dev = np.abs(noisy.r_squared_raw - r2_true)
mit_dev = np.abs(noisy.r**2 - r2_true)
print()
print(f"max deviation unmitigated: {raw_dev.max():.4f}")
print(f"max deviation mitigated:   {mit_dev.max():.4f}")
print()
print("note: the residual mitigated deviation at early times is a bias of")
print("the rescaling premise itself; sigma-z errors on the still-polarized")
print("state do not reduce the survival probability, so dividing by the")
print("full no-error probability over-corrects there.")
