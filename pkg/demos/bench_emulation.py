"""Monte Carlo emulation of the bench demonstration.

Synthesizes quadrature records with the measured imperfections of the
experiment (mixed input, -4.5 dB ancilla, 96% visibility, detector
efficiencies, electronic noise), post-selects a posteriori on the gate
record, and estimates fidelity against the ideal squeezed transform of
the input.  The fidelity beats the classical bound of 0.8, and tightening
the window trades success probability for fidelity.
"""

import numpy as np

from cvpost import classical_limit
from cvpost.emulator import bench_params, predict_stats, run_experiment

base = bench_params(n_samples=4_000_000)
print("bench parameter set:")
print(f"  R = {base.R}, V_in = {base.v_in}, ancilla {base.anc_sqz_db} dB "
      f"(anti {base.anc_antisqz_db:+} dB assumed)")
print(f"  eta_vis = {base.eta_vis}, eta_det = {base.eta_det}, eta_hom = {base.eta_hom}")
print(f"  electronic noise {base.gate_elec_db} / {base.hom_elec_db} dB, "
      f"x0 = {base.x0} (SNL units of the gate record)\n")

stats = run_experiment(base)
pred = predict_stats(base)
print(f"at |gamma+| = {base.gamma_plus}:")
print(f"  fidelity    {stats.fidelity_est:.3f} +- {stats.fidelity_se:.3f}   "
      f"(closed-form prediction {pred.fidelity:.3f}, classical bound {classical_limit(base.R)})")
print(f"  gains       g+ = {stats.gains.g_plus:.3f}, g- = {stats.gains.g_minus:.3f} "
      f"(ideal {stats.gains.ideal_g_plus:.1f}, {stats.gains.ideal_g_minus:.1f})")
print(f"  variances   V_out = ({stats.v_out[0]:.2f}, {stats.v_out[1]:.2f})")
print(f"  purity_norm {stats.purity_norm:.3f} +- {stats.purity_norm_se:.3f}")
print(f"  success     {stats.success_prob:.4f} ({stats.n_selected} samples kept)\n")

print("fidelity and purity across input amplitudes (x0 fixed):")
print("  |gamma+|   fidelity   purity_norm")
for g in (0.18, 0.5, 1.0, 1.5, 2.03):
    probe = bench_params(gamma_plus=g)
    need = max(1_000_000, int(12_000 / predict_stats(probe).success_prob))
    run = run_experiment(bench_params(gamma_plus=g, n_samples=need))
    print(f"  {g:>6.2f}     {run.fidelity_est:.3f}      {run.purity_norm:.3f}")

print("\nfidelity versus success probability (|gamma+| = 1.07):")
print("  x0 (snl)   P_s        fidelity")
for x0 in (2.0, 1.0, 0.5, 0.2, 0.1, 0.05):
    run = run_experiment(bench_params(gamma_plus=1.07, x0=x0, n_samples=2_000_000))
    print(f"  {x0:>5.2f}     {run.success_prob:.4f}    {run.fidelity_est:.3f}")
print(f"\n(classical bound {classical_limit(base.R)}; tightening the window raises "
      "the fidelity monotonically at the cost of throughput)")
