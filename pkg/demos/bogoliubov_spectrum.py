"""Measure omega(k) of small waves on a uniform condensate and compare with the
closed-form Bogoliubov law, using the fluid engine and the wavefunction engine.

Runs a coarse grid so it finishes in a few seconds:  python3 demos/bogoliubov_spectrum.py
"""
import numpy as np

from qhydro import PhysParams, bogoliubov_omega, measure_dispersion

# hbar = m = rho0 = 1 and c_s = 1
params = PhysParams(scatter_len=1 / (4 * np.pi))
modes = [1, 2, 3, 4]

hydro = measure_dispersion("nonlinear_hydro_gp", modes, 1e-3, params, n_points=64, periods=2)
gp = measure_dispersion("gp_oracle", modes, 1e-3, params, n_points=64, periods=2)

print(f"{'k':>4} {'closed form':>12} {'fluid':>12} {'wavefunction':>13} {'sound only':>11}")
for k, w_h, w_g in zip(hydro.k, hydro.omega_measured, gp.omega_measured):
    exact = bogoliubov_omega(np.array([k]), params)[0]
    print(f"{k:4.0f} {exact:12.6f} {w_h:12.6f} {w_g:13.6f} {k * params.sound_speed:11.6f}")

# where the k^2 and k^4 branches cross
healing = params.hbar / (params.mass * params.sound_speed * np.sqrt(2))
print(f"\nhealing length {healing:.4f}; max rel err fluid {hydro.max_rel_err():.1e}, wavefunction {gp.max_rel_err():.1e}")
