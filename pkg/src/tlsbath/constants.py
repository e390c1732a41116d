"""Physical constants and unit conventions.

Internal unit system: lengths in um on the chip plane (depths in nm),
time in us, Hamiltonian matrix elements in rad/us, decay rates in 1/us.
Couplings coming out of the sampler are in rad/s (SI) and are converted
once, when the model matrices are assembled.
"""

HBAR = 1.054571817e-34  # J*s
DEBYE = 3.33564e-30  # C*m per Debye

# rad/s -> rad/us (same factor converts 1/s -> 1/us)
RADS_TO_RADUS = 1e-6

# TLS-TLS dipole interaction constant, rms angular average, J*m^3
C_RMS = 1.6e-48

DEFAULT_QUBIT_FREQ = 5e9  # Hz
