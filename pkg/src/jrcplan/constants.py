"""Physical constants, SI units."""

C_LIGHT = 299792458.0        # speed of light, m/s
K_BOLTZMANN = 1.380649e-23   # Boltzmann constant, J/K
