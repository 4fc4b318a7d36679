"""Vector-controlled SPMSM drive simulation with hysteresis, SPWM, DPWM and
SVPWM inverter switching, plus harmonic and step-response analysis."""

__version__ = "0.1.0"
