"""Quantum-chaos toolkit for a periodically kicked collective spin.

Subsystems: spin-J operators and coherent states (:mod:`.spin`), the
one-period Floquet operator and its spectrum (:mod:`.floquet`), spacing-ratio
statistics (:mod:`.spectral`), Husimi / multifractal phase-space measures
(:mod:`.phase_space`), the semiclassical stroboscopic map (:mod:`.classical`),
stroboscopic quantum dynamics (:mod:`.dynamics`), and the experiment CLI
(:mod:`.cli`).
"""

__version__ = "0.1.0"
