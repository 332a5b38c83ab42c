"""
omega_synth package initialization.

Reactive synthesis for extended-HOA parity automata and AIGER safety
specifications: game solving, controller synthesis, verification and
benchmarking.
"""

__version__ = "0.1.0"
