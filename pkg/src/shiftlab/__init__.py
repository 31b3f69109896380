"""shiftlab: exact computations on one-sided shift spaces.

Subpackages cover graph presentations and sofic language algebra
(:mod:`shiftlab.shift_core`), chain-component and cyclic decompositions
(:mod:`shiftlab.decomposition`), sliding block codes (:mod:`shiftlab.codes`),
inverse sequences and their image chains (:mod:`shiftlab.inverse_systems`),
component and cyclic towers (:mod:`shiftlab.towers`), constructive
distributionally scrambled tuples (:mod:`shiftlab.chaos`), and a brute-force
shadowing laboratory over finite systems (:mod:`shiftlab.shadow_lab`).
"""

__version__ = "0.1.0"
