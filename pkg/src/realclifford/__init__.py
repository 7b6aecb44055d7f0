"""Random real (orthogonal) Clifford circuits: simulation, exact theory, experiments.

Subpackage layout:

- ``gf2``: bit-packed linear algebra over GF(2).
- ``pauli``: Pauli strings as bit pairs, products, commutation, Y-parity.
- ``tableau``: stabilizer tableau evolution under real Clifford gates.
- ``sampler``: uniform sampling of real and complex Clifford group elements.
- ``architectures``: circuit layouts (global, staircase, brickwork, glued).
- ``dense``: dense statevector reference engine for small systems.
- ``commutant``: Lagrangian subspace enumeration, Gram and Weingarten data.
- ``theory``: closed-form moment and distribution predictions.
- ``experiments``: reproducible Monte Carlo runs and theory comparison.
- ``acceptance``: end-to-end validation battery.
- ``cli``: command line entry point.
"""

__version__ = "0.1.0"
