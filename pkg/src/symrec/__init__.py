"""symrec: a desk-scale laboratory for recovering low symmetric-rank tensors
from symmetric rank-one measurements.

Subpackages map one-to-one onto the pipeline:

- ``symtensor``:    compressed order-``ell`` symmetric tensors over R^d and
                    their exact algebra (apply, Frobenius, dense expansion).
- ``orthopoly``:    orthonormal polynomials from raw moments via Hankel
                    determinants; second-moment lower bounds.
- ``measurements``: log-concave sampling, labeled data generation, and
                    teacher-network tensorization.
- ``packing``:      Gilbert-Varshamov sign codebooks and low-rank packing
                    sets with exact Gram-based distances.
- ``recovery``:     ERM least squares, null-space witnesses, alternating
                    rank-r fitting, the uniqueness probe, and the
                    polarization decomposition.
- ``bounds``:       closed-form covering / anti-concentration / Fano
                    evaluators plus the Monte Carlo experiments that
                    confront them with simulation.
- ``cli``:          seeded experiment driver writing CSV + manifest reports.
"""

__version__ = "0.1.0"

from .errors import CapacityError, ExperimentError

__all__ = ["CapacityError", "ExperimentError", "__version__"]
