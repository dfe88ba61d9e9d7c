"""Exception taxonomy shared across the package.

Validation problems raise plain ``ValueError``; the classes below mark the
two failure modes the CLI distinguishes from bad input: resource limits and
broken experiment guarantees.
"""


class CapacityError(Exception):
    """An operation would exceed a configured size or exactness limit."""


class ExperimentError(Exception):
    """A seeded experiment violated a guarantee it is supposed to certify."""
