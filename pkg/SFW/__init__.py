# -*- coding: utf-8 -*-
"""
Symmetric forcing workbench.

The library
-----------
Finite posets and names with the forcing relation over them, groups of
automorphisms in an explicit (enumerated) and a symbolic (support-based)
form, normal filters of subgroups with omega_1-completion, symmetric
iterations of countable support, hereditarily symmetric names, and the
iterated Cohen-pair model with its certificates.

Every construction comes with an audit: filters are checked against the
filter axioms, stabilizers against the symmetry lemma, and certificates
can be replayed from their JSON alone by `PairsApp.verify_certificate`.

"""

from . import Exception
from . import Ordinal, Forcing, Groups, Filters, Iteration, HS, PairsApp, Scenario
from .__version__ import __version__

__all__ = ["Exception", "Ordinal", "Forcing", "Groups", "Filters", "Iteration", "HS", "PairsApp", "Scenario",
           "__version__"]
