"""Search cutoffs with an environment override.

The CITSOLVE_CUTOFF environment variable, when set to an integer, replaces
every atom-count cutoff for exhaustive searches.  The ultimate-operator
interval cutoff is a separate knob because it counts lattice elements, not
atoms.
"""

import os
from dataclasses import dataclass, replace

ENV_CUTOFF = "CITSOLVE_CUTOFF"

EXHAUSTIVE_ATOMS = 20
CI_TWO_VALUED_ATOMS = 16
CI_FOUR_VALUED_ATOMS = 10
ULTIMATE_INTERVAL = 2 ** 20
DETECT_MAX_STRATA = 256


@dataclass(frozen=True)
class Cutoffs:
    exhaustive_atoms: int = EXHAUSTIVE_ATOMS
    ci_two_valued_atoms: int = CI_TWO_VALUED_ATOMS
    ci_four_valued_atoms: int = CI_FOUR_VALUED_ATOMS
    ultimate_interval: int = ULTIMATE_INTERVAL
    detect_max_strata: int = DETECT_MAX_STRATA


def default_cutoffs() -> Cutoffs:
    """Cutoffs from defaults, with atom counts overridden by CITSOLVE_CUTOFF."""
    cutoffs = Cutoffs()
    env = os.environ.get(ENV_CUTOFF)
    if env:
        n = int(env)
        cutoffs = replace(
            cutoffs,
            exhaustive_atoms=n,
            ci_two_valued_atoms=n,
            ci_four_valued_atoms=n,
        )
    return cutoffs
