"""certlab: a numerical laboratory for decisional-certainty trade-offs.

Submodules:

* ``categorical``: distributions, divergences, and the certainty bounds.
* ``dag``: decision-graph exploration testbed with exact oracles.
* ``dynamics``: discrete argmax-reset chains, continuous noise
  accumulation, and the ranking-retention curve.
* ``cib``: discrete conditional information-bottleneck solver.
* ``curriculum``: the three-state shortcut-vs-expert training world.
* ``experiments`` / ``cli``: reproducible experiment harness.
"""

__version__ = "0.1.0"

from . import categorical, cib, curriculum, dag, dynamics  # noqa: F401
