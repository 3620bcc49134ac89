"""Exact computations with Prym eigenforms in genus three.

The package is organised bottom-up: ``qfield`` (exact real quadratic
arithmetic), ``surface`` (polygonal translation surfaces), ``homology``,
``prym`` (prototypes, real multiplication, component invariant),
``geodesics`` (saddle connections and cylinders), ``deform`` (kernel
foliation moves and surgeries) and ``cli``.
"""

__version__ = "0.1.0"
