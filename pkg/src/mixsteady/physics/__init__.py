"""Domain models, constitutive closures and the discrete grid."""
from __future__ import annotations
