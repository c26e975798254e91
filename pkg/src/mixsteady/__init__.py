"""mixsteady - steady reacting-mixture solver built on homotopy continuation."""
from __future__ import annotations

__version__ = "0.1.0"
