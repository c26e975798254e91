"""Allow running as python -m mixsteady."""
from __future__ import annotations

from mixsteady.main import app

app()
