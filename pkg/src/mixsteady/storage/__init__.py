"""Field, report and ledger serialization."""
from __future__ import annotations
