"""Numerical core: subsolvers, continuation driver, diagnostics."""
from __future__ import annotations
