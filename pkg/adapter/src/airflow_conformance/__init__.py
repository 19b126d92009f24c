"""Real-platform conformance probe for generated DAG files."""

from .probe import ConformanceResult, check_conformance, main

__all__ = ["ConformanceResult", "check_conformance", "main"]
