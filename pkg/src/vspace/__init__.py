"""Verifiable anonymous election engine: crypto, identity, ledger, protocol, auditor, simulator."""

__version__ = "0.1.0"
