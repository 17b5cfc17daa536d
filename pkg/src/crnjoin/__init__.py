"""Reaction networks: gluing, joining, identifiability, steady-state invariants."""

from .errors import BudgetExceeded, CrnError, HypothesisError, InternalCheckError, NetworkError, ParseError
from .net import Complex, GlueKind, Model, Network, OneWayFlowSpec, Reaction, parse_file, parse_model, parse_network
from .poly import Poly, parse_poly

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "Complex",
    "CrnError",
    "GlueKind",
    "HypothesisError",
    "InternalCheckError",
    "Model",
    "Network",
    "NetworkError",
    "OneWayFlowSpec",
    "ParseError",
    "Poly",
    "Reaction",
    "parse_file",
    "parse_model",
    "parse_network",
    "parse_poly",
]
