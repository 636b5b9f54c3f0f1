"""Polynomial-vector-field models: growth vectors, the canonical extension
recursion, and the pointwise degree-one normalization."""

from .spec import (
    FrameError,
    FrameSpec,
    MovingFrame,
    NotBracketGenerating,
    SymbolMismatch,
    growth_vector,
)
from .gauge import NormalizedFrame
