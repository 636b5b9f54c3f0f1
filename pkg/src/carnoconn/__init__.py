"""Exact canonical connections and gradings for sub-Riemannian structures
with constant Carnot symbol.

Pipeline: build a Carnot algebra and its isometry extension (carnot),
materialize the graded cochain complex with its Spencer and base
differentials (cochain), solve the degree-one normalization (normalize),
and run the manifold-level extension/normalization on polynomial
vector-field models (frames).  The cli module ties these together with
deterministic JSON reports.
"""

__version__ = "0.1.0"
