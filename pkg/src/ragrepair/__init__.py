"""Retrieval-augmented repair harness for Java import compilation errors.

Subpackages are imported explicitly (``from ragrepair import corpus``,
``from ragrepair.vector_index import VectorIndex``, ...).  The top-level
module stays import-light so that helper executables such as the stub
compiler start quickly.
"""

__version__ = "0.1.0"
