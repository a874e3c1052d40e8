"""proviq: procedural video querying.

Answers zero-shot video queries by generating short programs over an API of
visual modules, then parsing, validating and executing them in a sandboxed
interpreter against pluggable visual backends (remote inference services or
deterministic mock worlds).
"""

from .config import EngineConfig
from .engine import Engine

__version__ = "0.1.0"

__all__ = ["Engine", "EngineConfig", "__version__"]
