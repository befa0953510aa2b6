"""c2u: repository-to-UML toolchain.

Pipeline: multi-language extraction into a normalized intermediate
representation, deterministic byte-bounded view compaction per diagram
type, agent-orchestrated PlantUML generation over a pluggable model
backend, deterministic lint/correction, and automated quality metrics.
"""

__version__ = "0.1.0"
