"""addflow: gated LLM orchestration for iterative architecture design.

The package drives a model through a step-gated design workflow, keeps
every artifact under a snapshotting workspace store, and audits the
resulting document corpus for consistency defects.
"""

__version__ = "0.1.0"
