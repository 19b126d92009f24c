"""dagforge: compile natural-language pipeline descriptions into scored Airflow DAGs.

Stage chain: description -> analysis artifact (JSON) -> workflow spec (YAML)
-> DAG script (templated / hybrid / LLM-chained / direct) -> penalized
evaluation (static analysis, structure, platform conformance), with a
record/replay LLM gateway, token ledger, judge-based fidelity assessment and
an experiment-matrix harness.
"""

__version__ = "0.1.0"
