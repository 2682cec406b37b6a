"""Run report emitted by the factorization drivers."""

import json
from dataclasses import dataclass, field


@dataclass
class FactorizationReport:
    """Per-run record: configuration echo, objective traces, costs, timing.

    init_trace holds the squared Frobenius objective after each placed
    transform during initialization; sweep_trace holds the epsilon_i values of
    the iteration loop (entry 0 is the post-initialization objective).  Both
    are absolute squared errors; final_rel_error_sq is normalized by the
    squared Frobenius norm of the input.
    """

    kind: str
    n: int
    budget: int
    spectrum_rule: str
    mode: str
    eps: float
    init_trace: list = field(default_factory=list)
    sweep_trace: list = field(default_factory=list)
    final_error_sq: float = 0.0
    final_rel_error_sq: float = 0.0
    flops: int = 0
    wall_time_s: float = 0.0
    sweeps_run: int = 0
    stopped_by: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "budget": self.budget,
            "spectrum_rule": self.spectrum_rule,
            "mode": self.mode,
            "eps": self.eps,
            "init_trace": [float(v) for v in self.init_trace],
            "sweep_trace": [float(v) for v in self.sweep_trace],
            "final_error_sq": float(self.final_error_sq),
            "final_rel_error_sq": float(self.final_rel_error_sq),
            "flops": int(self.flops),
            "wall_time_s": float(self.wall_time_s),
            "sweeps_run": int(self.sweeps_run),
            "stopped_by": self.stopped_by,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)
