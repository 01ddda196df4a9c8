"""Shared task-instance plumbing and run metrics."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

from ..grammar import csg_projection, parse_grammar, strip_annotations
from ..earley import accepts

TASK_IDS = (
    "anbncn",
    "ambncmdn",
    "copy",
    "sudoku3",
    "sudoku4",
    "graph3color",
    "blocksworld",
    "json",
)


@dataclass(frozen=True)
class TaskInstance:
    task: str
    instance_id: str
    prompt: str
    params: dict
    grammar_source: str

    def grammar(self):
        return parse_grammar(self.grammar_source)

    def to_json(self, grammar_path):
        return json.dumps(
            {
                "task": self.task,
                "instance_id": self.instance_id,
                "prompt": self.prompt,
                "params": self.params,
                "grammar_path": grammar_path,
            },
            indent=2,
            sort_keys=True,
        )


def save_instances(instances, directory):
    os.makedirs(directory, exist_ok=True)
    paths = []
    for inst in instances:
        gpath = os.path.join(directory, f"{inst.instance_id}.asg")
        with open(gpath, "w", encoding="utf-8") as fh:
            fh.write(inst.grammar_source)
        jpath = os.path.join(directory, f"{inst.instance_id}.json")
        with open(jpath, "w", encoding="utf-8") as fh:
            fh.write(inst.to_json(os.path.basename(gpath)))
        paths.append(jpath)
    return paths


def load_instance(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    gpath = os.path.join(os.path.dirname(path), doc["grammar_path"])
    with open(gpath, encoding="utf-8") as fh:
        source = fh.read()
    return TaskInstance(
        task=doc["task"],
        instance_id=doc["instance_id"],
        prompt=doc.get("prompt", ""),
        params=doc.get("params", {}),
        grammar_source=source,
    )


# ---------------------------------------------------------------------------
# Metrics.


@dataclass
class MetricsReport:
    n: int
    accuracy: float
    v_cfg: float
    v_csg: float
    v_sem: float
    mean_tokens: float
    mean_t_constraint: float
    empty: bool = False

    def row(self):
        if self.empty:
            return "n=0 (no results)"
        return (
            f"n={self.n}  A={self.accuracy:.1%}  V_CFG={self.v_cfg:.1%}  "
            f"V_CSG={self.v_csg:.1%}  V_SEM={self.v_sem:.1%}  "
            f"tokens={self.mean_tokens:.1f}  T_C={self.mean_t_constraint * 1000:.1f}ms"
        )


def score_run(grammar, results, rho_fn=None):
    """Aggregate validity / accuracy rates for one batch.

    ``results`` carry (terminals, outcome, rho, tokens, constraint time);
    validity levels use the stripped, annotation-only, and full grammars.
    """
    if not results:
        return MetricsReport(0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, empty=True)
    g_cfg = strip_annotations(grammar)
    g_csg = csg_projection(grammar)
    n = len(results)
    acc = v_cfg = v_csg = v_sem = 0
    tokens = 0.0
    t_constraint = 0.0
    for r in results:
        word = r.get("terminals")
        tokens += r.get("tokens", 0)
        t_constraint += r.get("t_constraint_ms", 0.0) / 1000.0
        completed = r.get("outcome") == "completed"
        if word is not None:
            word = tuple(word)
            if accepts(g_cfg, word):
                v_cfg += 1
            if accepts(g_csg, word):
                v_csg += 1
            if accepts(grammar, word):
                v_sem += 1
        rho = r.get("rho")
        if rho is None and rho_fn is not None and word is not None:
            rho = rho_fn(word)
        if completed and rho is not None and rho == 0:
            acc += 1
    return MetricsReport(
        n=n,
        accuracy=acc / n,
        v_cfg=v_cfg / n,
        v_csg=v_csg / n,
        v_sem=v_sem / n,
        mean_tokens=tokens / n,
        mean_t_constraint=t_constraint / n,
    )
