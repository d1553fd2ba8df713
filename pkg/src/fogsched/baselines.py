"""Control baselines: uniform random placement and deadline-ordered greedy
placement by incremental completion time."""

from __future__ import annotations

import numpy as np

from .metrics import FitnessWeights, _evaluator, evaluate
from .model import Instance, build_assignment

__all__ = ["baseline_random", "baseline_greedy"]


def baseline_random(instance: Instance, seed: int, weights: FitnessWeights) -> tuple:
    rng = np.random.default_rng(seed)
    node_ids = sorted(n.id for n in instance.topology.nodes)
    mapping = {
        t.id: node_ids[int(rng.integers(0, len(node_ids)))] for t in instance.tasks
    }
    assignment = build_assignment(instance.tasks, mapping)
    return assignment, evaluate(instance, assignment, weights).fitness


def baseline_greedy(instance: Instance, weights: FitnessWeights) -> tuple:
    """Tasks in earliest-deadline order, each placed on the node giving it
    the smallest completion time under the queues built so far."""
    ev = _evaluator(instance)
    node_ids = sorted(n.id for n in instance.topology.nodes)
    node_idx = np.array([ev.node_index(nid) for nid in node_ids], dtype=np.intp)
    busy = np.zeros(len(node_ids))

    mapping = {}
    for task in sorted(instance.tasks, key=lambda t: (t.deadline, t.id)):
        g = ev.gateway[ev._task_index[task.id]]
        execution = task.length / ev.mips[node_idx] * 1000.0
        prop = ev.path_prop[g, node_idx]
        bw = ev.path_bw[g, node_idx]
        transmission = np.where(np.isinf(bw), 0.0, task.data_size / bw)
        completion = prop + transmission + execution + busy
        best = int(np.argmin(completion))  # argmin ties favor lower node id
        mapping[task.id] = node_ids[best]
        busy[best] += execution[best]

    assignment = build_assignment(instance.tasks, mapping)
    return assignment, evaluate(instance, assignment, weights).fitness
