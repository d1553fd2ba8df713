"""Metric models: per-task response breakdown, deadline violation, node and
system energy, and the scalar fitness shared by every optimizer.

All evaluations are pure functions of (instance, assignment) and may run
concurrently against one shared instance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import Assignment, Instance

__all__ = [
    "ResponseBreakdown",
    "MetricsReport",
    "FitnessWeights",
    "Evaluator",
    "response_breakdown",
    "deadline_violation",
    "total_deadline_violation",
    "node_energy",
    "total_energy",
    "fitness",
    "evaluate",
    "calibrate_weights",
]


@dataclass(frozen=True)
class ResponseBreakdown:
    """One task's response-time decomposition; response is the exact sum of
    the four components."""

    task_id: int
    propagation: float
    transmission: float
    execution: float
    queue_wait: float
    response: float


@dataclass(frozen=True)
class MetricsReport:
    per_task: tuple
    dv_per_task: tuple
    dv_total: float
    energy_per_node: tuple  # (node_id, joules) pairs
    energy_total: float
    fitness: float
    response_total: float
    response_max: float

    def csv_row(self) -> dict:
        return {
            "dv_total": self.dv_total,
            "energy_total": self.energy_total,
            "response_total": self.response_total,
            "fitness": self.fitness,
        }

    def to_json(self) -> str:
        doc = {
            "dv_total": self.dv_total,
            "energy_total": self.energy_total,
            "response_total": self.response_total,
            "response_max": self.response_max,
            "fitness": self.fitness,
            "energy_per_node": [
                {"node_id": nid, "energy": e} for nid, e in self.energy_per_node
            ],
            "per_task": [
                {
                    "task_id": b.task_id,
                    "propagation": b.propagation,
                    "transmission": b.transmission,
                    "execution": b.execution,
                    "queue_wait": b.queue_wait,
                    "response": b.response,
                    "deadline_violation": dv,
                }
                for b, dv in zip(self.per_task, self.dv_per_task)
            ],
        }
        return json.dumps(doc, indent=2)


@dataclass(frozen=True)
class FitnessWeights:
    """Weights and reference scales for the three fitness terms; lower
    fitness is better."""

    w_response: float = 1.0
    w_deadline: float = 1.0
    w_energy: float = 1.0
    norm_response: float = 1.0
    norm_deadline: float = 1.0
    norm_energy: float = 1.0

    def __post_init__(self):
        if self.w_response < 0 or self.w_deadline < 0 or self.w_energy < 0:
            raise ValueError("weights must be nonnegative")
        if self.w_response == self.w_deadline == self.w_energy == 0:
            raise ValueError("at least one weight must be positive")

    def combine(self, response_total: float, dv_total: float, energy_total: float) -> float:
        return (
            self.w_response * (response_total / self.norm_response)
            + self.w_deadline * (dv_total / self.norm_deadline)
            + self.w_energy * (energy_total / self.norm_energy)
        )


class Evaluator:
    """Precomputed fast path for evaluating many assignments against one
    instance.

    Routing is hop-count shortest path from each task's gateway to its node,
    computed once by breadth-first search with sorted-neighbor tie-breaks so
    path metrics are deterministic.
    """

    def __init__(self, instance: Instance):
        self.instance = instance
        nodes = instance.topology.nodes
        self.m = len(nodes)
        self._node_index = {n.id: k for k, n in enumerate(nodes)}
        self._node_ids = [n.id for n in nodes]

        self.mips = np.array([n.mips for n in nodes])
        self.active_power = np.array([n.active_power for n in nodes])
        self.idle_power = np.array([n.idle_power for n in nodes])
        self.alpha = np.array([n.alpha for n in nodes])
        self.beta = np.array([n.beta for n in nodes])

        tasks = instance.tasks
        self.n = len(tasks)
        self._task_index = {t.id: k for k, t in enumerate(tasks)}
        self.length = np.array([t.length for t in tasks])
        self.data_size = np.array([t.data_size for t in tasks])
        self.deadline = np.array([t.deadline for t in tasks])
        self.gateway = np.array(
            [self._node_index[instance.gateway_of(t)] for t in tasks], dtype=np.intp
        )

        self.path_prop, self.path_bw = self._route_all_pairs()

    def _route_all_pairs(self):
        adjacency = {k: [] for k in range(self.m)}
        for link in self.instance.topology.links:
            a = self._node_index.get(link.endpoints[0])
            b = self._node_index.get(link.endpoints[1])
            if a is None or b is None:
                continue
            adjacency[a].append((b, link.propagation_delay, link.bandwidth))
            adjacency[b].append((a, link.propagation_delay, link.bandwidth))
        for k in adjacency:
            adjacency[k].sort(key=lambda e: e[0])

        prop = np.full((self.m, self.m), np.inf)
        bw = np.full((self.m, self.m), np.inf)
        for src in range(self.m):
            prop[src, src] = 0.0
            frontier = [src]
            seen = {src}
            while frontier:
                nxt = []
                for u in frontier:
                    for v, p, b in adjacency[u]:
                        if v in seen:
                            continue
                        seen.add(v)
                        prop[src, v] = prop[src, u] + p
                        bw[src, v] = min(bw[src, u], b)
                        nxt.append(v)
                frontier = nxt
        return prop, bw

    def node_index(self, node_id: int) -> int:
        return self._node_index[node_id]

    def breakdowns(self, assignment: Assignment) -> list:
        """ResponseBreakdown for every task the assignment covers, in task-id
        order."""
        results = {}
        for node_id, sequence in assignment.order.items():
            j = self._node_index[node_id]
            busy = 0.0
            for task_id in sequence:
                i = self._task_index[task_id]
                g = self.gateway[i]
                execution = self.length[i] / self.mips[j] * 1000.0
                prop = float(self.path_prop[g, j])
                if math.isinf(prop):
                    raise ValueError(
                        f"no route from gateway of task {task_id} to node {node_id}"
                    )
                bw = self.path_bw[g, j]
                transmission = 0.0 if math.isinf(bw) else float(self.data_size[i] / bw)
                breakdown = ResponseBreakdown(
                    task_id=task_id,
                    propagation=prop,
                    transmission=transmission,
                    execution=float(execution),
                    queue_wait=busy,
                    response=float(prop + transmission + execution + busy),
                )
                results[task_id] = breakdown
                busy += execution
        return [results[t] for t in sorted(results)]

    def report(self, assignment: Assignment, weights: FitnessWeights) -> MetricsReport:
        per_task = self.breakdowns(assignment)
        dv_per_task = tuple(
            max(0.0, b.response - self.instance.task(b.task_id).deadline)
            for b in per_task
        )
        dv_total = 0.0
        for dv in dv_per_task:
            dv_total += dv
        response_total = 0.0
        response_max = 0.0
        for b in per_task:
            response_total += b.response
            response_max = max(response_max, b.response)

        horizon = response_max  # global makespan; idle-energy window
        busy = {nid: 0.0 for nid in self._node_ids}
        for b in per_task:
            busy[assignment.mapping[b.task_id]] += b.execution
        energy_per_node = []
        energy_total = 0.0
        for nid in self._node_ids:
            e = self._node_energy(nid, busy[nid], horizon)
            energy_per_node.append((nid, e))
            energy_total += e

        fit = weights.combine(response_total, dv_total, energy_total)
        return MetricsReport(
            per_task=tuple(per_task),
            dv_per_task=dv_per_task,
            dv_total=dv_total,
            energy_per_node=tuple(energy_per_node),
            energy_total=energy_total,
            fitness=fit,
            response_total=response_total,
            response_max=response_max,
        )

    def _node_energy(self, node_id: int, busy_ms: float, horizon: float) -> float:
        if horizon < busy_ms - 1e-9:
            raise ValueError(
                f"horizon {horizon} ms shorter than node {node_id} busy time {busy_ms} ms"
            )
        node = self.instance.node(node_id)
        idle_ms = max(0.0, horizon - busy_ms)
        return (
            node.alpha * node.active_power * busy_ms / 1000.0
            + node.beta * node.idle_power * idle_ms / 1000.0
        )

    # ------------------------------------------------------------------
    # Vectorized sub-problem objective used inside optimizer loops.

    def subset_context(self, task_ids: Sequence[int]):
        """Freeze the per-subset arrays (EDF visit order included) so the
        per-candidate evaluation below is cheap."""
        idx = np.array([self._task_index[t] for t in task_ids], dtype=np.intp)
        edf = np.lexsort((np.array(task_ids), self.deadline[idx]))
        return _SubsetContext(
            evaluator=self,
            task_idx=idx,
            edf_order=edf,
            gateway=self.gateway[idx],
            length=self.length[idx],
            data_size=self.data_size[idx],
            deadline=self.deadline[idx],
        )


@dataclass
class _SubsetContext:
    evaluator: Evaluator
    task_idx: np.ndarray
    edf_order: np.ndarray
    gateway: np.ndarray
    length: np.ndarray
    data_size: np.ndarray
    deadline: np.ndarray

    def objectives(self, node_idx: np.ndarray):
        """(response_total, response_max, dv_total, energy_total) of mapping
        the subset's tasks onto ``node_idx`` (node array indices)."""
        ev = self.evaluator
        execution = self.length / ev.mips[node_idx] * 1000.0
        prop = ev.path_prop[self.gateway, node_idx]
        bw = ev.path_bw[self.gateway, node_idx]
        transmission = np.where(np.isinf(bw), 0.0, self.data_size / bw)

        queue = np.zeros(len(execution))
        busy = np.zeros(ev.m)
        for k in self.edf_order:
            j = node_idx[k]
            queue[k] = busy[j]
            busy[j] += execution[k]

        response = prop + transmission + execution + queue
        response_total = float(response.sum())
        response_max = float(response.max()) if len(response) else 0.0
        dv_total = float(np.maximum(0.0, response - self.deadline).sum())
        horizon = response_max
        energy_total = float(
            (
                ev.alpha * ev.active_power * busy
                + ev.beta * ev.idle_power * (horizon - busy)
            ).sum()
            / 1000.0
        )
        return response_total, response_max, dv_total, energy_total

    def fitness(self, node_idx: np.ndarray, weights: FitnessWeights) -> float:
        r, _, dv, e = self.objectives(node_idx)
        return weights.combine(r, dv, e)


# ---------------------------------------------------------------------------
# Operation-level API


def response_breakdown(instance: Instance, assignment: Assignment, task_id: int) -> ResponseBreakdown:
    if task_id not in assignment.mapping:
        raise KeyError(f"unknown task id {task_id}")
    node_id = assignment.mapping[task_id]
    if node_id not in {n.id for n in instance.topology.nodes}:
        raise KeyError(f"task {task_id} assigned to nonexistent node {node_id}")
    for b in _evaluator(instance).breakdowns(assignment):
        if b.task_id == task_id:
            return b
    raise KeyError(f"unknown task id {task_id}")


def deadline_violation(breakdown: ResponseBreakdown, deadline: float) -> float:
    if deadline <= 0:
        raise ValueError("deadline must be > 0")
    return max(0.0, breakdown.response - deadline)


def total_deadline_violation(instance: Instance, assignment: Assignment) -> float:
    total = 0.0
    for b in _evaluator(instance).breakdowns(assignment):
        total += deadline_violation(b, instance.task(b.task_id).deadline)
    return total


def node_energy(instance: Instance, assignment: Assignment, node_id: int, horizon: float) -> float:
    ev = _evaluator(instance)
    busy = 0.0
    for b in ev.breakdowns(assignment):
        if assignment.mapping[b.task_id] == node_id:
            busy += b.execution
    return ev._node_energy(node_id, busy, horizon)


def total_energy(instance: Instance, assignment: Assignment, horizon: float) -> float:
    total = 0.0
    for node in instance.topology.nodes:
        total += node_energy(instance, assignment, node.id, horizon)
    return total


def fitness(instance: Instance, assignment: Assignment, weights: FitnessWeights) -> float:
    return evaluate(instance, assignment, weights).fitness


def evaluate(instance: Instance, assignment: Assignment, weights: FitnessWeights) -> MetricsReport:
    return _evaluator(instance).report(assignment, weights)


def _evaluator(instance: Instance) -> Evaluator:
    cached = getattr(instance, "_evaluator_cache", None)
    if cached is None:
        cached = Evaluator(instance)
        instance._evaluator_cache = cached
    return cached


def calibrate_weights(
    instance: Instance,
    w_response: float = 1.0,
    w_deadline: float = 1.0,
    w_energy: float = 1.0,
    seed: int = 0,
) -> FitnessWeights:
    """Normalize each fitness term by its value under a seeded random
    assignment, so the three terms are commensurate on this instance."""
    rng = np.random.default_rng(seed)
    node_ids = [n.id for n in instance.topology.nodes]
    mapping = {
        t.id: node_ids[int(rng.integers(0, len(node_ids)))] for t in instance.tasks
    }
    from .model import build_assignment

    report = evaluate(instance, build_assignment(instance.tasks, mapping), FitnessWeights())
    return FitnessWeights(
        w_response=w_response,
        w_deadline=w_deadline,
        w_energy=w_energy,
        norm_response=report.response_total if report.response_total > 0 else 1.0,
        norm_deadline=report.dv_total if report.dv_total > 0 else 1.0,
        norm_energy=report.energy_total if report.energy_total > 0 else 1.0,
    )
