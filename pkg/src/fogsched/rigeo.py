"""Two-stage orchestration: traffic-based node classes, deadline-based task
classes, the discrete eagle optimizer for the tight-deadline half and the
reward/penalty learner for the relaxed half, merged into one schedule."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from statistics import fmean
from typing import Optional

from .igeo import IgeoParams, igeo_optimize
from .metrics import FitnessWeights, MetricsReport, evaluate
from .model import Assignment, Instance, Topology, merge_assignments
from .rl import RlConfig, rl_optimize

__all__ = [
    "TrafficClassification",
    "DeadlinePartition",
    "classify_nodes",
    "reclassify",
    "partition_tasks",
    "rigeo_schedule",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrafficClassification:
    node_traffic: dict  # node id -> mean incident-link traffic
    average_traffic: float
    low_traffic_nodes: frozenset
    high_traffic_nodes: frozenset
    computed_at: int = 0


@dataclass(frozen=True)
class DeadlinePartition:
    deadline_threshold: float
    low_deadline_tasks: frozenset
    high_deadline_tasks: frozenset


def classify_nodes(topology: Topology, epoch: int = 0) -> TrafficClassification:
    """Split nodes at the mean of their per-node traffic; strictly below the
    mean is low traffic.  A node without links carries traffic 0."""
    if not topology.nodes:
        raise ValueError("topology has no nodes")
    incident = {node.id: [] for node in topology.nodes}
    for link in topology.links:
        for end in link.endpoints:
            if end in incident:
                incident[end].append(link.traffic_load)
    node_traffic = {
        nid: (fmean(loads) if loads else 0.0) for nid, loads in incident.items()
    }
    average = fmean(node_traffic.values())
    low = frozenset(nid for nid, tr in node_traffic.items() if tr < average)
    high = frozenset(node_traffic) - low
    return TrafficClassification(
        node_traffic=node_traffic,
        average_traffic=average,
        low_traffic_nodes=low,
        high_traffic_nodes=high,
        computed_at=epoch,
    )


def reclassify(
    classification: TrafficClassification,
    topology: Topology,
    epoch: Optional[int] = None,
) -> TrafficClassification:
    """Recompute the partition on current traffic loads and stamp the epoch."""
    if epoch is None:
        epoch = classification.computed_at + 1
    return classify_nodes(topology, epoch=epoch)


def partition_tasks(tasks, threshold_policy="mean") -> DeadlinePartition:
    """Split tasks at a deadline threshold; strictly below is low deadline.
    ``threshold_policy`` is either the string "mean" or an explicit
    threshold in milliseconds."""
    tasks = list(tasks)
    if not tasks:
        raise ValueError("task set must be nonempty")
    if threshold_policy == "mean":
        threshold = fmean(t.deadline for t in tasks)
    else:
        threshold = float(threshold_policy)
    low = frozenset(t.id for t in tasks if t.deadline < threshold)
    high = frozenset(t.id for t in tasks) - low
    return DeadlinePartition(
        deadline_threshold=threshold,
        low_deadline_tasks=low,
        high_deadline_tasks=high,
    )


def rigeo_schedule(
    instance: Instance,
    igeo_params: IgeoParams,
    rl_config: RlConfig,
    weights: FitnessWeights,
    threshold_policy="mean",
    summary_path=None,
) -> tuple:
    """Classify, partition, optimize both halves, merge, and re-evaluate the
    merged schedule jointly (so queue waits reflect all co-located tasks).

    An empty node class falls back to the full node set for its sub-problem.
    Returns (assignment, metrics report) for the merged schedule.
    """
    all_nodes = frozenset(n.id for n in instance.topology.nodes)
    if not instance.tasks:
        empty = Assignment(mapping={}, order={})
        return empty, evaluate(instance, empty, weights)

    classification = classify_nodes(instance.topology)
    partition = partition_tasks(instance.tasks, threshold_policy)

    low_nodes = classification.low_traffic_nodes
    high_nodes = classification.high_traffic_nodes
    if not low_nodes:
        logger.warning("no low-traffic nodes; tight-deadline tasks use all nodes")
        low_nodes = all_nodes
    if not high_nodes:
        logger.warning("no high-traffic nodes; relaxed-deadline tasks use all nodes")
        high_nodes = all_nodes

    parts = []
    igeo_fitness = None
    rl_fitness = None
    if partition.low_deadline_tasks:
        sub, igeo_fitness = igeo_optimize(
            instance, low_nodes, partition.low_deadline_tasks, igeo_params, weights
        )
        parts.append(sub)
    if partition.high_deadline_tasks:
        sub, rl_fitness = rl_optimize(
            instance, high_nodes, partition.high_deadline_tasks, rl_config, weights
        )
        parts.append(sub)

    merged = merge_assignments(instance.tasks, *parts)
    report = evaluate(instance, merged, weights)

    if summary_path is not None:
        _write_summary(
            summary_path, classification, partition, igeo_fitness, rl_fitness, report
        )
    return merged, report


def _write_summary(
    path,
    classification: TrafficClassification,
    partition: DeadlinePartition,
    igeo_fitness,
    rl_fitness,
    report: MetricsReport,
) -> None:
    doc = {
        "traffic": {
            "average": classification.average_traffic,
            "low_traffic_nodes": sorted(classification.low_traffic_nodes),
            "high_traffic_nodes": sorted(classification.high_traffic_nodes),
        },
        "deadline": {
            "threshold": partition.deadline_threshold,
            "low_deadline_tasks": sorted(partition.low_deadline_tasks),
            "high_deadline_tasks": sorted(partition.high_deadline_tasks),
        },
        "subproblem_fitness": {"igeo": igeo_fitness, "rl": rl_fitness},
        "merged_metrics": report.csv_row(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
