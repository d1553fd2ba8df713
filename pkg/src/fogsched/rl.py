"""Reward/penalty assigner for relaxed-deadline tasks.

The learner keeps one preference distribution over candidate nodes per task
(a learning-automata formulation: a value table over whole assignment arrays
would be astronomically large).  Each episode samples a fresh assignment,
compares its fitness to the previous one, and reinforces or decays the
chosen node of every task accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .geo import _SubProblem
from .metrics import FitnessWeights
from .model import Assignment, Instance, build_assignment

__all__ = ["RlConfig", "PolicyState", "rl_init", "rl_episode", "rl_optimize"]


@dataclass(frozen=True)
class RlConfig:
    episodes: int = 2000
    learning_rate: float = 0.05
    exploration_rate: float = 0.3
    exploration_decay: float = 0.995
    reward_value: float = 1.0
    penalty_value: float = 0.1
    probability_floor: float = 0.01
    rng_seed: int = 0

    def __post_init__(self):
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if not 0.0 <= self.exploration_rate <= 1.0:
            raise ValueError("exploration_rate must be in [0, 1]")
        if self.reward_value <= 0 or self.penalty_value <= 0:
            raise ValueError("reward_value and penalty_value must be positive")


@dataclass(frozen=True)
class PolicyState:
    task_ids: tuple
    candidate_nodes: tuple
    assignment: np.ndarray  # candidate index per task
    preference: np.ndarray  # per-task distribution over candidates
    best_seen: tuple  # (assignment array, fitness)
    fitness: float  # fitness of the current assignment
    exploration: float


def _floor_project(preference: np.ndarray, floor: float) -> np.ndarray:
    """Project each row onto the simplex slice {p: sum p = 1, p >= floor},
    preserving the relative ordering of the probability mass."""
    n, k = preference.shape
    floor = min(floor, 1.0 / k)
    excess = np.maximum(preference - floor, 0.0)
    totals = excess.sum(axis=1, keepdims=True)
    if (totals == 0.0).any():
        # rows with no mass above the floor fall back to uniform
        excess = np.where(totals == 0.0, 1.0, excess)
        totals = excess.sum(axis=1, keepdims=True)
    return floor + (1.0 - k * floor) * excess / totals


def rl_init(
    instance: Instance,
    tasks,
    candidate_nodes,
    config: RlConfig,
    weights: FitnessWeights,
) -> PolicyState:
    """Uniform preferences; the initial assignment is sampled from them."""
    task_ids = tuple(sorted(tasks))
    candidates = tuple(sorted(candidate_nodes))
    if not candidates:
        raise ValueError("candidate node set must be nonempty")
    rng = np.random.default_rng(config.rng_seed)
    k = len(candidates)
    n = len(task_ids)
    preference = np.full((n, k), 1.0 / k)
    if n == 0:
        empty = np.zeros(0, dtype=np.intp)
        return PolicyState(task_ids, candidates, empty, preference, (empty, 0.0), 0.0, config.exploration_rate)
    assignment = rng.integers(0, k, size=n, dtype=np.intp)
    problem = _SubProblem(instance, candidates, task_ids, weights)
    fit = problem.fitness_of(assignment)
    return PolicyState(
        task_ids=task_ids,
        candidate_nodes=candidates,
        assignment=assignment,
        preference=preference,
        best_seen=(assignment.copy(), fit),
        fitness=fit,
        exploration=config.exploration_rate,
    )


def _sample(state: PolicyState, config: RlConfig, rng: np.random.Generator) -> np.ndarray:
    n, k = state.preference.shape
    if rng.random() < state.exploration:
        new = state.assignment.copy()
        new[int(rng.integers(0, n))] = int(rng.integers(0, k))
        return new
    cum = np.cumsum(state.preference, axis=1)
    u = rng.random(n)
    return np.minimum((cum < u[:, None]).sum(axis=1), k - 1).astype(np.intp)


def _update(state: PolicyState, sampled: np.ndarray, fit: float, config: RlConfig) -> PolicyState:
    n, k = state.preference.shape
    preference = state.preference.copy()
    rows = np.arange(n)
    lr = config.learning_rate
    if fit < state.fitness:
        chosen = preference[rows, sampled]
        preference *= 1.0 - lr
        preference[rows, sampled] = chosen + lr * (1.0 - chosen)
    else:
        decay = lr * config.penalty_value / config.reward_value
        preference[rows, sampled] *= 1.0 - decay
        preference /= preference.sum(axis=1, keepdims=True)
    preference = _floor_project(preference, config.probability_floor)

    best = state.best_seen
    if fit < best[1]:
        best = (sampled.copy(), fit)
    return replace(
        state,
        assignment=sampled,
        preference=preference,
        best_seen=best,
        fitness=fit,
        exploration=state.exploration * config.exploration_decay,
    )


def _episode(state, fitness_of, config, rng) -> PolicyState:
    if len(state.task_ids) == 0:
        return replace(state, exploration=state.exploration * config.exploration_decay)
    sampled = _sample(state, config, rng)
    return _update(state, sampled, fitness_of(sampled), config)


def rl_episode(
    state: PolicyState,
    instance: Instance,
    weights: FitnessWeights,
    config: RlConfig,
    rng: np.random.Generator,
) -> PolicyState:
    """One sample-evaluate-reinforce cycle."""
    if len(state.task_ids) == 0:
        return _episode(state, None, config, rng)
    problem = _SubProblem(instance, state.candidate_nodes, state.task_ids, weights)
    return _episode(state, problem.fitness_of, config, rng)


def rl_optimize(
    instance: Instance,
    candidate_nodes,
    tasks,
    config: RlConfig,
    weights: FitnessWeights,
    trace: Optional[list] = None,
) -> tuple:
    """Run the configured number of episodes; returns the best assignment
    ever sampled and its fitness."""
    state = rl_init(instance, tasks, candidate_nodes, config, weights)
    if len(state.task_ids) == 0:
        return Assignment(mapping={}, order={}), 0.0
    problem = _SubProblem(instance, state.candidate_nodes, state.task_ids, weights)
    rng = np.random.default_rng(config.rng_seed + 1)

    # in-place episode loop; same draws and same arithmetic as rl_episode,
    # without rebuilding a PolicyState every episode
    preference = state.preference.copy()
    assignment = state.assignment
    fitness = state.fitness
    best_genome, best_fit = state.best_seen
    exploration = state.exploration
    n, k = preference.shape
    rows = np.arange(n)
    lr = config.learning_rate
    decay = lr * config.penalty_value / config.reward_value
    floor = min(config.probability_floor, 1.0 / k)
    scale = 1.0 - k * floor

    for episode in range(config.episodes):
        if rng.random() < exploration:
            sampled = assignment.copy()
            sampled[int(rng.integers(0, n))] = int(rng.integers(0, k))
        else:
            cum = np.cumsum(preference, axis=1)
            u = rng.random(n)
            sampled = np.minimum((cum < u[:, None]).sum(axis=1), k - 1).astype(np.intp)
        fit = problem.fitness_of(sampled)
        if fit < fitness:
            chosen = preference[rows, sampled]
            preference *= 1.0 - lr
            preference[rows, sampled] = chosen + lr * (1.0 - chosen)
        else:
            preference[rows, sampled] *= 1.0 - decay
            preference /= preference.sum(axis=1, keepdims=True)
        np.subtract(preference, floor, out=preference)
        np.maximum(preference, 0.0, out=preference)
        totals = preference.sum(axis=1, keepdims=True)
        if (totals == 0.0).any():
            preference = np.where(totals == 0.0, 1.0, preference)
            totals = preference.sum(axis=1, keepdims=True)
        preference *= scale
        preference /= totals
        preference += floor
        if fit < best_fit:
            best_fit = fit
            best_genome = sampled.copy()
        assignment = sampled
        fitness = fit
        exploration *= config.exploration_decay
        if trace is not None:
            trace.append((episode, float(fit), float(best_fit), exploration))

    return problem.to_assignment(best_genome), float(best_fit)
