"""Lock-step rollouts over E parallel worlds and the per-episode trajectory buffer."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from gridcover.core.config import ObservationConfig, RunConfig
from gridcover.core.logging import get_logger
from gridcover.core.models import Action
from gridcover.observation.belief import BeliefCoverage, init_beliefs, update_belief
from gridcover.observation.builder import build_observation
from gridcover.sim.world import World, generate_world, step

logger = get_logger(__name__)

# (agent slot, stacked observations) -> (actions, log-probabilities)
Behavior = Callable[[int, np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass
class AgentTrajectory:
    """One agent's records in one environment, contiguous from t=0 until it stops acting."""

    observations: list[np.ndarray] = field(default_factory=list)
    actions: list[int] = field(default_factory=list)
    log_probs: list[float] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)
    times: list[int] = field(default_factory=list)
    # terminal only: coverage complete or agent inactive; a timeout leaves False
    dones: list[bool] = field(default_factory=list)
    # observation after the last step when the episode was cut by the timeout
    final_observation: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.actions)

    def observation_matrix(self) -> np.ndarray:
        return np.stack(self.observations) if self.observations else np.zeros((0, 0), np.float32)


@dataclass
class TrajectoryBuffer:
    """Everything one episode batch produced; ``trajectories[e][i]``."""

    trajectories: list[list[AgentTrajectory]]
    states: list[list[np.ndarray]]
    lengths: list[int]
    final_coverage: list[float]

    @classmethod
    def empty(cls, n_envs: int, n_agents: int) -> TrajectoryBuffer:
        return cls(
            trajectories=[[AgentTrajectory() for _ in range(n_agents)] for _ in range(n_envs)],
            states=[[] for _ in range(n_envs)],
            lengths=[0] * n_envs,
            final_coverage=[0.0] * n_envs,
        )

    @property
    def n_envs(self) -> int:
        return len(self.trajectories)

    @property
    def n_agents(self) -> int:
        return len(self.trajectories[0]) if self.trajectories else 0

    @property
    def n_samples(self) -> int:
        return sum(len(traj) for env in self.trajectories for traj in env)

    def mean_length(self) -> float:
        return float(np.mean(self.lengths)) if self.lengths else 0.0

    def mean_coverage(self) -> float:
        return float(np.mean(self.final_coverage)) if self.final_coverage else 0.0

    def agent(self, agent: int) -> list[AgentTrajectory]:
        """Agent ``agent``'s trajectory in every environment."""
        return [env[agent] for env in self.trajectories]


def reset_worlds(seeds: Sequence[int], config: RunConfig) -> list[World]:
    return [
        generate_world(int(seed), config.world, config.disturbances, config.rewards)
        for seed in seeds
    ]


def collect_rollouts(
    worlds: list[World],
    behavior: Behavior,
    observation: ObservationConfig | None = None,
) -> TrajectoryBuffer:
    """Run every world to episode end under ``behavior``.

    Worlds advance in lock-step; at each step the observations of agent slot
    i across all live worlds are stacked and passed to ``behavior`` once, so
    network forwards are batched.  Parameters must not change during the call.
    """
    obs_cfg = observation or ObservationConfig()
    n_agents = worlds[0].n_agents
    buffer = TrajectoryBuffer.empty(len(worlds), n_agents)
    beliefs: list[list[BeliefCoverage]] = [
        init_beliefs(w, w.factors.comm_delay_steps) for w in worlds
    ]
    live = [e for e, w in enumerate(worlds) if not w.done]

    while live:
        joint = {e: [Action.NO_MOVE] * n_agents for e in live}
        acted: dict[int, list[int]] = {e: [] for e in live}
        for e in live:
            buffer.states[e].append(worlds[e].global_state())
        for i in range(n_agents):
            envs = [e for e in live if worlds[e].agents[i].active]
            if not envs:
                continue
            obs = np.stack(
                [
                    build_observation(worlds[e], beliefs[e][i], worlds[e].agents[i], obs_cfg)
                    for e in envs
                ]
            )
            actions, log_probs = behavior(i, obs)
            for row, e in enumerate(envs):
                traj = buffer.trajectories[e][i]
                traj.observations.append(obs[row])
                traj.actions.append(int(actions[row]))
                traj.log_probs.append(float(log_probs[row]))
                traj.times.append(worlds[e].t)
                joint[e][i] = Action(int(actions[row]))
                acted[e].append(i)

        still_live: list[int] = []
        for e in live:
            world, rewards, done, _ = step(worlds[e], joint[e])
            for belief in beliefs[e]:
                update_belief(belief, world, world.factors.comm_delay_steps)
            total = rewards.total
            for i in acted[e]:
                agent = world.agents[i]
                terminal = world.is_complete or not agent.active
                traj = buffer.trajectories[e][i]
                traj.rewards.append(float(total[i]))
                traj.dones.append(terminal)
                if done and not terminal:
                    traj.final_observation = build_observation(
                        world, beliefs[e][i], agent, obs_cfg
                    )
            if done:
                buffer.lengths[e] = world.t
                buffer.final_coverage[e] = world.coverage_fraction
            else:
                still_live.append(e)
        live = still_live

    logger.debug(
        "episode_batch_collected",
        envs=len(worlds),
        mean_length=buffer.mean_length(),
        mean_coverage=round(buffer.mean_coverage(), 4),
    )
    return buffer


def compute_returns(rewards: Sequence[float], gamma: float) -> np.ndarray:
    """Monte Carlo returns R[t] = r[t] + γ·R[t+1], no bootstrap past the last step."""
    returns = np.zeros(len(rewards), dtype=np.float64)
    running = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        running = rewards[t] + gamma * running
        returns[t] = running
    return returns


def buffer_returns(buffer: TrajectoryBuffer, gamma: float) -> list[list[np.ndarray]]:
    """``returns[e][i]`` aligned with ``buffer.trajectories[e][i]``."""
    return [[compute_returns(traj.rewards, gamma) for traj in env] for env in buffer.trajectories]
