# app/sim/reward.py

from dataclasses import dataclass
from functools import partial
from typing import Callable, Dict, List

from app.core.errors import DomainError


@dataclass(frozen=True)
class QosThresholds:
    q_mue: float
    q_fue: List[float]

    def __post_init__(self):
        if self.q_mue <= 0 or any(q <= 0 for q in self.q_fue):
            raise DomainError("QoS thresholds must be positive")


@dataclass(frozen=True, slots=True)
class RewardInputs:
    c_fue_i: float
    c_mue: float
    beta_i: float
    q_fue_i: float
    q_mue: float


RewardFn = Callable[..., float]

_REWARDS: Dict[str, RewardFn] = {}


def register_reward(name: str, fn: RewardFn) -> None:
    _REWARDS[name] = fn


def get_reward(name: str) -> RewardFn:
    try:
        return _REWARDS[name]
    except KeyError:
        raise DomainError(f"unknown reward '{name}' (available: {', '.join(sorted(_REWARDS))})") from None


def available_rewards() -> List[str]:
    return sorted(_REWARDS)


def reward_proposed(inputs: RewardInputs, mue_exponent: int = 2) -> float:
    """
    beta * C_FUE * C_MUE^k - (1/beta) * (C_MUE - q_MUE)^2 - (C_FUE - q_i)^2

    beta scales the capacity term down and the MUE deviation penalty up for FBSs
    inside the d_th vicinity of the MUE. k = 2 weighs the MUE above the FUE.
    """
    b = inputs.beta_i
    if b <= 0:
        raise DomainError(f"beta must be positive, got {b}")
    return (
        b * inputs.c_fue_i * inputs.c_mue**mue_exponent
        - (inputs.c_mue - inputs.q_mue) ** 2 / b
        - (inputs.c_fue_i - inputs.q_fue_i) ** 2
    )


register_reward("proposed", reward_proposed)


def resolve_reward(params) -> Callable[[RewardInputs], float]:
    """Reward callable for a scenario's reward section; the MUE exponent applies to the proposed reward."""
    fn = get_reward(params.name)
    if fn is reward_proposed:
        return partial(reward_proposed, mue_exponent=params.mue_exponent)
    return fn
