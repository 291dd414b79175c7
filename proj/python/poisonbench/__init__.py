"""Action-poisoning attack simulator for tabular episodic RL."""

from ._core import (
    ConfigError,
    MdpSpec,
    ModelError,
    build_alpha_attacked_mdp,
    check_target_admissible,
    evaluate_policy,
    gen_gridworld_2d,
    gen_periodic_1d,
    gen_random_mdp,
    gen_target_policy,
    gridworld_2d_target_policy,
    minimum_gap,
    resolve_config,
    run_experiment,
    solve_optimal,
    two_state_fixture,
)

__all__ = [
    "ConfigError",
    "MdpSpec",
    "ModelError",
    "build_alpha_attacked_mdp",
    "check_target_admissible",
    "evaluate_policy",
    "gen_gridworld_2d",
    "gen_periodic_1d",
    "gen_random_mdp",
    "gen_target_policy",
    "gridworld_2d_target_policy",
    "minimum_gap",
    "resolve_config",
    "run_experiment",
    "solve_optimal",
    "two_state_fixture",
]
