"""Residual-RL racing lab: simulator, baseline controller, residual SAC agent.

The package is organised bottom-up:

- :mod:`rlpp.trackmodel` -- track/raceline geometry, Frenet transforms,
  velocity profiles.
- :mod:`rlpp.dynamics` -- single-track Pacejka vehicle model with RK4
  integration.
- :mod:`rlpp.control` -- Pure Pursuit baseline and the residual composition.
- :mod:`rlpp.envs` -- closed-loop training/evaluation environment.
- :mod:`rlpp.sac` -- from-scratch soft actor-critic in numpy.
- :mod:`rlpp.harness` -- lap evaluation, statistics, comparison metrics,
  artifact export.
- :mod:`rlpp.cli` -- command line front end.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
