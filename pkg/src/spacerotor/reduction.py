"""Momentum maps, Casimirs and the projection/commutation check."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import FullStateC, FullStateN, apply_control, vf_full, vf_reduced
from .model import ReducedStateN


@dataclass(frozen=True)
class MomentumValue:
    """Spatial momentum ``mu``; ``a`` is the spatial advected vector (SE(3) case)."""

    mu: np.ndarray
    a: Optional[np.ndarray] = None

    @property
    def gravity_axis_component(self):
        """``mu`` projected on the unit gravity axis; conserved under gravity."""
        if self.a is None:
            raise ValueError("no advected vector in the coincident case")
        return float(np.dot(self.mu, self.a) / np.linalg.norm(self.a))


def momentum_map_c(s):
    return MomentumValue(s.A @ s.reduced.Pi)


def momentum_map_n(s):
    return MomentumValue(s.A @ s.reduced.Pi, s.A @ s.reduced.Gamma)


def momentum_map(s):
    if isinstance(s, FullStateN):
        return momentum_map_n(s)
    if isinstance(s, FullStateC):
        return momentum_map_c(s)
    raise TypeError(f"momentum map needs a full state, got {type(s).__name__}")


def casimirs(s):
    """Coadjoint-orbit invariants.

    ``[|Pi|^2]`` for so*(3), ``[Pi . Gamma, |Gamma|^2]`` for se*(3).
    """
    if isinstance(s, ReducedStateN):
        return [float(np.dot(s.Pi, s.Gamma)), float(np.dot(s.Gamma, s.Gamma))]
    return [float(np.dot(s.Pi, s.Pi))]


def project(s):
    """Forget the attitude: the quotient map in body coordinates."""
    return s.reduced


def commutation_residual(s, p, u=None, t=0.0):
    """Max-norm gap between the projected full field and the reduced field.

    Compares ``T(project) . vf_full(s)`` with the controlled reduced field at
    ``project(s)``.
    """
    upstairs = project(vf_full(s, p, u, t)).to_array()
    r = project(s)
    downstairs = apply_control(vf_reduced(r, p), u, r, t).to_array()
    return float(np.max(np.abs(upstairs - downstairs)))
