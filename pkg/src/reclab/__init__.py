"""Petz recovery and strengthened data processing for finite-dimensional channels.

Submodules: :mod:`matcore` (matrix utilities), :mod:`quantum` (states,
standard form, relative entropy), :mod:`channels`, :mod:`recovery`,
:mod:`divergences`, :mod:`gamma` (interpolating vector family and the
recovery bounds), :mod:`regularize` and :mod:`harness`.
"""

from .channels import Channel, davies_semigroup, identity_channel, random_unital_cp_channel
from .divergences import am_norm, fidelity, sandwiched_renyi
from .gamma import InstanceBundle, random_instance
from .quadrature import QuadratureError, QuadratureSpec
from .quantum import GnsVector, State, relative_entropy
from .recovery import RecoverySpec, averaged_recovery, kms_adjoint, rotated_petz

__version__ = "0.1.0"

__all__ = [
    "Channel", "GnsVector", "InstanceBundle", "QuadratureError", "QuadratureSpec", "RecoverySpec",
    "State", "am_norm", "averaged_recovery", "davies_semigroup", "fidelity", "identity_channel",
    "kms_adjoint", "random_instance", "random_unital_cp_channel", "relative_entropy", "rotated_petz",
    "sandwiched_renyi",
]
