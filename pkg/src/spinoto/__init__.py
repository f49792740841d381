"""Out-of-time-order correlators for collective spin models.

Unitary and dissipative simulation of interferometric OTO measurements for
one-axis twisting and the kicked top, with semiclassical and cavity QED
feasibility helpers.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from . import feasibility, observables, protocols, semiclassics, spin
from .observables import DecayTime, WignerGrid, decay_time, wigner
from .protocols import (
    CorrelatorSeries,
    ModelSpec,
    ProtocolSpec,
    Rotation,
    Unitary,
    direct_oto_F,
    distinguishability,
    forward_only_time_ordered,
    hermitian_oto,
    interferometric_F,
    squared_commutator,
    time_ordered_G,
)
from .semiclassics import SpherePoint, classical_kick_map, ehrenfest_time, lyapunov_exponent
