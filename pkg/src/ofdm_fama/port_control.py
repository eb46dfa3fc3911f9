"""Port-selection control: interleaving, training schedules, stage machine.

Training sweeps the N ports across subframes in an interleaved order that
maximizes spatial spread between simultaneously measured ports.  Strategy A
sweeps all ports blindly; Strategy B explores with half the chains while the
other half exploits the best SINRs seen so far.  After training the receiver
runs on the measured best ports and falls back to training when a selected
port's SINR drifts.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SENTINEL",
    "SinrTable",
    "PortMap",
    "interleave_ports",
    "training_length",
    "strategy_a_schedule",
    "strategy_b_schedule",
    "select_running",
    "step_stage",
]

SENTINEL = -np.inf

TRAINING, RUNNING = "training", "running"

# Running -> Training when a stored/new SINR ratio exceeds 2x (3 dB).
DEFAULT_DRIFT_THRESHOLD = 2.0


@dataclass
class SinrTable:
    gamma: np.ndarray     # per-port linear SINR, SENTINEL when unmeasured
    measured: np.ndarray  # bool

    @classmethod
    def empty(cls, n_ports: int):
        return cls(
            gamma=np.full(n_ports, SENTINEL),
            measured=np.zeros(n_ports, dtype=bool),
        )

    def update(self, ports, values):
        ports = np.asarray(ports, dtype=int)
        self.gamma[ports] = np.asarray(values, dtype=float)
        self.measured[ports] = True

    @property
    def n_ports(self) -> int:
        return self.gamma.size


def interleave_ports(n: int, n_rf: int, strategy: str) -> np.ndarray:
    """Bijective training order kappa over {0..N-1}.

    Inside the largest block-transposable prefix, k = Delta*t + s maps to
    kappa_k = floor(N/Delta)*s + t, spreading consecutive schedule entries
    Delta ports apart; the tail maps to itself.  Delta = ceil(N/N_RF) for
    Strategy A and ceil(N/floor(N_RF/2)) for Strategy B's exploring half.
    """
    if n < 1 or n_rf < 1:
        raise ValueError("n and n_rf must be positive")
    if strategy == "A":
        delta = math.ceil(n / n_rf)
    elif strategy == "B":
        if n_rf < 2:
            raise ValueError("Strategy B needs at least 2 RF chains")
        delta = math.ceil(n / (n_rf // 2))
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    q = n // delta
    kappa = np.arange(n)
    block = delta * q
    k = np.arange(block)
    kappa[:block] = q * (k % delta) + k // delta
    return kappa


def training_length(n: int, n_rf: int, strategy: str) -> int:
    """Subframes needed to measure every port once."""
    if strategy == "A":
        return math.ceil(n / n_rf)
    if strategy == "B":
        if n_rf < 2:
            raise ValueError("Strategy B needs at least 2 RF chains")
        return math.ceil((n - math.ceil(n_rf / 2)) / (n_rf // 2))
    raise ValueError(f"unknown strategy {strategy!r}")


def strategy_a_schedule(n: int, n_rf: int, n_subframe: int) -> np.ndarray:
    """Chains sweep the interleaved order in blocks of N_RF per subframe."""
    if not 0 <= n_subframe < training_length(n, n_rf, "A"):
        raise ValueError("training subframe out of range")
    kappa = interleave_ports(n, n_rf, "A")
    idx = (n_subframe * n_rf + np.arange(n_rf)) % n
    return kappa[idx]


def strategy_b_schedule(n: int, n_rf: int, n_subframe: int,
                        sinr: SinrTable) -> np.ndarray:
    """Half the chains explore new ports; the rest exploit the best so far.

    Exploit picks are the highest measured SINRs excluding ports already
    assigned this subframe (ties to the lower index).  On the first subframe
    nothing is measured yet, so the exploiting chains take the earliest
    interleaved ports not already assigned.

    Exploring chains start at interleaved index ceil(N_RF/2) and advance by
    floor(N_RF/2) per subframe.  For even N_RF this is the offset
    (n_subframe+1)*floor(N_RF/2); for odd N_RF the extra +1 keeps the sweep
    contiguous past the first subframe's exploited ports, which is what lets
    the training length cover every port.
    """
    if not 0 <= n_subframe < training_length(n, n_rf, "B"):
        raise ValueError("training subframe out of range")
    kappa = interleave_ports(n, n_rf, "B")
    explore_n = n_rf // 2
    assignment = np.empty(n_rf, dtype=int)
    idx = (n_rf - explore_n + n_subframe * explore_n + np.arange(explore_n)) % n
    assignment[:explore_n] = kappa[idx]
    taken = set(assignment[:explore_n].tolist())
    if n_subframe == 0:
        pool = iter(kappa)
    else:
        order = np.lexsort((np.arange(n), -sinr.gamma))  # SINR desc, index asc
        pool = iter(order[sinr.measured[order]])
    fill = explore_n
    while fill < n_rf:
        port = int(next(pool))
        if port not in taken:
            assignment[fill] = port
            taken.add(port)
            fill += 1
    return assignment


def select_running(sinr: SinrTable, n_rf: int) -> np.ndarray:
    """Top-N_RF measured ports by SINR; ties break to the lower index."""
    if not sinr.measured.all():
        raise ValueError("running selection requires every port measured")
    if n_rf > sinr.n_ports:
        raise ValueError("n_rf exceeds port count")
    order = np.lexsort((np.arange(sinr.n_ports), -sinr.gamma))
    return order[:n_rf]


@dataclass
class PortMap:
    """Per-user selection state advanced once per subframe."""

    n_ports: int
    n_rf: int
    strategy: str
    stage: str = TRAINING
    subframe_counter: int = 0
    assignment: np.ndarray = None
    table: SinrTable = None
    drift_threshold: float = DEFAULT_DRIFT_THRESHOLD

    def __post_init__(self):
        if self.n_rf > self.n_ports:
            raise ValueError("n_rf exceeds port count")
        if self.table is None:
            self.table = SinrTable.empty(self.n_ports)
        if self.assignment is None:
            self.assignment = self._training_assignment()

    def _training_assignment(self) -> np.ndarray:
        if self.strategy == "A":
            return strategy_a_schedule(self.n_ports, self.n_rf, self.subframe_counter)
        return strategy_b_schedule(self.n_ports, self.n_rf, self.subframe_counter,
                                   self.table)


def step_stage(state: PortMap, new_sinr, drift_threshold: float = None) -> PortMap:
    """Advance the stage machine with this subframe's measurements.

    `new_sinr` holds one linear SINR per currently assigned chain.  Training
    runs for the strategy's length, then selection freezes; in the running
    stage any measured-vs-stored ratio beyond the threshold (either
    direction) restarts training with a fresh table.
    """
    thr = state.drift_threshold if drift_threshold is None else drift_threshold
    new_sinr = np.asarray(new_sinr, dtype=float)
    if state.stage == TRAINING:
        state.table.update(state.assignment, new_sinr)
        state.subframe_counter += 1
        if state.subframe_counter >= training_length(state.n_ports, state.n_rf,
                                                     state.strategy):
            state.stage = RUNNING
            state.assignment = select_running(state.table, state.n_rf)
        else:
            state.assignment = state._training_assignment()
        return state
    stored = state.table.gamma[state.assignment]
    drifted = (new_sinr > stored * thr) | (new_sinr < stored / thr)
    state.table.update(state.assignment, new_sinr)
    if drifted.any():
        state.stage = TRAINING
        state.subframe_counter = 0
        state.table = SinrTable.empty(state.n_ports)
        state.assignment = state._training_assignment()
    return state
