"""Simulation configuration, default parameters, and seeded RNG streams.

Canonical unit system used throughout:

* data queues and task sizes in Mbit, rates in Mbps
* CPU frequencies stored in Hz; solver math runs in MHz with the energy
  coefficient rescaled accordingly (``kappa_tilde = kappa * 1e18``)
* power in watt, time in seconds, bandwidth stored in Hz (MHz internally)
* virtual energy queues are dimensionless (``nu``-scaled watt-seconds)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

SPEED_OF_LIGHT = 3e8

# noise power spectral density in dBm/Hz
DEFAULT_NOISE_PSD_DBM = -174.0


@dataclass
class ArrivalModel:
    """Per-run task arrival process description.

    ``kind`` is either ``iid_exponential`` (exponential task sizes with mean
    ``lam[i] * T`` Mbit per frame) or ``markov_onoff`` (a single two-state
    chain gates arrivals for every device; ON-state mean is scaled so the
    long-run average still equals ``lam[i]``).
    """

    kind: str = "iid_exponential"
    lam: np.ndarray = field(default_factory=lambda: np.full(10, 3.0))
    onoff_matrix: np.ndarray = field(
        default_factory=lambda: np.array([[0.1, 0.9], [0.9, 0.1]])
    )
    eta: np.ndarray | None = None  # recorded second moments, unused by algorithms

    def validate(self) -> None:
        if self.kind not in ("iid_exponential", "markov_onoff"):
            raise ValueError(f"unknown arrival kind {self.kind!r}")
        if np.any(self.lam < 0):
            raise ValueError("arrival rates must be non-negative")
        P = np.asarray(self.onoff_matrix, dtype=float)
        if P.shape != (2, 2) or np.any(P < 0) or not np.allclose(P.sum(axis=1), 1.0):
            raise ValueError("onoff transition matrix rows must be stochastic")

    def stationary_on_probability(self) -> float:
        """Stationary probability of the ON state (state index 1)."""
        P = np.asarray(self.onoff_matrix, dtype=float)
        # two-state chain: pi_on = p(off->on) / (p(off->on) + p(on->off))
        p_off_on = P[0, 1]
        p_on_off = P[1, 0]
        return p_off_on / (p_off_on + p_on_off)

    def on_state_mean(self) -> np.ndarray:
        """ON-state arrival mean so that the long-run average equals lam."""
        return np.asarray(self.lam, dtype=float) / self.stationary_on_probability()


@dataclass
class SimConfig:
    """All physical, algorithmic, and learning parameters for one run."""

    N: int = 10
    T: float = 1.0                  # frame duration [s]
    W: float = 2e6                  # bandwidth [Hz]
    v_u: float = 1.1                # communication overhead (>= 1)
    N0: float = 0.0                 # noise power [W]; 0 means "derive from PSD"
    phi: float = 100.0              # cycles per bit
    kappa: float = 1e-26            # energy efficiency [J s^2 / cycle^3]
    f_max: np.ndarray = field(default_factory=lambda: np.full(10, 3e8))   # [Hz]
    P_max: np.ndarray = field(default_factory=lambda: np.full(10, 0.1))   # [W]
    gamma: np.ndarray = field(default_factory=lambda: np.full(10, 0.08))  # [W]
    c: np.ndarray = field(
        default_factory=lambda: np.array([1.5 if i % 2 == 0 else 1.0 for i in range(10)])
    )
    V: float = 20.0                 # drift-plus-penalty weight
    nu: float = 1000.0              # virtual-queue scaling
    d: np.ndarray = field(
        default_factory=lambda: np.array([120.0 + 15.0 * i for i in range(10)])
    )
    A_d: float = 3.0                # antenna gain
    f_c: float = 915e6              # carrier frequency [Hz]
    d_e: float = 3.0                # path loss exponent
    rician_los_fraction: float = 0.3
    arrival: ArrivalModel = field(default_factory=ArrivalModel)
    rng_seed: int = 1

    # dual bisection controls
    sigma0: float = 1e-12           # relative bisection stop on the time dual
    mu_ub_init: float = 1e4         # initial dual upper bound, doubled if needed

    # actor / learning parameters
    hidden_sizes: tuple[int, int] = (120, 80)
    memory_capacity: int = 1024     # replay capacity q
    delta_T: int = 10               # training interval [frames]
    delta_M: int = 32               # candidate-count update interval [frames]
    batch_size: int = 32
    learning_rate: float = 0.01
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    init_mode: str = "xavier"       # or "normal"
    Q_scale: float = 100.0          # feature normalization [Mbit]
    Y_scale: float = 1000.0         # feature normalization

    def __post_init__(self) -> None:
        for name in ("f_max", "P_max", "gamma", "c", "d"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.ndim == 0:
                v = np.full(self.N, float(v))
            setattr(self, name, v)
        if self.N0 == 0.0:
            self.N0 = self.W * 10 ** ((DEFAULT_NOISE_PSD_DBM - 30.0) / 10.0)
        lam = np.asarray(self.arrival.lam, dtype=float)
        if lam.ndim == 0:
            self.arrival.lam = np.full(self.N, float(lam))

    # ----- derived quantities (solver units) -----

    @property
    def W_mhz(self) -> float:
        return self.W / 1e6

    @property
    def kappa_tilde(self) -> float:
        """Energy coefficient for CPU frequency expressed in MHz."""
        return self.kappa * 1e18

    @property
    def f_max_mhz(self) -> np.ndarray:
        return self.f_max / 1e6

    def mean_gains(self) -> np.ndarray:
        from .env import mean_channel_gain

        return np.array([mean_channel_gain(di, self) for di in self.d])

    def validate(self) -> None:
        if self.N < 1:
            raise ValueError("need at least one device")
        if self.v_u < 1:
            raise ValueError("communication overhead must be >= 1")
        for name in ("T", "W", "N0", "phi", "kappa", "V", "nu", "A_d", "f_c", "d_e"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("f_max", "P_max", "gamma", "c", "d"):
            v = getattr(self, name)
            if v.shape != (self.N,):
                raise ValueError(f"{name} must have length N={self.N}")
            if np.any(v <= 0):
                raise ValueError(f"{name} entries must be positive")
        if np.any(self.gamma > self.P_max + 1e-15):
            raise ValueError("average power threshold cannot exceed peak power")
        if not 0.0 <= self.rician_los_fraction <= 1.0:
            raise ValueError("rician_los_fraction must lie in [0, 1]")
        self.arrival.validate()

    def with_devices(self, n: int) -> "SimConfig":
        """Return a copy resized to ``n`` devices using the default patterns."""
        cfg = replace(
            self,
            N=n,
            f_max=np.full(n, float(self.f_max[0])),
            P_max=np.full(n, float(self.P_max[0])),
            gamma=np.full(n, float(self.gamma[0])),
            c=np.array([1.5 if i % 2 == 0 else 1.0 for i in range(n)]),
            d=np.array([120.0 + 15.0 * i for i in range(n)]),
            arrival=ArrivalModel(
                kind=self.arrival.kind,
                lam=np.full(n, float(np.asarray(self.arrival.lam).flat[0])),
                onoff_matrix=np.array(self.arrival.onoff_matrix, dtype=float),
            ),
        )
        return cfg


def default_config(**overrides) -> SimConfig:
    cfg = SimConfig(**overrides)
    cfg.validate()
    return cfg


def rng_streams(seed: int) -> dict[str, np.random.Generator]:
    """Named independent RNG streams for one run.

    Splitting the root seed keeps every component individually reproducible;
    e.g. changing the quantizer noise stream does not perturb the channel
    realizations.
    """
    names = ("channel", "arrivals", "quantizer", "dnn_init", "batch")
    root = np.random.SeedSequence(seed)
    children = root.spawn(len(names))
    return {name: np.random.default_rng(ss) for name, ss in zip(names, children)}


# ----- flat key=value config files -----

_ARRAY_KEYS = {"f_max", "P_max", "gamma", "c", "d", "lambda"}
_INT_KEYS = {"N", "rng_seed", "memory_capacity", "delta_T", "delta_M", "batch_size"}
_STR_KEYS = {"arrival_kind", "init_mode"}


def _parse_value(key: str, raw: str):
    if key in _STR_KEYS:
        return raw.strip()
    if key in _ARRAY_KEYS:
        return np.array([float(v) for v in raw.split(",")])
    if key in _INT_KEYS:
        return int(raw)
    if key == "hidden_sizes":
        return tuple(int(v) for v in raw.split(","))
    if key == "onoff_matrix":
        vals = [float(v) for v in raw.split(",")]
        return np.array(vals).reshape(2, 2)
    return float(raw)


def load_config(path: str) -> SimConfig:
    """Read a flat ``key=value`` config file; unset keys keep defaults.

    Arrays are comma-separated; a scalar value for an array key is broadcast
    to all N devices. ``lambda``, ``arrival_kind`` and ``onoff_matrix``
    configure the arrival model.
    """
    entries: dict[str, object] = {}
    with open(path) as fp:
        for lineno, line in enumerate(fp, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, raw = (s.strip() for s in line.split("=", 1))
            entries[key] = _parse_value(key, raw)

    n = int(entries.get("N", SimConfig.N))
    # resize the default device arrays when N differs from the default, and
    # broadcast scalar values given for array keys
    base = SimConfig().with_devices(n)
    for key in _ARRAY_KEYS - {"lambda"}:
        v = entries.get(key)
        if v is not None and np.asarray(v).size == 1:
            entries[key] = np.full(n, float(np.asarray(v).flat[0]))
        elif v is None:
            entries[key] = getattr(base, key)

    arrival_kwargs = {}
    if "lambda" in entries:
        arrival_kwargs["lam"] = entries.pop("lambda")
    if "arrival_kind" in entries:
        arrival_kwargs["kind"] = entries.pop("arrival_kind")
    if "onoff_matrix" in entries:
        arrival_kwargs["onoff_matrix"] = entries.pop("onoff_matrix")

    cfg = SimConfig(**entries)  # type: ignore[arg-type]
    lam = np.asarray(arrival_kwargs.get("lam", base.arrival.lam), dtype=float)
    if lam.ndim == 0 or lam.size == 1:
        lam = np.full(cfg.N, float(lam.flat[0]))
    cfg.arrival = ArrivalModel(
        kind=arrival_kwargs.get("kind", "iid_exponential"),
        lam=lam,
        onoff_matrix=np.asarray(
            arrival_kwargs.get("onoff_matrix", cfg.arrival.onoff_matrix), dtype=float
        ),
    )
    cfg.validate()
    return cfg


def save_config(cfg: SimConfig, path: str) -> None:
    def fmt(v) -> str:
        if isinstance(v, np.ndarray):
            return ",".join(repr(float(x)) for x in v.ravel())
        if isinstance(v, tuple):
            return ",".join(str(x) for x in v)
        return repr(v) if isinstance(v, float) else str(v)

    keys = [
        "N", "T", "W", "v_u", "N0", "phi", "kappa", "f_max", "P_max", "gamma",
        "c", "V", "nu", "d", "A_d", "f_c", "d_e", "rician_los_fraction",
        "rng_seed", "sigma0", "mu_ub_init", "hidden_sizes", "memory_capacity",
        "delta_T", "delta_M", "batch_size", "learning_rate", "init_mode",
        "Q_scale", "Y_scale",
    ]
    with open(path, "w") as fp:
        for key in keys:
            fp.write(f"{key}={fmt(getattr(cfg, key))}\n")
        fp.write(f"arrival_kind={cfg.arrival.kind}\n")
        fp.write(f"lambda={fmt(np.asarray(cfg.arrival.lam))}\n")
        fp.write(f"onoff_matrix={fmt(np.asarray(cfg.arrival.onoff_matrix))}\n")
