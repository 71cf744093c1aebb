# app/sim/channel.py

"""
Path loss, dB/linear conversion, SINR and capacity for the single-subcarrier downlink.

All arithmetic runs in the linear domain (mW, power ratios); dB and dBm appear only
at the interfaces. Every function here is pure.
"""

import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from app.core.errors import DomainError
from app.schemas.scenario import ChannelParams

MBS = 0  # transmitter row 0
MUE = 0  # receiver column 0


def dbm_to_mw(dbm):
    return np.power(10.0, np.asarray(dbm, dtype=float) / 10.0) if np.ndim(dbm) else 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw):
    if np.ndim(mw):
        return 10.0 * np.log10(np.asarray(mw, dtype=float))
    if mw <= 0:
        raise DomainError(f"cannot express {mw} mW in dBm")
    return 10.0 * math.log10(mw)


@dataclass(frozen=True)
class NoisePower:
    sigma2_mw: float

    def __post_init__(self):
        if not self.sigma2_mw > 0:
            raise DomainError(f"noise power must be positive, got {self.sigma2_mw} mW")

    @classmethod
    def from_dbm(cls, dbm: float) -> "NoisePower":
        return cls(dbm_to_mw(dbm))


# ─── Path loss ───────────────────────────────────────────────────────────────
def pathloss_residential(d: float, pl0: float, n: float, d0: float) -> float:
    """PL0 + 10 n log10(d / d0), in dB."""
    if d <= 0 or d0 <= 0:
        raise DomainError(f"residential path loss needs d > 0 and d0 > 0 (d={d}, d0={d0})")
    return pl0 + 10.0 * n * math.log10(d / d0)


def indoor_penetration_loss(f: float) -> float:
    return -1.8 * f * f + 10.6 * f + 6.1


def pathloss_indoor_outdoor(d: float, f: float) -> float:
    """Empirical femtocell indoor-to-outdoor model: frequency-dependent wall loss plus a 3.2 exponent."""
    if d <= 0 or f <= 0:
        raise DomainError(f"indoor-to-outdoor path loss needs d > 0 and f > 0 (d={d}, f={f})")
    return indoor_penetration_loss(f) + 62.3 + 32.0 * math.log10(d / 5.0)


def gain_from_pathloss(pl: float) -> float:
    return 10.0 ** (-pl / 10.0)


# ─── Gain matrix ─────────────────────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class GainMatrix:
    """
    Linear gains indexed [tx, rx]: tx 0 is the MBS and tx k the k-th FBS (1-based);
    rx 0 is the MUE and rx k the FUE served by FBS k.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] < 2:
            raise DomainError(f"gain matrix must be (M+1)x(M+1) with M >= 1, got shape {values.shape}")
        if not np.all(values > 0):
            raise DomainError("gain matrix has non-positive entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def m(self) -> int:
        return self.values.shape[0] - 1

    def gain(self, tx: int, rx: int) -> float:
        return float(self.values[tx, rx])

    def as_dict(self) -> Dict[Tuple[str, str], float]:
        def tx_name(k):
            return "MBS" if k == MBS else f"FBS{k}"

        def rx_name(k):
            return "MUE" if k == MUE else f"FUE{k}"

        size = self.values.shape[0]
        return {(tx_name(t), rx_name(r)): float(self.values[t, r]) for t in range(size) for r in range(size)}

    def permuted(self, order: Sequence[int]) -> "GainMatrix":
        """Relabel the FBS/FUE pairs: new pair k is old pair order[k] (0-based over FBSs)."""
        index = np.concatenate(([0], np.asarray(order, dtype=int) + 1))
        return GainMatrix(self.values[np.ix_(index, index)])

    def subset(self, fbs_indices: Sequence[int]) -> "GainMatrix":
        """Gains restricted to the given FBS/FUE pairs (0-based), in that order."""
        return self.permuted(fbs_indices)


def build_gain_matrix(topology, config: ChannelParams) -> GainMatrix:
    """
    MBS->MUE, FBS_i->FUE_i and MBS->FUE_i use the residential model;
    FBS->MUE and FBS_j->FUE_i (j != i) use the indoor-to-outdoor model.
    """
    transmitters = [topology.mbs, *topology.fbs]
    receivers = [topology.mue, *topology.fue]
    size = len(transmitters)
    values = np.empty((size, size))

    for t, tx in enumerate(transmitters):
        for r, rx in enumerate(receivers):
            d = tx.distance_to(rx)
            if d <= 0:
                raise DomainError(f"transmitter {t} and receiver {r} coincide")
            if t == MBS or t == r:
                pl = pathloss_residential(d, config.pl0_db, config.pl_exponent, config.d0_m)
            else:
                pl = pathloss_indoor_outdoor(d, config.frequency_ghz)
            values[t, r] = gain_from_pathloss(pl)

    return GainMatrix(values)


# ─── SINR / capacity ─────────────────────────────────────────────────────────
def _check_powers(p_bs, fbs_powers, gains: GainMatrix) -> np.ndarray:
    powers = np.asarray(fbs_powers, dtype=float)
    if powers.shape[-1] != gains.m:
        raise DomainError(f"{powers.shape[-1]} FBS powers for a {gains.m}-FBS gain matrix")
    if p_bs < 0 or np.any(powers < 0):
        raise DomainError("transmit powers must be non-negative")
    return powers


def sinr_mue(p_bs: float, fbs_powers, gains: GainMatrix, noise: NoisePower):
    powers = _check_powers(p_bs, fbs_powers, gains)
    interference = powers @ gains.values[1:, MUE]
    return p_bs * gains.values[MBS, MUE] / (interference + noise.sigma2_mw)


def sinr_fue_all(p_bs: float, fbs_powers, gains: GainMatrix, noise: NoisePower) -> np.ndarray:
    """SINR at every FUE; fbs_powers may carry leading batch dimensions (..., M)."""
    powers = _check_powers(p_bs, fbs_powers, gains)
    cross = gains.values[1:, 1:]
    received = powers @ cross
    own = powers * np.diagonal(cross)
    interference = received - own + p_bs * gains.values[MBS, 1:] + noise.sigma2_mw
    return own / interference


def sinr_fue(i: int, p_bs: float, fbs_powers, gains: GainMatrix, noise: NoisePower) -> float:
    """SINR at the FUE of FBS i (0-based)."""
    if not 0 <= i < gains.m:
        raise DomainError(f"FUE index {i} out of range for M={gains.m}")
    powers = _check_powers(p_bs, fbs_powers, gains)
    signal = powers[i] * gains.values[i + 1, i + 1]
    others = sum(powers[j] * gains.values[j + 1, i + 1] for j in range(gains.m) if j != i)
    return float(signal / (p_bs * gains.values[MBS, i + 1] + others + noise.sigma2_mw))


def capacity(sinr):
    """Normalized Shannon capacity log2(1 + SINR) in b/s/Hz."""
    if np.any(np.asarray(sinr) < 0):
        raise DomainError(f"SINR must be non-negative, got {sinr}")
    if np.ndim(sinr):
        return np.log2(1.0 + np.asarray(sinr, dtype=float))
    return math.log2(1.0 + sinr)


def evaluate_capacities(p_bs: float, fbs_powers, gains: GainMatrix, noise: NoisePower):
    """(C_MUE, C_FUE vector) for one joint power vector or a batch of them."""
    c_mue = capacity(sinr_mue(p_bs, fbs_powers, gains, noise))
    c_fue = capacity(sinr_fue_all(p_bs, fbs_powers, gains, noise))
    return c_mue, c_fue


def link_budget(config: ChannelParams) -> Tuple[float, NoisePower]:
    """MBS transmit power in mW and the noise power for a channel section."""
    return dbm_to_mw(config.p_bs_dbm), NoisePower.from_dbm(config.sigma2_dbm)
