"""Backend energy and bandwidth accounting: digital first layer vs in-pixel first layer.

Per layer, the backend pays for synaptic operations (one per input spike per
fan-out target), weight fetches that go with them, and a fixed number of
membrane-potential accesses (every neuron is read and written once per time
step whether or not anything arrived).  Events reaching the backend also cost
off-chip transmission, per address bit.

The baseline runs layer 1 digitally on raw sensor events with multi-bit MACs.
With the first layer in the pixel array its compute and memory disappear from
the backend; only its output spikes are transmitted, so transmission scales by
the bandwidth ratio and by the ratio of address widths.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Sequence


@dataclass(frozen=True)
class EnergyConstants:
    """Per-operation energies in pJ.  Illustrative defaults, not silicon numbers."""

    e_ac: float = 0.1
    e_mac: float = 3.2
    e_mem: float = 2.5
    e_tx: float = 21.5

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"{f.name} must be positive")
        if not self.e_mac > self.e_ac:
            raise ValueError("a multi-bit MAC must cost more than an accumulate")


@dataclass(frozen=True)
class LayerCounts:
    in_spikes: int
    fanout: float
    """Synaptic operations per input spike."""
    membrane_accesses: int = 0
    """Fixed per-run membrane reads/writes (neurons x time steps)."""
    weight_fetch_per_op: float = 1.0

    def __post_init__(self):
        if self.in_spikes < 0 or self.fanout < 0 or self.membrane_accesses < 0 or self.weight_fetch_per_op < 0:
            raise ValueError("counts must be non-negative")

    @property
    def synops(self) -> float:
        return self.in_spikes * self.fanout

    @property
    def mem_accesses(self) -> float:
        return self.synops * self.weight_fetch_per_op + self.membrane_accesses


@dataclass(frozen=True)
class EnergyReport:
    spikes: tuple
    mem_accesses: tuple
    baseline_energy: float
    p2m_energy: float
    bandwidth_ratio: float
    breakdown: dict = field(default_factory=dict)

    @property
    def savings(self) -> float:
        return 1.0 - self.p2m_energy / self.baseline_energy


def address_bits(width: int, height: int, channels: int) -> int:
    """Bits needed to address one event: x, y and channel (polarity counts as 2 channels)."""
    return sum(math.ceil(math.log2(n)) if n > 1 else 0 for n in (width, height, channels))


def _layer_cost(lc: LayerCounts, e_op: float, k: EnergyConstants) -> float:
    return lc.synops * e_op + lc.mem_accesses * k.e_mem


def energy(layers: Sequence[LayerCounts], k: EnergyConstants = EnergyConstants(),
           bandwidth_ratio: float = 1.0, bits_in: int = 13, bits_out: int = 13) -> EnergyReport:
    """Baseline and in-pixel backend energy (pJ) for one run.

    ``layers[0]`` is the first layer, fed by raw sensor events; the rest are
    identical in both modes and run on accumulates.
    """
    if not layers:
        raise ValueError("need counts for at least the first layer")
    if bandwidth_ratio < 0:
        raise ValueError("bandwidth_ratio must be non-negative")
    l1, rest = layers[0], layers[1:]
    l1_cost = _layer_cost(l1, k.e_mac, k)
    rest_cost = sum(_layer_cost(lc, k.e_ac, k) for lc in rest)
    tx_base = l1.in_spikes * bits_in * k.e_tx
    tx_p2m = l1.in_spikes * bandwidth_ratio * bits_out * k.e_tx
    baseline = l1_cost + tx_base + rest_cost
    p2m = tx_p2m + rest_cost
    if baseline <= 0:
        raise ValueError("baseline energy is zero; savings undefined")
    return EnergyReport(
        spikes=tuple(lc.in_spikes for lc in layers),
        mem_accesses=tuple(lc.mem_accesses for lc in layers),
        baseline_energy=baseline,
        p2m_energy=p2m,
        bandwidth_ratio=bandwidth_ratio,
        breakdown={"layer1": l1_cost, "tx_baseline": tx_base, "tx_p2m": tx_p2m, "rest": rest_cost},
    )


# --- consistency scenario ----------------------------------------------------------------

REFERENCE_RATIOS = (0.54, 0.62, 0.77)


def reference_profile(k: EnergyConstants = EnergyConstants()) -> list[LayerCounts]:
    """A 34x34 input / 16x16x32 first layer with a small digital back end.

    10 000 input events, 4 covering neurons x 32 channels per event;
    downstream counts are chosen so that, with the default constants, layer 1
    is ~40% of the baseline and transmission ~15%.
    """
    l1 = LayerCounts(in_spikes=10_000, fanout=128, membrane_accesses=16 * 16 * 32 * 10)
    l2 = LayerCounts(in_spikes=5_400, fanout=384, membrane_accesses=8 * 8 * 64 * 100)
    l3 = LayerCounts(in_spikes=3_000, fanout=256, membrane_accesses=256 * 10)
    return [l1, l2, l3]


def reference_savings(k: EnergyConstants = EnergyConstants(), ratios=REFERENCE_RATIOS) -> tuple[float, list[EnergyReport]]:
    """Mean savings of :func:`reference_profile` over the given bandwidth ratios."""
    prof = reference_profile(k)
    reps = [energy(prof, k, r) for r in ratios]
    return sum(r.savings for r in reps) / len(reps), reps


# --- report ----------------------------------------------------------------------------

REPORT_COLUMNS = ("name", "in_spikes", "out_spikes", "bandwidth", "baseline_pj", "p2m_pj", "savings_pct", "accuracy")


@dataclass
class RunSummary:
    name: str
    in_spikes: int | None = None
    out_spikes: int | None = None
    bandwidth: float | None = None
    baseline_pj: float | None = None
    p2m_pj: float | None = None
    savings_pct: float | None = None
    accuracy: float | None = None


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_csv(runs: Iterable[RunSummary]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in sorted(runs, key=lambda r: r.name):
        d = asdict(r)
        w.writerow([_fmt(d[c]) for c in REPORT_COLUMNS])
    return buf.getvalue()


def parse_report_csv(text: str) -> list[RunSummary]:
    rows = list(csv.DictReader(io.StringIO(text)))
    conv = {"name": str, "in_spikes": int, "out_spikes": int}
    out = []
    for row in rows:
        kw = {c: (None if row[c] == "" else conv.get(c, float)(row[c])) for c in REPORT_COLUMNS}
        out.append(RunSummary(**kw))
    return out


def report_text(runs: Iterable[RunSummary]) -> str:
    """Fixed-width table; savings as a percentage with one decimal."""
    runs = sorted(runs, key=lambda r: r.name)
    header = f"{'name':<20} {'in':>9} {'out':>9} {'bw':>7} {'baseline_pJ':>13} {'p2m_pJ':>13} {'savings':>8} {'acc':>7}"
    lines = [header]
    num = lambda v, f: format(v, f) if v is not None else "-"
    for r in runs:
        lines.append(f"{r.name:<20} {num(r.in_spikes, '9d'):>9} {num(r.out_spikes, '9d'):>9} {num(r.bandwidth, '7.3f'):>7} "
                     f"{num(r.baseline_pj, '13.1f'):>13} {num(r.p2m_pj, '13.1f'):>13} "
                     f"{(num(r.savings_pct, '.1f') + '%') if r.savings_pct is not None else '-':>8} "
                     f"{num(r.accuracy, '7.3f'):>7}")
    return "\n".join(lines) + "\n"
