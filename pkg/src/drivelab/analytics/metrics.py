"""Modality sequence metrics over interaction events.

For each participant and task window the chain is the modality order by
onset; gaps are successive onset differences. Simultaneous onsets sort by
kind, then modality, then id, so chains are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..model import EventRecord


@dataclass
class ModalityChain:
    participant_id: str
    window: str  # task key ("" when events carry no task attr)
    modalities: list[str]
    onsets: list[int]
    gaps: list[int] = field(default_factory=list)

    @property
    def mean_gap_ms(self) -> float | None:
        return sum(self.gaps) / len(self.gaps) if self.gaps else None

    def to_json(self) -> dict:
        return {
            "participant_id": self.participant_id,
            "window": self.window,
            "chain": list(self.modalities),
            "onsets": [int(t) for t in self.onsets],
            "gaps": [int(g) for g in self.gaps],
            "mean_gap_ms": self.mean_gap_ms,
        }


@dataclass
class SequenceMetrics:
    chains: list[ModalityChain]

    @property
    def dataset_mean_gap_ms(self) -> float | None:
        gaps = [g for c in self.chains for g in c.gaps]
        return sum(gaps) / len(gaps) if gaps else None

    def to_json(self) -> dict:
        return {"chains": [c.to_json() for c in self.chains], "dataset_mean_gap_ms": self.dataset_mean_gap_ms}

    def to_csv(self) -> str:
        lines = ["participant_id,window,chain,mean_gap_ms"]
        for c in self.chains:
            mean = "" if c.mean_gap_ms is None else f"{c.mean_gap_ms:.3f}"
            lines.append(f"{c.participant_id},{c.window},{'->'.join(c.modalities)},{mean}")
        overall = self.dataset_mean_gap_ms
        lines.append(f"ALL,,,{'' if overall is None else f'{overall:.3f}'}")
        return "\n".join(lines) + "\n"


def modality_sequence_metrics(events: list[EventRecord]) -> SequenceMetrics:
    groups: dict[tuple[str, str], list[EventRecord]] = {}
    for e in events:
        if e.kind != "interaction":
            continue
        modality = e.attrs.get("modality")
        if not modality:
            continue
        key = (e.participant_id, e.attrs.get("task", ""))
        groups.setdefault(key, []).append(e)

    chains = []
    for (pid, window), evs in sorted(groups.items()):
        evs.sort(key=lambda e: (e.t_start, e.kind, e.attrs.get("modality", ""), e.id))
        onsets = [e.t_start for e in evs]
        chains.append(
            ModalityChain(
                participant_id=pid,
                window=window,
                modalities=[e.attrs["modality"] for e in evs],
                onsets=onsets,
                gaps=[b - a for a, b in zip(onsets, onsets[1:])],
            )
        )
    return SequenceMetrics(chains=chains)
