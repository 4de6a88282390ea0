from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Union, overload

import numpy as np

from eprsim.errors import ConfigError
from eprsim.types import Arm, Basis

logger = logging.getLogger("eprsim")

CSV_COLUMNS = ["shot", "arm", "basis", "d_first", "d_second"]
_ARMS = (Arm.A, Arm.B)
_BASES = (Basis.Z, Basis.X)


@dataclass(frozen=True)
class MeasurementRecord:
    """
    One coincidence window of an arm.

    Args:
        arm: A pairs detectors (D1, D2), B pairs (D3, D4)
        basis: z or x setting of both detectors
        outcome_first: +1 (H) / -1 (V) on the partner-photon detector, None if it did not fire
        outcome_second: same for the circuit-photon detector
        shot_index: position of the shot within its (arm, basis) block
    """

    arm: Arm
    basis: Basis
    outcome_first: Optional[int]
    outcome_second: Optional[int]
    shot_index: int

    def __post_init__(self):
        object.__setattr__(self, "arm", Arm.parse(self.arm))
        object.__setattr__(self, "basis", Basis.parse(self.basis))
        for outcome in (self.outcome_first, self.outcome_second):
            if outcome not in (1, -1, None):
                raise ValueError(f"Detector outcome must be +1, -1 or None, got {outcome!r}")

    @property
    def dropped(self) -> bool:
        return self.outcome_first is None or self.outcome_second is None

    @property
    def product(self) -> int:
        assert not self.dropped, f"Shot {self.shot_index} was dropped and has no outcome product"
        return self.outcome_first * self.outcome_second


class RecordSet(Sequence[MeasurementRecord]):
    """Column-oriented store of measurement records.

    Outcomes are kept as int8 columns with 0 marking a detector that did not fire.
    Iterating or indexing yields `MeasurementRecord` values.
    """

    def __init__(self, arm, basis, first, second, shot):
        self.arm = np.asarray(arm, dtype=np.int8)
        self.basis = np.asarray(basis, dtype=np.int8)
        self.first = np.asarray(first, dtype=np.int8)
        self.second = np.asarray(second, dtype=np.int8)
        self.shot = np.asarray(shot, dtype=np.int64)
        n = self.shot.size
        assert all(col.shape == (n,) for col in (self.arm, self.basis, self.first, self.second)), "Ragged record columns"

    @classmethod
    def empty(cls) -> RecordSet:
        return cls([], [], [], [], [])

    @classmethod
    def block(cls, arm: Arm, basis: Basis, outcomes: np.ndarray) -> RecordSet:
        """Records of one (arm, basis) block from an (n, 2) outcome array."""
        n = outcomes.shape[0]
        return cls(
            np.full(n, arm.index), np.full(n, basis.index), outcomes[:, 0], outcomes[:, 1], np.arange(n)
        )

    @classmethod
    def from_records(cls, records: Iterable[MeasurementRecord]) -> RecordSet:
        if isinstance(records, RecordSet):
            return records
        records = list(records)
        return cls(
            [r.arm.index for r in records],
            [r.basis.index for r in records],
            [r.outcome_first or 0 for r in records],
            [r.outcome_second or 0 for r in records],
            [r.shot_index for r in records],
        )

    @classmethod
    def concat(cls, sets: Iterable[RecordSet]) -> RecordSet:
        sets = list(sets)
        if not sets:
            return cls.empty()
        return cls(*(np.concatenate([getattr(s, col) for s in sets]) for col in ("arm", "basis", "first", "second", "shot")))

    def __len__(self) -> int:
        return int(self.shot.size)

    @overload
    def __getitem__(self, index: int) -> MeasurementRecord: ...

    @overload
    def __getitem__(self, index: slice) -> RecordSet: ...

    def __getitem__(self, index):
        if isinstance(index, slice):
            return self._take(np.arange(len(self))[index])
        if index < 0:
            index += len(self)
        if not 0 <= index < len(self):
            raise IndexError(f"Record index {index} out of range")
        first, second = int(self.first[index]), int(self.second[index])
        return MeasurementRecord(
            _ARMS[self.arm[index]],
            _BASES[self.basis[index]],
            first or None,
            second or None,
            int(self.shot[index]),
        )

    def __iter__(self) -> Iterator[MeasurementRecord]:
        for i in range(len(self)):
            yield self[i]

    def _take(self, index) -> RecordSet:
        return RecordSet(self.arm[index], self.basis[index], self.first[index], self.second[index], self.shot[index])

    @property
    def dropped_mask(self) -> np.ndarray:
        return (self.first == 0) | (self.second == 0)

    def kept(self) -> RecordSet:
        """Coincidence post-selection: only shots where both detectors fired."""
        return self._take(~self.dropped_mask)

    def select(self, arm: Arm | str, basis: Optional[Basis | str] = None) -> RecordSet:
        mask = self.arm == Arm.parse(arm).index
        if basis is not None:
            mask &= self.basis == Basis.parse(basis).index
        return self._take(mask)

    def products(self, arm: Arm | str, basis: Basis | str) -> np.ndarray:
        """Outcome products of the kept shots of one (arm, basis) block."""
        block = self.select(arm, basis).kept()
        return block.first.astype(np.int64) * block.second.astype(np.int64)

    def same_as(self, other: RecordSet) -> bool:
        return all(
            np.array_equal(getattr(self, col), getattr(other, col)) for col in ("arm", "basis", "first", "second", "shot")
        )

    def to_csv(self, path: Union[Path, str]):
        """Write `shot,arm,basis,d_first,d_second`; a detector that did not fire is left empty."""
        path = Path(path)
        with path.open("w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for shot, arm, basis, first, second in zip(self.shot, self.arm, self.basis, self.first, self.second):
                writer.writerow(
                    [int(shot), _ARMS[arm].value, _BASES[basis].value, _format_outcome(first), _format_outcome(second)]
                )
        logger.info(f"Wrote {len(self)} records to {path}")

    @classmethod
    def from_csv(cls, path: Union[Path, str]) -> RecordSet:
        records: List[MeasurementRecord] = []
        with Path(path).open(newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames != CSV_COLUMNS:
                raise ConfigError(f"{path}: expected header {','.join(CSV_COLUMNS)}, got {reader.fieldnames}")
            for row in reader:
                records.append(
                    MeasurementRecord(
                        Arm.parse(row["arm"]),
                        Basis.parse(row["basis"]),
                        _parse_outcome(row["d_first"]),
                        _parse_outcome(row["d_second"]),
                        int(row["shot"]),
                    )
                )
        return cls.from_records(records)


def _format_outcome(value) -> str:
    value = int(value)
    if value == 0:
        return ""
    return "+1" if value > 0 else "-1"


def _parse_outcome(text: str) -> Optional[int]:
    text = text.strip()
    return int(text) if text else None
