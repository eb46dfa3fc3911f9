"""MCS table: modulation order, code rate, and transport block size.

The 29-entry table is shipped as a data file.  Spectral efficiency is
TBS / 1008 (the per-subframe resource-element count), and the nominal code
rate is the fraction of a transport block within the data payload.
"""

import csv
from dataclasses import dataclass
from importlib import resources

__all__ = ["McsEntry", "load_mcs_table", "mcs_entry"]


@dataclass(frozen=True)
class McsEntry:
    index: int
    qm: int          # bits per modulated symbol: 2, 4, or 6
    cr_x1024: int    # nominal code rate numerator (denominator 1024)
    tbs: int         # transport block size in bits
    se: float        # spectral efficiency, bit/s/Hz

    @property
    def code_rate(self) -> float:
        return self.cr_x1024 / 1024.0


def load_mcs_table() -> list:
    """All MCS entries, ordered by index."""
    text = resources.files("ofdm_fama.data").joinpath("mcs_table.csv").read_text()
    table = []
    for row in csv.DictReader(text.splitlines()):
        table.append(
            McsEntry(
                index=int(row["index"]),
                qm=int(row["qm"]),
                cr_x1024=int(row["cr_x1024"]),
                tbs=int(row["tbs"]),
                se=float(row["se"]),
            )
        )
    if [e.index for e in table] != list(range(len(table))):
        raise ValueError("MCS table indices must be 0..28 in order")
    return table


_TABLE = None


def mcs_entry(index: int) -> McsEntry:
    global _TABLE
    if _TABLE is None:
        _TABLE = load_mcs_table()
    if not 0 <= index < len(_TABLE):
        raise ValueError(f"MCS index {index} outside 0..{len(_TABLE) - 1}")
    return _TABLE[index]
