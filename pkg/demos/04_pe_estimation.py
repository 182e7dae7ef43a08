"""
Estimating chunk failure probabilities
======================================

A chunk placed in stage z is protected by codes z..M. Its failure
probability is measured by building short frames, sending them over the
binary symmetric channel and checking the chunk's CRC after peeling. The
table written here is what the analysis and optimizer consume.
"""
import itertools
import tempfile
from pathlib import Path

from cbcstream.codes import PeTable, default_rcpc, estimate_pe, read_pe_csv, write_pe_csv

codes = default_rcpc(["1/2", "4/5"])
table = PeTable()
for seq in itertools.chain(itertools.product(codes.rates, repeat=1), itertools.product(codes.rates, repeat=2)):
    entry = estimate_pe(seq, 120, 0.05, trials=200, seed=4, code_set=codes)
    table.add(seq, 120, 0.05, entry)
    label = " inside ".join(str(r) for r in seq)
    print(f"  {label:>14}: P_e = {entry.pe:.3f} +- {entry.stderr:.3f}")

path = Path(tempfile.mkdtemp()) / "pe.csv"
write_pe_csv(table, path)
print("round trip equal:", read_pe_csv(path).items() == table.items())
