"""Two branch points merging: Omega11 grows like (k / 2 pi i) log(gap)."""

from superperiod.oracle import degeneration_log_probe

for merge in ("uu", "uv"):
    pr = degeneration_log_probe(merge_type=merge, gaps=(1e-2, 1e-3, 1e-4, 1e-5))
    print(merge, "k per decade:", [round(float(k), 6) for k in pr.k_increments], "drift:", f"{pr.offdiag_drift:.1e}")
