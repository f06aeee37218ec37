"""Scanning a binary sequence for a single change."""
from identlab._random import substream
from identlab.estimators import changepoint_scan
from identlab.models import BinarySpec, sample_binary

for q in (0.2, 0.6):
    x = sample_binary(BinarySpec("ChangePoint", 0.2, m_cp=101, q_fixed=q), 200, substream(8))
    res = changepoint_scan(x, null_reps=2000, stream=substream(9))
    print(f"q={q}: statistic {res.statistic:.2f} at split {res.split_index}, p-value {res.p_value:.3f}")
