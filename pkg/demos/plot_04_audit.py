"""
Auditing for look-ahead
=======================

Running the pipeline on a prefix of the data must reproduce the first
rows of the full run exactly. A pipeline that peeks at the future breaks
this, and the audit names the first bar and column where it happens.
"""

import numpy as np

from forwardsignal import audit_causality, causal_trace, compute_indicators
from forwardsignal.synthetic import random_walk_bars

bars = random_walk_bars(10_000, seed=5)
print(audit_causality(bars, cuts=50, seed=1, trace=causal_trace()).summary())

###############################################################################
# A leaky variant: Bollinger %B normalised by the mean over the whole
# series instead of a trailing window.


def leaky_trace(series):
    bb = compute_indicators(series).bb_pct
    return {"bb_centered": bb - np.nanmean(bb)}


print(audit_causality(bars, cuts=50, seed=1, trace=leaky_trace).summary())
