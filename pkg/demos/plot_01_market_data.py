"""
Reading bars and filtering the weekend
======================================

Parse an OHLCV CSV, then drop the bars that fall in the forex weekend
closure (Friday 18:00 to Sunday 18:00, New York time).
"""

import io

from forwardsignal import SessionPolicy, filter_sessions, parse_bars
from forwardsignal.synthetic import bars_to_csv, random_walk_bars

# one week of minute bars starting Monday 2024-01-01 00:00 UTC
raw_csv = bars_to_csv(random_walk_bars(7 * 24 * 60, seed=1))
print(raw_csv.decode().splitlines()[:3])

bars = parse_bars(io.BytesIO(raw_csv))
print("parsed", len(bars), "bars from", bars.timestamps_iso()[0], "to", bars.timestamps_iso()[-1])

###############################################################################
# Session filtering works in the policy's timezone, so daylight saving is
# handled by the zone database rather than by fixed UTC offsets.

policy = SessionPolicy("America/New_York")
open_bars = filter_sessions(bars, policy)
print("kept", len(open_bars), "of", len(bars), "bars")
print("dropped", (len(bars) - len(open_bars)) / 60, "hours of weekend")

###############################################################################
# Bad rows are rejected with the line number of the offending record.

lines = raw_csv.decode().splitlines()
lines[10] = lines[10].rsplit(",", 2)[0] + ",0.0,12.5"
try:
    parse_bars(io.StringIO("\n".join(lines)))
except ValueError as exc:
    print("rejected:", exc)
