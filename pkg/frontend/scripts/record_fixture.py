"""Record the viewer-fidelity fixture from the real session service.

Drives a scripted 50-event navigation (each event passes the 200 ms pacing
gate) through OicService, records every request and the response metrics,
then replays the identical directions through the offline simulator and
embeds its accumulated bits after asserting they match the service's.

    python frontend/scripts/record_fixture.py
"""

import json
import math
import pathlib

from oic360 import encoder, fixtures, service
from oic360.container import HeadTrace
from oic360.geom import Direction
from oic360.service import OicService

OUT = pathlib.Path(__file__).resolve().parent.parent / "test" / "fixtures" \
    / "session_fixture.json"

VP = (128, 128)
FOV = math.pi / 2
EVENT_SPACING_MS = 210  # above the 200 ms gate: every event becomes a request
N_EVENTS = 50


def scripted_events():
    """Deterministic drag path: an eastward pan with a slow nod."""
    lon, lat = 0.15, 0.02
    events = []
    for k in range(N_EVENTS):
        events.append({"t_ms": k * EVENT_SPACING_MS,
                       "longitude": lon, "latitude": lat, "fov": FOV})
        lon += 0.035
        lat = 0.02 + 0.25 * math.sin(k / 7.0)
    return events


def main():
    img = fixtures.synthetic_equirect()
    enc = encoder.encode_image(img, qp=42, mode="theoretical")
    svc = OicService(enc, img)

    events = scripted_events()
    steps = []
    for ev in events:
        resp = svc.handle_message({
            "type": "request", "session_id": "fixture",
            "longitude": ev["longitude"], "latitude": ev["latitude"],
            "fov": ev["fov"], "vp_dims": list(VP)})
        assert resp["type"] == "response", resp
        steps.append({
            "event": ev,
            "metrics": resp["metrics"],
            "blocks": resp["blocks"],
            "grid": resp["grid"],
            "decoded_bitmap_b64": resp["decoded_bitmap_b64"],
            "access_blocks": resp["access_blocks"],
        })

    # offline replay of the same directions must account identically
    trace = HeadTrace(users={"fixture": [
        (ev["t_ms"], Direction(ev["longitude"], ev["latitude"]))
        for ev in events]})
    log = service.simulate(enc, trace, fov=FOV, vp_dims=VP, original=img)
    for step, row in zip(steps, log):
        assert step["metrics"]["request_bits"] == row["bits"]
        assert step["metrics"]["accumulated_bits"] == row["accum_bits"]

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({
        "vp_dims": list(VP),
        "event_spacing_ms": EVENT_SPACING_MS,
        "steps": steps,
        "simulate_accum_bits": [row["accum_bits"] for row in log],
    }, indent=1))
    print(f"wrote {OUT} ({len(steps)} steps, final accumulated "
          f"{log[-1]['accum_bits']} bits)")


if __name__ == "__main__":
    main()
