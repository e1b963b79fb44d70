"""Round-trip the interchange formats and drive the CLI in-process.

The binary heatmap tensor format (20-byte header + float32 payload) and the
keypoint JSON document are the codec's only external surfaces; everything
the CLI does is reachable through them.
"""

import json
import tempfile
from pathlib import Path

import hmcodec as hc
from hmcodec.cli import main

workdir = Path(tempfile.mkdtemp(prefix="hmcodec_demo_"))
kp_in = workdir / "joints.json"
maps = workdir / "targets.hmap"
kp_out = workdir / "decoded.json"

doc = hc.KeypointDocument(
    lam=4.0,
    keypoints=((41.2, 27.2, 1.0), (100.0, 120.4, 1.0), (13.3, 57.9, 1.0)),
)
hc.write_keypoints(kp_in, doc)
print(f"wrote {kp_in}:")
print(kp_in.read_text())

print("encoding via the CLI (one heatmap per keypoint):")
main(["encode", "--keypoints", str(kp_in), "--out", str(maps),
      "--height", "48", "--width", "64", "--sigma", "2"])
raw = maps.read_bytes()
print(f"  {maps.name}: {len(raw)} bytes = 20-byte header + 3 * 48 * 64 * 4 payload")
print(f"  magic/version/dtype: {raw[:4]} v{raw[4]} dtype={raw[5]}")

print()
print("inspecting:")
main(["inspect", "--heatmaps", str(maps)])

print()
print("decoding back with the full pipeline:")
main(["decode", "--heatmaps", str(maps), "--out", str(kp_out),
      "--method", "dark", "--sigma", "2", "--lambda", "4"])
decoded = json.loads(kp_out.read_text())
for orig, back in zip(doc.keypoints, decoded["keypoints"]):
    print(f"  {tuple(orig[:2])} -> ({back[0]:.5f}, {back[1]:.5f})  score {back[2]:.4f}")

print()
print("scoring predictions against the inputs:")
main(["eval", "--pred", str(kp_out), "--gt", str(kp_in), "--pck-threshold", "0.5", "--norm", "6.0"])

# library round-trip is bit-exact
again = workdir / "again.hmap"
hc.write_heatmaps(again, hc.read_heatmaps(maps))
print(f"\nwrite(read(file)) bitwise identical: {again.read_bytes() == raw}")
