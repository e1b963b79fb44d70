"""Walk one joint coordinate through the full codec, both directions.

A ground-truth joint at (50.8, 33.2) in a 256x192 image becomes a Gaussian
heatmap target on a 64x48 grid (resolution ratio 4), then gets decoded back
by the three decoders so their accuracy can be compared directly.
"""

import hmcodec as hc

JOINT = (50.8, 33.2)
LAM = 4.0
SIGMA = hc.GaussianParams(2.0)
HEIGHT, WIDTH = 48, 64

print(f"ground-truth joint (original image): {JOINT}")

config = hc.EncodingConfig(lam=LAM, sigma=SIGMA, mode="unbiased")
heatmap, stages = hc.encode(JOINT, config, HEIGHT, WIDTH)
print(f"reduced coordinate g' = g / {LAM:g}:    {stages.g_prime}")
print(f"unbiased target: kernel centered at the sub-pixel g', "
      f"peak pixel at {hc.argmax_decode(heatmap)[0]}")

biased_cfg = hc.EncodingConfig(lam=LAM, sigma=SIGMA, mode="biased", quantiser="floor")
_, biased_stages = hc.encode(JOINT, biased_cfg, HEIGHT, WIDTH)
print(f"biased target would instead snap the center to g'' = {biased_stages.g_double_prime}, "
      f"displacing it by ({stages.g_prime[0] - biased_stages.g_double_prime[0]:.2f}, "
      f"{stages.g_prime[1] - biased_stages.g_double_prime[1]:.2f}) px before training even starts")

print()
print("decoding the unbiased heatmap back to the original image:")
for label, cfg in [
    ("argmax", hc.DecodeConfig(method="argmax", lam=LAM)),
    ("0.25-px shift", hc.DecodeConfig(method="standard_shift", lam=LAM)),
    ("taylor refinement", hc.DecodeConfig(method="dark", modulate=False, sigma=SIGMA, lam=LAM)),
]:
    result = hc.decode(heatmap, cfg)
    err = ((result.p_hat[0] - JOINT[0]) ** 2 + (result.p_hat[1] - JOINT[1]) ** 2) ** 0.5
    print(f"  {label:18s} p_hat = ({result.p_hat[0]:9.5f}, {result.p_hat[1]:9.5f})"
          f"   error = {err:.2e} px")

print()
print("the log-heatmap is exactly quadratic for a clean Gaussian, so the")
print("single Newton step lands on the sub-pixel center to machine precision.")
