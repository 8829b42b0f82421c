"""Contrast r(beta, theta) table and the ratio R at the quoted analyzing power."""
import numpy as np

from rocent.compton import ComptonKinematics, contrast_from_kn, perpendicular_parallel_ratio

thetas = np.linspace(np.pi / 12, np.pi, 12)
print("theta_deg," + ",".join(f"beta={b}" for b in (0.1, 0.5, 1.0, 2.0)))
for t in thetas:
    row = [contrast_from_kn(ComptonKinematics(b, t)) for b in (0.1, 0.5, 1.0, 2.0)]
    print(f"{np.degrees(t):.1f}," + ",".join(f"{v:.4f}" for v in row))
print(f"R(0.69, 0.69) = {perpendicular_parallel_ratio(0.69, 0.69):.5f}")
