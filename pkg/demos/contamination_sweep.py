"""Sweep an interferer across a victim's angular support.

Shows the piecewise envelope cost next to the exact covariance-form
interference integral at the interferer's endpoints while the interferer
slides past the victim, then how the envelope tightens toward the true
kernel maximum as the antenna count grows.
"""

import numpy as np

from cellpilot import (
    AoAInterval,
    dirichlet_magnitude,
    interference_integral,
    pair_cost,
)

D = 4.0            # victim link gain
VICTIM = AoAInterval(center=np.pi / 3, half_width=0.08)
WIDTH = 0.05       # interferer half-width
M_SWEEP = 32
M_CONVERGENCE = (16, 64, 128, 256)


def endpoint_integral(target, interferer, D, M):
    return (interference_integral(interferer.low, target, D, M)
            + interference_integral(interferer.high, target, D, M))


def grid_kernel_max(target, interferer, D, M, n=513):
    cos_w = np.cos(np.linspace(target.low, target.high, n))
    total = 0.0
    for phi in (interferer.low, interferer.high):
        vals = [dirichlet_magnitude(np.cos(phi) - u, M, 0.5) for u in cos_w]
        total += np.sqrt(D) * max(vals) / M
    return total


def main():
    print(f"victim support [{VICTIM.low:.3f}, {VICTIM.high:.3f}] rad, "
          f"M = {M_SWEEP}, gain D = {D}")
    print("\n offset[rad]   envelope cost   endpoint integral")
    for offset in np.linspace(-0.5, 0.5, 21):
        iv = AoAInterval(center=VICTIM.center + offset, half_width=WIDTH)
        cost = pair_cost(VICTIM, iv, D, M_SWEEP)
        exact = endpoint_integral(VICTIM, iv, D, M_SWEEP)
        bar = "#" * int(round(10 * cost / (2 * np.sqrt(D))))
        print(f"  {offset:+9.3f}   {cost:13.4f}   {exact:17.4f}  {bar}")

    print("\nenvelope vs grid max of the kernel (overlapping pair):")
    iv = AoAInterval(center=VICTIM.center + 0.1, half_width=WIDTH)
    print("   M    envelope    kernel max    |gap| / 2 sqrt(D)")
    for M in M_CONVERGENCE:
        approx = pair_cost(VICTIM, iv, D, M)
        exact = grid_kernel_max(VICTIM, iv, D, M)
        gap = abs(approx - exact) / (2 * np.sqrt(D))
        print(f"  {M:4d}  {approx:10.4f}  {exact:12.4f}    {gap:14.5f}")


if __name__ == "__main__":
    main()
