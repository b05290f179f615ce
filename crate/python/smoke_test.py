"""Smoke test for the armplan_py extension module.

Build and install first:

    pip install maturin
    maturin develop -m crates/python/Cargo.toml --release

then run `python python/smoke_test.py`.
"""

import math
import sys

import armplan_py as ap


def main() -> int:
    arm = ap.Arm()
    assert arm.end_effector((0.0, 0.0, 0.0)) == (0.0, 0.0, 3.0)

    g = ap.segment_clearance((0, 0, 0), (0, 0, 1), (0.05, 0, 1.1))
    assert not g["within"]

    goal = arm.end_effector((0.6, 1.0, 0.5))
    obstacles = [
        ap.Obstacle((0.9, 0.9, 2.0), 0.2, velocity=(0.0, 0.0, -0.03)),
        ap.Obstacle.cube((-0.6, 1.0, 1.4), 0.25, velocity=(0.04, 0.0, 0.0)),
    ]
    traj = ap.plan(arm, (0.0, 0.0, 0.0), goal, obstacles, seed=7)
    print(traj)
    for q, d in zip(traj.waypoints, traj.distances):
        print("  " + " ".join(f"{math.degrees(a):8.3f}" for a in q) + f"  dist={d:.4f}")
    assert traj.success, "planner did not reach the goal"
    assert not any(traj.threats[1:])

    bench = ap.de_bench("rastrigin", 6, seed=1)
    print(f"rastrigin best={bench['best_cost']:.4g} after {bench['evaluations']} evaluations")

    stats = ap.monte_carlo(trials=20, seed=1)
    print(f"monte carlo: {stats['successes']}/{stats['trials']} successes, threat rate {stats['threat_rate']}")
    print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
