import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(__file__)))

from fatou_lab.service import LabService
from fatou_lab.core.schemas import ExperimentConfig
from fatou_lab.core.exceptions import FatouLabError


def run_acceptance():
    """Run the calibration experiments on Free(2) and compare headlines with the tree oracles"""
    lab = LabService()

    checks = [
        {
            "name": "Ball growth",
            "operation": "ball",
            "params": {"radius": 4},
            "expect": lambda h: int(h) == 2 * 3 ** 4 - 1,
        },
        {
            "name": "Tree is 0-hyperbolic",
            "operation": "delta",
            "params": {"radius": 3},
            "expect": lambda h: h == "0",
        },
        {
            "name": "Admissibility of SRW",
            "operation": "admissible",
            "params": {},
            "expect": lambda h: h == "m1=1 l=2 c0=0.25",
        },
        {
            "name": "Green function G(e,e)",
            "operation": "green",
            "params": {"x": "e", "y": "e", "radius": 20},
            "expect": lambda h: abs(float(h) - 1.5) < 1e-6,
        },
        {
            "name": "Martin kernel K(a, a^5)",
            "operation": "martin",
            "params": {"x": "a", "y": "a^5"},
            "expect": lambda h: abs(float(h) - 3.0) < 1e-4,
        },
        {
            "name": "Poisson integral of cyl(a) at e",
            "operation": "poisson",
            "params": {"region": "a", "radius": 20},
            "expect": lambda h: abs(float(h) - 0.25) < 1e-6,
        },
        {
            "name": "Conditioned exit toward a^inf",
            "operation": "condition",
            "params": {"theta": "a", "radius": 15, "n_traj": 10_000},
            "expect": lambda h: float(h) >= 0.99,
        },
        {
            "name": "Bounded implies convergent",
            "operation": "theorem",
            "params": {"u": "poisson:a", "n_thetas": 100, "radius": 12},
            "expect": lambda h: h.startswith("off_diagonal=0 "),
        },
    ]

    failures = 0
    for check in checks:
        print(f"\n🔬 Checking: {check['name']}")

        config = ExperimentConfig(group="free:2", step="srw", operation=check["operation"], params=check["params"])

        try:
            outcome = lab.run(config)
        except FatouLabError as e:
            failures += 1
            print(f"❌ Failed: {e}")
            continue

        if outcome.report.passed and check["expect"](outcome.headline):
            print(f"✅ Success! {outcome.headline}")
        else:
            failures += 1
            print(f"❌ Mismatch: {outcome.headline}")

    stats = lab.get_stats()
    print(f"\n{stats.passed_total} passed, {stats.failed_total} failed, {failures} off oracle")
    return failures


if __name__ == "__main__":
    sys.exit(1 if run_acceptance() else 0)
