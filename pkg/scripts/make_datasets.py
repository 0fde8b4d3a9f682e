"""Regenerate the bundled datasets under src/gramevo/datasets/.

Output is deterministic; rerunning rewrites identical files.
"""

from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent / "src" / "gramevo" / "datasets"


def write(name, split, x, y):
    folder = ROOT / name
    folder.mkdir(parents=True, exist_ok=True)
    header = ",".join([f"x{i}" for i in range(x.shape[1])] + ["y"])
    rows = [",".join(repr(float(v)) for v in (*r, t)) for r, t in zip(x, y)]
    (folder / f"{split}.csv").write_text("\n".join([header, *rows]) + "\n", encoding="utf-8")


def vladislavleva4(x):
    return 10.0 / (5.0 + np.sum((x - 3.0) ** 2, axis=1))


def quartic(x):
    v = x[:, 0]
    return v ** 4 + v ** 3 + v ** 2 + v


def main():
    rng = np.random.default_rng(2017)

    x = rng.uniform(0.05, 6.05, size=(1024, 5))
    write("Vladislavleva4", "Train", x, vladislavleva4(x))
    x = rng.uniform(-0.25, 6.35, size=(5000, 5))
    write("Vladislavleva4", "Test", x, vladislavleva4(x))

    x = np.linspace(-1.0, 1.0, 20).reshape(-1, 1)
    write("Quartic", "Train", x, quartic(x))
    x = rng.uniform(-1.0, 1.0, size=(100, 1))
    write("Quartic", "Test", x, quartic(x))

    # two classes: inside or outside a disc of radius sqrt(0.5)
    for split, n in (("Train", 200), ("Test", 400)):
        x = rng.uniform(-1.0, 1.0, size=(n, 2))
        write("Disc", split, x, (np.sum(x * x, axis=1) < 0.5).astype(float))


if __name__ == "__main__":
    main()
