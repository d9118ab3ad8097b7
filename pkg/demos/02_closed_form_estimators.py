"""Noiseless localization with every estimator in the package.

All four methods recover the source exactly from clean RDs.  The
second half visits the minimal four-microphone case: the plane system
degenerates to a line by construction, the quadratic completion picks
the physical intersection, and — when a second point explains the data
equally well — the result says so via ``info["ambiguous"]``.
"""

import numpy as np

from multilat import (
    Scene,
    conic_ls,
    hyperbolic_ls,
    srd_ls,
    true_rd_full,
    true_rd_ref,
    usrd_ls,
)

MICS = np.array([
    [0.0, 0.0, 1.0],
    [4.0, 0.0, 1.1],
    [4.0, 3.0, 0.9],
    [0.0, 3.0, 1.2],
    [2.0, 1.5, 2.4],
    [1.0, 0.5, 0.3],
])
SOURCE = np.array([2.6, 1.1, 1.4])


def main():
    scene = Scene(mics=MICS, source=SOURCE)
    full = true_rd_full(scene)
    row = true_rd_ref(scene, 0)

    print(f"{scene.mic_count} mics, noiseless RDs\n")
    print(f"{'method':<12} {'error (m)':<12} status")
    for name, result in [
        ("usrd-ls", usrd_ls(row, scene.mics)),
        ("srd-ls", srd_ls(row, scene.mics)),
        ("conic", conic_ls(full, scene.mics)),
        ("conic-norm", conic_ls(full, scene.mics, normalize=True)),
        ("hyperbolic", hyperbolic_ls(row, scene.mics)),
    ]:
        err = np.linalg.norm(result.position - SOURCE)
        print(f"{name:<12} {err:<12.3g} {result.status}")

    # minimal array: four mics, four triplet planes, rank-2 stack
    minimal = Scene(mics=MICS[:4], source=SOURCE)
    result = conic_ls(true_rd_full(minimal), minimal.mics)
    err = np.linalg.norm(result.position - SOURCE)
    print(f"\nminimal 4-mic array: conic error {err:.3g} m")
    print("plane-stack rank:", result.info["rank"],
          "| line completed:", result.info.get("line_completed", False),
          "| ambiguous:", result.info.get("ambiguous", False))

    # usrd needs an extra microphone for its unconstrained system
    try:
        usrd_ls(true_rd_ref(minimal, 0), minimal.mics)
    except ValueError as exc:
        print("usrd-ls on 4 mics:", exc)

    # some minimal arrays admit a second source with identical RDs
    # (every range offset by the same constant); the estimator returns
    # the near one and flags that it chose by convention
    tricky = Scene(
        mics=np.array([
            [0.32639343985437375, -2.798395870987708, 2.7377143603230447],
            [-2.459178658133877, -1.2462467326071787, 0.12759476356509936],
            [-2.593479224485214, 2.615773667325662, 1.3643046694790817],
            [0.9455503280490998, 1.0874045798723833, 2.5951405190773578],
        ]),
        source=np.array(
            [0.1022479385186304, -2.4193135806510995, 2.5490548030898106]))
    result = conic_ls(true_rd_full(tricky), tricky.mics)
    err = np.linalg.norm(result.position - tricky.source)
    print(f"\nambiguous 4-mic array: conic error {err:.3g} m, "
          f"ambiguous flag: {result.info.get('ambiguous', False)}")


if __name__ == "__main__":
    main()
