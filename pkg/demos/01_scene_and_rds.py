"""Scenes, range differences, and the two RD containers.

Builds a small room scene, derives the full pairwise RD matrix and a
single-reference RD vector from it, and shows the TDOA <-> RD
conversion round trip that the signal front-end relies on.
"""

import numpy as np

from multilat import (
    Scene,
    select_reference,
    tdoa_to_rd,
    true_rd_full,
    true_rd_ref,
)

MICS = np.array([
    [0.0, 0.0, 1.0],
    [4.0, 0.0, 1.1],
    [4.0, 3.0, 0.9],
    [0.0, 3.0, 1.2],
    [2.0, 1.5, 2.4],
])
SOURCE = np.array([1.2, 2.1, 1.6])


def main():
    scene = Scene(mics=MICS, source=SOURCE)
    print(f"scene: {scene.mic_count} mics, source at {SOURCE}")

    full = true_rd_full(scene)
    print("\nfull RD matrix (entry (m, m') = range(m') - range(m), metres):")
    print(np.array_str(full.values, precision=3, suppress_small=True))
    print("antisymmetry check:",
          np.max(np.abs(full.values + full.values.T)))

    ref = select_reference(scene.mics)
    row = true_rd_ref(scene, ref)
    print(f"\nreference policy picked mic {ref} (nearest to barycenter)")
    print("reference RD vector:", np.round(row.values, 3))

    # the front-end measures delays in seconds; scaling by the sound
    # speed must reproduce the geometric RDs exactly
    tdoa = full.values / scene.sound_speed
    back = tdoa_to_rd(tdoa, scene.sound_speed)
    print("\nTDOA -> RD round trip max error:",
          np.max(np.abs(back - full.values)))


if __name__ == "__main__":
    main()
