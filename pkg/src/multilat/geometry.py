"""Scene representation and ground-truth range differences.

A scene is a rigid arrangement of M microphones, an optional source
position, and a speed of sound.  All positions are 3D, in meters.  The
basic observable of multilateration is the *range difference* (RD)

    d[m, m'] = ||r_m' - r_s|| - ||r_m - r_s||  =  c * tau[m, m'],

i.e. the TDOA between microphones m and m' scaled by the sound speed.
The full pairwise set of RDs is antisymmetric with a zero diagonal
(``RdMatrix``); fixing a reference microphone and keeping only its row
gives the non-redundant set of M-1 values (``RdVector``).
"""

from dataclasses import dataclass, field

import numpy as np

#: Speed of sound in air at ~20 degrees C, m/s.
DEFAULT_SOUND_SPEED = 343.0

_MIN_MIC_SEPARATION = 1e-9


def _as_points(x, name):
    pts = np.asarray(x, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"{name} must be an (M, 3) array of 3D points")
    if not np.all(np.isfinite(pts)):
        raise ValueError(f"{name} must be finite")
    return pts


@dataclass(frozen=True)
class Scene:
    """Microphone array plus (optionally) the true source position.

    Parameters
    ----------
    mics : (M, 3) array_like
        Microphone positions in meters, M >= 2, pairwise distinct.
    source : (3,) array_like or None
        True source position; ``None`` when ground truth is unknown
        (e.g. when localizing real recordings).
    sound_speed : float
        Speed of sound in m/s, > 0.
    """

    mics: np.ndarray
    source: np.ndarray | None = None
    sound_speed: float = DEFAULT_SOUND_SPEED

    def __post_init__(self):
        mics = _as_points(self.mics, "mics")
        if mics.shape[0] < 2:
            raise ValueError("a scene needs at least two microphones")
        diff = mics[:, None, :] - mics[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        np.fill_diagonal(dist, np.inf)
        if dist.min() <= _MIN_MIC_SEPARATION:
            raise ValueError("microphone positions must be pairwise distinct")
        mics.setflags(write=False)
        object.__setattr__(self, "mics", mics)
        if self.source is not None:
            src = np.asarray(self.source, dtype=float).reshape(3)
            if not np.all(np.isfinite(src)):
                raise ValueError("source position must be finite")
            src.setflags(write=False)
            object.__setattr__(self, "source", src)
        if not (np.isfinite(self.sound_speed) and self.sound_speed > 0):
            raise ValueError("sound_speed must be positive")

    @property
    def mic_count(self):
        return self.mics.shape[0]

    def source_distances(self):
        """Distances D_m from each microphone to the source."""
        if self.source is None:
            raise ValueError("scene has no source position")
        return np.linalg.norm(self.mics - self.source[None, :], axis=1)


@dataclass(frozen=True)
class RdMatrix:
    """Full pairwise range differences, antisymmetric, zero diagonal.

    ``values[m, m']`` holds d[m, m'] = D_m' - D_m in meters.
    """

    values: np.ndarray
    #: tolerance for rejecting non-antisymmetric input
    _ANTISYM_TOL = 1e-9

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("RdMatrix values must be square")
        if not np.all(np.isfinite(v)):
            # NaN entries are allowed only as explicit invalid-pair marks
            if not np.all(np.isnan(v[~np.isfinite(v)])):
                raise ValueError("RdMatrix values must be finite or NaN")
        finite = np.isfinite(v) & np.isfinite(v.T)
        if np.max(np.abs((v + v.T)[finite]), initial=0.0) > self._ANTISYM_TOL:
            raise ValueError("RdMatrix must be antisymmetric")
        if np.max(np.abs(np.diag(v)), initial=0.0) > self._ANTISYM_TOL:
            raise ValueError("RdMatrix must have a zero diagonal")
        v = v.copy()
        np.fill_diagonal(v, 0.0)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def mic_count(self):
        return self.values.shape[0]

    def is_valid(self):
        """True when no pair is marked invalid (NaN)."""
        return bool(np.all(np.isfinite(self.values)))

    def subset(self, indices):
        """Restrict to the given microphone indices (in the given order)."""
        idx = list(indices)
        return RdMatrix(self.values[np.ix_(idx, idx)])

    def reference_row(self, reference):
        """Extract the non-redundant ``RdVector`` for a reference mic."""
        m = self.mic_count
        if not 0 <= reference < m:
            raise IndexError("reference index out of range")
        keep = [k for k in range(m) if k != reference]
        return RdVector(reference_index=reference,
                        values=self.values[reference, keep])


@dataclass(frozen=True)
class RdVector:
    """Reference-based non-redundant RDs: d[m'] for all m' != reference.

    Values are ordered by ascending non-reference microphone index.
    """

    reference_index: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if v.size < 1:
            raise ValueError("RdVector needs at least one entry")
        if self.reference_index < 0:
            raise IndexError("reference index out of range")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def mic_count(self):
        return self.values.size + 1

    def other_indices(self):
        """Indices of the non-reference microphones, ascending."""
        return [k for k in range(self.mic_count) if k != self.reference_index]


@dataclass(frozen=True)
class LocalizationResult:
    """Estimator output: position, cost value, and a status flag.

    ``status`` is one of ``converged``, ``closed_form``, ``degenerate``
    or ``max_iterations``; ``info`` carries estimator-specific
    diagnostics (constraint residuals, dropped rows, iteration counts).
    """

    position: np.ndarray
    residual: float
    status: str
    info: dict = field(default_factory=dict)

    _STATUSES = ("converged", "closed_form", "degenerate", "max_iterations")

    def __post_init__(self):
        if self.status not in self._STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        pos = np.asarray(self.position, dtype=float).reshape(3)
        if self.status != "degenerate" and not np.all(np.isfinite(pos)):
            raise ValueError("non-degenerate result must have a finite position")
        if np.isfinite(self.residual) and self.residual < 0:
            raise ValueError("residual must be non-negative")
        pos.setflags(write=False)
        object.__setattr__(self, "position", pos)

    @property
    def ok(self):
        return self.status in ("converged", "closed_form")


def true_rd_full(scene):
    """Ground-truth full RD matrix of a scene.

    The upper triangle is computed from the microphone-source distances
    and mirrored, so antisymmetry holds exactly.
    """
    dist = scene.source_distances()
    m = scene.mic_count
    values = np.zeros((m, m))
    iu = np.triu_indices(m, k=1)
    values[iu] = dist[iu[1]] - dist[iu[0]]
    values = values - values.T
    return RdMatrix(values)


def true_rd_ref(scene, reference):
    """Ground-truth non-redundant RD vector for a reference microphone."""
    if not 0 <= reference < scene.mic_count:
        raise IndexError("reference index out of range")
    return true_rd_full(scene).reference_row(reference)


def tdoa_to_rd(tdoa_seconds, sound_speed=DEFAULT_SOUND_SPEED):
    """Convert a TDOA in seconds to a range difference in meters (c * tau).

    Accepts scalars or arrays; NaN entries (invalid-pair marks from the
    TDOA front end) pass through unchanged.
    """
    t = np.asarray(tdoa_seconds, dtype=float)
    if np.any(np.isinf(t)):
        raise ValueError("tdoa must not be infinite")
    if not (np.isfinite(sound_speed) and sound_speed > 0):
        raise ValueError("sound_speed must be positive")
    return sound_speed * tdoa_seconds


def select_reference(mics, policy="nearest_barycenter", index=None):
    """Pick a reference microphone from geometry alone.

    Parameters
    ----------
    mics : (M, 3) array_like
    policy : {"nearest_barycenter", "fixed"}
        ``nearest_barycenter`` returns the microphone closest to the
        mean of all positions, ties broken by lowest index; ``fixed``
        returns ``index`` unchanged (after a range check).
    index : int, optional
        Required for the ``fixed`` policy.

    Energy-based policies need the recorded signals and live in
    :func:`multilat.tdoa.select_reference_energy`.
    """
    pts = _as_points(mics, "mics")
    if pts.shape[0] < 1:
        raise ValueError("need at least one microphone")
    if policy == "fixed":
        if index is None:
            raise ValueError("fixed policy needs an index")
        if not 0 <= index < pts.shape[0]:
            raise IndexError("reference index out of range")
        return int(index)
    if policy != "nearest_barycenter":
        raise ValueError(f"unknown reference policy {policy!r}")
    barycenter = pts.mean(axis=0)
    dist = np.linalg.norm(pts - barycenter[None, :], axis=1)
    # np.argmin returns the first minimum, which is the tie-break we want
    return int(np.argmin(dist))
