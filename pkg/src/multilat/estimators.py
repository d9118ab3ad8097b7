"""Least-squares multilateration estimators.

Four solvers for the source position from range differences:

``usrd_ls``
    Unconstrained spherical LS: the squared-range formulation decouples
    the source position from its distance to the reference microphone,
    giving a linear system in c = [D_ref; r] solved in closed form.
``srd_ls``
    Constrained spherical LS: the same system solved *subject to* the
    coupling constraint c1^2 = ||r||^2, c1 >= 0, via the generalized
    trust-region subproblem (Beck, Stoica & Li, 2008) — a closed-form
    global solution up to a 1D root search in the Lagrange multiplier.
``conic_ls``
    Plane intersection (Schmidt, 1972): every microphone triplet's RDs
    define a plane containing the source; stacking all C(M, 3) planes
    gives a linear system solved by pseudoinverse.  With exactly four
    microphones the planes provably meet in a *line*, and the solver
    finishes the job with a range-consistency quadratic along it (the
    same final step as the classic exact 4-receiver solvers).
``hyperbolic_ls``
    Direct (weighted) nonlinear LS on the RD residuals, minimized by
    Gauss-Newton with Levenberg damping; equals ML for Gaussian noise
    when the supplied covariance matches.

All estimators accept arbitrary arrays: coordinates are translated so
the reference microphone sits at the origin internally, and estimates
are translated back before returning.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.linalg

from .geometry import LocalizationResult, RdMatrix, RdVector, _as_points

#: relative singular-value cutoff for rank decisions and pseudoinverses
RANK_TOL = 1e-12
#: condition-number ceiling beyond which normal equations are distrusted
COND_LIMIT = 1e12

_D_SIGNS = np.array([1.0, -1.0, -1.0, -1.0])


# ---------------------------------------------------------------------------
# spherical systems


@dataclass(frozen=True)
class SphericalSystem:
    """The (phi, b) system of the squared-range formulation.

    Rows are [d_m', r_m'^T] for each non-reference microphone m' with
    b_m' = (||r_m'||^2 - d_m'^2) / 2, all in reference-translated
    coordinates (reference microphone at the origin).
    """

    phi: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if phi.ndim != 2 or phi.shape[1] != 4 or phi.shape[0] != b.size:
            raise ValueError("phi must be (M-1, 4) with matching b")
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(b))):
            raise ValueError("spherical system must be finite")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class NoiseCovariance:
    """SPD covariance of the RD measurement noise, (M-1) x (M-1), m^2."""

    sigma: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValueError("covariance must be square")
        if np.max(np.abs(s - s.T), initial=0.0) > 1e-12:
            raise ValueError("covariance must be symmetric")
        if np.linalg.eigvalsh(s).min() <= 0:
            raise ValueError("covariance must be positive definite")
        object.__setattr__(self, "sigma", s)


def _check_rd_vector(rd):
    if not isinstance(rd, RdVector):
        raise TypeError("expected an RdVector")
    if not np.all(np.isfinite(rd.values)):
        raise ValueError("RD vector contains invalid entries")


def build_spherical_system(rd, mics):
    """Assemble the spherical LS system for a reference-based RD vector.

    ``mics`` includes the reference microphone; coordinates are
    translated internally so the reference is at the origin.
    """
    _check_rd_vector(rd)
    mics = _as_points(mics, "mics")
    if mics.shape[0] != rd.mic_count:
        raise ValueError("mic count does not match RD vector")
    translated = mics - mics[rd.reference_index]
    others = translated[rd.other_indices()]
    d = rd.values
    phi = np.column_stack([d, others])
    b = 0.5 * (np.sum(others ** 2, axis=1) - d ** 2)
    return SphericalSystem(phi=phi, b=b)


def usrd_ls(rd, mics):
    """Unconstrained spherical LS (closed form).

    Requires M >= 5 (the 4-unknown system needs at least four rows);
    the c1^2 = ||r||^2 coupling is *not* enforced, which is what makes
    the solution sensitive to noise.
    """
    _check_rd_vector(rd)
    mics = _as_points(mics, "mics")
    if rd.mic_count < 5:
        raise ValueError(
            "insufficient microphones: usrd_ls needs at least 5 in 3D")
    system = build_spherical_system(rd, mics)
    gram = system.phi.T @ system.phi
    if np.linalg.cond(gram) > COND_LIMIT:
        return LocalizationResult(
            position=np.full(3, np.nan), residual=np.inf, status="degenerate",
            info={"reason": "ill-conditioned spherical system"})
    c_hat = np.linalg.solve(gram, system.phi.T @ system.b)
    resid = system.phi @ c_hat - system.b
    position = c_hat[1:] + mics[rd.reference_index]
    return LocalizationResult(
        position=position, residual=float(resid @ resid), status="closed_form",
        info={"c1": float(c_hat[0])})


# ---------------------------------------------------------------------------
# constrained spherical LS (generalized trust-region subproblem)


def _pd_test(mat):
    try:
        np.linalg.cholesky(mat)
        return True
    except np.linalg.LinAlgError:
        return False


def _gtrs_candidates(gram, rhs):
    """Roots of phi(lam) = c(lam)^T D c(lam), c(lam) = (A + lam D)^-1 f.

    The real axis splits into intervals where A + lam*D stays
    invertible, delimited by lam = -1/kappa for the finite real
    generalized eigenvalues kappa of the pencil (D, A).  phi is
    monotonically decreasing on the interval where A + lam*D is
    positive definite, which contains the multiplier of the global
    constrained minimizer; the remaining intervals are scanned for
    completeness and the caller picks among feasible candidates.
    """
    diag_d = np.diag(_D_SIGNS)

    def solve_c(lam):
        return np.linalg.solve(gram + lam * diag_d, rhs)

    def phi(lam):
        c = solve_c(lam)
        return float(c @ (_D_SIGNS * c))

    kappa = scipy.linalg.eigvals(diag_d, gram)
    bounds = sorted({
        -1.0 / k.real
        for k in kappa
        if np.isfinite(k) and abs(k.imag) <= 1e-9 * (1 + abs(k.real))
        and abs(k.real) > 1e-14
    })
    scale = max(1.0, max((abs(x) for x in bounds), default=1.0))
    edges = [bounds[0] - 10 * scale] + bounds + [bounds[-1] + 10 * scale] \
        if bounds else [-10 * scale, 10 * scale]

    roots = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        margin = 1e-9 * (hi - lo)
        a, b = lo + margin, hi - margin
        try:
            fa, fb = phi(a), phi(b)
        except np.linalg.LinAlgError:
            continue
        if not (np.isfinite(fa) and np.isfinite(fb)) or fa * fb > 0:
            continue
        for _ in range(120):  # bisection to ~machine width of the interval
            mid = 0.5 * (a + b)
            try:
                fm = phi(mid)
            except np.linalg.LinAlgError:
                break
            if not np.isfinite(fm):
                break
            if fa * fm <= 0:
                b, fb = mid, fm
            else:
                a, fa = mid, fm
            if b - a <= 1e-15 * (1 + abs(a)):
                break
        lam = 0.5 * (a + b)
        # Newton polish: phi'(lam) = -2 c^T D (A + lam D)^-1 D c
        for _ in range(8):
            try:
                c = solve_c(lam)
                val = float(c @ (_D_SIGNS * c))
                dc = np.linalg.solve(gram + lam * diag_d, _D_SIGNS * c)
                slope = -2.0 * float((_D_SIGNS * c) @ dc)
            except np.linalg.LinAlgError:
                break
            if abs(slope) < 1e-300:
                break
            step = val / slope
            if not np.isfinite(step) or not (lo < lam - step < hi):
                break
            lam -= step
            if abs(step) <= 1e-15 * (1 + abs(lam)):
                break
        try:
            roots.append((lam, solve_c(lam)))
        except np.linalg.LinAlgError:
            continue
    return roots


def srd_ls(rd, mics):
    """Constrained spherical LS: global minimizer with c1^2 = ||r||^2.

    Solves min ||phi c - b||^2 s.t. c^T diag(1, -1, -1, -1) c = 0 and
    c1 >= 0, by root-finding the Lagrange-multiplier equation on the
    positive-definite interval of the matrix pencil.  Feasible roots
    are ranked by data residual; the result's ``info`` records the
    achieved constraint residual for auditability.

    A rank-3 system (the minimal 4-microphone case, or exactly coplanar
    arrays) has no positive-definite pencil interval; there the
    constraint is applied directly along the LS null direction, which
    recovers the exact-arithmetic solution the pencil search cannot
    reach.  Rank below 3 is reported as degenerate.  When both
    constraint roots explain the data equally well (minimal arrays can
    admit two sources with identical RDs), the near one is returned and
    ``info["ambiguous"]`` is set.
    """
    _check_rd_vector(rd)
    mics = _as_points(mics, "mics")
    if rd.mic_count < 4:
        raise ValueError(
            "insufficient microphones: srd_ls needs at least 4 in 3D")
    system = build_spherical_system(rd, mics)
    u, s, vt = np.linalg.svd(system.phi, full_matrices=True)
    rank = int(np.sum(s > RANK_TOL * s[0])) if s[0] > 0 else 0
    if rank < 3:
        # collinear-style geometry: even the cone constraint cannot pin
        # down a unique minimizer, so refuse rather than guess
        return LocalizationResult(
            position=np.full(3, np.nan), residual=np.inf, status="degenerate",
            info={"reason": "rank-deficient spherical system", "rank": rank})
    ref_mic = mics[rd.reference_index]

    def finish(c_hat, status, extra=None):
        resid = system.phi @ c_hat - system.b
        r_norm2 = float(c_hat[1:] @ c_hat[1:])
        constraint = abs(c_hat[0] ** 2 - r_norm2)
        info = {"c1": float(c_hat[0]),
                "constraint_residual": constraint,
                "constraint_rel": constraint / (1.0 + r_norm2),
                "rank": rank}
        if extra:
            info.update(extra)
        return LocalizationResult(
            position=c_hat[1:] + ref_mic, residual=float(resid @ resid),
            status=status, info=info)

    if rank == 3:
        # minimal (3-row) or exactly coplanar system: every point of the
        # affine family c0 + t*v attains the LS optimum, and the cone
        # constraint picks t via a quadratic — the closed-form route the
        # full pencil search cannot take on a singular system
        c0 = vt[:3].T @ ((u[:, :3].T @ system.b) / s[:3])
        null = vt[3]
        dsign = np.array([1.0, -1.0, -1.0, -1.0])
        qa = float(null @ (dsign * null))
        qb = float(null @ (dsign * c0))
        qc = float(c0 @ (dsign * c0))
        roots = []
        if abs(qa) < 1e-14:
            if abs(qb) > 1e-14:
                roots = [-qc / (2.0 * qb)]
        else:
            disc = qb * qb - qa * qc
            if disc >= 0.0:
                sq = np.sqrt(disc)
                roots = [(-qb + sq) / qa, (-qb - sq) / qa]
        others = rd.other_indices()

        def rd_misfit(c_hat):
            pos = c_hat[1:] + ref_mic
            dist = np.linalg.norm(mics - pos[None, :], axis=1)
            gap = (dist[others] - dist[rd.reference_index]) - rd.values
            return float(gap @ gap)

        feasible = [(rd_misfit(c0 + t * null), float((c0 + t * null)[0]),
                     c0 + t * null) for t in roots
                    if (c0 + t * null)[0] >= -1e-9]
        if not feasible:
            return LocalizationResult(
                position=np.full(3, np.nan), residual=np.inf,
                status="degenerate",
                info={"reason": "no feasible multiplier root", "rank": rank})
        # a misfit tie means both roots explain the data exactly (the
        # minimal-array ambiguity); prefer the near solution, flag it
        best = min(feasible, key=lambda cand: cand[0])
        ties = [cand for cand in feasible
                if cand[0] - best[0] <= 1e-9 * (1.0 + best[0])]
        extra = {"null_completed": True}
        if len(ties) > 1:
            best = min(ties, key=lambda cand: cand[1])
            extra["ambiguous"] = True
        return finish(best[2], "closed_form", extra)

    gram = system.phi.T @ system.phi
    rhs = system.phi.T @ system.b
    candidates = [c for _, c in _gtrs_candidates(gram, rhs)]
    if not candidates:
        # no bracketed root anywhere: report the failure mode distinctly,
        # with the unconstrained LS point as a finite best effort
        c0 = vt.T @ ((u[:, :4].T @ system.b) / s)
        return finish(c0, "max_iterations", {"reason": "no multiplier root"})

    best = None
    for c_hat in candidates:
        if c_hat[0] < -1e-9:
            continue
        resid = system.phi @ c_hat - system.b
        cost = float(resid @ resid)
        if best is None or cost < best[0]:
            best = (cost, c_hat)
    if best is None:
        return LocalizationResult(
            position=np.full(3, np.nan), residual=np.inf, status="degenerate",
            info={"reason": "no feasible multiplier root", "rank": rank})
    return finish(best[1], "closed_form")


# ---------------------------------------------------------------------------
# conic (plane intersection) LS


@dataclass(frozen=True)
class ConicSystem:
    """Stacked plane equations from microphone triplets.

    One row per kept triplet (p, q, r): coefficients [A, B, C] and
    right-hand side F of the plane containing the source.  Triplets
    whose coefficient norm falls below the drop tolerance contribute no
    plane and are recorded in ``dropped_triplets``.
    """

    psi_matrix: np.ndarray
    psi_rhs: np.ndarray
    triplets: list
    normalized: bool
    dropped_triplets: list


def build_conic_system(rd, mics, normalize=False):
    """Build the plane system over all C(M, 3) microphone triplets.

    For triplet (p, q, r) with pairwise RDs d, the source lies on the
    plane n . x = F where

        n = d[q,r] r_p + d[r,p] r_q + d[p,q] r_r
        F = (d[p,q] d[q,r] d[r,p] + d[q,r] ||r_p||^2
             + d[r,p] ||r_q||^2 + d[p,q] ||r_r||^2) / 2.

    With ``normalize`` each row (and its rhs) is scaled to a unit
    normal, which equalizes the rows' noise influence.
    """
    if not isinstance(rd, RdMatrix):
        raise TypeError("conic estimation needs the full RdMatrix")
    if not rd.is_valid():
        raise ValueError("RD matrix contains invalid pairs")
    mics = _as_points(mics, "mics")
    m = mics.shape[0]
    if rd.mic_count != m:
        raise ValueError("mic count does not match RD matrix")
    if m < 4:
        raise ValueError(
            "insufficient microphones: conic_ls needs at least 4")
    d = rd.values
    norms2 = np.sum(mics ** 2, axis=1)
    rows, rhs, kept, dropped = [], [], [], []
    for trip in combinations(range(m), 3):
        p, q, r = trip
        normal = d[q, r] * mics[p] + d[r, p] * mics[q] + d[p, q] * mics[r]
        f = 0.5 * (d[p, q] * d[q, r] * d[r, p]
                   + d[q, r] * norms2[p]
                   + d[r, p] * norms2[q]
                   + d[p, q] * norms2[r])
        scale = np.linalg.norm(normal)
        if scale < 1e-12:
            dropped.append(trip)
            continue
        if normalize:
            normal = normal / scale
            f = f / scale
        rows.append(normal)
        rhs.append(f)
        kept.append(trip)
    psi = np.array(rows) if rows else np.zeros((0, 3))
    return ConicSystem(psi_matrix=psi, psi_rhs=np.array(rhs),
                       triplets=kept, normalized=bool(normalize),
                       dropped_triplets=dropped)


def _rd_residual2(x, mics, d):
    """Sum of squared signed-RD mismatches of point x over all pairs."""
    dist = np.linalg.norm(mics - x[None, :], axis=1)
    pred = dist[None, :] - dist[:, None]
    iu = np.triu_indices(len(dist), k=1)
    delta = (pred - d)[iu]
    return float(delta @ delta)


def _complete_rank2(x0, direction, mics, d):
    """Resolve the minimal-case ambiguity line of the plane system.

    With four microphones the stacked planes intersect in a line
    x(t) = x0 + t*v rather than a point (they cannot distinguish the
    two intersection points of the underlying hyperboloids).  Impose
    range consistency with the pair (i, j) of largest |RD|: the implied
    reference range D_i is affine in x, and ||x - r_i||^2 = D_i^2 is a
    quadratic in t.  Candidates are screened for a physical (>= 0)
    range and ranked by the full signed-RD residual.

    Minimal arrays can be genuinely ambiguous: a second point whose
    ranges all differ from the source's by one constant reproduces the
    RD matrix exactly, so both roots tie on residual.  Such ties are
    broken toward the smaller implied range (the near solution) and
    flagged, rather than left to floating-point noise.

    Returns ``(point, ambiguous)`` or ``None`` if no feasible root.
    """
    m = mics.shape[0]
    pairs = list(combinations(range(m), 2))
    i, j = max(pairs, key=lambda ij: abs(d[ij[0], ij[1]]))
    dij = d[i, j]
    if abs(dij) < 1e-12:
        return None
    ri, rj = mics[i], mics[j]
    beta = (rj @ rj - ri @ ri - 2.0 * (rj - ri) @ x0 - dij ** 2) / (2.0 * dij)
    gamma = -((rj - ri) @ direction) / dij
    w = x0 - ri
    a = 1.0 - gamma ** 2
    b = 2.0 * (w @ direction - beta * gamma)
    c = w @ w - beta ** 2
    if abs(a) < 1e-14:
        if abs(b) < 1e-14:
            return None
        ts = [-c / b]
    else:
        disc = b * b - 4.0 * a * c
        if disc < 0:
            if disc < -1e-9 * max(1.0, b * b):
                return None
            disc = 0.0
        sq = np.sqrt(disc)
        ts = [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)]
    candidates = []
    for t in ts:
        implied_range = beta + gamma * t
        if implied_range < -1e-9:
            continue
        x = x0 + t * direction
        candidates.append((_rd_residual2(x, mics, d), implied_range, x))
    if not candidates:
        return None
    best = min(candidates, key=lambda cand: cand[0])
    ties = [cand for cand in candidates
            if cand[0] - best[0] <= 1e-9 * (1.0 + best[0])]
    if len(ties) > 1:
        return min(ties, key=lambda cand: cand[1])[2], True
    return best[2], False


def conic_ls(rd, mics, normalize=False):
    """Plane-intersection LS over all microphone triplets.

    Solves the stacked plane system by pseudoinverse (singular values
    below ``RANK_TOL`` relative are treated as zero).  The system is
    built in centroid-translated coordinates so that rank-deficient
    fallbacks are frame-independent: the minimum-norm point of an empty
    or underdetermined system is then the array centroid plus whatever
    the rows do determine (for a source at the center of a symmetric
    array — all RDs zero, every plane trivial — that is the center
    itself).  A numerical rank of 2 — the structural outcome for
    exactly four microphones — is completed along the remaining line by
    the range-consistency quadratic; anything still underdetermined is
    flagged degenerate.

    A minimal array may genuinely admit two sources with identical RDs
    (all ranges offset by one constant); both line roots then fit the
    data exactly, the near one is returned, and ``info["ambiguous"]``
    is set so callers can tell a convention from a proof.
    """
    mics = _as_points(mics, "mics")
    centroid = mics.mean(axis=0)
    system = build_conic_system(rd, mics - centroid, normalize=normalize)
    info = {"dropped_rows": len(system.dropped_triplets),
            "normalized": system.normalized}
    if system.psi_matrix.shape[0] == 0:
        return LocalizationResult(position=centroid, residual=0.0,
                                  status="degenerate",
                                  info=dict(info, rank=0))
    u, s, vt = np.linalg.svd(system.psi_matrix, full_matrices=False)
    rank = int(np.sum(s > RANK_TOL * s[0]))
    info["rank"] = rank
    x0 = vt[:rank].T @ ((u[:, :rank].T @ system.psi_rhs) / s[:rank])

    def result(x, status):
        resid = system.psi_matrix @ x - system.psi_rhs
        return LocalizationResult(position=x + centroid,
                                  residual=float(resid @ resid),
                                  status=status, info=info)

    if rank >= 3:
        return result(x0, "closed_form")
    if rank == 2:
        completed = _complete_rank2(x0 + centroid, vt[2], mics, rd.values)
        if completed is not None:
            point, ambiguous = completed
            info["line_completed"] = True
            if ambiguous:
                info["ambiguous"] = True
            return result(point - centroid, "closed_form")
    return result(x0, "degenerate")


# ---------------------------------------------------------------------------
# hyperbolic (iterative, optionally weighted) LS


def _barycenter(mics):
    return mics.mean(axis=0)


def hyperbolic_ls(rd, mics, init=None, weights=None, max_iter=100, tol=1e-10):
    """Iterative weighted LS on the RD residuals.

    Minimizes (d - d_hat(x))^T Sigma^-1 (d - d_hat(x)) where d_hat
    predicts the reference-based RDs from a candidate position x, by
    Gauss-Newton with multiplicative Levenberg damping (x10 on a
    rejected step, /10 on an accepted one).  The weighted cost never
    increases across accepted iterations.  With ``weights=None`` the
    covariance is the identity and this is plain hyperbolic LS;
    correlated noise is supported by whitening with the Cholesky factor
    of the covariance.

    ``init`` defaults to the unconstrained spherical solution, falling
    back to the array barycenter when that is unavailable.
    """
    _check_rd_vector(rd)
    mics = _as_points(mics, "mics")
    if mics.shape[0] != rd.mic_count:
        raise ValueError("mic count does not match RD vector")
    ref = rd.reference_index
    others = rd.other_indices()
    d = rd.values

    if weights is None:
        chol = None
        scale = 1.0
    else:
        if not isinstance(weights, NoiseCovariance):
            weights = NoiseCovariance(np.asarray(weights, dtype=float))
        if weights.sigma.shape[0] != d.size:
            raise ValueError("covariance size does not match RD vector")
        # factor out the overall scale of Sigma: the minimizer is
        # invariant under Sigma -> s*Sigma, and normalizing keeps the
        # iteration itself exactly scale-independent (only the reported
        # cost carries the 1/s factor)
        scale = float(np.trace(weights.sigma)) / weights.sigma.shape[0]
        chol = np.linalg.cholesky(weights.sigma / scale)
        if np.array_equal(chol, np.eye(chol.shape[0])):
            # scalar covariance: whitening is a no-op, take the
            # unweighted path so scaled and unscaled runs coincide
            chol = None

    def whiten(arr):
        if chol is None:
            return arr
        return scipy.linalg.solve_triangular(chol, arr, lower=True)

    if init is None:
        init = _barycenter(mics)
        if rd.mic_count >= 5:
            guess = usrd_ls(rd, mics)
            if guess.ok:
                init = guess.position
    x = np.asarray(init, dtype=float).reshape(3).copy()
    if not np.all(np.isfinite(x)):
        raise ValueError("init must be finite")

    def residual(pos):
        dist = np.linalg.norm(mics - pos[None, :], axis=1)
        return (dist[others] - dist[ref]) - d, dist

    def guard(pos):
        # keep the iterate off the microphones, where the Jacobian blows up
        dist = np.linalg.norm(mics - pos[None, :], axis=1)
        if dist.min() < 1e-9:
            away = _barycenter(mics) - pos
            nrm = np.linalg.norm(away)
            step = away / nrm if nrm > 1e-12 else np.array([1.0, 0.0, 0.0])
            pos = pos + 1e-6 * step
        return pos

    x = guard(x)
    err, dist = residual(x)
    werr = whiten(err)
    cost = float(werr @ werr)
    damping = 1e-3
    status = "max_iterations"
    iterations = 0
    for iterations in range(1, max_iter + 1):
        unit = (x[None, :] - mics) / dist[:, None]
        jac = unit[others] - unit[ref]
        wjac = whiten(jac)
        hess = wjac.T @ wjac
        grad = wjac.T @ werr
        diag = np.diag(hess).copy()
        diag[diag <= 0] = 1e-12
        try:
            step = np.linalg.solve(hess + damping * np.diag(diag), -grad)
        except np.linalg.LinAlgError:
            return LocalizationResult(
                position=x, residual=cost / scale, status="degenerate",
                info={"reason": "singular Jacobian", "iterations": iterations})
        candidate = guard(x + step)
        new_err, new_dist = residual(candidate)
        new_werr = whiten(new_err)
        new_cost = float(new_werr @ new_werr)
        if np.isfinite(new_cost) and new_cost <= cost:
            x, err, dist, werr, cost = candidate, new_err, new_dist, new_werr, new_cost
            damping = max(damping / 10.0, 1e-15)
            if np.linalg.norm(step) < tol:
                status = "converged"
                break
        else:
            damping *= 10.0
            if damping > 1e15:
                break
    return LocalizationResult(position=x, residual=cost / scale,
                              status=status, info={"iterations": iterations})
