"""Thickened grid shells of parameterized surfaces, with punctures and cog teeth.

The solid is ``{r(theta, phi, psi) : (theta, phi) in material, |psi| <= eps}``
where the material region is the parameter domain minus grid holes and
puncture rectangles.  It is meshed on a tensor lattice in
``(theta, phi, psi)`` index space; glued domain edges are handled by mapping
lattice nodes to canonical representatives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AtPole, BadIdentification, PoleCollision
from .meshkit import TriMesh, signed_volumes
from .s3geom import CANONICAL, ProjectionFrame
from .surfaces import NormalMode, SurfaceKind, SurfaceSpec, eval_p, offset_r

CHORD_TOL = 0.002
MAX_SUBDIV = 48
MERGE_TOL = 1e-9


@dataclass(frozen=True)
class ShellSpec:
    """Grid-with-holes thickening.

    ``punctures`` are ``(theta_lo, theta_hi, phi_lo, phi_hi)`` rectangles,
    which may extend past the domain edges; they are read modulo the
    surface's identifications.
    """

    thickness_s3: float
    grid_theta: int = 16
    grid_phi: int = 24
    strut_fraction: float = 0.5
    punctures: tuple = ()
    holes: bool = True
    psi_layers: int = 1
    normal_mode: NormalMode = NormalMode.CRAMER

    def __post_init__(self):
        object.__setattr__(self, "normal_mode", NormalMode(self.normal_mode))
        object.__setattr__(self, "punctures", tuple(tuple(float(x) for x in r) for r in self.punctures))
        if not 0.0 < self.thickness_s3 < math.pi / 8.0:
            raise ValueError("thickness_s3 must lie in (0, pi/8)")
        if self.grid_theta < 2 or self.grid_phi < 2:
            raise ValueError("grid counts must be >= 2")
        if not 0.1 <= self.strut_fraction <= 0.9:
            raise ValueError("strut_fraction must lie in [0.1, 0.9]")
        if self.psi_layers < 1:
            raise ValueError("psi_layers must be >= 1")
        for r in self.punctures:
            if len(r) != 4 or r[1] <= r[0] or r[3] <= r[2]:
                raise ValueError(f"bad puncture rectangle {r}")


@dataclass(frozen=True)
class CogSpec:
    tooth_count: int
    tooth_height: float
    top_fraction: float = 0.6
    base_fraction: float = 0.7

    def __post_init__(self):
        if self.tooth_count < 3:
            raise ValueError("tooth_count must be >= 3")
        if self.tooth_height <= 0:
            raise ValueError("tooth_height must be positive")
        for name in ("top_fraction", "base_fraction"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")


@dataclass
class ShellLattice:
    """Parameter lattice and material mask of a shell (no geometry yet)."""

    spec: SurfaceSpec
    shell: ShellSpec
    theta: np.ndarray
    phi: np.ndarray
    material: np.ndarray
    glue_index: np.ndarray
    glue_flip: bool
    punctured: np.ndarray = field(default=None)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.theta) - 1, len(self.phi) - 1

    def canonical(self, i, j, k):
        """Canonical lattice indices of nodes ``(i, j, k)`` (arrays)."""
        n_t, n_p = self.shape
        L = self.shell.psi_layers
        i = np.asarray(i).copy()
        j = np.asarray(j).copy()
        k = np.asarray(k).copy()
        seam = j == n_p
        i[seam] = self.glue_index[i[seam]]
        if self.glue_flip:
            k[seam] = L - k[seam]
        j[seam] = 0
        if self.spec.theta_periodic:
            i[i == n_t] = 0
        return i, j, k

    def node_id(self, i, j, k):
        i, j, k = self.canonical(i, j, k)
        n_t, n_p = self.shape
        L = self.shell.psi_layers
        return (i * (n_p + 1) + j) * (L + 1) + k

    def seam_quad(self, i: np.ndarray) -> np.ndarray:
        """Quad index on ``phi = 0`` glued to quad ``i`` on the last phi row."""
        a = self.glue_index[i]
        b = self.glue_index[i + 1]
        out = np.minimum(a, b)
        n_t = self.shape[0]
        wrap = np.abs(a - b) != 1
        out[wrap] = n_t - 1
        return out


def _unique_sorted(values, lo: float, hi: float) -> np.ndarray:
    v = np.sort(np.clip(np.concatenate([np.asarray(values, dtype=float), [lo, hi]]), lo, hi))
    keep = np.concatenate([[True], np.diff(v) > MERGE_TOL])
    v = v[keep]
    v[0], v[-1] = lo, hi
    return v


def _breakpoints(spec: SurfaceSpec, shell: ShellSpec):
    (tlo, thi), (flo, fhi) = spec.domain
    wt = (thi - tlo) / shell.grid_theta
    wf = (fhi - flo) / shell.grid_phi
    bt = list(tlo + wt * np.arange(shell.grid_theta + 1))
    bf = list(flo + wf * np.arange(shell.grid_phi + 1))
    if shell.holes:
        ht = 0.5 * shell.strut_fraction * wt
        hf = 0.5 * shell.strut_fraction * wf
        for k in range(shell.grid_theta):
            bt += [tlo + k * wt + ht, tlo + (k + 1) * wt - ht]
        for k in range(shell.grid_phi):
            bf += [flo + k * wf + hf, flo + (k + 1) * wf - hf]
    Phi = fhi - flo
    for t0, t1, f0, f1 in shell.punctures:
        for t in (t0, t1):
            bt.append(t % (2.0 * math.pi) if spec.theta_periodic else t)
        for f in (f0, f1):
            bf.append(f % Phi)
    bt = np.asarray(bt)
    bt = np.concatenate([bt, spec.glue_theta(bt)])
    if spec.theta_periodic:
        bt = np.mod(bt, 2.0 * math.pi)
        bt[np.abs(bt - 2.0 * math.pi) < MERGE_TOL] = 0.0
    return _unique_sorted(bt, tlo, thi), _unique_sorted(bf, flo, fhi)


def _in_rect(theta: float, phi: float, rect) -> bool:
    t0, t1, f0, f1 = rect
    return t0 < theta < t1 and f0 < phi < f1


def _material_mask(spec: SurfaceSpec, shell: ShellSpec, theta: np.ndarray, phi: np.ndarray):
    (tlo, thi), (flo, fhi) = spec.domain
    tc = 0.5 * (theta[1:] + theta[:-1])
    fc = 0.5 * (phi[1:] + phi[:-1])
    material = np.ones((len(tc), len(fc)), dtype=bool)
    if shell.holes:
        ut = np.mod((tc - tlo) / ((thi - tlo) / shell.grid_theta), 1.0)
        uf = np.mod((fc - flo) / ((fhi - flo) / shell.grid_phi), 1.0)
        h = 0.5 * shell.strut_fraction
        hole_t = (ut > h) & (ut < 1.0 - h)
        hole_f = (uf > h) & (uf < 1.0 - h)
        material &= ~(hole_t[:, None] & hole_f[None, :])
    punctured = np.zeros_like(material)
    if shell.punctures:
        for a, t in enumerate(tc):
            for b, f in enumerate(fc):
                reps = spec.equivalents(float(t), float(f))
                if any(_in_rect(rt, rf, rect) for rt, rf in reps for rect in shell.punctures):
                    punctured[a, b] = True
    material &= ~punctured
    return material, punctured


def _glue(spec: SurfaceSpec, shell: ShellSpec, theta: np.ndarray):
    """Node index map across the phi seam and whether psi flips there."""
    target = np.asarray(spec.glue_theta(theta), dtype=float)
    if spec.theta_periodic:
        target = np.mod(target, 2.0 * math.pi)
    idx = np.searchsorted(theta, target)
    idx = np.clip(idx, 0, len(theta) - 1)
    left = np.clip(idx - 1, 0, len(theta) - 1)
    pick = np.where(np.abs(theta[left] - target) < np.abs(theta[idx] - target), left, idx)
    err = np.abs(theta[pick] - target)
    if spec.theta_periodic:
        err = np.minimum(err, np.abs(err - 2.0 * math.pi))
    if err.max() > MERGE_TOL:
        raise BadIdentification("theta breakpoints are not symmetric under the seam map")
    eps = shell.thickness_s3
    Phi = spec.phi_period
    here = offset_r(spec, theta, Phi, eps, shell.normal_mode)
    same = offset_r(spec, theta[pick], 0.0, eps, shell.normal_mode)
    flip = offset_r(spec, theta[pick], 0.0, -eps, shell.normal_mode)
    d_same = np.abs(here - same).max()
    d_flip = np.abs(here - flip).max()
    if d_same <= 1e-9:
        return pick, False
    if d_flip <= 1e-9:
        return pick, True
    raise BadIdentification(
        f"seam mismatch: {min(d_same, d_flip):.3e} exceeds 1e-9 in either psi orientation"
    )


def _refine_counts(spec, shell, f, breaks, other, axis):
    """Subdivisions per breakpoint interval from a projected sagitta estimate."""
    eps = shell.thickness_s3
    samples = np.linspace(other[0], other[-1], 25)[:-1] + 0.5 * (other[-1] - other[0]) / 24
    a, b = breaks[:-1], breaks[1:]
    mid = 0.5 * (a + b)
    counts = np.ones(len(a), dtype=int)
    for s in samples:
        if axis == 0:
            pts = [eval_p(spec, x, s) for x in (a, mid, b)]
        else:
            pts = [eval_p(spec, s, x) for x in (a, mid, b)]
        heights = [f.to_frame(p)[..., 3] for p in pts]
        ok = np.all([1.0 - h > 1e-3 for h in heights], axis=0)
        if not np.any(ok):
            continue
        pa, pm, pb = (f.project(p[ok]) for p in pts)
        lam = 1.0 / (1.0 - heights[1][ok])
        sag = np.linalg.norm(pm - 0.5 * (pa + pb), axis=1)
        tol = CHORD_TOL * 2.0 * math.sin(eps) * lam
        need = np.ceil(np.sqrt(sag / tol)).astype(int)
        counts[ok] = np.maximum(counts[ok], need)
    return np.clip(counts, 1, MAX_SUBDIV)


def _symmetrize_theta(spec, breaks, counts):
    mid = 0.5 * (breaks[:-1] + breaks[1:])
    img = np.asarray(spec.glue_theta(mid), dtype=float)
    if spec.theta_periodic:
        img = np.mod(img, 2.0 * math.pi)
    j = np.clip(np.searchsorted(breaks, img) - 1, 0, len(mid) - 1)
    out = counts.copy()
    np.maximum.at(out, j, counts)
    return np.maximum(out, out[j])


def _subdivide(breaks, counts):
    parts = [np.linspace(a, b, n + 1)[:-1] for a, b, n in zip(breaks[:-1], breaks[1:], counts)]
    return np.concatenate(parts + [breaks[-1:]])


def build_lattice(spec: SurfaceSpec, shell: ShellSpec, f: ProjectionFrame = CANONICAL, refine: bool = True) -> ShellLattice:
    bt, bf = _breakpoints(spec, shell)
    if refine:
        ct = _symmetrize_theta(spec, bt, _refine_counts(spec, shell, f, bt, bf, 0))
        cf = _refine_counts(spec, shell, f, bf, bt, 1)
        theta, phi = _subdivide(bt, ct), _subdivide(bf, cf)
    else:
        theta, phi = bt, bf
    material, punctured = _material_mask(spec, shell, theta, phi)
    glue_index, glue_flip = _glue(spec, shell, theta)
    return ShellLattice(spec, shell, theta, phi, material, glue_index, glue_flip, punctured)


def oriented_quads(base: np.ndarray, axis: int, side: int) -> np.ndarray:
    """Corners (n, 4, 3) of unit lattice squares, counter-clockwise about the outward normal.

    ``base`` rows are the lowest corner; the square spans the two axes other
    than ``axis``.
    """
    b = (axis + 1) % 3
    c = (axis + 2) % 3
    eb = np.zeros(3, dtype=np.int64)
    ec = np.zeros(3, dtype=np.int64)
    eb[b] = 1
    ec[c] = 1
    corners = np.stack([base, base + eb, base + eb + ec, base + ec], axis=1)
    return corners if side > 0 else corners[:, ::-1]


def quads_to_triangles(q: np.ndarray) -> np.ndarray:
    return np.concatenate([q[:, [0, 1, 2]], q[:, [0, 2, 3]]])


def _lattice_quads(lat: ShellLattice) -> np.ndarray:
    """All boundary squares of the solid, as lattice corners (n, 4, 3)."""
    n_t, n_p = lat.shape
    L = lat.shell.psi_layers
    M = lat.material
    I, J = np.nonzero(M)
    quads = []
    quads.append(oriented_quads(np.stack([I, J, np.full_like(I, L)], 1), 2, +1))
    quads.append(oriented_quads(np.stack([I, J, np.zeros_like(I)], 1), 2, -1))

    def walls(mask, i_face, j_face, axis, side):
        ii, jj = i_face[mask], j_face[mask]
        for k in range(L):
            base = np.stack([ii, jj, np.full_like(ii, k)], 1)
            quads.append(oriented_quads(base, axis, side))

    # theta neighbours
    up = np.zeros_like(I, dtype=bool)
    down = np.zeros_like(I, dtype=bool)
    nxt = I + 1
    prv = I - 1
    if lat.spec.theta_periodic:
        up = ~M[nxt % n_t, J]
        down = ~M[prv % n_t, J]
    else:
        up = (nxt >= n_t) | ~M[np.minimum(nxt, n_t - 1), J]
        down = (prv < 0) | ~M[np.maximum(prv, 0), J]
    walls(up, I + 1, J, 0, +1)
    walls(down, I, J, 0, -1)

    # phi neighbours, through the seam where needed
    seam_q = lat.seam_quad(np.arange(n_t))
    inv_seam = np.empty(n_t, dtype=np.int64)
    inv_seam[seam_q] = np.arange(n_t)
    at_top = J == n_p - 1
    at_bottom = J == 0
    right = np.where(at_top, ~M[seam_q[I], 0], ~M[I, np.minimum(J + 1, n_p - 1)])
    left = np.where(at_bottom, ~M[inv_seam[I], n_p - 1], ~M[I, np.maximum(J - 1, 0)])
    walls(right, I, J + 1, 1, +1)
    walls(left, I, J, 1, -1)
    return np.concatenate(quads)


def _check_pole(lat: ShellLattice, f: ProjectionFrame) -> None:
    spec = lat.spec
    I, J = np.nonzero(lat.material)
    tc = 0.5 * (lat.theta[I] + lat.theta[I + 1])
    fc = 0.5 * (lat.phi[J] + lat.phi[J + 1])
    center = eval_p(spec, tc, fc)
    radius = np.zeros(len(I))
    for di in (0, 1):
        for dj in (0, 1):
            corner = eval_p(spec, lat.theta[I + di], lat.phi[J + dj])
            ang = np.arccos(np.clip(np.einsum("ij,ij->i", corner, center), -1.0, 1.0))
            radius = np.maximum(radius, ang)
    h = np.clip(f.to_frame(center)[:, 3], -1.0, 1.0)
    dist = np.arccos(h)
    if np.any(dist < lat.shell.thickness_s3 + radius + 1e-6):
        raise PoleCollision("the thickened surface reaches the projection point; add a puncture")


def _runs(mask: np.ndarray, periodic: bool):
    """``(start, stop)`` index runs of True; ``None`` if the whole row is True."""
    n = len(mask)
    if mask.all():
        return None if periodic else [[0, n]]
    runs = []
    k = 0
    while k < n:
        if mask[k]:
            s = k
            while k < n and mask[k]:
                k += 1
            runs.append([s, k])
        else:
            k += 1
    if periodic and len(runs) > 1 and runs[0][0] == 0 and runs[-1][1] == n:
        last = runs.pop()
        runs[0] = [last[0] - n, runs[0][1]]
    return runs


def _feature_lengths(lat: ShellLattice, f: ProjectionFrame) -> np.ndarray:
    """Projected strut widths, hole widths and wall thicknesses."""
    spec, shell = lat.spec, lat.shell
    mode = shell.normal_mode
    eps = shell.thickness_s3
    n_t, n_p = lat.shape
    M = lat.material
    out = []
    # thickness at every node touching material
    node_used = np.zeros((n_t + 1, n_p + 1), dtype=bool)
    I, J = np.nonzero(M)
    for di in (0, 1):
        for dj in (0, 1):
            node_used[I + di, J + dj] = True
    ni, nj = np.nonzero(node_used)
    top = f.project(offset_r(spec, lat.theta[ni], lat.phi[nj], eps, mode))
    bot = f.project(offset_r(spec, lat.theta[ni], lat.phi[nj], -eps, mode))
    out.append(np.linalg.norm(top - bot, axis=1))

    def center(i, j):
        return f.project(eval_p(spec, lat.theta[i % (n_t + 1)], lat.phi[j]))

    # widths across theta along each phi row, then across phi along each theta column
    for j in range(n_p):
        for fill in (True, False):
            row = M[:, j] if fill else ~M[:, j] & ~lat.punctured[:, j]
            runs = _runs(row, spec.theta_periodic)
            if not runs:
                continue
            for s, e in runs:
                s_idx = s % n_t if spec.theta_periodic else s
                a = center(np.array([s_idx, s_idx]), np.array([j, j + 1]))
                b = center(np.array([e, e]), np.array([j, j + 1]))
                out.append(np.linalg.norm(a - b, axis=1))
    for i in range(n_t):
        for fill in (True, False):
            col = M[i, :] if fill else ~M[i, :] & ~lat.punctured[i, :]
            runs = _runs(col, False)
            if not runs:
                continue
            for s, e in runs:
                if fill and (s == 0 or e == n_p):
                    continue  # continues through the seam; measured on the other side
                a = center(np.array([i, i + 1]), np.array([s, s]))
                b = center(np.array([i, i + 1]), np.array([e, e]))
                out.append(np.linalg.norm(a - b, axis=1))
    return np.concatenate(out) if out else np.zeros(0)


def _orient(verts: np.ndarray, tris: np.ndarray) -> np.ndarray:
    if signed_volumes(TriMesh(verts, tris))[0] < 0:
        return tris[:, ::-1].copy()
    return tris


def mesh_lattice(lat: ShellLattice, f: ProjectionFrame = CANONICAL) -> TriMesh:
    _check_pole(lat, f)
    spec, shell = lat.spec, lat.shell
    L = shell.psi_layers
    corners = _lattice_quads(lat)
    ids = lat.node_id(corners[..., 0], corners[..., 1], corners[..., 2])
    used, inverse = np.unique(ids, return_inverse=True)
    quads = inverse.reshape(ids.shape)
    n_p = lat.shape[1]
    k = used % (L + 1)
    ij = used // (L + 1)
    j = ij % (n_p + 1)
    i = ij // (n_p + 1)
    psi = -shell.thickness_s3 + 2.0 * shell.thickness_s3 * k / L
    pts4 = offset_r(spec, lat.theta[i], lat.phi[j], psi, shell.normal_mode)
    try:
        verts = f.project(pts4)
    except AtPole as exc:
        raise PoleCollision(str(exc)) from exc
    tris = _orient(verts, quads_to_triangles(quads))
    center = eval_p(spec, lat.theta[i], lat.phi[j])
    lam = f.scale(center)
    return TriMesh(verts, tris, [(0, len(tris))], _feature_lengths(lat, f), float(lam.max() / lam.min()))


def mesh_tooth(spec: SurfaceSpec, shell: ShellSpec, cog: CogSpec, theta_c: float, phi_c: float,
               f: ProjectionFrame = CANONICAL, n: int = 4) -> TriMesh:
    """Truncated double pyramid in (theta, phi, psi), straddling the band."""
    (tlo, thi), (flo, fhi) = spec.domain
    eps = shell.thickness_s3
    wt = cog.base_fraction * (thi - tlo) / shell.grid_theta
    wf = cog.base_fraction * (fhi - flo) / shell.grid_phi
    levels = np.array([-(eps + cog.tooth_height), -0.5 * eps, 0.5 * eps, eps + cog.tooth_height])
    scales = np.array([cog.top_fraction, 1.0, 1.0, cog.top_fraction])
    dims = (n, n, len(levels) - 1)
    quads = []
    for axis in range(3):
        b, c = (axis + 1) % 3, (axis + 2) % 3
        gb, gc = np.meshgrid(np.arange(dims[b]), np.arange(dims[c]), indexing="ij")
        for side, pos in ((-1, 0), (+1, dims[axis])):
            base = np.zeros((gb.size, 3), dtype=np.int64)
            base[:, axis] = pos
            base[:, b] = gb.ravel()
            base[:, c] = gc.ravel()
            quads.append(oriented_quads(base, axis, side))
    corners = np.concatenate(quads)
    key = (corners[..., 0] * (n + 1) + corners[..., 1]) * len(levels) + corners[..., 2]
    used, inverse = np.unique(key, return_inverse=True)
    c_lvl = used % len(levels)
    ab = used // len(levels)
    a_idx, b_idx = ab // (n + 1), ab % (n + 1)
    s = scales[c_lvl]
    theta = np.clip(theta_c + s * wt * (a_idx / n - 0.5), tlo, thi)
    phi = phi_c + s * wf * (b_idx / n - 0.5)
    phi = np.mod(phi - flo, fhi - flo) + flo
    pts4 = offset_r(spec, theta, phi, levels[c_lvl], shell.normal_mode)
    verts = f.project(pts4)
    tris = _orient(verts, quads_to_triangles(inverse.reshape(key.shape)))
    top = verts[c_lvl == len(levels) - 1]
    feat = [np.linalg.norm(top.max(axis=0) - top.min(axis=0)) * cog.top_fraction / 2.0]
    lam = f.scale(eval_p(spec, theta, phi))
    return TriMesh(verts, tris, [(0, len(tris))], np.array(feat), float(lam.max() / lam.min()))


def mesh_cogs(spec: SurfaceSpec, shell: ShellSpec, cogs: CogSpec, f: ProjectionFrame = CANONICAL) -> list[TriMesh]:
    """One closed tooth per equal phi step, centred on the band's middle theta."""
    if cogs.tooth_height + shell.thickness_s3 >= math.pi / 8.0:
        raise ValueError("tooth_height plus shell half-thickness must stay below pi/8")
    (tlo, thi), (flo, fhi) = spec.domain
    theta_c = 0.5 * (tlo + thi)
    step = (fhi - flo) / cogs.tooth_count
    return [mesh_tooth(spec, shell, cogs, theta_c, flo + (k + 0.5) * step, f) for k in range(cogs.tooth_count)]


def mesh_shell(spec: SurfaceSpec, shell: ShellSpec, f: ProjectionFrame = CANONICAL,
               cogs: CogSpec | None = None, refine: bool = True) -> TriMesh:
    """Watertight thickened grid shell, plus one closed shell per cog tooth."""
    lat = build_lattice(spec, shell, f, refine)
    body = mesh_lattice(lat, f)
    if cogs is None:
        return body
    return TriMesh.concatenate([body] + mesh_cogs(spec, shell, cogs, f))


def pole_preimages(spec: SurfaceSpec, f: ProjectionFrame = CANONICAL, tol: float = 1e-9) -> list[tuple[float, float]]:
    """Parameter points mapped onto the projection point, one per surface point."""
    from scipy.optimize import least_squares

    (tlo, thi), (flo, fhi) = spec.domain
    tg = np.linspace(tlo, thi, 121)
    fg = np.linspace(flo, fhi, 121)
    T, F = np.meshgrid(tg, fg, indexing="ij")
    h = f.to_frame(eval_p(spec, T, F))[..., 3]
    found: list[tuple[float, float]] = []
    seen: list[np.ndarray] = []
    cand = np.argwhere(h > 1.0 - 0.05)
    pole = f.pole.as_array()

    def resid(x):
        t = np.clip(x[0], tlo, thi)
        p = np.clip(x[1], flo, fhi)
        return eval_p(spec, t, p) - pole

    for a, b in cand:
        sol = least_squares(resid, [T[a, b], F[a, b]], xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if np.linalg.norm(resid(sol.x)) > 1e-7:
            continue
        t = float(np.clip(sol.x[0], tlo, thi))
        p = float(np.clip(sol.x[1], flo, fhi))
        reps = spec.equivalents(t, p)
        if any(min(abs(rt - s[0]) + abs(rf - s[1]) for rt, rf in reps) < 1e-5 for s in seen):
            continue
        seen.append(np.array([t, p]))
        found.append((t, p))
    return found


def default_punctures(spec: SurfaceSpec, shell: ShellSpec, f: ProjectionFrame = CANONICAL,
                      scale: tuple[float, float] = (1.0, 1.0)) -> tuple:
    """One grid cell (times ``scale``) centred on every pole preimage."""
    (tlo, thi), (flo, fhi) = spec.domain
    wt = scale[0] * (thi - tlo) / shell.grid_theta
    wf = scale[1] * (fhi - flo) / shell.grid_phi
    return tuple(
        (t - wt / 2.0, t + wt / 2.0, p - wf / 2.0, p + wf / 2.0) for t, p in pole_preimages(spec, f)
    )


def combinatorial_euler(lat: ShellLattice) -> int:
    """Euler characteristic of the shell boundary predicted from the mask alone.

    The boundary of a thickened surface region has twice the region's Euler
    characteristic; the region's is counted on the quad complex.
    """
    I, J = np.nonzero(lat.material)
    L = lat.shell.psi_layers
    verts, edges = set(), set()
    for i, j in zip(I, J):
        c = [int(lat.node_id(np.array([i + a]), np.array([j + b]), np.array([0]))[0]) // (L + 1)
             for a, b in ((0, 0), (1, 0), (1, 1), (0, 1))]
        verts.update(c)
        for a, b in zip(c, c[1:] + c[:1]):
            edges.add((min(a, b), max(a, b)))
    return 2 * (len(verts) - len(edges) + len(I))
