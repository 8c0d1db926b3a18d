"""Implicit quasi-static solver for a Kelvin-Voigt viscoelastic solid.

Total-Lagrangian formulation on linear triangles with a St. Venant-Kirchhoff
elastic response (large deformations) plus a viscous stress proportional to
the Green-Lagrange strain rate. The strain rate inside an implicit step uses
a backward difference, which makes every step an incremental energy
minimization solved by Newton iterations.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import SolverError
from ..geom import Mesh, MeshTrajectory
from .params import PhysicalParams
from .schedule import ForceSchedule


def plane_strain_lame(youngs_modulus: float, poisson_ratio: float) -> tuple[float, float]:
    lam = youngs_modulus * poisson_ratio / ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio))
    mu = youngs_modulus / (2.0 * (1.0 + poisson_ratio))
    return lam, mu


@dataclass
class _Discretization:
    grads: np.ndarray  # (C, 3, 2) reference shape-function gradients
    areas: np.ndarray  # (C,)
    dof_rows: np.ndarray
    dof_cols: np.ndarray
    free: np.ndarray  # free dof indices
    n_dof: int


def _discretize(mesh: Mesh) -> _Discretization:
    x = mesh.rest_positions
    c = mesh.cells
    d1 = x[c[:, 1]] - x[c[:, 0]]
    d2 = x[c[:, 2]] - x[c[:, 0]]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    if np.any(det <= 0):
        raise ValueError("cells must be counter-clockwise with positive area")
    areas = 0.5 * det
    # inverse of Dm = [d1 | d2]; rows are the gradients of N_b, N_c
    inv = np.empty((len(c), 2, 2))
    inv[:, 0, 0] = d2[:, 1] / det
    inv[:, 0, 1] = -d2[:, 0] / det
    inv[:, 1, 0] = -d1[:, 1] / det
    inv[:, 1, 1] = d1[:, 0] / det
    grads = np.empty((len(c), 3, 2))
    grads[:, 1] = inv[:, 0]
    grads[:, 2] = inv[:, 1]
    grads[:, 0] = -inv[:, 0] - inv[:, 1]

    dof = (2 * c[:, :, None] + np.arange(2)[None, None, :]).reshape(len(c), 6)
    dof_rows = np.repeat(dof, 6, axis=1).reshape(-1)
    dof_cols = np.tile(dof, (1, 6)).reshape(-1)
    fixed = np.zeros(2 * mesh.n_nodes, dtype=bool)
    fixed[2 * mesh.clamped] = True
    fixed[2 * mesh.clamped + 1] = True
    return _Discretization(grads, areas, dof_rows, dof_cols, np.flatnonzero(~fixed), 2 * mesh.n_nodes)


class KelvinVoigtSolver:
    """Newton-based stepper; keeps the previous strain for the viscous term."""

    def __init__(self, mesh: Mesh, params: PhysicalParams, dt: float):
        self.mesh = mesh
        self.disc = _discretize(mesh)
        self.lam, self.mu = plane_strain_lame(params.youngs_modulus, params.poisson_ratio)
        self.visc_ratio = params.tau_visc / dt
        self.strain_prev = np.zeros((len(mesh.cells), 2, 2))
        self.cells = mesh.cells

    def _strain(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g = self.disc.grads
        du = u[self.cells]  # (C, 3, 2)
        f = np.einsum("cni,cnj->cij", du, g)
        f[:, 0, 0] += 1.0
        f[:, 1, 1] += 1.0
        strain = 0.5 * (np.einsum("cki,ckj->cij", f, f) - np.eye(2)[None])
        return f, strain

    def _stress(self, strain: np.ndarray) -> np.ndarray:
        eff = (1.0 + self.visc_ratio) * strain - self.visc_ratio * self.strain_prev
        tr = eff[:, 0, 0] + eff[:, 1, 1]
        s = 2.0 * self.mu * eff
        s[:, 0, 0] += self.lam * tr
        s[:, 1, 1] += self.lam * tr
        return s

    def internal_force(self, u: np.ndarray) -> np.ndarray:
        f, strain = self._strain(u)
        s = self._stress(strain)
        p = np.einsum("cik,ckj->cij", f, s)
        contrib = np.einsum("c,cij,cnj->cni", self.disc.areas, p, self.disc.grads)
        out = np.zeros((self.mesh.n_nodes, 2))
        np.add.at(out, self.cells, contrib)
        return out

    def tangent(self, u: np.ndarray) -> sp.csr_matrix:
        g = self.disc.grads
        f, strain = self._strain(u)
        s = self._stress(strain)
        c_eff = 1.0 + self.visc_ratio

        # geometric part: (dF_p S) : dF_q = delta_ij * (G S G^T)[n, m]
        h = np.einsum("cna,cab,cmb->cnm", g, s, g)
        geo = np.einsum("cnm,ij->cnimj", h, np.eye(2))

        # material part via E_p = sym(F^T dF_p)
        w = np.einsum("cia,cnb->cniab", f, g)
        w = 0.5 * (w + w.transpose(0, 1, 2, 4, 3))
        tr_w = w[..., 0, 0] + w[..., 1, 1]  # (C, 3, 2)
        mat = self.lam * np.einsum("cni,cmj->cnimj", tr_w, tr_w) + 2.0 * self.mu * np.einsum(
            "cniab,cmjab->cnimj", w, w
        )
        ke = geo.reshape(-1, 6, 6) + c_eff * mat.reshape(-1, 6, 6)
        ke *= self.disc.areas[:, None, None]
        k = sp.coo_matrix(
            (ke.reshape(-1), (self.disc.dof_rows, self.disc.dof_cols)),
            shape=(self.disc.n_dof, self.disc.n_dof),
        )
        return k.tocsr()

    def step(self, u: np.ndarray, f_ext: np.ndarray, tol: float, max_iter: int = 40) -> tuple[np.ndarray, float, int]:
        """Advance one implicit step from warm start `u`; returns (u, residual, iters)."""
        free = self.disc.free
        u = u.copy()
        res_norm = np.inf
        for it in range(max_iter + 1):
            r = (self.internal_force(u) - f_ext).reshape(-1)[free]
            res_norm = float(np.linalg.norm(r))
            if res_norm < tol:
                _, strain = self._strain(u)
                self.strain_prev = strain
                return u, res_norm, it
            if it == max_iter:
                break
            k = self.tangent(u)[free][:, free]
            du = spla.spsolve(k.tocsc(), -r)
            u.reshape(-1)[free] += du
        raise SolverError(f"Newton failed to reach {tol} (residual {res_norm:.3e})", residual=res_norm)


def _nodal_loads(mesh: Mesh, edge_force: np.ndarray) -> np.ndarray:
    """Spread the total edge force equally over the loaded nodes."""
    loaded = mesh.loaded
    out = np.zeros((mesh.n_nodes, 2))
    if loaded.size:
        out[loaded] = edge_force / loaded.size
    return out


def simulate_beam(
    mesh: Mesh,
    params: PhysicalParams,
    schedule,
    internal_steps: int,
    output_frames: int,
    newton_tol: float = 1e-8,
    t_end: float = 1.0,
    max_newton: int = 40,
) -> MeshTrajectory:
    """Run the implicit Kelvin-Voigt stepper and subsample to output frames.

    `schedule` is a ForceSchedule or a precomputed (internal_steps + 1, 2)
    array of total edge forces on the internal time grid. The returned
    trajectory stores per-frame nodal loads and the final Newton residual of
    every internal step (`newton_residuals`).
    """
    if internal_steps < output_frames:
        raise ValueError("internal_steps must be >= output_frames")
    if isinstance(schedule, ForceSchedule):
        forces = schedule.tabulate(internal_steps)
    else:
        forces = np.asarray(schedule, dtype=np.float64)
        if forces.shape != (internal_steps + 1, 2):
            raise ValueError(f"schedule must be ({internal_steps + 1}, 2), got {forces.shape}")

    dt = t_end / internal_steps
    solver = KelvinVoigtSolver(mesh, params, dt)
    u = np.zeros((mesh.n_nodes, 2))
    states = [u.copy()]
    residuals = []
    for j in range(1, internal_steps + 1):
        f_ext = _nodal_loads(mesh, forces[j])
        u, res, _ = solver.step(u, f_ext, newton_tol, max_iter=max_newton)
        states.append(u.copy())
        residuals.append(res)

    idx = np.rint(np.linspace(0, internal_steps, output_frames)).astype(int)
    positions = mesh.rest_positions[None] + np.stack([states[i] for i in idx])
    positions[:, mesh.clamped] = mesh.rest_positions[mesh.clamped]
    loads = np.stack([_nodal_loads(mesh, forces[i]) for i in idx])
    return MeshTrajectory(
        mesh=mesh,
        positions=positions,
        loads=loads,
        step_dt=t_end / max(output_frames - 1, 1),
        newton_residuals=np.asarray(residuals),
    )
