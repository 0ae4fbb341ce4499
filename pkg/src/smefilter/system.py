"""Truncated atom-cavity operators and the homodyne stochastic master equation.

Units: the transverse atomic decay rate is the unit of rate, so times are
expressed in its inverse and the full atomic decay rate is twice the
transverse one.  The Hilbert space is atom (x) field with the atom index
outer: basis state ``(alpha, n)`` maps to flat index
``alpha * (n_max + 1) + n`` with ``alpha = 0`` the ground state and
``alpha = 1`` the excited state.  Serialized states depend on this
ordering, so it is fixed here and recorded in file metadata.

The conditional state evolves under (Ito form)

    drho = A[rho] dt + B[rho] dW

where ``A`` collects the Hamiltonian commutator and the cavity/atom decay
dissipators and ``B`` is the homodyne measurement back-action at local
oscillator phase ``phi``.  The observed photocurrent increment is
``dy = dW + sqrt(2 kappa) Tr[(a e^{-i phi} + a^dag e^{i phi}) rho] dt``.

Integration uses a weak second-order derivative-free predictor-corrector
scheme: supporting values built from an Euler predictor replace diffusion
derivatives, and the drift is corrected with a trapezoidal average over
the predicted point.  All state updates broadcast over leading axes, so a
stack of density matrices advances as one ensemble.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SystemParams",
    "OperatorSet",
    "Trajectory",
    "RecordSpec",
    "IntegrationDiverged",
    "build_operators",
    "ito_drift",
    "diffusion",
    "stratonovich_drift",
    "step",
    "photocurrent_increment",
    "simulate",
    "expectations",
]


class IntegrationDiverged(RuntimeError):
    """Raised when the state picks up non-finite entries; carries the step index."""

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index


@dataclass(frozen=True)
class SystemParams:
    """Physical and numerical parameters, all rates in transverse-decay units.

    ``drive`` is the coherent drive amplitude E = sqrt(2 kappa) beta where
    ``|beta|^2`` is the incoming photon flux.  ``phi`` selects the detected
    quadrature: 0 for x, pi/2 for p.  ``gamma_perp`` is the reference rate
    and is 1 by convention; the full atomic decay rate is ``2 * gamma_perp``.
    """

    delta_c: float = 0.0
    delta_a: float = 0.0
    kappa: float = 0.1
    g0: float = math.sqrt(2.0)
    drive: float = 0.56
    phi: float = 0.0
    gamma_perp: float = 1.0
    n_max: int = 59
    dt: float = 1e-3

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError(f"photon cutoff must be >= 1, got {self.n_max}")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.gamma_perp > 0:
            raise ValueError("gamma_perp must be positive")
        for name in ("delta_c", "delta_a", "kappa", "g0", "drive", "phi", "dt"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def gamma(self):
        """Full atomic decay rate (twice the transverse rate)."""
        return 2.0 * self.gamma_perp

    @property
    def fock_dim(self):
        return self.n_max + 1

    @property
    def dim(self):
        """Total Hilbert-space dimension 2 * (n_max + 1)."""
        return 2 * (self.n_max + 1)


@dataclass(frozen=True, repr=False, eq=False)
class OperatorSet:
    """Precomputed system operators; immutable and shareable across threads.

    ``H`` and ``M`` are assembled at the nominal drive.  ``M`` is the
    generator of the deterministic part of the Stratonovich-form equation,
    ``M = -iH - kappa a^dag a - kappa a^2 e^{-2 i phi} - gamma_perp sigma^dag sigma``;
    the drive enters ``H`` and ``M`` affinely through ``a^dag - a``, which
    is what makes drive-modulation feedback a cheap per-step update.
    """

    params: SystemParams
    a: np.ndarray
    a_dag: np.ndarray
    sigma: np.ndarray
    sigma_dag: np.ndarray
    sigma_x: np.ndarray
    sigma_z: np.ndarray
    number: np.ndarray
    H: np.ndarray
    M: np.ndarray
    # internals used by the integrator and the reduced-model projection
    drift_gen0: np.ndarray = field(repr=False)   # K0 = -iH0 - kappa a^dag a - gp sigma^dag sigma
    strat_gen0: np.ndarray = field(repr=False)   # M0 = K0 - kappa a^2 e^{-2 i phi}
    drive_gen: np.ndarray = field(repr=False)    # a^dag - a
    meas_op: np.ndarray = field(repr=False)      # X = a^dag e^{i phi} + a e^{-i phi}

    def __repr__(self):
        return f"OperatorSet(D={self.params.dim}, n_max={self.params.n_max})"


def build_operators(params):
    """Assemble all operators on the truncated atom (x) field space.

    The Hamiltonian is
    ``H = delta_c a^dag a + delta_a sigma^dag sigma
    + i g0 (a^dag sigma - a sigma^dag) + i E (a^dag - a)``
    with hbar = 1.
    """
    if params.n_max < 1:
        raise ValueError("photon cutoff must be >= 1")
    F = params.fock_dim
    af = np.diag(np.sqrt(np.arange(1.0, F)), 1)
    eye_f = np.eye(F)
    a = np.kron(np.eye(2), af).astype(complex)
    a_dag = a.conj().T.copy()
    sig_a = np.array([[0.0, 1.0], [0.0, 0.0]])  # |g><e| in (g, e) ordering
    sigma = np.kron(sig_a, eye_f).astype(complex)
    sigma_dag = sigma.conj().T.copy()
    sigma_x = sigma + sigma_dag
    sigma_z = 0.5 * (sigma_dag @ sigma - sigma @ sigma_dag)
    number = a_dag @ a

    H0 = (
        params.delta_c * number
        + params.delta_a * (sigma_dag @ sigma)
        + 1j * params.g0 * (a_dag @ sigma - a @ sigma_dag)
    )
    drive_gen = a_dag - a
    H = H0 + 1j * params.drive * drive_gen

    gp = params.gamma_perp
    K0 = -1j * H0 - params.kappa * number - gp * (sigma_dag @ sigma)
    M0 = K0 - params.kappa * np.exp(-2j * params.phi) * (a @ a)
    M = M0 + params.drive * drive_gen
    X = np.exp(1j * params.phi) * a_dag + np.exp(-1j * params.phi) * a

    ops = OperatorSet(
        params=params,
        a=a, a_dag=a_dag, sigma=sigma, sigma_dag=sigma_dag,
        sigma_x=sigma_x, sigma_z=sigma_z, number=number,
        H=H, M=M,
        drift_gen0=K0, strat_gen0=M0, drive_gen=drive_gen, meas_op=X,
    )
    for arr in (ops.a, ops.a_dag, ops.sigma, ops.sigma_dag, ops.sigma_x,
                ops.sigma_z, ops.number, ops.H, ops.M, ops.drift_gen0,
                ops.strat_gen0, ops.drive_gen, ops.meas_op):
        arr.flags.writeable = False
    return ops


def _dag(mat):
    return mat.conj().swapaxes(-1, -2)


def ito_drift(rho, ops, e_drive=None):
    """Deterministic Ito increment generator A[rho] (Hamiltonian + dissipators).

    ``rho`` must be Hermitian (the commutator/dissipator algebra is applied
    in its Hermitian-adjoint-free form).  Broadcasts over leading axes.
    ``e_drive`` overrides the nominal drive amplitude (feedback actuation).
    """
    p = ops.params
    if rho.shape[-1] != p.dim:
        raise ValueError(f"state dimension {rho.shape[-1]} != operator dimension {p.dim}")
    e = p.drive if e_drive is None else e_drive
    K = ops.drift_gen0 + e * ops.drive_gen
    G = K @ rho
    arho = ops.a @ rho
    out = G + _dag(G) + (2.0 * p.kappa) * (arho @ ops.a_dag)
    F = p.fock_dim
    out[..., :F, :F] += p.gamma * rho[..., F:, F:]
    return out


def diffusion(rho, ops, _arho=None):
    """Measurement back-action B[rho]; trace-free for unit-trace input."""
    p = ops.params
    if rho.shape[-1] != p.dim:
        raise ValueError(f"state dimension {rho.shape[-1]} != operator dimension {p.dim}")
    arho = ops.a @ rho if _arho is None else _arho
    L = (math.sqrt(2.0 * p.kappa) * np.exp(-1j * p.phi)) * arho
    B = L + _dag(L)
    tr = np.einsum("...ii->...", B).real
    return B - tr[..., None, None] * rho


def meas_expectation(rho, ops):
    """sqrt(2 kappa) Tr[X rho], the signal part of the photocurrent rate."""
    p = ops.params
    z = np.einsum("ij,...ji->...", ops.a, rho)
    return 2.0 * math.sqrt(2.0 * p.kappa) * (np.exp(-1j * p.phi) * z).real


def photocurrent_increment(rho, dW, ops, params=None):
    """Observed homodyne increment dy = dW + sqrt(2 kappa) Tr[X rho] dt."""
    p = ops.params if params is None else params
    return dW + meas_expectation(rho, ops) * p.dt


def stratonovich_drift(rho, ops, e_drive=None):
    """Drift of the Stratonovich form of the evolution equation.

    The diffusion is quadratic in the state, so the conversion term (half
    the derivative of B along B) has closed form; no finite differences.
    """
    A = ito_drift(rho, ops, e_drive=e_drive)
    B = diffusion(rho, ops)
    p = ops.params
    sq = math.sqrt(2.0 * p.kappa)
    aB = ops.a @ B
    lin = (sq * np.exp(-1j * p.phi)) * aB
    lin = lin + _dag(lin)                       # sqrt(2k)(B a^dag e^{i phi} + a B e^{-i phi})
    c_rho = np.einsum("ij,...ji->...", ops.meas_op, rho).real * sq
    c_B = np.einsum("ij,...ji->...", ops.meas_op, B).real * sq
    corr = lin - c_B[..., None, None] * rho - c_rho[..., None, None] * B
    return A - 0.5 * corr


def _advance(rho, dW, ops, dt, e_drive):
    """One raw predictor-corrector update, no renormalization or checks.

    Returns the updated matrix.  Weak order two for the scalar-noise case:
    stochastic part from derivative-free supporting values, deterministic
    part from a predict-then-average trapezoidal correction.
    """
    sq_dt = math.sqrt(dt)
    dW = np.asarray(dW)
    w = dW[..., None, None]

    arho = ops.a @ rho
    a0 = ito_drift(rho, ops, e_drive=e_drive)
    b0 = diffusion(rho, ops, _arho=arho)

    base = rho + a0 * dt
    y_plus = base + b0 * sq_dt
    y_minus = base - b0 * sq_dt
    b_plus = diffusion(y_plus, ops)
    b_minus = diffusion(y_minus, ops)
    phi = 0.25 * ((b_plus + b_minus + 2.0 * b0) * w
                  + (b_plus - b_minus) * ((w * w - dt) / sq_dt))

    y_euler = base + b0 * w
    a_euler = ito_drift(y_euler, ops, e_drive=e_drive)
    y_pred = rho + 0.5 * dt * (a_euler + a0) + phi
    a_pred = ito_drift(y_pred, ops, e_drive=e_drive)
    return rho + 0.5 * dt * (a_pred + a0) + phi


def step(rho, dW, ops, params=None, e_drive=None):
    """Advance the conditional state by one time step of size ``params.dt``.

    The result is Hermitian-symmetrized and trace-renormalized; positivity
    is not enforced.  Raises :class:`IntegrationDiverged` on non-finite
    entries or a collapsing trace.
    """
    p = ops.params if params is None else params
    out = _advance(rho, dW, ops, p.dt, p.drive if e_drive is None else e_drive)
    out = 0.5 * (out + _dag(out))
    tr = np.einsum("...ii->...", out).real
    if not np.all(np.isfinite(tr)) or np.any(np.abs(tr) < 1e-6):
        raise IntegrationDiverged("state trace became non-finite or collapsed")
    return out / tr[..., None, None]


def expectations(rho, ops):
    """Per-state observables (x, p, sx, sy, sz, n); broadcasts over stacks."""
    F = ops.params.fock_dim
    z = np.einsum("ij,...ji->...", ops.a, rho)
    w = np.einsum("ij,...ji->...", ops.sigma, rho)
    diag = np.einsum("...ii->...i", rho).real
    n_ph = (np.arange(F) * (diag[..., :F] + diag[..., F:])).sum(axis=-1)
    sz = 0.5 * (diag[..., F:].sum(axis=-1) - diag[..., :F].sum(axis=-1))
    return {
        "x": z.real,
        "p": z.imag,
        "sx": 2.0 * w.real,
        "sy": -2.0 * w.imag,
        "sz": sz,
        "n": n_ph,
    }


class _TrajectoryStepper:
    """Single-trajectory integrator with preallocated buffers.

    Exploits the ladder/block structure of the operators: applying ``a``
    (and the dissipator sandwich) is a strided scaled copy, and the drift
    generator is applied as a sparse matrix whose drive-dependent entries
    are refreshed in place, so feedback-modulated drives cost nothing.
    Not reentrant: one instance per trajectory.  Numerically equivalent to
    :func:`step` (same scheme, different evaluation order).
    """

    def __init__(self, ops, dt=None):
        p = ops.params
        self.ops = ops
        self.dt = p.dt if dt is None else dt
        self.sq_dt = math.sqrt(self.dt)
        D, F = p.dim, p.fock_dim
        self.D, self.F = D, F
        self.gamma = p.gamma
        self._cphase = math.sqrt(2.0 * p.kappa) * np.exp(-1j * p.phi)

        # drift generator K(e) = K0 + e (a^dag - a) on a fixed union pattern
        K0 = np.asarray(ops.drift_gen0)
        Dg = np.asarray(ops.drive_gen)
        mask = (K0 != 0) | (Dg != 0)
        rows, cols = np.nonzero(mask)
        self._K = sp.csr_array((K0[rows, cols], (rows, cols)), shape=(D, D))
        order = np.lexsort((cols, rows))
        self._k0_data = K0[rows, cols][order]
        self._kd_data = Dg[rows, cols][order]
        self._e_drive = None
        self.set_drive(p.drive)

        w = np.sqrt(np.arange(1.0, F))            # ladder weights
        self._w_col = w[:, None]
        # shifted fancy index and weights for the sandwich 2k a rho a^dag
        shift = np.concatenate([np.arange(1, F), [F - 1], np.arange(F + 1, 2 * F), [2 * F - 1]])
        w_ext = np.concatenate([w, [0.0], w, [0.0]])
        self._shift = shift
        self._w2 = (2.0 * p.kappa) * np.outer(w_ext, w_ext)

        self._bufs = [np.empty((D, D), dtype=complex) for _ in range(17)]
        (self._arho, self._dag, self._sand, self._a0, self._b0, self._bp,
         self._bm, self._phi, self._base, self._ywork, self._t1, self._t2,
         self._bsq, self._ae, self._ap, self._out0, self._out1) = self._bufs
        self._flip = False

    def set_drive(self, e):
        if e != self._e_drive:
            np.multiply(self._kd_data, e, out=self._K.data)
            self._K.data += self._k0_data
            self._e_drive = e

    def _apply_a(self, rho, out):
        F, D = self.F, self.D
        np.multiply(self._w_col, rho[1:F], out=out[: F - 1])
        out[F - 1] = 0.0
        np.multiply(self._w_col, rho[F + 1 :], out=out[F : D - 1])
        out[D - 1] = 0.0

    def drift(self, rho, out, keep_arho=False):
        """A[rho] into ``out``; optionally leaves a rho in self._arho."""
        G = self._K @ rho
        np.conjugate(G.T, out=self._dag)
        np.add(G, self._dag, out=out)
        np.multiply(self._w2, rho[np.ix_(self._shift, self._shift)], out=self._sand)
        np.add(out, self._sand, out=out)
        F = self.F
        out[:F, :F] += self.gamma * rho[F:, F:]
        if keep_arho:
            self._apply_a(rho, out=self._arho)

    def diff(self, rho, out, arho=None):
        """B[rho] into ``out``."""
        if arho is None:
            self._apply_a(rho, out=self._t1)
            arho = self._t1
        np.multiply(arho, self._cphase, out=self._t2)
        np.conjugate(self._t2.T, out=self._dag)
        np.add(self._t2, self._dag, out=out)
        tr = np.einsum("ii->", out).real
        np.multiply(rho, tr, out=self._t2)
        np.subtract(out, self._t2, out=out)

    def advance(self, rho, dW):
        """One predictor-corrector step; returns an internal double buffer.

        The returned array stays valid until the next-but-one call, which
        suits the simulate/closed-loop pattern of copy-then-step; callers
        that keep references longer must copy.
        """
        dt, sq_dt = self.dt, self.sq_dt
        dW = float(dW)
        out = self._out1 if self._flip else self._out0
        self._flip = not self._flip

        self.drift(rho, self._a0, keep_arho=True)
        self.diff(rho, self._b0, arho=self._arho)

        np.multiply(self._a0, dt, out=self._t1)
        np.add(rho, self._t1, out=self._base)

        np.multiply(self._b0, sq_dt, out=self._bsq)
        np.add(self._base, self._bsq, out=self._ywork)
        self.diff(self._ywork, self._bp)
        np.subtract(self._base, self._bsq, out=self._ywork)
        self.diff(self._ywork, self._bm)

        c = 0.25 * (dW * dW - dt) / sq_dt
        np.subtract(self._bp, self._bm, out=self._t1)
        np.multiply(self._t1, c, out=self._phi)
        np.add(self._bp, self._bm, out=self._t1)
        np.multiply(self._b0, 2.0, out=self._t2)
        np.add(self._t1, self._t2, out=self._t1)
        np.multiply(self._t1, 0.25 * dW, out=self._t1)
        np.add(self._phi, self._t1, out=self._phi)

        np.multiply(self._b0, dW, out=self._t1)
        np.add(self._base, self._t1, out=self._ywork)
        self.drift(self._ywork, self._ae)

        np.add(self._ae, self._a0, out=self._t1)
        np.multiply(self._t1, 0.5 * dt, out=self._t1)
        np.add(rho, self._t1, out=self._ywork)
        np.add(self._ywork, self._phi, out=self._ywork)
        self.drift(self._ywork, self._ap)

        np.add(self._ap, self._a0, out=self._t1)
        np.multiply(self._t1, 0.5 * dt, out=self._t1)
        np.add(rho, self._t1, out=out)
        np.add(out, self._phi, out=out)

        np.conjugate(out.T, out=self._t1)
        np.add(out, self._t1, out=out)
        out *= 0.5
        tr = np.einsum("ii->", out).real
        if not math.isfinite(tr) or abs(tr) < 1e-6:
            raise IntegrationDiverged("state trace became non-finite or collapsed")
        out /= tr
        return out


@dataclass
class RecordSpec:
    """What to keep while simulating.

    ``snapshot_every`` records full density matrices on the grid
    ``snapshot_start + k * snapshot_every`` inside the run window; with a
    ``snapshot_path`` they stream to a memory-mapped ``.npy`` instead of
    accumulating in RAM.  ``thin`` keeps every ``thin``-th step in the
    per-step columns (noise increments are never thinned away: dW and dy
    columns are only stored for kept steps, so thin > 1 is not suitable
    when the photocurrent is needed for replay).
    """

    snapshot_every: float | None = None
    snapshot_start: float = 0.0
    snapshot_stop: float | None = None
    snapshot_path: str | None = None
    track_purity: bool = False
    thin: int = 1


@dataclass
class Trajectory:
    """Per-step record of one stochastic run.

    Columns are aligned: row k holds the state observables at time t[k]
    (before the step) together with the increments dW[k], dy[k] applied
    over [t[k], t[k] + dt].  The photocurrent consistency
    ``dy - dW = sqrt(2 kappa) Tr[X rho] dt`` holds row by row.
    """

    params: SystemParams
    seed: int | None
    t: np.ndarray
    dW: np.ndarray
    dy: np.ndarray
    x: np.ndarray
    p: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    purity: np.ndarray | None = None
    snapshot_times: np.ndarray | None = None
    snapshots: np.ndarray | None = None
    snapshot_min_eig: np.ndarray | None = None
    final_rho: np.ndarray | None = None

    def __len__(self):
        return self.t.size


def ground_state(params):
    """Initial state: zero photons, atom in the ground state."""
    rho = np.zeros((params.dim, params.dim), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def _snapshot_steps(record, n_steps, dt, t_end):
    if record is None or record.snapshot_every is None:
        return np.empty(0, dtype=np.int64)
    stop = t_end if record.snapshot_stop is None else record.snapshot_stop
    times = np.arange(record.snapshot_start, stop + 0.5 * record.snapshot_every,
                      record.snapshot_every)
    steps = np.unique(np.round(times / dt).astype(np.int64))
    return steps[(steps >= 0) & (steps <= n_steps)]


def simulate(params, seed, t_end, record=None, rho0=None, dW=None, progress=None):
    """Integrate the monitored system from t = 0 to ``t_end``.

    Noise increments come from a counter-based Philox generator seeded
    with ``seed`` (Gaussian variates via the generator's standard normal
    transform), so runs are reproducible across platforms; a fixed seed
    reproduces the trajectory bit for bit.  A precomputed ``dW`` array
    bypasses the generator (used when replaying a stored noise path).

    Returns a :class:`Trajectory`.  Raises :class:`IntegrationDiverged`
    with the failing step index if the state leaves the representable
    range.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    ops = build_operators(params)
    dt = params.dt
    n_steps = int(round(t_end / dt))
    if dW is None:
        rng = np.random.Generator(np.random.Philox(seed))
        dW = rng.standard_normal(n_steps) * math.sqrt(dt)
    else:
        dW = np.asarray(dW, dtype=float)
        if dW.size < n_steps:
            raise ValueError(f"need {n_steps} noise increments, got {dW.size}")

    rho = ground_state(params) if rho0 is None else np.array(rho0, dtype=complex)
    stepper = _TrajectoryStepper(ops)
    thin = 1 if record is None else max(int(record.thin), 1)
    kept = range(0, n_steps, thin)
    n_kept = len(kept)

    cols = {name: np.empty(n_kept) for name in ("t", "dW", "dy", "x", "p", "sx", "sy", "sz")}
    track_purity = record is not None and record.track_purity
    purity = np.empty(n_kept) if track_purity else None

    snap_steps = _snapshot_steps(record, n_steps, dt, t_end)
    snap_at = {int(s): i for i, s in enumerate(snap_steps)}
    snapshots = None
    snap_min_eig = None
    if snap_steps.size:
        shape = (snap_steps.size, params.dim, params.dim)
        if record.snapshot_path is not None:
            snapshots = np.lib.format.open_memmap(
                record.snapshot_path, mode="w+", dtype=np.complex128, shape=shape)
        else:
            snapshots = np.empty(shape, dtype=complex)
        snap_min_eig = np.empty(snap_steps.size)

    j = 0
    for k in range(n_steps):
        if k in snap_at:
            i = snap_at[k]
            snapshots[i] = rho
            snap_min_eig[i] = np.linalg.eigvalsh(rho)[0]
        keep = (k % thin) == 0
        if keep:
            e = expectations(rho, ops)
            cols["t"][j] = k * dt
            cols["dW"][j] = dW[k]
            cols["dy"][j] = dW[k] + meas_expectation(rho, ops) * dt
            for name in ("x", "p", "sx", "sy", "sz"):
                cols[name][j] = e[name]
            if track_purity:
                purity[j] = np.vdot(rho, rho).real
            j += 1
        try:
            rho = stepper.advance(rho, dW[k])
        except IntegrationDiverged as exc:
            raise IntegrationDiverged(f"integration diverged at step {k} (t={k * dt:.3f})",
                                      step_index=k) from exc
        if progress is not None:
            progress(k + 1, n_steps)

    last = n_steps
    if last in snap_at:
        i = snap_at[last]
        snapshots[i] = rho
        snap_min_eig[i] = np.linalg.eigvalsh(rho)[0]

    return Trajectory(
        params=params, seed=seed if isinstance(seed, int) else None,
        t=cols["t"], dW=cols["dW"], dy=cols["dy"],
        x=cols["x"], p=cols["p"], sx=cols["sx"], sy=cols["sy"], sz=cols["sz"],
        purity=purity,
        snapshot_times=snap_steps * dt if snap_steps.size else None,
        snapshots=snapshots,
        snapshot_min_eig=snap_min_eig,
        final_rho=rho.copy(),
    )
