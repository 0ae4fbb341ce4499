"""Bijection between Hermitian matrices and real coordinate vectors.

A Hermitian ``D x D`` matrix is stored as a real vector of length
``m = D**2``.  Using 1-based indices ``n, m`` (``n < m``), the layout is

* diagonal ``rho_nn``            at slot ``n(n+1)/2``,
* real part of ``rho_nm``        at slot ``m(m-1)/2 + n``,
* imaginary part of ``rho_nm``   at slot ``D(D+1)/2 + (m-1)(m-2)/2 + n``.

The first ``D(D+1)/2`` slots therefore interleave diagonal and real
off-diagonal entries; all imaginary parts follow.  Off-diagonal entries
carry no extra weight by default, so the Euclidean dot product of two
vectors is *not* ``Tr(rho_A rho_B)``; pass ``weighted=True`` to scale the
off-diagonal entries by ``sqrt(2)``, which restores that identity.

Internally everything is 0-based; the formulas above are shifted by one
when building the index tables.
"""

from functools import lru_cache

import numpy as np

_SQRT2 = np.sqrt(2.0)


@lru_cache(maxsize=32)
def _layout(D):
    """Index tables mapping matrix entries to vector slots for dimension D."""
    n = np.arange(D)
    diag = (n + 1) * (n + 2) // 2 - 1
    iu, ju = np.triu_indices(D, k=1)
    re = (ju + 1) * ju // 2 + iu
    im = D * (D + 1) // 2 + ju * (ju - 1) // 2 + iu
    return diag, iu, ju, re, im


def vector_dim(D):
    """Length of the coordinate vector for a D x D Hermitian matrix."""
    return D * D


def rho_to_vec(rho, weighted=False, herm_tol=1e-10):
    """Map a Hermitian matrix to its real coordinate vector.

    Parameters
    ----------
    rho : (D, D) array_like, complex
        Hermitian matrix.  Inputs whose max asymmetry ``|rho - rho^dag|``
        exceeds ``herm_tol`` (relative to the largest entry) are rejected.
    weighted : bool
        Scale off-diagonal entries by sqrt(2) so that the Euclidean dot
        product equals the trace inner product.

    Returns
    -------
    (D*D,) ndarray, float
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {rho.shape}")
    scale = max(np.abs(rho).max(), 1.0)
    asym = np.abs(rho - rho.conj().T).max()
    if asym > herm_tol * scale:
        raise ValueError(f"matrix is not Hermitian: max asymmetry {asym:.3e}")
    D = rho.shape[0]
    diag, iu, ju, re, im = _layout(D)
    x = np.empty(D * D)
    x[diag] = rho.diagonal().real
    upper = rho[iu, ju]
    w = _SQRT2 if weighted else 1.0
    x[re] = w * upper.real
    x[im] = w * upper.imag
    return x


def vec_to_rho(x, weighted=False):
    """Inverse of :func:`rho_to_vec`; Hermitian by construction.

    The result's trace equals the sum of the diagonal slots and is not
    normalized here; the fitting stage owns the trace constraint.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a 1-d coordinate vector")
    D = int(round(np.sqrt(x.size)))
    if D * D != x.size:
        raise ValueError(f"vector length {x.size} is not a perfect square")
    diag, iu, ju, re, im = _layout(D)
    rho = np.zeros((D, D), dtype=complex)
    w = 1.0 / _SQRT2 if weighted else 1.0
    upper = w * (x[re] + 1j * x[im])
    rho[iu, ju] = upper
    rho[ju, iu] = upper.conj()
    rho[np.arange(D), np.arange(D)] = x[diag]
    return rho


def trace_vector(D):
    """Vector v with v . rho_to_vec(rho) = Tr(rho): ones at the diagonal slots."""
    if D < 1:
        raise ValueError("dimension must be at least 1")
    diag, _, _, _, _ = _layout(D)
    v = np.zeros(D * D)
    v[diag] = 1.0
    return v
