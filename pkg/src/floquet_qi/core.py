"""Dense small-matrix algebra for density matrices and superoperators.

Density matrices are plain complex ``numpy`` arrays of shape ``(d, d)``.
Superoperators act on column-stacked vectors: ``vec(rho)`` stacks the
columns of ``rho``, so ``vec(A @ X @ B) == kron(B.T, A) @ vec(X)``.
All rates and frequencies are dimensionless (normalised by gamma10).
"""

import numpy as np
import scipy.linalg

from .errors import DimensionError, NumericError, ValidationError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10


def _as_square(m, name="matrix"):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    return m


def matexp(m, scale=1.0):
    """Return ``exp(scale * m)``.

    Backed by scipy's scaling-and-squaring Pade approximant.
    """
    m = _as_square(m)
    if not np.isfinite(scale):
        raise NumericError("scale must be finite")
    if not np.all(np.isfinite(m)):
        raise NumericError("matrix has non-finite entries")
    return scipy.linalg.expm(scale * m)


def matexp_integral(m, h):
    """Return ``(exp(h m), int_0^h exp(s m) ds)`` from one augmented exponential."""
    m = _as_square(m)
    n = m.shape[0]
    aug = np.zeros((2 * n, 2 * n), dtype=complex)
    aug[:n, :n] = m
    aug[:n, n:] = np.eye(n)
    big = matexp(aug, h)
    return big[:n, :n], big[:n, n:]


def vectorize(rho):
    rho = _as_square(rho, "density matrix")
    return rho.reshape(-1, order="F").copy()


def devectorize(v):
    v = np.asarray(v, dtype=complex).ravel()
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size or v.size == 0:
        raise DimensionError(f"vector length {v.size} is not a perfect square")
    return v.reshape((d, d), order="F").copy()


def trace_vector(d):
    """Row vector ``t`` with ``t @ vec(rho) == trace(rho)``."""
    return vectorize(np.eye(d)).real


def projector(i, j, d):
    """Return ``|i><j|`` in dimension ``d``."""
    m = np.zeros((d, d), dtype=complex)
    m[i, j] = 1.0
    return m


def basis_state(i, d):
    return projector(i, i, d)


def is_hermitian(m, tol=HERMITIAN_TOL):
    m = np.asarray(m)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    return float(np.max(np.abs(m - m.conj().T))) <= tol * scale


def validate_density_matrix(rho, hermitian_tol=HERMITIAN_TOL, trace_tol=TRACE_TOL,
                            positivity_tol=POSITIVITY_TOL):
    """Check the density-matrix invariants and return ``rho`` as an array.

    Raises
    ------
    ValidationError
        If ``rho`` is not Hermitian, not unit trace, or has an eigenvalue
        below ``-positivity_tol``.
    """
    rho = _as_square(rho, "density matrix")
    if np.max(np.abs(rho - rho.conj().T)) > hermitian_tol:
        raise ValidationError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > trace_tol:
        raise ValidationError(f"density matrix trace {np.trace(rho)!r} != 1")
    lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lo < -positivity_tol:
        raise ValidationError(f"density matrix has negative eigenvalue {lo:.3e}")
    return rho


def hamiltonian_superop(h):
    """Superoperator of ``rho -> -i[h, rho]``."""
    h = _as_square(h, "Hamiltonian")
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(eye, h) - np.kron(h.T, eye))


def dissipator_superop(c):
    """Superoperator of ``rho -> c rho c^+ - (c^+ c rho + rho c^+ c)/2``."""
    c = _as_square(c, "jump operator")
    eye = np.eye(c.shape[0])
    cdc = c.conj().T @ c
    return np.kron(c.conj(), c) - 0.5 * np.kron(eye, cdc) - 0.5 * np.kron(cdc.T, eye)


def lindblad_generator(h, damping=(), dephasing=()):
    """Build the Liouvillian of the master equation.

    ``L(rho) = -i[h, rho]
        + sum (g/2)(2 s rho s^+ - s^+ s rho - rho s^+ s)       over damping
        + sum gphi (2 P rho P - P rho - rho P)                 over dephasing``

    The damping prefactor is ``g/2`` and the dephasing prefactor is ``gphi``
    (no half), so a single level with decay ``g`` and dephasing ``gphi``
    loses coherence at ``g/2 + gphi``.

    Parameters
    ----------
    h : (d, d) array
        Hermitian Hamiltonian.
    damping : iterable of (rate, lowering operator)
    dephasing : iterable of (rate, projector)

    Returns
    -------
    (d*d, d*d) complex array
    """
    h = _as_square(h, "Hamiltonian")
    if not np.all(np.isfinite(h)):
        raise NumericError("Hamiltonian has non-finite entries")
    if not is_hermitian(h):
        raise ValidationError("Hamiltonian is not Hermitian")
    gen = hamiltonian_superop(h)
    for kind, terms, factor in (("damping", damping, 1.0), ("dephasing", dephasing, 2.0)):
        for rate, op in terms:
            if not np.isfinite(rate) or rate < 0:
                raise ValidationError(f"{kind} rate must be finite and >= 0, got {rate}")
            op = _as_square(op, f"{kind} operator")
            if op.shape != h.shape:
                raise DimensionError(f"{kind} operator shape {op.shape} != Hamiltonian {h.shape}")
            if rate:
                gen = gen + factor * rate * dissipator_superop(op)
    return gen


def apply_superop(superop, rho):
    return devectorize(np.asarray(superop) @ vectorize(rho))
