"""Symmetric tridiagonal eigensolver and block spectra.

Implicit-shift QL with accumulated eigenvectors, written against float64
and a 30-sweep cap per eigenvalue.  Output is deterministic: eigenvalues
ascending, each eigenvector's first nonzero component positive, and for
mirror-symmetric (persymmetric) input every eigenvector is projected onto
its parity branch so the symmetry holds bitwise, not just to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, adjacency_matrix, build_profile

MACHEP = 2.0 ** -52
MAX_SWEEPS = 30
SIGN_EPS = 1e-12
DEGENERACY_EPS = 1e-12


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues ascending; eigenvector k in column k of `eigenvectors`.

    `parities` holds +1/-1 for symmetric/antisymmetric eigenvectors of a
    persymmetric matrix and 0 when the input had no mirror symmetry.

    When the matrix was a uniform on-site term plus a zero-diagonal hopping
    part, `offset` holds that uniform term and `bare_eigenvalues` the exact
    levels of the hopping part alone, which come in exact +/- pairs.  Folding
    the offset into each level before multiplying by t would round each level
    differently and break that pairing by ~ulp(offset), an error the
    propagator phases amplify linearly in t; `phases` therefore applies the
    offset as one global factor instead.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    parities: np.ndarray
    offset: float = 0.0
    bare_eigenvalues: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def phases(self, t: float) -> np.ndarray:
        """exp(-i w_k t) for all levels, exact-conjugate over +/- pairs."""
        if self.bare_eigenvalues is None:
            return np.exp(-1j * self.eigenvalues * t)
        base = np.exp(-1j * self.bare_eigenvalues * t)
        if self.offset:
            base = base * complex(np.exp(-1j * self.offset * t))
        return base


def _ql_implicit(d: np.ndarray, e: np.ndarray, z: np.ndarray) -> None:
    """In-place implicit-shift QL on (diag d, subdiag e), rotating z columns."""
    n = len(d)
    e = np.append(e, 0.0)
    for l in range(n):
        for sweep in range(MAX_SWEEPS + 1):
            for m in range(l, n):
                if m == n - 1:
                    break
                if abs(e[m]) <= MACHEP * (abs(d[m]) + abs(d[m + 1])):
                    break
            if m == l:
                break
            if sweep == MAX_SWEEPS:
                raise RuntimeError(
                    f"tridiagonal QL failed to converge for eigenvalue {l} "
                    f"within {MAX_SWEEPS} sweeps"
                )
            p = d[l]
            g = (d[l + 1] - p) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - p + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                # two Givens branches keep |c|,|s| <= 1 without overflow
                if abs(f) >= abs(g):
                    c = g / f
                    r = math.sqrt(c * c + 1.0)
                    e[i + 1] = f * r
                    s = 1.0 / r
                    c = c * s
                else:
                    s = f / g
                    r = math.sqrt(s * s + 1.0)
                    e[i + 1] = g * r
                    c = 1.0 / r
                    s = s * c
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                col = z[:, i + 1].copy()
                z[:, i + 1] = s * z[:, i] + c * col
                z[:, i] = c * z[:, i] - s * col
            d[l] -= p
            e[l] = g
            e[m] = 0.0


def _is_tridiagonal(a: np.ndarray) -> bool:
    mask = np.abs(np.subtract.outer(np.arange(len(a)), np.arange(len(a)))) > 1
    return not np.any(a[mask])


def _purify_parity(z: np.ndarray) -> np.ndarray:
    """Project each column onto its dominant mirror-parity branch."""
    parities = np.empty(z.shape[1])
    for k in range(z.shape[1]):
        v = z[:, k]
        rev = v[::-1]
        sym = 0.5 * (v + rev)
        anti = 0.5 * (v - rev)
        if np.dot(sym, sym) >= np.dot(anti, anti):
            w, parities[k] = sym, 1.0
        else:
            w, parities[k] = anti, -1.0
        z[:, k] = w / math.sqrt(np.dot(w, w))
    return parities


def _reorthogonalize_clusters(w: np.ndarray, z: np.ndarray) -> None:
    """Gram-Schmidt inside eigenvalue clusters tighter than DEGENERACY_EPS."""
    start = 0
    for stop in range(1, len(w) + 1):
        if stop == len(w) or w[stop] - w[stop - 1] > DEGENERACY_EPS:
            for a in range(start + 1, stop):
                for b in range(start, a):
                    z[:, a] -= np.dot(z[:, b], z[:, a]) * z[:, b]
                z[:, a] /= math.sqrt(np.dot(z[:, a], z[:, a]))
            start = stop


def _fix_signs(z: np.ndarray) -> None:
    for k in range(z.shape[1]):
        col = z[:, k]
        nz = np.nonzero(np.abs(col) > SIGN_EPS)[0]
        lead = nz[0] if len(nz) else 0
        if col[lead] < 0:
            z[:, k] = -col


def diagonalize(a: np.ndarray) -> SpectralDecomposition:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if not np.array_equal(a, a.T):
        raise ValueError("matrix must be symmetric")
    if not _is_tridiagonal(a):
        raise ValueError("matrix must be tridiagonal")
    n = len(a)
    d = np.diag(a).astype(float).copy()
    e = np.diag(a, -1).astype(float).copy()
    z = np.eye(n)
    _ql_implicit(d, e, z)

    order = np.argsort(d, kind="stable")
    w = d[order]
    z = z[:, order]

    if not np.any(np.diag(a)):
        # A zero diagonal makes the chain bipartite, so the exact spectrum
        # is antisymmetric: levels come in +/- pairs (plus a zero for odd
        # dimension).  The QL output pairs only to roundoff, and that tiny
        # mismatch is amplified linearly by t in the propagator phases, so
        # enforce the pairing exactly on the sorted levels.
        w = 0.5 * (w - w[::-1])

    persymmetric = np.array_equal(a, a[::-1, ::-1].T)
    if persymmetric:
        parities = _purify_parity(z)
    else:
        parities = np.zeros(n)
    _reorthogonalize_clusters(w, z)
    _fix_signs(z)
    return SpectralDecomposition(eigenvalues=w, eigenvectors=z, parities=parities)


def decompose_chain(spec: ChainSpec) -> SpectralDecomposition:
    """Profile -> matrix -> decomposition for a chain configuration.

    The uniform on-site energy commutes with the hopping part, so it is
    peeled off before the eigensolve and added back to the eigenvalues;
    changing h therefore leaves the eigenvectors bitwise identical.
    """
    a = adjacency_matrix(build_profile(spec))
    if spec.h != 0.0:
        bare = diagonalize(a - spec.h * np.eye(len(a)))
        return SpectralDecomposition(
            eigenvalues=bare.eigenvalues + spec.h,
            eigenvectors=bare.eigenvectors,
            parities=bare.parities,
            offset=spec.h,
            bare_eigenvalues=bare.eigenvalues,
        )
    bare = diagonalize(a)
    return SpectralDecomposition(
        eigenvalues=bare.eigenvalues,
        eigenvectors=bare.eigenvectors,
        parities=bare.parities,
        offset=0.0,
        bare_eigenvalues=bare.eigenvalues,
    )


def wire_spectrum(n_w: int, h: float = 0.0) -> np.ndarray:
    """Uncoupled uniform-wire eigenvalues h + cos(q*pi/(n_w+1)), q = 1..n_w."""
    if n_w < 1:
        raise ValueError("n_w must be >= 1")
    q = np.arange(1, n_w + 1)
    return h + np.cos(q * np.pi / (n_w + 1))


def sender_spectrum(n_s: int, h: float = 0.0) -> np.ndarray:
    """Uncoupled sender-block eigenvalues h + cos(k*pi/(n_s+1)), k = 1..n_s."""
    if n_s < 1:
        raise ValueError("n_s must be >= 1")
    k = np.arange(1, n_s + 1)
    return h + np.cos(k * np.pi / (n_s + 1))
