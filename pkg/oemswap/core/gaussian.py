#!/usr/bin/env python3
"""
OEMSwap Gaussian Core

Symplectic linear algebra on zero-mean Gaussian states: covariance matrices
with labelled modes, symplectic spectra, purities, partial transposition,
logarithmic negativity, beam splitters and conditional homodyne measurement.

Conventions used throughout the package:
    quadratures are interleaved (X1, Y1, X2, Y2, ...), with a = (X + iY)/sqrt(2),
    so the vacuum covariance matrix is I/2.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Set, Tuple, Union

import numpy as np
import scipy.linalg as spla

from oemswap.data.constants import (
    PAIRING_RTOL,
    PHYSICALITY_ATOL,
    PINV_RTOL,
    SYMMETRY_ATOL,
)
from oemswap.utils.error_handler import NumericalError, ValidationError

logger = logging.getLogger(__name__)

ROLES = ("w", "b", "c", "m")
QUADRATURES = ("X", "Y")


@dataclass(frozen=True, order=True)
class ModeLabel:
    """A mode: site 1 or 2, and a role (w microwave, b Bell, c certifier, m mechanics)."""
    site: int
    role: str

    def __post_init__(self):
        if self.site not in (1, 2):
            raise ValidationError(f"Mode site must be 1 or 2, got {self.site!r}")
        if self.role not in ROLES:
            raise ValidationError(f"Mode role must be one of {ROLES}, got {self.role!r}")

    def __str__(self) -> str:
        return f"{self.role}{self.site}"

    @classmethod
    def parse(cls, text: str) -> "ModeLabel":
        """Parse labels such as "w1" or "b2"."""
        if len(text) != 2 or not text[1].isdigit():
            raise ValidationError(f"Cannot parse mode label {text!r}")
        return cls(site=int(text[1]), role=text[0])


LabelLike = Union[ModeLabel, str]


def as_label(label: LabelLike) -> ModeLabel:
    if isinstance(label, ModeLabel):
        return label
    return ModeLabel.parse(label)


@dataclass(frozen=True)
class SymplecticForm:
    """The standard symplectic form on n modes, interleaved ordering."""
    n_modes: int

    @property
    def matrix(self) -> np.ndarray:
        return np.kron(np.eye(self.n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_form(n_modes: int) -> np.ndarray:
    return SymplecticForm(n_modes).matrix


def is_symplectic(s: np.ndarray, atol: float = 1e-9) -> bool:
    """True if S Sigma S^T = Sigma."""
    sigma = symplectic_form(s.shape[0] // 2)
    return bool(np.allclose(s @ sigma @ s.T, sigma, atol=atol))


class CovMatrix:
    """Immutable covariance matrix over an ordered list of labelled modes."""

    __slots__ = ("_modes", "_data")

    def __init__(self, modes: Iterable[LabelLike], data):
        labels = tuple(as_label(m) for m in modes)
        if len(set(labels)) != len(labels):
            raise ValidationError(f"Duplicate mode labels: {[str(m) for m in labels]}")

        array = np.array(data, dtype=float)
        if array.ndim != 2 or array.shape != (2 * len(labels), 2 * len(labels)):
            raise ValidationError(
                f"Covariance matrix shape {array.shape} does not match {len(labels)} modes"
            )
        if not np.all(np.isfinite(array)):
            raise ValidationError("Covariance matrix has non-finite entries")
        if np.max(np.abs(array - array.T), initial=0.0) > SYMMETRY_ATOL:
            raise ValidationError("Covariance matrix is not symmetric")

        array = 0.5 * (array + array.T)
        array.setflags(write=False)
        self._modes = labels
        self._data = array

    @property
    def modes(self) -> Tuple[ModeLabel, ...]:
        return self._modes

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def n_modes(self) -> int:
        return len(self._modes)

    def __repr__(self) -> str:
        return f"CovMatrix(modes={[str(m) for m in self._modes]})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, CovMatrix):
            return NotImplemented
        return self._modes == other._modes and np.array_equal(self._data, other._data)

    __hash__ = None

    @classmethod
    def vacuum(cls, modes: Iterable[LabelLike]) -> "CovMatrix":
        labels = tuple(modes)
        return cls(labels, 0.5 * np.eye(2 * len(labels)))

    @classmethod
    def thermal(cls, modes: Iterable[LabelLike], nbar: Sequence[float]) -> "CovMatrix":
        labels = tuple(modes)
        return cls(labels, np.diag(np.repeat(np.asarray(nbar, dtype=float) + 0.5, 2)))

    def index(self, label: LabelLike) -> int:
        label = as_label(label)
        try:
            return self._modes.index(label)
        except ValueError:
            raise ValidationError(f"Unknown mode label {label}") from None

    def quadrature_indices(self, labels: Iterable[LabelLike]) -> List[int]:
        indices = []
        for label in labels:
            i = self.index(label)
            indices.extend((2 * i, 2 * i + 1))
        return indices

    def block(self, row: LabelLike, col: LabelLike) -> np.ndarray:
        i, j = self.index(row), self.index(col)
        return np.array(self._data[2 * i:2 * i + 2, 2 * j:2 * j + 2])

    def reduce(self, labels: Iterable[LabelLike]) -> "CovMatrix":
        """Reduced state of the given modes, in the given order."""
        labels = [as_label(m) for m in labels]
        idx = self.quadrature_indices(labels)
        return CovMatrix(labels, self._data[np.ix_(idx, idx)])

    def relabel(self, mapping: Mapping[LabelLike, LabelLike]) -> "CovMatrix":
        table = {as_label(k): as_label(v) for k, v in mapping.items()}
        return CovMatrix([table.get(m, m) for m in self._modes], self._data)

    def direct_sum(self, other: "CovMatrix") -> "CovMatrix":
        return CovMatrix(self._modes + other._modes, spla.block_diag(self._data, other._data))

    def transform(self, s: np.ndarray) -> "CovMatrix":
        """V -> S V S^T."""
        return CovMatrix(self._modes, _symmetrize(s @ self._data @ s.T))

    def min_symplectic_eigenvalue(self) -> float:
        return float(symplectic_eigenvalues(self)[0])

    def is_physical(self, atol: float = PHYSICALITY_ATOL) -> bool:
        """V + i Sigma/2 >= 0, tested through the symplectic spectrum."""
        if np.linalg.eigvalsh(self._data)[0] <= 0.0:
            return False
        return self.min_symplectic_eigenvalue() >= 0.5 - atol

    def require_physical(self, atol: float = PHYSICALITY_ATOL) -> "CovMatrix":
        if not self.is_physical(atol):
            raise ValidationError(f"Unphysical covariance matrix over {[str(m) for m in self._modes]}")
        return self

    def to_dict(self) -> Dict[str, object]:
        return {"modes": [str(m) for m in self._modes], "data": self._data.tolist()}

    @classmethod
    def from_dict(cls, payload: Mapping[str, object]) -> "CovMatrix":
        try:
            return cls(payload["modes"], payload["data"])
        except KeyError as e:
            raise ValidationError(f"Covariance matrix payload missing {e}") from None


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def two_mode_squeezed(r: float, modes: Sequence[LabelLike] = ("w1", "b1")) -> CovMatrix:
    """Two-mode squeezed vacuum with squeezing r."""
    ch, sh = np.cosh(2 * r) / 2, np.sinh(2 * r) / 2
    z = np.diag([1.0, -1.0])
    data = np.block([[ch * np.eye(2), sh * z], [sh * z, ch * np.eye(2)]])
    return CovMatrix(modes, data)


def symplectic_eigenvalues(v: CovMatrix) -> np.ndarray:
    """Symplectic eigenvalues of V, one per +/- pair, sorted ascending."""
    sigma = symplectic_form(v.n_modes)
    try:
        eigenvalues = np.linalg.eigvals(1j * sigma @ v.data)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Eigen-solver failed on iSigmaV: {e}") from e

    moduli = np.sort(np.abs(eigenvalues)).reshape(-1, 2)
    mismatch = np.abs(moduli[:, 0] - moduli[:, 1])
    if np.any(mismatch > PAIRING_RTOL * np.maximum(1.0, moduli[:, 1])):
        logger.warning(f"Symplectic eigenvalue pairing mismatch up to {mismatch.max():.3e}")
    return moduli.mean(axis=1)


def partial_transpose(v: CovMatrix, modes_to_transpose: Iterable[LabelLike]) -> CovMatrix:
    """Flip the sign of the Y quadrature of the selected modes."""
    flip = np.ones(2 * v.n_modes)
    for label in modes_to_transpose:
        flip[2 * v.index(label) + 1] = -1.0
    return CovMatrix(v.modes, v.data * np.outer(flip, flip))


def _check_bipartition(v: CovMatrix, bipartition: Tuple[Iterable[LabelLike], Iterable[LabelLike]]):
    part_a = {as_label(m) for m in bipartition[0]}
    part_b = {as_label(m) for m in bipartition[1]}
    if not part_a or not part_b:
        raise ValidationError("Both sides of a bipartition must be non-empty")
    if part_a & part_b:
        raise ValidationError("Bipartition sides overlap")
    if part_a | part_b != set(v.modes):
        raise ValidationError("Bipartition must cover exactly the modes of the state")
    return part_a, part_b


def pt_symplectic_eigenvalues(
    v: CovMatrix, bipartition: Tuple[Iterable[LabelLike], Iterable[LabelLike]]
) -> np.ndarray:
    """Symplectic spectrum of V partially transposed on the second side."""
    _, part_b = _check_bipartition(v, bipartition)
    return symplectic_eigenvalues(partial_transpose(v, part_b))


def log_negativity(v: CovMatrix, bipartition: Tuple[Iterable[LabelLike], Iterable[LabelLike]]) -> float:
    """Logarithmic negativity max{0, -ln(2 eta_-)} across a bipartition.

    eta_- is the smallest partially transposed symplectic eigenvalue; natural log.
    """
    _check_bipartition(v, bipartition)
    v.require_physical()
    eta_minus = pt_symplectic_eigenvalues(v, bipartition)[0]
    return float(max(0.0, -np.log(2.0 * eta_minus)))


def purity(v: CovMatrix) -> float:
    """Tr rho^2 = (2^N sqrt(det V))^-1."""
    sign, logdet = np.linalg.slogdet(v.data)
    if sign <= 0:
        raise ValidationError("Covariance matrix has non-positive determinant (unphysical)")
    return float(np.exp(-v.n_modes * np.log(2.0) - 0.5 * logdet))


def beamsplitter_apply(v: CovMatrix, mode_a: LabelLike, mode_b: LabelLike) -> CovMatrix:
    """Balanced beam splitter (a, b) -> ((a + b)/sqrt2, (b - a)/sqrt2)."""
    ia, ib = v.index(mode_a), v.index(mode_b)
    if ia == ib:
        raise ValidationError("Beam splitter needs two distinct modes")

    s = np.eye(2 * v.n_modes)
    t = 1.0 / np.sqrt(2.0)
    for q in (0, 1):
        a, b = 2 * ia + q, 2 * ib + q
        s[a, a], s[a, b] = t, t
        s[b, a], s[b, b] = -t, t
    return v.transform(s)


def homodyne_condition(v: CovMatrix, measurements: Sequence[Tuple[LabelLike, str]]) -> CovMatrix:
    """Conditional CM of the unmeasured modes after ideal homodyne detection.

    V' = V_R - V_RM Pi (Pi^T V_M Pi)^+ Pi^T V_RM^T. The result does not depend
    on the measurement outcomes; displacements are not tracked.
    """
    measured = []
    selected = []
    for label, quadrature in measurements:
        label = as_label(label)
        if quadrature not in QUADRATURES:
            raise ValidationError(f"Quadrature must be X or Y, got {quadrature!r}")
        if label in measured:
            raise ValidationError(f"Mode {label} measured twice")
        measured.append(label)
        selected.append(2 * v.index(label) + QUADRATURES.index(quadrature))

    retained = [m for m in v.modes if m not in measured]
    if not retained:
        raise ValidationError("Homodyne conditioning would leave no modes")

    r = v.quadrature_indices(retained)
    vr = v.data[np.ix_(r, r)]
    vrs = v.data[np.ix_(r, selected)]
    vs = v.data[np.ix_(selected, selected)]
    gain = vrs @ spla.pinv(vs, atol=0.0, rtol=PINV_RTOL)
    return CovMatrix(retained, _symmetrize(vr - gain @ vrs.T))


def apply_local_symplectics(v: CovMatrix, locals_by_mode: Mapping[LabelLike, np.ndarray]) -> CovMatrix:
    """Apply single-mode symplectics to the named modes, identity elsewhere."""
    s = np.eye(2 * v.n_modes)
    for label, local in locals_by_mode.items():
        i = 2 * v.index(label)
        s[i:i + 2, i:i + 2] = local
    return v.transform(s)


def _symmetrizing_local(block: np.ndarray) -> np.ndarray:
    """Single-mode symplectic S with S A S^T = sqrt(det A) I."""
    eigenvalues, rotation = np.linalg.eigh(block)
    if np.linalg.det(rotation) < 0:
        rotation[:, 0] *= -1.0
    target = np.sqrt(eigenvalues[0] * eigenvalues[1])
    return np.diag(np.sqrt(target / eigenvalues)) @ rotation.T


def _is_standard_form(data: np.ndarray, rtol: float = 1e-12) -> bool:
    scale = max(1.0, float(np.max(np.abs(data))))
    a, b, c = data[0:2, 0:2], data[2:4, 2:4], data[0:2, 2:4]
    return (
        abs(a[0, 0] - a[1, 1]) <= rtol * scale and abs(a[0, 1]) <= rtol * scale
        and abs(b[0, 0] - b[1, 1]) <= rtol * scale and abs(b[0, 1]) <= rtol * scale
        and abs(c[0, 1]) <= rtol * scale and abs(c[1, 0]) <= rtol * scale
    )


def standard_form_two_mode(v: CovMatrix) -> Tuple[CovMatrix, Tuple[np.ndarray, np.ndarray]]:
    """Bring a two-mode CM to standard form [[aI, diag(c+, c-)], [., bI]].

    Returns the standard-form CM and the local symplectics (L1, L2) such that
    (L1 + L2) V (L1 + L2)^T is the result; c+ >= |c-|.
    """
    if v.n_modes != 2:
        raise ValidationError(f"Standard form needs exactly two modes, got {v.n_modes}")

    if _is_standard_form(v.data):
        return v, (np.eye(2), np.eye(2))

    s1 = _symmetrizing_local(v.data[0:2, 0:2])
    s2 = _symmetrizing_local(v.data[2:4, 2:4])
    cross = s1 @ v.data[0:2, 2:4] @ s2.T

    u, singular, vt = np.linalg.svd(cross)
    if np.linalg.det(u) < 0:
        u[:, 1] *= -1.0
        singular[1] *= -1.0
    if np.linalg.det(vt) < 0:
        vt[1, :] *= -1.0
        singular[1] *= -1.0

    local_1, local_2 = u.T @ s1, vt @ s2
    return v.transform(spla.block_diag(local_1, local_2)), (local_1, local_2)
