"""On-chip Hamiltonian construction for the seven-site light-harvesting network.

The seven pigment sites are mapped onto a waveguide array: coupling
coefficients become evanescent couplings set by waveguide spacing, site
energies become propagation-constant offsets.  All Hamiltonians produced
here are dense Hermitian matrices in mm^-1.

Calibration note: the default site-energy convention scales the raw
site-energy offsets (cm^-1) by 0.014 and keeps the full coupling matrix.
With these defaults the gap between the two lowest eigenvalues of the
seven-site Hamiltonian is 0.4937 mm^-1, within 5% of the 0.4776 mm^-1
used for the auxiliary vibrational mode.  Dropping the weak couplings
(``include_weak_couplings=False``, the fabrication-table convention)
raises the gap to 0.594 mm^-1.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import PhysicsError

__all__ = [
    "RAW_SITE_HAMILTONIAN_CM",
    "WEAK_COUPLING_CUTOFF_CM",
    "CM_PER_MM",
    "DEFAULT_SINK_COUPLING",
    "FmoSpec",
    "Hamiltonian",
    "CouplingCalibration",
    "ChipPlanRow",
    "build_fmo_hamiltonian",
    "attach_sink",
    "attach_vibrational_mode",
    "lowest_eigengap",
    "coupling_for_spacing",
    "spacing_for_coupling",
    "delta_beta_for_speed",
    "speed_for_delta_beta",
    "effective_coupling",
    "delta_c",
    "apply_static_disorder",
    "export_chip_plan",
    "write_chip_plan",
    "read_chip_plan",
]

# Seven-site Hamiltonian of the C. tepidum complex, cm^-1 (upper triangle
# mirrored).  Diagonal: site energies; off-diagonal: dipole-dipole couplings.
_RAW_UPPER = np.array(
    [
        [12410.0, -96.0, 5.0, -4.4, 4.7, -12.6, -6.2],
        [0.0, 12530.0, 33.1, 6.8, 4.5, 7.4, -0.3],
        [0.0, 0.0, 12210.0, -51.1, 0.8, -8.4, 7.6],
        [0.0, 0.0, 0.0, 12320.0, -76.6, -14.2, -67.0],
        [0.0, 0.0, 0.0, 0.0, 12480.0, 78.3, -0.1],
        [0.0, 0.0, 0.0, 0.0, 0.0, 12630.0, 38.3],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 12440.0],
    ]
)
RAW_SITE_HAMILTONIAN_CM = _RAW_UPPER + np.triu(_RAW_UPPER, 1).T
RAW_SITE_HAMILTONIAN_CM.setflags(write=False)

#: Couplings below this raw magnitude are dropped from the chip layout.
WEAK_COUPLING_CUTOFF_CM = 15.0

#: Unit bridge between tabulated couplings (cm^-1) and chip dynamics (mm^-1).
CM_PER_MM = 0.1

HERMITICITY_TOL = 1e-12

#: Default sink-chain coupling (mm^-1), both drain-to-chain and within the
#: chain.  Chosen so the sink drains slowly enough that moderate dephasing
#: measurably helps transport on a 20 mm chip (see attach_sink).
DEFAULT_SINK_COUPLING = 0.2


@dataclass(frozen=True)
class FmoSpec:
    """Recipe for the seven-site on-chip Hamiltonian.

    ``site_energy_scale`` multiplies the min-subtracted raw site energies
    (in cm^-1) before the cm^-1 -> mm^-1 conversion.  The default 0.014
    together with ``include_weak_couplings=True`` is the calibrated
    convention (see module docstring).
    """

    raw_hamiltonian: np.ndarray = field(
        default_factory=lambda: RAW_SITE_HAMILTONIAN_CM.copy()
    )
    coupling_scale: float = 0.14
    unit_conversion: float = CM_PER_MM
    site_energy_scale: float = 0.014
    include_weak_couplings: bool = True

    def __post_init__(self):
        raw = np.asarray(self.raw_hamiltonian, dtype=float)
        object.__setattr__(self, "raw_hamiltonian", raw)
        if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
            raise PhysicsError(f"raw Hamiltonian must be square, got {raw.shape}")
        asym = np.argwhere(~np.isclose(raw, raw.T, rtol=0, atol=1e-9))
        if asym.size:
            i, j = asym[0]
            raise PhysicsError(f"raw Hamiltonian not symmetric at ({i}, {j})")
        if np.any(np.diag(raw) <= 0):
            raise PhysicsError("raw site energies must be strictly positive")
        if not 0 < self.coupling_scale <= 1:
            raise PhysicsError(f"coupling_scale must be in (0, 1], got {self.coupling_scale}")


@dataclass(frozen=True)
class CouplingCalibration:
    """Fabrication calibration constants.

    ``amplitude_a``/``decay_b`` parametrise the exponential decay of the
    evanescent coupling with waveguide spacing, C(d) = a * exp(-b d)
    (C in cm^-1, d in um).  ``delta_beta_slope`` is the linear map from
    writing-speed detuning (mm/s) to propagation-constant detuning (mm^-1).
    """

    amplitude_a: float = 47.19
    decay_b: float = 0.2243
    delta_beta_slope: float = 0.02

    def __post_init__(self):
        for name in ("amplitude_a", "decay_b", "delta_beta_slope"):
            if getattr(self, name) <= 0:
                raise PhysicsError(f"{name} must be positive")


@dataclass(frozen=True)
class Hamiltonian:
    """Dense Hermitian matrix (mm^-1) with labelled index roles.

    Roles are strings: ``"fmo_site_1"`` .. ``"fmo_site_7"``, ``"sink_1"``
    .. ``"sink_k"``, ``"vibration"``.  ``source_site`` and ``drain_site``
    are site numbers (1-based, defaults 6 and 3).
    """

    matrix: np.ndarray
    roles: tuple
    source_site: int = 6
    drain_site: int = 3

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "roles", tuple(self.roles))
        if m.shape != (len(self.roles), len(self.roles)):
            raise PhysicsError("role labels must match matrix dimension")
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise PhysicsError("matrix is not Hermitian within tolerance")
        if f"fmo_site_{self.drain_site}" not in self.roles:
            raise PhysicsError(f"drain site {self.drain_site} not present")
        if f"fmo_site_{self.source_site}" not in self.roles:
            raise PhysicsError(f"source site {self.source_site} not present")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def fmo_indices(self) -> np.ndarray:
        return np.array([i for i, r in enumerate(self.roles) if r.startswith("fmo_site_")])

    @property
    def sink_indices(self) -> np.ndarray:
        return np.array(
            [i for i, r in enumerate(self.roles) if r.startswith("sink_")], dtype=int
        )

    @property
    def vibration_index(self):
        for i, r in enumerate(self.roles):
            if r == "vibration":
                return i
        return None

    def site_index(self, site: int) -> int:
        """Array index of FMO site ``site`` (1-based)."""
        return self.roles.index(f"fmo_site_{site}")

    @property
    def source_index(self) -> int:
        return self.site_index(self.source_site)

    @property
    def drain_index(self) -> int:
        return self.site_index(self.drain_site)


def build_fmo_hamiltonian(spec: FmoSpec = FmoSpec()) -> Hamiltonian:
    """Construct the seven-site chip Hamiltonian from a spec.

    Off-diagonals: raw coupling * coupling_scale * unit_conversion, with
    raw couplings below the weak-coupling cutoff zeroed unless
    ``include_weak_couplings``.  Diagonal: (raw energy - min raw energy)
    * site_energy_scale * unit_conversion, so the lowest site sits at 0.
    """
    raw = spec.raw_hamiltonian
    n = raw.shape[0]
    off = raw.copy()
    np.fill_diagonal(off, 0.0)
    if not spec.include_weak_couplings:
        off[np.abs(off) < WEAK_COUPLING_CUTOFF_CM] = 0.0
    diag = (np.diag(raw) - np.diag(raw).min()) * spec.site_energy_scale
    matrix = (off * spec.coupling_scale + np.diag(diag)) * spec.unit_conversion
    roles = tuple(f"fmo_site_{i + 1}" for i in range(n))
    return Hamiltonian(matrix=matrix.astype(complex), roles=roles)


def attach_sink(
    h: Hamiltonian,
    sink_length: int,
    drain_coupling: float = DEFAULT_SINK_COUPLING,
    internal_coupling: float = DEFAULT_SINK_COUPLING,
) -> Hamiltonian:
    """Append a nearest-neighbour chain of absorbing waveguides.

    The chain hangs off the drain site; every sink waveguide gets the
    drain site's diagonal energy, so the chain is resonant with it.  The
    default coupling of 0.2 mm^-1 makes the chain a slow, effectively
    irreversible drain on the 20 mm chip, which is what lets moderate
    dephasing visibly assist transport; fabricated-chip values are not
    published, so this default is a documented modelling choice.
    """
    if len(h.sink_indices):
        raise PhysicsError("sink already attached")
    if sink_length < 1:
        raise PhysicsError("sink_length must be >= 1")
    if drain_coupling <= 0 or internal_coupling <= 0:
        raise PhysicsError("sink couplings must be positive")
    n = h.dim
    m = np.zeros((n + sink_length, n + sink_length), dtype=complex)
    m[:n, :n] = h.matrix
    drain = h.drain_index
    m[np.arange(n, n + sink_length), np.arange(n, n + sink_length)] = h.matrix[
        drain, drain
    ]
    m[drain, n] = m[n, drain] = drain_coupling
    for k in range(n, n + sink_length - 1):
        m[k, k + 1] = m[k + 1, k] = internal_coupling
    roles = h.roles + tuple(f"sink_{k + 1}" for k in range(sink_length))
    return Hamiltonian(m, roles, h.source_site, h.drain_site)


def attach_vibrational_mode(h7: Hamiltonian, coupling="auto") -> Hamiltonian:
    """Add an auxiliary mode coupled equally to all seven sites.

    With ``coupling="auto"`` the strength is the gap between the two
    lowest eigenvalues of the seven-site Hamiltonian.  The mode's own
    diagonal entry is 0.
    """
    if h7.dim != 7 or len(h7.fmo_indices) != 7:
        raise PhysicsError(f"expected a bare 7-site Hamiltonian, got dim {h7.dim}")
    c = lowest_eigengap(h7) if coupling == "auto" else float(coupling)
    m = np.zeros((8, 8), dtype=complex)
    m[:7, :7] = h7.matrix
    m[7, :7] = c
    m[:7, 7] = c
    roles = h7.roles + ("vibration",)
    return Hamiltonian(m, roles, h7.source_site, h7.drain_site)


def lowest_eigengap(h: Hamiltonian) -> float:
    """Difference between the two smallest eigenvalues, mm^-1."""
    ev = np.linalg.eigvalsh(h.matrix)
    return float(ev[1] - ev[0])


def coupling_for_spacing(d: float, cal: CouplingCalibration = CouplingCalibration()) -> float:
    """Evanescent coupling (cm^-1) at centre-to-centre spacing d (um)."""
    if d < 0:
        raise PhysicsError("spacing must be nonnegative")
    return cal.amplitude_a * np.exp(-cal.decay_b * d)


def spacing_for_coupling(c: float, cal: CouplingCalibration = CouplingCalibration()) -> float:
    """Spacing (um) realising coupling c (cm^-1); exact inverse of the fit."""
    if c <= 0 or c > cal.amplitude_a:
        raise PhysicsError(
            f"coupling must be in (0, {cal.amplitude_a}] cm^-1 for inversion, got {c}"
        )
    return float(np.log(cal.amplitude_a / c) / cal.decay_b)


def delta_beta_for_speed(dv: float, cal: CouplingCalibration = CouplingCalibration()) -> float:
    """Propagation-constant detuning (mm^-1) for a writing-speed offset (mm/s)."""
    if dv < 0:
        raise PhysicsError("speed detuning must be nonnegative")
    return cal.delta_beta_slope * dv


def speed_for_delta_beta(db: float, cal: CouplingCalibration = CouplingCalibration()) -> float:
    """Writing-speed offset (mm/s) producing detuning db (mm^-1).

    Higher writing speed lowers the propagation constant; the exported
    schedule reports the magnitude of the speed offset.
    """
    if db < 0:
        raise PhysicsError("detuning must be nonnegative")
    return db / cal.delta_beta_slope


def effective_coupling(c0: float, db: float) -> float:
    """Coupling of a detuned waveguide pair: sqrt((db/2)^2 + c0^2)."""
    if c0 <= 0:
        raise PhysicsError("base coupling must be positive")
    return float(np.hypot(db / 2.0, c0))


def delta_c(c0: float, db: float) -> float:
    """Exact coupling shift due to a detuning db; ~ db^2/(8 c0) for small db."""
    if c0 <= 0:
        raise PhysicsError("base coupling must be positive")
    return effective_coupling(c0, db) - c0


def apply_static_disorder(h: Hamiltonian, gamma: float, rng_seed,
                          sites: str = "fmo") -> Hamiltonian:
    """Add one-sided uniform site-energy shifts U(0, gamma).

    ``sites="fmo"`` perturbs the seven network diagonals only;
    ``sites="all"`` perturbs every waveguide (including sink and
    vibration), which is the convention the disorder sweeps use: a
    disordered chip mis-writes every waveguide, not just the network.
    """
    if gamma < 0:
        raise PhysicsError("disorder strength must be nonnegative")
    if sites not in ("fmo", "all"):
        raise PhysicsError("sites must be 'fmo' or 'all'")
    if gamma == 0:
        return h
    rng = np.random.default_rng(rng_seed)
    m = h.matrix.copy()
    idx = h.fmo_indices if sites == "fmo" else np.arange(h.dim)
    m[idx, idx] = m[idx, idx] + rng.uniform(0.0, gamma, size=len(idx))
    return Hamiltonian(m, h.roles, h.source_site, h.drain_site)


@dataclass(frozen=True)
class ChipPlanRow:
    """One record of a fabrication plan (spacing or speed schedule)."""

    record_type: str  # "spacing" | "speed"
    site_a: int
    site_b: int  # -1 for speed rows
    segment_index: int  # -1 for spacing rows
    value: float
    unit: str


def export_chip_plan(h: Hamiltonian, noise=None, cal: CouplingCalibration = CouplingCalibration()):
    """Translate a Hamiltonian plus a noise realization into a chip plan.

    Spacing rows: one per coupled pair, spacing in um from the inverse of
    the exponential coupling fit.  Speed rows: one per FMO site per noise
    segment, writing-speed detuning in mm/s.  Rows are ordered by record
    type, then indices, so the output is deterministic.
    """
    m = h.matrix
    n = h.dim
    rows = []
    for i in range(n):
        for j in range(i + 1, n):
            c_mm = abs(m[i, j].real)
            if c_mm == 0:
                continue
            c_cm = c_mm / CM_PER_MM
            if c_cm > cal.amplitude_a:
                raise PhysicsError(
                    f"coupling for pair ({i + 1}, {j + 1}) exceeds the fit amplitude "
                    f"({c_cm:.4g} > {cal.amplitude_a} cm^-1)"
                )
            rows.append(
                ChipPlanRow("spacing", i + 1, j + 1, -1, spacing_for_coupling(c_cm, cal), "um")
            )
    if noise is not None:
        for site, seq in enumerate(noise.sequences, start=1):
            for seg, db in enumerate(seq):
                rows.append(
                    ChipPlanRow("speed", site, -1, seg, speed_for_delta_beta(float(db), cal), "mm/s")
                )
    rows.sort(key=lambda r: (r.record_type, r.site_a, r.site_b, r.segment_index))
    return rows


_PLAN_HEADER = ["record_type", "site_a", "site_b", "segment_index", "value", "unit"]


def write_chip_plan(rows, path_or_file) -> None:
    """Write plan rows as UTF-8 CSV with a header row."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
    try:
        w = csv.writer(f)
        w.writerow(_PLAN_HEADER)
        for r in rows:
            w.writerow(
                [
                    r.record_type,
                    r.site_a,
                    "" if r.site_b < 0 else r.site_b,
                    "" if r.segment_index < 0 else r.segment_index,
                    f"{r.value:.17g}",
                    r.unit,
                ]
            )
    finally:
        if own:
            f.close()


def read_chip_plan(path_or_file):
    """Read plan rows from CSV written by :func:`write_chip_plan`."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, newline="", encoding="utf-8") if own else path_or_file
    try:
        reader = csv.reader(f)
        header = next(reader)
        if header != _PLAN_HEADER:
            raise PhysicsError(f"unexpected chip-plan header: {header}")
        rows = []
        for rec in reader:
            rows.append(
                ChipPlanRow(
                    rec[0],
                    int(rec[1]),
                    int(rec[2]) if rec[2] else -1,
                    int(rec[3]) if rec[3] else -1,
                    float(rec[4]),
                    rec[5],
                )
            )
        return rows
    finally:
        if own:
            f.close()
