"""Random elastic modulus, Monte Carlo ensemble driver, and statistics.

The elastic modulus follows the gamma law of maximum differential entropy
among positive random variables with prescribed mean mu, prescribed
coefficient of variation delta, and finite log-moment: shape 1/delta^2 and
scale delta^2*mu.  Each realization draws its modulus from a private
MT19937 generator whose seed mixes the master seed with the realization
index, so any subset of the ensemble can be recomputed in isolation and a
thread pool produces bit-identical results for every worker count.

Statistics mirror the three ensemble views of interest: the pointwise
mean-and-quantile envelope of the end displacement, the mean phase-space
orbit at the bar end, and a kernel density estimate of the standardized end
displacement at the final time together with a counter of its modes.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core_model import NumericsConfig, PhysicalConfig, StochasticConfig
from .modal_basis import ModalBasis, solve_basis
from .rom_assembly import assemble_system
from .time_integration import NewtonFailureError, integrate

_MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
# Ensembles with more than this fraction of failed realizations abort
# instead of silently reporting biased statistics.
_MAX_FAILURE_FRACTION = 0.01


@dataclass(frozen=True)
class GammaSpec:
    """Gamma law of the elastic modulus in mean/dispersion form."""

    mu: float     # mean (Pa)
    delta: float  # coefficient of variation

    def __post_init__(self) -> None:
        if self.mu <= 0.0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if not (0.0 < self.delta < 1.0):
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")

    @property
    def shape(self) -> float:
        return 1.0 / (self.delta * self.delta)

    @property
    def scale(self) -> float:
        return self.delta * self.delta * self.mu


@dataclass(frozen=True)
class EnsembleResult:
    """Per-realization outputs of a Monte Carlo run."""

    moduli: np.ndarray        # sampled elastic moduli (Pa)
    u_end: np.ndarray         # n_samples x (K+1) end displacements (m)
    v_end: np.ndarray         # n_samples x (K+1) end velocities (m/s)
    end_values: np.ndarray    # u_end at the final time, per realization (m)
    master_seed: int
    times: np.ndarray         # shared time grid (s)
    failed: tuple[int, ...] = ()
    max_newton_iters: int = 0

    @property
    def n_samples(self) -> int:
        return self.moduli.size

    def completed_rows(self) -> np.ndarray:
        """Boolean mask of realizations that integrated to the final time."""
        mask = np.ones(self.n_samples, dtype=bool)
        mask[list(self.failed)] = False
        return mask


@dataclass(frozen=True)
class StatsSummary:
    """Ensemble statistics; fields are filled by the producing routine."""

    mean_u: np.ndarray | None = None
    q_low: np.ndarray | None = None
    q_high: np.ndarray | None = None
    mean_v: np.ndarray | None = None
    pdf_grid: np.ndarray | None = None
    pdf_density: np.ndarray | None = None


class EnsembleFailureError(RuntimeError):
    """Raised when too many realizations fail to integrate."""

    def __init__(self, result: EnsembleResult):
        self.result = result
        n_failed = len(result.failed)
        super().__init__(
            f"{n_failed} of {result.n_samples} realizations failed to integrate"
        )


def _splitmix64(index: int, seed: int) -> int:
    """Output ``index`` of the SplitMix64 sequence started at ``seed``."""
    z = (seed + (index + 1) * _SPLITMIX_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def realization_stream(master_seed: int, index: int) -> np.random.Generator:
    """Private MT19937 generator of realization ``index``."""
    if index < 0:
        raise ValueError(f"realization index must be >= 0, got {index}")
    mixed = _splitmix64(index, master_seed & _MASK64)
    return np.random.Generator(np.random.MT19937(mixed))


def gamma_pdf(xi, spec: GammaSpec):
    """Probability density of the modulus law, zero for nonpositive arguments.

    Evaluated in log space to stay finite for the large shape parameters
    that small dispersions produce.  Accepts scalars or arrays.
    """
    xi_arr = np.asarray(xi, dtype=float)
    shape, scale = spec.shape, spec.scale
    log_norm = shape * math.log(scale) + math.lgamma(shape)
    positive = xi_arr > 0.0
    safe = np.where(positive, xi_arr, 1.0)
    log_pdf = (shape - 1.0) * np.log(safe) - safe / scale - log_norm
    out = np.where(positive, np.exp(log_pdf), 0.0)
    return float(out) if out.ndim == 0 else out


def sample_modulus(stream: np.random.Generator, spec: GammaSpec) -> float:
    """One gamma variate via the Marsaglia-Tsang squeeze method.

    Requires shape >= 1, which holds for every dispersion below one.
    """
    shape = spec.shape
    if shape < 1.0:
        raise ValueError(f"sampler requires shape >= 1, got {shape}")
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = stream.standard_normal()
        t = 1.0 + c * x
        if t <= 0.0:
            continue
        v = t * t * t
        u = stream.random()
        x2 = x * x
        if u < 1.0 - 0.0331 * x2 * x2:
            return d * v * spec.scale
        if math.log(u) < 0.5 * x2 + d * (1.0 - v + math.log(v)):
            return d * v * spec.scale


def _time_grid(dt: float, t_final: float) -> np.ndarray:
    n_steps = int(np.ceil(t_final / dt - 1e-12))
    times = np.arange(n_steps + 1, dtype=float) * dt
    times[-1] = t_final
    return times


def run_realization(
    index: int,
    phys: PhysicalConfig,
    stoch: StochasticConfig,
    num: NumericsConfig,
    nominal: ModalBasis,
) -> tuple[float, np.ndarray, np.ndarray, bool, int]:
    """Compute realization ``index`` from its private stream alone.

    Composes the same deterministic pipeline as a single direct run:
    sample the modulus, solve the basis, assemble, integrate.  Returns
    (modulus, u_end row, v_end row, completed, newton_iters); a row that
    fails to integrate is reported as NaN with ``completed`` False.
    """
    stream = realization_stream(stoch.master_seed, index)
    spec = GammaSpec(mu=stoch.e_mean, delta=stoch.e_dispersion)
    modulus = sample_modulus(stream, spec)
    basis = solve_basis(phys, modulus, num.n_modes)
    system = assemble_system(basis, phys, modulus, nominal)
    try:
        traj = integrate(system, num, phys.t_final)
    except NewtonFailureError:
        nan_row = np.full(_time_grid(num.dt, phys.t_final).shape, np.nan)
        return modulus, nan_row, nan_row.copy(), False, num.newton_max_iter
    return modulus, traj.u_end, traj.v_end, True, traj.max_newton_iters


def run_ensemble(
    phys: PhysicalConfig,
    stoch: StochasticConfig,
    num: NumericsConfig,
    workers: int = 1,
) -> EnsembleResult:
    """Monte Carlo ensemble over the random modulus.

    The result is a pure function of the configuration and master seed:
    realizations are addressed by index, so execution order and the number
    of workers cannot change any output bit.  Raises
    :class:`EnsembleFailureError` when more than 1% of realizations fail.
    """
    n_samples = stoch.n_samples
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    nominal = solve_basis(phys, stoch.e_mean, num.n_modes)
    times = _time_grid(num.dt, phys.t_final)

    moduli = np.empty(n_samples)
    u_end = np.empty((n_samples, times.size))
    v_end = np.empty((n_samples, times.size))
    failed: list[int] = []
    max_iters = 0

    def compute(index: int):
        return run_realization(index, phys, stoch, num, nominal)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(compute, range(n_samples)))
    else:
        rows = [compute(i) for i in range(n_samples)]

    for i, (modulus, u_row, v_row, completed, iters) in enumerate(rows):
        moduli[i] = modulus
        u_end[i] = u_row
        v_end[i] = v_row
        if not completed:
            failed.append(i)
        if iters > max_iters:
            max_iters = iters

    result = EnsembleResult(
        moduli=moduli,
        u_end=u_end,
        v_end=v_end,
        end_values=u_end[:, -1].copy(),
        master_seed=stoch.master_seed,
        times=times,
        failed=tuple(failed),
        max_newton_iters=max_iters,
    )
    if len(failed) > _MAX_FAILURE_FRACTION * n_samples:
        raise EnsembleFailureError(result)
    return result


def mean_envelope(ens: EnsembleResult, coverage: float) -> StatsSummary:
    """Pointwise mean and central quantile band of the end displacement.

    The band holds the empirical quantiles at (1-coverage)/2 and
    1-(1-coverage)/2, computed with linear order-statistic interpolation.
    """
    if not (0.0 < coverage < 1.0):
        raise ValueError(f"coverage must lie in (0, 1), got {coverage}")
    rows = ens.u_end[ens.completed_rows()]
    if rows.shape[0] == 0:
        raise ValueError("ensemble has no completed realizations")
    tail = 0.5 * (1.0 - coverage)
    quantiles = np.quantile(rows, [tail, 1.0 - tail], axis=0)
    return StatsSummary(
        mean_u=rows.mean(axis=0),
        q_low=quantiles[0],
        q_high=quantiles[1],
    )


def phase_mean(ens: EnsembleResult) -> tuple[np.ndarray, np.ndarray]:
    """Mean end-point orbit t -> (mean u_L(t), mean v_L(t))."""
    mask = ens.completed_rows()
    if not mask.any():
        raise ValueError("ensemble has no completed realizations")
    return ens.u_end[mask].mean(axis=0), ens.v_end[mask].mean(axis=0)


def pdf_estimate(
    samples, grid_points: int = 512
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian kernel density of the standardized samples.

    Samples are shifted to zero mean and scaled to unit sample variance;
    the bandwidth is Silverman's 1.06*n^(-1/5) for unit-variance data, and
    the uniform grid spans [min - 3h, max + 3h].  The returned density is
    trapezoid-normalized so it integrates to one on its grid.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size < 8:
        raise ValueError("pdf_estimate needs a flat sample of size >= 8")
    if grid_points < 2:
        raise ValueError(f"grid_points must be >= 2, got {grid_points}")
    std = x.std(ddof=1)
    if not (std > 0.0):
        raise ValueError("samples have zero variance; density is degenerate")
    z = (x - x.mean()) / std
    h = 1.06 * x.size ** (-0.2)
    grid = np.linspace(z.min() - 3.0 * h, z.max() + 3.0 * h, grid_points)
    kernel_args = (grid[:, None] - z[None, :]) / h
    density = np.exp(-0.5 * kernel_args**2).sum(axis=1) / (
        x.size * h * math.sqrt(2.0 * math.pi)
    )
    density /= np.trapezoid(density, grid)
    return grid, density


def count_density_modes(density, prominence: float = 0.1) -> int:
    """Count well-separated local maxima of a nonnegative density curve.

    A strict interior maximum counts only when it reaches ``prominence``
    times the global maximum; consecutive maxima merge into one mode unless
    the valley between them drops below (1 - prominence) times the lower of
    the two peaks.  Curves without strict interior maxima (monotone or
    flat) count as a single mode.
    """
    d = np.asarray(density, dtype=float)
    if np.any(d < 0.0):
        raise ValueError("density curve must be nonnegative")
    if d.size < 3:
        return 1
    interior = (d[1:-1] > d[:-2]) & (d[1:-1] > d[2:])
    peaks = np.flatnonzero(interior) + 1
    peaks = peaks[d[peaks] >= prominence * d.max()]
    if peaks.size == 0:
        return 1
    modes = 1
    previous = peaks[0]
    for peak in peaks[1:]:
        valley = d[previous : peak + 1].min()
        if valley < (1.0 - prominence) * min(d[previous], d[peak]):
            modes += 1
        previous = peak
    return modes
