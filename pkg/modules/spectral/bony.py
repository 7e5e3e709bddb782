"""Paraproduct, remainder and commutator operators with the K1..K5 splitting of the commutator"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple
import numpy as np
from modules.debug.errors import PreconditionError
from modules.spectral.dyadic import besov_norm, block, build_partition, lr_norm, low_frequency_cut
from modules.spectral.grid import PeriodicGrid, ScalarField
from modules.spectral.sampling import random_smooth_field

logger = logging.getLogger(__name__)

LOCALITY_WIDTH = 4


def product(f: ScalarField, g: ScalarField) -> ScalarField:
    """Dealiased pointwise product"""
    if f.grid != g.grid:
        raise PreconditionError("the factors live on different grids")
    return ScalarField(f.grid, f.grid.dealiased_product(f.values, g.values))


def _blocks(f: ScalarField) -> dict:
    partition = build_partition(f.grid)
    return {q: block(f, q) for q in partition.homogeneous_range}


def paraproduct(f: ScalarField, g: ScalarField) -> ScalarField:
    """T_f g = sum_q S_{q-1} f * Delta-dot_q g, with S_{q-1} f = mean f + sum_{q' <= q-2} Delta-dot_q' f

    Args:
        f (ScalarField): low-frequency factor
        g (ScalarField): high-frequency factor

    Returns:
        ScalarField: the paraproduct of g by f
    """
    total = ScalarField.zeros(f.grid)
    for q, g_block in _blocks(g).items():
        total = total + product(low_frequency_cut(f, q - 1), g_block)
    return total


def remainder(f: ScalarField, g: ScalarField) -> ScalarField:
    """R(f, g) = sum_{|q - q'| <= 1} Delta-dot_q f * Delta-dot_q' g + mean f * mean g

    Args:
        f (ScalarField): first factor
        g (ScalarField): second factor

    Returns:
        ScalarField: the remainder
    """
    f_blocks, g_blocks = _blocks(f), _blocks(g)
    total = ScalarField.constant(f.grid, f.mean * g.mean)
    for q, f_block in f_blocks.items():
        neighbours = [g_blocks[k] for k in (q - 1, q, q + 1) if k in g_blocks]
        total = total + product(f_block, sum(neighbours[1:], neighbours[0]))
    return total


@dataclass
class BonySplit:
    """Bony decomposition fg = T_f g + T_g f + R(f, g)

    Args:
        Tfg (:class:`ScalarField`): paraproduct of g by f
        Tgf (:class:`ScalarField`): paraproduct of f by g
        Rfg (:class:`ScalarField`): remainder
        residual (:class:`float`): relative L^2 norm of fg - Tfg - Tgf - Rfg
    """
    Tfg: ScalarField  # pylint: disable=invalid-name
    Tgf: ScalarField  # pylint: disable=invalid-name
    Rfg: ScalarField  # pylint: disable=invalid-name
    residual: float


def _relative(difference: ScalarField, reference: ScalarField) -> float:
    scale = reference.norm(2)
    return difference.norm(2) / scale if scale > 0 else difference.norm(2)


def bony_split(f: ScalarField, g: ScalarField) -> BonySplit:
    """Computes the three pieces of the product and the identity residual"""
    t_fg, t_gf, r_fg = paraproduct(f, g), paraproduct(g, f), remainder(f, g)
    full = product(f, g)
    return BonySplit(t_fg, t_gf, r_fg, _relative(full - t_fg - t_gf - r_fg, full))


def _dq(f: ScalarField, q: int, homogeneous: bool) -> ScalarField:
    return block(f, q, homogeneous)


def commutator(f: ScalarField, g: ScalarField, q: int, homogeneous: bool = True) -> ScalarField:
    """[f, Delta_q] g = f * Delta_q g - Delta_q (f g), dealiased

    Args:
        f (ScalarField): multiplying field
        g (ScalarField): filtered field
        q (int): block index
        homogeneous (bool, optional): homogeneous or inhomogeneous blocks. Defaults to True.

    Returns:
        ScalarField: the commutator
    """
    return product(f, _dq(g, q, homogeneous)) - _dq(product(f, g), q, homogeneous)


@dataclass
class TermDecomposition:
    """The five pieces K1..K5 of a commutator

    Args:
        terms (:class:`list`): K1, K2, K3, K4, K5
        residual (:class:`float`): relative L^2 distance between their sum and the commutator
        locality_residual (:class:`float`): relative L^2 distance between K1 and its |q-k| <= 4 part
    """
    terms: List[ScalarField]
    residual: float
    locality_residual: float

    def norms(self, p: float = 2) -> List[float]:
        """L^p norms of K1..K5"""
        return [term.norm(p) for term in self.terms]


def term_decomposition(f: ScalarField, g: ScalarField, q: int, homogeneous: bool = True,
                       cache: Optional[dict] = None) -> TermDecomposition:
    """Splits the commutator as K1 = [T_f, Delta_q] g, K2 = R(f, Delta_q g), K3 = -Delta_q R(f, g),
    K4 = T_{Delta_q g} f, K5 = -Delta_q T_g f

    Args:
        f (ScalarField): multiplying field
        g (ScalarField): filtered field
        q (int): block index
        homogeneous (bool, optional): homogeneous or inhomogeneous blocks. Defaults to True.
        cache (dict, optional): holds T_f g, T_g f and R(f, g) across calls with the same pair

    Returns:
        TermDecomposition: the five terms and the residual of their sum
    """
    cache = {} if cache is None else cache
    if "Tfg" not in cache:
        cache.update(Tfg=paraproduct(f, g), Tgf=paraproduct(g, f), Rfg=remainder(f, g))
    g_q = _dq(g, q, homogeneous)
    k1 = paraproduct(f, g_q) - _dq(cache["Tfg"], q, homogeneous)
    terms = [
        k1,
        remainder(f, g_q),
        -_dq(cache["Rfg"], q, homogeneous),
        paraproduct(g_q, f),
        -_dq(cache["Tgf"], q, homogeneous),
    ]
    total = sum(terms[1:], terms[0])
    target = commutator(f, g, q, homogeneous)
    local = _local_k1(f, g, q, homogeneous)
    return TermDecomposition(terms, _relative(total - target, target), _relative(k1 - local, k1))


def _local_k1(f: ScalarField, g: ScalarField, q: int, homogeneous: bool) -> ScalarField:
    partition = build_partition(f.grid)
    total = ScalarField.zeros(f.grid)
    for k in partition.homogeneous_range:
        if abs(k - q) > LOCALITY_WIDTH:
            continue
        low, g_k = low_frequency_cut(f, k - 1), block(g, k)
        total = total + product(low, _dq(g_k, q, homogeneous)) - _dq(product(low, g_k), q, homogeneous)
    return total


@dataclass
class CommutatorReport:
    """Commutator estimate at one block for one pair

    Args:
        pair (:class:`int`): index of the pair in the family
        q (:class:`int`): block index
        comm_norm (:class:`float`): L^2 norm of the commutator
        bound_rhs (:class:`float`): 2^{-q(s+1)} (||grad f||_inf ||g||_{B^s_{2,r}} + ||g||_inf ||f||_{B^{s+1}_{2,r}})
        ratio (:class:`float`): comm_norm / bound_rhs
        term_norms (:class:`list`): L^2 norms of K1..K5
        residual (:class:`float`): residual of the K1..K5 identity
    """
    pair: int
    q: int
    comm_norm: float
    bound_rhs: float
    ratio: float
    term_norms: List[float] = field(default_factory=list)
    residual: float = 0.0

    def to_dict(self) -> dict:
        """Plain dictionary of the report"""
        return {
            "pair": self.pair,
            "q": self.q,
            "comm_norm": self.comm_norm,
            "bound_rhs": self.bound_rhs,
            "ratio": self.ratio,
            "term_norms": self.term_norms,
            "residual": self.residual,
        }


@dataclass
class CommutatorSuite:
    """Outcome of a commutator estimate suite

    Args:
        s (:class:`float`): smoothness
        r (:class:`float`): summation exponent
        homogeneous (:class:`bool`): which blocks were used
        reports (:class:`list`): one :class:`CommutatorReport` per pair and block
        lr_norms (:class:`list`): l^r norm over q of the ratios, per pair
    """
    s: float
    r: float
    homogeneous: bool
    reports: List[CommutatorReport]
    lr_norms: List[float]

    @property
    def sup_lr_norm(self) -> float:
        """:class:`float`: largest l^r norm of the normalised sequence over the family"""
        return max(self.lr_norms) if self.lr_norms else 0.0

    @property
    def sup_ratio(self) -> float:
        """:class:`float`: largest ratio over pairs and blocks"""
        return max((report.ratio for report in self.reports), default=0.0)

    @property
    def max_residual(self) -> float:
        """:class:`float`: largest K1..K5 identity residual"""
        return max((report.residual for report in self.reports), default=0.0)


def random_pairs(grid: PeriodicGrid, family_size: int, seed: int) -> List[Tuple[ScalarField, ScalarField]]:
    """Family of smooth (f, g) pairs drawn from one seeded generator"""
    rng = np.random.default_rng(seed)
    return [(random_smooth_field(grid, rng, mean=rng.uniform(-1, 1)), random_smooth_field(grid, rng, mean=rng.uniform(-1, 1)))
            for _ in range(family_size)]


def _pair_reports(index: int, f: ScalarField, g: ScalarField, s: float, r: float,
                  homogeneous: bool) -> Tuple[List[CommutatorReport], float]:
    grad_f = f.gradient().norm(np.inf)
    norm_g = besov_norm(g, s, 2, r, homogeneous).value
    norm_f = besov_norm(f, s + 1, 2, r, homogeneous).value
    constant = grad_f * norm_g + g.norm(np.inf) * norm_f
    partition = build_partition(f.grid)
    indices = partition.homogeneous_range if homogeneous else partition.inhomogeneous_range
    cache = {}
    reports = []
    for q in indices:
        comm = commutator(f, g, q, homogeneous).norm(2)
        decomposition = term_decomposition(f, g, q, homogeneous, cache)
        rhs = 2.0**(-q * (s + 1)) * constant
        ratio = comm / rhs if rhs > 0 else 0.0
        reports.append(CommutatorReport(index, q, comm, rhs, ratio, decomposition.norms(2), decomposition.residual))
    logger.debug("pair %d: %d blocks, max ratio %.4g", index, len(reports), max(rep.ratio for rep in reports))
    return reports, lr_norm([rep.ratio for rep in reports], r)


def commutator_estimate_suite(grid: PeriodicGrid, s: float, p: float = 2, r: float = 1, family_size: int = 30,
                              seed: int = 0, homogeneous: bool = True, workers: int = 1,
                              pairs: Optional[Sequence[Tuple[ScalarField, ScalarField]]] = None) -> CommutatorSuite:
    """Evaluates ||[f, Delta_q] g||_{L^2} against 2^{-q(s+1)} (||grad f||_inf ||g||_{B^s_{2,r}} + ||g||_inf ||f||_{B^{s+1}_{2,r}})
    over a family of smooth pairs and every block of the grid

    Args:
        grid (PeriodicGrid): grid of the family
        s (float): smoothness, s > -1
        p (float, optional): only 2 is supported. Defaults to 2.
        r (float, optional): summation exponent. Defaults to 1.
        family_size (int, optional): number of pairs. Defaults to 30.
        seed (int, optional): seed of the family. Defaults to 0.
        homogeneous (bool, optional): homogeneous blocks, or inhomogeneous ones with q = -1. Defaults to True.
        workers (int, optional): threads evaluating the pairs. Defaults to 1.
        pairs (Sequence[Tuple[ScalarField, ScalarField]], optional): explicit family, overrides the random one

    Returns:
        CommutatorSuite: reports in (pair, q) order and the l^r norms of the normalised sequences
    """
    if s <= -1:
        raise PreconditionError(f"the commutator estimate needs s > -1, got {s}")
    if p != 2:
        raise PreconditionError(f"only p = 2 is supported, got {p}")
    pairs = random_pairs(grid, family_size, seed) if pairs is None else list(pairs)
    with ThreadPoolExecutor(max_workers=max(workers, 1)) as executor:
        outcomes = list(
            executor.map(lambda item: _pair_reports(item[0], item[1][0], item[1][1], s, r, homogeneous), enumerate(pairs)))
    reports = [report for pair_reports, _ in outcomes for report in pair_reports]
    lr_norms = [norm for _, norm in outcomes]
    logger.info("commutator suite s=%s r=%s: %d pairs, sup l^r norm %.4g", s, r, len(pairs), max(lr_norms, default=0.0))
    return CommutatorSuite(s, r, homogeneous, reports, lr_norms)
