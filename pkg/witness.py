"""Constructive product-estimate witnesses.

Given a double family of target seminorms ``p_{i,j}`` on F, a witness is a
pair of single-indexed families ``p_i`` on E1 and ``q_j`` on E2 with
``p_{i,j}(beta(x,y)) <= p_i(x) q_j(y)``. The builders here work on finite
truncations of the index sets and produce their constants with triangular
maxima, so extending an ``n x n`` input to ``(n+1) x (n+1)`` never changes the
first ``n`` constants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import InputError, MismatchedSpace, MissingCert, NonPositiveEntry, ShapeMismatch
from log_utils import LogCategory, log_debug, log_info
from seminorms import (Base, BlockSum, DominationCert, WeightedSup, describe, dominates, dump,
                       scaled)


@dataclass(frozen=True)
class ScheduleResult:
    a: Tuple[float, ...]
    b: Tuple[float, ...]


@dataclass(frozen=True)
class SplitResult:
    c: Tuple[float, ...]
    d: Tuple[float, ...]


@dataclass(frozen=True)
class ExponentSchedule:
    r: Tuple[int, ...]
    s: Tuple[int, ...]


@dataclass(frozen=True)
class ProductEstimateWitness:
    """Families ``(p_i)`` and ``(q_j)`` claimed to bound the targets ``p_{i,j}``."""
    p_family: Tuple[Any, ...]
    q_family: Tuple[Any, ...]
    provenance: Tuple[str, ...]
    targets: Optional[Tuple[Tuple[Any, ...], ...]] = None
    constants: Dict[str, Any] = field(default_factory=dict, compare=False)

    def p(self, i: int):
        """``p_i`` with 1-based ``i``."""
        return self.p_family[i - 1]

    def q(self, j: int):
        return self.q_family[j - 1]

    def to_json(self) -> Dict[str, Any]:
        return {
            "p_family": [dump(p) for p in self.p_family],
            "q_family": [dump(q) for q in self.q_family],
            "targets": None if self.targets is None else [[dump(t) for t in row] for row in self.targets],
            "provenance": list(self.provenance),
            "constants": self.constants,
        }

    def render_text(self) -> str:
        lines = [f"p_{i} = {describe(p)}" for i, p in enumerate(self.p_family, start=1)]
        lines += [f"q_{j} = {describe(q)}" for j, q in enumerate(self.q_family, start=1)]
        lines.append("provenance:")
        lines += [f"  {step}" for step in self.provenance]
        return "\n".join(lines)


def _matrix(values: Any, name: str, positive: bool = True) -> np.ndarray:
    try:
        matrix = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ShapeMismatch(f"{name} is not a numeric matrix") from exc
    if matrix.ndim != 2 or matrix.size == 0:
        raise ShapeMismatch(f"{name} must be a non-empty 2-d matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise NonPositiveEntry(f"{name} has non-finite entries")
    if positive and not np.all(matrix > 0):
        raise NonPositiveEntry(f"{name} must have strictly positive entries")
    return matrix


def _lower(shape: Tuple[int, int]) -> np.ndarray:
    """Mask of entries with column <= row."""
    return np.tri(shape[0], shape[1], dtype=bool)


def schedule_constants(r: Any, s: Any) -> ScheduleResult:
    """``a_i = max(1, r_ik s_ik : k <= i)``, ``b_j = max(1, r_kj s_kj : k < j)``."""
    r = _matrix(r, "r")
    s = _matrix(s, "s")
    if r.shape != s.shape:
        raise ShapeMismatch(f"r has shape {r.shape} but s has shape {s.shape}")

    products = r * s
    lower = _lower(products.shape)
    a = np.maximum(1.0, np.where(lower, products, 0.0).max(axis=1))
    b = np.maximum(1.0, np.where(~lower, products, 0.0).max(axis=0))
    log_debug(f"Scheduled constants for a {products.shape[0]}x{products.shape[1]} table", LogCategory.WITNESS)
    return ScheduleResult(a=tuple(a.tolist()), b=tuple(b.tolist()))


def bisgaard_split(C: Any) -> SplitResult:
    """Positive ``c_i`` with ``c_i c_j <= 1/C_ij``, via ``d_i = 1/c_i``.

    ``d_i = max(1, C_ik, C_ki : k <= i)``. For ``i >= j`` the factor ``d_i``
    alone covers ``C_ij``; for ``i < j`` the factor ``d_j`` does.
    """
    C = _matrix(C, "C")
    if C.shape[0] != C.shape[1]:
        raise ShapeMismatch(f"C must be square, got shape {C.shape}")

    lower = _lower(C.shape)
    rows = np.where(lower, C, 0.0).max(axis=1)
    cols = np.where(lower, C.T, 0.0).max(axis=1)
    d = np.maximum(1.0, np.maximum(rows, cols))
    return SplitResult(c=tuple((1.0 / d).tolist()), d=tuple(d.tolist()))


def exponent_schedule(t: Any) -> ExponentSchedule:
    """``r_i = max(t_ij : j <= i)``, ``s_j = max(t_ij : i <= j)``, so ``r_i + s_j >= t_ij``."""
    t = _matrix(t, "t", positive=False)
    if np.any(t < 0) or not np.all(np.equal(np.mod(t, 1), 0)):
        raise ShapeMismatch("t must contain nonnegative integers")

    lower = _lower(t.shape)
    upper = ~np.tri(t.shape[0], t.shape[1], k=-1, dtype=bool)
    r = np.where(lower, t, 0.0).max(axis=1)
    s = np.where(upper, t, 0.0).max(axis=0)
    return ExponentSchedule(r=tuple(int(v) for v in r), s=tuple(int(v) for v in s))


def _fold(c: float, expr: Any) -> Any:
    """``c*expr``, absorbed into the weights when ``expr`` is a weighted sup."""
    if isinstance(expr, WeightedSup) and c != 1.0:
        return WeightedSup(weights={m: c * w for m, w in expr.weights})
    return scaled(c, expr)


def _cert_table(certs: Any, name: str) -> List[List[DominationCert]]:
    table = [list(row) for row in certs]
    if not table or not table[0]:
        raise ShapeMismatch(f"{name} must be a non-empty table")
    width = len(table[0])
    for i, row in enumerate(table, start=1):
        if len(row) != width:
            raise ShapeMismatch(f"{name} is ragged at row {i}")
        for j, cert in enumerate(row, start=1):
            if cert is None:
                raise MissingCert(f"{name}[{i}][{j}] has no domination certificate")
    return table


def _common_bound(table: List[List[DominationCert]], name: str) -> Any:
    bounds = {cert.q for row in table for cert in row}
    if len(bounds) != 1:
        raise InputError(f"All certificates in {name} must bound one common seminorm")
    return bounds.pop()


def cnp_product_estimates(P_bound: Any, Q_bound: Any, targets: Any = None) -> ProductEstimateWitness:
    """Witness from domain-side upper bounds ``P_ij <= r_ij p`` and ``Q_ij <= s_ij q``.

    The continuity certificates ``p_ij(beta(x,y)) <= P_ij(x) Q_ij(y)`` are
    input assumptions.
    """
    P_table = _cert_table(P_bound, "P_bound")
    Q_table = _cert_table(Q_bound, "Q_bound")
    if len(P_table) != len(Q_table) or len(P_table[0]) != len(Q_table[0]):
        raise ShapeMismatch("P_bound and Q_bound must have the same shape")
    p = _common_bound(P_table, "P_bound")
    q = _common_bound(Q_table, "Q_bound")

    r = [[cert.C for cert in row] for row in P_table]
    s = [[cert.C for cert in row] for row in Q_table]
    schedule = schedule_constants(r, s)

    witness = ProductEstimateWitness(
        p_family=tuple(_fold(a, p) for a in schedule.a),
        q_family=tuple(_fold(b, q) for b in schedule.b),
        targets=None if targets is None else tuple(tuple(row) for row in targets),
        provenance=(
            "p_ij(beta(x,y)) <= P_ij(x) Q_ij(y)  [continuity of beta, supplied]",
            f"P_ij <= r_ij {describe(p)}, Q_ij <= s_ij {describe(q)}  [domination certificates]",
            "a_i = max(1, r_ik s_ik : k <= i), b_j = max(1, r_kj s_kj : k < j)",
            "i >= j: r_ij s_ij <= a_i <= a_i b_j;  i < j: r_ij s_ij <= b_j <= a_i b_j",
            "p_ij(beta(x,y)) <= r_ij s_ij p(x) q(y) <= p_i(x) q_j(y) with p_i = a_i p, q_j = b_j q",
        ),
        constants={"a": list(schedule.a), "b": list(schedule.b)},
    )
    log_info(f"Built domain-side witness with {len(schedule.a)}x{len(schedule.b)} constants", LogCategory.WITNESS)
    return witness


def target_cnp_product_estimates(P: Any, C: Any, p: Any, q: Any, targets: Any = None) -> ProductEstimateWitness:
    """Witness from a target-side upper bound ``p_ij <= C_ij P`` and ``P(beta(x,y)) <= p(x) q(y)``."""
    split = bisgaard_split(C)
    witness = ProductEstimateWitness(
        p_family=tuple(_fold(d, p) for d in split.d),
        q_family=tuple(_fold(d, q) for d in split.d),
        targets=None if targets is None else tuple(tuple(row) for row in targets),
        provenance=(
            f"p_ij <= C_ij {describe(P)}  [upper bound on the target]",
            f"{describe(P)}(beta(x,y)) <= {describe(p)}(x) {describe(q)}(y)  [continuity of beta, supplied]",
            "d_i = max(1, C_ik, C_ki : k <= i), c_i = 1/d_i, so c_i c_j <= 1/C_ij",
            f"p_ij(beta(x,y)) <= C_ij {describe(P)}(beta(x,y)) <= C_ij p(x) q(y) "
            "<= (1/(c_i c_j)) p(x) q(y) = p_i(x) q_j(y)",
        ),
        constants={"c": list(split.c), "d": list(split.d)},
    )
    log_info(f"Built target-side witness of size {len(split.d)}", LogCategory.WITNESS)
    return witness


def direct_sum_combine(C: Any, P_blocks: Any, Q_blocks: Any, targets: Any = None) -> ProductEstimateWitness:
    """Combine blockwise bounds ``P_st(beta_ij(x,y)) <= C[i][j][s][t] P_is(x) Q_jt(y)``.

    Returns ``P_s = sum_i d_i P_is`` and ``Q_t = sum_j d_j Q_jt`` where ``d``
    splits ``D_ij = max_{s,t} C[i][j][s][t]``.
    """
    try:
        C = np.asarray(C, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ShapeMismatch("C is not a numeric 4-index array") from exc
    if C.ndim != 4 or C.size == 0:
        raise ShapeMismatch(f"C must be a non-empty 4-index array, got shape {C.shape}")
    if not np.all(np.isfinite(C)) or not np.all(C > 0):
        raise NonPositiveEntry("C must have strictly positive entries")

    n_i, n_j, n_s, n_t = C.shape
    P_blocks = [list(row) for row in P_blocks]
    Q_blocks = [list(row) for row in Q_blocks]
    if len(P_blocks) != n_i or any(len(row) != n_s for row in P_blocks):
        raise ShapeMismatch(f"P_blocks must be a {n_i}x{n_s} table")
    if len(Q_blocks) != n_j or any(len(row) != n_t for row in Q_blocks):
        raise ShapeMismatch(f"Q_blocks must be a {n_j}x{n_t} table")

    D = C.max(axis=(2, 3))
    size = max(n_i, n_j)
    padded = np.ones((size, size))
    padded[:n_i, :n_j] = D
    d = np.asarray(bisgaard_split(padded).d)
    u, v = d[:n_i], d[:n_j]

    p_family = tuple(BlockSum(weights=tuple(u.tolist()), blocks=tuple(P_blocks[i][s] for i in range(n_i)))
                     for s in range(n_s))
    q_family = tuple(BlockSum(weights=tuple(v.tolist()), blocks=tuple(Q_blocks[j][t] for j in range(n_j)))
                     for t in range(n_t))

    witness = ProductEstimateWitness(
        p_family=p_family,
        q_family=q_family,
        targets=None if targets is None else tuple(tuple(row) for row in targets),
        provenance=(
            "P_st(beta_ij(x,y)) <= C_ijst P_is(x) Q_jt(y)  [blockwise bounds, supplied]",
            "D_ij = max over s,t of C_ijst",
            "d_i = max(1, D_ik, D_ki : k <= i), so d_i d_j >= D_ij >= C_ijst",
            "P_st(beta(x,y)) <= sum_ij C_ijst P_is(x_i) Q_jt(y_j) "
            "<= (sum_i d_i P_is(x_i)) (sum_j d_j Q_jt(y_j)) = P_s(x) Q_t(y)",
        ),
        constants={"D": D.tolist(), "u": u.tolist(), "v": v.tolist()},
    )
    log_info(f"Combined {n_i}x{n_j} blocks into {n_s}+{n_t} block-sum seminorms", LogCategory.WITNESS)
    return witness


@dataclass(frozen=True)
class LinearMapCert:
    """Continuity certificate of a linear map for one seminorm.

    For domain maps ``lambda: X -> E`` it asserts ``old o lambda <= constant * seminorm``
    with ``seminorm`` on X. For target maps ``Lambda: F -> Y`` it asserts
    ``seminorm o Lambda <= constant * old`` with ``seminorm`` on Y.

    ``source`` names ``old``. Left as ``None`` it is taken from the witness
    being transported; when given it must match that witness seminorm.
    """
    seminorm: Any
    constant: float
    source: Any = None

    def __post_init__(self) -> None:
        if not self.constant > 0:
            raise NonPositiveEntry(f"Linear map constant must be positive, got {self.constant}")


def _entry(table: Any, i: int, j: int) -> Any:
    if table is None or i >= len(table) or j >= len(table[i]):
        return None
    return table[i][j]


def _link(map_name: str, index: Tuple[int, ...], cert: LinearMapCert, old: Any) -> Dict[str, Any]:
    """Audit record of one certificate: which witness seminorm its bound refers to."""
    if cert.source is not None and old is not None and cert.source != old:
        raise MismatchedSpace(f"{map_name}{list(index)} certifies {describe(cert.source)} "
                              f"but the witness has {describe(old)} there")
    source = cert.source if cert.source is not None else old
    return {
        "map": map_name,
        "index": list(index),
        "seminorm": dump(cert.seminorm),
        "source": None if source is None else dump(source),
        "constant": cert.constant,
    }


def _with_links(constants: Dict[str, Any], links: List[Dict[str, Any]]) -> Dict[str, Any]:
    merged = dict(constants)
    if links:
        merged["links"] = list(constants.get("links", [])) + links
    return merged


def _require_family(certs: Optional[Sequence[Optional[LinearMapCert]]], size: int, name: str) -> List[LinearMapCert]:
    certs = list(certs)
    if len(certs) < size:
        raise MissingCert(f"{name} covers {len(certs)} seminorms but the witness has {size}")
    for k, cert in enumerate(certs[:size], start=1):
        if cert is None:
            raise MissingCert(f"{name}[{k}] has no continuity certificate")
    return certs[:size]


def _require_table(certs: Any, rows: int, cols: int, name: str) -> List[List[LinearMapCert]]:
    table = [list(row) for row in certs]
    if len(table) < rows or any(len(row) < cols for row in table[:rows]):
        raise MissingCert(f"{name} must cover a {rows}x{cols} table")
    for i in range(rows):
        for j in range(cols):
            if table[i][j] is None:
                raise MissingCert(f"{name}[{i + 1}][{j + 1}] has no continuity certificate")
    return [row[:cols] for row in table[:rows]]


def transport(witness: ProductEstimateWitness, lambda1: Any = None, lambda2: Any = None,
              Lambda: Any = None) -> ProductEstimateWitness:
    """Witness for ``Lambda o beta o (lambda1 x lambda2)``.

    ``None`` stands for an identity map. Target-side constants fold into the
    p-side as the row maximum over j of the supplied table.
    """
    p_family = list(witness.p_family)
    q_family = list(witness.q_family)
    targets = witness.targets
    steps = list(witness.provenance)
    links: List[Dict[str, Any]] = []

    if lambda1 is not None:
        certs = _require_family(lambda1, len(p_family), "lambda1")
        links += [_link("lambda1", (k,), cert, old) for k, (cert, old) in enumerate(zip(certs, p_family), start=1)]
        p_family = [_fold(cert.constant, cert.seminorm) for cert in certs]
        steps.append("p_i o lambda1 <= C_i p'_i, so p_i(lambda1 x) <= C_i p'_i(x)")
    if lambda2 is not None:
        certs = _require_family(lambda2, len(q_family), "lambda2")
        links += [_link("lambda2", (k,), cert, old) for k, (cert, old) in enumerate(zip(certs, q_family), start=1)]
        q_family = [_fold(cert.constant, cert.seminorm) for cert in certs]
        steps.append("q_j o lambda2 <= D_j q'_j, so q_j(lambda2 y) <= D_j q'_j(y)")
    if Lambda is not None:
        table = _require_table(Lambda, len(p_family), len(q_family), "Lambda")
        links += [_link("Lambda", (i + 1, j + 1), cert, _entry(targets, i, j))
                  for i, row in enumerate(table) for j, cert in enumerate(row)]
        factors = [max(cert.constant for cert in row) for row in table]
        p_family = [_fold(f, p) for f, p in zip(factors, p_family)]
        targets = tuple(tuple(cert.seminorm for cert in row) for row in table)
        steps.append("y_ij(Lambda z) <= L_ij p_ij(z) <= (max_j L_ij) p_ij(z); the factor folds into p_i")

    log_info(f"Transported witness through linear maps ({len(links)} certified links)", LogCategory.WITNESS)
    return ProductEstimateWitness(
        p_family=tuple(p_family),
        q_family=tuple(q_family),
        targets=targets,
        provenance=tuple(steps),
        constants=_with_links(witness.constants, links),
    )


def pull_back(witness: ProductEstimateWitness, embedding: Any) -> ProductEstimateWitness:
    """Witness for ``beta`` from one for ``Lambda o beta`` when ``Lambda`` is an embedding.

    ``embedding[i][j]`` certifies ``p_ij <= C_ij (y_ij o Lambda)`` for the
    targets ``p_ij`` of beta, where ``y_ij`` are the targets of ``witness``.
    """
    table = _require_table(embedding, len(witness.p_family), len(witness.q_family), "embedding")
    links = [_link("embedding", (i + 1, j + 1), cert, _entry(witness.targets, i, j))
             for i, row in enumerate(table) for j, cert in enumerate(row)]
    factors = [max(cert.constant for cert in row) for row in table]
    log_info("Pulled witness back along an embedding", LogCategory.WITNESS)
    return ProductEstimateWitness(
        p_family=tuple(_fold(f, p) for f, p in zip(factors, witness.p_family)),
        q_family=witness.q_family,
        targets=tuple(tuple(cert.seminorm for cert in row) for row in table),
        provenance=witness.provenance + (
            "Lambda is a topological embedding: p_ij <= C_ij y_ij o Lambda",
            "p_ij(beta(x,y)) <= C_ij y_ij(Lambda beta(x,y)) <= (max_j C_ij) p_i(x) q_j(y)",
        ),
        constants=_with_links(witness.constants, links),
    )


def countable_support_witness(weights: Any) -> ProductEstimateWitness:
    """Witness for pointwise multiplication under the seminorms ``p_v``.

    The targets are ``p_ij = p_{v_ij}``. Only the countable union ``C`` of
    their supports matters, so the construction runs on finitely supported
    sequences over ``C`` with ``p = q = p_{1_C}``.
    """
    table = [[WeightedSup(weights=v) for v in row] for row in weights]
    if not table or not table[0] or any(len(row) != len(table[0]) for row in table):
        raise ShapeMismatch("weights must be a non-empty rectangular table of weight maps")

    support = sorted({m for row in table for target in row for m in target.support()})
    indicator = WeightedSup(weights={m: 1.0 for m in support})

    P_bound, Q_bound = [], []
    for row in table:
        P_row, Q_row = [], []
        for target in row:
            # |v x_m y_m| <= (v|x_m|)(|y_m|) on the support of v
            P_row.append(dominates(target, indicator))
            Q_row.append(dominates(WeightedSup(weights={m: 1.0 for m in target.support()}), indicator))
        P_bound.append(P_row)
        Q_bound.append(Q_row)

    inner = cnp_product_estimates(P_bound, Q_bound, targets=table)
    log_info(f"Support union has {len(support)} points", LogCategory.WITNESS)
    return ProductEstimateWitness(
        p_family=inner.p_family,
        q_family=inner.q_family,
        targets=inner.targets,
        provenance=(
            f"C = union of the supports of v_ij = {{{', '.join(str(m) for m in support)}}}, a countable set",
            "p_v = q_v o rho_C for every v vanishing off C",
            "p_vij(gamma eta) <= p_vij(gamma) p_1C(eta)  [pointwise product]",
        ) + inner.provenance,
        constants=dict(inner.constants, support=support),
    )


def base_certificates(constants: Any, bound: Any, prefix: str) -> List[List[DominationCert]]:
    """Certificates ``prefix_ij <= constants_ij * bound`` for abstract seminorms ``prefix_ij``."""
    matrix = _matrix(constants, prefix)
    return [[DominationCert(p=Base(id=f"{prefix}_{i + 1}{j + 1}"), q=bound, C=float(matrix[i, j]), rule="supplied")
             for j in range(matrix.shape[1])] for i in range(matrix.shape[0])]
