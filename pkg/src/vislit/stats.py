"""Score processing and statistical analyses.

Covers guess-corrected literacy scoring and normalization, skewness,
polynomial regression with elbow-based degree selection, MCA of item-level
responses, and paired t-tests with Bonferroni adjustment.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

DEFAULT_ELBOW_DELTA = 0.01


@dataclass(frozen=True)
class LiteracyScores:
    participant_id: str
    vlat_raw: float
    calvi_raw: float
    sgl_raw: float
    vlat: float
    calvi: float
    sgl: float

    def composite(self):
        return (self.vlat + self.calvi + self.sgl) / 3.0


@dataclass(frozen=True)
class PolyFit:
    degree: int
    coefficients: np.ndarray  # ascending powers
    r2_by_degree: dict


@dataclass(frozen=True)
class McaResult:
    eigenvalues: np.ndarray          # descending, squared singular values
    column_coordinates: np.ndarray   # categories x components (principal)
    column_contributions: np.ndarray # categories x components, sums to 1 per comp
    item_dominant_component: np.ndarray  # per item, argmax of summed contributions
    n_components_elbow: int


def corrected_score(correct_flags, choice_counts):
    """Guess-corrected raw score: +1 per correct item, -1/(C-1) per wrong one."""
    correct_flags = np.asarray(correct_flags, dtype=bool)
    choice_counts = np.asarray(choice_counts, dtype=np.int64)
    if correct_flags.shape != choice_counts.shape:
        raise ValueError("correct_flags and choice_counts must align")
    if np.any(choice_counts < 2):
        raise ValueError("every item needs at least 2 choices")
    penalties = -1.0 / (choice_counts - 1.0)
    return float(np.where(correct_flags, 1.0, penalties).sum())


def normalize_corrected(raw, choice_counts):
    """Map a corrected raw score to [0, 1] over its possible range."""
    choice_counts = np.asarray(choice_counts, dtype=np.int64)
    lo = float((-1.0 / (choice_counts - 1.0)).sum())
    hi = float(choice_counts.size)
    return (raw - lo) / (hi - lo)


def normalize_linear(value, lo, hi):
    return (value - lo) / (hi - lo)


def build_literacy_scores(participant_id, vlat_correct, vlat_choice_counts,
                          calvi_correct_count, calvi_items, sgl_responses):
    """Assemble per-participant raw + [0,1]-normalized scores for all tests."""
    sgl_responses = np.asarray(sgl_responses)
    if np.any((sgl_responses < 1) | (sgl_responses > 6)):
        raise ValueError("SGL responses must be in 1..6")
    vlat_raw = corrected_score(vlat_correct, vlat_choice_counts)
    sgl_raw = float(sgl_responses.sum())
    return LiteracyScores(
        participant_id=participant_id,
        vlat_raw=vlat_raw,
        calvi_raw=float(calvi_correct_count),
        sgl_raw=sgl_raw,
        vlat=normalize_corrected(vlat_raw, vlat_choice_counts),
        calvi=normalize_linear(calvi_correct_count, 0, calvi_items),
        sgl=normalize_linear(sgl_raw, 10, 60),
    )


def skewness(values, method="moment"):
    """Skewness of `values` using population moments.

    method="moment": standardized third central moment E[((X-u)/s)^3].
    method="median": Pearson's second coefficient, 3*(mean - median)/std.
    """
    x = np.asarray(values, dtype=np.float64)
    sd = x.std()
    if sd == 0:
        raise ValueError("skewness undefined for zero-variance data")
    if method == "moment":
        return float(np.mean(((x - x.mean()) / sd) ** 3))
    if method == "median":
        return float(3.0 * (x.mean() - np.median(x)) / sd)
    raise ValueError(f"unknown skewness method: {method}")


def _polyfit_degree(x, y, degree):
    # normal equations on a column-scaled Vandermonde matrix
    A = np.vander(x, degree + 1, increasing=True)
    scale = np.linalg.norm(A, axis=0)
    scale[scale == 0] = 1.0
    As = A / scale
    coef, *_ = np.linalg.lstsq(As.T @ As, As.T @ y, rcond=None)
    return coef / scale


def r_squared(y, y_hat):
    y = np.asarray(y, dtype=np.float64)
    ss_res = float(np.sum((y - y_hat) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0:
        raise ValueError("R^2 undefined for zero-variance y")
    return 1.0 - ss_res / ss_tot


def elbow_index(gains, delta=DEFAULT_ELBOW_DELTA):
    """Smallest index k (1-based) whose next incremental gain drops below delta."""
    for k in range(len(gains) - 1):
        if gains[k + 1] < delta:
            return k + 1
    return len(gains)


def polyfit_elbow(x, y, max_degree, delta=DEFAULT_ELBOW_DELTA) -> PolyFit:
    """Fit degrees 1..max_degree; pick the lowest degree past the R^2 elbow."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size <= max_degree:
        raise ValueError("not enough points for the requested max degree")
    r2 = {}
    coeffs = {}
    for d in range(1, max_degree + 1):
        c = _polyfit_degree(x, y, d)
        coeffs[d] = c
        r2[d] = r_squared(y, np.polyval(c[::-1], x))
    degree = max_degree
    for d in range(1, max_degree):
        if r2[d + 1] - r2[d] < delta:
            degree = d
            break
    return PolyFit(degree=degree, coefficients=coeffs[degree], r2_by_degree=r2)


def poly_eval_and_derivatives(coefficients, v):
    """Horner evaluation of p(v), p'(v), p''(v); coefficients ascending."""
    c = np.asarray(coefficients, dtype=np.float64)[::-1]  # descending for Horner
    p = 0.0
    d1 = 0.0
    d2 = 0.0
    for a in c:
        d2 = d2 * v + 2.0 * d1
        d1 = d1 * v + p
        p = p * v + a
    return p, d1, d2


def poly_stationary_points(coefficients):
    """Real roots of the first derivative, ascending."""
    c = np.asarray(coefficients, dtype=np.float64)
    dcoef = c[1:] * np.arange(1, c.size)  # ascending derivative coefficients
    roots = np.roots(dcoef[::-1])
    real = roots[np.abs(roots.imag) < 1e-9].real
    return np.sort(real)


def binarize_sgl(responses):
    """Likert 1-3 -> 0 (low), 4-6 -> 1 (high)."""
    r = np.asarray(responses)
    if np.any((r < 1) | (r > 6)):
        raise ValueError("SGL responses must be in 1..6")
    return (r >= 4).astype(np.int64)


def indicator_matrix(responses):
    """Expand a rows x items categorical matrix into 0/1 indicator columns.

    Returns (Z, item_of_column): each item contributes one column per
    observed category, mutually exclusive within the item.
    """
    responses = np.asarray(responses)
    n, q = responses.shape
    cols = []
    item_of_column = []
    for j in range(q):
        cats = np.unique(responses[:, j])
        if cats.size < 2:
            raise ValueError(f"item {j} has a single category; MCA is degenerate")
        for cat in cats:
            cols.append((responses[:, j] == cat).astype(np.float64))
            item_of_column.append(j)
    return np.column_stack(cols), np.asarray(item_of_column)


def mca(responses, delta=DEFAULT_ELBOW_DELTA) -> McaResult:
    """Multiple correspondence analysis of item-level categorical responses.

    Standard CA of the indicator matrix: standardized residuals of the
    correspondence matrix are decomposed by SVD; eigenvalues are the squared
    singular values.  No Benzecri correction.
    """
    Z, item_of_column = indicator_matrix(responses)
    total = Z.sum()
    P = Z / total
    r = P.sum(axis=1)
    c = P.sum(axis=0)
    S = (P - np.outer(r, c)) / np.sqrt(np.outer(r, c))
    _, sv, Vt = np.linalg.svd(S, full_matrices=False)
    # drop numerically-null dimensions
    keep = sv > 1e-10
    sv = sv[keep]
    V = Vt[keep].T
    eigenvalues = sv ** 2
    # principal column coordinates and per-axis contributions (= V^2)
    coords = (V / np.sqrt(c)[:, None]) * sv[None, :]
    contributions = V ** 2
    n_items = item_of_column.max() + 1
    item_contrib = np.zeros((n_items, sv.size))
    for j in range(n_items):
        item_contrib[j] = contributions[item_of_column == j].sum(axis=0)
    dominant = item_contrib.argmax(axis=1)
    ratios = eigenvalues / eigenvalues.sum()
    n_elbow = elbow_index(ratios, delta)
    return McaResult(
        eigenvalues=eigenvalues,
        column_coordinates=coords,
        column_contributions=contributions,
        item_dominant_component=dominant,
        n_components_elbow=n_elbow,
    )


def paired_t_test(a, b):
    """Two-tailed paired t-test; returns (t, df, p)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.size < 2:
        raise ValueError("paired t-test needs equal-length samples of size >= 2")
    d = a - b
    sd = d.std(ddof=1)
    if sd == 0:
        raise ValueError("zero-variance differences: t undefined")
    n = d.size
    t = d.mean() / (sd / np.sqrt(n))
    df = n - 1
    # two-tailed p via the regularized incomplete beta function
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return float(t), df, p


def bonferroni(p_values, m=None):
    """Multiply each p by m (default: len(p_values)) and clamp at 1."""
    p = np.asarray(p_values, dtype=np.float64)
    if m is None:
        m = p.size
    return np.minimum(p * m, 1.0)
