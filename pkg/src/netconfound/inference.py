"""Regression numerics: OLS with covariance and contrasts, logistic IRLS.

These are deliberately the naive textbook fits (no robust errors, no
longitudinal corrections) because the experiments study exactly how the naive
fits mislead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import expit

from .dynamics import OutcomePanel
from .network import SocialNetwork

__all__ = [
    "DesignMatrix",
    "RegressionFit",
    "ContrastResult",
    "SingularDesignError",
    "InsufficientDataError",
    "ols",
    "contrast",
    "logistic_irls",
    "build_asymmetry_design",
    "ASYMMETRY_COLUMNS",
]

RANK_TOL = 1e-10
SEPARATION_COEF_LIMIT = 30.0  # expit(30) is 1.0 to machine precision
WEIGHT_UNDERFLOW = 1e-10


class SingularDesignError(ValueError):
    """Design matrix is rank deficient; ``column`` names the offending column."""

    def __init__(self, column: str):
        self.column = column
        super().__init__(f"design is rank deficient at column {column!r}")


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class DesignMatrix:
    """Dense design matrix with named columns."""

    values: np.ndarray
    columns: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("design must be 2-d")
        if values.shape[1] != len(self.columns):
            raise ValueError("column names must match design width")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class RegressionFit:
    """Coefficients plus the uncertainty pieces the experiments report.

    ``statistics`` holds per-coefficient t values for OLS and Wald z values
    for logistic fits. ``separated`` is only ever set by the logistic path.
    """

    coefficients: np.ndarray
    covariance: np.ndarray
    standard_errors: np.ndarray
    statistics: np.ndarray
    dof: int
    columns: tuple[str, ...]
    converged: bool = True
    separated: bool = False
    residuals: np.ndarray | None = None

    def to_json_dict(self) -> dict:
        return {
            "coefficients": {
                name: {
                    "estimate": float(self.coefficients[k]),
                    "se": float(self.standard_errors[k]),
                    "statistic": float(self.statistics[k]),
                }
                for k, name in enumerate(self.columns)
            },
            "dof": int(self.dof),
            "converged": bool(self.converged),
            "separated": bool(self.separated),
        }

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n")


@dataclass(frozen=True)
class ContrastResult:
    estimate: float
    standard_error: float
    statistic: float


def _qr_with_rank_check(values: np.ndarray, columns: tuple[str, ...]):
    q, r = np.linalg.qr(values)
    diag = np.abs(np.diagonal(r))
    threshold = RANK_TOL * (diag.max() if diag.size else 0.0)
    bad = np.flatnonzero(diag <= threshold)
    if bad.size:
        raise SingularDesignError(columns[int(bad[0])])
    return q, r


def ols(design: DesignMatrix, y: np.ndarray) -> RegressionFit:
    """Least squares via QR, with s^2 (X'X)^{-1} covariance and t statistics.

    QR is used instead of the normal equations because exposure columns from
    dense networks can be close to collinear; rank is checked on the R
    diagonal at relative tolerance 1e-10.
    """
    y = np.asarray(y, dtype=float)
    X = design.values
    if y.shape != (design.rows,):
        raise ValueError(f"response has shape {y.shape}, expected ({design.rows},)")
    if design.rows <= design.width:
        raise InsufficientDataError(
            f"need more rows ({design.rows}) than columns ({design.width})"
        )
    q, r = _qr_with_rank_check(X, design.columns)
    beta = solve_triangular(r, q.T @ y)
    residuals = y - X @ beta
    dof = design.rows - design.width
    s2 = float(residuals @ residuals) / dof
    r_inv = solve_triangular(r, np.eye(design.width))
    covariance = s2 * (r_inv @ r_inv.T)
    covariance = 0.5 * (covariance + covariance.T)
    se = np.sqrt(np.diagonal(covariance))
    with np.errstate(divide="ignore", invalid="ignore"):
        stats = np.where(se > 0, beta / se, 0.0)
    return RegressionFit(
        coefficients=beta,
        covariance=covariance,
        standard_errors=se,
        statistics=stats,
        dof=dof,
        columns=design.columns,
        residuals=residuals,
    )


def contrast(fit: RegressionFit, c: np.ndarray) -> ContrastResult:
    """Linear combination c'beta with its standard error and ratio statistic."""
    c = np.asarray(c, dtype=float)
    if c.shape != fit.coefficients.shape:
        raise ValueError(
            f"contrast has shape {c.shape}, expected {fit.coefficients.shape}"
        )
    estimate = float(c @ fit.coefficients)
    variance = float(c @ fit.covariance @ c)
    se = float(np.sqrt(max(variance, 0.0)))
    statistic = estimate / se if se > 0 else 0.0
    return ContrastResult(estimate=estimate, standard_error=se, statistic=statistic)


def logistic_irls(
    design: DesignMatrix,
    y: np.ndarray,
    max_iter: int = 50,
    tol: float = 1e-10,
) -> RegressionFit:
    """Logistic maximum likelihood via iteratively reweighted least squares.

    Each iteration solves the weighted least-squares step with a QR of the
    sqrt-weighted design. Covariance is the inverse Fisher information at the
    optimum. Divergence (complete separation) is detected when a coefficient
    passes 30 in magnitude or the working weights underflow; such fits are
    returned flagged rather than raised.
    """
    y = np.asarray(y, dtype=float)
    X = design.values
    if y.shape != (design.rows,):
        raise ValueError(f"response has shape {y.shape}, expected ({design.rows},)")
    if not np.all(np.isin(y, (0.0, 1.0))):
        raise ValueError("logistic response must be binary")
    _qr_with_rank_check(X, design.columns)

    p = design.width
    beta = np.zeros(p)
    converged = False
    separated = False
    for _ in range(max_iter):
        eta = X @ beta
        mu = expit(eta)
        w = mu * (1.0 - mu)
        if np.min(w) < WEIGHT_UNDERFLOW:
            separated = True
            break
        sw = np.sqrt(w)
        z = eta + (y - mu) / w
        try:
            q, r = _qr_with_rank_check(X * sw[:, None], design.columns)
        except SingularDesignError:
            separated = True
            break
        new_beta = solve_triangular(r, q.T @ (z * sw))
        step = float(np.max(np.abs(new_beta - beta)))
        beta = new_beta
        if np.max(np.abs(beta)) > SEPARATION_COEF_LIMIT:
            separated = True
            break
        if step < tol:
            converged = True
            break

    eta = X @ beta
    mu = expit(eta)
    w = np.clip(mu * (1.0 - mu), WEIGHT_UNDERFLOW, None)
    fisher = (X * w[:, None]).T @ X
    covariance = np.linalg.inv(fisher)
    covariance = 0.5 * (covariance + covariance.T)
    se = np.sqrt(np.clip(np.diagonal(covariance), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        stats = np.where(se > 0, beta / se, 0.0)
    return RegressionFit(
        coefficients=beta,
        covariance=covariance,
        standard_errors=se,
        statistics=stats,
        dof=design.rows - design.width,
        columns=design.columns,
        converged=converged and not separated,
        separated=separated,
        residuals=y - mu,
    )


ASYMMETRY_COLUMNS = (
    "intercept",
    "own_lag",
    "named_exposure_t1",
    "namer_exposure_t1",
    "named_exposure_t0",
    "namer_exposure_t0",
)


def build_asymmetry_design(
    net: SocialNetwork, panel: OutcomePanel
) -> tuple[DesignMatrix, np.ndarray]:
    """Design for the directional-exposure regression on a three-slice panel.

    Response is the final slice. Columns, in fixed order: intercept, own value
    at slice 1, out- and in-exposures to slice 1, out- and in-exposures to
    slice 0. Out-exposure of node i sums over the people i named; in-exposure
    sums over the people naming i.
    """
    if panel.kind != "continuous":
        raise ValueError("asymmetry design expects a continuous panel")
    if panel.num_slices != 3:
        raise ValueError(f"panel must have exactly 3 slices, got {panel.num_slices}")
    if panel.n != net.n:
        raise ValueError(f"panel has {panel.n} nodes but network has {net.n}")
    y0, y1, y2 = panel.values
    X = np.column_stack(
        [
            np.ones(net.n),
            y1,
            net.exposure("out", y1),
            net.exposure("in", y1),
            net.exposure("out", y0),
            net.exposure("in", y0),
        ]
    )
    return DesignMatrix(values=X, columns=ASYMMETRY_COLUMNS), y2
