import numpy as np
import pytest
from scipy.optimize import minimize
from scipy.special import expit

from netconfound import (
    ASYMMETRY_COLUMNS,
    DesignMatrix,
    InsufficientDataError,
    OutcomePanel,
    SingularDesignError,
    SocialNetwork,
    build_asymmetry_design,
    contrast,
    logistic_irls,
    ols,
)


def _design(X, names=None):
    X = np.asarray(X, dtype=float)
    names = names or tuple(f"c{k}" for k in range(X.shape[1]))
    return DesignMatrix(values=X, columns=tuple(names))


# -- OLS -----------------------------------------------------------------------

def test_ols_interpolation_exact():
    rng = np.random.default_rng(0)
    X = np.column_stack([np.ones(10), rng.normal(size=10)])
    beta_true = np.array([1.5, -2.0])
    y = X @ beta_true
    fit = ols(_design(X), y)
    np.testing.assert_allclose(fit.coefficients, beta_true, atol=1e-10)
    assert float(fit.residuals @ fit.residuals) < 1e-10


def test_ols_hand_integers_match_normal_equations():
    # independent oracle: solve X'X b = X'y directly
    X = np.array([[1, 0], [1, 1], [1, 2], [1, 3], [1, 4], [1, 5]], dtype=float)
    y = np.array([1.0, 3.0, 2.0, 5.0, 4.0, 7.0])
    oracle = np.linalg.solve(X.T @ X, X.T @ y)
    fit = ols(_design(X), y)
    np.testing.assert_allclose(fit.coefficients, oracle, atol=1e-10)
    # covariance oracle: s^2 (X'X)^{-1}
    resid = y - X @ oracle
    s2 = resid @ resid / (6 - 2)
    np.testing.assert_allclose(fit.covariance, s2 * np.linalg.inv(X.T @ X), atol=1e-10)
    assert fit.dof == 4
    np.testing.assert_allclose(fit.standard_errors, np.sqrt(np.diag(fit.covariance)))
    np.testing.assert_allclose(fit.statistics, fit.coefficients / fit.standard_errors)


def test_ols_row_permutation_invariance():
    rng = np.random.default_rng(1)
    X = np.column_stack([np.ones(40), rng.normal(size=(40, 2))])
    y = rng.normal(size=40)
    fit = ols(_design(X), y)
    perm = rng.permutation(40)
    fit_p = ols(_design(X[perm]), y[perm])
    np.testing.assert_allclose(fit.coefficients, fit_p.coefficients, atol=1e-12)
    np.testing.assert_allclose(fit.covariance, fit_p.covariance, atol=1e-12)


def test_ols_residuals_orthogonal_to_design():
    rng = np.random.default_rng(2)
    X = np.column_stack([np.ones(60), rng.normal(size=(60, 3))])
    y = rng.normal(size=60)
    fit = ols(_design(X), y)
    assert np.max(np.abs(X.T @ fit.residuals)) < 1e-8


def test_ols_singular_design_names_column():
    rng = np.random.default_rng(3)
    base = rng.normal(size=20)
    X = np.column_stack([np.ones(20), base, 2.0 * base])
    with pytest.raises(SingularDesignError) as exc:
        ols(_design(X, ("intercept", "a", "a_doubled")), rng.normal(size=20))
    assert exc.value.column in ("a", "a_doubled")


def test_ols_insufficient_rows():
    with pytest.raises(InsufficientDataError):
        ols(_design(np.eye(3)), np.ones(3))


def test_ols_response_length_checked():
    with pytest.raises(ValueError):
        ols(_design(np.ones((5, 1))), np.ones(4))


# -- contrasts -------------------------------------------------------------------

def test_contrast_unit_vector_recovers_coefficient():
    rng = np.random.default_rng(4)
    X = np.column_stack([np.ones(30), rng.normal(size=(30, 2))])
    y = rng.normal(size=30)
    fit = ols(_design(X), y)
    for k in range(3):
        c = np.zeros(3)
        c[k] = 1.0
        res = contrast(fit, c)
        assert res.estimate == pytest.approx(fit.coefficients[k], abs=1e-14)
        assert res.standard_error == pytest.approx(fit.standard_errors[k], abs=1e-14)


def test_contrast_zero_vector():
    rng = np.random.default_rng(5)
    X = np.column_stack([np.ones(20), rng.normal(size=20)])
    fit = ols(_design(X), rng.normal(size=20))
    res = contrast(fit, np.zeros(2))
    assert res.estimate == 0.0
    assert res.standard_error == 0.0
    assert res.statistic == 0.0


def test_contrast_hand_quadratic_form():
    # diagonal covariance diag(..., 4, 9, ...) with c = (0,0,1,-1,0,0): SE = sqrt(13)
    from netconfound.inference import RegressionFit

    cov = np.diag([1.0, 1.0, 4.0, 9.0, 1.0, 1.0])
    fit = RegressionFit(
        coefficients=np.array([0.0, 0.0, 2.0, 1.0, 0.0, 0.0]),
        covariance=cov,
        standard_errors=np.sqrt(np.diag(cov)),
        statistics=np.zeros(6),
        dof=10,
        columns=tuple("abcdef"),
    )
    res = contrast(fit, np.array([0.0, 0.0, 1.0, -1.0, 0.0, 0.0]))
    assert res.estimate == pytest.approx(1.0)
    assert res.standard_error == pytest.approx(np.sqrt(13.0))


def test_contrast_difference_identity():
    rng = np.random.default_rng(6)
    X = np.column_stack([np.ones(50), rng.normal(size=(50, 3))])
    fit = ols(_design(X), rng.normal(size=50))
    c = np.array([0.0, 1.0, -1.0, 0.0])
    res = contrast(fit, c)
    cov = fit.covariance
    expected_var = cov[1, 1] + cov[2, 2] - 2.0 * cov[1, 2]
    assert res.estimate == pytest.approx(fit.coefficients[1] - fit.coefficients[2])
    assert res.standard_error**2 == pytest.approx(expected_var, rel=1e-12)


def test_contrast_length_checked():
    rng = np.random.default_rng(7)
    X = np.column_stack([np.ones(20), rng.normal(size=20)])
    fit = ols(_design(X), rng.normal(size=20))
    with pytest.raises(ValueError):
        contrast(fit, np.ones(3))


# -- logistic IRLS ----------------------------------------------------------------

def _neg_log_lik(beta, X, y):
    eta = X @ beta
    # log(1 + exp(eta)) - y * eta, computed stably
    return float(np.sum(np.logaddexp(0.0, eta) - y * eta))


def _neg_log_lik_grad(beta, X, y):
    return X.T @ (expit(X @ beta) - y)


def test_logistic_intercept_only_closed_form():
    y = np.array([1.0] * 75 + [0.0] * 25)
    fit = logistic_irls(_design(np.ones((100, 1))), y)
    assert fit.converged
    assert fit.coefficients[0] == pytest.approx(np.log(3.0), abs=1e-8)


def test_logistic_matches_generic_optimizer():
    rng = np.random.default_rng(8)
    X = np.column_stack([np.ones(20), rng.normal(size=20)])
    y = (rng.random(20) < expit(X @ np.array([0.3, 0.8]))).astype(float)
    fit = logistic_irls(_design(X), y)
    assert fit.converged
    res = minimize(
        _neg_log_lik,
        np.zeros(2),
        args=(X, y),
        jac=_neg_log_lik_grad,
        method="BFGS",
        options={"gtol": 1e-12, "maxiter": 500},
    )
    np.testing.assert_allclose(fit.coefficients, res.x, atol=1e-6)


def test_logistic_score_vanishes_at_optimum():
    rng = np.random.default_rng(9)
    X = np.column_stack([np.ones(200), rng.normal(size=(200, 2))])
    y = (rng.random(200) < expit(X @ np.array([-0.2, 0.5, 1.0]))).astype(float)
    fit = logistic_irls(_design(X), y)
    assert fit.converged
    assert np.max(np.abs(_neg_log_lik_grad(fit.coefficients, X, y))) < 1e-6


def test_logistic_covariance_matches_fd_hessian():
    rng = np.random.default_rng(10)
    X = np.column_stack([np.ones(80), rng.normal(size=(80, 2))])
    y = (rng.random(80) < expit(X @ np.array([0.1, -0.7, 0.4]))).astype(float)
    fit = logistic_irls(_design(X), y)
    assert fit.converged
    h = 1e-5
    p = 3
    hess = np.zeros((p, p))
    for a in range(p):
        for b in range(p):
            bpp = fit.coefficients.copy(); bpp[a] += h; bpp[b] += h
            bpm = fit.coefficients.copy(); bpm[a] += h; bpm[b] -= h
            bmp = fit.coefficients.copy(); bmp[a] -= h; bmp[b] += h
            bmm = fit.coefficients.copy(); bmm[a] -= h; bmm[b] -= h
            hess[a, b] = (
                _neg_log_lik(bpp, X, y)
                - _neg_log_lik(bpm, X, y)
                - _neg_log_lik(bmp, X, y)
                + _neg_log_lik(bmm, X, y)
            ) / (4.0 * h * h)
    oracle_cov = np.linalg.inv(hess)
    rel = np.linalg.norm(fit.covariance - oracle_cov) / np.linalg.norm(oracle_cov)
    assert rel < 1e-4


def test_logistic_null_slope_z_rarely_large():
    # balanced binary predictor independent of y: |z| < 3 in >= 99% of seeds
    big_z = 0
    seeds = 300
    for seed in range(seeds):
        rng = np.random.default_rng(seed)
        x = np.zeros(10_000)
        x[5_000:] = 1.0
        rng.shuffle(x)
        y = (rng.random(10_000) < 0.5).astype(float)
        fit = logistic_irls(_design(np.column_stack([np.ones(10_000), x])), y)
        if abs(fit.statistics[1]) >= 3.0:
            big_z += 1
    assert big_z / seeds <= 0.01


def test_logistic_separation_flagged_not_raised():
    x = np.linspace(-2.0, 2.0, 40)
    y = (x > 0).astype(float)  # perfectly separated
    fit = logistic_irls(_design(np.column_stack([np.ones(40), x])), y)
    assert fit.separated
    assert not fit.converged


def test_logistic_rejects_nonbinary_response():
    with pytest.raises(ValueError):
        logistic_irls(_design(np.ones((10, 1))), np.linspace(0, 1, 10))


def test_logistic_singular_design_raises():
    base = np.linspace(-1, 1, 30)
    X = np.column_stack([np.ones(30), base, base])
    y = (np.random.default_rng(11).random(30) < 0.5).astype(float)
    with pytest.raises(SingularDesignError):
        logistic_irls(_design(X), y)


# -- asymmetry design ---------------------------------------------------------------

def _panel(values):
    return OutcomePanel(values=np.asarray(values, dtype=float), kind="continuous")


def test_asymmetry_design_empty_network():
    net = SocialNetwork.from_edges(4, [])
    panel = _panel(np.arange(12).reshape(3, 4))
    design, response = build_asymmetry_design(net, panel)
    assert design.columns == ASYMMETRY_COLUMNS
    np.testing.assert_array_equal(response, panel.values[2])
    np.testing.assert_array_equal(design.values[:, 2:], np.zeros((4, 4)))
    np.testing.assert_array_equal(design.values[:, 1], panel.values[1])


def test_asymmetry_design_hand_case():
    # 2 nodes, edge 0 -> 1: row 0's named-exposure column holds node 1's value,
    # row 1's named column is 0 and its namer column holds node 0's value
    net = SocialNetwork.from_edges(2, [(0, 1)])
    panel = _panel([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    design, response = build_asymmetry_design(net, panel)
    X = design.values
    assert X[0, 2] == 4.0 and X[1, 2] == 0.0  # named exposure at slice 1
    assert X[0, 3] == 0.0 and X[1, 3] == 3.0  # namer exposure at slice 1
    assert X[0, 4] == 2.0 and X[1, 4] == 0.0  # named exposure at slice 0
    assert X[0, 5] == 0.0 and X[1, 5] == 1.0
    np.testing.assert_array_equal(response, [5.0, 6.0])


def test_asymmetry_design_relabeling_permutes_rows():
    rng = np.random.default_rng(12)
    n = 15
    adj = (rng.random((n, n)) < 0.2).astype(np.uint8)
    np.fill_diagonal(adj, 0)
    values = rng.normal(size=(3, n))
    perm = rng.permutation(n)
    design_a, resp_a = build_asymmetry_design(SocialNetwork(adj), _panel(values))
    design_b, resp_b = build_asymmetry_design(
        SocialNetwork(adj[np.ix_(perm, perm)]), _panel(values[:, perm])
    )
    np.testing.assert_allclose(design_b.values, design_a.values[perm], atol=1e-12)
    np.testing.assert_allclose(resp_b, resp_a[perm], atol=1e-12)


def test_asymmetry_design_validation():
    net = SocialNetwork.from_edges(3, [])
    with pytest.raises(ValueError):
        build_asymmetry_design(net, _panel(np.zeros((2, 3))))  # wrong slice count
    with pytest.raises(ValueError):
        build_asymmetry_design(net, _panel(np.zeros((3, 4))))  # node mismatch
    binary = OutcomePanel(values=np.zeros((3, 3)), kind="binary")
    with pytest.raises(ValueError):
        build_asymmetry_design(net, binary)


def test_fit_json_export(tmp_path):
    rng = np.random.default_rng(13)
    X = np.column_stack([np.ones(25), rng.normal(size=25)])
    fit = ols(_design(X, ("intercept", "slope")), rng.normal(size=25))
    payload = fit.to_json_dict()
    assert set(payload["coefficients"]) == {"intercept", "slope"}
    assert payload["dof"] == 23
    path = tmp_path / "fit.json"
    fit.write_json(path)
    assert path.read_text().startswith("{")
