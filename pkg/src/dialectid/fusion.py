"""Logistic-regression score fusion.

Learns one scalar weight per system and one bias per dialect on a labeled
development set by maximizing the multiclass logistic likelihood of the
fused logits sum_k w_k * s_k + b, then applies the same affine fusion to
test tables. The fit is a damped Newton ascent run to a hard gradient-norm
tolerance; a tiny L2 term keeps the optimum finite on perfectly separable
development scores.
"""

from dataclasses import dataclass

import numpy as np

from .scores import ScoreTable


class FusionError(ValueError):
    pass


@dataclass
class FusionModel:
    system_tags: list
    dialects: list
    weights: np.ndarray  # (num_systems,)
    biases: np.ndarray  # (num_dialects,)


def _aligned_stack(tables):
    """Validate utterance/dialect alignment and stack to (K, N, D)."""
    if not tables:
        raise FusionError("fusion needs at least one system")
    ref = tables[0]
    aligned = [ref] + [t.reordered(ref.utt_ids) for t in tables[1:]]
    for t in aligned[1:]:
        if t.dialects != ref.dialects:
            raise FusionError(f"dialect ordering differs between {ref.system!r} "
                              f"and {t.system!r}")
    return aligned, np.stack([t.scores for t in aligned])


def _nll_grad_hess(params, stacked, truth, l2, want_hess=True):
    """Negative log likelihood of the fused softmax, with derivatives.

    Parameters are [w_1..w_K, b_1..b_D]; the Hessian is exact, making a
    damped Newton step cheap at this parameter count.
    """
    k, n, d = stacked.shape
    w, b = params[:k], params[k:]
    z = np.tensordot(w, stacked, axes=(0, 0)) + b  # (n, d)
    zmax = z.max(axis=1, keepdims=True)
    log_norm = zmax[:, 0] + np.log(np.exp(z - zmax).sum(axis=1))
    nll = -(z[np.arange(n), truth] - log_norm).sum() + 0.5 * l2 * (params @ params)
    p = np.exp(z - log_norm[:, None])  # (n, d)
    resid = p.copy()
    resid[np.arange(n), truth] -= 1.0
    gw = np.tensordot(stacked, resid, axes=([1, 2], [0, 1]))
    gb = resid.sum(axis=0)
    grad = np.concatenate([gw, gb]) + l2 * params
    if not want_hess:
        return nll, grad, None

    # E[s] per utterance/system under p, for the covariance blocks.
    sbar = np.einsum("knd,nd->kn", stacked, p)  # (k, n)
    h_ww = np.einsum("knd,nd,lnd->kl", stacked, p, stacked) - sbar @ sbar.T
    h_wb = np.einsum("knd,nd->kd", stacked, p) - sbar @ p
    h_bb = np.diag(p.sum(axis=0)) - p.T @ p
    hess = np.block([[h_ww, h_wb], [h_wb.T, h_bb]]) + l2 * np.eye(k + d)
    return nll, grad, hess


def fit_fusion(dev_tables, l2=1e-6, grad_tol=1e-8, max_iter=200):
    """Fit fusion weights on development tables carrying truth labels."""
    aligned, stacked = _aligned_stack(dev_tables)
    truth = aligned[0].truth_indices()
    for t in aligned[1:]:
        if t.truth is not None and not np.array_equal(t.truth_indices(), truth):
            raise FusionError(f"truth labels disagree between systems "
                              f"({aligned[0].system!r} vs {t.system!r})")
    k, _, d = stacked.shape
    x = np.concatenate([np.ones(k), np.zeros(d)])
    nll, grad, hess = _nll_grad_hess(x, stacked, truth, l2)
    for _ in range(max_iter):
        norm = float(np.linalg.norm(grad))
        if norm <= grad_tol:
            break
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.solve(hess + 1e-9 * np.eye(len(x)), grad)
        # Backtracking keeps the Newton step inside the descent region.
        t = 1.0
        while t > 1e-12:
            cand = x - t * step
            cand_nll, cand_grad, cand_hess = _nll_grad_hess(cand, stacked, truth, l2)
            if cand_nll <= nll - 1e-4 * t * float(grad @ step):
                break
            t /= 2.0
        x, nll, grad, hess = cand, cand_nll, cand_grad, cand_hess
    norm = float(np.linalg.norm(grad))
    if norm > grad_tol:
        raise FusionError(
            f"fusion did not converge: gradient norm {norm:.3e} > {grad_tol:.0e} "
            f"after {max_iter} iterations"
        )
    return FusionModel([t.system for t in aligned], list(aligned[0].dialects),
                       x[:k].copy(), x[k:].copy())


def apply_fusion(model, tables):
    """Fuse test-side score tables with previously learned weights."""
    aligned, stacked = _aligned_stack(tables)
    if len(aligned) != len(model.system_tags):
        raise FusionError(f"expected {len(model.system_tags)} systems, "
                          f"got {len(aligned)}")
    if aligned[0].dialects != model.dialects:
        raise FusionError("dialect ordering differs from the fitted fusion")
    fused = np.tensordot(model.weights, stacked, axes=(0, 0)) + model.biases
    tag = "fusion(" + "+".join(model.system_tags) + ")"
    return ScoreTable(aligned[0].utt_ids, model.dialects, fused,
                      aligned[0].truth, tag)


def save_fusion(model, path):
    """Weights and biases as a small readable text file."""
    with open(path, "w", encoding="utf-8") as f:
        for tag, w in zip(model.system_tags, model.weights):
            f.write(f"weight\t{tag}\t{float(w)!r}\n")
        for d, b in zip(model.dialects, model.biases):
            f.write(f"bias\t{d}\t{float(b)!r}\n")


def load_fusion(path):
    tags, weights, dialects, biases = [], [], [], []
    with open(path, encoding="utf-8") as f:
        for line in f:
            kind, name, value = line.rstrip("\n").split("\t")
            if kind == "weight":
                tags.append(name)
                weights.append(float(value))
            elif kind == "bias":
                dialects.append(name)
                biases.append(float(value))
            else:
                raise FusionError(f"{path}: unknown fusion record {kind!r}")
    return FusionModel(tags, dialects, np.array(weights), np.array(biases))
